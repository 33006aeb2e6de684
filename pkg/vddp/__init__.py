"""Verifiable distributed differential privacy: VRR and VDDLM with a tight accountant."""

__version__ = "0.3.0"
