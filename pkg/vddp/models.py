"""Validated configuration and report models (session files, bench specs, CSV rows)."""

from fractions import Fraction
from typing import Any, ClassVar, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class AdversaryStep(BaseModel):
    role: Literal["client", "server"]
    index: int = Field(..., ge=0)
    kind: str = Field(..., min_length=1)
    target: Optional[int] = None


class VddlmSettings(BaseModel):
    d: int = Field(1, ge=1)
    t_scale: str = "1"
    gamma: int = Field(4, ge=0)
    nu: int = Field(8, ge=1)
    allow_truncation: bool = True
    data: Optional[List[List[int]]] = None

    @field_validator("t_scale")
    @classmethod
    def _positive_scale(cls, v: str) -> str:
        if Fraction(v) <= 0:
            raise ValueError("t_scale must be positive")
        return v


class VrrSettings(BaseModel):
    k: int = Field(2, ge=2)
    probs: List[str] = Field(default_factory=lambda: ["2/3", "1/3"])
    omega_bits: int = Field(4, ge=1, le=20)
    data: Optional[List[int]] = None

    @model_validator(mode="after")
    def _probs_match(self) -> "VrrSettings":
        if len(self.probs) != self.k:
            raise ValueError(f"expected {self.k} probabilities, got {len(self.probs)}")
        if sum(Fraction(p) for p in self.probs) != 1:
            raise ValueError("probabilities must sum to 1")
        return self


class SessionConfig(BaseModel):
    """One I2DP session: parties, topology, mechanism, adversary script and seeds."""

    session_id: str = "session"
    mechanism: Literal["vddlm", "vrr"] = "vddlm"
    n_cli: int = Field(3, ge=1)
    n_ser: int = Field(2, ge=1)
    topology: Optional[List[List[int]]] = None
    seed: int = 0
    backend: Optional[str] = None
    challenge_mode: Optional[Literal["interactive", "fiat-shamir"]] = None
    transport: Literal["memory", "tcp"] = "memory"
    vddlm: VddlmSettings = Field(default_factory=VddlmSettings)
    vrr: VrrSettings = Field(default_factory=VrrSettings)
    adversary: List[AdversaryStep] = Field(default_factory=list)
    dump_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_topology(self) -> "SessionConfig":
        if self.topology is None:
            return self
        if len(self.topology) != self.n_cli:
            raise ValueError("topology needs one server list per client")
        blocks = [frozenset(servers) for servers in self.topology]
        for servers in blocks:
            if not servers or any(i < 0 or i >= self.n_ser for i in servers):
                raise ValueError("topology references unknown servers")
        for a in blocks:
            for b in blocks:
                if a != b and a & b:
                    raise ValueError("client server sets must be identical or disjoint")
        if self.mechanism == "vddlm" and len(set(blocks)) > 1:
            raise ValueError("vddlm sessions support a single client block")
        return self

    @model_validator(mode="after")
    def _check_data(self) -> "SessionConfig":
        if self.mechanism == "vddlm" and self.vddlm.data is not None:
            if len(self.vddlm.data) != self.n_cli or any(len(x) != self.vddlm.d for x in self.vddlm.data):
                raise ValueError("vddlm data must be n_cli vectors of length d")
        if self.mechanism == "vrr" and self.vrr.data is not None and len(self.vrr.data) != self.n_cli:
            raise ValueError("vrr data must hold one class per client")
        for step in self.adversary:
            bound = self.n_cli if step.role == "client" else self.n_ser
            if step.index >= bound:
                raise ValueError(f"adversary targets {step.role} {step.index} of {bound}")
        return self


class BenchSpec(BaseModel):
    """Sweep axes for the benchmark grid."""

    mechanism: Literal["vddlm", "vrr"] = "vddlm"
    d: List[int] = Field(default_factory=lambda: [1, 2])
    epsilon: List[float] = Field(default_factory=lambda: [1.0])
    delta: float = Field(1e-6, gt=0)
    omega_bits: List[int] = Field(default_factory=lambda: [4])
    n_ser: List[int] = Field(default_factory=lambda: [2])
    n_cli: List[int] = Field(default_factory=lambda: [3])
    repetitions: int = Field(1, ge=1)
    seed: int = 0
    output: Optional[str] = None
    nus: Optional[List[int]] = None
    max_gamma: Optional[int] = None
    gamma: Optional[int] = Field(None, ge=0)
    backend: Optional[str] = None

    @model_validator(mode="after")
    def _axes_non_empty(self) -> "BenchSpec":
        for name in ("d", "epsilon", "omega_bits", "n_ser", "n_cli"):
            if not getattr(self, name):
                raise ValueError(f"sweep axis {name} is empty")
        return self


class BenchRow(BaseModel):
    mechanism: str
    d: int
    epsilon: float
    omega_bits: int
    n_ser: int
    n_cli: int
    repetition: int
    n_lap: int = 0
    t_prove_ms: float
    t_verify_ms: float
    bytes: int
    verifier_ops: int = 0
    l1: float = 0.0
    realized_epsilon: float = 0.0
    delta: float = 0.0
    accepted: bool = True

    TIMING_FIELDS: ClassVar[Tuple[str, ...]] = ("t_prove_ms", "t_verify_ms")

    def deterministic(self) -> Dict[str, Any]:
        return {k: v for k, v in self.model_dump().items() if k not in self.TIMING_FIELDS}
