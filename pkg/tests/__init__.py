"""Test suite for ServiceNow Consulting Agent."""
