"""Identifiability and estimation for an SIR model with under-reporting and prior immunity."""

__version__ = "0.1.0"
