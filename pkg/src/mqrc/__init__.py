"""Simulator and brute-force verifier for multiparty quantum remote control."""

__version__ = "0.1.0"
