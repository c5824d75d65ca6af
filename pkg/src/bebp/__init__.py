"""Chronic boundary-pattern poisoning against binary intrusion detectors."""

__version__ = "0.1.0"
