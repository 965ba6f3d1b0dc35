"""Cooperative IAM permission enumeration across multiple principals."""

__version__ = "0.1.0"
