"""Toolkit for rapidly customizing event extraction to novel event types:
curated trigger lexicons, distant supervision, CNN trigger and generic
argument classifiers, and exact-offset scoring.
"""

__version__ = "0.1.0"
