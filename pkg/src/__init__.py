"""System-level simulator of LTE networks serving low-altitude aerial UEs."""

__version__ = "0.1.0"
