"""Dual-rail gradient echo memory simulator for Zeeman-split 87Rb ensembles."""
__version__ = "0.1.0"
