"""
Plate Disclinations

Interior-penalty DG solver and experiment driver for clamped Föppl-von
Kármán plates with wedge disclinations.
"""

__version__ = "1.0.0"
