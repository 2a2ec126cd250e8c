"""
mlnn - multi-level neural network surrogates for parametric PDEs
"""

__version__ = "0.1.0"
