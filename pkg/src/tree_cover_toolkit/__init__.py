"""
Tree Cover Toolkit

Builds and verifies tree covers and Ramsey tree covers of finite metrics:
doubling metrics, planar graphs, padded partition families and general metrics.
"""

__version__ = "0.1.0"
