"""Pansharpened multiframe super-resolution in the Haar wavelet domain."""

__version__ = "0.3.0"
