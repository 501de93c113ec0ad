"""Continuous-number tooling for vector graphics: parsing, canvas normalization,
token/float decomposition, the SVGFloat format, number encoder/decoder math and
perceptual rewards."""

__version__ = "0.1.0"
