"""Single-photon subradiance in a chirally coupled 1D atomic chain."""

__version__ = "0.1.0"
