"""Street-canyon detection and air-quality pre-assessment on CityGML-lite models."""

__version__ = "0.1.0"
