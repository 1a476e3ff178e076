"""Change impact analysis for class-diagram models."""
__version__ = "0.1.0"
