"""Used-car price estimation: cleaning, statistics, forest, and serving."""

__version__ = "0.1.0"
