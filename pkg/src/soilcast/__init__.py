"""Decision-tree toolkit for soil-fertility classification."""

__version__ = "0.1.0"
