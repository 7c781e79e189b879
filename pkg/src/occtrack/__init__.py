"""Multi-robot active target tracking under unknown occlusions."""
__version__ = "0.1.0"
