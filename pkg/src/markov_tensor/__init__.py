__all__ = ["engine", "analysis", "tensorfile", "cli"]
