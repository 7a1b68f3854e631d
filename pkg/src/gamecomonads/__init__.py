"""Game comonads over finite relational structures."""

__version__ = "0.1.0"
