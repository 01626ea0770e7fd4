"""Decision procedures for low levels of the first-order quantifier alternation hierarchy."""

__version__ = "0.1.0"
