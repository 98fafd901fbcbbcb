"""rgsearch: reward-guided tree search for step-by-step reasoning."""

__version__ = "0.1.0"
