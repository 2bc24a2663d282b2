"""Signed paraphrase graphs for sentence-pair dataset augmentation and repair."""

__version__ = "0.1.0"
