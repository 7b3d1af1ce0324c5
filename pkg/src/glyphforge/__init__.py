"""Handwritten-glyph recognition toolkit.

Pipeline: preprocessing (Otsu binarization, 60x60 normalization, Zhang-Suen
thinning, contour detection) -> zoned chain-code histograms (200-d) and
zoned Hu invariant moments (63-d) -> two sigmoid MLPs trained by online
backpropagation with momentum -> weighted-majority fusion of their
per-class confidences.
"""

__version__ = "0.1.0"
