"""Toolkit for linking instance segmentations to question-answer pairs.

Subpackages cover the mask algebra, the dataset model, feature plumbing,
the three shallow trainable models (region attention, multiple-choice MLP,
proposal aggregation), the pipeline CLI, and the annotation service.
"""

__version__ = "0.1.0"
