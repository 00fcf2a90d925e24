"""Dialect identification toolkit.

Feature extraction (log-mel filter banks, MFCCs, prosody, precomputed
embeddings), utterance pooling with optional speaker normalisation, seeded
SD/SI splits, a small numpy MLP, evaluation reports and n-best language-ID
analysis. The ``dialectid`` command wraps the pipeline.
"""

__version__ = "0.1.0"
