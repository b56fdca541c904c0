"""Multi-view sarcasm detection toolkit: corpus handling, cue debiasing,
an annotation workflow with an HTTP service, and a three-view fusion
classifier over precomputed text/image embeddings."""

__version__ = "0.1.0"
