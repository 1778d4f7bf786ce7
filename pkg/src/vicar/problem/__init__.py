"""Problem-file models, loading and validation."""
