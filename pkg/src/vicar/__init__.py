"""vicar: decides where a system of second-order ODEs sits in the eigenframe classification
of the inverse problem of the calculus of variations, and verifies multipliers."""

__version__ = "0.1.0"
