"""Evolution-space geometry of a SODE and exterior calculus over moving frames."""
