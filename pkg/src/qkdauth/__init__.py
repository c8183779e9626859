"""Information-theoretic message authentication for QKD public channels."""
