"""Universal iterative contraction toolkit."""
