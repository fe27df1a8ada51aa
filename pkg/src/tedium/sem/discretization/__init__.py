"""One-dimensional quadrature and element operators."""
