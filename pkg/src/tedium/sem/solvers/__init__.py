"""Direct, Krylov and Fourier solvers."""
