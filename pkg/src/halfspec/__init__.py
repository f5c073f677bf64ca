"""halfspec: half-eigenvalues, Fucik curves and resonant solvability for the
one-dimensional p-Laplacian with jumping coefficients."""

__version__ = "0.1.0"
