"""dunklmc: Monte Carlo Dirichlet solver for the Dunkl Laplacian.

Simulates the Dunkl jump-diffusion process (Euler on the singular-drift
continuous part, thinned reflection jumps) to estimate harmonic measure
and solve Dirichlet boundary value problems, h(x) = E^x[f(X_tau)], with
exact operator algebra and analytic-kernel validation layers behind a
CLI and a small HTTP service.
"""

__version__ = "0.1.0"
