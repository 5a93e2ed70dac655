"""Monte Carlo simulation, verification and refinement studies."""
