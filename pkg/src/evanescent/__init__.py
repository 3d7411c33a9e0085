"""Numerical laboratory for a harmonic chain with flip and exchange noise.

Subpackages
-----------
fourier          lattice/continuous Fourier conventions, test functions
chain            exact event-driven simulation of the noisy chain
moments          closed first/second moment evolution (correlation kernels)
spectral_volume  closed-form volume correlations and regime classification
fd               fluctuation-dissipation coefficients and resolvent scaling
fractional       spectral symbols, decay lemmas and the skew 3/2-stable kernel
cli              experiment harness (config, CSV/JSON output, CLI)
"""

__version__ = "0.1.0"
