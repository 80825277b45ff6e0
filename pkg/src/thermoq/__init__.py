"""thermoq: transmon decoherence under thermal microwave fields.

Closed-form noise spectral densities, dispersive-circuit photon
occupations and rate budgets, TLS-driven relaxation-rate fluctuation
simulation, spectral estimation/fitting, and a reproducible CLI.
"""

__version__ = "0.1.0"
