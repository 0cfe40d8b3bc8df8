"""Numerical toolkit for causal fermion systems on small spin dimensions.

Submodules: opcore (local correlation operators and spectra), builders
(example systems), clifford, tangentcone, spinstruct, singular, topo,
acceptance and cli. Import them directly; nothing is loaded eagerly here.
"""

__version__ = "0.1.0"
