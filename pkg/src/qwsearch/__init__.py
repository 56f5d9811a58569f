"""Quantum-walk spatial search on scale-free multigraphs.

Submodules
----------
graph
    LCD and Erdos-Renyi generators, degree statistics, hop distances.
spectral
    Dense symmetric eigensystems and unitary evolution.
search
    Search Hamiltonian, optimal hopping energy, measurement time, ``T``.
centrality
    Six node centralities and classical mean first-passage times.
stats
    Lognormal mixtures, scaling exponents, log histograms.
harness
    Configuration, reproducible sweeps and the ``qwsearch`` command line.
"""
from .errors import QwSearchError
from .graph import Multigraph, generate_erdos_renyi, generate_lcd, generate_with_exponent
from .search import SearchConfig, SearchResult, run_search

__version__ = "0.1.0"

__all__ = [
    "Multigraph",
    "QwSearchError",
    "SearchConfig",
    "SearchResult",
    "generate_erdos_renyi",
    "generate_lcd",
    "generate_with_exponent",
    "run_search",
    "__version__",
]
