"""rblab: a simulation and analysis laboratory for randomized benchmarking.

Submodules
----------
superop       transfer matrices, Choi/CP tests, diamond norm, fidelities
groups        Pauli/Clifford groups, adjoint representations, irrep catalogs
fourier       implementation maps and their matrix Fourier transforms
distributions sampling distributions, convolution powers, mixing times
noise         gate-dependent noise models used in the studies
rbsim         the data-collection protocol and the exact-expectation engine
decay         decay-model extraction and theorem-bound certification
poles         Hankel/ESPRIT/MUSIC pole extraction and Vandermonde conditioning
filtering     filter functions, scalable estimators, 3-design POVMs, XEB
gauge         depolarizing gauge, fidelity decompositions, CP counterexamples
cli           file-driven command line front end
"""

from . import (basis, decay, distributions, filtering, fourier, gauge, groups,
               noise, poles, rbsim, runio, superop)

__all__ = [
    "basis", "decay", "distributions", "filtering", "fourier", "gauge",
    "groups", "noise", "poles", "rbsim", "runio", "superop",
]

__version__ = "0.1.0"
