"""Entanglement monotones from observables on symmetric tensor powers.

Submodules
----------
partitions   integer partitions, symmetric-group characters, entropies
multilinear  multipartite states, flattenings, marginals, divergences
schurweyl    compressed symmetric-power bases, isotypic operators, isometries
gmean        Kubo-Ando geometric means, mean trees, PSD order
observables  observable families and their axiom checks
functionals  finite-n values, closed-form bounds, lower functional
semiring     preordered semirings and abstract functionals
cli          command-line interface
"""

__version__ = "0.1.0"
