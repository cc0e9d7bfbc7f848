"""Relaxation toolkit for buoyancy-driven incompressible mixing.

Desk-scale numerics for a linear relaxation of variable-density
incompressible flow: pointwise constraint-set and hull predicates, wave-cone
(oscillation-direction) certificates, localized plane-wave fields built from
differential potentials, and explicit self-similar mixing-zone profiles with
admissibility and energy checks, all behind a single CLI.
"""

__version__ = "0.1.0"
