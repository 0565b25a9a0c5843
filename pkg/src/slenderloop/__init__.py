"""Spectral toolkit for an inextensible closed elastic filament in Stokes flow.

The filament is a thin tube of radius ``epsilon`` around a closed centerline
``X(s)``.  Its hydrodynamics are modeled by the Neumann-to-Dirichlet map of
the straight periodic cylinder, transported to the curve through a frame.
Submodules:

* :mod:`~slenderloop.specialfn`: modified Bessel functions ``K_0, K_1, K_2``
* :mod:`~slenderloop.grid`: periodic grids, spectral derivatives, Besov norms
* :mod:`~slenderloop.geometry`: curves, frames, star norm, identities
* :mod:`~slenderloop.ntd`: multipliers, curved map, resolvents, semigroup
* :mod:`~slenderloop.tension`: the tension determination problem
* :mod:`~slenderloop.evolution`: exponential time differencing of the flow
* :mod:`~slenderloop.oracle`: independent reference computations
* :mod:`~slenderloop.acceptance`, :mod:`~slenderloop.cli`: verification and batch runs
"""
from .errors import (ConfigurationError, DomainError, GeometryError, NumericalError,
                     OracleError, SlenderLoopError)
from .evolution import EvolutionConfig, EvolutionRun, run
from .geometry import (ClosedCurve, OrthonormalFrame, bending_energy, build_frame, circle,
                       ellipse, perturbed_circle, reparameterize_arclength, star_norm,
                       trefoil)
from .ntd import (MultiplierTable, curved_ntd_apply, multiplier_normal, multiplier_table,
                  multiplier_tangential, semigroup_apply)
from .specialfn import bessel_k, bessel_k_scaled
from .tension import TensionSystem, solve_tension, tension_for_bending

__version__ = "0.1.0"

__all__ = [
    "SlenderLoopError", "ConfigurationError", "DomainError", "GeometryError",
    "NumericalError", "OracleError",
    "bessel_k", "bessel_k_scaled",
    "ClosedCurve", "OrthonormalFrame", "circle", "perturbed_circle", "ellipse", "trefoil",
    "reparameterize_arclength", "build_frame", "star_norm", "bending_energy",
    "MultiplierTable", "multiplier_table", "multiplier_tangential", "multiplier_normal",
    "curved_ntd_apply", "semigroup_apply",
    "TensionSystem", "solve_tension", "tension_for_bending",
    "EvolutionConfig", "EvolutionRun", "run",
]
