"""Exact machinery for the small-amplitude limit.

The surface displacement obeys eta_tt - eta_xx = 0, so eta(x,t) =
f(x - t) + g(x + t).  For irrotational flow the velocity field follows from
the surface alone: u = eta + c0 at every depth, v = -z * eta_x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Field, spectral_shift

__all__ = ["SurfaceProfile", "evolve_dalembert", "reconstruct_irrotational"]


@dataclass(frozen=True)
class SurfaceProfile:
    """Right- and left-moving components of the surface displacement.

    ``g_left`` defaults to zero: the waves of interest propagate in one
    direction only.
    """

    f: Field
    g_left: Field | None = None
    c0: float = 0.0

    def __post_init__(self) -> None:
        if self.g_left is None:
            object.__setattr__(self, "g_left", Field.zeros(self.f.grid))
        elif self.g_left.grid != self.f.grid:
            raise ValueError("f and g_left must share a grid")


def evolve_dalembert(prof: SurfaceProfile, t: float) -> Field:
    """Surface displacement at time t: f(x - t) + g_left(x + t).

    Shifts are spectral, hence exact for band-limited profiles, with
    periodic wrap-around.
    """
    eta = spectral_shift(prof.f, t).values
    if np.any(prof.g_left.values):
        eta = eta + spectral_shift(prof.g_left, -t).values
    return Field(prof.f.grid, eta)


def reconstruct_irrotational(
    eta: Field, eta_x: Field, c0: float, z: float
) -> tuple[Field, Field]:
    """Velocity components of the irrotational limit flow at depth z in [0, 1].

    u = eta + c0 (depth-independent), v = -z * eta_x; v is linear in z, so the
    bottom condition v(z=0) = 0 and the surface condition v(z=1) = eta_t (for a
    pure right-mover) hold by construction.
    """
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"depth coordinate z must lie in [0, 1], got {z}")
    if eta.grid != eta_x.grid:
        raise ValueError("eta and eta_x must share a grid")
    u = Field(eta.grid, eta.values + c0)
    v = Field(eta.grid, -z * eta_x.values)
    return u, v
