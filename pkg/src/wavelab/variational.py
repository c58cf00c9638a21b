"""Discrete variational calculus on paths of periodic diffeomorphisms.

A path gamma(t, x) = x + psi(t, x), with psi periodic in x and d(gamma)/dx
strictly positive, carries the kinetic-energy action

    a(gamma)      = (1/2) int_0^T int ( u^2 + u_x^2 ) dx dt,
    a_c0(gamma)   = (1/2) int_0^T int ( (u + c0)^2 + u_x^2 ) dx dt,

where u = gamma_t o gamma^{-1} is the spatial velocity.  Three independent
discretizations of the first variation in a direction phi (periodic, zero
at t = 0 and t = T) are provided:

* ``first_variation_fd``        central difference of the action in eps;
* ``first_variation_midpoint``  the integrated-by-parts-in-eps integrand,
  using theta = phi o gamma^{-1};
* ``first_variation_el``        minus the integral of theta against the
  Euler-Lagrange residual

      R = u_t + 2*c0*u_x + 3*u*u_x - u_txx - 2*u_x*u_xx - u*u_xxx.

Agreement of the three, and its improvement under refinement in eps and in
the time step, is what :func:`verify_variational_identity` reports.

Discretization choices, load-bearing for the observed orders:

* gamma_t is centered in time, so velocities exist only at interior time
  levels; the action quadrature therefore runs over k = 1..K-1 with
  end-corrected weights dt*[3/2, 1, ..., 1, 3/2] that sum exactly to T and
  keep the quadrature second order in dt.
* the midpoint sum runs over k = 1..K-1 with the same end-corrected
  weights (its integrand does not vanish at the endpoints, the theta_t
  terms survive there); the EL sum runs over k = 2..K-2 with flat dt
  weights, since theta vanishes linearly at the endpoints and the omitted
  strips cost only O(dt^2).
* gamma^{-1} is computed by Newton iteration on a monotone (PCHIP)
  interpolant of the samples, to residual 1e-12; off-grid evaluation of
  periodic samples uses a periodic cubic spline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .grid import Field, Grid1D

__all__ = [
    "DiffeoPath",
    "PathPerturbation",
    "SinusoidalPathSpec",
    "BumpPerturbationSpec",
    "uniform_times",
    "inverse_diffeo",
    "periodic_interp",
    "spatial_velocity",
    "action",
    "action_eta",
    "el_residual",
    "first_variation_fd",
    "first_variation_midpoint",
    "first_variation_el",
    "verify_variational_identity",
    "compose_with_diffeo",
]


def uniform_times(t_total: float, n_intervals: int) -> np.ndarray:
    """K+1 equally spaced sample times on [0, T]."""
    if not (np.isfinite(t_total) and t_total > 0):
        raise ValueError(f"total time must be > 0, got {t_total}")
    if n_intervals < 2:
        raise ValueError("need at least 2 time intervals")
    return np.linspace(0.0, t_total, n_intervals + 1)


def _check_times(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 3:
        raise ValueError("times must hold at least 3 levels (K >= 2)")
    dt = times[1] - times[0]
    if dt <= 0 or not np.allclose(np.diff(times), dt, rtol=1e-10, atol=1e-14):
        raise ValueError("times must be uniformly increasing")
    return float(dt)


@dataclass(frozen=True, eq=False)
class DiffeoPath:
    """Sampled path gamma(t_k, x_j) of periodic diffeomorphisms.

    ``gamma`` has shape (K+1, n); each row must be x + (periodic part) with
    strictly positive spectral derivative.
    """

    grid: Grid1D
    times: np.ndarray
    gamma: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        _check_times(times)
        if gamma.shape != (len(times), self.grid.n):
            raise ValueError(
                f"gamma must have shape (K+1, n)={(len(times), self.grid.n)}, "
                f"got {gamma.shape}"
            )
        if not np.all(np.isfinite(gamma)):
            raise ValueError("gamma has non-finite entries")
        psi = gamma - self.grid.x[None, :]
        for k, row in enumerate(psi):
            slope = 1.0 + self.grid.deriv_values(row)
            low = float(np.min(slope))
            if low <= 0.0:
                raise ValueError(
                    f"path is not a diffeomorphism: min d(gamma)/dx = {low:.3g} "
                    f"at time level {k}"
                )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "gamma", gamma)

    @property
    def psi(self) -> np.ndarray:
        """Periodic displacement gamma - x, shape (K+1, n)."""
        return self.gamma - self.grid.x[None, :]

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_total(self) -> float:
        return float(self.times[-1] - self.times[0])

    def perturbed(self, pert: "PathPerturbation", eps: float) -> "DiffeoPath":
        """The varied path gamma + eps*phi (checked to stay a diffeo)."""
        if pert.grid is not self.grid and pert.grid != self.grid:
            raise ValueError("perturbation lives on a different grid")
        if pert.phi.shape != self.gamma.shape:
            raise ValueError("perturbation shape does not match the path")
        try:
            return DiffeoPath(
                grid=self.grid, times=self.times, gamma=self.gamma + eps * pert.phi
            )
        except ValueError as exc:
            raise ValueError(f"variation failed at eps={eps}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class PathPerturbation:
    """Variation direction phi(t_k, x_j), periodic, zero at t=0 and t=T."""

    grid: Grid1D
    times: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        _check_times(times)
        if phi.shape != (len(times), self.grid.n):
            raise ValueError(
                f"phi must have shape (K+1, n)={(len(times), self.grid.n)}, "
                f"got {phi.shape}"
            )
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi has non-finite entries")
        scale = max(float(np.max(np.abs(phi))), 1.0)
        if np.max(np.abs(phi[0])) > 1e-12 * scale or np.max(np.abs(phi[-1])) > 1e-12 * scale:
            raise ValueError("phi must vanish at both endpoint time levels")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "phi", phi)


def inverse_diffeo(
    grid: Grid1D,
    gamma_row: np.ndarray,
    targets: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> np.ndarray:
    """Solve gamma(s) = x for each target x on one time level.

    The samples are extended by one period on each side (gamma(x +/- L) =
    gamma(x) +/- L), interpolated monotonically with PCHIP, and inverted by
    Newton iteration started from linear inverse interpolation.
    """
    if targets is None:
        targets = grid.x
    x = grid.x
    length = grid.length
    xe = np.concatenate([x - length, x, x + length])
    ge = np.concatenate([gamma_row - length, gamma_row, gamma_row + length])
    interp = PchipInterpolator(xe, ge)
    dinterp = interp.derivative()

    s = np.interp(targets, ge, xe)
    for _ in range(max_iter):
        resid = interp(s) - targets
        if np.max(np.abs(resid)) <= tol:
            return s
        s = np.clip(s - resid / dinterp(s), xe[0], xe[-1])
    resid = float(np.max(np.abs(interp(s) - targets)))
    raise RuntimeError(
        f"diffeomorphism inversion did not reach {tol:g} in {max_iter} "
        f"iterations (residual {resid:.3g})"
    )


def periodic_interp(grid: Grid1D, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate periodic samples at arbitrary points via a periodic cubic spline."""
    x0 = grid.x[0]
    x_aug = np.append(grid.x, x0 + grid.length)
    v_aug = np.append(values, values[0])
    spline = CubicSpline(x_aug, v_aug, bc_type="periodic")
    wrapped = (points - x0) % grid.length + x0
    return spline(wrapped)


def _interior_state(path: DiffeoPath, pert: PathPerturbation | None):
    """Velocities u_k (and theta_k = phi o gamma^{-1} when pert is given)
    for interior levels k = 1..K-1, as dicts keyed by k."""
    grid = path.grid
    psi = path.psi
    dt = path.dt
    big_k = path.n_intervals
    u = {}
    theta = {}
    for k in range(1, big_k):
        s = inverse_diffeo(grid, path.gamma[k])
        psi_t = (psi[k + 1] - psi[k - 1]) / (2.0 * dt)
        u[k] = periodic_interp(grid, psi_t, s)
        if pert is not None:
            theta[k] = periodic_interp(grid, pert.phi[k], s)
    if pert is not None:
        theta[0] = np.zeros(grid.n)
        theta[big_k] = np.zeros(grid.n)
    return u, theta


def spatial_velocity(path: DiffeoPath, k: int) -> Field:
    """u(t_k) = gamma_t o gamma^{-1} at an interior time level."""
    if not 1 <= k <= path.n_intervals - 1:
        raise IndexError(
            f"spatial velocity needs an interior level 1..{path.n_intervals - 1}, got {k}"
        )
    grid = path.grid
    psi = path.psi
    s = inverse_diffeo(grid, path.gamma[k])
    psi_t = (psi[k + 1] - psi[k - 1]) / (2.0 * path.dt)
    return Field(grid, periodic_interp(grid, psi_t, s))


def _time_weights(big_k: int, dt: float) -> np.ndarray:
    # interior levels 1..K-1; half-cell corrections at both ends make the
    # weights sum to exactly K*dt = T
    w = np.full(big_k - 1, dt)
    w[0] += 0.5 * dt
    w[-1] += 0.5 * dt
    return w


def action_eta(path: DiffeoPath, c0: float) -> float:
    """Kinetic action (1/2) iint ((u + c0)^2 + u_x^2) dx dt."""
    grid = path.grid
    big_k = path.n_intervals
    u, _ = _interior_state(path, None)
    weights = _time_weights(big_k, path.dt)
    total = 0.0
    for w, k in zip(weights, range(1, big_k)):
        uk = u[k]
        ux = grid.deriv_values(uk)
        total += w * 0.5 * grid.integrate_values((uk + c0) ** 2 + ux * ux)
    return float(total)


def action(path: DiffeoPath) -> float:
    """Kinetic action (1/2) iint (u^2 + u_x^2) dx dt."""
    return action_eta(path, 0.0)


def el_residual(
    u_prev: Field, u_mid: Field, u_next: Field, dt: float, kappa: float = 0.0
) -> Field:
    """Euler-Lagrange residual at the middle of a snapshot triple.

    R = u_t + 2*kappa*u_x + 3*u*u_x - u_txx - 2*u_x*u_xx - u*u_xxx, with
    the time derivative centered over (u_prev, u_next).
    """
    grid = u_mid.grid
    if u_prev.grid != grid or u_next.grid != grid:
        raise ValueError("snapshot triple must share one grid")
    u = u_mid.values
    u_t = (u_next.values - u_prev.values) / (2.0 * dt)
    ux = grid.deriv_values(u)
    uxx = grid.deriv_values(u, order=2)
    uxxx = grid.deriv_values(u, order=3)
    u_txx = grid.deriv_values(u_t, order=2)
    base = u_t + 3.0 * u * ux - u_txx - 2.0 * ux * uxx - u * uxxx
    return Field(grid, base + (2.0 * kappa) * ux)


def first_variation_fd(
    path: DiffeoPath, pert: PathPerturbation, eps: float, c0: float = 0.0
) -> float:
    """Central difference (a(gamma + eps*phi) - a(gamma - eps*phi)) / (2 eps)."""
    if not (np.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be > 0, got {eps}")
    a_plus = action_eta(path.perturbed(pert, eps), c0)
    a_minus = action_eta(path.perturbed(pert, -eps), c0)
    return (a_plus - a_minus) / (2.0 * eps)


def first_variation_midpoint(
    path: DiffeoPath, pert: PathPerturbation, c0: float = 0.0
) -> float:
    """The variation written against theta = phi o gamma^{-1} before any
    integration by parts:

        iint { (u + c0) [theta_t + u theta_x - theta u_x]
               + u_x [theta_tx + u theta_xx - theta u_xx] } dx dt
    """
    grid = path.grid
    big_k = path.n_intervals
    if big_k < 4:
        raise ValueError("midpoint variation needs K >= 4 time intervals")
    dt = path.dt
    u, theta = _interior_state(path, pert)
    weights = _time_weights(big_k, dt)
    total = 0.0
    for w, k in zip(weights, range(1, big_k)):
        uk = u[k]
        ux = grid.deriv_values(uk)
        uxx = grid.deriv_values(uk, order=2)
        th = theta[k]
        thx = grid.deriv_values(th)
        thxx = grid.deriv_values(th, order=2)
        th_t = (theta[k + 1] - theta[k - 1]) / (2.0 * dt)
        th_tx = grid.deriv_values(th_t)
        integrand = (uk + c0) * (th_t + uk * thx - th * ux) + ux * (
            th_tx + uk * thxx - th * uxx
        )
        total += w * grid.integrate_values(integrand)
    return float(total)


def first_variation_el(
    path: DiffeoPath, pert: PathPerturbation, c0: float = 0.0
) -> float:
    """- iint theta * R dx dt with R the Euler-Lagrange residual (kappa=c0)."""
    grid = path.grid
    big_k = path.n_intervals
    if big_k < 4:
        raise ValueError("EL variation needs K >= 4 time intervals")
    dt = path.dt
    u, theta = _interior_state(path, pert)
    total = 0.0
    for k in range(2, big_k - 1):
        residual = el_residual(
            Field(grid, u[k - 1]),
            Field(grid, u[k]),
            Field(grid, u[k + 1]),
            dt,
            kappa=c0,
        )
        total -= dt * grid.integrate_values(theta[k] * residual.values)
    return float(total)


def verify_variational_identity(
    path: DiffeoPath, pert: PathPerturbation, eps: float = 1e-3, c0: float = 0.0
) -> dict:
    """Compare the three discretizations of the first variation.

    Returns a report with D_fd, D_mid, D_el and the relative mismatches of
    the midpoint and EL routes against the finite-difference route.
    """
    d_fd = first_variation_fd(path, pert, eps, c0)
    d_mid = first_variation_midpoint(path, pert, c0)
    d_el = first_variation_el(path, pert, c0)
    scale = max(abs(d_fd), 1e-300)
    return {
        "D_fd": d_fd,
        "D_mid": d_mid,
        "D_el": d_el,
        "rel_fd_mid": abs(d_fd - d_mid) / scale,
        "rel_fd_el": abs(d_fd - d_el) / scale,
        "eps": float(eps),
        "c0": float(c0),
        "n": path.grid.n,
        "K": path.n_intervals,
    }


def compose_with_diffeo(path: DiffeoPath, chi: np.ndarray) -> DiffeoPath:
    """Right-translate the path: samples of gamma(t, chi(x)).

    ``chi`` holds samples of a fixed (time-independent) diffeomorphism at
    the grid points; the periodic displacement of gamma is re-evaluated at
    chi by spline interpolation.  The spatial velocity of the composed path
    equals that of the original (right invariance), up to interpolation
    error.
    """
    grid = path.grid
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (grid.n,):
        raise ValueError(f"chi must sample the grid, shape {(grid.n,)}, got {chi.shape}")
    rows = [chi + periodic_interp(grid, d, chi) for d in path.psi]
    return DiffeoPath(grid=grid, times=path.times, gamma=np.array(rows))


@dataclass(frozen=True)
class SinusoidalPathSpec:
    """Analytic path generator psi(t, x) = amp * sum_m a_m sin(k_m x - w_m t + p_m).

    Being closed-form, the same spec can be sampled on any (n, K) pair, so
    refinement studies compare discretizations of one underlying path.
    """

    mode_amps: tuple
    omegas: tuple
    phases: tuple
    amplitude: float = 0.05

    @classmethod
    def random(cls, rng, n_modes: int = 3, amplitude: float = 0.05):
        amps = tuple(rng.uniform(0.5, 1.0, n_modes) / np.arange(1, n_modes + 1) ** 2)
        omegas = tuple(rng.uniform(0.5, 1.5, n_modes))
        phases = tuple(rng.uniform(0.0, 2.0 * np.pi, n_modes))
        return cls(amps, omegas, phases, amplitude)

    def psi(self, x: np.ndarray, t: float, length: float) -> np.ndarray:
        out = np.zeros_like(x)
        for m, (a, w, p) in enumerate(
            zip(self.mode_amps, self.omegas, self.phases), start=1
        ):
            km = 2.0 * np.pi * m / length
            out += a * np.sin(km * x - w * t + p)
        return self.amplitude * out

    def build(self, grid: Grid1D, times: np.ndarray) -> DiffeoPath:
        gamma = np.array([grid.x + self.psi(grid.x, t, grid.length) for t in times])
        return DiffeoPath(grid=grid, times=times, gamma=gamma)


@dataclass(frozen=True)
class BumpPerturbationSpec:
    """Analytic perturbation phi(t, x) = amp * t(T-t)/T^2 * sum_m b_m sin(k_m x + c_m).

    The t(T-t) envelope vanishes exactly at both endpoints.
    """

    mode_amps: tuple
    phases: tuple
    amplitude: float = 0.1

    @classmethod
    def random(cls, rng, n_modes: int = 3, amplitude: float = 0.1):
        amps = tuple(rng.uniform(0.5, 1.0, n_modes) / np.arange(1, n_modes + 1) ** 2)
        phases = tuple(rng.uniform(0.0, 2.0 * np.pi, n_modes))
        return cls(amps, phases, amplitude)

    def phi(self, x: np.ndarray, t: float, length: float, t_total: float) -> np.ndarray:
        envelope = t * (t_total - t) / t_total**2
        out = np.zeros_like(x)
        for m, (b, c) in enumerate(zip(self.mode_amps, self.phases), start=1):
            km = 2.0 * np.pi * m / length
            out += b * np.sin(km * x + c)
        return self.amplitude * envelope * out

    def build(self, grid: Grid1D, times: np.ndarray) -> PathPerturbation:
        t_total = float(times[-1] - times[0])
        phi = np.array([self.phi(grid.x, t, grid.length, t_total) for t in times])
        return PathPerturbation(grid=grid, times=times, phi=phi)
