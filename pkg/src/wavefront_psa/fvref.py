"""First-order upwind finite volumes marching in ``x`` with cells in ``t``.

Both eigenvalues are non-negative and the flux ``Φ = (h(c), c + q1(c))``
depends on ``c`` alone, so the Godunov interface flux is the flux of the
state below the interface. Serves as an independent check on front tracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DerivedFunctions, State
from .riemann import Rarefaction, Shock, WaveFan, fan_state


class CflError(ArithmeticError):
    """The a-priori speed bound was violated during the march."""


@dataclass(frozen=True)
class FvGrid:
    dt: float
    dx: float
    T: float
    n_cells: int
    n_steps: int
    lam_bar: float
    u_floor: float

    @property
    def nu(self):
        """CFL number ``lam_bar dx / dt``."""
        return self.lam_bar * self.dx / self.dt

    @property
    def t_centers(self):
        return (np.arange(self.n_cells) + 0.5) * self.dt


@dataclass
class FvField:
    """Stored ``x``-slices of the cell averages ``u`` and ``m = u c``."""

    grid: FvGrid
    xs: np.ndarray
    u: np.ndarray
    m: np.ndarray
    min_u: float
    conservation_defect: float = 0.0
    meta: dict = field(default_factory=dict)
    fns: DerivedFunctions | None = field(default=None, repr=False)

    @property
    def c(self):
        return self.m / self.u

    def slice_index(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.xs - x)))
        if abs(self.xs[i] - x) > 1e-9 * max(1.0, abs(x)):
            raise ValueError(f"no stored slice at x={x!r} (nearest {self.xs[i]!r})")
        return i

    def slice(self, x: float):
        """``(t_centers, c, u)`` at the stored slice ``x``."""
        i = self.slice_index(x)
        return self.grid.t_centers, self.m[i] / self.u[i], self.u[i].copy()


def physical_flux(fns: DerivedFunctions, c):
    """``Φ(c) = (h(c), c + q1(c))``; works on scalars and arrays."""
    return fns.h(c)[0], c + fns.q1(c)[0]


def godunov_flux(fns: DerivedFunctions, U_below, U_above):
    """Interface flux between cells with conserved ``(u, m)``: upwind from below."""
    u, m = U_below
    return physical_flux(fns, m / u)


def _u_floor(fns: DerivedFunctions, c_data, u_data, c_min, c_max):
    cs = np.linspace(c_min, c_max, 257)
    if np.all(fns.Gpp_indicator(cs) < 0.0):
        # W = u G(c) never decreases in x, so u >= min W / max G
        G = np.array([fns.G(float(c)) for c in cs])
        W_min = min(float(u) * fns.G(float(c)) for c, u in set(zip(c_data, u_data)))
        return W_min / float(G.max())
    return float(np.min(u_data)) / 2.0


def fv_run(fns: DerivedFunctions, x0_data, bottom_c, dt: float, X_stop: float, T: float,
           nu: float = 0.9, keep=None, n_keep: int = 101) -> FvField:
    """March ``U_j <- U_j - (dx/dt)(F_{j+1/2} - F_{j-1/2})`` from ``x = 0`` to ``X_stop``.

    Parameters
    ----------
    x0_data : callable
        ``t -> (c, u)`` on arrays of cell centres, data on ``{x = 0}``.
    bottom_c : callable
        ``x -> c`` prescribed on ``{t = 0}``; the bottom flux is ``Φ(bottom_c(x_n))``.
    dt, T : float
        Cell width and height of the strip; the top closure copies the last cell.
    nu : float
        Target CFL number, at most 1.
    keep : sequence of float, optional
        Abscissae whose slices are stored (snapped to the step grid). By
        default ``n_keep`` evenly spaced slices including both ends.
    """
    if not dt > 0.0 or not T > dt:
        raise ValueError("need 0 < dt < T")
    if not 0.0 < nu <= 1.0:
        raise ValueError("CFL number must lie in (0, 1]")
    if not X_stop > 0.0:
        raise ValueError("X_stop must be positive")
    n_cells = int(round(T / dt))
    tc = (np.arange(n_cells) + 0.5) * dt
    c0, u0 = (np.asarray(v, dtype=float) * np.ones(n_cells) for v in x0_data(tc))
    if np.any(u0 <= 0.0) or np.any(c0 < 0.0) or np.any(c0 > 1.0):
        raise ValueError("x = 0 data must have u > 0 and c in [0, 1]")

    # a-priori speed bound from the data range
    probe = np.linspace(0.0, X_stop, 1025)
    cb = np.array([float(bottom_c(float(x))) for x in probe])
    c_min = float(min(c0.min(), cb.min()))
    c_max = float(max(c0.max(), cb.max()))
    u_floor = _u_floor(fns, c0, u0, c_min, c_max)
    H_max = float(np.max(fns.H(np.linspace(c_min, c_max, 257))[0]))
    lam_bar = H_max / u_floor
    n_steps = max(1, math.ceil(X_stop * lam_bar / (nu * dt)))
    dx = X_stop / n_steps
    grid = FvGrid(dt, dx, n_cells * dt, n_cells, n_steps, lam_bar, u_floor)

    if keep is None:
        keep_steps = np.unique(np.round(np.linspace(0, n_steps, n_keep)).astype(int))
    else:
        keep_steps = np.unique([int(round(float(x) / dx)) for x in keep])
        if keep_steps.min() < 0 or keep_steps.max() > n_steps:
            raise ValueError("requested slice outside [0, X_stop]")
    keep_set = set(int(k) for k in keep_steps)

    u, m = u0.copy(), u0 * c0
    total0 = (u.sum() * dt, m.sum() * dt)
    flux_in = [0.0, 0.0]
    xs_out, u_out, m_out = [], [], []
    min_u = float(u.min())
    r = dx / dt
    for n in range(n_steps + 1):
        if n in keep_set:
            xs_out.append(n * dx)
            u_out.append(u.copy())
            m_out.append(m.copy())
        if n == n_steps:
            break
        c = m / u
        cbot = float(bottom_c(n * dx))
        fu, fm = physical_flux(fns, c)
        bu, bm = physical_flux(fns, cbot)
        Fu = np.concatenate(([bu], fu))
        Fm = np.concatenate(([bm], fm))
        u = u - r * np.diff(Fu)
        m = m - r * np.diff(Fm)
        flux_in[0] += dx * (Fu[0] - Fu[-1])
        flux_in[1] += dx * (Fm[0] - Fm[-1])
        lo = float(u.min())
        min_u = min(min_u, lo)
        if lo < u_floor * (1.0 - 1e-12):
            raise CflError(f"u dropped to {lo!r} below the a-priori bound {u_floor!r} at x={(n + 1) * dx!r}")
    total1 = (u.sum() * dt, m.sum() * dt)
    defect = max(abs(total1[k] - total0[k] - flux_in[k]) / max(abs(total0[k]), 1e-300) for k in range(2))
    return FvField(grid, np.array(xs_out), np.array(u_out), np.array(m_out), min_u, defect,
                   {"nu": grid.nu, "c_range": (c_min, c_max)}, fns)


def riemann_profile(fns: DerivedFunctions, fan: WaveFan, x: float, ts):
    """Exact self-similar boundary Riemann solution on the column ``x`` (fan datum at the origin)."""
    ts = np.asarray(ts, dtype=float)
    x0, t0 = fan.datum
    dx = x - x0
    if not dx > 0.0:
        raise ValueError("column must lie to the right of the fan datum")
    below = State(fan.below.c, fan.u_mid)
    c = np.empty_like(ts)
    u = np.empty_like(ts)
    for i, t in enumerate(ts):
        z = (t - t0) / dx
        wave = fan.wave
        if wave is None:
            s = fan.above
        elif isinstance(wave, Shock):
            s = below if z < wave.speed else fan.above
        elif isinstance(wave, Rarefaction):
            if z <= wave.z0:
                s = below
            elif z >= wave.z_plus:
                s = fan.above
            else:
                s = fan_state(fns, wave, z)
        else:
            raise TypeError(f"unknown wave {wave!r}")
        c[i], u[i] = s.c, s.u
    return c, u


def compare(solution_ft, fvfield: FvField, x_slice: float, t_range):
    """L1 norms over ``t_range`` of ``|c_ft - c_fv|`` and ``|u_ft - u_fv|`` at ``x_slice``.

    ``solution_ft`` is a front-tracking solution or an exact boundary
    Riemann fan; it is sampled at the cell centres.
    """
    t_lo, t_hi = t_range
    if not 0.0 <= t_lo < t_hi <= fvfield.grid.T + 1e-12:
        raise ValueError(f"t_range {t_range!r} outside the finite-volume strip")
    ts, c_fv, u_fv = fvfield.slice(x_slice)
    sel = (ts > t_lo) & (ts < t_hi)
    ts = ts[sel]
    if isinstance(solution_ft, WaveFan):
        c_ft, u_ft = riemann_profile(fvfield.fns, solution_ft, x_slice, ts)
    else:
        if x_slice > solution_ft.X_stop or t_hi > solution_ft.T:
            raise ValueError("front-tracking solution does not cover the comparison window")
        c_ft, u_ft = solution_ft.sample_column(x_slice, ts)
    dt = fvfield.grid.dt
    return (float(np.sum(np.abs(c_ft - c_fv[sel])) * dt),
            float(np.sum(np.abs(u_ft - u_fv[sel])) * dt))


def front_slope(fvfield: FvField, level: float, x_min: float = 0.0):
    """Least-squares slope ``dt/dx`` of the first crossing of ``c = level`` over the stored slices."""
    xs, ts = [], []
    tc = fvfield.grid.t_centers
    for x, c in zip(fvfield.xs, fvfield.c):
        if x < x_min:
            continue
        d = c - level
        idx = np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]
        if idx.size == 0:
            continue
        j = idx[0]
        ts.append(tc[j] + (tc[j + 1] - tc[j]) * d[j] / (d[j] - d[j + 1]))
        xs.append(x)
    if len(xs) < 2:
        raise ValueError(f"level {level!r} crossed on fewer than two slices")
    return float(np.polyfit(xs, ts, 1)[0])
