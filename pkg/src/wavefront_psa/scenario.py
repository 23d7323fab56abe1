"""Alternating boundary data, velocity growth checks and Temple classification."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import fronttrack
from .model import VANISH_THRESHOLD, DerivedFunctions, IsothermModel, functions_for
from .riemann import RiemannError, amplification, shock_orientation


class ScenarioError(ValueError):
    """Invalid scenario description."""


@dataclass(frozen=True)
class Scenario:
    """Data for one front-tracking run.

    ``boundary_c`` and ``u0`` hold on ``{x = 0, t > 0}``; ``segments`` lists
    ``(x_k, c_k)``: from ``x_k`` on, the concentration on ``{t = 0}`` is
    ``c_k``.
    """

    model: IsothermModel
    u0: float
    boundary_c: float
    segments: tuple
    T_horizon: float
    X_stop: float
    delta: float
    c_lo: float | None = None
    c_hi: float | None = None

    def __post_init__(self):
        if not self.u0 > 0.0:
            raise ScenarioError(f"u0 must be positive, got {self.u0!r}")
        if not 0.0 <= self.boundary_c <= 1.0:
            raise ScenarioError(f"boundary_c={self.boundary_c!r} outside [0, 1]")
        xs = [x for x, _ in self.segments]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ScenarioError("segment abscissae must be strictly increasing")
        if xs and xs[0] < 0.0:
            raise ScenarioError("segments must start at x >= 0")
        for _, c in self.segments:
            if not 0.0 <= c <= 1.0:
                raise ScenarioError(f"segment concentration {c!r} outside [0, 1]")
        if not self.T_horizon > 0.0 or not self.X_stop > 0.0:
            raise ScenarioError("T_horizon and X_stop must be positive")
        if not self.delta > 0.0:
            raise ScenarioError("delta must be positive")

    @property
    def xs(self):
        return [x for x, _ in self.segments]

    @property
    def n_pairs(self):
        return len(self.segments) // 2


@dataclass
class GrowthReport:
    rows: list
    R: float
    rel_tol: float
    passed: bool

    def to_dict(self):
        return {"R": self.R, "rel_tol": self.rel_tol, "pass": self.passed, "rows": self.rows}


@dataclass
class TempleVerdict:
    verdict: str
    max_deviation: float
    argmax: tuple
    alpha: float
    beta: float
    affine_residual: float
    sign_Gpp: str
    grid_n: int
    skipped_pairs: int = 0

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "max_deviation": self.max_deviation,
            "argmax": list(self.argmax),
            "alpha": self.alpha,
            "beta": self.beta,
            "affine_residual": self.affine_residual,
            "sign_Gpp": self.sign_Gpp,
            "grid_n": self.grid_n,
            "skipped_pairs": self.skipped_pairs,
        }


def geometric_points(X_inf: float, ratio: float, N: int):
    """``x_k = X_inf (1 - ratio**k)`` for ``k = 0 .. 2N-1``."""
    if not X_inf > 0.0:
        raise ScenarioError("X_inf must be positive")
    if not 0.0 < ratio < 1.0:
        raise ScenarioError("ratio must lie in (0, 1)")
    if int(N) < 1:
        raise ScenarioError("N must be >= 1")
    return [X_inf * (1.0 - ratio**k) for k in range(2 * int(N))]


def strip_horizon(X_inf: float, ratio: float, N: int, gaps: float = 7.0) -> float:
    """Horizon equal to ``gaps`` times the finest emission spacing.

    The bottom trace does not depend on the horizon (all slopes are
    non-negative), so a thin strip keeps the interactions of the last pairs
    while the run stays affordable.
    """
    xs = geometric_points(X_inf, ratio, N)
    return gaps * (xs[-1] - xs[-2]) if len(xs) > 1 else gaps * X_inf


def _check_range(fns: DerivedFunctions, c_lo, c_hi, n=257):
    cs = np.linspace(c_lo, c_hi, n)
    hp = np.array([fns.h(float(c))[1] for c in cs])
    fpp = np.array([fns.f(float(c))[2] for c in cs])
    if not (np.all(hp < -VANISH_THRESHOLD) or np.all(hp > VANISH_THRESHOLD)):
        raise ScenarioError(f"h' vanishes on [{c_lo}, {c_hi}] (H2 fails)")
    if not (np.all(fpp < -VANISH_THRESHOLD) or np.all(fpp > VANISH_THRESHOLD)):
        raise ScenarioError(f"f'' vanishes on [{c_lo}, {c_hi}] (H3 fails)")


def build_alternating(model: IsothermModel, c_lo: float, c_hi: float, u0: float, xs,
                      T: float, X_stop: float, delta: float, allow_decay: bool = False) -> Scenario:
    """Alternating bottom data whose first emission is an admissible shock.

    The bottom value of that shock goes on ``[x_0, x_1)``, the other value on
    ``{x = 0}`` and on ``[x_1, x_2)``, and so on.
    """
    if not 0.0 < c_lo < c_hi < 1.0:
        raise ScenarioError("need 0 < c_lo < c_hi < 1")
    fns = functions_for(model)
    _check_range(fns, c_lo, c_hi)
    amplification(fns, c_lo, c_hi, check=not allow_decay)
    c_shock, c_top = shock_orientation(fns, c_lo, c_hi)
    xs = [float(x) for x in xs]
    segments = tuple((x, c_shock if k % 2 == 0 else c_top) for k, x in enumerate(xs))
    return Scenario(model, float(u0), c_top, segments, float(T), float(X_stop), float(delta),
                    c_lo, c_hi)


def predict_growth(fns: DerivedFunctions, c_lo: float, c_hi: float, u0: float, k: int) -> float:
    """``R(c_lo, c_hi)**k * u0``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return amplification(fns, c_lo, c_hi, check=False) ** k * u0


def verify_growth(solution, fns: DerivedFunctions, scenario: Scenario, rel_tol: float = 1e-8) -> GrowthReport:
    """Compare bottom-trace plateaus ``u_2k`` with ``R**k u0``."""
    if not scenario.segments:
        return GrowthReport([], 1.0, rel_tol, True)
    R = amplification(fns, scenario.c_lo, scenario.c_hi, check=False)
    bottom = solution.bottom
    n_pairs = scenario.n_pairs
    # bottom[j] covers (x_j, x_{j+1}) and carries u_{j+1}
    if len(bottom) < 2 * n_pairs:
        raise ScenarioError(f"only {len(bottom)} bottom plateaus for {n_pairs} pairs (X_stop too small?)")
    rows = []
    ok = True
    for k in range(1, n_pairs + 1):
        measured = bottom[2 * k - 1][2].u
        predicted = R**k * scenario.u0
        err = abs(measured / predicted - 1.0)
        ok &= err <= rel_tol
        rows.append({"k": k, "measured": measured, "predicted": predicted, "rel_error": err})
    return GrowthReport(rows, R, rel_tol, bool(ok))


def classify_temple(fns: DerivedFunctions, grid_n: int = 32) -> TempleVerdict:
    """Temple test through ``max |R - 1|`` over a grid of ordered pairs.

    Corroborated by a least-squares fit of the affine relation
    ``alpha q1 + (alpha - 1) q2 + c + beta = 0``.
    """
    from .model import eval_G

    if grid_n < 8:
        raise ValueError("grid_n must be >= 8")
    cs = np.linspace(0.0, 1.0, grid_n + 2)[1:-1]
    dev, arg, skipped = 0.0, (math.nan, math.nan), 0
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            try:
                R = amplification(fns, float(a), float(b), check=False)
            except RiemannError:
                skipped += 1
                continue
            d = abs(R - 1.0)
            if d > dev:
                dev, arg = d, (float(a), float(b))
    samples = np.linspace(0.0, 1.0, 257)
    q1 = np.array([fns.q1(float(c))[0] for c in samples])
    q2 = np.array([fns.q2(float(c))[0] for c in samples])
    A = np.column_stack([q1 + q2, np.ones_like(samples)])
    (alpha, beta), *_ = np.linalg.lstsq(A, q2 - samples, rcond=None)
    resid = float(np.max(np.abs(alpha * q1 + (alpha - 1.0) * q2 + samples + beta)))
    signs = {eval_G(fns, float(c))[2] for c in samples}
    sign = signs.pop() if len(signs) == 1 else "mixed"
    return TempleVerdict("temple" if dev <= 1e-9 else "not-temple", dev, arg, float(alpha),
                         float(beta), resid, sign, grid_n, skipped)


def blowup_study(model: IsothermModel, c_lo: float, c_hi: float, u0: float, X_inf: float,
                 ratio: float, delta: float, T: float | None, N_list, max_events: int = 10**7,
                 allow_decay: bool = False):
    """Run the alternating scenario for each ``N`` and tabulate the bottom-trace maximum.

    Returns ``(rows, passed)``; a row holds ``N, max_u, predicted, events,
    seconds`` and the solution is kept under ``"solution"``. ``T=None``
    selects :func:`strip_horizon` for each ``N``.
    """
    fns = functions_for(model)
    R = amplification(fns, c_lo, c_hi, check=not allow_decay)
    rows = []
    for N in N_list:
        xs = geometric_points(X_inf, ratio, N)
        X_stop = X_inf * (1.0 - ratio ** (2 * N))
        T_N = strip_horizon(X_inf, ratio, N) if T is None else T
        sc = build_alternating(model, c_lo, c_hi, u0, xs, T_N, X_stop, delta, allow_decay)
        t0 = time.perf_counter()
        sol = fronttrack.run(sc, fns, max_events=max_events)
        secs = time.perf_counter() - t0
        max_u = max(s.u for _, _, s in sol.bottom)
        predicted = R**N * u0
        rows.append({"N": int(N), "max_u": max_u, "predicted": predicted,
                     "events": len(sol.events), "T": T_N, "seconds": secs, "solution": sol})
    passed = all(r["max_u"] >= (1.0 - 1e-8) * r["predicted"] for r in rows)
    if R > 1.0:
        passed &= all(b["max_u"] > a["max_u"] for a, b in zip(rows, rows[1:]))
    return rows, bool(passed)
