"""Isotherm models and the scalar functions of the concentration derived from them.

Every quantity used by the solvers is a function of ``c`` only:

* ``h = q1 + q2``
* ``f = q1 - c*h``
* ``H = 1 + q1' - c*h'`` (``lambda = H/u``)
* ``g`` with ``g' = -h'/H`` and ``g(0) = 0``; ``G = exp(g)``

A model is a pair of closed-form isotherms with two derivatives each, so
``f''``, ``h'`` and the sign of ``G''`` never go through quadrature.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .quadrature import CumulativeIntegral

KINDS = ("linear", "inert-convex-quadratic", "inert-langmuir", "binary-langmuir")

_PARAM_NAMES = {
    "linear": ("a1", "a2"),
    "inert-convex-quadratic": ("a", "b"),
    "inert-langmuir": ("Q", "K"),
    "binary-langmuir": ("Q1", "K1", "Q2", "K2"),
}

#: below this magnitude a sampled G'', h' or f'' counts as vanishing
VANISH_THRESHOLD = 1e-12


class ModelError(ValueError):
    """Invalid isotherm model or parameters."""


class State(NamedTuple):
    """Point value of the unknowns: concentration ``c`` in [0, 1], velocity ``u > 0``."""

    c: float
    u: float


def _zero(c):
    return 0.0, 0.0, 0.0


@dataclass(frozen=True)
class IsothermModel:
    """The pair ``(q1(c), q2(c))`` restricted to ``c1 = c, c2 = 1 - c``.

    ``q1`` and ``q2`` return ``(value, first derivative, second derivative)``.
    Build instances with :func:`make_model`.
    """

    kind: str
    params: dict
    q1: Callable = field(repr=False, compare=False)
    q2: Callable = field(repr=False, compare=False)

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))


def _linear(a1, a2):
    def q1(c):
        return a1 * c, a1, 0.0

    def q2(c):
        return a2 * (1.0 - c), -a2, 0.0

    return q1, q2


def _convex_quadratic(a, b):
    def q2(c):
        y = 1.0 - c
        return a * y + b * y * y, -a - 2.0 * b * y, 2.0 * b

    return _zero, q2


def _inert_langmuir(Q, K):
    def q2(c):
        y = 1.0 - c
        d = 1.0 + K * y
        return Q * K * y / d, -Q * K / (d * d), -2.0 * Q * K * K / (d * d * d)

    return _zero, q2


def _binary_langmuir(Q1, K1, Q2, K2):
    # denominator 1 + K1 c + K2 (1-c) is affine in c
    slope = K1 - K2

    def q1(c):
        d = 1.0 + K2 + slope * c
        num = Q1 * K1 * (1.0 + K2)
        return Q1 * K1 * c / d, num / (d * d), -2.0 * num * slope / (d * d * d)

    def q2(c):
        d = 1.0 + K2 + slope * c
        num = Q2 * K2 * (1.0 + K1)
        return Q2 * K2 * (1.0 - c) / d, -num / (d * d), 2.0 * num * slope / (d * d * d)

    return q1, q2


def make_model(kind: str, params: dict | None = None, check_points: int = 1025, **kwargs) -> IsothermModel:
    """Build an :class:`IsothermModel` from its kind and parameters.

    Parameters may be passed as a dict or as keyword arguments::

        make_model("inert-convex-quadratic", a=1.0, b=0.5)

    Raises :class:`ModelError` for unknown kinds, missing/extra/out-of-range
    parameters, or when ``q1' >= 0 >= q2'`` or ``q1, q2 >= 0`` fails on a
    uniform check grid.
    """
    if kind not in _PARAM_NAMES:
        raise ModelError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
    p = dict(params or {})
    p.update(kwargs)
    names = _PARAM_NAMES[kind]
    extra = sorted(set(p) - set(names))
    if extra:
        raise ModelError(f"unknown parameter(s) for {kind}: {', '.join(extra)}")
    missing = [n for n in names if n not in p]
    if kind == "inert-convex-quadratic" and missing == ["b"]:
        p["b"] = 0.0
        missing = []
    if missing:
        raise ModelError(f"missing parameter(s) for {kind}: {', '.join(missing)}")
    try:
        p = {n: float(p[n]) for n in names}
    except (TypeError, ValueError) as exc:
        raise ModelError(f"non-numeric parameter for {kind}: {exc}") from None
    for n, v in p.items():
        if not math.isfinite(v) or v < 0.0:
            raise ModelError(f"parameter {n}={v!r} must be a finite nonnegative real")

    if kind == "linear":
        q1, q2 = _linear(p["a1"], p["a2"])
    elif kind == "inert-convex-quadratic":
        if p["a"] <= 0.0:
            raise ModelError("parameter a must be > 0")
        q1, q2 = _convex_quadratic(p["a"], p["b"])
    elif kind == "inert-langmuir":
        if p["Q"] <= 0.0 or p["K"] <= 0.0:
            raise ModelError("parameters Q and K must be > 0")
        q1, q2 = _inert_langmuir(p["Q"], p["K"])
    else:
        q1, q2 = _binary_langmuir(p["Q1"], p["K1"], p["Q2"], p["K2"])

    for c in np.linspace(0.0, 1.0, check_points):
        v1, d1, _ = q1(float(c))
        v2, d2, _ = q2(float(c))
        if d1 < 0.0 or d2 > 0.0:
            raise ModelError(f"isotherm monotonicity q1' >= 0 >= q2' violated at c={c:.6g}")
        if v1 < 0.0 or v2 < 0.0:
            raise ModelError(f"negative isotherm value at c={c:.6g}")
    return IsothermModel(kind, p, q1, q2)


def model_from_mapping(block: dict) -> IsothermModel:
    """Build a model from a ``{"kind": ..., <params>}`` mapping (config block)."""
    block = dict(block)
    if "kind" not in block:
        raise ModelError("model block needs a 'kind' key")
    kind = block.pop("kind")
    return make_model(kind, block)


class DerivedFunctions:
    """All scalar functions of ``c`` for one model, with ``g`` cached.

    Immutable after construction: the cumulative table for ``g`` is built
    eagerly on ``n_intervals`` uniform intervals.
    """

    def __init__(self, model: IsothermModel, n_intervals: int = 4096, tol: float = 1e-12):
        self.model = model
        self._q1 = model.q1
        self._q2 = model.q2
        self.tol = tol
        p = model.params
        self._linear_g = None
        if model.kind == "linear":
            d = p["a1"] - p["a2"]
            h0 = 1.0 + p["a1"]
            # H(c) = 1 + a1 - c (a1 - a2) is affine, so g = ln(H(c)/H(0))
            self._linear_g = (h0, d)
        self._cum = None
        if self._linear_g is None:
            self._cum = CumulativeIntegral(self.gprime, n_intervals, tol)
        grid = np.linspace(0.0, 1.0, 1025)
        fpp = np.array([self.f(float(c))[2] for c in grid])
        if np.all(fpp > VANISH_THRESHOLD):
            self.fpp_sign = 1
        elif np.all(fpp < -VANISH_THRESHOLD):
            self.fpp_sign = -1
        else:
            self.fpp_sign = 0

    def __repr__(self):
        return f"DerivedFunctions({self.model!r})"

    # -- closed forms -------------------------------------------------------
    def q1(self, c):
        return self._q1(c)

    def q2(self, c):
        return self._q2(c)

    def h(self, c):
        a, ap, app = self._q1(c)
        b, bp, bpp = self._q2(c)
        return a + b, ap + bp, app + bpp

    def f(self, c):
        a, ap, app = self._q1(c)
        b, bp, bpp = self._q2(c)
        h, hp, hpp = a + b, ap + bp, app + bpp
        return a - c * h, ap - h - c * hp, app - 2.0 * hp - c * hpp

    def H(self, c):
        a, ap, app = self._q1(c)
        b, bp, bpp = self._q2(c)
        hp, hpp = ap + bp, app + bpp
        return 1.0 + ap - c * hp, app - hp - c * hpp

    def gprime(self, c):
        a, ap, _ = self._q1(c)
        b, bp, _ = self._q2(c)
        hp = ap + bp
        return -hp / (1.0 + ap - c * hp)

    def Gpp_indicator(self, c):
        """``H**2 exp(-g) G''``: same sign as ``G''``, no quadrature needed."""
        _, q1p, q1pp = self._q1(c)
        _, q2p, q2pp = self._q2(c)
        return -q1pp - q2pp - q2pp * q1p + q2p * q1pp

    # -- quadrature-backed --------------------------------------------------
    def g(self, c):
        if self._linear_g is not None:
            if c < 0.0 or c > 1.0:
                raise ValueError(f"argument {c!r} outside [0, 1]")
            h0, d = self._linear_g
            if d == 0.0:
                return 0.0
            return math.log1p(-c * d / h0)
        return self._cum(c)

    def G(self, c):
        return math.exp(self.g(c))

    def lam(self, c, u):
        return self.H(c)[0] / u

    def W(self, c, u):
        return u * self.G(c)


# Operation-style wrappers -------------------------------------------------


def derived(model: IsothermModel, n_intervals: int = 4096) -> DerivedFunctions:
    return DerivedFunctions(model, n_intervals)


def eval_h(fns: DerivedFunctions, c: float):
    """``(h, h', h'')`` at ``c``."""
    _check_c(c)
    return fns.h(c)


def eval_f(fns: DerivedFunctions, c: float):
    """``(f, f', f'')`` at ``c`` with ``f = q1 - c h``."""
    _check_c(c)
    return fns.f(c)


def eval_bigH(fns: DerivedFunctions, c: float):
    """``(H, H')`` at ``c``; ``H >= 1`` for every admissible model."""
    _check_c(c)
    return fns.H(c)


def eval_g(fns: DerivedFunctions, c: float) -> float:
    _check_c(c)
    return fns.g(c)


def eval_G(fns: DerivedFunctions, c: float):
    """``(G, G', sign of G'')``; the sign is one of ``"negative"``, ``"zero"``, ``"positive"``."""
    _check_c(c)
    G = fns.G(c)
    ind = fns.Gpp_indicator(c)
    if abs(ind) <= VANISH_THRESHOLD:
        sign = "zero"
    else:
        sign = "negative" if ind < 0.0 else "positive"
    return G, fns.gprime(c) * G, sign


def riemann_invariants(fns: DerivedFunctions, state: State):
    """``(c, w, W)`` with ``w = ln u + g(c)`` and ``W = u G(c) = exp(w)``."""
    c, u = state
    if not u > 0.0:
        raise ValueError(f"velocity must be positive, got {u!r}")
    _check_c(c)
    g = fns.g(c)
    return c, math.log(u) + g, u * math.exp(g)


def lambda_(fns: DerivedFunctions, state: State) -> float:
    """Nonzero eigenvalue ``H(c)/u``."""
    c, u = state
    if not u > 0.0:
        raise ValueError(f"velocity must be positive, got {u!r}")
    return fns.H(c)[0] / u


def _check_c(c):
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"concentration {c!r} outside [0, 1]")


# Hypotheses ---------------------------------------------------------------

NEG, POS, VANISH = "strictly-negative", "strictly-positive", "vanishes-somewhere"


def _sign_class(values, threshold=VANISH_THRESHOLD):
    if np.all(values < -threshold):
        return NEG
    if np.all(values > threshold):
        return POS
    return VANISH


@dataclass
class HypothesisReport:
    h1_sign_Gpp: str
    h2_sign_hp: str
    h3_sign_fpp: str
    h4_temple: bool
    h4_evidence: dict
    extrema: dict
    n_samples: int

    @property
    def h1(self) -> bool:
        return self.h1_sign_Gpp == NEG

    @property
    def h2(self) -> bool:
        return self.h2_sign_hp != VANISH

    @property
    def h3(self) -> bool:
        return self.h3_sign_fpp != VANISH

    @property
    def h4(self) -> bool:
        return not self.h4_temple

    def to_dict(self) -> dict:
        return {
            "h1_sign_Gpp": self.h1_sign_Gpp,
            "h2_sign_hp": self.h2_sign_hp,
            "h3_sign_fpp": self.h3_sign_fpp,
            "h4_temple": self.h4_temple,
            "h4_evidence": self.h4_evidence,
            "pass": {"H1": self.h1, "H2": self.h2, "H3": self.h3, "H4": self.h4},
            "extrema": self.extrema,
            "n_samples": self.n_samples,
        }


def check_hypotheses(fns: DerivedFunctions, n_samples: int = 1025, temple_grid: int = 32) -> HypothesisReport:
    """Decide (H1)-(H4) for a model by dense sampling of the closed forms.

    ``h4_temple`` is True when the system is of Temple class, so (H4)
    holds iff it is False; the evidence comes from
    :func:`wavefront_psa.scenario.classify_temple`.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    from .scenario import classify_temple

    cs = np.linspace(0.0, 1.0, n_samples)
    gpp = np.array([fns.Gpp_indicator(float(c)) for c in cs])
    hp = np.array([fns.h(float(c))[1] for c in cs])
    fpp = np.array([fns.f(float(c))[2] for c in cs])
    H = np.array([fns.H(float(c))[0] for c in cs])
    G = np.array([fns.G(float(c)) for c in cs])
    verdict = classify_temple(fns, temple_grid)
    return HypothesisReport(
        h1_sign_Gpp=_sign_class(gpp),
        h2_sign_hp=_sign_class(hp),
        h3_sign_fpp=_sign_class(fpp),
        h4_temple=verdict.verdict == "temple",
        h4_evidence=verdict.to_dict(),
        extrema={
            "H": [float(H.min()), float(H.max())],
            "G": [float(G.min()), float(G.max())],
            "abs_hp": [float(np.abs(hp).min()), float(np.abs(hp).max())],
            "abs_fpp": [float(np.abs(fpp).min()), float(np.abs(fpp).max())],
        },
        n_samples=n_samples,
    )


@functools.lru_cache(maxsize=32)
def functions_for(model: IsothermModel) -> DerivedFunctions:
    """Shared :class:`DerivedFunctions` instance for ``model`` (built once)."""
    return DerivedFunctions(model)
