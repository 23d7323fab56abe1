"""Exact boundary and full Riemann problems, x being the evolution variable.

A boundary Riemann problem has data ``c = c0`` on ``{t = 0}`` (below) and
``(c, u) = (c_plus, u_plus)`` on ``{x = 0}`` (above). Its self-similar
solution in ``z = t/x`` is a single lambda-wave (shock or rarefaction) whose
bottom value ``u0`` is an output. The full problem adds a 0-contact
(``c`` continuous, ``u`` jumps) on the horizontal line through the datum.

Slopes are ``dt/dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import VANISH_THRESHOLD, DerivedFunctions, State


class RiemannError(ValueError):
    """Riemann data outside the solver's domain (precondition violation)."""


class ConsistencyError(ArithmeticError):
    """A postcondition of an exact solve failed; the caller must abort."""


@dataclass(frozen=True)
class Shock:
    speed: float
    below: State
    above: State

    kind = "shock"

    @property
    def strength(self):
        return abs(self.above.c - self.below.c)


@dataclass(frozen=True)
class Rarefaction:
    z0: float
    z_plus: float
    W: float
    c0: float
    c_plus: float
    u0: float
    u_plus: float

    kind = "rarefaction"

    @property
    def below(self):
        return State(self.c0, self.u0)

    @property
    def above(self):
        return State(self.c_plus, self.u_plus)

    @property
    def strength(self):
        return abs(self.c_plus - self.c0)


@dataclass(frozen=True)
class WaveFan:
    """Solution of one Riemann problem issued from ``datum``.

    ``below`` holds for ``t < t*``; a 0-contact on ``t = t*`` takes ``u`` to
    ``u_mid`` (``c`` unchanged); ``wave`` (or ``None``) then connects
    ``(below.c, u_mid)`` to the above-state.
    """

    datum: tuple
    below: State
    u_mid: float
    wave: Shock | Rarefaction | None
    above: State

    @property
    def kind(self):
        return "none" if self.wave is None else self.wave.kind

    @property
    def u0(self):
        """Bottom trace: velocity on rays just above the contact."""
        return self.u_mid

    @property
    def contact_strength(self):
        return abs(self.u_mid - self.below.u) / max(self.below.u, self.u_mid)

    def to_dict(self):
        d = {"kind": self.kind, "u0": self.u_mid, "c0": self.below.c,
             "c_plus": self.above.c, "u_plus": self.above.u}
        if isinstance(self.wave, Shock):
            d["s"] = self.wave.speed
        elif isinstance(self.wave, Rarefaction):
            d.update(z0=self.wave.z0, z_plus=self.wave.z_plus, W=self.wave.W)
        return d


def _check_state(c, u=None):
    if not 0.0 <= c <= 1.0:
        raise RiemannError(f"concentration {c!r} outside [0, 1]")
    if u is not None and not u > 0.0:
        raise RiemannError(f"velocity must be positive, got {u!r}")


def fpp_sign_between(fns: DerivedFunctions, a: float, b: float, n: int = 65) -> int:
    """Sign of ``f''`` on the closed interval between ``a`` and ``b``.

    Raises :class:`RiemannError` if ``f''`` vanishes or changes sign there.
    """
    if fns.fpp_sign != 0:
        return fns.fpp_sign
    lo, hi = min(a, b), max(a, b)
    vals = [fns.f(lo + (hi - lo) * i / (n - 1))[2] for i in range(n)]
    if all(v > VANISH_THRESHOLD for v in vals):
        return 1
    if all(v < -VANISH_THRESHOLD for v in vals):
        return -1
    raise RiemannError(
        f"f'' vanishes between c={lo!r} and c={hi!r}: no genuinely nonlinear wave (H3 fails)"
    )


def chord_admissible(fns: DerivedFunctions, c0: float, c_plus: float, n: int = 65, tol: float = 1e-12) -> bool:
    """Sampled Liu chord test at ``n`` interior points.

    Ties (``f`` affine between the states) count as not admissible.
    """
    f0 = fns.f(c0)[0]
    chord = (fns.f(c_plus)[0] - f0) / (c_plus - c0)
    strict = False
    for i in range(1, n + 1):
        c = c0 + (c_plus - c0) * i / (n + 1)
        s = (fns.f(c)[0] - f0) / (c - c0)
        if chord > s + tol:
            return False
        if chord < s - tol:
            strict = True
    return strict


def liu_admissible(fns: DerivedFunctions, c0: float, c_plus: float, cross_check: bool = False) -> bool:
    """Whether ``(c0, c_plus)`` is joined by an admissible lambda-shock.

    With ``f''`` of constant sign the endpoint rule is exact: ``f'' > 0``
    needs ``c_plus < c0``, ``f'' < 0`` needs ``c0 < c_plus``. With
    ``cross_check`` the 65-point chord test is evaluated as well and the two
    verdicts must agree.
    """
    _check_state(c0)
    _check_state(c_plus)
    if c0 == c_plus:
        raise RiemannError("liu_admissible needs distinct states")
    sign = fpp_sign_between(fns, c0, c_plus)
    verdict = (c_plus < c0) if sign > 0 else (c0 < c_plus)
    if cross_check and chord_admissible(fns, c0, c_plus) != verdict:
        raise ConsistencyError(f"chord and endpoint Liu criteria disagree for ({c0!r}, {c_plus!r})")
    return verdict


def gamma(fns: DerivedFunctions, c_minus: float, c_plus: float) -> float:
    """Rankine-Hugoniot velocity ratio ``u_minus/u_plus`` across a shock."""
    if c_minus == c_plus:
        raise RiemannError("gamma needs distinct concentrations")
    f_m = fns.f(c_minus)[0]
    f_p = fns.f(c_plus)[0]
    alpha = (f_p - f_m) / (c_plus - c_minus) + 1.0
    den = alpha + fns.h(c_plus)[0]
    if den <= 0.0:
        raise ConsistencyError(f"alpha + h(c_plus) = {den!r} <= 0")
    return (alpha + fns.h(c_minus)[0]) / den


def solve_shock(fns: DerivedFunctions, c0: float, c_plus: float, u_plus: float, check: bool = True):
    """Bottom velocity ``u0`` and slope ``s`` of the shock from ``c0`` to ``c_plus``."""
    _check_state(c0)
    _check_state(c_plus, u_plus)
    if c0 == c_plus or not liu_admissible(fns, c0, c_plus):
        raise RiemannError(f"({c0!r}, {c_plus!r}) is not an admissible shock")
    f0 = fns.f(c0)[0]
    fp = fns.f(c_plus)[0]
    jf_jc = (fp - f0) / (c_plus - c0)
    alpha = jf_jc + 1.0
    h0 = fns.h(c0)[0]
    hp = fns.h(c_plus)[0]
    den = alpha + hp
    if den <= 0.0:
        raise ConsistencyError(f"alpha + h(c_plus) = {den!r} <= 0")
    u0 = u_plus * (alpha + h0) / den
    s = jf_jc / u_plus + (1.0 + hp) / u_plus
    if check:
        if not u0 > 0.0:
            raise ConsistencyError(f"shock produced u0={u0!r}")
        s_below = jf_jc / u0 + (1.0 + h0) / u0
        if abs(s_below - s) > 1e-12 * max(1.0, abs(s)):
            raise ConsistencyError(f"Rankine-Hugoniot sides disagree: {s_below!r} vs {s!r}")
    return u0, s


def solve_rarefaction(fns: DerivedFunctions, c0: float, c_plus: float, u_plus: float, check: bool = True):
    """``(u0, z0, z_plus, W)`` of the rarefaction fan from ``c0`` to ``c_plus``."""
    _check_state(c0)
    _check_state(c_plus, u_plus)
    if c0 == c_plus:
        raise RiemannError("degenerate rarefaction (c0 == c_plus); use the none-wave")
    if liu_admissible(fns, c0, c_plus):
        raise RiemannError(f"({c0!r}, {c_plus!r}) is a shock, not a rarefaction")
    G0 = fns.G(c0)
    Gp = fns.G(c_plus)
    H0 = fns.H(c0)[0]
    Hp = fns.H(c_plus)[0]
    W = u_plus * Gp
    z_plus = Hp / u_plus
    z0 = H0 * G0 / W
    u0 = W / G0
    if check:
        z0_alt = z_plus * math.exp(-_phi(fns, c0, c_plus))
        if abs(z0_alt - z0) > 1e-9 * max(1.0, z0):
            raise ConsistencyError(f"fan edge mismatch: {z0!r} vs exp(-Phi) form {z0_alt!r}")
        if not 0.0 < z0 < z_plus:
            raise ConsistencyError(f"fan edges out of order: z0={z0!r}, z_plus={z_plus!r}")
    return u0, z0, z_plus, W


_GL64 = tuple(a.tolist() for a in np.polynomial.legendre.leggauss(64))


def _phi(fns, c0, c):
    """``int_{c0}^{c} f''/H`` by 64-point Gauss-Legendre (smooth integrand)."""
    x, w = _GL64
    mid = 0.5 * (c + c0)
    half = 0.5 * (c - c0)
    total = 0.0
    for xi, wi in zip(x, w):
        cc = float(mid + half * xi)
        total += wi * fns.f(cc)[2] / fns.H(cc)[0]
    return half * total


def fan_state(fns: DerivedFunctions, fan: Rarefaction, z: float, tol: float = 1e-13) -> State:
    """State inside a rarefaction fan at slope ``z``.

    Bisection on ``H(c) G(c) / W = z``, which is monotone in ``c`` because
    ``(H G)' = G f''``.
    """
    lo_z, hi_z = fan.z0, fan.z_plus
    if not lo_z - 1e-14 <= z <= hi_z + 1e-14:
        raise RiemannError(f"z={z!r} outside fan range [{lo_z!r}, {hi_z!r}]")
    if z <= lo_z:
        return State(fan.c0, fan.u0)
    if z >= hi_z:
        return State(fan.c_plus, fan.u_plus)
    a, b = fan.c0, fan.c_plus
    W = fan.W
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        zm = fns.H(m)[0] * fns.G(m) / W
        if zm < z:
            a = m
        else:
            b = m
    c = 0.5 * (a + b)
    u = W / fns.G(c)
    if abs(u - fns.H(c)[0] / z) > 1e-9 * max(1.0, u):
        raise ConsistencyError(f"fan state inconsistent at z={z!r}")
    return State(c, u)


def solve_boundary_rp(fns: DerivedFunctions, c0: float, c_plus: float, u_plus: float,
                      datum=(0.0, 0.0), check: bool = True) -> WaveFan:
    """Simple wave solving the boundary problem ``(c0 | c_plus, u_plus)``."""
    _check_state(c0)
    _check_state(c_plus, u_plus)
    above = State(c_plus, u_plus)
    if c0 == c_plus:
        return WaveFan(datum, State(c0, u_plus), u_plus, None, above)
    if liu_admissible(fns, c0, c_plus):
        u0, s = solve_shock(fns, c0, c_plus, u_plus, check)
        wave = Shock(s, State(c0, u0), above)
    else:
        u0, z0, zp, W = solve_rarefaction(fns, c0, c_plus, u_plus, check)
        wave = Rarefaction(z0, zp, W, c0, c_plus, u0, u_plus)
    return WaveFan(datum, State(c0, u0), u0, wave, above)


def solve_full_rp(fns: DerivedFunctions, below: State, above: State, datum=(0.0, 0.0),
                  check: bool = True) -> WaveFan:
    """Riemann problem with ``below`` for ``t < t*`` and ``above`` for ``t > t*``.

    The lambda-part is the boundary problem ``(below.c | above)``; the
    0-contact then carries ``u`` from ``below.u`` to the resulting ``u0``.
    """
    _check_state(below.c, below.u)
    _check_state(above.c, above.u)
    fan = solve_boundary_rp(fns, below.c, above.c, above.u, datum, check)
    return WaveFan(datum, State(below.c, below.u), fan.u_mid, fan.wave, fan.above)


def amplification(fns: DerivedFunctions, c_lo: float, c_hi: float, check: bool = True) -> float:
    """Velocity gain ``R`` over one shock followed by one rarefaction.

    The pair is oriented so the shock leg is Liu-admissible: ``c_minus`` is
    the bottom value of the shock. With ``check`` a result below
    ``1 - 1e-12`` raises :class:`AmplificationError`.
    """
    if c_lo == c_hi:
        return 1.0
    if liu_admissible(fns, c_hi, c_lo):
        c_minus, c_plus = c_hi, c_lo
    else:
        c_minus, c_plus = c_lo, c_hi
    R = gamma(fns, c_minus, c_plus) * math.exp(fns.g(c_minus) - fns.g(c_plus))
    if check and R < 1.0 - 1e-12:
        raise AmplificationError(
            f"R({c_lo!r}, {c_hi!r}) = {R!r} < 1: the model does not amplify (G'' < 0 fails)"
        )
    return R


class AmplificationError(ValueError):
    pass


def shock_orientation(fns: DerivedFunctions, c_lo: float, c_hi: float):
    """``(bottom, top)`` concentrations of the admissible shock for the pair."""
    if liu_admissible(fns, c_hi, c_lo):
        return c_hi, c_lo
    return c_lo, c_hi
