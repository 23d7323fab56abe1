"""Adaptive Simpson quadrature and a cumulative-integral cache on [0, 1]."""

import math

import numpy as np


class QuadratureError(ArithmeticError):
    """Raised when adaptive Simpson does not reach the tolerance."""


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a!r}, {b!r}] (|delta|={abs(delta):.3e})"
        )
    return _simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=40):
    """Integrate the scalar function ``f`` over ``[a, b]``.

    Classic recursive Simpson with Richardson correction. Raises
    :class:`QuadratureError` when ``max_depth`` halvings are not enough.
    """
    if a == b:
        return 0.0
    fa = f(a)
    fb = f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


class CumulativeIntegral:
    """Cached ``F(c) = int_0^c f`` on a uniform grid over [0, 1].

    Node values are accumulated once; an evaluation adds an adaptive Simpson
    integral from the nearest node below ``c``.
    """

    def __init__(self, f, n_intervals=4096, tol=1e-12, max_depth=40):
        self.f = f
        self.n = int(n_intervals)
        self.tol = tol
        self.max_depth = max_depth
        self.nodes = np.linspace(0.0, 1.0, self.n + 1)
        local_tol = tol / self.n
        pieces = [
            adaptive_simpson(f, float(self.nodes[i]), float(self.nodes[i + 1]), local_tol, max_depth)
            for i in range(self.n)
        ]
        # math.fsum keeps the running sum exact to the last bit
        table = [0.0]
        acc = []
        for p in pieces:
            acc.append(p)
            table.append(math.fsum(acc))
        self.table = np.array(table)
        self._table = table
        self._nodes = self.nodes.tolist()

    def __call__(self, c):
        c = float(c)
        if c <= 0.0:
            if c < 0.0:
                raise ValueError(f"argument {c!r} outside [0, 1]")
            return 0.0
        if c > 1.0:
            raise ValueError(f"argument {c!r} outside [0, 1]")
        i = min(int(c * self.n), self.n - 1)
        a = self._nodes[i]
        if c == a:
            return self._table[i]
        # tolerance scaled by the sub-interval width
        tol = max(self.tol * (c - a), 1e-18)
        return self._table[i] + adaptive_simpson(self.f, a, c, tol, self.max_depth)
