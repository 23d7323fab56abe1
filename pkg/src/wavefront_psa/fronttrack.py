"""Front tracking in the quarter plane ``x > 0, t > 0`` with ``x`` as evolution variable.

Fronts are straight segments ``t = ta + sigma (x - xa)`` with ``sigma >= 0``,
kept in a doubly linked list ordered by ``t`` at the current ``x``. Every
collision is resolved by a fresh full Riemann solve on the outer states;
the interaction table (shock/rarefaction/contact outcomes) is asserted on
the result rather than coded as the mechanism.

Marker fronts carry no jump. They continue a shock path at characteristic
speed after the shock has been cancelled and pass through physical fronts
without creating events.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

from typing import NamedTuple

import numpy as np

from .model import DerivedFunctions, State, functions_for
from .riemann import (ConsistencyError, Rarefaction, Shock, WaveFan, solve_boundary_rp,
                      solve_full_rp)

SHOCK, RAR, CONTACT, MARKER = "shock", "rar-subfront", "contact", "marker"
KIND_CODES = {SHOCK: 0, RAR: 1, CONTACT: 2, MARKER: 3}

RULE_TAGS = (
    "RS→CD+R", "RS→CD+S", "RS→CD-only", "SS→CD+S", "SCD→CD+S", "RCD→CD+R",
    "emission-shock", "emission-rarefaction",
)

_RCD = frozenset((RAR, CONTACT))
_SCD = frozenset((SHOCK, CONTACT))

X_TOL = 1e-12
ZERO_C = 1e-13
ZERO_U = 1e-13


class EngineError(RuntimeError):
    """Internal consistency failure; the run cannot continue."""


class EventCapExceeded(EngineError):
    pass


class Front:
    __slots__ = ("id", "kind", "xa", "ta", "sigma", "below", "above", "lineage",
                 "lo", "hi", "alive", "x_birth")

    def __init__(self, fid, kind, xa, ta, sigma, below, above, lineage=()):
        self.id = fid
        self.kind = kind
        self.xa = xa
        self.ta = ta
        self.sigma = sigma
        self.below = below
        self.above = above
        self.lineage = lineage
        self.lo = None
        self.hi = None
        self.alive = True
        self.x_birth = xa

    def t_at(self, x):
        return self.ta + self.sigma * (x - self.xa)

    @property
    def strength(self):
        if self.kind == CONTACT:
            return abs(self.above.u - self.below.u) / max(self.above.u, self.below.u)
        return abs(self.above.c - self.below.c)

    def __repr__(self):
        return (f"Front({self.id}, {self.kind}, x={self.xa:.6g}, t={self.ta:.6g}, "
                f"sigma={self.sigma:.6g}, {self.below} -> {self.above})")


class Event(NamedTuple):
    """One logged step: emission, interaction or prune."""

    x: float
    t: float
    kind: str
    rule_tag: str
    incoming: tuple
    outgoing: tuple


def discretize_fan(fns: DerivedFunctions, fan: Rarefaction, delta: float, datum=(0.0, 0.0),
                   slope_rule: str = "midpoint", below: State | None = None, snap=None,
                   G=None, H=None):
    """Split a rarefaction into ``ceil(|c_plus - c0| / delta)`` sub-fronts.

    Returns a list of ``(slope, below_state, above_state)`` from bottom to
    top. Interior velocities follow ``W = u G(c)``; the slope is the exact
    fan slope at the midpoint concentration (``slope_rule="midpoint"``) or
    the characteristic speed of the lower state (``"left"``).
    """
    if not isinstance(fan, Rarefaction):
        raise TypeError("discretize_fan needs a rarefaction")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    G = G or fns.G
    H = H or (lambda c: fns.H(c)[0])
    c0, cp, W = fan.c0, fan.c_plus, fan.W
    span = cp - c0
    n = max(1, math.ceil(abs(span) / delta - 1e-9))
    cs = [c0] + [c0 + span * i / n for i in range(1, n)] + [cp]
    if snap is not None:
        cs = [cs[0]] + [snap(c) for c in cs[1:-1]] + [cs[-1]]
    states = [below if below is not None else State(c0, fan.u0)]
    states += [State(c, W / G(c)) for c in cs[1:-1]]
    states.append(State(cp, fan.u_plus))
    out = []
    for i in range(n):
        if slope_rule == "midpoint":
            cm = 0.5 * (cs[i] + cs[i + 1])
            sigma = H(cm) * G(cm) / W
        elif slope_rule == "left":
            sigma = H(cs[i]) / states[i].u
        else:
            raise ValueError(f"unknown slope rule {slope_rule!r}")
        out.append((sigma, states[i], states[i + 1]))
    return out


class Engine:
    """Mutable front-tracking state; drive it with :meth:`next_event` / :meth:`apply_event`."""

    def __init__(self, scenario, fns: DerivedFunctions | None = None, max_events: int = 10**7,
                 prune_margin: float = 0.05, slope_rule: str = "midpoint", check: bool = False):
        self.scenario = scenario
        self.fns = fns if fns is not None else functions_for(scenario.model)
        self.delta = float(scenario.delta)
        self.T = float(scenario.T_horizon)
        self.X_stop = float(scenario.X_stop)
        self.t_prune = self.T * (1.0 + prune_margin) if prune_margin is not None else math.inf
        self.max_events = int(max_events)
        self.slope_rule = slope_rule
        self.check = check

        self.x_now = 0.0
        self.head = None
        self.tail = None
        self._next_id = 0
        self._seq = 0
        self._heap = []
        self.events = []
        self.n_steps = 0
        self.records = []
        self._cvals = []
        self._memo = {}
        self._Hmemo = {}

        top = State(self._snap(float(scenario.boundary_c)), float(scenario.u0))
        self.top_state = top
        self.bottom_state = top
        self.bottom = []
        self._bottom_start = 0.0
        self.pending = []
        prev = top.c
        for x, c in scenario.segments:
            c = self._snap(float(c))
            if c != prev and float(x) < self.X_stop:
                self.pending.append((float(x), c))
            prev = c
        self._pi = 0
        self.shock_paths = {}
        self._n_shock_emissions = 0
        self.done = False

    # -- bookkeeping -----------------------------------------------------------
    def _snap(self, c):
        """Reuse an existing concentration value within 1e-12 so equal states compare equal."""
        vals = self._cvals
        i = bisect.bisect_left(vals, c)
        for j in (i - 1, i):
            if 0 <= j < len(vals) and abs(vals[j] - c) <= 1e-12:
                return vals[j]
        vals.insert(i, c)
        return c

    def _scalars(self, c):
        """Memoized ``(f, h, H, G)`` at ``c``; concentrations are snapped so the set stays small."""
        v = self._memo.get(c)
        if v is None:
            fns = self.fns
            v = (fns.f(c)[0], fns.h(c)[0], fns.H(c)[0], fns.G(c))
            self._memo[c] = v
        return v

    def _G(self, c):
        return self._scalars(c)[3]

    def _H(self, c):
        v = self._Hmemo.get(c)
        if v is None:
            v = self._Hmemo[c] = self.fns.H(c)[0]
        return v

    def _solve(self, below, above, x, t):
        """Full Riemann solve with memoized scalars; same formulas as :mod:`.riemann`."""
        sign = self.fns.fpp_sign
        if sign == 0 or self.check:
            fan = solve_full_rp(self.fns, below, above, (x, t), check=True)
            if sign == 0:
                return fan
        c0, c1, u1 = below.c, above.c, above.u
        if c0 == c1:
            fast = WaveFan((x, t), below, u1, None, above)
        else:
            f0, h0, H0, G0 = self._scalars(c0)
            f1, h1, H1, G1 = self._scalars(c1)
            if (c1 < c0) if sign > 0 else (c0 < c1):
                jf = (f1 - f0) / (c1 - c0)
                alpha = jf + 1.0
                u0 = u1 * (alpha + h0) / (alpha + h1)
                s = (jf + 1.0 + h1) / u1
                if not u0 > 0.0 or abs((jf + 1.0 + h0) / u0 - s) > 1e-12 * max(1.0, s):
                    raise ConsistencyError(f"Rankine-Hugoniot check failed at x={x!r}, t={t!r}")
                wave = Shock(s, State(c0, u0), above)
            else:
                W = u1 * G1
                u0 = W / G0
                wave = Rarefaction(H0 * G0 / W, H1 / u1, W, c0, c1, u0, u1)
            fast = WaveFan((x, t), below, u0, wave, above)
        if self.check and (fast.kind != fan.kind or abs(fast.u_mid - fan.u_mid) > 1e-12 * fan.u_mid):
            raise ConsistencyError(f"fast Riemann path disagrees with the reference at x={x!r}")
        return fast

    def _new_front(self, kind, xa, ta, sigma, below, above, lineage=()):
        f = Front(self._next_id, kind, xa, ta, sigma, below, above, lineage)
        self._next_id += 1
        for k in lineage:
            path = self.shock_paths.setdefault(k, [])
            if not path or path[-1] != (xa, ta):
                path.append((xa, ta))
        return f

    def _retire(self, f, x_end):
        f.alive = False
        t_end = f.t_at(x_end)
        self.records.append((f.id, f.kind, f.xa, f.ta, x_end, t_end, f.sigma,
                             f.below.c, f.below.u, f.above.c, f.above.u, f.lineage))
        for k in f.lineage:
            path = self.shock_paths[k]
            if path[-1] != (x_end, t_end):
                path.append((x_end, t_end))

    def fronts(self):
        f = self.head
        out = []
        while f is not None:
            out.append(f)
            f = f.hi
        return out

    def _replace(self, first, last, new):
        """Swap the chain ``first..last`` (inclusive, may be None/None at the bottom) for ``new``."""
        lo = first.lo if first is not None else None
        hi = last.hi if last is not None else self.head
        prev = lo
        for f in new:
            f.lo = prev
            if prev is None:
                self.head = f
            else:
                prev.hi = f
            prev = f
        if prev is None:
            self.head = hi
        else:
            prev.hi = hi
        if hi is None:
            self.tail = prev
        else:
            hi.lo = prev
        return lo, hi

    def _schedule(self, a, b):
        if a is None or b is None:
            return
        if a.sigma <= b.sigma:
            return
        xr = max(a.xa, b.xa, self.x_now)
        gap = b.t_at(xr) - a.t_at(xr)
        x = xr + max(gap, 0.0) / (a.sigma - b.sigma)
        t = a.t_at(x)
        self._seq += 1
        heapq.heappush(self._heap, (x, t, self._seq, 0, a, b))

    def _schedule_prune(self, f):
        if f.sigma > 0.0 and math.isfinite(self.t_prune):
            x = f.xa + (self.t_prune - f.ta) / f.sigma
            self._seq += 1
            heapq.heappush(self._heap, (max(x, self.x_now), self.t_prune, self._seq, 1, f, None))

    def _valid(self, entry):
        _, _, _, kind, a, b = entry
        if kind == 1:
            return a.alive and a.hi is None
        return a.alive and b.alive and a.hi is b

    # -- event loop -------------------------------------------------------------
    def next_event(self):
        """Next candidate ``(x, t, kind, payload)`` or ``None`` when done."""
        heap = self._heap
        while heap and not self._valid(heap[0]):
            heapq.heappop(heap)
        cand = None
        if heap:
            x0 = heap[0][0]
            group = []
            while heap and heap[0][0] <= x0 + X_TOL:
                e = heapq.heappop(heap)
                if self._valid(e):
                    group.append(e)
            if group:
                group.sort(key=lambda e: (e[1], e[2]))
                best = group[0]
                for e in group[1:]:
                    heapq.heappush(heap, e)
                cand = best
        if self._pi < len(self.pending):
            xe, ce = self.pending[self._pi]
            if cand is None or xe <= cand[0] + X_TOL:
                if cand is not None:
                    heapq.heappush(heap, cand)
                if xe >= self.X_stop:
                    return None
                return (xe, 0.0, "emission", ce)
        if cand is None:
            return None
        if cand[0] >= self.X_stop:
            heapq.heappush(heap, cand)
            return None
        kind = "prune" if cand[3] == 1 else "interaction"
        return (cand[0], cand[1], kind, (cand[4], cand[5]))

    def apply_event(self, ev):
        x, t, kind, payload = ev
        self.n_steps += 1
        if self.n_steps > self.max_events:
            raise EventCapExceeded(f"max-events exceeded ({self.max_events})")
        self.x_now = max(self.x_now, x)
        if kind == "emission":
            self._emit(x, payload)
        elif kind == "prune":
            self._prune(x, payload[0])
        else:
            a, b = payload
            if a.kind == MARKER or b.kind == MARKER:
                self._pass_through(x, t, a, b)
            else:
                self._interact(x, t, a, b)

    def run(self):
        while True:
            ev = self.next_event()
            if ev is None:
                break
            self.apply_event(ev)
        self._finish()
        return self

    # -- handlers ------------------------------------------------------------------
    def _emit(self, x, c_new):
        self._pi += 1
        old = self.bottom_state
        fan = solve_boundary_rp(self.fns, c_new, old.c, old.u, (x, 0.0), check=True)
        new_bottom = State(c_new, fan.u_mid)
        outgoing = self._wave_fronts(fan, x, 0.0, new_bottom, old, emission=True)
        self._close_bottom(x)
        self.bottom_state = new_bottom
        # the new fronts sit below everything alive
        lo, hi = self._replace(None, None, outgoing)
        self._schedule(outgoing[-1], hi)
        for a, b in zip(outgoing, outgoing[1:]):
            self._schedule(a, b)
        if hi is None:
            self._schedule_prune(outgoing[-1])
        tag = "emission-shock" if fan.kind == "shock" else "emission-rarefaction"
        self.events.append(Event(x, 0.0, "emission", tag, (), tuple(f.id for f in outgoing)))

    def _close_bottom(self, x):
        if x > self._bottom_start:
            self.bottom.append((self._bottom_start, x, self.bottom_state))
        self._bottom_start = x

    def _wave_fronts(self, fan, x, t, below, above, emission=False, lineage=()):
        """Fronts for the lambda-wave of ``fan`` between ``below`` and ``above``."""
        wave = fan.wave
        if wave is None:
            return []
        if isinstance(wave, Shock):
            if emission:
                self._n_shock_emissions += 1
                lineage = (self._n_shock_emissions,)
            return [self._new_front(SHOCK, x, t, wave.speed, below, above, lineage)]
        if abs(wave.c_plus - wave.c0) <= self.delta * (1.0 + 1e-9) and self.slope_rule == "midpoint":
            # one sub-front: the common case after a fan front crosses a contact
            cm = 0.5 * (wave.c0 + wave.c_plus)
            sigma = self._H(cm) * self._G(cm) / wave.W
            return [self._new_front(RAR, x, t, sigma, below, above)]
        parts = discretize_fan(self.fns, wave, self.delta, (x, t), self.slope_rule,
                               below=below, snap=self._snap, G=self._G, H=self._H)
        return [self._new_front(RAR, x, t, s, b, a) for s, b, a in parts]

    def _prune(self, x, f):
        while f is not None:
            self._retire(f, x)
            lo, _ = self._replace(f, f, [])
            self.events.append(Event(x, f.t_at(x), "prune", "", (f.id,), ()))
            # fronts reaching the horizon at the same x leave together
            f = lo if lo is not None and lo.t_at(x) >= self.t_prune else None
        if self.tail is not None:
            self._schedule_prune(self.tail)

    def _pass_through(self, x, t, a, b):
        """A marker swaps places with its neighbour; no physical change."""
        if a.kind == MARKER and b.kind == MARKER:
            # two markers in one region travel together
            first, second = b, a
            news = []
            for m in (first, second):
                self._retire(m, x)
                news.append(self._new_front(MARKER, x, t, m.sigma, m.below, m.above, m.lineage))
        elif a.kind == MARKER:
            self._retire(a, x)
            state = b.above
            m = self._new_front(MARKER, x, t, self.fns.lam(state.c, state.u), state, state, a.lineage)
            news = [b, m]
        else:
            self._retire(b, x)
            state = a.below
            m = self._new_front(MARKER, x, t, self.fns.lam(state.c, state.u), state, state, b.lineage)
            news = [m, a]
        lo, hi = self._replace(a, b, news)
        self._schedule(lo, news[0])
        self._schedule(news[0], news[1])
        self._schedule(news[1], hi)
        if hi is None:
            self._schedule_prune(news[-1])

    def _interact(self, x, t, a, b):
        tol = 1e-12 * max(1.0, t)
        group = [a, b]
        lo = a.lo
        while lo is not None and lo.kind != MARKER and abs(lo.t_at(x) - t) <= tol:
            group.insert(0, lo)
            lo = lo.lo
        hi = b.hi
        while hi is not None and hi.kind != MARKER and abs(hi.t_at(x) - t) <= tol:
            group.append(hi)
            hi = hi.hi
        S_below = group[0].below
        S_above = group[-1].above
        fan = self._solve(S_below, S_above, x, t)

        if a.lineage or b.lineage or len(group) > 2:
            lineage = tuple(sorted({k for f in group if f.kind == SHOCK for k in f.lineage}))
        else:
            lineage = ()
        outgoing = []
        waves = []
        if fan.wave is None:
            # equal concentrations: at most a contact, kept even when tiny so states chain exactly
            mid = S_above
            if S_above != S_below:
                outgoing.append(self._new_front(CONTACT, x, t, 0.0, S_below, S_above))
        else:
            mid = State(S_below.c, fan.u_mid)
            if abs(fan.u_mid - S_below.u) > ZERO_U * max(fan.u_mid, S_below.u):
                outgoing.append(self._new_front(CONTACT, x, t, 0.0, S_below, mid))
            else:
                mid = S_below
            waves = self._wave_fronts(fan, x, t, mid, S_above,
                                      lineage=lineage if fan.kind == "shock" else ())
        if lineage and fan.kind != "shock":
            outgoing.append(self._new_front(MARKER, x, t, self.fns.lam(mid.c, mid.u), mid, mid, lineage))
        outgoing.extend(waves)

        tag = self._rule_tag(group, fan, waves)
        self._check_rule(tag, group, waves, x)
        for f in group:
            self._retire(f, x)
        lo, hi = self._replace(group[0], group[-1], outgoing)
        prev = lo
        for f in outgoing:
            self._schedule(prev, f)
            prev = f
        self._schedule(prev, hi)
        if hi is None:
            self._schedule_prune(self.tail)
        self.events.append(Event(x, t, "interaction", tag, tuple([f.id for f in group]),
                                 tuple([f.id for f in outgoing])))

    @staticmethod
    def _rule_tag(group, fan, waves):
        if len(group) == 2 and len(waves) == 1:
            k = {group[0].kind, group[1].kind}
            if k == _RCD and waves[0].kind == RAR:
                return "RCD→CD+R"
            if k == _SCD and waves[0].kind == SHOCK:
                return "SCD→CD+S"
        n_s = sum(f.kind == SHOCK for f in group)
        n_r = sum(f.kind == RAR for f in group)
        out = {"shock": "S", "rarefaction": "R"}.get(fan.kind) if waves else None
        if n_s and n_r:
            return "RS→CD-only" if out is None else f"RS→CD+{out}"
        if n_s >= 2:
            return "SS→CD+S"
        if n_s == 1:
            return "SCD→CD+S"
        if n_r == 1:
            return "RCD→CD+R"
        return f"{'R' * n_r}→CD+{out or ''}"

    @staticmethod
    def _check_rule(tag, group, waves, x):
        lam_in = [f for f in group if f.kind in (SHOCK, RAR)]
        s_in = [f for f in group if f.kind == SHOCK]
        if len(waves) > len(lam_in):
            raise EngineError(f"interaction at x={x!r} increased the number of lambda-fronts")
        if sum(w.kind == SHOCK for w in waves) > len(s_in):
            raise EngineError(f"interaction at x={x!r} created a shock")
        out_strength = sum(w.strength for w in waves)
        in_strength = sum(f.strength for f in lam_in)
        if tag in ("SCD→CD+S", "RCD→CD+R"):
            if abs(out_strength - in_strength) > 1e-12:
                raise EngineError(f"{tag} at x={x!r} changed the wave strength")
        elif tag == "SS→CD+S":
            if not (waves and waves[0].kind == SHOCK and out_strength > max(f.strength for f in s_in)):
                raise EngineError(f"{tag} at x={x!r} did not produce a stronger shock")
        elif tag.startswith("RS→"):
            if tag == "RS→CD+S" and not all(w.kind == SHOCK for w in waves):
                raise EngineError(f"{tag} at x={x!r} inconsistent outgoing kinds")
            if tag == "RS→CD+R" and not all(w.kind == RAR for w in waves):
                raise EngineError(f"{tag} at x={x!r} inconsistent outgoing kinds")
        elif tag not in RULE_TAGS:
            raise EngineError(f"interaction at x={x!r} outside the rule table ({tag})")

    def _finish(self):
        x = self.X_stop
        self._close_bottom(x)
        f = self.head
        while f is not None:
            self._retire(f, x)
            f = f.hi
        self.x_now = x
        self.done = True


def init_engine(scenario, fns: DerivedFunctions | None = None, **kwargs) -> Engine:
    return Engine(scenario, fns, **kwargs)


def next_event(engine: Engine):
    return engine.next_event()


def apply_event(engine: Engine, event) -> Engine:
    engine.apply_event(event)
    return engine


# -- solution ------------------------------------------------------------------------


@dataclass
class Solution:
    """Immutable result of a front-tracking run."""

    fns: DerivedFunctions
    scenario: object
    fronts: dict
    events: list
    bottom: list
    shock_paths: dict
    top_state: State
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        fr = self.fronts
        phys = fr["kind"] != KIND_CODES[MARKER]
        self._x0 = fr["x0"][phys]
        self._x1 = fr["x1"][phys]
        self._t0 = fr["t0"][phys]
        self._sig = fr["sigma"][phys]
        self._cb = fr["c_below"][phys]
        self._ub = fr["u_below"][phys]
        self._ca = fr["c_above"][phys]
        self._ua = fr["u_above"][phys]
        self._bx = np.array([b[0] for b in self.bottom] + [self.X_stop])
        self._by = self.bottom

    @property
    def X_stop(self):
        return float(self.meta["X_stop"])

    @property
    def T(self):
        return float(self.meta["T"])

    @property
    def n_fronts(self):
        return len(self.fronts["id"])

    def bottom_state_at(self, x):
        if not self._by:
            return self.top_state
        i = int(np.searchsorted(self._bx, x, side="right")) - 1
        i = min(max(i, 0), len(self._by) - 1)
        return self._by[i][2]

    def column(self, x):
        """Fronts alive at ``x``: sorted ``t`` positions and the states above each."""
        at_end = x >= self.X_stop
        if at_end:
            m = (self._x0 <= x) & (self._x1 >= x)
        else:
            m = (self._x0 <= x) & (x < self._x1)
        ts = self._t0[m] + self._sig[m] * (x - self._x0[m])
        order = np.argsort(ts, kind="stable")
        return ts[order], self._ca[m][order], self._ua[m][order]

    def sample_column(self, x, ts):
        """States ``(c, u)`` arrays at ``(t, x)`` for an array of ``t``."""
        ts = np.asarray(ts, dtype=float)
        if not 0.0 <= x <= self.X_stop:
            raise ValueError(f"x={x!r} outside [0, {self.X_stop!r}]")
        if np.any(ts <= 0.0) or np.any(ts > self.T):
            raise ValueError("t outside (0, T]")
        ft, ca, ua = self.column(x)
        k = np.searchsorted(ft, ts, side="right")
        b = self.bottom_state_at(x)
        c = np.where(k > 0, ca[np.maximum(k - 1, 0)] if len(ca) else b.c, b.c)
        u = np.where(k > 0, ua[np.maximum(k - 1, 0)] if len(ua) else b.u, b.u)
        return c, u

    def sample_row(self, t, xs):
        """States ``(c, u)`` arrays along the line ``{t}`` at increasing ``xs``."""
        xs = np.asarray(xs, dtype=float)
        if not 0.0 < t <= self.T:
            raise ValueError(f"t={t!r} outside (0, T]")
        if xs.size and (xs[0] < 0.0 or xs[-1] > self.X_stop or np.any(np.diff(xs) < 0.0)):
            raise ValueError("xs must be increasing inside [0, X_stop]")
        br, cs, us = _horizontal_pieces(self, t, 0.0, self.X_stop)
        k = np.searchsorted(br[1:-1], xs, side="right")
        return cs[k], us[k]


def sample(solution: Solution, t: float, x: float) -> State:
    """State of the region containing ``(t, x)``; on a front the above-state."""
    c, u = solution.sample_column(x, [t])
    return State(float(c[0]), float(u[0]))


def bottom_trace(solution: Solution):
    """Maximal constant segments ``(x_start, x_end, State)`` next to ``t = 0+``."""
    out = []
    for x0, x1, s in solution.bottom:
        if out and out[-1][2] == s:
            out[-1] = (out[-1][0], x1, s)
        else:
            out.append((x0, x1, s))
    return out


def _front_arrays(records):
    cols = ("id", "kind", "x0", "t0", "x1", "t1", "sigma", "c_below", "u_below", "c_above", "u_above")
    if not records:
        arr = {k: np.zeros(0) for k in cols}
        arr["id"] = np.zeros(0, dtype=int)
        arr["kind"] = np.zeros(0, dtype=int)
        arr["lineage"] = []
        return arr
    recs = sorted(records, key=lambda r: r[0])
    arr = {
        "id": np.array([r[0] for r in recs], dtype=int),
        "kind": np.array([KIND_CODES[r[1]] for r in recs], dtype=int),
        "x0": np.array([r[2] for r in recs]),
        "t0": np.array([r[3] for r in recs]),
        "x1": np.array([r[4] for r in recs]),
        "t1": np.array([r[5] for r in recs]),
        "sigma": np.array([r[6] for r in recs]),
        "c_below": np.array([r[7] for r in recs]),
        "u_below": np.array([r[8] for r in recs]),
        "c_above": np.array([r[9] for r in recs]),
        "u_above": np.array([r[10] for r in recs]),
        "lineage": [r[11] for r in recs],
    }
    return arr


def run(scenario, fns: DerivedFunctions | None = None, max_events: int = 10**7,
        prune_margin: float = 0.05, slope_rule: str = "midpoint", check: bool = False) -> Solution:
    """Track all fronts of ``scenario`` up to ``X_stop`` and assemble a :class:`Solution`."""
    eng = Engine(scenario, fns, max_events, prune_margin, slope_rule, check).run()
    paths = {k: np.array(v) for k, v in sorted(eng.shock_paths.items())}
    counts = {}
    for e in eng.events:
        counts[e.kind] = counts.get(e.kind, 0) + 1
    meta = {
        "delta": eng.delta,
        "T": eng.T,
        "X_stop": eng.X_stop,
        "slope_rule": slope_rule,
        "n_fronts": len(eng.records),
        "n_events": len(eng.events),
        "event_counts": counts,
    }
    return Solution(eng.fns, scenario, _front_arrays(eng.records), eng.events, eng.bottom,
                    paths, eng.top_state, meta)


# -- weak-form checks ------------------------------------------------------------------


def _horizontal_pieces(sol, t, xa, xb):
    """Break points along ``{t} x [xa, xb]`` and the constant state on each piece."""
    m = sol._sig > 0.0
    xs = sol._x0[m] + (t - sol._t0[m]) / sol._sig[m]
    ok = (xs > xa) & (xs < xb) & (xs >= sol._x0[m]) & (xs < sol._x1[m])
    order = np.argsort(xs[ok], kind="stable")
    c0, u0 = sol.sample_column(xa, [t])
    # moving right along a fixed t passes from above a front to below it
    cs = np.concatenate([c0, sol._cb[m][ok][order]])
    us = np.concatenate([u0, sol._ub[m][ok][order]])
    return np.concatenate([[xa], xs[ok][order], [xb]]), cs, us


def _vertical_pieces(sol, x, ta, tb):
    ts, ca, ua = sol.column(x)
    ok = (ts > ta) & (ts < tb)
    c0, u0 = sol.sample_column(x, [ta])
    return (np.concatenate([[ta], ts[ok], [tb]]), np.concatenate([c0, ca[ok]]),
            np.concatenate([u0, ua[ok]]))


def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _piecewise_integral(breaks, cs, us, fun, n_quad):
    # the solution is constant between breaks, so any n_quad-point rule is exact there
    if n_quad < 1:
        raise ValueError("n_quad must be >= 1")
    return float(np.dot(np.diff(breaks), fun(cs, us)))


def _integrate_horizontal(sol, t, xa, xb, fun, n_quad):
    """``int_xa^xb fun(c, u)(t, x) dx`` split at front crossings."""
    return _piecewise_integral(*_horizontal_pieces(sol, t, xa, xb), fun, n_quad)


def _integrate_vertical(sol, x, ta, tb, fun, n_quad):
    """``int_ta^tb fun(c, u)(t, x) dt`` split at front positions."""
    return _piecewise_integral(*_vertical_pieces(sol, x, ta, tb), fun, n_quad)


def _check_rect(sol, rect):
    x1, x2, t1, t2 = rect
    if not (0.0 <= x1 < x2 <= sol.X_stop):
        raise ValueError(f"rectangle x-range {x1!r}..{x2!r} outside the computed domain")
    if t1 < 1e-6:
        raise ValueError("rectangle must stay at least 1e-6 away from t = 0")
    if not t1 < t2 <= sol.T:
        raise ValueError(f"rectangle t-range {t1!r}..{t2!r} outside (0, T]")


def conservation_residual(fns: DerivedFunctions, solution: Solution, rect, n_quad: int = 4):
    """Both components of ``∮ (U dt - Φ dx)`` over ``rect = (x1, x2, t1, t2)``.

    ``U = (u, u c)``, ``Φ = (h(c), c + q1(c))``; counter-clockwise boundary.
    """
    _check_rect(solution, rect)
    x1, x2, t1, t2 = rect
    hvec = np.vectorize(lambda c: fns.h(float(c))[0], otypes=[float])
    ivec = np.vectorize(lambda c: float(c) + fns.q1(float(c))[0], otypes=[float])
    out = []
    for U, Phi in ((lambda c, u: u, lambda c, u: hvec(c)),
                   (lambda c, u: u * c, lambda c, u: ivec(c))):
        r = (_integrate_vertical(solution, x2, t1, t2, U, n_quad)
             - _integrate_vertical(solution, x1, t1, t2, U, n_quad)
             + _integrate_horizontal(solution, t2, x1, x2, Phi, n_quad)
             - _integrate_horizontal(solution, t1, x1, x2, Phi, n_quad))
        out.append(r)
    return tuple(out)


ENTROPY_PSI = {
    "c2": (lambda c: c * c, lambda c: 2.0 * c),
    "c_half2": (lambda c: (c - 0.5) ** 2, lambda c: 2.0 * (c - 0.5)),
    "clogc": (lambda c: c * math.log(c) if c > 0.0 else 0.0,
              lambda c: math.log(c) + 1.0 if c > 0.0 else -math.inf),
}


def entropy_flux(fns: DerivedFunctions, psi_id: str, c: float, n: int = 64) -> float:
    """``Q(c) = int_0^c (h' psi + H psi')`` by Gauss-Legendre; ``Q(0) = 0``.

    For ``c ln c`` the psi' term is integrated by parts to avoid the log
    singularity at 0: ``int H psi' = H psi |_0^c - int H' psi``.
    """
    psi, dpsi = ENTROPY_PSI[psi_id]
    if c == 0.0:
        return 0.0
    gx, gw = _gauss(n)
    xs = 0.5 * c * (gx + 1.0)
    if psi_id == "clogc":
        vals = [fns.h(float(s))[1] * psi(float(s)) - fns.H(float(s))[1] * psi(float(s)) for s in xs]
        return 0.5 * c * float(np.dot(gw, vals)) + fns.H(c)[0] * psi(c)
    vals = [fns.h(float(s))[1] * psi(float(s)) + fns.H(float(s))[0] * dpsi(float(s)) for s in xs]
    return 0.5 * c * float(np.dot(gw, vals))


def entropy_residual(fns: DerivedFunctions, solution: Solution, psi_id: str, rect, n_quad: int = 4) -> float:
    """``∮ (u psi(c) dt - Q(c) dx)``; non-positive (up to O(delta)) for entropy solutions."""
    if psi_id not in ENTROPY_PSI:
        raise ValueError(f"unknown entropy {psi_id!r}; expected one of {sorted(ENTROPY_PSI)}")
    _check_rect(solution, rect)
    x1, x2, t1, t2 = rect
    psi = ENTROPY_PSI[psi_id][0]
    cache = {}

    def Q(c):
        out = np.empty(np.shape(c))
        for i, ci in enumerate(np.ravel(c)):
            ci = float(ci)
            if ci not in cache:
                cache[ci] = entropy_flux(fns, psi_id, ci)
            out.flat[i] = cache[ci]
        return out

    def U(c, u):
        return u * np.array([psi(float(ci)) for ci in np.ravel(c)]).reshape(np.shape(c))

    return (_integrate_vertical(solution, x2, t1, t2, U, n_quad)
            - _integrate_vertical(solution, x1, t1, t2, U, n_quad)
            + _integrate_horizontal(solution, t2, x1, x2, lambda c, u: Q(c), n_quad)
            - _integrate_horizontal(solution, t1, x1, x2, lambda c, u: Q(c), n_quad))
