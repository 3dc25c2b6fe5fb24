"""Classical steady state of the ring oscillator.

Cavity conventions
------------------
The crystal sits between the input coupler M0/M1 (pump/signal
reflectivities ``R0``/``R1``) and a second mirror whose reflectivities
``Rp`` model spurious losses (1 for a lossless cavity). The pump
resonates only for the triply resonant oscillator (TROPO); the doubly
resonant one (DROPO) has ``R0 = 0``.

With ``s = sqrt(P0in)``, ``x`` the pump amplitude entering the crystal and
``y`` the signed pump amplitude leaving it,

* pump: ``x = t0 s + r0 rp0 y``, output ``r0 s - t0 rp0 y``,
* signal: ``P1(0) = R1 Rp1 P1(L)``, output ``(1 - R1) Rp1 P1(L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError
from .medium import (GainMedium, pump_exit_amplitude, relative_gain,
                     small_signal_gain)
from .numerics import find_root

Topology = Literal["dropo", "tropo"]
TOPOLOGIES = ("dropo", "tropo")

_SCAN = 257


@dataclass(frozen=True)
class CavityConfig:
    """Mirror reflectivities and round-trip time.

    Parameters
    ----------
    R0 : float
        Input coupler pump reflectivity (ignored for the DROPO).
    R1 : float
        Output coupler signal reflectivity.
    R2 : float, optional
        Idler reflectivity, must equal ``R1`` (defaults to it).
    Rp0, Rp1, Rp2 : float
        Spurious-loss mirror reflectivities, 1 for a lossless cavity.
    roundtrip_time : float
        Round-trip time ``tau``; the free spectral range is ``1/tau``.
    """

    R0: float = 0.0
    R1: float = 0.85
    R2: float | None = None
    Rp0: float = 1.0
    Rp1: float = 1.0
    Rp2: float | None = None
    roundtrip_time: float = 1.0

    def __post_init__(self):
        if self.R2 is None:
            object.__setattr__(self, "R2", self.R1)
        if self.Rp2 is None:
            object.__setattr__(self, "Rp2", self.Rp1)
        if not 0.0 <= self.R0 < 1.0:
            raise DomainError(f"R0 must be in [0, 1), got {self.R0!r}")
        if not 0.0 < self.R1 < 1.0:
            raise DomainError(f"R1 must be in (0, 1), got {self.R1!r}")
        if self.R2 != self.R1 or self.Rp2 != self.Rp1:
            raise DomainError("signal and idler mirrors must be identical")
        for name in ("Rp0", "Rp1"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise DomainError(f"{name} must be in (0, 1], got {v!r}")
        if not (np.isfinite(self.roundtrip_time) and self.roundtrip_time > 0):
            raise DomainError("roundtrip_time must be positive")

    @property
    def lossless(self) -> bool:
        return self.Rp0 == 1.0 and self.Rp1 == 1.0

    @property
    def fsr(self) -> float:
        return 1.0 / self.roundtrip_time

    @property
    def bandwidth(self) -> float:
        """Signal cavity bandwidth ``(1 - R1) / tau``."""
        return (1.0 - self.R1) / self.roundtrip_time

    def for_topology(self, topology: Topology) -> "CavityConfig":
        """Copy with ``R0 = 0`` for the DROPO, unchanged otherwise."""
        _check_topology(topology)
        return replace(self, R0=0.0) if topology == "dropo" else self


@dataclass(frozen=True)
class SteadyState:
    """Operating point of the oscillator.

    Powers ending in ``_intra`` are at the crystal entrance. ``PT0`` is the
    total entrance power ``P0 + (m-1) P1`` for the TROPO and 0 for the
    DROPO. ``spurious_loss`` is the power dumped by the loss mirrors.
    """

    topology: str
    order: int
    P0in: float
    P0_intra: float
    P1_intra: float
    PT0: float
    P1out: float
    P0out: float
    sigma: float
    threshold: float
    efficiency: float
    spurious_loss: float = 0.0

    @property
    def above_threshold(self) -> bool:
        return self.P1_intra > 0.0

    def energy_defect(self) -> float:
        """``P0in - P0out - (m-1) P1out - spurious_loss``."""
        return (self.P0in - self.P0out - (self.order - 1) * self.P1out
                - self.spurious_loss)


def _check_topology(topology):
    if topology not in TOPOLOGIES:
        raise DomainError(f"topology must be one of {TOPOLOGIES}, got {topology!r}")


def _check_pin(P0in):
    if not (np.isfinite(P0in) and P0in >= 0):
        raise DomainError(f"P0in must be finite and nonnegative, got {P0in!r}")


def _gain_target(cavity: CavityConfig) -> float:
    return 1.0 / (cavity.R1 * cavity.Rp1) - 1.0


@lru_cache(maxsize=256)
def _intracavity_threshold(medium: GainMedium, R1Rp1: float) -> float:
    target = 1.0 / R1Rp1 - 1.0
    f = lambda P: float(small_signal_gain(P, medium)) - target
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    lo = 0.0
    # bisection, the bracket shrinks to 1e-10 relative
    while hi - lo > 1e-13 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_power(medium: GainMedium, cavity: CavityConfig,
                    topology: Topology = "dropo") -> float:
    """External pump power at which the oscillation starts.

    Parameters
    ----------
    medium : GainMedium
    cavity : CavityConfig
    topology : {"dropo", "tropo"}

    Returns
    -------
    float
        For the DROPO the entrance pump power where the small-signal
        round-trip gain compensates the signal losses. For the TROPO that
        power divided by the resonant pump enhancement.
    """
    _check_topology(topology)
    if medium.kappa == 0:
        return math.inf
    P_intra = _intracavity_threshold(medium, cavity.R1 * cavity.Rp1)
    if topology == "dropo":
        return P_intra
    r0 = np.sqrt(cavity.R0)
    enh = (1.0 - cavity.R0) / (1.0 - r0 * np.sqrt(cavity.Rp0)) ** 2
    return P_intra / enh


def conversion_efficiency(state, P1out: float | None = None,
                          order: int | None = None) -> float:
    """Fraction of input pump power converted, ``(m-1) P1out / P0in``.

    Call either as ``conversion_efficiency(state)`` with a
    :class:`SteadyState` or as ``conversion_efficiency(P0in, P1out, order)``.
    Signal and idler are taken degenerate in frequency, so each converted
    pair carries the energy of ``m - 1`` pump photons.
    """
    if isinstance(state, SteadyState):
        P0in, P1out, order = state.P0in, state.P1out, state.order
    else:
        P0in = state
        if P1out is None or order is None:
            raise DomainError("need P1out and order with a bare P0in")
    if P0in == 0:
        raise DomainError("conversion efficiency undefined at P0in = 0")
    return (order - 1) * P1out / P0in


def _below_threshold(P0in, medium, cavity, topology, Pth):
    if topology == "dropo":
        P0_intra = P0in
        y2 = P0in
        P0out = cavity.Rp0 * y2
        PT0 = 0.0
    else:
        r0, t0, rp0 = np.sqrt(cavity.R0), np.sqrt(1 - cavity.R0), np.sqrt(cavity.Rp0)
        s = np.sqrt(P0in)
        x = t0 * s / (1.0 - r0 * rp0)
        P0_intra = PT0 = x * x
        y2 = x * x
        P0out = (r0 * s - t0 * rp0 * x) ** 2
    return SteadyState(topology, medium.order, float(P0in), float(P0_intra), 0.0,
                       float(PT0), 0.0, float(P0out),
                       float(P0in / Pth) if Pth > 0 else math.inf, float(Pth), 0.0,
                       float((1 - cavity.Rp0) * y2))


def _assemble(topology, medium, cavity, P0in, x, p1, y, PT0, Pth):
    m = medium.order
    P1L = p1 / (cavity.R1 * cavity.Rp1)
    P1out = (1.0 - cavity.R1) * cavity.Rp1 * P1L
    if topology == "dropo":
        out0 = -np.sqrt(cavity.Rp0) * y
    else:
        out0 = (np.sqrt(cavity.R0) * np.sqrt(P0in)
                - np.sqrt(1 - cavity.R0) * np.sqrt(cavity.Rp0) * y)
    loss = (1 - cavity.Rp0) * y * y + (m - 1) * (1 - cavity.Rp1) * P1L
    eta = conversion_efficiency(P0in, P1out, m) if P0in > 0 else 0.0
    return SteadyState(topology, m, float(P0in), float(x * x), float(p1), float(PT0),
                       float(P1out), float(out0 * out0), float(P0in / Pth), float(Pth),
                       float(eta), float(loss))


def _roots_from_scan(F, grid):
    """Brent-refined roots of ``F`` at each sign change of a finite scan."""
    vals = F(grid)
    roots = []
    for i in range(grid.size - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            g = lambda z: float(F(np.array([z]))[0])
            try:
                roots.append(find_root(g, float(grid[i]), float(grid[i + 1])))
            except BracketError:
                continue
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _pick(candidates, guess, key):
    if not candidates:
        return None
    if guess is None:
        return max(candidates, key=key)
    return min(candidates, key=lambda c: abs(key(c) - guess))


def solve_dropo(P0in: float, medium: GainMedium, cavity: CavityConfig,
                guess: float | None = None) -> SteadyState:
    """Steady state of the doubly resonant oscillator.

    Solves the round-trip signal gain condition
    ``P1(L) = P1(0) / (R1 Rp1)`` for the entrance signal power.

    Parameters
    ----------
    P0in : float
        External pump power.
    medium : GainMedium
    cavity : CavityConfig
        ``R0`` is ignored.
    guess : float, optional
        Previous ``P1_intra`` for continuation; the root closest to it is
        returned. Without it the largest root is returned.

    Returns
    -------
    SteadyState
        Below threshold the signal is zero and the pump passes unchanged.
    """
    _check_pin(P0in)
    cavity = cavity.for_topology("dropo")
    Pth = threshold_power(medium, cavity, "dropo")
    if P0in <= Pth:
        return _below_threshold(P0in, medium, cavity, "dropo", Pth)
    target = _gain_target(cavity)
    p1max = P0in / ((medium.order - 1) * target)
    F = lambda p: relative_gain(P0in, p, medium) - target
    grid = p1max * np.geomspace(1e-300, 1.0, _SCAN)
    roots = [p for p in _roots_from_scan(F, grid) if p > 0]
    p1 = _pick(roots, guess, key=lambda p: p)
    if p1 is None:
        raise ConvergenceError("no DROPO steady state found",
                               {"P0in": P0in, "threshold": Pth})
    y = float(pump_exit_amplitude(P0in, p1, medium))
    return _assemble("dropo", medium, cavity, P0in, np.sqrt(P0in), p1, y, 0.0, Pth)


def _tropo_equal_fields(PT, P0in, R, m):
    """Entrance pump amplitude, entrance signal and mirror-implied exit pump."""
    t, r, s = np.sqrt(1 - R), np.sqrt(R), np.sqrt(P0in)
    x = t * (P0in + PT) / (2.0 * s)
    p1 = (PT - x * x) / (m - 1)
    y = t * (PT - P0in) / (2.0 * r * s)
    return x, p1, y


def _consistent(medium, x, p1, y):
    y_med = float(pump_exit_amplitude(x * x, p1, medium))
    scale = max(abs(x), abs(y), 1e-300)
    return p1 > 0 and x > 0 and abs(y_med - y) <= 1e-6 * scale


def solve_tropo_equal(P0in: float, medium: GainMedium, R: float,
                      guess: float | None = None) -> SteadyState:
    """Lossless triply resonant oscillator with equal pump and signal mirrors.

    The unknown is the total entrance power ``PT0``. For given ``PT0``
    energy conservation and the input coupler fix the entrance pump
    ``x = t (P0in + PT0) / (2 sqrt(P0in))`` and signal power; the single
    pass gain condition is then solved for ``PT0``. For chi2 it is solved
    in ratio form (divided by the entrance signal) so that the ``P1 = 0``
    edge is not a root; for chi3 it is
    ``(1-R)(P0in - PT0)^2 - 4 R P0in PT0 = (e^{-2 kappa PT0} - R)(P0in + PT0)^2``.
    Roots with the wrong sign of the exit pump amplitude are rejected.

    Parameters
    ----------
    P0in : float
    medium : GainMedium
    R : float
        ``R0 = R1``.
    guess : float, optional
        Previous ``PT0`` for continuation.
    """
    _check_pin(P0in)
    cavity = CavityConfig(R0=R, R1=R)
    Pth = threshold_power(medium, cavity, "tropo")
    if P0in <= Pth:
        return _below_threshold(P0in, medium, cavity, "tropo", Pth)
    m = medium.order
    r = np.sqrt(R)
    u_hi, u_lo = (1 + r) / (1 - r), (1 - r) / (1 + r)
    target = (1 - R) / R

    if m == 2:
        def F(PT):
            x, p1, _ = _tropo_equal_fields(PT, P0in, R, m)
            with np.errstate(invalid="ignore"):
                return np.where(p1 >= 0, relative_gain(x * x, np.maximum(p1, 0.0), medium)
                                - target, np.nan)
    else:
        def F(PT):
            q = P0in + PT
            return ((1 - R) * (P0in - PT) ** 2 - 4 * R * P0in * PT
                    - (np.exp(-2 * medium.kappa * PT) - R) * q * q) / (q * q)

    delta = np.geomspace(1e-15, 1.0 - u_lo / u_hi, _SCAN)
    grid = np.sort(u_hi * P0in * (1.0 - delta))
    roots = []
    for PT in _roots_from_scan(F, grid):
        x, p1, y = _tropo_equal_fields(PT, P0in, R, m)
        if _consistent(medium, x, p1, y):
            roots.append((PT, x, p1, y))
    pick = _pick(roots, guess, key=lambda c: c[0])
    if pick is None:
        raise ConvergenceError("no TROPO steady state found",
                               {"P0in": P0in, "R": R, "threshold": Pth})
    PT, x, p1, y = pick
    return _assemble("tropo", medium, cavity, P0in, x, p1, y, PT, Pth)


def _general_fields(PT, P0in, R0, R1, m, branch):
    t0, s = np.sqrt(1 - R0), np.sqrt(P0in)
    a = R1 - R0
    bh = R1 * t0 * s
    c = R1 * (1 - R0) * P0in + R0 * (1 - R1) * PT
    disc = bh * bh - a * c
    with np.errstate(invalid="ignore", divide="ignore"):
        q = bh + np.sqrt(disc)
        if branch == 1:
            x = c / q
        else:
            x = np.where(a != 0, q / (a if a != 0 else 1.0), np.nan)
        x = np.where(disc >= 0, x, np.nan)
        p1 = (PT - x * x) / (m - 1)
        y = (x - t0 * s) / np.sqrt(R0)
    return x, p1, y


def tropo_general_branches(P0in: float, medium: GainMedium, R0: float, R1: float):
    """All lossless TROPO solutions of both quadratic branches.

    Returns
    -------
    dict
        ``{1: [...], 2: [...]}``, each a list of ``SteadyState``.
        Branch 1 is the root of the entrance-pump quadratic that stays
        finite when ``R0 -> R1``.
    """
    _check_pin(P0in)
    cavity = CavityConfig(R0=R0, R1=R1)
    Pth = threshold_power(medium, cavity, "tropo")
    m = medium.order
    target = (1 - R1) / R1
    r0 = np.sqrt(R0)
    PTmax = P0in * ((1 + r0) / (1 - r0) + R1 / (1 - R1))
    grid = PTmax * np.geomspace(1e-12, 1.0, 4 * _SCAN)
    out = {}
    for branch in (1, 2):
        def F(PT, branch=branch):
            x, p1, _ = _general_fields(PT, P0in, R0, R1, m, branch)
            ok = np.isfinite(x) & (p1 >= 0) & (x > 0)
            with np.errstate(invalid="ignore"):
                g = relative_gain(np.where(ok, x * x, 0.0), np.where(ok, p1, 0.0), medium)
            return np.where(ok, g - target, np.nan)
        states = []
        for PT in _roots_from_scan(F, grid):
            x, p1, y = (float(v) for v in _general_fields(PT, P0in, R0, R1, m, branch))
            if _consistent(medium, x, p1, y):
                states.append(_assemble("tropo", medium, cavity, P0in, x, p1, y, PT, Pth))
        out[branch] = states
    return out


def solve_tropo_general(P0in: float, medium: GainMedium, R0: float, R1: float,
                        guess: float | None = None) -> SteadyState:
    """Lossless triply resonant oscillator with ``R0 != R1``.

    Given ``PT0``, the input coupler and energy conservation give a
    quadratic for the entrance pump amplitude,
    ``(R1 - R0) x^2 - 2 R1 t0 sqrt(P0in) x + R1 (1-R0) P0in + R0 (1-R1) PT0 = 0``.
    The physical branch is the root that stays finite as ``R0 -> R1``;
    for ``R0 = R1`` the result coincides with :func:`solve_tropo_equal`.

    Parameters
    ----------
    guess : float, optional
        Previous ``PT0`` for continuation.
    """
    _check_pin(P0in)
    cavity = CavityConfig(R0=R0, R1=R1)
    Pth = threshold_power(medium, cavity, "tropo")
    if P0in <= Pth:
        return _below_threshold(P0in, medium, cavity, "tropo", Pth)
    states = tropo_general_branches(P0in, medium, R0, R1)[1]
    pick = _pick(states, guess, key=lambda st: st.PT0)
    if pick is None:
        raise ConvergenceError("no TROPO steady state on the physical branch",
                               {"P0in": P0in, "R0": R0, "R1": R1, "threshold": Pth})
    return pick


# explicit parametrisation by the intracavity signal ------------------------

def _entrance_pump_for_signal(p1, medium, target):
    """Smallest entrance pump power giving the round-trip gain for signal ``p1``."""
    f = lambda P: float(relative_gain(P, p1, medium)) - target
    hi = max(_intracavity_threshold(medium, 1.0 / (1.0 + target)), p1, 1e-300)
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError("gain condition unreachable", {"p1": p1})
    return find_root(f, 0.0, hi)


def pump_for_signal(p1: float, medium: GainMedium, cavity: CavityConfig,
                    topology: Topology = "tropo") -> SteadyState:
    """Operating point with a prescribed entrance signal power.

    The gain condition fixes the entrance pump power, the crystal fixes the
    signed exit pump, and the input coupler then gives the external pump
    power in closed form. Valid with spurious losses.
    """
    _check_topology(topology)
    if not p1 > 0:
        raise DomainError("p1 must be positive")
    cav = cavity.for_topology(topology)
    target = _gain_target(cav)
    P0 = _entrance_pump_for_signal(p1, medium, target)
    x = np.sqrt(P0)
    y = float(pump_exit_amplitude(P0, p1, medium))
    r0, t0 = np.sqrt(cav.R0), np.sqrt(1 - cav.R0)
    s = (x - r0 * np.sqrt(cav.Rp0) * y) / t0
    if s < 0:
        raise DomainError("prescribed signal needs a negative pump amplitude")
    P0in = s * s
    Pth = threshold_power(medium, cav, topology)
    PT = P0 + (medium.order - 1) * p1 if topology == "tropo" else 0.0
    return _assemble(topology, medium, cav, P0in, x, p1, y, PT, Pth)


def solve_tropo(P0in: float, medium: GainMedium, cavity: CavityConfig,
                guess: float | None = None) -> SteadyState:
    """Triply resonant oscillator for arbitrary mirrors, including losses.

    Inverts :func:`pump_for_signal` along the branch that starts at
    threshold (first crossing of ``P0in`` with increasing signal).

    Parameters
    ----------
    guess : float, optional
        Previous ``P1_intra``; the crossing closest to it is used.
    """
    _check_pin(P0in)
    Pth = threshold_power(medium, cavity, "tropo")
    if P0in <= Pth:
        return _below_threshold(P0in, medium, cavity, "tropo", Pth)
    m = medium.order
    target = _gain_target(cavity)
    # energy bound on the entrance signal
    p1max = P0in * cavity.R1 * cavity.Rp1 / ((m - 1) * (1.0 - cavity.R1 * cavity.Rp1))
    pin = lambda p: pump_for_signal(p, medium, cavity, "tropo").P0in - P0in
    grid = p1max * np.geomspace(1e-14, 1.0, 97)
    vals = np.array([pin(p) for p in grid])
    crossings = []
    for i in range(grid.size - 1):
        if vals[i] == 0:
            crossings.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            crossings.append(find_root(pin, float(grid[i]), float(grid[i + 1])))
    if not crossings:
        if vals[0] > 0:
            # solution below the first grid point, just above threshold
            crossings.append(find_root(pin, 1e-300, float(grid[0])))
        else:
            raise ConvergenceError("no TROPO steady state found",
                                   {"P0in": P0in, "threshold": Pth})
    p1 = crossings[0] if guess is None else min(crossings, key=lambda p: abs(p - guess))
    return pump_for_signal(p1, medium, cavity, "tropo")


def solve_steady_state(P0in: float, medium: GainMedium, cavity: CavityConfig,
                       topology: Topology, guess: float | None = None) -> SteadyState:
    """Dispatch to the appropriate solver.

    ``guess`` is ``P1_intra`` for the DROPO and the loss-mirror route,
    ``PT0`` for the lossless TROPO solvers.
    """
    _check_topology(topology)
    if topology == "dropo":
        return solve_dropo(P0in, medium, cavity, guess)
    if not cavity.lossless:
        return solve_tropo(P0in, medium, cavity, guess)
    if cavity.R0 == cavity.R1:
        return solve_tropo_equal(P0in, medium, cavity.R1, guess)
    return solve_tropo_general(P0in, medium, cavity.R0, cavity.R1, guess)


def continuation_guess(state: SteadyState, medium: GainMedium, cavity: CavityConfig,
                       topology: Topology) -> float | None:
    """The quantity :func:`solve_steady_state` accepts as ``guess``."""
    if not state.above_threshold:
        return None
    if topology == "tropo" and cavity.lossless:
        return state.PT0
    return state.P1_intra
