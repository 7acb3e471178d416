"""Independent check of the arc solver by direct RK4 integration.

Nothing here uses the closed-form arcs: the scaled dynamics are integrated
with classical fixed-step RK4 and the switch times are found by brute-force
scanning plus 1-D root bracketing on the terminal charge.
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .scaling import unscale_state

FEEDBACK = -1.0  # throttle sentinel: re-evaluate the boundary control each stage
CHARGE_TOL = 1e-10  # scaled-charge slack when the terminal target is also the boundary


@njit(cache=True)
def _rates(k, m, tau_cmd):
    k10, k11, k20, k21, k22, k23 = k[0], k[1], k[2], k[3], k[4], k[5]
    if tau_cmd < 0.0:
        tau = -(k20 + k22 * m * m + k23 * m) / k21
    else:
        tau = tau_cmd
    return k11 * tau + k10, k21 * tau + k20 + k22 * m * m + k23 * m, tau


@njit(cache=True)
def _segment(k, m, q, tau_cmd, length, n):
    """Integrate one constant-mode segment; returns (m, q, feasible)."""
    ok = True
    if n == 0 or length == 0.0:
        return m, q, ok
    h = length / n
    for _ in range(n):
        dm1, dq1, t1 = _rates(k, m, tau_cmd)
        dm2, dq2, t2 = _rates(k, m + 0.5 * h * dm1, tau_cmd)
        dm3, dq3, t3 = _rates(k, m + 0.5 * h * dm2, tau_cmd)
        dm4, dq4, t4 = _rates(k, m + h * dm3, tau_cmd)
        if min(t1, t2, t3, t4) < -1e-12 or max(t1, t2, t3, t4) > 1.0 + 1e-12:
            ok = False
        m += h * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4) / 6.0
        q += h * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4) / 6.0
    return m, q, ok


@njit(cache=True)
def _segment_dense(k, m, q, tau_cmd, length, n, out_m, out_q, out_tau):
    h = length / n
    out_m[0] = m
    out_q[0] = q
    out_tau[0] = _rates(k, m, tau_cmd)[2]
    for i in range(n):
        dm1, dq1, _ = _rates(k, m, tau_cmd)
        dm2, dq2, _ = _rates(k, m + 0.5 * h * dm1, tau_cmd)
        dm3, dq3, _ = _rates(k, m + 0.5 * h * dm2, tau_cmd)
        dm4, dq4, _ = _rates(k, m + h * dm3, tau_cmd)
        m += h * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4) / 6.0
        q += h * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4) / 6.0
        out_m[i + 1] = m
        out_q[i + 1] = q
        out_tau[i + 1] = _rates(k, m, tau_cmd)[2]


def _kvec(ocp):
    return np.array([ocp.k10, ocp.k11, ocp.k20, ocp.k21, ocp.k22, ocp.k23])


def _nsteps(length, steps):
    return max(1, int(math.ceil(length * steps - 1e-9))) if length > 0.0 else 0


@dataclass(frozen=True)
class ThrottleProfile:
    """Piecewise throttle schedule on scaled time [0, 1].

    ``segments`` is a tuple of ``(t_start, t_end, throttle)`` where the
    throttle is a number in [0, 1] or ``"feedback"`` for the
    charge-holding boundary control.
    """

    segments: tuple

    def __post_init__(self):
        for a, b, tau in self.segments:
            if b < a:
                raise ValueError("segment end before start")
            if tau != "feedback" and not 0.0 <= tau <= 1.0:
                raise ValueError(f"throttle {tau} outside [0, 1]")

    @classmethod
    def structured(cls, t1, t2):
        return cls(((0.0, t1, 1.0), (t1, t2, "feedback"), (t2, 1.0, 0.0)))

    @classmethod
    def table(cls, breaks, values):
        """Piecewise-constant throttle: ``values[i]`` on ``[breaks[i], breaks[i+1])``."""
        edges = list(breaks) + [1.0]
        return cls(tuple((edges[i], edges[i + 1], float(v)) for i, v in enumerate(values)))

    @classmethod
    def feedback(cls, t_end=1.0):
        return cls(((0.0, t_end, "feedback"),) + (((t_end, 1.0, 0.0),) if t_end < 1.0 else ()))


@dataclass(frozen=True)
class SimulationResult:
    mhat: float
    qhat: float
    feasible: bool
    t: np.ndarray | None = None
    m: np.ndarray | None = None
    q: np.ndarray | None = None
    tau: np.ndarray | None = None


@dataclass(frozen=True)
class OracleResult:
    best_t1: float
    best_t2: float
    fuel: float
    feasible: bool
    grid_resolution: int
    final_mhat: float = math.nan


def simulate(ocp, profile, steps=10000, dense=False, start=None):
    """RK4 integration of the scaled dynamics under ``profile``.

    Each segment gets ``ceil(length * steps)`` equal steps, so switches
    always fall on step boundaries.
    """
    if steps < 1000:
        raise ValueError("simulate needs at least 1000 steps")
    k = _kvec(ocp)
    m, q = (ocp.mhat0, ocp.qhat0) if start is None else start
    ok = True
    ts, ms, qs, taus = [], [], [], []
    for a, b, tau in profile.segments:
        length = b - a
        n = _nsteps(length, steps)
        if n == 0:
            continue
        cmd = FEEDBACK if tau == "feedback" else float(tau)
        if dense:
            om, oq, ot = np.empty(n + 1), np.empty(n + 1), np.empty(n + 1)
            _segment_dense(k, m, q, cmd, length, n, om, oq, ot)
            ts.append(np.linspace(a, b, n + 1))
            ms.append(om)
            qs.append(oq)
            taus.append(ot)
            if ((ot < -1e-12) | (ot > 1 + 1e-12)).any():
                ok = False
            m, q = om[-1], oq[-1]
        else:
            m, q, seg_ok = _segment(k, m, q, cmd, length, n)
            ok = ok and seg_ok
    if dense:
        return SimulationResult(m, q, ok, np.concatenate(ts), np.concatenate(ms),
                                np.concatenate(qs), np.concatenate(taus))
    return SimulationResult(m, q, ok)


def _terminal_given_t1(k, state1, t1, t2, steps):
    m, q = state1
    m, q, ok1 = _segment(k, m, q, FEEDBACK, t2 - t1, _nsteps(t2 - t1, steps))
    m, q, ok2 = _segment(k, m, q, 0.0, 1.0 - t2, _nsteps(1.0 - t2, steps))
    return m, q, ok1 and ok2


def _best_t2(k, ocp, state1, t1, steps):
    """Switch to tau = 0 so the terminal charge hits qhatf; None if impossible.

    The terminal charge grows with t2 (a shorter min arc drains less); a
    coarse scan is used if the endpoint bracket disagrees with that.
    """
    def g(t2):
        return _terminal_given_t1(k, state1, t1, t2, steps)[1] - ocp.qhatf

    lo, hi = g(t1), g(1.0)
    if abs(hi) <= CHARGE_TOL:
        # terminal charge already met with no min arc
        return 1.0
    if lo > 0.0 or hi < 0.0:
        grid = np.linspace(t1, 1.0, 21)
        vals = np.array([g(t) for t in grid])
        idx = np.nonzero(np.diff(np.sign(vals)))[0]
        if idx.size == 0:
            return None
        a, b = grid[idx[0]], grid[idx[0] + 1]
    else:
        a, b = t1, 1.0
    if g(a) == 0.0:
        return a
    if g(b) == 0.0:
        return b
    return brentq(g, a, b, xtol=1e-14, rtol=1e-14)


def _evaluate_t1(k, ocp, t1, steps):
    m1, q1, ok = _segment(k, ocp.mhat0, ocp.qhat0, 1.0, t1, _nsteps(t1, steps))
    if not ok or q1 > 1.0 + 1e-9:
        return None
    t2 = _best_t2(k, ocp, (m1, q1), t1, steps)
    if t2 is None:
        return None
    mf, qf, ok = _terminal_given_t1(k, (m1, q1), t1, t2, steps)
    if not ok:
        return None
    return t2, mf


def _scan(k, ocp, t1_values, steps):
    best = None
    for t1 in t1_values:
        res = _evaluate_t1(k, ocp, float(t1), steps)
        if res is None:
            continue
        t2, mf = res
        # strict comparison keeps the smaller t1 on ties
        if best is None or mf > best[2]:
            best = (float(t1), t2, mf)
    return best


def _edge_t2_one(k, ocp, steps):
    """Candidate on the t2 = 1 edge: root on t1 so the max arc alone meets qhatf.

    Needed when qhatf is the full-pack boundary, where no grid t1 lands
    exactly on the fill time.
    """
    def g(t1):
        m, q, ok = _segment(k, ocp.mhat0, ocp.qhat0, 1.0, t1, _nsteps(t1, steps))
        return q - ocp.qhatf

    if abs(ocp.qhatf - 1.0) > CHARGE_TOL or g(0.0) > 0.0 or g(1.0) < 0.0:
        return None
    t1 = 0.0 if g(0.0) == 0.0 else brentq(g, 0.0, 1.0, xtol=1e-14, rtol=1e-14)
    m1, q1, ok1 = _segment(k, ocp.mhat0, ocp.qhat0, 1.0, t1, _nsteps(t1, steps))
    mf, qf, ok2 = _segment(k, m1, q1, FEEDBACK, 1.0 - t1, _nsteps(1.0 - t1, steps))
    if not (ok1 and ok2):
        return None
    return (t1, 1.0, mf)


def _result(ocp, best, resolution):
    if best is None:
        return OracleResult(math.nan, math.nan, math.nan, False, resolution)
    t1, t2, mf = best
    m0 = unscale_state(ocp, ocp.mhat0, ocp.qhat0)[0]
    fuel = m0 - unscale_state(ocp, mf, 0.0)[0]
    return OracleResult(t1, t2, fuel, True, resolution, mf)


def grid_search(ocp, resolution=400, steps=10000, refine=10):
    """Brute-force max / feedback / min switch times on a ``resolution`` grid.

    One coarse-to-fine pass re-scans the cells around the coarse optimum at
    ``refine`` times the resolution.
    """
    if resolution < 100:
        raise ValueError("grid_search needs resolution >= 100")
    k = _kvec(ocp)
    coarse = np.linspace(0.0, 1.0, resolution + 1)
    best = _scan(k, ocp, coarse, steps)
    edge = _edge_t2_one(k, ocp, steps)
    if edge is not None and (best is None or edge[2] > best[2]):
        best = edge
    if best is None:
        return _result(ocp, None, resolution)
    if refine > 1 and best is not edge:
        d = 1.0 / resolution
        lo, hi = max(best[0] - d, 0.0), min(best[0] + d, 1.0)
        fine = np.linspace(lo, hi, 2 * refine + 1)
        best_fine = _scan(k, ocp, fine, steps)
        if best_fine is not None and best_fine[2] > best[2]:
            best = best_fine
    return _result(ocp, best, resolution)


def grid_search_no_charge(ocp, resolution=400, steps=10000):
    """Single switch from zero-current flight to motor-alone flight."""
    if resolution < 100:
        raise ValueError("grid_search needs resolution >= 100")
    k = _kvec(ocp)

    def g(s):
        m, q, _ = _terminal_given_t1(k, (ocp.mhat0, ocp.qhat0), 0.0, s, steps)
        return q - ocp.qhatf

    grid = np.linspace(0.0, 1.0, resolution + 1)
    vals = np.array([g(s) for s in grid])
    if abs(vals[-1]) <= CHARGE_TOL:
        s = 1.0
    else:
        idx = np.nonzero(np.diff(np.sign(vals)))[0]
        if idx.size == 0:
            return _result(ocp, None, resolution)
        a, b = grid[idx[0]], grid[idx[0] + 1]
        s = b if vals[idx[0] + 1] == 0.0 else brentq(g, a, b, xtol=1e-14, rtol=1e-14)
    mf, _, ok = _terminal_given_t1(k, (ocp.mhat0, ocp.qhat0), 0.0, s, steps)
    if not ok:
        return _result(ocp, None, resolution)
    return _result(ocp, (0.0, s, mf), resolution)
