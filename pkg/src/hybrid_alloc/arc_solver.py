"""Closed-form arc propagation and the four-variable arc-parametrised NLP.

The optimal throttle follows max (tau = 1) until the pack is full, a
boundary arc holding the charge constant, then min (tau = 0). With the arc
durations ``xi1, xi2, xi3`` and the mass ``z`` at the second junction the
control problem reduces to four equations in four unknowns, which Newton's
method solves directly; the multipliers then follow from stationarity of the
Lagrangian.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from .errors import (ArcValidityError, BoundaryInfeasibleError, InfeasibleError,
                     SolverError)
from .propulsion import sfc as engine_sfc
from .scaling import arc_coefficients, unscale_state, unscale_time

MAX, BOUNDARY, MIN = "max", "boundary", "min"
ARC_KINDS = (MAX, BOUNDARY, MIN)


@dataclass(frozen=True)
class ArcParameters:
    xi1: float
    xi2: float
    xi3: float
    z: float

    def as_array(self):
        return np.array([self.xi1, self.xi2, self.xi3, self.z])

    @classmethod
    def from_array(cls, x):
        return cls(*(float(v) for v in x))

    @property
    def t1(self):
        return self.xi1

    @property
    def t2(self):
        return self.xi1 + self.xi2


@dataclass(frozen=True)
class Solution:
    params: ArcParameters
    duals: np.ndarray
    objective: float
    final_mass: float
    fuel_burned: float
    residual_norm: float
    iterations: int
    structure: str = "max-boundary-min"
    boundary_charge: float = 1.0
    m0: float = field(default=math.nan)

    @property
    def arcs(self):
        """Arc kinds with non-zero length, in flight order."""
        p = self.params
        return tuple(k for k, d in zip(ARC_KINDS, (p.xi1, p.xi2, p.xi3)) if d > 0.0)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    mass: np.ndarray
    charge: np.ndarray
    throttle: np.ndarray
    sfc: np.ndarray
    arc: tuple


def boundary_control(ocp, mhat, check=True):
    """Throttle that keeps the charge constant at scaled mass ``mhat``."""
    tau = -(ocp.k20 + ocp.k22 * mhat * mhat + ocp.k23 * mhat) / ocp.k21
    if check and not -1e-12 <= tau <= 1.0 + 1e-12:
        raise BoundaryInfeasibleError(
            f"boundary throttle {tau:.6g} at mhat={mhat:.6g} outside [0, 1]")
    return tau


def _boundary_mass(coeffs, m_start, duration):
    half = 0.5 * coeffs.r0 * duration
    # the tan form is valid while the shifted angle stays above -pi/2
    if abs(half) >= 0.5 * math.pi or math.atan(coeffs.f1 * m_start + coeffs.f3) - half <= -0.5 * math.pi:
        raise ArcValidityError(f"boundary arc of length {duration:.6g} crosses a tan pole")
    f4 = coeffs.f1 * m_start + coeffs.f3
    tb = math.tan(half)
    delta = 1.0 + tb * f4
    return (f4 - tb) / (coeffs.f1 * delta) - coeffs.k31 / (2.0 * coeffs.k32)


def propagate_arc(kind, ocp, coeffs, start_state, duration):
    """End state ``(mhat, qhat)`` after flying one arc for ``duration``."""
    m, q = start_state
    if duration < 0.0:
        raise ValueError("arc duration must be non-negative")
    if duration == 0.0:
        return m, q
    d = duration
    if kind == MAX:
        kappa = ocp.k11 + ocp.k10
        c1 = ocp.k21 + ocp.k20 + ocp.k22 * m * m + ocp.k23 * m
        c2 = (ocp.k22 * m + 0.5 * ocp.k23) * kappa
        c3 = ocp.k22 * kappa * kappa / 3.0
        return m + kappa * d, q + ((c3 * d + c2) * d + c1) * d
    if kind == BOUNDARY:
        return _boundary_mass(coeffs, m, d), q
    if kind == MIN:
        c1 = ocp.k20 + ocp.k22 * m * m + ocp.k23 * m
        c2 = coeffs.g12 * m + coeffs.g11
        return m + ocp.k10 * d, q + ((coeffs.g13 * d + c2) * d + c1) * d
    raise ValueError(f"unknown arc kind {kind!r}")


def chain_states(ocp, coeffs, params, boundary_charge=None):
    """Junction states at t = 0, t1, t2, 1 from forward propagation."""
    s0 = (ocp.mhat0, ocp.qhat0)
    s1 = propagate_arc(MAX, ocp, coeffs, s0, params.xi1)
    if boundary_charge is not None and params.xi2 > 0.0:
        s1 = (s1[0], boundary_charge)
    s2 = propagate_arc(BOUNDARY, ocp, coeffs, s1, params.xi2)
    s3 = propagate_arc(MIN, ocp, coeffs, s2, params.xi3)
    return s0, s1, s2, s3


def residuals(params, ocp, coeffs):
    """Constraint vector (Phi1, Phi2, Phi3, Phi4); zero at a consistent chain."""
    xi1, xi2, xi3, z = (params.as_array() if isinstance(params, ArcParameters)
                        else np.asarray(params, dtype=float))
    c = coeffs
    phi1 = ((c.h13 * xi1 + c.h12) * xi1 + c.h11) * xi1 + c.h10 - 1.0
    phi2 = (c.g13 * xi3 ** 3 + c.g12 * z * xi3 ** 2 + c.g11 * xi3 ** 2
            + (ocp.k20 + ocp.k22 * z * z + ocp.k23 * z) * xi3 + 1.0 - ocp.qhatf)
    f4 = c.f1 * ocp.mhat0 + c.f2 * xi1 + c.f3
    tb = math.tan(0.5 * c.r0 * xi2)
    delta = 1.0 + tb * f4
    if abs(delta) < 1e-14:
        raise ArcValidityError("junction mass undefined: tan pole in the boundary arc")
    phi3 = z - (f4 - tb) / (c.f1 * delta) + c.k31 / (2.0 * c.k32)
    phi4 = xi1 + xi2 + xi3 - 1.0
    return np.array([phi1, phi2, phi3, phi4])


def objective(params, ocp):
    """G = -z - k10 * xi3, i.e. minus the scaled final mass."""
    return -params.z - ocp.k10 * params.xi3


def default_guess(ocp, coeffs):
    third = 1.0 / 3.0
    m1 = ocp.mhat0 + (ocp.k11 + ocp.k10) * third
    z = _boundary_mass(coeffs, m1, third)
    return ArcParameters(third, third, third, z)


def shooting_guess(ocp, coeffs):
    """Forward-shoot estimate: fill the pack, then bracket the min-arc length."""
    c = coeffs
    roots = np.roots([c.h13, c.h12, c.h11, c.h10 - 1.0])
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and -1e-12 <= r.real <= 1.0)
    if not real:
        return None
    xi1 = max(real[0], 0.0)
    m1 = ocp.mhat0 + (ocp.k11 + ocp.k10) * xi1

    def terminal(xi3):
        z = _boundary_mass(c, m1, 1.0 - xi1 - xi3)
        return propagate_arc(MIN, ocp, c, (z, 1.0), xi3)[1] - ocp.qhatf

    hi = 1.0 - xi1
    try:
        if terminal(0.0) * terminal(hi) > 0.0:
            return None
        xi3 = brentq(terminal, 0.0, hi, xtol=1e-14)
    except ArcValidityError:
        return None
    z = _boundary_mass(c, m1, 1.0 - xi1 - xi3)
    return ArcParameters(xi1, 1.0 - xi1 - xi3, xi3, z)


def _newton(ocp, coeffs, x0, tol, max_iter):
    from .verification import constraint_jacobian

    x = np.array(x0, dtype=float)
    r = residuals(x, ocp, coeffs)
    norm = np.linalg.norm(r)
    for it in range(1, max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            return x, r, it - 1
        jac = constraint_jacobian(x, ocp, coeffs)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular constraint Jacobian", best=x,
                              residual_norm=norm) from exc
        alpha = 1.0
        while alpha > 1e-10:
            trial = x + alpha * step
            try:
                r_trial = residuals(trial, ocp, coeffs)
            except ArcValidityError:
                alpha *= 0.5
                continue
            n_trial = np.linalg.norm(r_trial)
            if n_trial < norm or n_trial <= tol:
                break
            alpha *= 0.5
        else:
            raise SolverError("line search stalled", best=x, residual_norm=norm)
        x, r, norm = trial, r_trial, n_trial
    if np.max(np.abs(r)) <= tol:
        return x, r, max_iter
    raise SolverError(f"no convergence in {max_iter} iterations", best=x,
                      residual_norm=norm)


def recover_duals(x, ocp, coeffs):
    """Multipliers from L_x = grad G + Phi_x^T rho = 0."""
    from .verification import constraint_jacobian, objective_gradient

    jac = constraint_jacobian(x, ocp, coeffs)
    return np.linalg.solve(jac.T, -objective_gradient(ocp))


def _check_boundary_sustained(ocp, m_start, m_end):
    lo, hi = sorted((m_start, m_end))
    masses = [lo, hi]
    if ocp.k22 != 0.0:
        vertex = -ocp.k23 / (2.0 * ocp.k22)
        if lo < vertex < hi:
            masses.append(vertex)
    for m in masses:
        boundary_control(ocp, m)


def _finish(ocp, coeffs, params, duals, r, iterations, structure, boundary_charge):
    g = objective(params, ocp)
    m0_kg = unscale_state(ocp, ocp.mhat0, ocp.qhat0)[0]
    final_kg = unscale_state(ocp, -g, 0.0)[0]
    return Solution(params=params, duals=duals, objective=g, final_mass=final_kg,
                    fuel_burned=m0_kg - final_kg,
                    residual_norm=float(np.max(np.abs(r))) if len(r) else 0.0,
                    iterations=iterations, structure=structure,
                    boundary_charge=boundary_charge, m0=m0_kg)


def _solve_max_min(ocp, coeffs):
    """Reduced problem when the pack never fills: max arc then min arc."""
    def terminal(xi1):
        s1 = propagate_arc(MAX, ocp, coeffs, (ocp.mhat0, ocp.qhat0), xi1)
        return propagate_arc(MIN, ocp, coeffs, s1, 1.0 - xi1)[1] - ocp.qhatf

    lo, hi = terminal(0.0), terminal(1.0)
    if lo > 0.0 or hi < 0.0:
        raise InfeasibleError("terminal charge unreachable with a max-min profile")
    xi1 = brentq(terminal, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    s1 = propagate_arc(MAX, ocp, coeffs, (ocp.mhat0, ocp.qhat0), xi1)
    if s1[1] > 1.0 + 1e-12:
        raise InfeasibleError("max-min profile overcharges the pack")
    params = ArcParameters(xi1, 0.0, 1.0 - xi1, s1[0])
    r = np.array([terminal(xi1)])
    return _finish(ocp, coeffs, params, np.full(4, np.nan), r, 0, "max-min", s1[1])


def _admissible(x, ocp, coeffs):
    xi = x[:3]
    # z must be a positive physical mass, i.e. above the scaled zero b1
    if (xi < -1e-9).any() or not ocp.b1 < x[3]:
        return False
    # xi1 must be the first time the pack fills, so the charge rises through 1
    if x[0] > 1e-12:
        slope = (3.0 * coeffs.h13 * x[0] + 2.0 * coeffs.h12) * x[0] + coeffs.h11
        if slope <= 0.0:
            return False
    return True


def solve(ocp, guess=None, tol=1e-10, max_iter=100, coeffs=None):
    """Fuel-optimal max-boundary-min solution of the scaled problem.

    Parameters
    ----------
    ocp : ScaledOCP
    guess : ArcParameters, optional
        Newton start; defaults to equal thirds with a forward-propagated ``z``.
        A forward-shooting start is tried when the first one fails.
    tol : float
        Max-norm tolerance on the four residuals.

    Returns
    -------
    Solution
        Missions that never fill the pack come back with
        ``structure == "max-min"`` and NaN multipliers.
    """
    coeffs = arc_coefficients(ocp) if coeffs is None else coeffs
    starts = [lambda: guess if guess is not None else default_guess(ocp, coeffs),
              lambda: shooting_guess(ocp, coeffs)]
    last_error = None
    for make_start in starts:
        try:
            start = make_start()
        except ArcValidityError:
            continue
        if start is None:
            continue
        try:
            x, r, its = _newton(ocp, coeffs, start.as_array(), tol, max_iter)
        except SolverError as exc:
            last_error = exc
            continue
        if x[1] < -1e-9 and x[0] >= -1e-9 and x[2] >= -1e-9:
            # the pack cannot fill before the min arc has to start
            return _solve_max_min(ocp, coeffs)
        if _admissible(x, ocp, coeffs):
            break
    else:
        try:
            return _solve_max_min(ocp, coeffs)
        except InfeasibleError:
            if last_error is not None:
                raise last_error
            raise

    x[:3] = np.clip(x[:3], 0.0, None)
    params = ArcParameters.from_array(x)
    m1 = ocp.mhat0 + (ocp.k11 + ocp.k10) * params.xi1
    _check_boundary_sustained(ocp, m1, params.z)
    duals = recover_duals(x, ocp, coeffs)
    r = residuals(x, ocp, coeffs)
    return _finish(ocp, coeffs, params, duals, r, its, "max-boundary-min", 1.0)


def solve_no_charge(ocp, coeffs=None):
    """Optimum when in-flight charging is forbidden.

    The engine carries the full demand at zero battery current, then the
    motor alone drains the pack to the terminal charge. The single switch
    time is found by a scalar root solve.
    """
    coeffs = arc_coefficients(ocp) if coeffs is None else coeffs
    if ocp.qhat0 < ocp.qhatf - 1e-12:
        raise InfeasibleError("no-charge mission needs soc0 >= soc_f")
    start = (ocp.mhat0, ocp.qhat0)

    def terminal(s):
        sb = propagate_arc(BOUNDARY, ocp, coeffs, start, s)
        return propagate_arc(MIN, ocp, coeffs, sb, 1.0 - s)[1] - ocp.qhatf

    lo, hi = terminal(0.0), terminal(1.0)
    if abs(hi) <= 1e-14:
        s = 1.0
    elif lo > 0.0 or hi < 0.0:
        raise InfeasibleError("no switch time satisfies the terminal charge")
    else:
        s = brentq(terminal, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    sb = propagate_arc(BOUNDARY, ocp, coeffs, start, s)
    _check_boundary_sustained(ocp, ocp.mhat0, sb[0])
    params = ArcParameters(0.0, s, 1.0 - s, sb[0])
    r = np.array([terminal(s)])
    return _finish(ocp, coeffs, params, np.full(4, np.nan), r, 0, "boundary-min",
                   ocp.qhat0)


def _arc_at(params, that):
    if that < params.t1:
        return MAX
    if that < params.t2:
        return BOUNDARY
    return MIN


def reconstruct_trajectory(solution, ocp, n_samples=201, coeffs=None):
    """Evenly spaced samples of the optimal flight in physical units."""
    coeffs = arc_coefficients(ocp) if coeffs is None else coeffs
    p = solution.params
    s0, s1, s2, _ = chain_states(ocp, coeffs, p, solution.boundary_charge)
    ts = np.linspace(0.0, 1.0, n_samples)
    mass = np.empty(n_samples)
    charge = np.empty(n_samples)
    throttle = np.empty(n_samples)
    sfc = np.empty(n_samples)
    labels = []
    for i, that in enumerate(ts):
        kind = _arc_at(p, that)
        if p.xi3 == 0.0 and that >= p.t2 and p.xi2 > 0.0:
            kind = BOUNDARY
        if kind == MAX:
            m, q = propagate_arc(MAX, ocp, coeffs, s0, that)
            tau = 1.0
        elif kind == BOUNDARY:
            m, q = propagate_arc(BOUNDARY, ocp, coeffs, s1, min(that, p.t2) - p.t1)
            tau = min(max(boundary_control(ocp, m, check=False), 0.0), 1.0)
        else:
            m, q = propagate_arc(MIN, ocp, coeffs, s2, that - p.t2)
            tau = 0.0
        mass[i], charge[i] = unscale_state(ocp, m, q)
        throttle[i] = tau
        p_out = tau * ocp.engine.p_max if ocp.engine is not None else 0.0
        sfc[i] = engine_sfc(ocp.engine, p_out) if p_out > 0.0 else math.nan
        labels.append(kind)
    return Trajectory(unscale_time(ocp, ts), mass, charge, throttle, sfc, tuple(labels))
