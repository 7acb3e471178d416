"""Optimality checks and parametric sensitivity for the arc-parametrised NLP.

The Lagrangian is ``L = G + sum(rho_i * Phi_i)``. All derivatives here are
closed forms; the test suite checks them against finite differences.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import SingularityError
from .scaling import arc_coefficients

PARAMETERS = ("t_f", "m0", "qhat0", "qhatf")


@dataclass(frozen=True)
class SSCReport:
    grad_norm: float
    jacobian_rank: int
    kernel_dim: int
    projected_hessian_min_eig: float | None
    ssc_holds: bool
    n_constraints: int = 4
    curvature_vacuous: bool = False
    first_order_ok: bool = True
    rank_ok: bool = True

    def summary(self):
        return (f"rank={self.jacobian_rank} kernel_dim={self.kernel_dim} "
                f"ssc={'true' if self.ssc_holds else 'false'}")


@dataclass(frozen=True)
class SensitivityReport:
    parameter: str
    dx_dp: np.ndarray
    drho_dp: np.ndarray
    dG_dp: float


def _x(x):
    return x.as_array() if hasattr(x, "as_array") else np.asarray(x, dtype=float)


def _tan_terms(xv, ocp, c):
    xi1, xi2 = xv[0], xv[1]
    tb = math.tan(0.5 * c.r0 * xi2)
    sec2 = 1.0 + tb * tb
    f4 = c.f1 * ocp.mhat0 + c.f2 * xi1 + c.f3
    delta = 1.0 + tb * f4
    if abs(delta) < 1e-14:
        raise SingularityError("Delta = 0: tan pole in the junction-mass constraint")
    return tb, sec2, f4, delta


def objective_gradient(ocp):
    return np.array([0.0, 0.0, -ocp.k10, -1.0])


def constraint_jacobian(x, ocp, coeffs=None):
    """Rows are the gradients of Phi1..Phi4 in (xi1, xi2, xi3, z)."""
    c = arc_coefficients(ocp) if coeffs is None else coeffs
    xv = _x(x)
    xi1, _, xi3, z = xv
    tb, sec2, f4, delta = _tan_terms(xv, ocp, c)
    jac = np.zeros((4, 4))
    jac[0, 0] = (3.0 * c.h13 * xi1 + 2.0 * c.h12) * xi1 + c.h11
    jac[1, 2] = (3.0 * c.g13 * xi3 * xi3 + 2.0 * c.g12 * z * xi3 + 2.0 * c.g11 * xi3
                 + ocp.k20 + ocp.k22 * z * z + ocp.k23 * z)
    jac[1, 3] = c.g12 * xi3 * xi3 + 2.0 * ocp.k22 * xi3 * z + ocp.k23 * xi3
    jac[2, 0] = -c.f2 * sec2 / (c.f1 * delta ** 2)
    jac[2, 1] = c.r0 * sec2 * (1.0 + f4 * f4) / (2.0 * c.f1 * delta ** 2)
    jac[2, 3] = 1.0
    jac[3, :3] = 1.0
    return jac


def lagrangian_gradient(x, rho, ocp, coeffs=None):
    jac = constraint_jacobian(x, ocp, coeffs)
    return objective_gradient(ocp) + jac.T @ np.asarray(rho, dtype=float)


def constraint_hessians(x, ocp, coeffs=None):
    """Second derivatives of Phi1..Phi3 (Phi4 is linear), shape (3, 4, 4)."""
    c = arc_coefficients(ocp) if coeffs is None else coeffs
    xv = _x(x)
    xi1, _, xi3, z = xv
    tb, sec2, f4, delta = _tan_terms(xv, ocp, c)
    hess = np.zeros((3, 4, 4))
    hess[0, 0, 0] = 6.0 * c.h13 * xi1 + 2.0 * c.h12
    hess[1, 2, 2] = 6.0 * c.g13 * xi3 + 2.0 * c.g12 * z + 2.0 * c.g11
    hess[1, 2, 3] = hess[1, 3, 2] = 2.0 * c.g12 * xi3 + 2.0 * ocp.k22 * z + ocp.k23
    hess[1, 3, 3] = 2.0 * ocp.k22 * xi3
    hess[2, 0, 0] = 2.0 * c.f2 ** 2 * (tb + tb ** 3) / (c.f1 * delta ** 3)
    hess[2, 0, 1] = hess[2, 1, 0] = (-c.r0 * c.f2 * sec2 * (tb - f4)
                                     / (c.f1 * delta ** 3))
    hess[2, 1, 1] = (c.r0 ** 2 * (1.0 + f4 * f4) * sec2
                     * (tb * (f4 * tb + 1.0) - f4 * sec2) / (2.0 * c.f1 * delta ** 3))
    return hess


def lagrangian_hessian(x, rho, ocp, coeffs=None):
    rho = np.asarray(rho, dtype=float)
    return np.einsum("i,ijk->jk", rho[:3], constraint_hessians(x, ocp, coeffs))


def _rank(mat, rel_tol=1e-8):
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def check_ssc(solution, ocp, coeffs=None, constraints=(0, 1, 2, 3), grad_tol=1e-8):
    """Evaluate the three second-order sufficient conditions.

    ``constraints`` selects which Phi rows take part; with all four active
    the Jacobian is square and the curvature condition is vacuous.
    """
    c = arc_coefficients(ocp) if coeffs is None else coeffs
    x = solution.params.as_array()
    rho = np.asarray(solution.duals, dtype=float)
    active = list(constraints)
    rho_active = np.zeros(4)
    rho_active[active] = rho[active]
    jac = constraint_jacobian(x, ocp, c)[active]
    grad = objective_gradient(ocp) + jac.T @ rho_active[active]
    grad_norm = float(np.linalg.norm(grad))
    rank = _rank(jac)
    _, sv, vt = np.linalg.svd(jac)
    kernel = vt[rank:].T
    kernel_dim = kernel.shape[1]
    if kernel_dim == 0:
        min_eig, vacuous, curvature_ok = None, True, True
    else:
        hess = lagrangian_hessian(x, rho_active, ocp, c)
        projected = kernel.T @ hess @ kernel
        min_eig = float(np.linalg.eigvalsh(0.5 * (projected + projected.T)).min())
        vacuous, curvature_ok = False, min_eig > 0.0
    first_order = grad_norm <= grad_tol
    rank_ok = rank == len(active)
    return SSCReport(grad_norm, rank, kernel_dim, min_eig,
                     first_order and rank_ok and curvature_ok, len(active),
                     vacuous, first_order, rank_ok)


def kkt_matrix(x, rho, ocp, coeffs=None):
    hess = lagrangian_hessian(x, rho, ocp, coeffs)
    jac = constraint_jacobian(x, ocp, coeffs)
    top = np.hstack([hess, jac.T])
    bottom = np.hstack([jac, np.zeros((4, 4))])
    return np.vstack([top, bottom])


def _parameter_rhs(parameter, x, rho, ocp, c, fd_step=1e-7):
    """(L_xp, Phi_p, dG/dp explicit) for one scalar parameter."""
    from .arc_solver import residuals

    x = np.asarray(x, dtype=float)
    if parameter == "qhat0":
        return np.zeros(4), np.array([1.0, 0.0, 0.0, 0.0]), 0.0
    if parameter == "qhatf":
        return np.zeros(4), np.array([0.0, -1.0, 0.0, 0.0]), 0.0
    if parameter == "t_f":
        # Phi_i(xi, z; s) = Phi_i(s * xi, z) for the three arc constraints
        jac = constraint_jacobian(x, ocp, c)
        hess = lagrangian_hessian(x, rho, ocp, c)
        xi = np.array([x[0], x[1], x[2], 0.0])
        phi_p = np.append(jac[:3] @ xi, 0.0)
        w_grad = jac[:3].T @ rho[:3]
        w_grad[3] = 0.0
        l_xp = hess @ xi + w_grad + np.array([0.0, 0.0, -ocp.k10, 0.0])
        return l_xp, phi_p, -ocp.k10 * x[2]
    if parameter == "m0":
        h = fd_step * max(abs(ocp.mhat0), 1.0)
        up = ocp.with_params(mhat0=ocp.mhat0 + h)
        dn = ocp.with_params(mhat0=ocp.mhat0 - h)
        cu, cd = arc_coefficients(up), arc_coefficients(dn)
        l_xp = (lagrangian_gradient(x, rho, up, cu)
                - lagrangian_gradient(x, rho, dn, cd)) / (2.0 * h)
        phi_p = (residuals(x, up, cu) - residuals(x, dn, cd)) / (2.0 * h)
        return l_xp, phi_p, 0.0
    raise ValueError(f"unknown parameter {parameter!r}; expected one of {PARAMETERS}")


def sensitivity(solution, ocp, coeffs=None, parameter="t_f"):
    """First-order change of the optimum with one problem parameter.

    ``t_f`` is a multiplier on the flight duration (1 = this problem),
    ``m0`` the scaled initial mass, ``qhat0``/``qhatf`` the scaled charge
    endpoints.
    """
    c = arc_coefficients(ocp) if coeffs is None else coeffs
    x = solution.params.as_array()
    rho = np.asarray(solution.duals, dtype=float)
    if np.isnan(rho).any():
        raise SingularityError("sensitivity needs a full max-boundary-min solution")
    kkt = kkt_matrix(x, rho, ocp, c)
    if np.linalg.cond(kkt) > 1e13:
        raise SingularityError("KKT matrix is numerically singular")
    l_xp, phi_p, explicit = _parameter_rhs(parameter, x, rho, ocp, c)
    delta = -np.linalg.solve(kkt, np.concatenate([l_xp, phi_p]))
    dx, drho = delta[:4], delta[4:]
    dg = float(objective_gradient(ocp) @ dx + explicit)
    return SensitivityReport(parameter, dx, drho, dg)
