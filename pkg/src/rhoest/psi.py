"""Bounded likelihood-ratio transforms and their certified constants.

Two transforms are shipped: ``psi1(x) = (x-1)/sqrt(x^2+1)`` and
``psi2(x) = (x-1)/(x+1)``, both monotone from [0, +inf] onto a subinterval of
[-1, 1], antisymmetric under inversion (psi(1/x) = -psi(x)) and equal to 1 at
+inf.  Their constants (a0, a1, a2^2) certify the expectation and variance
inequalities that drive every risk bound downstream; they are hard-coded, not
re-derived.  psi2 is the recommended default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import Density1D, hellinger_sq
from .errors import ContractViolationError
from .quadrature import QuadratureSpec, integrate_1d

__all__ = ["PsiKernel", "kernel_constants", "eval_psi", "psi_pair",
           "check_assumption"]


@dataclass(frozen=True)
class PsiKernel:
    """A psi transform plus its certified constants and derived quantities."""

    id: str
    a0: float
    a1: float
    a2_sq: float

    def __post_init__(self):
        if not (self.a0 >= 1.0 >= self.a1 > 0.0):
            raise ContractViolationError("need a0 >= 1 >= a1 > 0")
        if not self.a2_sq >= max(1.0, 6.0 * self.a1):
            raise ContractViolationError("need a2^2 >= max(1, 6 a1)")

    @property
    def a2(self) -> float:
        return math.sqrt(self.a2_sq)

    @property
    def beta(self) -> float:
        return self.a1 / (4.0 * self.a2)

    @property
    def kappa(self) -> float:
        return 35.0 * self.a2_sq / self.a1 + 74.0

    @property
    def gamma(self) -> float:
        return 4.0 * (self.a0 + 16.0) / self.a1 + 2.0 + 168.0 / self.a2_sq


_KERNELS = {
    "psi1": PsiKernel("psi1", a0=4.97, a1=0.083, a2_sq=3.0 + 2.0 * math.sqrt(2.0)),
    "psi2": PsiKernel("psi2", a0=4.0, a1=3.0 / 8.0, a2_sq=3.0 * math.sqrt(2.0)),
}

DEFAULT_KERNEL_ID = "psi2"


def kernel_constants(kernel_id: str = DEFAULT_KERNEL_ID) -> PsiKernel:
    try:
        return _KERNELS[kernel_id]
    except KeyError:
        raise ContractViolationError(
            f"unknown kernel {kernel_id!r}; choose from {sorted(_KERNELS)}")


def eval_psi(kernel: PsiKernel, x):
    """psi(x) for x in [0, +inf]; psi(+inf) = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise ContractViolationError("psi expects x >= 0 (or +inf)")
    inf_mask = np.isinf(x)
    safe = np.where(inf_mask, 1.0, x)
    if kernel.id == "psi1":
        vals = (safe - 1.0) / np.sqrt(safe * safe + 1.0)
    else:
        vals = (safe - 1.0) / (safe + 1.0)
    out = np.where(inf_mask, 1.0, vals)
    return float(out) if out.ndim == 0 else out


def psi_pair(kernel: PsiKernel, num_sqrt, den_sqrt):
    """psi(sqrt(q'/q)) from the square roots u = sqrt(q'), v = sqrt(q).

    Evaluating on the (u, v) pair keeps swap-antisymmetry exact in floating
    point and realizes the conventions 0/0 -> psi(1) = 0, a/0 -> psi(+inf)=1
    and 0/a -> psi(0) = -1 without special-casing the ratio.  Also absorbs
    infinite density values (singular representations): only the comparison
    of u and v matters there.
    """
    u = np.asarray(num_sqrt, dtype=float)
    v = np.asarray(den_sqrt, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ContractViolationError("density square roots must be nonnegative")
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        if kernel.id == "psi1":
            vals = (u - v) / np.sqrt(u * u + v * v)
        else:
            vals = (u - v) / (u + v)
    # equal (incl. 0/0 and inf/inf) -> 0; one-sided zero or infinity -> +/-1
    vals = np.where(u == v, 0.0, vals)
    vals = np.where((u > v) & ((v == 0.0) | np.isinf(u)), 1.0, vals)
    vals = np.where((v > u) & ((u == 0.0) | np.isinf(v)), -1.0, vals)
    return float(vals) if vals.ndim == 0 else vals


def check_assumption(kernel: PsiKernel, q: Density1D, qp: Density1D,
                     r: Density1D, quad: QuadratureSpec | None = None) -> dict:
    """Numerically certify the two kernel inequalities on a (q, q', R) triple.

    R must be absolutely continuous w.r.t. the common dominating measure of q
    and q'.  Returns both sides of the expectation and variance inequalities;
    ``pass`` requires lhs <= rhs + tolerance for both.
    """
    quad = quad or QuadratureSpec(abs_tol=1e-10)
    h2_rq = hellinger_sq(r, q, quad)
    h2_rqp = hellinger_sq(r, qp, quad)

    lo = min(q.support[0], qp.support[0], r.support[0])
    hi = max(q.support[1], qp.support[1], r.support[1])
    lo, hi = max(lo, r.support[0]), min(hi, r.support[1])
    kinks = tuple(q.breakpoints()) + tuple(qp.breakpoints()) + tuple(r.breakpoints())

    def psi_at(x):
        return psi_pair(kernel, np.sqrt(qp.pdf(x)), np.sqrt(q.pdf(x)))

    lhs_esp = integrate_1d(lambda x: psi_at(x) * r.pdf(x), lo, hi, quad, kinks)
    lhs_var = integrate_1d(lambda x: psi_at(x) ** 2 * r.pdf(x), lo, hi, quad, kinks)
    rhs_esp = kernel.a0 * h2_rq - kernel.a1 * h2_rqp
    rhs_var = kernel.a2_sq * (h2_rq + h2_rqp)
    tol = max(quad.abs_tol, 1e-9)
    return {
        "lhs_esp": lhs_esp,
        "rhs_esp": rhs_esp,
        "lhs_var": lhs_var,
        "rhs_var": rhs_var,
        "pass": bool(lhs_esp <= rhs_esp + tol and lhs_var <= rhs_var + tol),
    }
