"""Monodromy matrix of  i J y' + v y = lambda y  over [0, pi] and characteristic functions.

The system is integrated as  y' = A(x) y,  A = -i J (lambda - v) = [[-i lam, i P], [-i Q, i lam]],
which is traceless, so det M = 1 exactly; the computed deviation is an accuracy check.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, LocalizationError
from .galerkin import order_pair
from .potentials import FourierPotential

DEFAULT_TOL = 1e-11
ROOT_TOL = 1e-12
NEWTON_HANDOVER = 1e-7     # Newton stops here; pencil steps finish per+/- roots
MIN_TOL = 1e-13


@dataclass(frozen=True)
class MonodromyMatrix:
    lam: complex
    M: np.ndarray
    steps: int
    det_error: float

    @property
    def trace(self) -> complex:
        return complex(self.M[0, 0] + self.M[1, 1])


def _rhs_factory(v: FourierPotential, lam: complex, with_derivative: bool = False):
    pk = np.array(list(v.p.keys()), dtype=float)
    pc = np.array(list(v.p.values()), dtype=complex)
    qk = np.array(list(v.q.keys()), dtype=float)
    qc = np.array(list(v.q.values()), dtype=complex)
    Jm = np.array([-1j, 1j])

    def coeff(x):
        A = np.empty((2, 2), dtype=complex)
        A[0, 0] = -1j * lam
        A[1, 1] = 1j * lam
        A[0, 1] = 1j * (pc @ np.exp(1j * pk * x)) if len(pk) else 0j
        A[1, 0] = -1j * (qc @ np.exp(1j * qk * x)) if len(qk) else 0j
        return A

    if not with_derivative:
        def rhs(x, y):
            return (coeff(x) @ y.reshape(2, 2)).ravel()
        return rhs

    def rhs_d(x, y):
        # (Y, dY/dlam): d/dx dY = A dY + dA/dlam Y with dA/dlam = diag(-i, i)
        Y = y[:4].reshape(2, 2)
        dY = y[4:].reshape(2, 2)
        A = coeff(x)
        return np.concatenate([(A @ Y).ravel(), (A @ dY + Jm[:, None] * Y).ravel()])

    return rhs_d


def _integrate(v, lam, tol, with_derivative):
    y0 = np.eye(2, dtype=complex).ravel()
    if with_derivative:
        y0 = np.concatenate([y0, np.zeros(4, dtype=complex)])
    sol = solve_ivp(_rhs_factory(v, lam, with_derivative), (0.0, math.pi), y0,
                    method="DOP853", rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        raise IntegrationError(f"integration failed at lambda={lam}: {sol.message}")
    return sol.y[:, -1], int(sol.t.size - 1)


def monodromy(v: FourierPotential, lam: complex, tol: float = DEFAULT_TOL) -> MonodromyMatrix:
    """Fundamental matrix at x = pi by adaptive Dormand-Prince 8(5,3)."""
    if tol < MIN_TOL:
        raise ValueError(f"tol must be >= {MIN_TOL}")
    lam = complex(lam)
    if v.is_zero:
        M = np.diag([cmath.exp(-1j * lam * math.pi), cmath.exp(1j * lam * math.pi)])
        return MonodromyMatrix(lam, M, 0, abs(np.linalg.det(M) - 1))
    y, steps = _integrate(v, lam, tol, False)
    M = y.reshape(2, 2)
    return MonodromyMatrix(lam, M, steps, float(abs(np.linalg.det(M) - 1)))


def monodromy_with_derivative(v: FourierPotential, lam: complex, tol: float = DEFAULT_TOL):
    """(M(lam), dM/dlam) from the variational equation, one integration."""
    lam = complex(lam)
    if v.is_zero:
        e1, e2 = cmath.exp(-1j * lam * math.pi), cmath.exp(1j * lam * math.pi)
        return np.diag([e1, e2]), np.diag([-1j * math.pi * e1, 1j * math.pi * e2])
    y, _ = _integrate(v, lam, tol, True)
    return y[:4].reshape(2, 2), y[4:].reshape(2, 2)


def dirichlet_char(v: FourierPotential, lam: complex, tol: float = DEFAULT_TOL) -> complex:
    """chi(lam) = first minus second component of M(lam) (1, 1)^T."""
    M = monodromy(v, lam, tol).M
    w = M @ np.array([1.0, 1.0])
    return complex(w[0] - w[1])


def periodic_char(v: FourierPotential, lam: complex, sign: int, tol: float = DEFAULT_TOL) -> complex:
    """det(M(lam) - sign I); sign=+1 for per+, -1 for per-."""
    M = monodromy(v, lam, tol).M
    return complex(np.linalg.det(M - sign * np.eye(2)))


# ----------------------------------------------------------------------------
# root finding

def _char_and_derivative(v, lam, bc, tol):
    M, dM = monodromy_with_derivative(v, lam, tol)
    if bc == "dir":
        one = np.array([1.0, -1.0])
        return complex(one @ M.sum(axis=1)), complex(one @ dM.sum(axis=1))
    T = M - _sign(bc) * np.eye(2)
    adj = np.array([[T[1, 1], -T[0, 1]], [-T[1, 0], T[0, 0]]])
    return complex(np.linalg.det(T)), complex(np.trace(adj @ dM))


def _sign(bc: str) -> int:
    return 1 if bc == "per+" else -1


def _newton(fdf, seed: complex, centre: int, maxiter: int = 60, xtol: float = 1e-14):
    """Complex Newton; None if the iterate leaves the disc |z - centre| < 1/4."""
    z = complex(seed)
    for _ in range(maxiter):
        fz, df = fdf(z)
        if fz == 0:
            return z
        if df == 0:
            return None
        step = fz / df
        z -= step
        if abs(z - centre) >= 0.25:
            return None
        if abs(step) < xtol * (1 + abs(z)):
            return z
    return z if abs(fdf(z)[0]) < 1e-8 else None


def _newton_multistart(fdf, n: int, xtol: float = 1e-14):
    seeds = [complex(n)] + [n + 0.1 * cmath.exp(0.5j * math.pi * k) for k in range(4)]
    for s in seeds:
        r = _newton(fdf, s, n, xtol=xtol)
        if r is not None:
            return r
    return None


def _pencil_steps(v, z, bc, tol):
    M, dM = monodromy_with_derivative(v, z, tol)
    T = M - _sign(bc) * np.eye(2)
    try:
        return np.linalg.eigvals(-np.linalg.solve(dM, T))
    except np.linalg.LinAlgError:
        return None


def _polish_pencil(v, lam: complex, bc: str, tol: float, n: int, maxiter: int = 12):
    """Refine a per+/- root by successive linear problems on T(lam) = M(lam) - sign I.

    Each step solves det(T + s T') = 0 for the small correction s; this converges
    fast even at (near) geometrically double roots where det T has a double zero
    and Newton on the determinant stalls at the square root of the noise level.
    """
    z = complex(lam)
    prev = math.inf
    for _ in range(maxiter):
        s = _pencil_steps(v, z, bc, tol)
        if s is None:
            return z
        step = complex(s[np.argmin(np.abs(s))])
        if abs(step) >= prev and abs(step) < 1e-10:
            break                       # noise floor reached
        z = z + step
        if abs(z - n) >= 0.25:
            return None
        prev = abs(step)
        if abs(step) < 1e-15 * (1 + abs(z)):
            break
    return z


@dataclass(frozen=True)
class PeriodicRoots:
    n: int
    bc: str
    lambda_minus: complex
    lambda_plus: complex


def find_eigenvalue_near(v: FourierPotential, n: int, bc: str, tol: float = ROOT_TOL):
    """Eigenvalue(s) of L_bc(v) in the disc |lam - n| < 1/4.

    bc = "dir" returns mu_n; bc = "per+"/"per-" returns PeriodicRoots (ordered pair).
    """
    if bc == "dir":
        r = _newton_multistart(lambda lam: _char_and_derivative(v, lam, "dir", tol), n)
        if r is None:
            raise LocalizationError(n, "no Dirichlet eigenvalue found in D_n")
        return r
    if bc not in ("per+", "per-"):
        raise ValueError(f"unknown bc {bc!r}")
    if (n % 2 == 0) != (bc == "per+"):
        raise ValueError(f"{bc} eigenvalues sit near {'even' if bc == 'per+' else 'odd'} n, got n={n}")
    fdf = lambda lam: _char_and_derivative(v, lam, bc, tol)  # noqa: E731
    r1 = _newton_multistart(fdf, n, NEWTON_HANDOVER)
    if r1 is None:
        raise LocalizationError(n, f"no {bc} eigenvalue found in D_n")

    def deflated(lam):
        f, df = fdf(lam)
        d = lam - r1
        if d == 0:
            return df, 0j
        return f / d, (df - f / d) / d

    r2 = None
    for s in [r1 + 0.01, r1 - 0.01, r1 + 0.01j, r1 - 0.01j]:
        r2 = _newton(deflated, s, n, xtol=NEWTON_HANDOVER)
        if r2 is not None:
            break
    if r2 is None:
        r2 = r1
    p1 = _polish_pencil(v, r1, bc, tol, n)
    p2 = _polish_pencil(v, r2, bc, tol, n)
    if p1 is None or p2 is None:
        raise LocalizationError(n, f"{bc} root refinement left D_n")
    if abs(p1 - p2) < 1e-9:
        # both refined onto one root; the pencil there still sees the partner
        s = _pencil_steps(v, p1, bc, tol)
        if s is not None:
            other = p1 + complex(s[np.argmax(np.abs(s))])
            if abs(other - p1) > 1e-9 and abs(other - n) < 0.25:
                p2 = _polish_pencil(v, other, bc, tol, n) or other
    lm, lp = order_pair(p1, p2)
    return PeriodicRoots(n, bc, lm, lp)


def dirichlet_eigenvalues(v: FourierPotential, ns, tol: float = ROOT_TOL) -> dict[int, complex]:
    return {n: find_eigenvalue_near(v, n, "dir", tol) for n in ns}
