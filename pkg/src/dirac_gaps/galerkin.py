"""Truncated Fourier (Galerkin) matrices of L_bc(v) and localization of their spectra.

Basis: e_k^1 = (e^{-ikx}, 0), e_k^2 = (0, e^{ikx}); both are eigenvectors of the
free operator with eigenvalue k. In this basis

    M = [[diag(k), Phat], [Qhat, diag(k)]],  Phat[k, j] = p(-k-j),  Qhat[k, j] = q(k+j),

with k, j even for per+ and odd for per-.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import EigenSolverError, LocalizationError
from .potentials import FourierPotential

BCS = ("per+", "per-")
TRUST_MARGIN = 8
DOUBLE_TOL = 1e-9
RANK_CUTOFF = 1e-8
DISC_RADIUS = 0.25


def parity_of(bc: str) -> int | None:
    if bc == "per+":
        return 0
    if bc == "per-":
        return 1
    if bc == "mixed":
        return None
    raise ValueError(f"unknown boundary condition {bc!r}")


def bc_for_n(n: int) -> str:
    return "per+" if n % 2 == 0 else "per-"


@dataclass(frozen=True)
class GalerkinMatrix:
    bc: str
    K: int
    index_list: np.ndarray
    matrix: np.ndarray = field(repr=False)
    support_bound: int = 0

    @property
    def size(self) -> int:
        return len(self.index_list)

    def position(self, component: int, k: int) -> int:
        """Row of e_k^component (component in {1, 2})."""
        hits = np.nonzero(self.index_list == k)[0]
        if not len(hits):
            raise KeyError(f"mode {k} not in the truncation")
        return int(hits[0]) + (component - 1) * self.size

    @property
    def trusted_bound(self) -> int:
        return self.K - 2 * self.support_bound - TRUST_MARGIN

    @property
    def blocks(self):
        m = self.size
        M = self.matrix
        return M[:m, :m], M[:m, m:], M[m:, :m], M[m:, m:]


def mode_indices(bc: str, K: int) -> np.ndarray:
    par = parity_of(bc)
    ks = np.arange(-K, K + 1)
    if par is not None:
        ks = ks[ks % 2 == par]
    return ks


def build_matrix(v: FourierPotential, bc: str, K: int) -> GalerkinMatrix:
    if K < v.support_bound + 2:
        raise ValueError(f"K={K} too small: need K >= support_bound + 2 = {v.support_bound + 2}")
    ks = mode_indices(bc, K)
    m = len(ks)
    ssum = ks[:, None] + ks[None, :]
    Phat = np.zeros((m, m), dtype=complex)
    Qhat = np.zeros((m, m), dtype=complex)
    for k, c in v.p.items():
        Phat[ssum == -k] = c
    for k, c in v.q.items():
        Qhat[ssum == k] = c
    D = np.diag(ks.astype(complex))
    M = np.block([[D, Phat], [Qhat, D]])
    return GalerkinMatrix(bc, K, ks, M, v.support_bound)


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    source: GalerkinMatrix = field(repr=False)

    @property
    def max_relative_residual(self) -> float:
        nrm = np.linalg.norm(self.source.matrix, 2)
        return float(np.max(self.residuals) / max(nrm, 1.0))


def eig(m: GalerkinMatrix) -> EigenSystem:
    M = m.matrix
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        w, V = scipy.linalg.eig(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        # geev reports the order from which eigenvalues did converge
        hit = re.search(r"(\d+)", str(exc))
        raise EigenSolverError(int(hit.group(1)) if hit else -1) from exc
    V = V / np.linalg.norm(V, axis=0)
    res = np.linalg.norm(M @ V - V * w, axis=0)
    return EigenSystem(w, V, res, m)


# ----------------------------------------------------------------------------
# localization

@dataclass
class SpectralTriple:
    n: int
    lambda_minus: complex
    lambda_plus: complex
    mu: complex | None = None
    vec_minus: np.ndarray | None = field(default=None, repr=False)
    vec_plus: np.ndarray | None = field(default=None, repr=False)

    @property
    def gamma(self) -> float:
        return abs(self.lambda_plus - self.lambda_minus)

    @property
    def delta(self) -> float | None:
        if self.mu is None:
            return None
        return abs(self.mu - 0.5 * (self.lambda_plus + self.lambda_minus))

    @property
    def z_star(self) -> complex:
        return 0.5 * (self.lambda_plus + self.lambda_minus) - self.n

    @property
    def is_double(self) -> bool:
        return self.gamma < DOUBLE_TOL


TIE_TOL = 1e-12


def order_pair(x: complex, y: complex) -> tuple[complex, complex]:
    """(lambda^-, lambda^+): increasing real part, ties broken by imaginary part.

    Real parts within TIE_TOL (relative) count as tied, so a conjugate pair is
    ordered by its imaginary parts rather than by rounding noise.
    """
    x, y = complex(x), complex(y)
    if abs(x.real - y.real) <= TIE_TOL * max(1.0, abs(x), abs(y)):
        return (x, y) if x.imag <= y.imag else (y, x)
    return (x, y) if x.real < y.real else (y, x)


@dataclass
class Localized:
    bc: str
    triples: dict[int, SpectralTriple]
    rectangle: list[complex]            # unpaired eigenvalues with |n| <= N
    edge: list[complex]                 # eigenvalues outside the trusted range
    N: int
    nmax: int


def localize(es: EigenSystem, v: FourierPotential, N: int = 0, nmax: int | None = None) -> Localized:
    """Assign eigenvalues to the discs |z - n| < 1/4 for N < |n| <= nmax.

    Indices |n| <= N make up the low-mode rectangle and are reported unpaired.
    """
    m = es.source
    trusted = m.trusted_bound
    if nmax is None:
        nmax = trusted
    if nmax > trusted:
        raise ValueError(f"nmax={nmax} exceeds trusted range {trusted} for K={m.K}")
    par = parity_of(m.bc)
    lam = es.eigenvalues
    nearest = np.rint(lam.real).astype(int)
    in_disc = np.abs(lam - nearest) < DISC_RADIUS
    triples: dict[int, SpectralTriple] = {}
    rectangle, edge = [], []
    used = np.zeros(len(lam), dtype=bool)
    for n in range(-nmax, nmax + 1):
        if par is not None and n % 2 != par:
            continue
        if abs(n) <= N:
            continue
        idx = np.nonzero(in_disc & (nearest == n))[0]
        if len(idx) != 2:
            raise LocalizationError(n, f"disc D_n holds {len(idx)} eigenvalues, expected 2")
        used[idx] = True
        i, j = idx
        a, b = complex(lam[i]), complex(lam[j])
        if order_pair(a, b)[0] != a:
            i, j = j, i
            a, b = b, a
        triples[n] = SpectralTriple(n, a, b, vec_minus=es.vectors[:, i], vec_plus=es.vectors[:, j])
    for k, x in enumerate(lam):
        if used[k]:
            continue
        if abs(x.real) <= N + 0.5 and abs(x.imag) <= N + 0.5:
            rectangle.append(complex(x))
        else:
            edge.append(complex(x))
    return Localized(m.bc, triples, sorted(rectangle, key=lambda z: (z.real, z.imag)),
                     sorted(edge, key=lambda z: (z.real, z.imag)), N, nmax)


def spectrum(v: FourierPotential, bc: str, K: int, nmax: int | None = None, N: int = 0) -> Localized:
    return localize(eig(build_matrix(v, bc, K)), v, N, nmax)


def default_K(v: FourierPotential, nmax: int, minimum: int = 64) -> int:
    return max(minimum, nmax + 2 * v.support_bound + TRUST_MARGIN)


def gap_and_deviation_sequences(triples: dict[int, SpectralTriple]):
    """Return dicts gamma, delta, z_star keyed by n; delta is None where mu is unknown."""
    gamma = {n: t.gamma for n, t in sorted(triples.items())}
    delta = {n: t.delta for n, t in sorted(triples.items())}
    zs = {n: t.z_star for n, t in sorted(triples.items())}
    return gamma, delta, zs


def geometric_multiplicity(M: np.ndarray, lam: complex, basis: np.ndarray,
                           cutoff: float = RANK_CUTOFF) -> int:
    """Rank deficiency of (M - lam) restricted to span(basis) (columns orthonormalized)."""
    Qb, _ = np.linalg.qr(basis)
    s = np.linalg.svd((M - lam * np.eye(M.shape[0])) @ Qb, compute_uv=False)
    return int(np.sum(s < cutoff))


def max_imag(triples: dict[int, SpectralTriple]) -> float:
    return max((max(abs(t.lambda_minus.imag), abs(t.lambda_plus.imag)) for t in triples.values()),
               default=0.0)


def symmetric_disc_structure(triples: dict[int, SpectralTriple], tol: float = 1e-8):
    """Per disc: 'conj-pair', 'real-double', or 'violation' (skew-symmetric structure)."""
    out = {}
    for n, t in triples.items():
        lm, lp = t.lambda_minus, t.lambda_plus
        if t.is_double and abs(lm.imag) < tol and abs(lp.imag) < tol:
            out[n] = "real-double"
        elif abs(lp - lm.conjugate()) < tol:
            out[n] = "conj-pair"
        else:
            out[n] = "violation"
    return out


def mode_weight_outside(vec: np.ndarray, m: GalerkinMatrix, radius: int) -> float:
    """Fraction of |vec|^2 carried by modes with |k| > radius (truncation diagnostic)."""
    ks = np.concatenate([m.index_list, m.index_list])
    w = np.abs(vec) ** 2
    return float(w[np.abs(ks) > radius].sum() / w.sum())


__all__ = [
    "BCS", "GalerkinMatrix", "EigenSystem", "SpectralTriple", "Localized",
    "build_matrix", "eig", "localize", "spectrum", "gap_and_deviation_sequences",
    "geometric_multiplicity", "order_pair", "bc_for_n", "default_K", "max_imag",
    "symmetric_disc_structure", "mode_indices", "parity_of", "DOUBLE_TOL",
]
