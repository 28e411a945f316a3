"""Riesz projections, eigenvector overlaps and the basis / no-basis classification.

Eigenvectors are built by lifting a null vector of the reduced 2x2 matrix
[[alpha, beta^-], [beta^+, alpha]] (coordinates e_n^1, e_n^2) back to the full
Galerkin space,

    x_E = x0,   x_F = (lambda - M_FF)^{-1} M_FE x0,

which keeps full relative accuracy of the E-components even when the two
eigenvalues in a disc agree to far below machine precision.  Eigenvectors from
the dense solver are kept as a cross-check where they are resolvable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basic_equation import BasicRoots, solve
from .coefficients import CoefficientValue, LogComplex, eval_S
from .errors import NumericalFailure
from .galerkin import GalerkinMatrix, build_matrix, default_K, geometric_multiplicity, parity_of
from .potentials import FourierPotential, classify_symmetry

QUAD_POINTS = 64
MAX_QUAD_POINTS = 1024
IDEMPOTENCY_TOL = 1e-11     # nodes are doubled until ||P^2 - P|| falls below this
CONTOUR_RADII = (0.25, 0.225, 0.275, 0.2, 0.3)
CONTOUR_CLEARANCE = 1e-6
MIN_USABLE = 6
SPAN_DECADES = 2.0
DENSE_GAP_MIN = 1e-6       # below this the dense solver cannot separate the two eigenvectors


# ----------------------------------------------------------------------------
# projections

@dataclass(frozen=True)
class ProjectionData:
    n: int
    P: np.ndarray = field(repr=False)
    P0: np.ndarray = field(repr=False)
    deviation: float            # ||P_n - P_n^0||_2
    idempotency: float          # ||P_n^2 - P_n||_2
    rank: int
    radius: float


def free_projection(n: int, gm: GalerkinMatrix) -> np.ndarray:
    P0 = np.zeros_like(gm.matrix)
    for comp in (1, 2):
        i = gm.position(comp, n)
        P0[i, i] = 1.0
    return P0


def projection(n: int, gm: GalerkinMatrix, quadrature_points: int = QUAD_POINTS,
               eigenvalues: np.ndarray | None = None) -> ProjectionData:
    """(1/2 pi i) times the contour integral of (zeta - M)^{-1} over |zeta - n| = r.

    Trapezoid rule starting from quadrature_points nodes, doubled as needed.
    """
    M = gm.matrix
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvals(M)
    dist = np.abs(eigenvalues - n)
    for r in CONTOUR_RADII:
        if np.min(np.abs(dist - r)) > CONTOUR_CLEARANCE:
            break
    else:
        raise NumericalFailure(f"n={n}: eigenvalues crowd every admissible contour radius")
    I = np.eye(M.shape[0])

    def node_sum(ks, m):
        S = np.zeros_like(M)
        for k in ks:
            w = r * np.exp(2j * np.pi * k / m)
            # d zeta / (2 pi i) = w d theta / (2 pi)
            S += w * np.linalg.solve((n + w) * I - M, I)
        return S

    # trapezoid rule with nested doubling; an eigenvalue near the circle slows
    # the geometric convergence, so keep refining until P is a projection
    m = quadrature_points
    S = node_sum(range(m), m)
    P = S / m
    while np.linalg.norm(P @ P - P, 2) > IDEMPOTENCY_TOL and 2 * m <= MAX_QUAD_POINTS:
        S = S + node_sum(range(1, 2 * m, 2), 2 * m)
        m *= 2
        P = S / m
    P0 = free_projection(n, gm)
    return ProjectionData(n, P, P0, float(np.linalg.norm(P - P0, 2)),
                          float(np.linalg.norm(P @ P - P, 2)), int(round(np.trace(P).real)), r)


def projection_deviations(v: FourierPotential, bc: str, ns, K: int | None = None,
                          quadrature_points: int = QUAD_POINTS) -> dict[int, ProjectionData]:
    ns = [n for n in ns if n % 2 == parity_of(bc)]
    K = K or default_K(v, max(abs(n) for n in ns))
    gm = build_matrix(v, bc, K)
    ev = np.linalg.eigvals(gm.matrix)
    return {n: projection(n, gm, quadrature_points, ev) for n in ns}


def tail_sums(deviations: dict[int, float]) -> dict[int, float]:
    """T(N) = sum over N < |n| <= M of d_n^2, for each N below the largest computed |n|."""
    absn = sorted({abs(n) for n in deviations})
    out = {}
    for N in [0] + absn[:-1]:
        out[N] = float(sum(d * d for n, d in deviations.items() if abs(n) > N))
    return out


# ----------------------------------------------------------------------------
# eigenvectors and overlaps

def lift(gm: GalerkinMatrix, n: int, lam: complex, x0) -> np.ndarray:
    """Full Galerkin vector with E-part x0 solving the F-rows of (lambda - M) x = 0."""
    M = gm.matrix
    E = [gm.position(1, n), gm.position(2, n)]
    F = np.setdiff1d(np.arange(M.shape[0]), E)
    x = np.zeros(M.shape[0], dtype=complex)
    x[E] = x0
    A = lam * np.eye(len(F)) - M[np.ix_(F, F)]
    x[F] = np.linalg.solve(A, M[np.ix_(F, E)] @ np.asarray(x0, dtype=complex))
    return x


def _reduced_null_vector(log_abs_eta: float, phi: float, sign: int) -> np.ndarray:
    """(sign sqrt(eta), 1), scaled so the larger entry is 1."""
    half = 0.5 * log_abs_eta
    ph = np.exp(0.5j * phi)
    if half <= 0:
        return np.array([sign * math.exp(half) * ph, 1.0])
    return np.array([sign * ph, math.exp(-half)])


def reduced_overlap_factor(log_abs_eta1: float, log_abs_eta2: float, psi: float) -> float:
    """Pi_n = (1 + xy - 2 sqrt(xy) cos psi) / ((1 + x)(1 + y)), x = |eta(z1)|, y = |eta(z2)|.

    Symmetric under (x, y) -> (1/x, 1/y), so either orientation of eta gives the same value.
    """
    # evaluate in the orientation with xy <= 1 to avoid overflow
    if log_abs_eta1 + log_abs_eta2 > 0:
        log_abs_eta1, log_abs_eta2 = -log_abs_eta1, -log_abs_eta2
    x, y = math.exp(log_abs_eta1), math.exp(log_abs_eta2)
    sxy = math.exp(0.5 * (log_abs_eta1 + log_abs_eta2))
    return (1 + x * y - 2 * sxy * math.cos(psi)) / ((1 + x) * (1 + y))


@dataclass
class OverlapEntry:
    n: int
    kind: str                          # simple | double-orthogonal | defective
    overlap: complex                   # <f, g> for unit eigenvectors
    overlap_dense: float | None        # |<f, g>| from dense-solver eigenvectors
    f0_norm: float                     # norm of the E-component of unit f
    g0_norm: float
    log_abs_eta: tuple[float, float] | None
    psi: float | None
    Pi: float | None
    discrepancy: float | None          # | |<f,g>|^2 - ||f0||^2 ||g0||^2 Pi |
    geometric_multiplicity: int | None = None
    residual: float = 0.0              # max ||(M - lambda) x|| / ||M|| for the lifted vectors

    @property
    def abs_overlap(self) -> float:
        return abs(self.overlap)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "kind": self.kind, "abs_overlap": self.abs_overlap,
            "overlap_dense": self.overlap_dense, "f0_norm": self.f0_norm, "g0_norm": self.g0_norm,
            "log_abs_eta": list(self.log_abs_eta) if self.log_abs_eta else None,
            "psi": self.psi, "Pi": self.Pi, "discrepancy": self.discrepancy,
            "geometric_multiplicity": self.geometric_multiplicity, "residual": self.residual,
        }


def _eig_residual(M, lam, x) -> float:
    return float(np.linalg.norm(M @ x - lam * x) / max(1.0, np.linalg.norm(M, 2)))


def overlap_diagnostics(n: int, gm: GalerkinMatrix, roots: BasicRoots,
                        dense_pair: tuple[np.ndarray, np.ndarray] | None = None) -> OverlapEntry:
    M = gm.matrix
    E = [gm.position(1, n), gm.position(2, n)]
    c1 = roots.coeffs[0] if roots.coeffs else None
    dense = None
    if dense_pair is not None and dense_pair[0] is not None:
        a, b = dense_pair
        dense = float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))

    if roots.degenerate:
        lam = n + roots.z1
        bp0 = c1.beta_plus_structural_zero if c1 is not None else True
        bm0 = c1.beta_minus_structural_zero if c1 is not None else True
        if not (bp0 and bm0):
            # one off-diagonal entry survives: Jordan block, associated function present
            x = lift(gm, n, lam, [1.0, 0.0] if bp0 else [0.0, 1.0])
            gmult = geometric_multiplicity(M, lam, np.stack([lift(gm, n, lam, [1, 0]),
                                                             lift(gm, n, lam, [0, 1])], axis=1))
            return OverlapEntry(n, "defective", 1.0 + 0j, dense, 1.0, 1.0, None, None, None, None,
                                gmult, _eig_residual(M, lam, x / np.linalg.norm(x)))
        u = lift(gm, n, lam, [1.0, 0.0])
        w = lift(gm, n, lam, [0.0, 1.0])
        f = u / np.linalg.norm(u)
        g = w - np.vdot(f, w) * f
        g /= np.linalg.norm(g)
        gmult = geometric_multiplicity(M, lam, np.stack([f, g], axis=1))
        res = max(_eig_residual(M, lam, f), _eig_residual(M, lam, g))
        return OverlapEntry(n, "double-orthogonal", complex(np.vdot(f, g)), dense,
                            float(np.linalg.norm(f[E])), float(np.linalg.norm(g[E])),
                            None, None, None, None, gmult, res)

    la, lb = n + roots.z1, n + roots.z2
    xa = lift(gm, n, la, _reduced_null_vector(roots.log_abs_eta[0], roots.phi[0], +1))
    xb = lift(gm, n, lb, _reduced_null_vector(roots.log_abs_eta[1], roots.phi[1], -1))
    # f belongs to lambda^-, g to lambda^+ (increasing real part, then imaginary part)
    d = roots.gap
    if (d.real, d.imag) > (0.0, 0.0):
        xa, xb, la, lb = xb, xa, lb, la
    f = xa / np.linalg.norm(xa)
    g = xb / np.linalg.norm(xb)
    ov = complex(np.vdot(f, g))
    f0n, g0n = float(np.linalg.norm(f[E])), float(np.linalg.norm(g[E]))
    Pi = reduced_overlap_factor(roots.log_abs_eta[0], roots.log_abs_eta[1], roots.psi)
    disc = abs(abs(ov) ** 2 - f0n ** 2 * g0n ** 2 * Pi)
    res = max(_eig_residual(M, la, f), _eig_residual(M, lb, g))
    return OverlapEntry(n, "simple", ov, dense, f0n, g0n, roots.log_abs_eta, roots.psi, Pi, disc,
                        None, res)


# ----------------------------------------------------------------------------
# classification

def delta_cap(c: float) -> float:
    """sup of (1 + xy)/((1 + x)(1 + y)) over 1/(4c) <= x, y <= 4c."""
    return (1 + 16 * c * c) / (1 + 4 * c) ** 2


def _grid(center: complex, radius: float) -> list[complex]:
    pts = [center]
    for k in range(8):
        pts.append(center + radius * np.exp(0.25j * np.pi * k))
    return pts


def _log_ratio(num: LogComplex, den: LogComplex) -> float | None:
    if num.is_zero or den.is_zero:
        return None
    return (num.log_magnitude - den.log_magnitude) / math.log(10)


@dataclass
class RieszRow:
    n: int
    gamma: float
    z_star: complex
    beta_plus_zstar: complex
    beta_minus_zstar: complex
    log10_ratio_zero: float | None     # log10 |beta^-(0) / beta^+(0)|
    log10_ratio_zstar: float | None
    c3_constant: float | None          # max deviation factor of |beta^pm| on the K_n grid
    overlap: OverlapEntry

    def to_dict(self) -> dict:
        return {
            "n": self.n, "gamma": self.gamma, "z_star": [self.z_star.real, self.z_star.imag],
            "abs_beta_plus_zstar": abs(self.beta_plus_zstar),
            "abs_beta_minus_zstar": abs(self.beta_minus_zstar),
            "log10_ratio_zero": self.log10_ratio_zero, "log10_ratio_zstar": self.log10_ratio_zstar,
            "c3_constant": self.c3_constant, **{"overlap": self.overlap.to_dict()},
        }


@dataclass
class RieszReport:
    bc: str
    ns: list[int]
    rows: list[RieszRow]
    c_estimate: float | None
    c2_holds: bool
    c3_constant: float | None
    ratio_window: tuple[float, float] | None     # (min, max) of log10 ratio over the last half
    ratio_trend: str                             # bounded | monotone | irregular | n/a
    kappa: float
    kappa_dense: float | None
    delta_cap: float | None
    all_beta_zero: bool
    defective: list[int]
    symmetry: str
    verdict: str
    notes: list[str]

    def to_dict(self) -> dict:
        return {
            "schema_version": 1, "bc": self.bc, "n": self.ns, "verdict": self.verdict,
            "c_estimate": self.c_estimate, "c2_holds": self.c2_holds, "c3_constant": self.c3_constant,
            "ratio_window_log10": list(self.ratio_window) if self.ratio_window else None,
            "ratio_trend": self.ratio_trend, "kappa": self.kappa, "kappa_dense": self.kappa_dense,
            "delta_cap": self.delta_cap, "all_beta_zero": self.all_beta_zero,
            "defective": self.defective, "symmetry": self.symmetry, "notes": self.notes,
            "rows": [r.to_dict() for r in self.rows],
        }


DIVERGENT_STEP = 0.01       # decades per index; smaller steps are read as settling


def _trend(vals: list[float]) -> str:
    """'monotone' when the log ratio moves one way with steps that do not die out.

    A ratio approaching a limit also moves monotonically, but with shrinking
    increments; only a steady drift indicates divergence.
    """
    d = np.diff(vals)
    if len(d) == 0:
        return "n/a"
    if (np.all(d > 0) or np.all(d < 0)) and abs(d[-1]) >= max(DIVERGENT_STEP, 0.5 * abs(d[0])):
        return "monotone"
    return "irregular"


def classify(v: FourierPotential, bc: str, ns, K: int | None = None,
             dense_check: bool = True) -> RieszReport:
    """Per-n overlap diagnostics and the basis verdict over the given indices."""
    par = parity_of(bc)
    ns = sorted(n for n in ns if n % 2 == par and n != 0)
    notes: list[str] = []
    if not ns:
        raise ValueError(f"no indices of the right parity for {bc}")
    K = K or default_K(v, max(abs(n) for n in ns))
    gm = build_matrix(v, bc, K)
    dense_vecs = {}
    if dense_check:
        w, V = np.linalg.eig(gm.matrix)
        for n in ns:
            idx = np.nonzero(np.abs(w - n) < 0.25)[0]
            if len(idx) == 2:
                dense_vecs[n] = (V[:, idx[0]], V[:, idx[1]])

    rows: list[RieszRow] = []
    for n in ns:
        roots = solve(n, v, count_roots=False)
        zs = 0.5 * (roots.z1 + roots.z2)
        cz = eval_S(n, zs, v)
        c0 = eval_S(n, 0j, v)
        c3 = None
        if not (c0.beta_plus_log.is_zero or c0.beta_minus_log.is_zero):
            worst = 0.0
            for z in _grid(zs, roots.gamma):
                cg = eval_S(n, z, v)
                for a, b in ((cg.beta_plus_log, c0.beta_plus_log), (cg.beta_minus_log, c0.beta_minus_log)):
                    if a.is_zero:
                        worst = math.inf
                    else:
                        worst = max(worst, abs(a.log_magnitude - b.log_magnitude))
            c3 = math.exp(worst)
        dp = dense_vecs.get(n) if roots.gamma > DENSE_GAP_MIN else None
        ov = overlap_diagnostics(n, gm, roots, dp)
        rows.append(RieszRow(n, roots.gamma, zs, cz.beta_plus, cz.beta_minus,
                             _log_ratio(c0.beta_minus_log, c0.beta_plus_log),
                             _log_ratio(cz.beta_minus_log, cz.beta_plus_log), c3, ov))

    sym = classify_symmetry(v, tol=1e-12)
    defective = [r.n for r in rows if r.overlap.kind == "defective"]
    usable = [r for r in rows if r.overlap.kind != "defective"]
    kappa = max((r.overlap.abs_overlap for r in usable), default=0.0)
    dense_ov = [r.overlap.overlap_dense for r in usable if r.overlap.overlap_dense is not None]
    kappa_dense = max(dense_ov) if dense_ov else None
    all_zero = all(r.log10_ratio_zero is None and r.overlap.kind == "double-orthogonal" for r in rows)
    ratios = [r.log10_ratio_zero for r in rows]
    c2 = all(x is not None for x in ratios)
    zr = [r.log10_ratio_zstar for r in rows if r.log10_ratio_zstar is not None]
    c_est = 10 ** max(abs(x) for x in zr) if zr else (1.0 if all_zero else None)
    c3s = [r.c3_constant for r in rows if r.c3_constant is not None]
    c3max = max(c3s) if c3s else None

    window = None
    trend = "n/a"
    cap = None
    if all_zero:
        verdict = "riesz-basis" if all(r.overlap.geometric_multiplicity == 2 for r in rows) else "undecided"
        notes.append("beta^pm vanish identically on the range; eigenvalues are double and "
                     "eigenvectors are chosen orthogonal")
    elif len(usable) < MIN_USABLE or not c2:
        verdict = "undecided"
        notes.append("fewer than 6 usable indices" if len(usable) < MIN_USABLE
                     else "beta^pm(0) vanishes for some n, the ratio test does not apply")
    else:
        tail = ratios[len(ratios) // 2:]
        window = (min(tail), max(tail))
        span = window[1] - window[0]
        trend = _trend(tail)
        if trend != "monotone":
            trend = "bounded" if span <= SPAN_DECADES else "irregular"
        if sym.is_xt:
            cap = delta_cap(max(abs(sym.t), 1 / abs(sym.t)))
        elif c_est is not None:
            cap = delta_cap(c_est)
        if trend == "bounded" and kappa < 1:
            verdict = "riesz-basis"
        elif trend == "monotone":
            verdict = "no-basis"
        else:
            verdict = "undecided"
    if defective:
        notes.append(f"associated functions at n={defective} excluded from kappa")
    return RieszReport(bc, ns, rows, c_est, c2, c3max, window, trend, kappa, kappa_dense, cap,
                       all_zero, defective, sym.label, verdict, notes)


__all__ = ["ProjectionData", "OverlapEntry", "RieszRow", "RieszReport", "projection",
           "projection_deviations", "tail_sums", "lift", "overlap_diagnostics",
           "reduced_overlap_factor", "delta_cap", "classify"]
