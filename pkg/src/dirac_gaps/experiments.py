"""End-to-end studies: gap decay against smoothness weights and basis / no-basis demonstrations.

A config is an INI file with one ``[experiment]`` section::

    [experiment]
    kind = gap-decay            ; or basis-demo
    potential = preset:example-c15 0.1 0.1 0.1 0.1   ; or a file path, or random
    bc = per-                   ; per+, per- or both (gap-decay only)
    n_range = 5:25
    K = 64                      ; optional, default from n_range
    weight = abel:1             ; gap-decay only
    seed = 0                    ; used when potential = random
    output_dir = out
    name = my-run
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import galerkin, monodromy
from .basic_equation import solve
from .errors import CrossCheckFailure
from .io import csv_text, json_text, pmap
from .potentials import FourierPotential, Weight, format_potential, load_potential, random_trig_potential
from .riesz import classify

KINDS = ("gap-decay", "basis-demo")
EIG_AGREE = 1e-6
GAP_AGREE = 1e-8


def parse_n_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        a, b = int(lo), int(hi)
    except ValueError as exc:
        raise ValueError(f"n-range must be lo:hi, got {text!r}") from exc
    if not sep or a > b:
        raise ValueError(f"n-range must be lo:hi with lo <= hi, got {text!r}")
    return a, b


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    potential: str
    bc: str = "per-"
    n_range: tuple[int, int] = (5, 25)
    K: int | None = None
    weight: str = "abel:1"
    seed: int = 0
    output_dir: str = "out"
    name: str = "experiment"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.bc not in ("per+", "per-", "both"):
            raise ValueError(f"bad bc {self.bc!r}")
        if self.kind == "basis-demo" and self.bc == "both":
            raise ValueError("basis-demo needs a single bc")
        Weight.parse(self.weight)

    @classmethod
    def from_ini(cls, path: str | os.PathLike) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";",))
        if not cp.read(path):
            raise FileNotFoundError(path)
        if "experiment" not in cp:
            raise ValueError(f"{path}: missing [experiment] section")
        s = cp["experiment"]
        known = {"kind", "potential", "bc", "n_range", "k", "weight", "seed", "output_dir", "name"}
        extra = set(s) - known
        if extra:
            raise ValueError(f"{path}: unknown keys {sorted(extra)}")
        out = Path(s.get("output_dir", "out"))
        if not out.is_absolute():
            out = Path(path).resolve().parent / out
        pot = s["potential"].strip()
        if not pot.startswith("preset:") and pot != "random" and not Path(pot).is_absolute():
            # coefficient files are looked up next to the config
            pot = str(Path(path).resolve().parent / pot)
        return cls(kind=s["kind"], potential=pot, bc=s.get("bc", "per-"),
                   n_range=parse_n_range(s.get("n_range", "5:25")),
                   K=s.getint("k") if "k" in s else None, weight=s.get("weight", "abel:1"),
                   seed=s.getint("seed", 0), output_dir=str(out), name=s.get("name", Path(path).stem))

    def to_ini(self) -> str:
        d = {"kind": self.kind, "potential": self.potential, "bc": self.bc,
             "n_range": f"{self.n_range[0]}:{self.n_range[1]}", "weight": self.weight,
             "seed": str(self.seed), "output_dir": self.output_dir, "name": self.name}
        if self.K is not None:
            d["K"] = str(self.K)
        return "[experiment]\n" + "".join(f"{k} = {v}\n" for k, v in d.items())

    def build_potential(self) -> FourierPotential:
        if self.potential.strip() == "random":
            return random_trig_potential(np.random.default_rng(self.seed))
        return load_potential(self.potential.split())

    def indices(self, bc: str) -> list[int]:
        par = galerkin.parity_of(bc)
        return [n for n in range(self.n_range[0], self.n_range[1] + 1) if n % 2 == par and n != 0]


# ----------------------------------------------------------------------------
# gap decay

@dataclass
class GapDecayResult:
    rows: list[tuple]                   # (n, bc, gamma_galerkin, gamma, weight, partial_sum)
    loglog_slope: float | None          # d log gamma / d log n
    semilog_slope: float | None         # d log gamma / d n
    local_exponents: list[float]
    superpolynomial: bool
    partial_sums_stable: bool
    all_zero: bool


def _fit(x, y):
    if len(x) < 2:
        return None
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def gap_decay_study(cfg: ExperimentConfig, v: FourierPotential | None = None) -> GapDecayResult:
    v = v if v is not None else cfg.build_potential()
    w = Weight.parse(cfg.weight)
    bcs = ["per+", "per-"] if cfg.bc == "both" else [cfg.bc]
    ns_all = sorted((n, bc) for bc in bcs for n in cfg.indices(bc))
    if len(ns_all) < 3:
        raise ValueError("need at least 3 indices in n_range for a decay fit")
    nmax = max(abs(n) for n, _ in ns_all)
    K = cfg.K or galerkin.default_K(v, nmax)
    if galerkin.build_matrix(v, "per+", K).trusted_bound < nmax:
        raise ValueError(f"n_range reaches {nmax}, beyond the trusted range for K={K}")
    # indices below the requested range are left unpaired
    N = min(abs(n) for n, _ in ns_all) - 1
    locs = {bc: galerkin.spectrum(v, bc, K, nmax=nmax, N=N) for bc in bcs}
    roots = dict(zip(ns_all, pmap(lambda nb: solve(nb[0], v, count_roots=False), ns_all)))
    rows, acc = [], 0.0
    for n, bc in ns_all:
        gg = locs[bc].triples[n].gamma
        gb = roots[(n, bc)].gamma
        if abs(gg - gb) > GAP_AGREE:
            raise CrossCheckFailure(f"n={n}: Galerkin gap {gg:.3g} vs basic-equation gap {gb:.3g}")
        om = w(n)
        acc += (gb * om) ** 2
        rows.append((n, bc, gg, gb, om, acc))
    nz = [(n, g) for n, _, _, g, _, _ in rows if g > 0]
    all_zero = not nz
    loglog = _fit([math.log(abs(n)) for n, _ in nz], [math.log(g) for _, g in nz]) if nz else None
    semilog = _fit([abs(n) for n, _ in nz], [math.log(g) for _, g in nz]) if nz else None
    # local exponents d log gamma / d log n, taken within one parity at a time:
    # the two boundary conditions decay at different rates and interleave
    nz_by_bc = {}
    for n, bc, _, g, _, _ in rows:
        if g > 0:
            nz_by_bc.setdefault(bc, []).append((n, g))
    loc_exp, superpoly = [], bool(nz_by_bc)
    for seq in nz_by_bc.values():
        ex = [math.log(g2 / g1) / math.log(abs(n2) / abs(n1))
              for (n1, g1), (n2, g2) in zip(seq, seq[1:]) if abs(n1) != abs(n2)]
        loc_exp += ex
        # exponents drifting down without settling: a trend, not a strict ordering,
        # since interacting modes make them wobble
        trend = _fit(range(len(ex)), ex)
        superpoly = superpoly and len(ex) >= 2 and trend < 0 and ex[-1] < ex[0]
    last = [r[5] for r in rows[-3:]]
    stable = acc == 0 or (last[-1] - last[0]) <= 1e-8 * last[-1]
    return GapDecayResult(rows, loglog, semilog, loc_exp, superpoly or all_zero, stable, all_zero)


def gap_decay_outputs(cfg: ExperimentConfig, res: GapDecayResult) -> dict[str, str]:
    csv = csv_text("gap-decay", ["n", "bc", "gamma_galerkin", "gamma", "weight", "partial_sum"], res.rows)
    summary = {
        "config": {k: x for k, x in asdict(cfg).items() if k != "output_dir"},
        "loglog_slope": res.loglog_slope, "semilog_slope": res.semilog_slope,
        "local_exponents": res.local_exponents, "superpolynomial": res.superpolynomial,
        "partial_sums_stable": res.partial_sums_stable, "all_zero": res.all_zero,
    }
    return {f"{cfg.name}.csv": csv, f"{cfg.name}.json": json_text(summary)}


# ----------------------------------------------------------------------------
# basis demonstration

@dataclass
class BasisBundle:
    verdict: str
    report: object                  # RieszReport
    cross_method: list[tuple]       # (n, lam-_gal, lam+_gal, lam-_mono, lam+_mono, err)
    basic_vs_galerkin: list[tuple]  # (n, err_eig, gamma_gal, gamma_basic, err_gap)
    potential: FourierPotential


def basis_demo(v: FourierPotential, bc: str, ns, K: int | None = None,
               monodromy_check: bool = True) -> BasisBundle:
    """Spectra, basic equation and classification; raises CrossCheckFailure on any disagreement."""
    par = galerkin.parity_of(bc)
    ns = [n for n in ns if n % 2 == par and n != 0]
    nmax = max(abs(n) for n in ns)
    K = K or galerkin.default_K(v, nmax)
    loc = galerkin.spectrum(v, bc, K, nmax=nmax, N=min(abs(n) for n in ns) - 1)

    cross = []
    if monodromy_check:
        mono = pmap(lambda n: monodromy.find_eigenvalue_near(v, n, bc), ns)
        for n, r in zip(ns, mono):
            t = loc.triples[n]
            err = max(abs(r.lambda_minus - t.lambda_minus), abs(r.lambda_plus - t.lambda_plus))
            cross.append((n, t.lambda_minus, t.lambda_plus, r.lambda_minus, r.lambda_plus, err))
            if err > EIG_AGREE:
                raise CrossCheckFailure(f"n={n}: Galerkin and monodromy eigenvalues differ by {err:.3g}")
    bvg = []
    for n in ns:
        r = solve(n, v, count_roots=False)
        t = loc.triples[n]
        a, b = galerkin.order_pair(n + r.z1, n + r.z2)
        e = max(abs(a - t.lambda_minus), abs(b - t.lambda_plus))
        eg = abs(r.gamma - t.gamma)
        bvg.append((n, e, t.gamma, r.gamma, eg))
        if e > EIG_AGREE or eg > GAP_AGREE:
            raise CrossCheckFailure(f"n={n}: basic-equation roots disagree with Galerkin ({e:.3g}, {eg:.3g})")
    rep = classify(v, bc, ns, K)
    return BasisBundle(rep.verdict, rep, cross, bvg, v)


def basis_outputs(name: str, bundle: BasisBundle) -> dict[str, str]:
    def cx(z):
        return [z.real, z.imag]
    cross_csv = csv_text(
        "cross-method",
        ["n", "gal_minus_re", "gal_minus_im", "gal_plus_re", "gal_plus_im",
         "mono_minus_re", "mono_minus_im", "mono_plus_re", "mono_plus_im", "max_error"],
        [(n, *cx(a), *cx(b), *cx(c), *cx(d), e) for n, a, b, c, d, e in bundle.cross_method])
    be_csv = csv_text("basic-vs-galerkin", ["n", "eig_error", "gamma_galerkin", "gamma_basic", "gap_error"],
                      bundle.basic_vs_galerkin)
    summary = bundle.report.to_dict()
    summary["potential"] = format_potential(bundle.potential)
    return {f"{name}.json": json_text(summary), f"{name}-cross.csv": cross_csv,
            f"{name}-basic.csv": be_csv}


# ----------------------------------------------------------------------------
# runner

def run(cfg: ExperimentConfig) -> dict[str, Path]:
    """Run a config and write its outputs; returns the written paths."""
    v = cfg.build_potential()
    if cfg.kind == "gap-decay":
        files = gap_decay_outputs(cfg, gap_decay_study(cfg, v))
    else:
        bundle = basis_demo(v, cfg.bc, cfg.indices(cfg.bc), cfg.K)
        files = basis_outputs(cfg.name, bundle)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for fname in sorted(files):
        p = out / fname
        p.write_text(files[fname])
        written[fname] = p
    return written


__all__ = ["ExperimentConfig", "GapDecayResult", "BasisBundle", "gap_decay_study", "basis_demo",
           "run", "parse_n_range"]
