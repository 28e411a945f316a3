"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from . import asymptotics, basic_equation, coefficients, galerkin, monodromy, riesz
from .errors import NumericalFailure, PotentialParseError
from .experiments import ExperimentConfig, parse_n_range, run
from .io import csv_text, json_text, pmap
from .potentials import FourierPotential, load_potential

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _cx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _ns(text: str, bc: str | None = None) -> list[int]:
    lo, hi = parse_n_range(text)
    par = galerkin.parity_of(bc) if bc in ("per+", "per-") else None
    return [n for n in range(lo, hi + 1) if n != 0 and (par is None or n % 2 == par)]


def _emit(args, name: str, header, rows, summary: dict | None = None):
    if getattr(args, "json", False):
        out = dict(summary or {})
        out["artifact"] = name
        out["columns"] = header
        out["rows"] = [list(r) for r in rows]
        sys.stdout.write(json_text(out))
    else:
        sys.stdout.write(csv_text(name, header, rows))


# ----------------------------------------------------------------------------
# subcommands

def cmd_spectrum(args, v: FourierPotential) -> int:
    if args.bc == "dir":
        if args.method != "monodromy":
            raise UsageError("--bc dir requires --method monodromy")
        ns = [n for n in range(-args.nmax, args.nmax + 1) if abs(n) > args.N]
        mus = pmap(lambda n: monodromy.find_eigenvalue_near(v, n, "dir"), ns)
        _emit(args, "spectrum-dir", ["n", "mu_re", "mu_im"], [(n, *_cx(m)) for n, m in zip(ns, mus)])
        return EXIT_OK
    header = ["n", "lambda_minus_re", "lambda_minus_im", "lambda_plus_re", "lambda_plus_im", "gamma"]
    if args.method == "galerkin":
        K = args.K or galerkin.default_K(v, args.nmax)
        loc = galerkin.spectrum(v, args.bc, K, nmax=args.nmax, N=args.N)
        rows = [(n, *_cx(t.lambda_minus), *_cx(t.lambda_plus), t.gamma) for n, t in sorted(loc.triples.items())]
        extra = {"rectangle": [_cx(z) for z in loc.rectangle], "K": K}
    else:
        par = galerkin.parity_of(args.bc)
        ns = [n for n in range(-args.nmax, args.nmax + 1) if abs(n) > args.N and n % 2 == par]
        res = pmap(lambda n: monodromy.find_eigenvalue_near(v, n, args.bc), ns)
        rows = [(n, *_cx(r.lambda_minus), *_cx(r.lambda_plus), abs(r.lambda_plus - r.lambda_minus))
                for n, r in zip(ns, res)]
        extra = {}
    _emit(args, "spectrum", header, rows, {"bc": args.bc, "method": args.method, **extra})
    return EXIT_OK


def cmd_coeffs(args, v: FourierPotential) -> int:
    z = complex(args.z.replace("i", "j"))
    rows = []
    for n in _ns(args.n_range):
        c = coefficients.eval_S(n, z, v, nu_max=args.nu_max)
        rows.append((n, *_cx(c.alpha), *_cx(c.beta_plus), *_cx(c.beta_minus),
                     c.beta_plus_log.log10_abs, c.beta_minus_log.log10_abs, c.nu_max, c.tail_ratio))
    _emit(args, "coeffs", ["n", "alpha_re", "alpha_im", "beta_plus_re", "beta_plus_im",
                           "beta_minus_re", "beta_minus_im", "log10_abs_beta_plus",
                           "log10_abs_beta_minus", "nu_used", "tail_ratio"], rows, {"z": _cx(z)})
    return EXIT_OK


def cmd_basic_eq(args, v: FourierPotential) -> int:
    ns = _ns(args.n_range)
    nmax = max(abs(n) for n in ns)
    K = args.K or galerkin.default_K(v, nmax)
    locs = {bc: galerkin.spectrum(v, bc, K, nmax=nmax) for bc in galerkin.BCS}
    roots = pmap(lambda n: basic_equation.solve(n, v, tol=args.tol), ns)
    rows = []
    for n, r in zip(ns, roots):
        t = locs[galerkin.bc_for_n(n)].triples[n]
        rows.append((n, *_cx(r.z1), *_cx(r.z2), r.residuals[0], r.residuals[1], r.gamma, t.gamma,
                     abs(r.gamma - t.gamma), r.method, r.root_count))
    _emit(args, "basic-eq", ["n", "z1_re", "z1_im", "z2_re", "z2_im", "residual1", "residual2",
                             "gap", "gamma_galerkin", "gap_difference", "method", "root_count"], rows)
    return EXIT_OK


def cmd_riesz(args, v: FourierPotential) -> int:
    rep = riesz.classify(v, args.bc, _ns(args.n_range, args.bc), args.K)
    sys.stdout.write(json_text(rep.to_dict()))
    return EXIT_OK


def _c15_params(v: FourierPotential):
    extra = (set(v.p) | set(v.q)) - {2, -2}
    if extra:
        raise UsageError("asymptotics needs a potential with modes +-2 only")
    return v.pc(2), v.pc(-2), v.qc(2), v.qc(-2)


def cmd_asymptotics(args, v: FourierPotential) -> int:
    a, b, A, B = _c15_params(v)
    ns = [n for n in _ns(args.n_range) if n % 2 == 1 and n > 0]
    tab = asymptotics.compare_asymptotics(a, b, A, B, ns)
    rows = [(r.n, r.log10_beta_plus, r.log10_closed_plus, *_cx(r.ratio_plus),
             r.log10_beta_minus, r.log10_closed_minus, *_cx(r.ratio_minus), e)
            for r, e in zip(tab.rows, tab.envelope)]
    _emit(args, "asymptotics", ["n", "log10_beta_plus", "log10_closed_plus", "ratio_plus_re", "ratio_plus_im",
                                "log10_beta_minus", "log10_closed_minus", "ratio_minus_re", "ratio_minus_im",
                                "envelope"], rows,
          {"fit_exponent": tab.fit_exponent, "envelope_decreasing": tab.envelope_decreasing})
    return EXIT_OK


def cmd_maps(args, v: FourierPotential) -> int:
    need = [n for n in range(-args.nmax, args.nmax + 1) if abs(n) > args.N]
    zs = dict(zip(need, pmap(lambda n: asymptotics.zstars_from_basic_equation(v, [n])[n], need)))
    res = asymptotics.phi_map(v, args.N, args.nmax, zs)
    rows = [("P", k, *_cx(c)) for k, c in res.phi.p.items()] + [("Q", k, *_cx(c)) for k, c in res.phi.q.items()]
    sym = res.symmetry()
    _emit(args, "maps", ["component", "k", "re", "im"], rows,
          {"N": args.N, "nmax": args.nmax, "max_correction": res.max_correction,
           "symmetry": sym.label, "t": sym.t, "residual": sym.residual})
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        cfg = ExperimentConfig.from_ini(args.config)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    written = run(cfg)
    for name in sorted(written):
        print(written[name])
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dirac-gaps", description="Spectra, gap asymptotics and Riesz-basis diagnostics "
                "for 1D periodic Dirac operators with trigonometric-polynomial potentials.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    pot_help = "potential: 'preset:NAME ARGS...' (zero, example-c15 a b A B) or a coefficient file"

    def add_out(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--csv", action="store_true", help="CSV output (default)")
        g.add_argument("--json", action="store_true", help="JSON output")

    s = sub.add_parser("spectrum", help="eigenvalues near each integer n")
    s.add_argument("--bc", choices=["per+", "per-", "dir"], required=True)
    s.add_argument("--K", type=int, default=None, help="Fourier truncation (Galerkin)")
    s.add_argument("--nmax", type=int, default=20)
    s.add_argument("--N", type=int, default=0, help="indices |n| <= N are left unpaired")
    s.add_argument("--method", choices=["galerkin", "monodromy"], default="galerkin")
    s.add_argument("potential", nargs="+", help=pot_help)
    add_out(s)

    s = sub.add_parser("coeffs", help="alpha_n(z), beta_n^pm(z) from the series")
    s.add_argument("--n-range", required=True, help="lo:hi inclusive")
    s.add_argument("--z", default="0", help="complex point, e.g. 0.1+0.05j")
    s.add_argument("--nu-max", type=int, default=None, help="fixed truncation order (default adaptive)")
    s.add_argument("potential", nargs="+", help=pot_help)
    add_out(s)

    s = sub.add_parser("basic-eq", help="roots of the basic equation against Galerkin gaps")
    s.add_argument("--n-range", required=True, help="lo:hi inclusive")
    s.add_argument("--tol", type=float, default=1e-12, help="accepted relative residual")
    s.add_argument("--K", type=int, default=None)
    s.add_argument("potential", nargs="+", help=pot_help)
    add_out(s)

    s = sub.add_parser("riesz", help="overlap diagnostics and basis verdict (JSON)")
    s.add_argument("--bc", choices=["per+", "per-"], required=True)
    s.add_argument("--n-range", required=True, help="lo:hi inclusive")
    s.add_argument("--K", type=int, default=None)
    s.add_argument("potential", nargs="+", help=pot_help)

    s = sub.add_parser("asymptotics", help="computed beta_n^pm(0) against the closed forms")
    s.add_argument("--n-range", required=True, help="lo:hi inclusive (odd n used)")
    s.add_argument("potential", nargs="+", help=pot_help)
    add_out(s)

    s = sub.add_parser("maps", help="correction map Phi_N and the X_t check on A_N(v)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("potential", nargs="+", help=pot_help)
    add_out(s)

    s = sub.add_parser("experiment", help="run an experiment config")
    esub = s.add_subparsers(dest="action", parser_class=_Parser)
    r = esub.add_parser("run", help="run an INI config and write its outputs")
    r.add_argument("config")
    return p


HANDLERS = {
    "spectrum": cmd_spectrum, "coeffs": cmd_coeffs, "basic-eq": cmd_basic_eq, "riesz": cmd_riesz,
    "asymptotics": cmd_asymptotics, "maps": cmd_maps,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:       # --help
            return int(exc.code or 0)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if args.command == "experiment":
            if args.action != "run":
                raise UsageError("usage: dirac-gaps experiment run CONFIG")
            return cmd_experiment(args)
        if getattr(args, "nmax", 1) is not None and getattr(args, "nmax", 1) < 1:
            raise UsageError("--nmax must be >= 1")
        v = load_potential(args.potential)
        return HANDLERS[args.command](args, v)
    except (UsageError, PotentialParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
