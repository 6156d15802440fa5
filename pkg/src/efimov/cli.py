"""Command-line front end.

Subcommands
-----------
twobody        (lam, beta) <-> (1/a, r0, R0) mapping, dimer pole, k cot(delta) table
spectrum       trimer levels for one model: CSV/JSON with level, alpha, energy, residual
universality   ratios | cutoff | beta studies with pass/fail against universal targets

Model parameters are given as exactly one of the pairs
(--lambda, --beta), (--inv-a, --r0) or (--inv-a, --R0); couplings accept
"8pi"-style literals.  A flat key=value config file (--config) supplies
defaults that explicit flags override.  Exit codes: 0 ok, 2 infeasible
parameters, 3 threshold violation, 4 failed universality assertion.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import (
    EfimovError,
    InfeasibleRangeError,
    NoDimerError,
    ParameterError,
    ThresholdViolationError,
)
from .kernels import KernelSpec
from .solver import build_mesh, default_cutoff, default_scale, find_levels
from .twobody import (
    EREParams,
    PotentialParams,
    dimer_binding,
    k_cot_delta,
    map_ere_to_potential,
    map_potential_to_ere,
    potential_from_inv_a_r0,
)
from . import universality as uni

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_THRESHOLD = 3
EXIT_ASSERTION = 4


def _pi_literal(text: str) -> float:
    """Parse '8pi', '2.5pi', 'pi' or a plain float."""
    s = text.strip().lower()
    if s.endswith("pi"):
        head = s[:-2].strip()
        return (float(head) if head else 1.0) * math.pi
    return float(s)


def _fmt(value) -> str:
    """Full round-trip decimal formatting (17 significant digits)."""
    return f"{float(value):.17g}"


def _write_csv(path: str, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path: str) -> list:
    """key=value lines -> argv tokens; '#' starts a comment."""
    tokens = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"config line is not key=value: {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            tokens.extend([f"--{key}", value])
    return tokens


def _merge_config(argv: list) -> list:
    """Insert config-file tokens after the subcommand words (flags override)."""
    argv = list(argv)
    config_path = None
    i = 0
    while i < len(argv):
        if argv[i] == "--config":
            if i + 1 >= len(argv):
                raise ParameterError("--config needs a file path")
            config_path = argv[i + 1]
            del argv[i:i + 2]
        elif argv[i].startswith("--config="):
            config_path = argv[i].split("=", 1)[1]
            del argv[i]
        else:
            i += 1
    if config_path is None:
        return argv
    tokens = _load_config(config_path)
    head = 0
    while head < len(argv) and not argv[head].startswith("-"):
        head += 1
    return argv[:head] + tokens + argv[head:]


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("model (give exactly one pair)")
    grp.add_argument("--lambda", dest="lam", type=_pi_literal, default=None,
                     help="Yamaguchi coupling; accepts e.g. 8pi")
    grp.add_argument("--beta", type=float, default=None,
                     help="Yamaguchi range parameter")
    grp.add_argument("--inv-a", dest="inv_a", type=float, default=None,
                     help="inverse scattering length 1/a (0 = unitarity)")
    grp.add_argument("--r0", type=float, default=None,
                     help="effective range (selects the finite-range model)")
    grp.add_argument("--R0", dest="R0", type=float, default=None,
                     help="range correction (selects the short-range model)")


def _add_mesh_args(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("mesh")
    grp.add_argument("--mesh-n", dest="mesh_n", type=int, default=300)
    grp.add_argument("--mesh-scale", dest="mesh_scale", type=float, default=None)
    grp.add_argument("--cutoff", type=float, default=None,
                     help="momentum cutoff Lambda (required for R0 = 0)")


def _add_search_args(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("search")
    grp.add_argument("--alpha-min", dest="alpha_min", type=float, default=None)
    grp.add_argument("--alpha-max", dest="alpha_max", type=float, default=None)
    grp.add_argument("--max-levels", dest="max_levels", type=int, default=4)
    grp.add_argument("--points-per-decade", dest="ppd", type=int, default=40)


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("output")
    grp.add_argument("--output", "-o", default=None, help="output file path")
    grp.add_argument("--format", choices=("csv", "json"), default="csv")


def _resolve_model(args) -> KernelSpec:
    """Build the kernel spec from exactly one parameter pair."""
    have_pot = args.lam is not None and args.beta is not None
    have_r0 = args.inv_a is not None and args.r0 is not None
    have_R0 = args.inv_a is not None and args.R0 is not None
    chosen = sum([have_pot, have_r0, have_R0])
    if chosen != 1:
        raise ParameterError(
            "give exactly one parameter pair: (--lambda, --beta) or "
            "(--inv-a, --r0) or (--inv-a, --R0)"
        )
    cutoff = getattr(args, "cutoff", None)
    if have_pot:
        return KernelSpec.finite_range(PotentialParams(lam=args.lam, beta=args.beta),
                                       cutoff=cutoff)
    if have_r0:
        pot = potential_from_inv_a_r0(args.inv_a, args.r0)
        return KernelSpec.finite_range(pot, cutoff=cutoff)
    return KernelSpec.short_range(EREParams(inv_a=args.inv_a, R0=args.R0),
                                  cutoff=cutoff)


def cmd_twobody(args) -> int:
    if args.lam is not None and args.beta is not None:
        pot = PotentialParams(lam=args.lam, beta=args.beta)
    elif args.inv_a is not None and args.beta is not None:
        pot = map_ere_to_potential(EREParams(inv_a=args.inv_a), args.beta)
    else:
        raise ParameterError("twobody needs (--lambda, --beta) or (--inv-a, --beta)")
    ere = map_potential_to_ere(pot)

    print(f"lambda      = {_fmt(pot.lam)}")
    print(f"beta        = {_fmt(pot.beta)}")
    print(f"1/a         = {_fmt(ere.inv_a)}")
    print(f"a           = {_fmt(1.0 / ere.inv_a) if ere.inv_a != 0 else 'inf'}")
    print(f"r0          = {_fmt(ere.r0)}")
    print(f"R0 (eq-consistent) = {_fmt(ere.R0)}")
    print(f"R0 (strict limit -r0/2) = {_fmt(-0.5 * ere.r0)}")
    try:
        dimer = dimer_binding(pot)
        print(f"dimer kappa_d = {_fmt(dimer.kappa_d)}")
        print(f"dimer energy  = {_fmt(dimer.energy)}")
    except NoDimerError:
        print("dimer: none (1/a <= 0)")

    kmax = args.kmax if args.kmax is not None else 2.0 * pot.beta
    kgrid = np.linspace(0.0, kmax, args.knum)
    table = [(k, k_cot_delta(k, pot)) for k in kgrid]
    print("k,k_cot_delta")
    for k, v in table:
        print(f"{_fmt(k)},{_fmt(v)}")

    if args.output:
        if args.format == "csv":
            _write_csv(args.output, ["k", "k_cot_delta"], table)
        else:
            _write_json(args.output, {
                "params": {"lambda": pot.lam, "beta": pot.beta,
                           "inv_a": ere.inv_a, "r0": ere.r0, "R0": ere.R0},
                "mesh": None,
                "levels": [],
                "report": {"k_cot_delta": [[k, v] for k, v in table]},
            })
    return EXIT_OK


def _spectrum_defaults(spec: KernelSpec, args):
    """Fill search window, cutoff and mesh scale for the spectrum command."""
    if spec.kind == "short":
        scale_hint = 1.0 / abs(spec.ere.R0) if spec.ere.R0 else \
            (args.cutoff or 1.0)
    else:
        scale_hint = spec.params.beta
    alpha_max = args.alpha_max if args.alpha_max is not None else 0.5 * scale_hint
    thr = spec.threshold()
    alpha_min = args.alpha_min
    if alpha_min is None:
        alpha_min = alpha_max * 1e-5
        if thr > 0.0:
            alpha_min = max(alpha_min, thr * (1.0 + 1e-6))
    cutoff = args.cutoff if args.cutoff is not None else \
        default_cutoff(spec, alpha_max)
    scale = args.mesh_scale if args.mesh_scale is not None else \
        default_scale(alpha_min, alpha_max)
    return alpha_min, alpha_max, cutoff, scale


def cmd_spectrum(args) -> int:
    spec = _resolve_model(args)
    alpha_min, alpha_max, cutoff, scale = _spectrum_defaults(spec, args)
    if spec.cutoff is None:
        spec = KernelSpec(kind=spec.kind, params=spec.params, ere=spec.ere,
                          cutoff=cutoff)
    mesh = build_mesh(args.mesh_n, scale=scale, cutoff=spec.cutoff)
    spectrum = find_levels(spec, mesh, (alpha_min, alpha_max),
                           max_levels=args.max_levels,
                           points_per_decade=args.ppd)

    rows = [(n, spectrum.alphas[n], spectrum.energies[n], spectrum.residuals[n])
            for n in range(spectrum.n_levels)]
    header = ["level", "alpha", "energy", "eta_residual"]
    print(",".join(header))
    for row in rows:
        print(",".join([str(row[0])] + [_fmt(v) for v in row[1:]]))
    if spectrum.n_levels == 0:
        print("levels=0")

    if args.output:
        if args.format == "csv":
            _write_csv(args.output, header, rows)
        else:
            _write_json(args.output, {
                "params": _spec_params(spec),
                "mesh": {"n": args.mesh_n, "scale": scale, "cutoff": spec.cutoff},
                "levels": [
                    {"level": int(n), "alpha": float(a), "energy": float(e),
                     "eta_residual": float(r)} for n, a, e, r in rows
                ],
                "report": {"levels_found": spectrum.n_levels,
                           "alpha_range": [alpha_min, alpha_max]},
            })
    return EXIT_OK


def _spec_params(spec: KernelSpec) -> dict:
    if spec.kind == "finite":
        ere = map_potential_to_ere(spec.params)
        return {"model": "finite_range", "lambda": spec.params.lam,
                "beta": spec.params.beta, "inv_a": ere.inv_a, "r0": ere.r0}
    return {"model": "short_range", "inv_a": spec.ere.inv_a, "R0": spec.ere.R0}


def _float_list(text: str) -> list:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_universality(args) -> int:
    prefix = args.output or "universality"
    if args.study == "ratios":
        study = uni.ratio_study(inv_a=args.inv_a or 0.0,
                                R0=args.R0 if args.R0 is not None else 1.0,
                                n=args.mesh_n)
        report = uni.UniversalityReport.build(ratio=study)
        _write_csv(f"{prefix}_ratios.csv",
                   ["pair", "energy_ratio", "deviation"],
                   [(n, study.ratios[n], study.deviations[n])
                    for n in range(study.ratios.size)])
        print(f"s0 = {_fmt(report.s0)}")
        print(f"target E_n/E_n+1 = {_fmt(report.energy_ratio)}")
        for n in range(study.ratios.size):
            print(f"ratio[{n}] = {_fmt(study.ratios[n])} "
                  f"(deviation {study.deviations[n]:.2%})")
        print(f"ratios within {uni.RATIO_TOL:.0%}: "
              f"{'PASS' if study.passed else 'FAIL'}")
    elif args.study == "cutoff":
        if not args.lambdas:
            raise ParameterError("cutoff study needs --lambdas L1,L2,...")
        study = uni.cutoff_study(_float_list(args.lambdas), n=args.mesh_n)
        report = uni.UniversalityReport.build(cutoff=study)
        rows = []
        for i, lam_cut in enumerate(study.cutoffs):
            for n, alpha in enumerate(study.spectra[i]):
                rows.append((lam_cut, n, alpha, -alpha * alpha))
        _write_csv(f"{prefix}_cutoff.csv",
                   ["cutoff", "level", "alpha", "energy"], rows)
        print(f"log-periodicity (x{report.alpha_ratio:.3f} rescaling, 1%): "
              f"{'PASS' if study.logperiod_passed else 'FAIL'}")
        print("cutoff doubling moves alpha0 by >25% (Danilov non-uniqueness, "
              f"expected): {'PASS' if study.doubling_passed else 'FAIL'}")
        print(f"level ratios at {report.alpha_ratio:.3f} +- 2%: "
              f"{'PASS' if study.ratios_passed else 'FAIL'}")
    else:  # beta
        if not args.list:
            raise ParameterError("beta study needs --list m1,m2,... "
                                 "(multiples of the reference alpha0)")
        study = uni.beta_convergence(EREParams(inv_a=args.inv_a or 0.0),
                                     _float_list(args.list),
                                     level=args.level, n=args.mesh_n,
                                     cutoff=args.cutoff or 1.0)
        report = uni.UniversalityReport.build(beta=study)
        _write_csv(f"{prefix}_beta.csv",
                   ["beta", "lambda", "r0", "R0_eq31", "R0_strict",
                    "alpha_fr", "alpha_sr", "deviation"],
                   [(r["beta"], r["lam"], r["r0"], r["R0_eq31"], r["R0_strict"],
                     r["alpha_fr"], r["alpha_sr"], r["deviation"])
                    for r in study.rows])
        for r in study.rows:
            print(f"beta = {_fmt(r['beta'])}: deviation = {r['deviation']:.4e}")
        for skip in study.skipped:
            print(f"beta = {_fmt(skip['beta'])}: skipped ({skip['reason']})")
        print(f"monotone convergence: {'PASS' if study.monotone else 'FAIL'}")

    _write_json(f"{prefix}.json", {
        "params": {"study": args.study},
        "mesh": {"n": args.mesh_n},
        "levels": [],
        "report": report.to_dict(),
    })
    return EXIT_OK if report.passed else EXIT_ASSERTION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efimov",
        description="Efimov trimers from Yamaguchi separable potentials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_two = sub.add_parser("twobody", help="two-body maps, dimer, k cot(delta)")
    _add_model_args(p_two)
    p_two.add_argument("--kmax", type=float, default=None)
    p_two.add_argument("--knum", type=int, default=21)
    _add_output_args(p_two)
    p_two.set_defaults(func=cmd_twobody)

    p_spec = sub.add_parser("spectrum", help="trimer bound-state spectrum")
    _add_model_args(p_spec)
    _add_mesh_args(p_spec)
    _add_search_args(p_spec)
    _add_output_args(p_spec)
    p_spec.set_defaults(func=cmd_spectrum)

    p_uni = sub.add_parser("universality", help="universality studies")
    uni_sub = p_uni.add_subparsers(dest="study", required=True)
    for name, extra in (("ratios", ()), ("cutoff", ("lambdas",)),
                        ("beta", ("list", "level", "cutoff"))):
        p = uni_sub.add_parser(name)
        p.add_argument("--inv-a", dest="inv_a", type=float, default=0.0)
        p.add_argument("--R0", dest="R0", type=float, default=None)
        p.add_argument("--mesh-n", dest="mesh_n", type=int, default=300)
        if "lambdas" in extra:
            p.add_argument("--lambdas", default=None,
                           help="comma-separated cutoff list")
        if "list" in extra:
            p.add_argument("--list", default=None,
                           help="comma-separated beta multiples of alpha0")
        if "level" in extra:
            p.add_argument("--level", type=int, default=0)
        if "cutoff" in extra:
            p.add_argument("--cutoff", type=float, default=1.0)
        p.add_argument("--output", "-o", default=None)
        p.set_defaults(func=cmd_universality)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        argv = _merge_config(argv)
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (InfeasibleRangeError, ParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ThresholdViolationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_THRESHOLD
    except EfimovError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    raise SystemExit(main())
