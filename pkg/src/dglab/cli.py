"""Command-line entry point: ``dglab constants|solve|iterate|verify|counterexample|corpus``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or parse
error, 3 numerical divergence.  Artifacts are written to ``--out`` (default
``$DGLAB_OUTPUT_DIR`` or ``./dglab-out``) as sorted-key JSON and CSV with no
timestamps, so identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from .constants import DgParams, PdeParams, dg_constants_from_pde, full_chain
from .errors import DglabError, DivergenceError
from .io import dumps_json, read_field, write_field

log = logging.getLogger("dglab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGENCE = 0, 1, 2, 3
OUTPUT_ENV = "DGLAB_OUTPUT_DIR"
CHECKS = ("dg", "first-lemma", "ivl-h1", "close-times", "ivl", "lowering-max", "holder")


def _uint64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=_uint64, default=0, help="root seed (64-bit unsigned)")
    g.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUTPUT_ENV} or ./dglab-out)")
    g.add_argument("--tol-factor", type=float, default=10.0, help="discretization tolerance factor c in c*(dx+dt)")
    g.add_argument("--sobolev-constant", type=float, default=None, help="override the Sobolev embedding constant")
    g.add_argument("--threads", type=_positive_int, default=1, help="worker threads for corpus runs")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _dg_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("energy class (either the gammas or the PDE data)")
    for name in ("gamma1", "gamma2", "gamma3", "p"):
        g.add_argument(f"--{name}", type=float, default=None)
    g.add_argument("--lambda", dest="lam", type=float, default=None)
    g.add_argument("--Lambda", dest="Lam", type=float, default=None)
    g.add_argument("--q", type=float, default=None)
    g.add_argument("--g-norm", type=float, default=None)
    g.add_argument("--q2", type=float, default=None, help="Sobolev exponent when d=2")


def _resolve_dg(args: argparse.Namespace, d: int) -> tuple[DgParams, dict[str, Any]]:
    gammas = [args.gamma1, args.gamma2, args.gamma3, args.p]
    pde = [args.lam, args.Lam, args.q, args.g_norm]
    if any(v is not None for v in gammas):
        if any(v is None for v in gammas):
            raise argparse.ArgumentTypeError("give all of --gamma1 --gamma2 --gamma3 --p")
        if any(v is not None for v in pde):
            raise argparse.ArgumentTypeError("give either the gammas or the PDE data, not both")
        dg = DgParams(*gammas)
        return dg, {"source": "gammas", "dg": dg.__dict__}
    lam = 1.0 if args.lam is None else args.lam
    Lam = 2.0 if args.Lam is None else args.Lam
    q = 4.0 if args.q is None else args.q
    g = 0.0 if args.g_norm is None else args.g_norm
    params = PdeParams(lam, Lam, q, g, d)
    dg = dg_constants_from_pde(params)
    return dg, {"source": "pde", "pde": params.__dict__, "dg": dg.__dict__}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="dglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="compute the constant chain")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--c-ivl", type=float, default=None, help="override the intermediate value constant")
    _dg_options(p)

    p = sub.add_parser("solve", parents=[common], help="run the finite-difference solver")
    p.add_argument("--config", type=Path, required=True, help="SolveConfig JSON")
    p.add_argument("--name", default="field", help="basename of the written field file")
    p.add_argument("--normalize", action="store_true", help="map the range on Q_3/2 onto [-1, 1]")

    p = sub.add_parser("iterate", parents=[common], help="simulate V_k = C^k V_{k-1}^alpha")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--V0", type=float, required=True)
    p.add_argument("--kmax", type=int, default=20)

    p = sub.add_parser("verify", parents=[common], help="run one check on a field file")
    p.add_argument("--check", choices=CHECKS, required=True)
    p.add_argument("--field", type=Path, required=True)
    p.add_argument("--orientation", choices=("canonical", "as-printed"), default="canonical")
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--l", type=float, default=None)
    p.add_argument("--R", type=float, default=1.0, help="ball radius (ivl-h1)")
    p.add_argument("--t", type=float, default=-0.5, help="slice time (ivl-h1)")
    p.add_argument("--times", type=float, nargs=3, default=(-1.5, -1.0, -0.5), metavar=("T1", "TAU", "T2"))
    p.add_argument("--samples", type=int, default=200, help="sample count (dg)")
    p.add_argument("--sign", choices=("+", "-"), default="+")
    p.add_argument("--trace", action="store_true", help="include the pigeonhole trace (ivl)")
    p.add_argument("--lowering-rescale", action="store_true",
                   help="rescale the field to meet the lowering-max hypothesis first")
    _dg_options(p)

    sub.add_parser("counterexample", parents=[common], help="run the jump counterexample suite")

    p = sub.add_parser("corpus", parents=[common], help="seeded solver corpus with the full battery")
    p.add_argument("--n", type=_positive_int, default=10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--h", type=float, default=1 / 64)
    return parser


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out or Path(os.environ.get(OUTPUT_ENV, "dglab-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolved(args: argparse.Namespace) -> dict[str, Any]:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("out", "verbose"):
            continue
        cfg[k] = str(v) if isinstance(v, Path) else (list(v) if isinstance(v, tuple) else v)
    return cfg


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


def cmd_constants(args: argparse.Namespace) -> int:
    dg, how = _resolve_dg(args, args.d)
    chain = full_chain(args.d, dg, sobolev_constant=args.sobolev_constant, q2=args.q2, c_ivl=args.c_ivl)
    doc = {"config": _resolved(args), "energy_class": how, "chain": chain.to_dict()}
    _write(_out_dir(args) / "constants.json", dumps_json(doc))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    from .solver import config_from_json, normalize_on_q32, solve

    try:
        raw = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise argparse.ArgumentTypeError(f"cannot read solve config {args.config}: {exc}") from None
    cfg = config_from_json(raw, base_dir=args.config.parent)
    u = solve(cfg)
    if args.normalize:
        u = normalize_on_q32(u)
    out = _out_dir(args)
    write_field(out / f"{args.name}.dglab", u)
    doc = {"config": _resolved(args), "solve_config": raw, "substeps": cfg.resolved_substeps(),
           "min": float(u.values.min()), "max": float(u.values.max())}
    _write(out / f"{args.name}.json", dumps_json(doc))
    return EXIT_OK


def cmd_iterate(args: argparse.Namespace) -> int:
    from .iterate import RecurrenceSpec, recurrence_threshold, simulate_recurrence

    res = simulate_recurrence(RecurrenceSpec(args.C, args.alpha, args.V0, args.kmax))
    out = _out_dir(args)
    _write(out / "iterate.csv", res.to_csv())
    doc = {"config": _resolved(args), "threshold": recurrence_threshold(max(args.C, 1.0), args.alpha),
           "verdict": res.verdict, "envelope_holds": res.envelope_holds, "sk_bound_holds": res.sk_bound_holds,
           "notes": res.notes}
    _write(out / "iterate.json", dumps_json(doc))
    return EXIT_OK if res.envelope_holds and res.sk_bound_holds else EXIT_FAIL


def cmd_verify(args: argparse.Namespace) -> int:
    from . import verify as V
    from .fields import time_slice

    u = read_field(args.field)
    d = u.spec.d
    dg, how = _resolve_dg(args, d)
    chain = full_chain(d, dg, sobolev_constant=args.sobolev_constant, q2=args.q2)
    tf = args.tol_factor
    name = args.check
    extra: dict[str, Any] = {}
    if name == "dg":
        rep = V.check_dg_membership(u, dg, n_samples=args.samples, seed=args.seed, sign=args.sign, tol_factor=tf)
    elif name == "first-lemma":
        rep = V.check_first_lemma_iteration(u, chain, tol_factor=tf)
    elif name == "ivl-h1":
        k = -0.5 if args.k is None else args.k
        l = 0.5 if args.l is None else args.l
        rep = V.check_ivl_h1(time_slice(u, args.t), k, l, args.R, tol_factor=tf)
    elif name == "close-times":
        k = 0.0 if args.k is None else args.k
        l = 0.5 if args.l is None else args.l
        rep = V.check_close_times(u, dg, k, l, tuple(args.times), tol_factor=tf)
    elif name == "ivl":
        k = 0.0 if args.k is None else args.k
        l = 0.5 if args.l is None else args.l
        rep = V.check_ivl_parabolic(u, dg, k, l, V.IvlOrientation.named(args.orientation, d), chain,
                                    trace=args.trace, tol_factor=tf)
    elif name == "lowering-max":
        v = V.lowering_inputs(u) if args.lowering_rescale else u
        k_found, bound, rep = V.run_lowering_max(v, dg, chain, tol_factor=tf)
        extra = {"k_found": k_found, "bound": bound}
    else:
        center = V.holder_center(u)
        theta_hat, alpha_hat, rep = V.estimate_holder(u, center, 4, chain, noise_factor=tf)
        extra = {"theta_hat": theta_hat, "alpha_hat": alpha_hat}
    out = _out_dir(args)
    doc = {"config": _resolved(args), "energy_class": how, "report": rep.to_dict(), **extra}
    _write(out / f"verify-{name}.json", dumps_json(doc))
    _write(out / f"verify-{name}.csv", rep.to_csv())
    print(f"{rep.name}: {rep.verdict} (min margin {rep.min_margin:.6g}, tolerance {rep.tolerance:.6g})")
    return EXIT_OK if rep.verdict in ("pass", "skipped") else EXIT_FAIL


def cmd_counterexample(args: argparse.Namespace) -> int:
    from .corpus import counterexample_suite

    res = counterexample_suite()
    _write(_out_dir(args) / "counterexample.json", dumps_json({"config": _resolved(args), **res}))
    for item in res["items"]:
        mark = "ok " if item["ok"] else "BAD"
        print(f"[{mark}] {item['name']}: {item['verdict']} (expected {item['expected']}), "
              f"lhs={item['lhs']!r} rhs={item['rhs']!r}")
    return EXIT_OK if res["ok"] else EXIT_FAIL


def cmd_corpus(args: argparse.Namespace) -> int:
    from .corpus import CorpusSettings, corpus_csv, run_corpus

    settings = CorpusSettings(n=args.n, seed=args.seed, n_samples=args.samples, h=args.h,
                              tol_factor=args.tol_factor, sobolev_constant=args.sobolev_constant,
                              threads=args.threads)
    rep = run_corpus(settings)
    out = _out_dir(args)
    _write(out / "corpus.json", dumps_json({"config": _resolved(args), **rep}))
    _write(out / "corpus.csv", corpus_csv(rep))
    for name, counts in sorted(rep["summary"].items()):
        print(f"{name}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return EXIT_OK if rep["all_pass"] else EXIT_FAIL


COMMANDS = {
    "constants": cmd_constants,
    "solve": cmd_solve,
    "iterate": cmd_iterate,
    "verify": cmd_verify,
    "counterexample": cmd_counterexample,
    "corpus": cmd_corpus,
}


def execute(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"dglab: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DglabError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"dglab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(execute())


if __name__ == "__main__":
    main()
