"""Command-line front end.

Commands: certify, amplify, concentrate, onb, zoo. Every output artifact
records the seed; --no-timestamp makes outputs byte-identical across
replays of the same configuration.

Exit codes:
  0  success / the mathematical check passed
  1  certification or concentration check failed
  2  I/O, schema, or configuration error
  3  amplification impossible (an element's trace pins it at 1)
  4  base representation too rough for the requested tolerance
  5  orthonormal-basis search exhausted
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import __version__
from .amplify import amplify_to_tolerance
from .errors import (
    DefectBudgetExceededError,
    GammaOutOfRangeError,
    NearRepError,
    OnbSearchExhausted,
    SchemaError,
)
from .groups import builtin_group, parse_word_file
from .linalg import MAX_DIM, UnitaryMatrix, matrix_to_json
from .reps import (
    ApproxRep,
    CertifyConfig,
    all_element_words,
    certificate_to_json,
    certify,
    rep_from_json,
    rep_to_json,
    zoo,
)
from .sphere import RngSpec, concentration_check, onb_in_set, statistical_slack

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_GAMMA = 3
EXIT_BUDGET = 4
EXIT_EXHAUSTED = 5


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_json(payload: dict, path: str, stamp: bool):
    if stamp:
        payload = dict(payload)
        payload["timestamp"] = _timestamp()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_rep(path: str) -> ApproxRep:
    try:
        with open(path, encoding="utf-8") as fh:
            return rep_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read rep bundle {path}: {exc}") from exc


def _load_words(args, group):
    if args.all_table_elements:
        return all_element_words(group)
    if not args.words:
        raise SchemaError("provide --words FILE or --all-table-elements")
    try:
        with open(args.words, encoding="utf-8") as fh:
            words = parse_word_file(fh.read())
    except OSError as exc:
        raise SchemaError(f"cannot read word file {args.words}: {exc}") from exc
    if not words:
        raise SchemaError(f"word file {args.words} contains no words")
    return words


def _rng(args) -> RngSpec:
    return RngSpec(seed=args.seed, stream=args.stream)


def cmd_certify(args) -> int:
    rep = _load_rep(args.rep)
    words = _load_words(args, rep.group)
    config = CertifyConfig(
        trials=args.trials,
        strict_dim=args.strict_dim,
        max_dim=args.max_dim,
        onb_max_tries=args.max_tries,
    )
    cert = certify(rep, words, args.eps, mode=args.mode, config=config, rng=_rng(args))
    payload = certificate_to_json(cert, version=__version__)
    _write_json(payload, args.out, stamp=not args.no_timestamp)
    print(f"mode={cert.mode} eps={_fmt(cert.eps)} dim={cert.dim} "
          f"|E|={len(cert.words)} dim_bound_met={cert.dim_bound_met}")
    worst_pairs = sorted(
        cert.per_pair_defects.items(), key=lambda kv: -kv[1]
    )[:5]
    for (g, h), v in worst_pairs:
        print(f"  pair ({g}) ({h}): {_fmt(v)}")
    for g, v in sorted(cert.per_element_obstructions.items(), key=lambda kv: -kv[1])[:5]:
        print(f"  element ({g}): {_fmt(v)}")
    print(f"certificate written to {args.out}")
    print("PASS" if cert.passed else "FAIL")
    return EXIT_OK if cert.passed else EXIT_CHECK_FAILED


def cmd_amplify(args) -> int:
    rep = _load_rep(args.rep)
    words = _load_words(args, rep.group)
    lazy, cert = amplify_to_tolerance(rep, words, args.eps, rng=_rng(args))
    payload = certificate_to_json(cert, version=__version__)
    payload["plan"] = {
        "doubled": lazy.doubled,
        "n": lazy.tensor_power,
        "gamma": cert.witnesses["gamma"],
        "delta": cert.witnesses["delta"],
        "effective_dim": str(lazy.effective_dim),
    }
    _write_json(payload, args.out, stamp=not args.no_timestamp)
    w = cert.witnesses
    print(f"doubled={w['doubled']} n={w['n']} gamma={w['gamma']} "
          f"delta={w['delta']} effective_dim={w['effective_dim']}")
    for g, v in sorted(w["per_element_tau_modulus"].items()):
        print(f"  |tau({g})| = {_fmt(v)}")
    print(f"plan and lazy certificate written to {args.out}")
    print("PASS" if cert.passed else "FAIL")
    return EXIT_OK if cert.passed else EXIT_CHECK_FAILED


def cmd_concentrate(args) -> int:
    dims = _parse_int_list(args.dims, "dims")
    eps_values = _parse_float_list(args.eps, "eps")
    rng = _rng(args)
    rows = []
    all_pass = True
    for stream_offset, dim in enumerate(dims):
        a = None
        if args.function in ("quad_form", "abs_quad_form"):
            a = _builtin_unitary(args.matrix, dim, rng).matrix
        for eps in eps_values:
            report = concentration_check(
                args.function,
                dim,
                eps,
                args.trials,
                RngSpec(seed=rng.seed, stream=rng.stream + stream_offset),
                a=a,
            )
            rows.append(report)
            all_pass = all_pass and report.passed
    lines = []
    if not args.no_timestamp:
        lines.append(f"# generated {_timestamp()}")
    lines.append("dim,eps,lipschitz,trials,empirical_tail,bound,function_id,seed")
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.dim),
                    _fmt(r.epsilon),
                    _fmt(r.lipschitz_const),
                    str(r.trials),
                    _fmt(r.empirical_tail),
                    _fmt(r.theoretical_bound),
                    r.function_id,
                    str(r.rng.seed),
                ]
            )
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for r in rows:
        status = "ok" if r.passed else "VIOLATION"
        print(
            f"dim={r.dim} eps={_fmt(r.epsilon)} tail={_fmt(r.empirical_tail)} "
            f"bound={_fmt(r.theoretical_bound)} {status}"
        )
    print(f"report written to {args.out}")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


def _builtin_unitary(name: str, dim: int, rng: RngSpec) -> UnitaryMatrix:
    from .sphere import haar_unitary

    if name == "haar":
        return haar_unitary(dim, rng)
    if name == "cyclic_shift":
        m = np.zeros((dim, dim))
        m[np.arange(dim), (np.arange(dim) - 1) % dim] = 1.0
        return UnitaryMatrix(m)
    if name == "identity":
        return UnitaryMatrix(np.eye(dim))
    raise SchemaError(f"unknown builtin unitary {name!r}")


def cmd_onb(args) -> int:
    rng = _rng(args)
    if args.rep:
        rep = _load_rep(args.rep)
        word_list = parse_word_file(args.word) if args.word else None
        from .groups import Word
        from .reps import evaluate_matrix

        word = word_list[0] if word_list else Word((1,))
        u = UnitaryMatrix(evaluate_matrix(rep, word))
        dim = rep.dim
    else:
        if args.dim is None:
            raise SchemaError("--builtin requires --dim")
        dim = args.dim
        u = _builtin_unitary(args.builtin, dim, rng)
    um = u.matrix

    def predicate(columns):
        vals = np.abs(np.sum(columns.conj() * (um @ columns), axis=0))
        # Cauchy-Schwarz caps the true value at 1; trim fp overshoot
        return np.minimum(vals, 1.0) <= args.eps

    try:
        result = onb_in_set(predicate, dim, rng, args.max_tries)
    except OnbSearchExhausted as exc:
        payload = {
            "dim": dim,
            "eps": args.eps,
            "max_tries": args.max_tries,
            "exhausted": True,
            "pass_rates": list(exc.pass_rates),
            "seed": rng.seed,
            "stream": rng.stream,
        }
        _write_json(payload, args.out, stamp=not args.no_timestamp)
        print(f"exhausted after {args.max_tries} tries; "
              f"per-try column pass rates {list(exc.pass_rates)}")
        return EXIT_EXHAUSTED
    diag = np.abs(
        np.sum(result.basis.conj() * (um @ result.basis), axis=0)
    )
    payload = {
        "dim": dim,
        "eps": args.eps,
        "tries": result.tries,
        "pass_rates": list(result.pass_rates),
        "basis": matrix_to_json(result.basis),
        "column_values": [float(v) for v in diag],
        "seed": rng.seed,
        "stream": rng.stream,
    }
    _write_json(payload, args.out, stamp=not args.no_timestamp)
    print(
        f"found witness basis in {result.tries} tries; "
        f"max |<x, ux>| over columns = {_fmt(diag.max())}"
    )
    print(f"basis written to {args.out}")
    return EXIT_OK


def cmd_zoo(args) -> int:
    params = {}
    if args.name == "regular_finite":
        if not args.group:
            raise SchemaError("regular_finite needs --group (e.g. z3, s3, d4)")
        params["group"] = builtin_group(args.group)
    elif args.name == "cyclic_character":
        params.update(n=args.n, k=args.k)
    elif args.name == "free_haar":
        params.update(rank=args.rank, d=args.rep_dim, seed=_rng(args))
    elif args.name == "integer_phase":
        params.update(theta=args.theta)
    else:
        raise SchemaError(
            f"fixture {args.name!r} is not constructible from the CLI"
        )
    rep = zoo(args.name, **params)
    _write_json(rep_to_json(rep), args.out, stamp=not args.no_timestamp)
    print(f"wrote {args.name} bundle (dim {rep.dim}) to {args.out}")
    return EXIT_OK


def _parse_int_list(text: str, what: str):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise SchemaError(f"cannot parse {what} list {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise SchemaError(f"{what} must be positive integers")
    return values


def _parse_float_list(text: str, what: str):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise SchemaError(f"cannot parse {what} list {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise SchemaError(f"{what} must be positive")
    return values


def _add_common(parser, default_out):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--stream", type=int, default=0)
    parser.add_argument("--out", default=default_out)
    parser.add_argument("--no-timestamp", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearrep",
        description="certify and amplify approximate unitary representations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="run a certification over a word set")
    p.add_argument("--rep", required=True)
    p.add_argument("--words")
    p.add_argument("--all-table-elements", action="store_true")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mode", choices=("hs", "sphere", "onb"), default="hs")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--max-tries", type=int, default=8)
    p.add_argument("--max-dim", type=int, default=MAX_DIM)
    p.add_argument("--strict-dim", action="store_true")
    _add_common(p, "certificate.json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("amplify", help="plan and certify trace amplification")
    p.add_argument("--rep", required=True)
    p.add_argument("--words")
    p.add_argument("--all-table-elements", action="store_true")
    p.add_argument("--eps", type=float, required=True)
    _add_common(p, "amplification.json")
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("concentrate", help="empirical concentration tables")
    p.add_argument("--dims", required=True, help="comma-separated dimensions")
    p.add_argument("--eps", required=True, help="comma-separated thresholds")
    p.add_argument("--function", default="re_coord")
    p.add_argument("--matrix", default="haar",
                   help="matrix for quad_form functions: haar|cyclic_shift|identity")
    p.add_argument("--trials", type=int, default=20000)
    _add_common(p, "concentration.csv")
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("onb", help="search an orthonormal basis in a good set")
    p.add_argument("--rep")
    p.add_argument("--word", help="word selecting the unitary from the bundle")
    p.add_argument("--builtin", default="cyclic_shift")
    p.add_argument("--dim", type=int)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-tries", type=int, default=3)
    _add_common(p, "onb.json")
    p.set_defaults(func=cmd_onb)

    p = sub.add_parser("zoo", help="write a fixture representation bundle")
    p.add_argument("--name", required=True)
    p.add_argument("--group", help="builtin group for regular_finite (z3, s3, d4)")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--rep-dim", type=int, default=64)
    p.add_argument("--theta", type=float, default=np.pi)
    _add_common(p, "fixture.json")
    p.set_defaults(func=cmd_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except GammaOutOfRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GAMMA
    except DefectBudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OnbSearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (NearRepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry():
    raise SystemExit(main())
