"""``sasm`` command line.

Exit codes: 0 when the command completed (answers are part of the JSON
payload), 2 for bad input, 1 for budget exhaustion or internal failures.
Machine-readable output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import builders, fscgen, jsonio, oracle
from .errors import BudgetError, InvalidInput, SchemaError
from .model import validate
from .reduce import decide_fsc_exists, reduce

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None


def _emit(doc) -> None:
    sys.stdout.write(jsonio.dumps(doc) + "\n")


def _load_spec(path: str):
    spec = jsonio.parse_spec(_read(path))
    report = validate(spec)
    if not report.ok:
        raise SchemaError("spec", "; ".join(str(v) for v in report.errors))
    return spec


def _state_cap(args) -> int:
    if args.max_states is not None:
        return args.max_states
    env = os.environ.get("SASM_STATE_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidInput(f"SASM_STATE_CAP must be an integer, got {env!r}") from None
    return oracle.DEFAULT_STATE_CAP


def _recurrent(spec, args, witnesses: bool):
    return oracle.recurrent_stable_set(
        spec,
        max_states=_state_cap(args),
        max_particles=args.max_particles,
        witnesses=witnesses,
    )


def cmd_validate(args) -> int:
    spec = jsonio.parse_spec(_read(args.spec))
    report = validate(spec)
    doc = report.to_json()
    if report.ok and not report.warnings:
        doc = {"ok": True}
    _emit(doc)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_reduce(args) -> int:
    _emit(reduce(_load_spec(args.spec)).to_json(include_layers=args.trace))
    return EXIT_OK


def cmd_decide_fsc(args) -> int:
    witness = decide_fsc_exists(_load_spec(args.spec))
    _emit(
        {
            "exists": witness is not None,
            "witness": None if witness is None else jsonio.subconfiguration_to_json(witness),
        }
    )
    return EXIT_OK


def cmd_gen_grid(args) -> int:
    make = {"ns-ew": builders.grid_ns_ew, "ne-sw": builders.grid_ne_sw}[args.model]
    _emit(jsonio.spec_to_json(make(args.rows, args.cols)))
    return EXIT_OK


def _offset(text: str) -> tuple[int, int]:
    try:
        r, c = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("offset must look like R,C") from None
    return r, c


def cmd_gen_manna_fsc(args) -> int:
    chain = fscgen.manna_fsc_chain(args.blocks, args.offset)
    if args.render:
        sys.stdout.write(fscgen.render(chain) + "\n")
    else:
        _emit(jsonio.subconfiguration_to_json(chain))
    return EXIT_OK


def cmd_gen_random(args) -> int:
    spec = builders.random_spec(
        args.sites, args.max_capacity, args.max_rules, args.seed, allow_traps=args.allow_traps
    )
    _emit(jsonio.spec_to_json(spec))
    return EXIT_OK


def _write_witness(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in lines:
            fh.write(jsonio.dumps(doc) + "\n")


def cmd_recurrent_set(args) -> int:
    spec = _load_spec(args.spec)
    rset = _recurrent(spec, args, witnesses=args.witness is not None)
    _emit(rset.header())
    members = rset.configurations()
    for config in members:
        _emit(jsonio.configuration_to_json(config))
    if args.witness:
        _write_witness(
            args.witness,
            (
                {
                    "heights": dict(c.heights),
                    "witness": [s.to_json() for s in rset.witness(c)],
                }
                for c in members
            ),
        )
    return EXIT_OK


def cmd_is_recurrent(args) -> int:
    spec = _load_spec(args.spec)
    config = jsonio.parse_configuration(_read(args.config), spec)
    answer = oracle.is_recurrent(spec, config, _recurrent(spec, args, witnesses=True))
    _emit(answer.to_json())
    if args.witness and answer.witness is not None:
        _write_witness(args.witness, [[s.to_json() for s in answer.witness]])
    return EXIT_OK


def cmd_is_forbidden(args) -> int:
    spec = _load_spec(args.spec)
    sub = jsonio.parse_subconfiguration(_read(args.subconfig), spec)
    _emit({"forbidden": oracle.is_forbidden(spec, sub, _recurrent(spec, args, witnesses=False))})
    return EXIT_OK


def cmd_minimal_fscs(args) -> int:
    spec = _load_spec(args.spec)
    found = oracle.enumerate_minimal_fscs(
        spec, args.max_region, _recurrent(spec, args, witnesses=False)
    )
    _emit({"fscs": [jsonio.subconfiguration_to_json(s) for s in found]})
    return EXIT_OK


def cmd_min_irred(args) -> int:
    spec = _load_spec(args.spec)
    sets = oracle.minimal_irreducible_subsandpiles(spec, args.containing)
    _emit({"subsandpiles": [sorted(s) for s in sets]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sasm", description="Stochastic abelian sandpile tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a sandpile document")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reduce", help="run REDUCE")
    p.add_argument("spec")
    p.add_argument("--trace", action="store_true", help="include the removed layers")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("decide-fsc", help="decide whether a forbidden sub-configuration exists")
    p.add_argument("spec")
    p.set_defaults(func=cmd_decide_fsc)

    gen = sub.add_parser("gen", help="generate documents").add_subparsers(dest="what", required=True)
    p = gen.add_parser("grid")
    p.add_argument("--model", choices=["ns-ew", "ne-sw"], required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.set_defaults(func=cmd_gen_grid)
    p = gen.add_parser("manna-fsc")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--offset", type=_offset, default=(0, 0))
    p.add_argument("--render", action="store_true", help="print a grid picture instead of JSON")
    p.set_defaults(func=cmd_gen_manna_fsc)
    p = gen.add_parser("random")
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-capacity", type=int, default=2)
    p.add_argument("--max-rules", type=int, default=2)
    p.add_argument("--allow-traps", action="store_true")
    p.set_defaults(func=cmd_gen_random)

    orc = sub.add_parser("oracle", help="exhaustive recurrence oracle")
    orc_sub = orc.add_subparsers(dest="query", required=True)

    def oracle_parser(name, func, *positional):
        p = orc_sub.add_parser(name)
        for arg in positional:
            p.add_argument(arg)
        p.add_argument("--max-states", type=int, default=None)
        p.add_argument("--max-particles", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1, help="accepted; the search is sequential")
        p.add_argument("--witness", default=None, metavar="PATH")
        p.set_defaults(func=func)
        return p

    oracle_parser("recurrent-set", cmd_recurrent_set, "spec")
    oracle_parser("is-recurrent", cmd_is_recurrent, "spec", "config")
    oracle_parser("is-forbidden", cmd_is_forbidden, "spec", "subconfig")
    oracle_parser("minimal-fscs", cmd_minimal_fscs, "spec").add_argument(
        "--max-region", type=int, required=True
    )
    oracle_parser("min-irred", cmd_min_irred, "spec").add_argument("--containing", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"sasm: {type(exc).__name__}: {exc}", file=sys.stderr)
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_INPUT
    except BudgetError as exc:
        print(f"sasm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"sasm: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
