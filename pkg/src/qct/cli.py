"""Command line front end.

Subcommands: run | sample | cheat | dilate | classical.  Inputs are
builtin names or JSON documents (schema "qct/1"); every report is JSON
with sorted keys, so identical inputs and seeds give byte-identical
output.  Exit codes: 0 success, 1 failed verification, 2 parse error,
3 validation error (the message names the violated invariant).

Seeds are 64-bit unsigned integers feeding PCG64 streams.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import ct_protocols, dilation, randomized, serial
from .cheat_opt import SearchConfig, alice_preparation_bound, helstrom, optimize_cheat
from .ct_protocols import (
    CLASSICAL_BUILTINS,
    FAMILY_BUILDERS,
    MAILBOX,
    PSI0,
    PSI1,
    PUBLISHED_FORCING,
    build_alice_cheat,
    build_bob_cheat,
    build_dk_honest,
    honest_alice,
    honest_bob,
    make_family,
)
from .errors import ParseError, ProtocolError, QctError, ValidationError
from .protocol import (
    Protocol,
    check_correct,
    coin_payoff,
    payoff,
    run_exact,
    sample,
)
from . import linalg


def _dk_bob_cheat_protocol(target: int = 1) -> Protocol:
    return Protocol(honest_alice(), build_bob_cheat(target), MAILBOX, 3, "alice")


def _dk_alice_cheat_protocol(target: int = 0) -> Protocol:
    return Protocol(build_alice_cheat(target), honest_bob(), MAILBOX, 3, "alice")


PROTOCOL_BUILTINS = {
    "dk-honest": build_dk_honest,
    "dk-bob-cheat": _dk_bob_cheat_protocol,
    "dk-alice-cheat": _dk_alice_cheat_protocol,
}


def list_builtins() -> dict:
    return {
        "schema": serial.SCHEMA,
        "kind": "builtins",
        "protocols": sorted(PROTOCOL_BUILTINS),
        "classical": sorted(CLASSICAL_BUILTINS),
        "families": sorted({name for name, _ in FAMILY_BUILDERS}),
    }


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def load_protocol(name_or_path: str) -> Protocol:
    if name_or_path in PROTOCOL_BUILTINS:
        return PROTOCOL_BUILTINS[name_or_path]()
    return serial.decode_protocol(_load_json(name_or_path))


def load_classical(name_or_path: str) -> ct_protocols.ClassicalProtocol:
    if name_or_path in CLASSICAL_BUILTINS:
        return CLASSICAL_BUILTINS[name_or_path]()
    return serial.decode_classical(_load_json(name_or_path))


def _emit(doc: dict, output: str | None):
    text = serial.dumps(doc)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _is_dk_protocol(name: str) -> bool:
    return name in PROTOCOL_BUILTINS


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    protocol = load_protocol(args.input)
    dist = run_exact(protocol)
    pay = payoff(dist, coin_payoff())
    doc = {
        "schema": serial.SCHEMA,
        "kind": "run_report",
        "input": args.input,
        "distribution": serial.encode_distribution(dist),
        "correct": check_correct(dist, tol=args.tolerance),
        "payoff": {"alice": pay[0], "bob": pay[1]},
    }
    _emit(doc, args.output)
    return 0


def cmd_sample(args) -> int:
    protocol = load_protocol(args.input)
    counts = sample(protocol, args.n, args.seed)
    doc = {
        "schema": serial.SCHEMA,
        "kind": "sample_report",
        "input": args.input,
        "n": args.n,
        "seed": args.seed,
        "labels": ["0", "1", "abort"],
        "counts": [[int(x) for x in row] for row in counts],
    }
    _emit(doc, args.output)
    return 0


def cmd_cheat(args) -> int:
    protocol = load_protocol(args.input)
    target = args.target if args.target is not None else (0 if args.party == "alice" else 1)
    family = make_family(args.family, args.party, target)
    ceiling = PUBLISHED_FORCING if _is_dk_protocol(args.input) else None
    config = SearchConfig(
        restarts=args.restarts, budget=args.budget, seed=args.seed, ceiling=ceiling
    )
    report = optimize_cheat(protocol, family, target, config)
    oracles = {}
    if _is_dk_protocol(args.input):
        red0 = linalg.partial_trace(linalg.projector(PSI0), [3, 3], [1])
        red1 = linalg.partial_trace(linalg.projector(PSI1), [3, 3], [1])
        oracles["helstrom"] = helstrom(red0, red1, 0.5)
        prep = alice_preparation_bound(
            PSI0, PSI1, dims=(3, 3), mailbox_factor=1,
            restarts=min(args.restarts, 8), budget=min(args.budget, 4000),
            seed=args.seed,
        )
        oracles["alice_preparation_bound"] = prep.value
    doc = {
        "schema": serial.SCHEMA,
        "kind": "cheat_report",
        "input": args.input,
        "party": args.party,
        "search": serial.encode_search_report(report),
        "oracles": oracles or None,
    }
    _emit(doc, args.output)
    if report.ceiling_violated:
        print(
            f"WARNING: search value {report.best_value:.9f} exceeds the "
            f"declared ceiling {ceiling}",
            file=sys.stderr,
        )
    return 0


def cmd_dilate(args) -> int:
    protocol = load_protocol(args.input)
    original = protocol.alice if args.party == "alice" else protocol.bob
    opponent_honest = protocol.bob if args.party == "alice" else protocol.alice
    pure = dilation.unitary_normal_form(original)
    opponents = [dilation.embed_quantum(opponent_honest)]
    rng = randomized.generator(args.seed)
    for _ in range(args.opponents):
        opponents.append(randomized.random_opponent_for(rng, pure, private_dim=2))
    deviations = [
        dilation.normal_form_deviation(original, pure, opp, protocol.first_mover)
        for opp in opponents
    ]
    max_dev = max(deviations)
    doc = {
        "schema": serial.SCHEMA,
        "kind": "dilation_report",
        "input": args.input,
        "party": args.party,
        "pure_strategy": serial.encode_strategy(pure),
        "verification": {
            "opponents": len(opponents),
            "deviations": deviations,
            "max_deviation": max_dev,
        },
    }
    _emit(doc, args.output)
    return 0 if max_dev < args.tolerance else 1


def cmd_classical(args) -> int:
    protocol = load_classical(args.input)
    if not ct_protocols.is_correct_classical(protocol):
        raise ValidationError(
            "winning analysis requires a correct protocol: honest play must "
            "yield the agreeing outcomes 0 and 1 with probability 1/2 each"
        )
    games = []
    for outcome in ("0", "1"):
        analysis = ct_protocols.solve_winning(protocol, outcome)
        games.append(
            {
                "outcome": outcome,
                "winner": analysis.party,
                "value": analysis.value,
                "forcing_moves": None
                if analysis.strategy is None
                else [
                    {"round": r, "transcript": list(t), "message": m}
                    for (r, t), m in analysis.strategy.choices
                ],
            }
        )
    forced = [g for g in games if g["winner"] is not None]
    doc = {
        "schema": serial.SCHEMA,
        "kind": "classical_report",
        "input": args.input,
        "games": games,
        "bias": 0.5 if forced else None,
        "summary": (
            "no player forces an outcome"
            if not forced
            else "; ".join(
                f"{g['winner']} forces outcome {g['outcome']} with certainty"
                for g in forced
            )
        ),
    }
    _emit(doc, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qct",
        description="simulate, verify and attack two-party coin-tossing protocols",
    )
    parser.add_argument(
        "--list-builtins",
        action="store_true",
        help="print builtin protocol, classical-protocol and family names",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("input", help="builtin name or path to a JSON document")
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="PCG64 seed (default 0)")
        p.add_argument(
            "--tolerance",
            type=float,
            default=1e-9,
            help="numerical tolerance for verdicts (default 1e-9)",
        )

    p_run = sub.add_parser("run", help="exact distribution, correctness, payoff")
    common(p_run)

    p_sample = sub.add_parser("sample", help="seeded Monte-Carlo outcome counts")
    common(p_sample)
    p_sample.add_argument("--n", type=int, default=100000, help="number of samples")

    p_cheat = sub.add_parser("cheat", help="search a cheat family, report bounds")
    common(p_cheat)
    p_cheat.add_argument("--party", choices=["alice", "bob"], required=True)
    p_cheat.add_argument("--target", type=int, choices=[0, 1], default=None)
    p_cheat.add_argument("--family", default="published")
    p_cheat.add_argument("--restarts", type=int, default=32)
    p_cheat.add_argument("--budget", type=int, default=20000)

    p_dilate = sub.add_parser("dilate", help="unitary normal form plus verification")
    common(p_dilate)
    p_dilate.add_argument("--party", choices=["alice", "bob"], default="alice")
    p_dilate.add_argument(
        "--opponents", type=int, default=8, help="number of random opponents"
    )
    p_dilate.set_defaults(tolerance=1e-6)

    p_classical = sub.add_parser(
        "classical", help="winning-strategy analysis of a classical protocol"
    )
    common(p_classical)
    return parser


COMMANDS = {
    "run": cmd_run,
    "sample": cmd_sample,
    "cheat": cmd_cheat,
    "dilate": cmd_dilate,
    "classical": cmd_classical,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_builtins:
        sys.stdout.write(serial.dumps(list_builtins()))
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ProtocolError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except QctError as exc:  # pragma: no cover - internal contract failures
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
