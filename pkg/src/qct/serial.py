"""JSON serialization of protocol documents (schema "qct/1").

Complex numbers are two-element arrays [re, im] everywhere; matrices are
nested row-major lists of such pairs.  Algebras serialize either as a
block list or as a tensor pair, so composite layouts survive round trips.
Structural problems raise `ParseError`; semantic problems surface as the
constructors' `ValidationError` with the violated invariant named.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .algebra import AlgebraSpec, Channel, Povm, State
from .cheat_opt import SearchReport
from .ct_protocols import ClassicalProtocol
from .dilation import PureStrategy
from .errors import ParseError
from .protocol import OUTCOMES, OutcomeDistribution, Protocol, Strategy

SCHEMA = "qct/1"


def dumps(doc: dict) -> str:
    """Canonical rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _require(obj: Any, key: str, context: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{context}: missing required field {key!r}")
    return obj[key]


def check_schema(doc: Any, context: str = "document"):
    tag = _require(doc, "schema", context)
    if tag != SCHEMA:
        raise ParseError(f"{context}: unsupported schema {tag!r}, expected {SCHEMA!r}")


# -- numbers and matrices ----------------------------------------------------


def encode_complex(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def decode_complex(obj: Any, context: str = "complex number") -> complex:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ParseError(f"{context}: expected a [re, im] pair, got {obj!r}")
    re, im = obj
    if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
        raise ParseError(f"{context}: [re, im] entries must be numbers")
    return complex(re, im)


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(obj: Any, context: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(f"{context}: expected a nested list of [re, im] pairs")
    width = len(obj[0])
    rows = []
    for r, row in enumerate(obj):
        if len(row) != width:
            raise ParseError(f"{context}: row {r} has length {len(row)}, expected {width}")
        rows.append([decode_complex(z, f"{context}[{r}]") for z in row])
    return np.array(rows, dtype=complex)


def encode_vector(v: np.ndarray) -> list:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def decode_vector(obj: Any, context: str = "vector") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{context}: expected a list of [re, im] pairs")
    return np.array([decode_complex(z, context) for z in obj], dtype=complex)


# -- algebras and operators --------------------------------------------------


def encode_algebra(spec: AlgebraSpec) -> dict:
    if spec.factors:
        left, right = spec.factors
        return {"tensor": [encode_algebra(left), encode_algebra(right)]}
    return {"blocks": [[label, dim] for label, dim in spec.blocks]}


def decode_algebra(obj: Any, context: str = "algebra") -> AlgebraSpec:
    if not isinstance(obj, dict):
        raise ParseError(f"{context}: expected an object")
    if "tensor" in obj:
        pair = obj["tensor"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{context}: tensor must hold exactly two algebras")
        return decode_algebra(pair[0], context).tensor(decode_algebra(pair[1], context))
    blocks = _require(obj, "blocks", context)
    if not isinstance(blocks, list):
        raise ParseError(f"{context}: blocks must be a list")
    parsed = []
    for entry in blocks:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"{context}: each block must be a [label, dim] pair")
        label, dim = entry
        if not isinstance(dim, int):
            raise ParseError(f"{context}: block dimension must be an integer")
        parsed.append((str(label), dim))
    return AlgebraSpec.hybrid(parsed)


def encode_state(state: State) -> dict:
    return {"algebra": encode_algebra(state.algebra), "matrix": encode_matrix(state.matrix)}


def decode_state(obj: Any, context: str = "state") -> State:
    algebra = decode_algebra(_require(obj, "algebra", context), f"{context}.algebra")
    matrix = decode_matrix(_require(obj, "matrix", context), f"{context}.matrix")
    return State(algebra, matrix)


def encode_povm(povm: Povm) -> dict:
    return {
        "algebra": encode_algebra(povm.algebra),
        "outcomes": [[label, encode_matrix(eff)] for label, eff in povm.outcomes],
    }


def decode_povm(obj: Any, context: str = "povm") -> Povm:
    algebra = decode_algebra(_require(obj, "algebra", context), f"{context}.algebra")
    raw = _require(obj, "outcomes", context)
    if not isinstance(raw, list):
        raise ParseError(f"{context}: outcomes must be a list")
    outcomes = []
    for entry in raw:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"{context}: each outcome must be a [label, matrix] pair")
        label, mat = entry
        outcomes.append((str(label), decode_matrix(mat, f"{context}[{label}]")))
    return Povm(algebra, tuple(outcomes))


def encode_channel(channel: Channel) -> dict:
    return {
        "input": encode_algebra(channel.input),
        "output": encode_algebra(channel.output),
        "kraus": [encode_matrix(k) for k in channel.kraus],
    }


def decode_channel(obj: Any, context: str = "channel") -> Channel:
    inp = decode_algebra(_require(obj, "input", context), f"{context}.input")
    out = decode_algebra(_require(obj, "output", context), f"{context}.output")
    raw = _require(obj, "kraus", context)
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{context}: kraus must be a non-empty list of matrices")
    kraus = tuple(decode_matrix(k, f"{context}.kraus[{i}]") for i, k in enumerate(raw))
    return Channel(inp, out, kraus)


# -- strategies and protocols ------------------------------------------------


def encode_strategy(s: Strategy) -> dict:
    return {
        "party": s.party,
        "pure": isinstance(s, PureStrategy),
        "private_algebra": encode_algebra(s.private_algebra),
        "mailbox": encode_algebra(s.mailbox_algebra),
        "initial": encode_state(s.initial),
        "moves": [encode_channel(m) for m in s.moves],
        "final_measurement": encode_povm(s.final_measurement),
    }


def decode_strategy(obj: Any, context: str = "strategy") -> Strategy:
    party = _require(obj, "party", context)
    private = decode_algebra(_require(obj, "private_algebra", context), f"{context}.private")
    mailbox = decode_algebra(_require(obj, "mailbox", context), f"{context}.mailbox")
    initial = decode_state(_require(obj, "initial", context), f"{context}.initial")
    raw_moves = _require(obj, "moves", context)
    if not isinstance(raw_moves, list):
        raise ParseError(f"{context}: moves must be a list")
    moves = tuple(
        decode_channel(m, f"{context}.moves[{i}]") for i, m in enumerate(raw_moves)
    )
    final = decode_povm(
        _require(obj, "final_measurement", context), f"{context}.final_measurement"
    )
    cls = PureStrategy if obj.get("pure") else Strategy
    return cls(str(party), private, mailbox, initial, moves, final)


def encode_protocol(p: Protocol) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "protocol",
        "mailbox": encode_algebra(p.mailbox),
        "alice": encode_strategy(p.alice),
        "bob": encode_strategy(p.bob),
        "rounds": p.rounds,
        "first_mover": p.first_mover,
    }


def decode_protocol(obj: Any) -> Protocol:
    check_schema(obj, "protocol")
    mailbox = decode_algebra(_require(obj, "mailbox", "protocol"), "protocol.mailbox")
    alice = decode_strategy(_require(obj, "alice", "protocol"), "protocol.alice")
    bob = decode_strategy(_require(obj, "bob", "protocol"), "protocol.bob")
    rounds = _require(obj, "rounds", "protocol")
    if not isinstance(rounds, int):
        raise ParseError("protocol: rounds must be an integer")
    return Protocol(alice, bob, mailbox, rounds, str(obj.get("first_mover", "alice")))


def encode_distribution(d: OutcomeDistribution) -> dict:
    return {
        "labels": list(OUTCOMES),
        "table": [[float(x) for x in row] for row in d.table],
    }


# -- classical protocols -----------------------------------------------------


def encode_classical(c: ClassicalProtocol) -> dict:
    def behavior_rows(table):
        rows = []
        for (r, t), dist in sorted(table.items()):
            rows.append(
                {
                    "round": r,
                    "transcript": list(t),
                    "distribution": {m: float(p) for m, p in sorted(dist.items())},
                }
            )
        return rows

    outcomes = []
    for t in c.transcripts():
        outcomes.append(
            {
                "transcript": list(t),
                "alice": c.alice_outcome[t],
                "bob": c.bob_outcome[t],
            }
        )
    return {
        "schema": SCHEMA,
        "kind": "classical_protocol",
        "alphabets": [list(a) for a in c.alphabets],
        "first_mover": c.first_mover,
        "alice_behavior": behavior_rows(c.alice_behavior),
        "bob_behavior": behavior_rows(c.bob_behavior),
        "outcomes": outcomes,
    }


def decode_classical(obj: Any) -> ClassicalProtocol:
    check_schema(obj, "classical protocol")
    alphabets = _require(obj, "alphabets", "classical protocol")
    if not isinstance(alphabets, list) or not all(isinstance(a, list) for a in alphabets):
        raise ParseError("classical protocol: alphabets must be a list of lists")

    def behavior_table(rows, context):
        if not isinstance(rows, list):
            raise ParseError(f"{context}: expected a list of decision rows")
        table = {}
        for row in rows:
            r = _require(row, "round", context)
            t = tuple(str(m) for m in _require(row, "transcript", context))
            dist = _require(row, "distribution", context)
            if not isinstance(dist, dict):
                raise ParseError(f"{context}: distribution must be an object")
            table[(int(r), t)] = {str(m): float(p) for m, p in dist.items()}
        return table

    alice_behavior = behavior_table(obj.get("alice_behavior", []), "alice behavior")
    bob_behavior = behavior_table(obj.get("bob_behavior", []), "bob behavior")
    alice_outcome = {}
    bob_outcome = {}
    for row in _require(obj, "outcomes", "classical protocol"):
        t = tuple(str(m) for m in _require(row, "transcript", "outcome row"))
        alice_outcome[t] = str(_require(row, "alice", "outcome row"))
        bob_outcome[t] = str(_require(row, "bob", "outcome row"))
    return ClassicalProtocol(
        [tuple(str(m) for m in a) for a in alphabets],
        alice_behavior,
        bob_behavior,
        alice_outcome,
        bob_outcome,
        str(obj.get("first_mover", "alice")),
    )


def encode_search_report(r: SearchReport) -> dict:
    return {
        "family": r.family,
        "target": r.target,
        "best_value": r.best_value,
        "best_parameters": list(r.best_parameters),
        "evaluations": r.evaluations,
        "restarts": r.restarts,
        "seed": r.seed,
        "ceiling": r.ceiling,
        "ceiling_violated": r.ceiling_violated,
        "note": r.note,
    }
