"""Concrete coin-tossing protocol instances.

Quantum part: the three-dimensional mailbox protocol with bias 1/4.
Alice's and Bob's notepads carry small classical registers next to their
qutrits; the mailbox is one classical bit (Bob's announced coin) next to
one qutrit.  The two published cheating strategies reach forcing
probability 3/4 exactly, matching the Helstrom and preparation-fidelity
oracles in `cheat_opt`.

Classical part: transcript-based two-party protocols given by stochastic
transition tables, their decomposition into pure strategies, and a
backward-induction solver demonstrating that every correct classical
protocol hands one player a certain win (bias 1/2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import linalg
from .algebra import (
    AlgebraSpec,
    Channel,
    Instrument,
    Povm,
    State,
    identity_channel,
    pure_state,
)
from .cheat_opt import CheatFamily, parameterize_unitary
from .errors import ValidationError
from .protocol import OUTCOMES, OutcomeDistribution, Protocol, Strategy

# The published cheats of the concrete protocol both force their target
# with probability exactly 3/4 (bias 1/4).
PUBLISHED_FORCING = 0.75
CLAIMED_BIAS = 0.25

# -- algebras and states of the concrete protocol ---------------------------

#: mailbox: one classical announcement bit next to one qutrit
MAILBOX = AlgebraSpec.hybrid([("0", 3), ("1", 3)])
#: Alice: classical bits (own coin, received coin) next to one qutrit
ALICE_NOTEPAD = AlgebraSpec.hybrid([("00", 3), ("01", 3), ("10", 3), ("11", 3)])
#: Bob: classical coin next to a two-qutrit register
BOB_NOTEPAD = AlgebraSpec.hybrid([("0", 9), ("1", 9)])

_ALICE_FACTORS = (4, 3, 2, 3)  # A_cl, A_q, M_cl, M_q
_BOB_FACTORS = (2, 3, 2, 3, 3)  # M_cl, M_q, B_cl, B_q1, B_q2
_MAILBOX_FACTORS = (2, 3)  # M_cl, M_q


def psi(bit: int) -> np.ndarray:
    """Committed states on notepad-qutrit (x) mailbox-qutrit; <psi0|psi1> = 0."""
    v = np.zeros(9, dtype=complex)
    if bit == 0:
        v[0 * 3 + 0] = 1.0  # |0,0>
        v[1 * 3 + 2] = 1.0  # |1,2>
    else:
        v[1 * 3 + 1] = 1.0  # |1,1>
        v[0 * 3 + 2] = 1.0  # |0,2>
    return v / np.sqrt(2.0)


def psi_tilde(bit: int) -> np.ndarray:
    """Alice's cheating preparations, overlap |<psi_b|psi~_b>|^2 = 3/4."""
    v = np.zeros(9, dtype=complex)
    if bit == 0:
        v[0 * 3 + 0] = 1.0
        v[0 * 3 + 1] = 1.0
        v[1 * 3 + 2] = 2.0
    else:
        v[1 * 3 + 0] = 1.0
        v[1 * 3 + 1] = 1.0
        v[0 * 3 + 2] = 2.0
    return v / np.sqrt(6.0)


PSI0, PSI1 = psi(0), psi(1)
PSI0_TILDE, PSI1_TILDE = psi_tilde(0), psi_tilde(1)


def _bit_flip(b: int) -> np.ndarray:
    """2x2 permutation |m> -> |m (+) b>."""
    return np.array([[1, 0], [0, 1]], dtype=complex) if b % 2 == 0 else np.array(
        [[0, 1], [1, 0]], dtype=complex
    )


def _qutrit_flip() -> np.ndarray:
    """Swap |0> and |1>, leave |2> alone."""
    return np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)


def _shift3(c: int) -> np.ndarray:
    """Mod-3 shift |r> -> |r + c mod 3> on a three-valued register."""
    m = np.zeros((3, 3), dtype=complex)
    for r in range(3):
        m[(r + c) % 3, r] = 1.0
    return m


def _proj(dim: int, index: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


_SWAP33 = linalg.permutation_operator([3, 3], [1, 0])


def _with_mailbox_bit(vec9: np.ndarray, bit: int = 0) -> np.ndarray:
    """Embed a (system, mailbox-qutrit) vector with the mailbox bit set."""
    v = np.asarray(vec9, dtype=complex).reshape(3, 3)
    out = np.zeros((3, 2, 3), dtype=complex)
    out[:, bit, :] = v
    return out.reshape(-1)


# -- honest strategies -------------------------------------------------------


def honest_alice() -> Strategy:
    """Alice's honest strategy.

    Preparation: she throws a fair coin b_A, records it, and writes
    |psi_{b_A}> across her qutrit and the mailbox qutrit.  Her one move
    (after Bob announced b_B) records the mailbox bit next to her coin and
    pushes her qutrit into the mailbox.  She outputs b_A (+) b_B.
    """
    comp = ALICE_NOTEPAD.tensor(MAILBOX)
    rho = np.zeros((comp.dim, comp.dim), dtype=complex)
    for b in (0, 1):
        branch = np.kron(
            linalg.basis_vector(4, 2 * b), _with_mailbox_bit(psi(b), bit=0)
        )
        rho += 0.5 * linalg.projector(branch)
    initial = State(comp, rho)

    dims = list(_ALICE_FACTORS)
    kraus = []
    for m in (0, 1):
        record = np.kron(np.eye(2), _bit_flip(m))  # second notepad bit += m
        k = (
            linalg.embed_factors(record, [0], dims)
            @ linalg.embed_factors(_proj(2, m), [2], dims)
            @ linalg.embed_factors(_SWAP33, [1, 3], dims)
        )
        kraus.append(k)
    move = Channel(comp, comp, tuple(kraus))

    eye3 = np.eye(3, dtype=complex)
    effects = {"0": np.zeros((12, 12), dtype=complex), "1": np.zeros((12, 12), dtype=complex)}
    for b_a in (0, 1):
        for b_b in (0, 1):
            block = _proj(4, 2 * b_a + b_b)
            effects[str(b_a ^ b_b)] += np.kron(block, eye3)
    final = Povm(
        ALICE_NOTEPAD,
        (
            ("0", effects["0"]),
            ("1", effects["1"]),
            ("abort", np.zeros((12, 12), dtype=complex)),
        ),
    )
    return Strategy("alice", ALICE_NOTEPAD, MAILBOX, initial, (move,), final)


def bob_register_default() -> np.ndarray:
    """Fiducial preparation |2,2> of Bob's two-qutrit register."""
    return linalg.basis_vector(9, 8)


def honest_bob(register: np.ndarray | None = None) -> Strategy:
    """Bob's honest strategy.

    He throws a coin b_B.  First move: swap the mailbox qutrit into his
    second register slot and announce b_B on the mailbox bit.  Second
    move: read the mailbox qutrit into his first slot.  He then measures
    the projections onto |psi_0>, |psi_1> (abort otherwise) and outputs
    the result xored with b_B.  His initial register preparation is a free
    parameter; the protocol is correct for any choice.
    """
    reg = bob_register_default() if register is None else np.asarray(register, complex)
    if abs(np.linalg.norm(reg) - 1.0) > 1e-9:
        raise ValidationError("Bob's register preparation must be a unit vector")
    rho = np.zeros((18, 18), dtype=complex)
    for b in (0, 1):
        rho += 0.5 * np.kron(_proj(2, b), linalg.projector(reg))
    initial = State(BOB_NOTEPAD, rho)

    comp = MAILBOX.tensor(BOB_NOTEPAD)
    dims = list(_BOB_FACTORS)
    kraus = []
    for b in (0, 1):
        k = (
            linalg.embed_factors(_bit_flip(b), [0], dims)
            @ linalg.embed_factors(_proj(2, b), [2], dims)
            @ linalg.embed_factors(_SWAP33, [1, 4], dims)
        )
        kraus.append(k)
    announce_and_read = Channel(comp, comp, tuple(kraus))
    collect = Channel(comp, comp, (linalg.embed_factors(_SWAP33, [1, 3], dims),))

    p_psi = [linalg.projector(psi(0)), linalg.projector(psi(1))]
    p_abort = np.eye(9, dtype=complex) - p_psi[0] - p_psi[1]
    effects = {"0": np.zeros((18, 18), complex), "1": np.zeros((18, 18), complex)}
    abort = np.zeros((18, 18), dtype=complex)
    for b in (0, 1):
        for measured in (0, 1):
            effects[str(measured ^ b)] += np.kron(_proj(2, b), p_psi[measured])
        abort += np.kron(_proj(2, b), p_abort)
    final = Povm(
        BOB_NOTEPAD,
        (("0", effects["0"]), ("1", effects["1"]), ("abort", abort)),
    )
    return Strategy(
        "bob", BOB_NOTEPAD, MAILBOX, initial, (announce_and_read, collect), final
    )


def build_dk_honest(bob_register: np.ndarray | None = None) -> Protocol:
    """The honest three-dimensional protocol (3 moves, Alice prepares)."""
    return Protocol(
        alice=honest_alice(),
        bob=honest_bob(bob_register),
        mailbox=MAILBOX,
        rounds=3,
        first_mover="alice",
    )


# -- published cheating strategies ------------------------------------------

BOB_CHEAT_REGISTER = AlgebraSpec.classical(["0", "1", "2"])


def _claim_povm(algebra: AlgebraSpec, target: int) -> Povm:
    """Measurement that reports the target outcome with certainty."""
    dim = algebra.dim
    effects = []
    for label in OUTCOMES:
        m = np.eye(dim, dtype=complex) if label == str(target) else np.zeros((dim, dim), complex)
        effects.append((label, m))
    return Povm(algebra, tuple(effects))


def _bob_cheat_kraus(response: Sequence[float], dims: list[int]) -> list[np.ndarray]:
    """Kraus list for: measure the mailbox qutrit, store the result, announce.

    ``response[c]`` is the probability of announcing 1 after reading c.
    """
    kraus = []
    for c in range(3):
        for b in (0, 1):
            w = response[c] if b == 1 else 1.0 - response[c]
            if w <= 0.0:
                continue
            k = (
                linalg.embed_factors(_bit_flip(b), [0], dims)
                @ linalg.embed_factors(_proj(3, c), [1], dims)
                @ linalg.embed_factors(_shift3(c), [2], dims)
            )
            kraus.append(np.sqrt(w) * k)
    return kraus


def build_bob_cheat(target: int) -> Strategy:
    """Bob's published cheat.

    Instead of reading the mailbox honestly he measures its qutrit in the
    computational basis.  A result c != 2 identifies Alice's coin, so he
    announces c (+) target and the common outcome is his target for sure;
    on c = 2 he has learned nothing, announces a fair coin and simply
    claims the target.  Total forcing probability 1/2 + 1/2 * 1/2 = 3/4.
    """
    t = int(target)
    if t not in (0, 1):
        raise ValidationError(f"target outcome must be 0 or 1, got {target!r}")
    comp = MAILBOX.tensor(BOB_CHEAT_REGISTER)
    dims = [2, 3, 3]
    response = [float((c ^ t) & 1) if c != 2 else 0.5 for c in range(3)]
    measure_respond = Channel(comp, comp, tuple(_bob_cheat_kraus(response, dims)))
    skip = identity_channel(comp)
    initial = State(BOB_CHEAT_REGISTER, np.diag([1.0, 0.0, 0.0]).astype(complex))
    return Strategy(
        "bob",
        BOB_CHEAT_REGISTER,
        MAILBOX,
        initial,
        (measure_respond, skip),
        _claim_povm(BOB_CHEAT_REGISTER, t),
    )


def bob_cheat_instrument(target: int) -> Instrument:
    """Bob's cheating move as an instrument, arms labeled by the read value."""
    t = int(target)
    comp = MAILBOX.tensor(BOB_CHEAT_REGISTER)
    dims = [2, 3, 3]
    arms = []
    for c in range(3):
        ops = []
        for b in (0, 1):
            w = (1.0 if b == ((c ^ t) & 1) else 0.0) if c != 2 else 0.5
            if w <= 0.0:
                continue
            k = (
                linalg.embed_factors(_bit_flip(b), [0], dims)
                @ linalg.embed_factors(_proj(3, c), [1], dims)
                @ linalg.embed_factors(_shift3(c), [2], dims)
            )
            ops.append(np.sqrt(w) * k)
        arms.append((str(c), tuple(ops)))
    return Instrument(comp, tuple(arms))


ALICE_CHEAT_NOTEPAD = AlgebraSpec.quantum(3)


def _alice_cheat_move(unitaries: Sequence[np.ndarray]) -> Channel:
    """Alice's move: apply the announced-bit-controlled unitary, then send."""
    comp = ALICE_CHEAT_NOTEPAD.tensor(MAILBOX)
    dims = [3, 2, 3]
    kraus = []
    for b in (0, 1):
        k = (
            linalg.embed_factors(_proj(2, b), [1], dims)
            @ linalg.embed_factors(_SWAP33, [0, 2], dims)
            @ linalg.embed_factors(unitaries[b], [0], dims)
        )
        kraus.append(k)
    return Channel(comp, comp, tuple(kraus))


def _alice_cheat_strategy(prep9: np.ndarray, unitaries, target: int) -> Strategy:
    comp = ALICE_CHEAT_NOTEPAD.tensor(MAILBOX)
    initial = pure_state(comp, _with_mailbox_bit(prep9, bit=0))
    return Strategy(
        "alice",
        ALICE_CHEAT_NOTEPAD,
        MAILBOX,
        initial,
        (_alice_cheat_move(unitaries),),
        _claim_povm(ALICE_CHEAT_NOTEPAD, target),
    )


def build_alice_cheat(target: int) -> Strategy:
    """Alice's published cheat.

    She prepares |psi~_target> instead of an honest commitment and claims
    the target.  When Bob's announcement b matches the branch she sends as
    is; otherwise she first swaps |0> and |1> on her qutrit, turning
    |psi~_t> into the other cheating state.  Bob's projective check then
    passes with probability 3/4 in both branches, never yielding the
    opposite bit (the cheating states are orthogonal to the opposite
    commitment), so the outcome is target with probability 3/4 and abort
    otherwise.
    """
    t = int(target)
    if t not in (0, 1):
        raise ValidationError(f"target outcome must be 0 or 1, got {target!r}")
    # branch b needs the commitment psi_{t (+) b}: psi~_t already matches
    # b = 0, and the 0<->1 flip turns it into psi~_{t (+) 1} for b = 1
    unitaries = [np.eye(3, dtype=complex), _qutrit_flip()]
    return _alice_cheat_strategy(psi_tilde(t), unitaries, t)


# -- parameterized cheat families -------------------------------------------


def published_family(party: str, target: int) -> CheatFamily:
    """Zero-parameter family holding only the published cheat."""
    builder = (
        (lambda _p: build_alice_cheat(target))
        if party == "alice"
        else (lambda _p: build_bob_cheat(target))
    )
    return CheatFamily(
        name="published", party=party, parameter_count=0, bounds=(), builder=builder
    )


def honest_family(party: str) -> CheatFamily:
    """Zero-parameter family holding only the honest strategy."""
    builder = (lambda _p: honest_alice()) if party == "alice" else (lambda _p: honest_bob())
    return CheatFamily(
        name="honest", party=party, parameter_count=0, bounds=(), builder=builder
    )


def bob_measure_respond_family(target: int) -> CheatFamily:
    """All strategies measuring the mailbox basis and answering stochastically.

    Three parameters: the probability of announcing 1 after reading 0, 1
    or 2.  The Helstrom bound on the two reduced mailbox states caps this
    family at 3/4.
    """
    t = int(target)
    comp = MAILBOX.tensor(BOB_CHEAT_REGISTER)
    dims = [2, 3, 3]
    initial = State(BOB_CHEAT_REGISTER, np.diag([1.0, 0.0, 0.0]).astype(complex))
    claim = _claim_povm(BOB_CHEAT_REGISTER, t)
    skip = identity_channel(comp)

    def builder(params: np.ndarray) -> Strategy:
        response = np.clip(np.asarray(params, dtype=float), 0.0, 1.0)
        move = Channel(comp, comp, tuple(_bob_cheat_kraus(response, dims)))
        return Strategy(
            "bob", BOB_CHEAT_REGISTER, MAILBOX, initial, (move, skip), claim
        )

    return CheatFamily(
        name="measure-respond",
        party="bob",
        parameter_count=3,
        bounds=((0.0, 1.0),) * 3,
        builder=builder,
    )


def alice_preparation_family(target: int) -> CheatFamily:
    """Alice cheats by preparation plus an announced-bit-controlled unitary.

    Parameters: 18 reals for the (normalized) two-qutrit preparation and
    9 reals for the local unitary applied in each of the two branches.
    The published cheat is the point chi = psi~_target, U_0 = 1, U_1 =
    the 0<->1 flip.
    """
    t = int(target)

    def builder(params: np.ndarray) -> Strategy:
        params = np.asarray(params, dtype=float)
        vec = params[:9] + 1j * params[9:18]
        norm = float(np.linalg.norm(vec))
        prep = vec / norm if norm > 1e-8 else linalg.basis_vector(9, 0)
        u0 = parameterize_unitary(params[18:27], 3)
        u1 = parameterize_unitary(params[27:36], 3)
        return _alice_cheat_strategy(prep, [u0, u1], t)

    bounds = tuple([(-1.0, 1.0)] * 18 + [(-np.pi, np.pi)] * 18)
    return CheatFamily(
        name="preparation-unitary",
        party="alice",
        parameter_count=36,
        bounds=bounds,
        builder=builder,
    )


FAMILY_BUILDERS = {
    ("published", "alice"): lambda target: published_family("alice", target),
    ("published", "bob"): lambda target: published_family("bob", target),
    ("honest", "alice"): lambda target: honest_family("alice"),
    ("honest", "bob"): lambda target: honest_family("bob"),
    ("measure-respond", "bob"): bob_measure_respond_family,
    ("preparation-unitary", "alice"): alice_preparation_family,
}


def make_family(name: str, party: str, target: int) -> CheatFamily:
    try:
        factory = FAMILY_BUILDERS[(name, party)]
    except KeyError:
        known = sorted({n for n, _ in FAMILY_BUILDERS})
        raise ValidationError(
            f"no cheat family {name!r} for party {party!r}; known families: {known}"
        ) from None
    return factory(target)


# ===========================================================================
# classical protocols and the winning-strategy analysis
# ===========================================================================

Transcript = tuple[str, ...]
DecisionPoint = tuple[int, Transcript]


class ClassicalProtocol:
    """Turn-based classical protocol over public transcripts.

    ``alphabets`` lists the message set of each round; the parties
    alternate starting from ``first_mover``.  Behaviors map every decision
    point (round, transcript so far) of the moving party to a probability
    distribution over that round's alphabet; the outcome maps assign each
    full transcript a result in {0, 1, abort}.
    """

    def __init__(
        self,
        alphabets: Sequence[Sequence[str]],
        alice_behavior: dict[DecisionPoint, dict[str, float]],
        bob_behavior: dict[DecisionPoint, dict[str, float]],
        alice_outcome: dict[Transcript, str],
        bob_outcome: dict[Transcript, str],
        first_mover: str = "alice",
    ):
        if first_mover not in ("alice", "bob"):
            raise ValidationError("first_mover must be 'alice' or 'bob'")
        if not alphabets:
            raise ValidationError("classical protocol needs at least one round")
        self.alphabets = tuple(tuple(str(m) for m in a) for a in alphabets)
        self.first_mover = first_mover
        self.alice_behavior = alice_behavior
        self.bob_behavior = bob_behavior
        self.alice_outcome = alice_outcome
        self.bob_outcome = bob_outcome
        self._validate()

    @property
    def rounds(self) -> int:
        return len(self.alphabets)

    def mover(self, round_index: int) -> str:
        if round_index % 2 == 0:
            return self.first_mover
        return "bob" if self.first_mover == "alice" else "alice"

    def behavior(self, party: str) -> dict[DecisionPoint, dict[str, float]]:
        return self.alice_behavior if party == "alice" else self.bob_behavior

    def outcome_map(self, party: str) -> dict[Transcript, str]:
        return self.alice_outcome if party == "alice" else self.bob_outcome

    def decision_points(self, party: str) -> list[DecisionPoint]:
        points = []
        for r in range(self.rounds):
            if self.mover(r) != party:
                continue
            for t in itertools.product(*self.alphabets[:r]):
                points.append((r, t))
        return points

    def transcripts(self) -> list[Transcript]:
        return list(itertools.product(*self.alphabets))

    def _validate(self):
        for party in ("alice", "bob"):
            table = self.behavior(party)
            for dp in self.decision_points(party):
                if dp not in table:
                    raise ValidationError(
                        f"{party} behavior misses decision point {dp}"
                    )
                dist = table[dp]
                r = dp[0]
                total = 0.0
                for msg in self.alphabets[r]:
                    p = float(dist.get(msg, 0.0))
                    if p < 0:
                        raise ValidationError(
                            f"{party} behavior at {dp} has negative probability"
                        )
                    total += p
                if abs(total - 1.0) > 1e-12:
                    raise ValidationError(
                        f"{party} behavior at {dp} sums to {total!r}, expected 1"
                    )
        for party in ("alice", "bob"):
            omap = self.outcome_map(party)
            for t in self.transcripts():
                if t not in omap:
                    raise ValidationError(f"{party} outcome map misses transcript {t}")
                if omap[t] not in OUTCOMES:
                    raise ValidationError(
                        f"{party} outcome {omap[t]!r} at {t} not in {OUTCOMES}"
                    )

    def support(self, round_index: int, transcript: Transcript) -> list[str]:
        """Messages the honest mover sends with positive probability."""
        table = self.behavior(self.mover(round_index))
        dist = table[(round_index, transcript)]
        return [m for m in self.alphabets[round_index] if float(dist.get(m, 0.0)) > 0]


@dataclass(frozen=True)
class PureClassicalStrategy:
    """Deterministic choice functions for one party."""

    party: str
    choices: tuple[tuple[DecisionPoint, str], ...]
    outcome: tuple[tuple[Transcript, str], ...]

    def choice(self, round_index: int, transcript: Transcript) -> str:
        for dp, msg in self.choices:
            if dp == (round_index, transcript):
                return msg
        raise KeyError((round_index, transcript))

    def result(self, transcript: Transcript) -> str:
        for t, o in self.outcome:
            if t == transcript:
                return o
        raise KeyError(transcript)


def honest_classical_distribution(c: ClassicalProtocol) -> OutcomeDistribution:
    """Exact joint outcome distribution under the honest behaviors."""
    table = np.zeros((3, 3))
    stack = [((), 1.0)]
    while stack:
        t, p = stack.pop()
        r = len(t)
        if r == c.rounds:
            ia = OUTCOMES.index(c.alice_outcome[t])
            ib = OUTCOMES.index(c.bob_outcome[t])
            table[ia, ib] += p
            continue
        dist = c.behavior(c.mover(r))[(r, t)]
        for msg in c.alphabets[r]:
            q = float(dist.get(msg, 0.0))
            if q > 0:
                stack.append((t + (msg,), p * q))
    return OutcomeDistribution(table)


def is_correct_classical(c: ClassicalProtocol, tol: float = 1e-12) -> bool:
    """Honest play yields the agreed fair bit: mass 1/2 on (0,0) and (1,1)."""
    d = honest_classical_distribution(c).table
    off = d.sum() - d[0, 0] - d[1, 1]
    return off <= tol and abs(d[0, 0] - 0.5) <= tol and abs(d[1, 1] - 0.5) <= tol


def decompose_pure(
    c: ClassicalProtocol, party: str
) -> list[tuple[float, PureClassicalStrategy]]:
    """Unique convex decomposition of a behavioral strategy into pure ones.

    Every combination of positively weighted choices over the party's
    decision points appears once, with the product of its probabilities as
    weight; remixing the result reproduces the behavior tables exactly.
    """
    points = c.decision_points(party)
    table = c.behavior(party)
    outcome = tuple(sorted(c.outcome_map(party).items()))
    options = []
    for dp in points:
        dist = table[dp]
        r = dp[0]
        options.append(
            [(m, float(dist.get(m, 0.0))) for m in c.alphabets[r] if float(dist.get(m, 0.0)) > 0]
        )
    out = []
    for combo in itertools.product(*options):
        weight = 1.0
        for _, p in combo:
            weight *= p
        choices = tuple((dp, msg) for dp, (msg, _) in zip(points, combo))
        out.append((weight, PureClassicalStrategy(party, choices, outcome)))
    return out


def play_pure(
    c: ClassicalProtocol, alice: PureClassicalStrategy, bob: PureClassicalStrategy
) -> tuple[Transcript, str, str]:
    """Deterministic run of two pure strategies: transcript and outcomes."""
    t: Transcript = ()
    for r in range(c.rounds):
        mover = alice if c.mover(r) == "alice" else bob
        t = t + (mover.choice(r, t),)
    return t, alice.result(t), bob.result(t)


@dataclass(frozen=True)
class WinningAnalysis:
    """Result of the zero-sum analysis for one targeted outcome."""

    outcome: str
    party: str | None
    strategy: PureClassicalStrategy | None = field(compare=False, default=None)
    value: float = 0.0


def solve_winning(c: ClassicalProtocol, winner_outcome) -> WinningAnalysis:
    """Find a player who forces the common outcome against honest play.

    Backward induction over the support game tree of the zero-sum game
    "does the common outcome equal ``winner_outcome``?": the candidate
    party picks any honestly possible message, the opponent counters with
    their own support messages.  A value of 1 for a party yields a pure
    strategy whose every play against the opponent's support reaches the
    target, i.e. it forces the honest opponent's outcome with certainty.
    Alice is checked first; ties inside the tree break towards the
    lowest-index message.
    """
    target = str(winner_outcome)
    if target not in ("0", "1"):
        raise ValidationError(f"winner outcome must be 0 or 1, got {winner_outcome!r}")
    d = honest_classical_distribution(c).table
    off = d.sum() - d[0, 0] - d[1, 1]
    if off > 1e-12:
        raise ValidationError(
            "winning analysis requires a correct protocol: honest play puts "
            f"mass {off:.3e} outside the agreeing outcomes"
        )

    def value_for(party: str) -> tuple[float, dict[DecisionPoint, str]]:
        memo: dict[Transcript, float] = {}
        plan: dict[DecisionPoint, str] = {}

        def node(t: Transcript) -> float:
            if t in memo:
                return memo[t]
            r = len(t)
            if r == c.rounds:
                val = 1.0 if c.alice_outcome[t] == target else 0.0
            else:
                support = c.support(r, t)
                children = [(msg, node(t + (msg,))) for msg in support]
                if c.mover(r) == party:
                    best_msg, val = children[0]
                    for msg, v in children[1:]:
                        if v > val:
                            best_msg, val = msg, v
                    plan[(r, t)] = best_msg
                else:
                    val = min(v for _, v in children)
            memo[t] = val
            return val

        return node(()), plan

    for party in ("alice", "bob"):
        value, plan = value_for(party)
        if value >= 1.0:
            choices = []
            for dp in c.decision_points(party):
                fallback = c.support(*dp)[0]
                choices.append((dp, plan.get(dp, fallback)))
            strategy = PureClassicalStrategy(
                party,
                tuple(choices),
                tuple(sorted(c.outcome_map(party).items())),
            )
            return WinningAnalysis(target, party, strategy, 1.0)
    return WinningAnalysis(target, None, None, 0.0)


# -- classical builtins and the exhaustive correct family --------------------


def _uniform(alphabet: Sequence[str]) -> dict[str, float]:
    return {m: 1.0 / len(alphabet) for m in alphabet}


def classical_xor() -> ClassicalProtocol:
    """Both parties announce a fair bit; the result is the XOR."""
    bits = ("0", "1")
    alice_behavior = {(0, ()): _uniform(bits)}
    bob_behavior = {(1, (m,)): _uniform(bits) for m in bits}
    outcome = {
        (a, b): str(int(a) ^ int(b)) for a in bits for b in bits
    }
    return ClassicalProtocol(
        [bits, bits], alice_behavior, bob_behavior, dict(outcome), dict(outcome)
    )


def classical_dictator() -> ClassicalProtocol:
    """Alice announces her coin and the announcement is the result."""
    bits = ("0", "1")
    alice_behavior = {(0, ()): _uniform(bits)}
    outcome = {(a,): a for a in bits}
    return ClassicalProtocol([bits], alice_behavior, {}, dict(outcome), dict(outcome))


CLASSICAL_BUILTINS = {
    "xor": classical_xor,
    "dictator": classical_dictator,
}


def iter_correct_classical_protocols(
    max_rounds: int = 3, probs: Sequence[float] = (0.0, 0.5, 1.0)
) -> Iterator[ClassicalProtocol]:
    """Exhaustive family of correct binary-message protocols.

    Enumerates every protocol with up to ``max_rounds`` alternating binary
    announcements, behavioral entries drawn from ``probs`` and a common
    (agreed) outcome map, and yields those whose honest distribution is
    the fair coin.
    """
    bits = ("0", "1")
    for rounds in range(1, max_rounds + 1):
        dps = [(r, t) for r in range(rounds) for t in itertools.product(bits, repeat=r)]
        leaves = list(itertools.product(bits, repeat=rounds))
        masks = np.array(
            [[(m >> i) & 1 for i in range(len(leaves))] for m in range(2 ** len(leaves))],
            dtype=float,
        )
        for assignment in itertools.product(probs, repeat=len(dps)):
            p_zero = dict(zip(dps, assignment))
            leaf_probs = np.empty(len(leaves))
            for i, leaf in enumerate(leaves):
                p = 1.0
                for r in range(rounds):
                    q = p_zero[(r, leaf[:r])]
                    p *= q if leaf[r] == "0" else 1.0 - q
                leaf_probs[i] = p
            zero_mass = masks @ leaf_probs
            for m in np.nonzero(np.abs(zero_mass - 0.5) < 1e-12)[0]:
                outcome = {
                    leaf: "0" if (int(m) >> i) & 1 else "1"
                    for i, leaf in enumerate(leaves)
                }
                alice_behavior = {}
                bob_behavior = {}
                for dp in dps:
                    dist = {"0": p_zero[dp], "1": 1.0 - p_zero[dp]}
                    r = dp[0]
                    if r % 2 == 0:
                        alice_behavior[dp] = dist
                    else:
                        bob_behavior[dp] = dist
                yield ClassicalProtocol(
                    [bits] * rounds,
                    alice_behavior,
                    bob_behavior,
                    dict(outcome),
                    dict(outcome),
                )
