"""Turn-based two-party protocol engine.

A protocol couples Alice's and Bob's strategies through a shared mailbox
algebra.  The composite system is ordered Alice (x) Mailbox (x) Bob; the
first mover (Alice by default) prepares her notepad together with the
mailbox, the opponent prepares the notepad only, and the parties then
alternate channel moves starting with the opponent of the first mover.
Alice's moves act on notepad (x) mailbox, Bob's on mailbox (x) notepad.

The exact engine evolves the full density operator and reads the joint
outcome table off the two final three-outcome measurements; sampling is a
seeded multinomial front end over that exact distribution (PCG64 streams,
see `sample`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import AlgebraSpec, Channel, Povm, State
from .errors import ProtocolError, ValidationError

OUTCOMES = ("0", "1", "abort")
ABORT = "abort"

PROB_CLIP = 1e-12
PROB_SUM_TOL = 1e-9

# Below this fill fraction a Kraus operator is applied via sparse kron;
# the protocol builders produce mostly permutation-like operators.
SPARSE_DENSITY_CUTOFF = 0.125


def outcome_index(label) -> int:
    label = str(label)
    if label not in OUTCOMES:
        raise ValidationError(f"outcome label must be one of {OUTCOMES}, got {label!r}")
    return OUTCOMES.index(label)


@dataclass(frozen=True)
class Strategy:
    """One party's complete protocol data.

    ``initial`` lives on notepad (x) mailbox for the party preparing the
    mailbox and on the notepad alone otherwise; each move is a channel on
    the party's composite (notepad (x) mailbox for Alice, mailbox (x)
    notepad for Bob); the final measurement is a POVM on the notepad with
    the outcome labels "0", "1", "abort".
    """

    party: str
    private_algebra: AlgebraSpec
    mailbox_algebra: AlgebraSpec
    initial: State
    moves: tuple[Channel, ...]
    final_measurement: Povm

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise ValidationError(f"party must be 'alice' or 'bob', got {self.party!r}")
        if self.final_measurement.labels != OUTCOMES:
            raise ValidationError(
                f"final measurement labels must be {OUTCOMES}, "
                f"got {self.final_measurement.labels}"
            )
        if self.final_measurement.algebra != self.private_algebra:
            raise ValidationError(
                "final measurement must act on the party's private algebra"
            )
        comp = self.composite_algebra
        for i, move in enumerate(self.moves):
            if move.input != comp or move.output != comp:
                raise ValidationError(
                    f"move {i} must be a channel on the party's private/mailbox "
                    f"composite (private and mailbox algebras of all moves must agree)"
                )
        if self.initial.algebra == comp:
            object.__setattr__(self, "_prepares", True)
        elif self.initial.algebra == self.private_algebra:
            object.__setattr__(self, "_prepares", False)
        else:
            raise ValidationError(
                "initial state must live on the private algebra or on the "
                "private/mailbox composite"
            )

    @property
    def composite_algebra(self) -> AlgebraSpec:
        if self.party == "alice":
            return self.private_algebra.tensor(self.mailbox_algebra)
        return self.mailbox_algebra.tensor(self.private_algebra)

    @property
    def prepares_mailbox(self) -> bool:
        return self._prepares  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Protocol:
    """A pair of strategies over a common mailbox, run for ``rounds`` moves."""

    alice: Strategy
    bob: Strategy
    mailbox: AlgebraSpec
    rounds: int
    first_mover: str = "alice"

    def __post_init__(self):
        if self.first_mover not in ("alice", "bob"):
            raise ProtocolError(f"first_mover must be 'alice' or 'bob'")
        if self.alice.party != "alice" or self.bob.party != "bob":
            raise ProtocolError("strategies are assigned to the wrong parties")
        if self.alice.mailbox_algebra != self.mailbox or self.bob.mailbox_algebra != self.mailbox:
            raise ProtocolError("strategy mailbox algebras do not match the protocol")
        preparer = self.alice if self.first_mover == "alice" else self.bob
        opener = self.bob if self.first_mover == "alice" else self.alice
        if not preparer.prepares_mailbox:
            raise ProtocolError(
                f"{preparer.party} moves first and must prepare notepad and mailbox"
            )
        if opener.prepares_mailbox:
            raise ProtocolError(
                f"{opener.party} does not move first and must prepare the notepad only"
            )
        gap = len(opener.moves) - len(preparer.moves)
        if gap not in (0, 1):
            raise ProtocolError(
                f"alternation mismatch: {opener.party} (moving first after the "
                f"preparation) has {len(opener.moves)} moves, {preparer.party} "
                f"has {len(preparer.moves)}"
            )
        total = len(self.alice.moves) + len(self.bob.moves)
        if self.rounds != total:
            raise ProtocolError(
                f"protocol declares {self.rounds} rounds but strategies hold "
                f"{total} moves"
            )

    def move_sequence(self) -> list[tuple[str, Channel]]:
        """Moves in execution order, alternating from the non-preparer."""
        turn = "bob" if self.first_mover == "alice" else "alice"
        ia = ib = 0
        seq = []
        for _ in range(self.rounds):
            if turn == "alice":
                seq.append(("alice", self.alice.moves[ia]))
                ia += 1
            else:
                seq.append(("bob", self.bob.moves[ib]))
                ib += 1
            turn = "alice" if turn == "bob" else "bob"
        return seq


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint probability table over (alice, bob) outcomes in {0, 1, abort}."""

    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.shape != (3, 3):
            raise ValidationError(f"outcome table has shape {t.shape}, expected (3, 3)")
        if t.min() < -PROB_CLIP:
            raise ValidationError(
                f"outcome table has entry {t.min():.3e} below -{PROB_CLIP:g}"
            )
        t = np.clip(t, 0.0, None)
        if abs(t.sum() - 1.0) > PROB_SUM_TOL:
            raise ValidationError(
                f"outcome table sums to {t.sum():.12f}, expected 1 within {PROB_SUM_TOL:g}"
            )
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def prob(self, alice_outcome, bob_outcome) -> float:
        return float(
            self.table[outcome_index(alice_outcome), outcome_index(bob_outcome)]
        )

    def alice_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def bob_marginal(self) -> np.ndarray:
        return self.table.sum(axis=0)


class PayoffTable:
    """Payoff pairs (alice, bob) for each of the nine outcome cells."""

    def __init__(self, entries: dict[tuple[str, str], tuple[float, float]]):
        cells = {(a, b) for a in OUTCOMES for b in OUTCOMES}
        missing = cells - set(entries)
        if missing:
            raise ValidationError(f"payoff table misses cells {sorted(missing)}")
        self.entries = {
            (a, b): (float(pa), float(pb)) for (a, b), (pa, pb) in entries.items()
        }

    def __getitem__(self, cell: tuple[str, str]) -> tuple[float, float]:
        return self.entries[cell]


def coin_payoff() -> PayoffTable:
    """Alice is paid on the agreed outcome 0, Bob on 1, draws pay nobody."""
    entries = {(a, b): (0.0, 0.0) for a in OUTCOMES for b in OUTCOMES}
    entries[("0", "0")] = (1.0, 0.0)
    entries[("1", "1")] = (0.0, 1.0)
    return PayoffTable(entries)


def zero_sum_payoff() -> PayoffTable:
    """Zero-sum variant: winning on your bit costs the opponent a unit."""
    entries = {(a, b): (0.0, 0.0) for a in OUTCOMES for b in OUTCOMES}
    entries[("0", "0")] = (1.0, -1.0)
    entries[("1", "1")] = (-1.0, 1.0)
    return PayoffTable(entries)


# -- the exact engine ------------------------------------------------------


def _apply_lifted(
    rho: np.ndarray,
    kraus: tuple[np.ndarray, ...],
    act_left: bool,
    d_act: int,
    d_byst: int,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Apply sum_k (K (x) 1) rho (K (x) 1)^dag with K on one contiguous side.

    Sparse permutation-like Kraus operators (the common case in the
    protocol builders) are applied by gathering and scattering the
    populated blocks directly; dense operators go through grouped
    tensordot contractions.  ``out`` may supply a reusable result buffer
    (distinct from ``rho``).
    """
    dim = d_act * d_byst
    othr = np.arange(d_byst)

    def permutation_sandwich(rows, cols, vals):
        # full permutation K: the sandwich is a weighted reindexing of rho
        source = np.empty(d_act, dtype=np.intp)
        source[rows] = cols
        weight = np.empty(d_act, dtype=complex)
        weight[rows] = vals
        if act_left:
            p = (source[:, None] * d_byst + othr).reshape(-1)
            w = np.repeat(weight, d_byst)
        else:
            p = (othr[:, None] * d_act + source).reshape(-1)
            w = np.tile(weight, d_byst)
        g = rho[p][:, p]
        g *= w[:, None]
        g *= w.conj()[None, :]
        return g

    nonzeros = [np.nonzero(k) for k in kraus]
    if len(kraus) == 1 and nonzeros[0][0].size == d_act and np.unique(
        nonzeros[0][0]
    ).size == d_act:
        rows, cols = nonzeros[0]
        return permutation_sandwich(rows, cols, kraus[0][rows, cols])

    if out is None:
        out = np.zeros((dim, dim), dtype=complex)
    else:
        out.fill(0)
    for k, (rows, cols) in zip(kraus, nonzeros):
        if rows.size == 0:
            continue
        sparse_ok = (
            rows.size / k.size <= SPARSE_DENSITY_CUTOFF
            and np.unique(rows).size == rows.size
        )
        if sparse_ok and rows.size == d_act:
            out += permutation_sandwich(rows, cols, k[rows, cols])
        elif sparse_ok:
            vals = k[rows, cols]
            if act_left:
                idx_in = (cols[:, None] * d_byst + othr).reshape(-1)
                idx_out = (rows[:, None] * d_byst + othr).reshape(-1)
                weights = np.repeat(vals, d_byst)
            else:
                idx_in = (othr[:, None] * d_act + cols).reshape(-1)
                idx_out = (othr[:, None] * d_act + rows).reshape(-1)
                weights = np.tile(vals, d_byst)
            g = rho[np.ix_(idx_in, idx_in)]
            g *= weights[:, None]
            g *= weights.conj()[None, :]
            out[np.ix_(idx_out, idx_out)] += g
        elif act_left:
            r4 = rho.reshape(d_act, d_byst, d_act, d_byst)
            tmp = np.tensordot(k, r4, axes=(1, 0))
            tmp = np.tensordot(tmp, k.conj(), axes=(2, 1))
            out += tmp.transpose(0, 1, 3, 2).reshape(dim, dim)
        else:
            r4 = rho.reshape(d_byst, d_act, d_byst, d_act)
            tmp = np.tensordot(k, r4, axes=(1, 1))
            tmp = np.tensordot(tmp, k.conj(), axes=(3, 1))
            out += tmp.transpose(1, 0, 2, 3).reshape(dim, dim)
    return out


def run_exact(p: Protocol) -> OutcomeDistribution:
    """Exact joint outcome distribution of the protocol.

    Evolves rho^(0) = rho_A^(0) (x) rho_B^(0) through the alternating
    lifted moves and evaluates P(a, b) = tr[(E_A^(a) (x) 1 (x) E_B^(b))
    rho^(N)] for all nine outcome pairs.
    """
    d_a = p.alice.private_algebra.dim
    d_m = p.mailbox.dim
    d_b = p.bob.private_algebra.dim
    left, right = p.alice.initial.matrix, p.bob.initial.matrix
    # kron via broadcasting: noticeably faster than np.kron at these sizes
    rho = (
        left[:, None, :, None] * right[None, :, None, :]
    ).reshape(left.shape[0] * right.shape[0], -1)
    scratch = None
    for party, move in p.move_sequence():
        if party == "alice":
            nxt = _apply_lifted(rho, move.kraus, True, d_a * d_m, d_b, out=scratch)
        else:
            nxt = _apply_lifted(rho, move.kraus, False, d_m * d_b, d_a, out=scratch)
        scratch, rho = rho, nxt
    reduced = linalg.partial_trace(rho, [d_a, d_m, d_b], keep=[0, 2])
    r4 = reduced.reshape(d_a, d_b, d_a, d_b)
    table = np.zeros((3, 3))
    for i, (_, ea) in enumerate(p.alice.final_measurement.outcomes):
        for j, (_, eb) in enumerate(p.bob.final_measurement.outcomes):
            # tr[(EA (x) EB) reduced] with reduced[(x,y),(i,j)]
            val = np.einsum("ix,jy,xyij->", ea, eb, r4)
            table[i, j] = float(val.real)
    return OutcomeDistribution(table)


def sample(p: Protocol, n: int, seed: int) -> np.ndarray:
    """Counts of ``n`` i.i.d. protocol outcomes, deterministic in ``seed``.

    Draws a multinomial from the exact distribution using a PCG64 stream,
    so equal seeds give identical tables across runs and platforms.
    """
    if n < 1:
        raise ValidationError(f"sample size must be at least 1, got {n}")
    dist = run_exact(p)
    probs = dist.table.reshape(-1)
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    counts = rng.multinomial(int(n), probs)
    return counts.reshape(3, 3)


def check_correct(d: OutcomeDistribution, tol: float = 1e-9) -> bool:
    """Both parties agree on a fair bit: P(0,0) and P(1,1) equal 1/2."""
    return (
        abs(d.prob("0", "0") - 0.5) <= tol and abs(d.prob("1", "1") - 0.5) <= tol
    )


def payoff(d: OutcomeDistribution, t: PayoffTable) -> tuple[float, float]:
    """Expected payoffs (alice, bob) of the distribution under the table."""
    pa = pb = 0.0
    for i, a in enumerate(OUTCOMES):
        for j, b in enumerate(OUTCOMES):
            va, vb = t[(a, b)]
            pa += d.table[i, j] * va
            pb += d.table[i, j] * vb
    return pa, pb


def forcing_probability(
    p: Protocol, cheater: str, target, replacement: Strategy
) -> float:
    """Probability that the replacement strategy makes both outcomes ``target``.

    The opposing strategy stays honest; the replacement may use an
    arbitrary private algebra but must fit the protocol's mailbox and
    round structure.  The returned value minus 1/2 is the cheat's bias
    contribution.
    """
    t_label = str(target)
    if t_label not in ("0", "1"):
        raise ValidationError(f"target outcome must be 0 or 1, got {target!r}")
    if cheater not in ("alice", "bob"):
        raise ValidationError(f"cheater must be 'alice' or 'bob', got {cheater!r}")
    if replacement.party != cheater:
        raise ProtocolError(
            f"replacement strategy is for {replacement.party!r}, expected {cheater!r}"
        )
    if replacement.mailbox_algebra != p.mailbox:
        raise ProtocolError("replacement mailbox algebra does not match the protocol")
    honest = p.bob if cheater == "alice" else p.alice
    if len(replacement.moves) != len((p.alice if cheater == "alice" else p.bob).moves):
        raise ProtocolError(
            "replacement strategy must provide the same number of moves"
        )
    if cheater == "alice":
        modified = Protocol(replacement, honest, p.mailbox, p.rounds, p.first_mover)
    else:
        modified = Protocol(honest, replacement, p.mailbox, p.rounds, p.first_mover)
    return run_exact(modified).prob(t_label, t_label)
