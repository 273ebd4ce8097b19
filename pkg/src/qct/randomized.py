"""Seeded generators of random states, channels, POVMs and strategies.

Used by the dilation verification (sampled opponents) and by the
randomized test suites.  All draws flow through an explicit PCG64
generator, so identical seeds give identical objects.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .algebra import AlgebraSpec, Channel, Povm, State
from .protocol import OUTCOMES, Strategy


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix, phases fixed)."""
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_pure_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = _ginibre(rng, dim, 1).reshape(-1)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random mixed state of the given rank (full rank by default)."""
    rank = dim if rank is None else min(rank, dim)
    a = _ginibre(rng, dim, rank)
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_kraus_channel(
    rng: np.random.Generator, spec: AlgebraSpec, n_kraus: int = 2
) -> Channel:
    """Random channel on a quantum algebra via a Haar random isometry."""
    dim = spec.dim
    q, _ = np.linalg.qr(_ginibre(rng, dim * n_kraus, dim))
    blocks = q.reshape(dim, n_kraus, dim)
    kraus = tuple(blocks[:, k, :] for k in range(n_kraus))
    return Channel(spec, spec, kraus)


def random_povm(
    rng: np.random.Generator, spec: AlgebraSpec, n_outcomes: int, labels=None
) -> Povm:
    """Random full-rank POVM: normalized positive operators summing to 1."""
    dim = spec.dim
    labels = list(labels) if labels is not None else [str(i) for i in range(n_outcomes)]
    gs = []
    for _ in range(n_outcomes):
        a = _ginibre(rng, dim, dim)
        gs.append(a @ a.conj().T + 1e-6 * np.eye(dim))
    total = np.zeros((dim, dim), dtype=complex)
    for g in gs:
        total += g
    w, v = np.linalg.eigh(total)
    inv_root = (v / np.sqrt(w)) @ v.conj().T
    outcomes = tuple((l, inv_root @ g @ inv_root) for l, g in zip(labels, gs))
    return Povm(spec, outcomes)


def random_projective_povm(
    rng: np.random.Generator, spec: AlgebraSpec, n_outcomes: int, labels=None
) -> Povm:
    """Random projective measurement (ranks may include zero)."""
    dim = spec.dim
    labels = list(labels) if labels is not None else [str(i) for i in range(n_outcomes)]
    u = random_unitary(rng, dim)
    cuts = sorted(rng.integers(0, dim + 1, size=n_outcomes - 1).tolist())
    ranks = np.diff([0] + cuts + [dim])
    outcomes = []
    start = 0
    for label, r in zip(labels, ranks):
        cols = u[:, start : start + r]
        outcomes.append((label, cols @ cols.conj().T))
        start += r
    return Povm(spec, tuple(outcomes))


def random_strategy(
    rng: np.random.Generator,
    party: str,
    private_dim: int,
    mailbox_dim: int,
    n_moves: int,
    prepares: bool,
    init_rank: int = 2,
    n_kraus: int = 2,
    projective: bool = False,
) -> Strategy:
    """Random (generally mixed) strategy on purely quantum algebras."""
    priv = AlgebraSpec.quantum(private_dim)
    mail = AlgebraSpec.quantum(mailbox_dim)
    comp = priv.tensor(mail) if party == "alice" else mail.tensor(priv)
    init_spec = comp if prepares else priv
    initial = State(init_spec, random_density(rng, init_spec.dim, rank=init_rank))
    moves = tuple(random_kraus_channel(rng, comp, n_kraus) for _ in range(n_moves))
    maker = random_projective_povm if projective else random_povm
    final = maker(rng, priv, 3, labels=OUTCOMES)
    return Strategy(party, priv, mail, initial, moves, final)


def random_opponent_for(
    rng: np.random.Generator,
    s: Strategy,
    private_dim: int = 2,
    n_kraus: int = 2,
) -> Strategy:
    """Random opposing strategy fitting the alternation against ``s``.

    The mailbox must already be purely quantum (dilated setting).  When
    ``s`` prepares the mailbox the opponent opens the exchange and plays
    as many moves as ``s``; otherwise the opponent prepares and plays one
    move fewer (or equal for move counts of zero).
    """
    other = "bob" if s.party == "alice" else "alice"
    if s.prepares_mailbox:
        n_moves = len(s.moves)
        prepares = False
    else:
        n_moves = max(len(s.moves) - 1, 0)
        prepares = True
    return random_strategy(
        rng,
        other,
        private_dim,
        s.mailbox_algebra.dim,
        n_moves,
        prepares,
        init_rank=1 if prepares else 2,
        n_kraus=n_kraus,
    )
