"""Constructive dilations: every strategy has a unitary normal form.

Any channel is a unitary on system (x) ancilla followed by tracing the
ancilla out; any POVM is a projective measurement on system (x) ancilla;
any mixed state is the reduction of a pure one.  Chaining the three turns
an arbitrary strategy (hybrid algebras, mixed preparation, noisy moves,
general POVM) into one with a pure initial state, unitary moves and a
projective final measurement on an enlarged quantum notepad, without
changing the joint outcome distribution against any opposing strategy.
That equality is checked empirically by `normal_form_deviation`.

Tensor slot layout of the enlarged notepad: the original notepad first,
then one ancilla per dilated ingredient in protocol order (preparation,
moves, final measurement).  Each dilated move touches only the original
system, the mailbox and its own ancilla slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .algebra import AlgebraSpec, Channel, Povm, State, pure_state
from .errors import ValidationError
from .protocol import Protocol, Strategy
from .linalg import dagger

UNITARY_TOL = 1e-9
PURITY_TOL = 1e-9
RANK_TOL = 1e-9


@dataclass(frozen=True)
class StinespringForm:
    """Channel as ancilla coupling: T(rho) = tr_anc V (rho (x) |phi><phi|) V^dag."""

    ancilla_dim: int
    ancilla_state: np.ndarray
    unitary: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.unitary, dtype=complex)
        dev = linalg.max_abs(dagger(v) @ v - np.eye(v.shape[0]))
        if v.shape[0] != v.shape[1] or dev > UNITARY_TOL:
            raise ValidationError(
                f"dilation matrix is not unitary within {UNITARY_TOL:g} "
                f"(max deviation {dev:.3e})"
            )
        phi = np.asarray(self.ancilla_state, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(phi) - 1.0) > UNITARY_TOL:
            raise ValidationError("ancilla state is not normalized")
        object.__setattr__(self, "unitary", v)
        object.__setattr__(self, "ancilla_state", phi)

    @property
    def system_dim(self) -> int:
        return self.unitary.shape[0] // self.ancilla_dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Reconstruct the channel action (used by the verification tests)."""
        joint = np.kron(rho, linalg.projector(self.ancilla_state))
        evolved = self.unitary @ joint @ dagger(self.unitary)
        return linalg.partial_trace(evolved, [self.system_dim, self.ancilla_dim], [0])


@dataclass(frozen=True)
class NaimarkForm:
    """POVM as projective readout on system (x) ancilla."""

    ancilla_dim: int
    ancilla_state: np.ndarray
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        phi = np.asarray(self.ancilla_state, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(phi) - 1.0) > UNITARY_TOL:
            raise ValidationError("ancilla state is not normalized")
        projs = tuple(np.asarray(p, dtype=complex) for p in self.projectors)
        dim = projs[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(projs):
            herm = linalg.max_abs(p - dagger(p))
            idem = linalg.max_abs(p @ p - p)
            if herm > UNITARY_TOL or idem > UNITARY_TOL:
                raise ValidationError(
                    f"extension element {i} is not an orthogonal projection "
                    f"(hermiticity {herm:.3e}, idempotency {idem:.3e})"
                )
            total += p
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                cross = linalg.max_abs(projs[i] @ projs[j])
                if cross > UNITARY_TOL:
                    raise ValidationError(
                        f"extension elements {i} and {j} are not orthogonal "
                        f"(max |P_i P_j| = {cross:.3e})"
                    )
        dev = linalg.max_abs(total - np.eye(dim))
        if dev > UNITARY_TOL:
            raise ValidationError(
                f"extension elements do not sum to the identity (deviation {dev:.3e})"
            )
        object.__setattr__(self, "ancilla_state", phi)
        object.__setattr__(self, "projectors", projs)

    def probability(self, index: int, rho: np.ndarray) -> float:
        joint = np.kron(rho, linalg.projector(self.ancilla_state))
        return float(np.trace(self.projectors[index] @ joint).real)


@dataclass(frozen=True)
class PureStrategy(Strategy):
    """Strategy in unitary normal form.

    The initial state is pure, every move is a single unitary Kraus
    operator and the final measurement is projective; such strategies
    admit no proper convex decomposition.
    """

    def __post_init__(self):
        super().__post_init__()
        purity = float(np.trace(self.initial.matrix @ self.initial.matrix).real)
        if purity < 1.0 - PURITY_TOL:
            raise ValidationError(
                f"pure strategy requires a rank-one initial state "
                f"(tr rho^2 = {purity:.12f})"
            )
        for i, move in enumerate(self.moves):
            if len(move.kraus) != 1:
                raise ValidationError(f"pure strategy move {i} is not unitary")
            k = move.kraus[0]
            dev = linalg.max_abs(dagger(k) @ k - np.eye(k.shape[1]))
            if dev > UNITARY_TOL:
                raise ValidationError(
                    f"pure strategy move {i} deviates from unitarity by {dev:.3e}"
                )
        for label, eff in self.final_measurement.outcomes:
            dev = linalg.max_abs(eff @ eff - eff)
            if dev > UNITARY_TOL:
                raise ValidationError(
                    f"pure strategy effect {label!r} is not a projection "
                    f"(max |E^2 - E| = {dev:.3e})"
                )


# -- the three dilation primitives ------------------------------------------


def purify(rho, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Pure vector on system (x) ancilla whose reduction is the given state.

    The ancilla dimension is the numerical rank of the state (eigenvalues
    above ``rank_tol``); eigenvalues are taken in descending order, so a
    pure input yields a dimension-1 ancilla.
    """
    m = rho.matrix if isinstance(rho, State) else np.asarray(rho, dtype=complex)
    w, v = linalg.hermitian_eig(m)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    rank = max(int(np.sum(w > rank_tol)), 1)
    weights = np.sqrt(np.clip(w[:rank], 0.0, None))
    return (v[:, :rank] * weights).reshape(-1)


def _complete_isometry_interleaved(w: np.ndarray, block: int) -> np.ndarray:
    """Unitary whose column j*block equals the isometry column j.

    The isometry's columns are the ones paired with the ancilla reference
    state |0>, which sit at stride ``block`` in the system (x) ancilla
    column ordering.
    """
    full = linalg.complete_isometry(w)
    rows, cols = w.shape
    out = np.empty_like(full)
    spare = iter(range(cols, rows))
    for new in range(rows):
        if new % block == 0 and new // block < cols:
            out[:, new] = full[:, new // block]
        else:
            out[:, new] = full[:, next(spare)]
    return out


def stinespring(t: Channel) -> StinespringForm:
    """Unitary ancilla representation of a channel.

    Hybrid channels are dilated in their enveloping matrix algebras (the
    stored Kraus operators already act there).  The ancilla dimension is
    the number of Kraus operators and the reference state is |0>.
    """
    d_in, d_out = t.input.dim, t.output.dim
    if d_in != d_out:
        raise ValidationError(
            "stinespring dilation requires equal input and output dimensions"
        )
    kraus = np.stack(t.kraus)  # (l, d, d)
    l = kraus.shape[0]
    isometry = kraus.transpose(1, 0, 2).reshape(d_in * l, d_in)
    unitary = _complete_isometry_interleaved(isometry, l)
    return StinespringForm(l, linalg.basis_vector(l, 0), unitary)


def naimark(e: Povm) -> NaimarkForm:
    """Projective extension of a POVM.

    Already-projective POVMs embed with a trivial ancilla; otherwise the
    square roots of the effects form an isometry into system (x) pointer
    and conjugating the pointer projections back yields the extension.
    """
    dim = e.algebra.dim
    effects = [eff for _, eff in e.outcomes]
    projective = all(linalg.max_abs(m @ m - m) <= UNITARY_TOL for m in effects)
    if projective:
        return NaimarkForm(1, linalg.basis_vector(1, 0), tuple(effects))
    n = len(effects)
    roots = np.stack([linalg.psd_sqrt(m) for m in effects])  # (n, d, d)
    isometry = roots.transpose(1, 0, 2).reshape(dim * n, dim)
    unitary = _complete_isometry_interleaved(isometry, n)
    projectors = []
    for x in range(n):
        pointer = np.kron(np.eye(dim), linalg.projector(linalg.basis_vector(n, x)))
        projectors.append(dagger(unitary) @ pointer @ unitary)
    return NaimarkForm(n, linalg.basis_vector(n, 0), tuple(projectors))


# -- whole-strategy purification ---------------------------------------------


def embed_quantum(s: Strategy) -> Strategy:
    """Retype a strategy on the enveloping quantum algebras.

    The matrices are unchanged; only the block masks are dropped.  This is
    the extension step that precedes dilation and is also applied to
    opponents so that normal-form comparisons share one mailbox algebra.
    """
    priv = AlgebraSpec.quantum(s.private_algebra.dim)
    mail = AlgebraSpec.quantum(s.mailbox_algebra.dim)
    comp = priv.tensor(mail) if s.party == "alice" else mail.tensor(priv)
    initial_spec = comp if s.prepares_mailbox else priv
    cls = PureStrategy if isinstance(s, PureStrategy) else Strategy
    return cls(
        s.party,
        priv,
        mail,
        State(initial_spec, s.initial.matrix),
        tuple(Channel(comp, comp, mv.kraus) for mv in s.moves),
        Povm(priv, tuple(s.final_measurement.outcomes)),
    )


def unitary_normal_form(s: Strategy) -> PureStrategy:
    """Replace a strategy by an equivalent pure one on an enlarged notepad.

    The preparation is purified, every move gets its unitary ancilla
    representation, the final POVM its projective extension; ancillas are
    laid out in dedicated tensor slots so each dilated move acts on its
    own slot and the identity elsewhere.  The result produces the same
    outcome distribution as the input against every opposing strategy.
    """
    d_p = s.private_algebra.dim
    d_m = s.mailbox_algebra.dim
    prepares = s.prepares_mailbox

    phi0 = purify(s.initial)
    sys_dim = d_p * d_m if prepares else d_p
    l0 = phi0.size // sys_dim
    forms = [stinespring(mv) for mv in s.moves]
    extension = naimark(s.final_measurement)

    anc_dims = [l0] + [f.ancilla_dim for f in forms] + [extension.ancilla_dim]
    priv_dims = [d_p] + anc_dims
    new_private = AlgebraSpec.quantum(d_p * int(np.prod(anc_dims)))
    mail = AlgebraSpec.quantum(d_m)
    if s.party == "alice":
        comp_dims = priv_dims + [d_m]
        pos_p, pos_m = 0, len(comp_dims) - 1
        pos_anc = lambda j: 1 + j  # noqa: E731 - slot of the j-th ancilla
        comp_spec = new_private.tensor(mail)
    else:
        comp_dims = [d_m] + priv_dims
        pos_p, pos_m = 1, 0
        pos_anc = lambda j: 2 + j  # noqa: E731
        comp_spec = mail.tensor(new_private)

    # initial vector: purification in its slot, reference states elsewhere
    pieces = [f.ancilla_state for f in forms] + [extension.ancilla_state]
    if prepares:
        vec = phi0
        for piece in pieces:
            vec = np.kron(vec, piece)
        if s.party == "alice":
            # legs [P, M, L0, ...] -> [P, L0, ..., M]
            src_dims = [d_p, d_m] + anc_dims
            order = [0] + list(range(2, len(src_dims))) + [1]
            vec = linalg.permute_vector_factors(vec, src_dims, order)
        # a bob preparation purifies on M (x) P, which already leads the layout
        initial = pure_state(comp_spec, vec)
    else:
        vec = phi0
        for piece in pieces:
            vec = np.kron(vec, piece)
        initial = pure_state(new_private, vec)

    moves = []
    for j, form in enumerate(forms):
        v = form.unitary  # on (P (x) M) (x) L_j for alice, (M (x) P) (x) L_j for bob
        if s.party == "alice":
            positions = [pos_p, pos_m, pos_anc(1 + j)]
        else:
            positions = [pos_m, pos_p, pos_anc(1 + j)]
        lifted = linalg.embed_factors(v, positions, comp_dims)
        moves.append(Channel(comp_spec, comp_spec, (lifted,)))

    # effects act on the enlarged notepad alone: original system plus the
    # measurement pointer in the last ancilla slot
    effects = []
    for (label, _), proj in zip(s.final_measurement.outcomes, extension.projectors):
        lifted = linalg.embed_factors(proj, [0, len(priv_dims) - 1], priv_dims)
        effects.append((label, lifted))
    final = Povm(new_private, tuple(effects))

    return PureStrategy(s.party, new_private, mail, initial, tuple(moves), final)


def normal_form_deviation(
    original: Strategy,
    pure: PureStrategy,
    opponent: Strategy,
    first_mover: str = "alice",
) -> float:
    """Max entrywise gap between outcome tables with and without dilation.

    The opponent must be typed on the enveloping quantum mailbox (use
    `embed_quantum`); the original strategy is embedded likewise before
    the comparison, which leaves its distribution untouched.
    """
    from .protocol import run_exact

    base = embed_quantum(original)
    rounds = len(original.moves) + len(opponent.moves)
    if original.party == "alice":
        before = Protocol(base, opponent, base.mailbox_algebra, rounds, first_mover)
        after = Protocol(pure, opponent, pure.mailbox_algebra, rounds, first_mover)
    else:
        before = Protocol(opponent, base, base.mailbox_algebra, rounds, first_mover)
        after = Protocol(opponent, pure, pure.mailbox_algebra, rounds, first_mover)
    return linalg.max_abs(run_exact(before).table - run_exact(after).table)
