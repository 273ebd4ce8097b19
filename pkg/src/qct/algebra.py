"""Hybrid observable algebras and the objects living on them.

An algebra is described by an ordered list of classical blocks, each with
a label and a quantum dimension: operators are matrices on the enveloping
space (side = sum of block dimensions) that vanish outside the blocks.
Purely quantum algebras have a single block, purely classical ones have
quantum dimension 1 everywhere.

Tensor products of algebras keep the enveloping Kronecker index order
(left factor outermost), so a composite's blocks are generally *not*
contiguous index ranges; each spec therefore exposes a per-basis-index
sector array from which the block mask is derived.

States are density operators respecting the block mask, POVMs are
block-diagonal effects summing to the identity, and channels are given by
Kraus operators on the enveloping spaces (completely positive by
construction, trace preservation and block-structure preservation are
validated at construction time).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, InternalError, ValidationError

HERMITIAN_TOL = 1e-9
EIGENVALUE_TOL = 1e-9
TRACE_TOL = 1e-9
BLOCK_TOL = 1e-9
PROB_SUM_TOL = 1e-9
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class AlgebraSpec:
    """Ordered block description of a hybrid algebra C(X) (x) B(H)."""

    blocks: tuple[tuple[str, int], ...]
    factors: tuple["AlgebraSpec", ...] = ()

    def __post_init__(self):
        if not self.blocks:
            raise ValidationError("algebra must have at least one block")
        labels = [label for label, _ in self.blocks]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"algebra block labels are not unique: {labels}")
        for label, dim in self.blocks:
            if int(dim) < 1:
                raise ValidationError(
                    f"algebra block {label!r} has quantum dimension {dim} < 1"
                )

    # -- constructors ---------------------------------------------------

    @staticmethod
    def quantum(dim: int, label: str = "q") -> "AlgebraSpec":
        """Purely quantum algebra B(C^dim): a single block."""
        return AlgebraSpec(((label, int(dim)),))

    @staticmethod
    def classical(labels: Sequence[str]) -> "AlgebraSpec":
        """Purely classical algebra C(X): one dimension-1 block per label."""
        return AlgebraSpec(tuple((str(l), 1) for l in labels))

    @staticmethod
    def hybrid(blocks: Sequence[tuple[str, int]]) -> "AlgebraSpec":
        return AlgebraSpec(tuple((str(l), int(d)) for l, d in blocks))

    def tensor(self, other: "AlgebraSpec") -> "AlgebraSpec":
        """Composite algebra; blocks are label pairs in lexicographic order."""
        blocks = tuple(
            (f"{la},{lb}", da * db)
            for la, da in self.blocks
            for lb, db in other.blocks
        )
        return AlgebraSpec(blocks, factors=(self, other))

    # -- derived structure ----------------------------------------------

    @property
    def dim(self) -> int:
        return sum(d for _, d in self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.blocks)

    @property
    def is_quantum(self) -> bool:
        return len(self.blocks) == 1

    @property
    def is_classical(self) -> bool:
        return all(d == 1 for _, d in self.blocks)

    def sectors(self) -> np.ndarray:
        """Block index of every enveloping basis index."""
        return _sectors(self)

    def block_mask(self) -> np.ndarray:
        """Boolean matrix marking the entries an element may occupy."""
        s = self.sectors()
        return s[:, None] == s[None, :]

    def block_indices(self, block: int) -> np.ndarray:
        """Enveloping basis indices belonging to the given block."""
        return np.nonzero(self.sectors() == block)[0]


@functools.lru_cache(maxsize=None)
def _sectors(spec: AlgebraSpec) -> np.ndarray:
    if spec.factors:
        left, right = spec.factors
        sa, sb = _sectors(left), _sectors(right)
        out = (sa[:, None] * right.num_blocks + sb[None, :]).reshape(-1)
    else:
        out = np.repeat(np.arange(len(spec.blocks)), [d for _, d in spec.blocks])
    out.setflags(write=False)
    return out


def off_block_mass(matrix: np.ndarray, spec: AlgebraSpec) -> float:
    """Largest absolute entry outside the algebra's blocks."""
    outside = np.asarray(matrix)[~spec.block_mask()]
    return float(np.max(np.abs(outside))) if outside.size else 0.0


def _check_matrix(matrix: np.ndarray, dim: int, what: str) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (dim, dim):
        raise DimensionError(f"{what} has shape {m.shape}, expected ({dim}, {dim})")
    if not np.all(np.isfinite(m.view(float))):
        raise ValidationError(f"{what} contains non-finite entries")
    return m


@dataclass(frozen=True)
class State:
    """Density operator respecting an algebra's block structure."""

    algebra: AlgebraSpec
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = _check_matrix(self.matrix, self.algebra.dim, "state matrix")
        dev = linalg.max_abs(m - linalg.dagger(m))
        if dev > HERMITIAN_TOL:
            raise ValidationError(
                f"state is not Hermitian within {HERMITIAN_TOL:g} (max deviation {dev:.3e})"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(
                f"state trace {tr.real:.12f} differs from 1 by more than {TRACE_TOL:g}"
            )
        low = float(np.linalg.eigvalsh((m + linalg.dagger(m)) / 2).min())
        if low < -EIGENVALUE_TOL:
            raise ValidationError(
                f"state has eigenvalue {low:.3e} below -{EIGENVALUE_TOL:g}"
            )
        off = off_block_mass(m, self.algebra)
        if off > BLOCK_TOL:
            raise ValidationError(
                f"state has off-block mass {off:.3e} exceeding {BLOCK_TOL:g}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.algebra.dim


def pure_state(algebra: AlgebraSpec, vec: np.ndarray) -> State:
    """State |v><v| / <v|v> on the given algebra."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return State(algebra, linalg.projector(v) / float(np.vdot(v, v).real))


@dataclass(frozen=True)
class Povm:
    """Generalized observable: labeled effects summing to the identity."""

    algebra: AlgebraSpec
    outcomes: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ValidationError("POVM must have at least one outcome")
        labels = [label for label, _ in self.outcomes]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"POVM outcome labels are not unique: {labels}")
        dim = self.algebra.dim
        total = np.zeros((dim, dim), dtype=complex)
        checked = []
        for label, effect in self.outcomes:
            m = _check_matrix(effect, dim, f"effect {label!r}")
            dev = linalg.max_abs(m - linalg.dagger(m))
            if dev > HERMITIAN_TOL:
                raise ValidationError(
                    f"effect {label!r} is not Hermitian within {HERMITIAN_TOL:g} "
                    f"(max deviation {dev:.3e})"
                )
            low = float(np.linalg.eigvalsh((m + linalg.dagger(m)) / 2).min())
            if low < -EIGENVALUE_TOL:
                raise ValidationError(
                    f"effect {label!r} has eigenvalue {low:.3e} below -{EIGENVALUE_TOL:g}"
                )
            off = off_block_mass(m, self.algebra)
            if off > BLOCK_TOL:
                raise ValidationError(
                    f"effect {label!r} has off-block mass {off:.3e} exceeding {BLOCK_TOL:g}"
                )
            total += m
            checked.append((str(label), m))
        dev = linalg.max_abs(total - np.eye(dim))
        if dev > PROB_SUM_TOL:
            raise ValidationError(
                f"POVM effects sum deviates from identity by {dev:.3e} "
                f"(tolerance {PROB_SUM_TOL:g})"
            )
        object.__setattr__(self, "outcomes", tuple(checked))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    def effect(self, label: str) -> np.ndarray:
        for l, m in self.outcomes:
            if l == label:
                return m
        raise KeyError(label)


def _probe_states(spec: AlgebraSpec) -> list[np.ndarray]:
    """Block projectors plus one deterministic random density per block."""
    dim = spec.dim
    probes = []
    for b in range(spec.num_blocks):
        idx = spec.block_indices(b)
        p = np.zeros((dim, dim), dtype=complex)
        p[np.ix_(idx, idx)] = np.eye(len(idx)) / len(idx)
        probes.append(p)
        if len(idx) > 1:
            rng = np.random.default_rng(1234 + b)
            g = rng.normal(size=(len(idx), len(idx))) + 1j * rng.normal(
                size=(len(idx), len(idx))
            )
            r = g @ g.conj().T
            r /= np.trace(r).real
            q = np.zeros((dim, dim), dtype=complex)
            q[np.ix_(idx, idx)] = r
            probes.append(q)
    return probes


@dataclass(frozen=True)
class Channel:
    """Completely positive trace-preserving map in Kraus form."""

    input: AlgebraSpec
    output: AlgebraSpec
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.kraus:
            raise ValidationError("channel must have at least one Kraus operator")
        din, dout = self.input.dim, self.output.dim
        ops = []
        acc = np.zeros((din, din), dtype=complex)
        for k, op in enumerate(self.kraus):
            m = np.asarray(op, dtype=complex)
            if m.shape != (dout, din):
                raise DimensionError(
                    f"Kraus operator {k} has shape {m.shape}, expected ({dout}, {din})"
                )
            if not np.all(np.isfinite(m.view(float))):
                raise ValidationError(f"Kraus operator {k} contains non-finite entries")
            acc += linalg.dagger(m) @ m
            ops.append(m)
        dev = linalg.max_abs(acc - np.eye(din))
        if dev > TRACE_TOL:
            raise ValidationError(
                f"channel Kraus operators are not trace-preserving: "
                f"max |sum K^dag K - I| = {dev:.3e} (tolerance {TRACE_TOL:g})"
            )
        object.__setattr__(self, "kraus", tuple(ops))
        for probe in _probe_states(self.input):
            out = apply_kraus(self.kraus, probe)
            off = off_block_mass(out, self.output)
            if off > BLOCK_TOL:
                raise ValidationError(
                    f"channel maps a block-diagonal input to off-block mass "
                    f"{off:.3e} exceeding {BLOCK_TOL:g}"
                )

    @property
    def is_unitary(self) -> bool:
        return (
            len(self.kraus) == 1
            and self.kraus[0].shape[0] == self.kraus[0].shape[1]
            and linalg.max_abs(
                linalg.dagger(self.kraus[0]) @ self.kraus[0]
                - np.eye(self.kraus[0].shape[1])
            )
            <= HERMITIAN_TOL
        )


def apply_kraus(kraus: Sequence[np.ndarray], matrix: np.ndarray) -> np.ndarray:
    """Raw Kraus sum sum_k K rho K^dag without any validation."""
    out = np.zeros((kraus[0].shape[0], kraus[0].shape[0]), dtype=complex)
    for k in kraus:
        out += k @ matrix @ linalg.dagger(k)
    return out


def identity_channel(spec: AlgebraSpec) -> Channel:
    return Channel(spec, spec, (np.eye(spec.dim, dtype=complex),))


def unitary_channel(spec: AlgebraSpec, u: np.ndarray) -> Channel:
    """Channel rho -> U rho U^dag on a single algebra."""
    return Channel(spec, spec, (np.asarray(u, dtype=complex),))


@dataclass(frozen=True)
class Instrument:
    """Measurement with post-states: labeled arms of Kraus operators.

    The union of all arms is trace preserving; each arm alone is a
    completely positive, trace non-increasing operation on the input.
    """

    input: AlgebraSpec
    arms: tuple[tuple[str, tuple[np.ndarray, ...]], ...]

    def __post_init__(self):
        if not self.arms:
            raise ValidationError("instrument must have at least one arm")
        labels = [label for label, _ in self.arms]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"instrument arm labels are not unique: {labels}")
        dim = self.input.dim
        total = np.zeros((dim, dim), dtype=complex)
        arms = []
        for label, kraus in self.arms:
            ops = []
            arm_sum = np.zeros((dim, dim), dtype=complex)
            for k, op in enumerate(kraus):
                m = _check_matrix(op, dim, f"arm {label!r} Kraus operator {k}")
                arm_sum += linalg.dagger(m) @ m
                ops.append(m)
            top = float(np.linalg.eigvalsh((arm_sum + linalg.dagger(arm_sum)) / 2).max())
            if top > 1.0 + TRACE_TOL:
                raise ValidationError(
                    f"instrument arm {label!r} is trace-increasing "
                    f"(largest eigenvalue of sum K^dag K is {top:.12f})"
                )
            total += arm_sum
            arms.append((str(label), tuple(ops)))
        dev = linalg.max_abs(total - np.eye(dim))
        if dev > TRACE_TOL:
            raise ValidationError(
                f"instrument arms are not jointly trace-preserving: "
                f"max |sum K^dag K - I| = {dev:.3e} (tolerance {TRACE_TOL:g})"
            )
        object.__setattr__(self, "arms", tuple(arms))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.arms)


def instrument_total_channel(ins: Instrument) -> Channel:
    """Channel obtained by forgetting the instrument's outcome."""
    kraus = tuple(op for _, ops in ins.arms for op in ops)
    return Channel(ins.input, ins.input, kraus)


def instrument_povm(ins: Instrument) -> Povm:
    """Observable induced by an instrument: T^(x) = sum_k K^dag K per arm."""
    outcomes = []
    for label, ops in ins.arms:
        eff = np.zeros((ins.input.dim, ins.input.dim), dtype=complex)
        for k in ops:
            eff += linalg.dagger(k) @ k
        outcomes.append((label, eff))
    return Povm(ins.input, tuple(outcomes))


@dataclass(frozen=True)
class ParamInstrument:
    """Instrument whose behavior depends on extra classical input data."""

    parameter_labels: tuple[str, ...]
    table: tuple[tuple[str, Instrument], ...]

    def __post_init__(self):
        keys = [label for label, _ in self.table]
        missing = [l for l in self.parameter_labels if l not in keys]
        if missing:
            raise ValidationError(
                f"parameter instrument table misses labels {missing}"
            )
        specs = {ins.input for _, ins in self.table}
        if len(specs) > 1:
            raise ValidationError(
                "parameter instrument arms do not share one input algebra"
            )

    def select(self, label: str) -> Instrument:
        for l, ins in self.table:
            if l == label:
                return ins
        raise KeyError(label)

    def apply(self, label: str, rho: State) -> list[tuple[str, float, State | None]]:
        return instrument_apply(self.select(label), rho)


# -- operations ----------------------------------------------------------


def embed_classical(p: Sequence[float], labels: Sequence[str]) -> State:
    """Diagonal state sum_x p_x |x><x| on the classical algebra over labels."""
    p = np.asarray(p, dtype=float)
    if len(p) != len(labels):
        raise DimensionError(
            f"{len(p)} probabilities given for {len(labels)} labels"
        )
    if p.size and p.min() < 0:
        raise ValidationError(f"probabilities contain negative entry {p.min():.3e}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValidationError(
            f"probabilities sum to {p.sum():.15f}, expected 1 within 1e-12"
        )
    spec = AlgebraSpec.classical(labels)
    return State(spec, np.diag(p.astype(complex)))


def apply_channel(t: Channel, rho: State) -> State:
    """Schroedinger-picture action sum_k K rho K^dag as a state on the output."""
    if rho.algebra != t.input:
        raise DimensionError(
            "channel input algebra does not match the state's algebra"
        )
    out = apply_kraus(t.kraus, rho.matrix)
    try:
        return State(t.output, out)
    except ValidationError as exc:  # contract breach, not a caller error
        raise InternalError(f"channel output is not a valid state: {exc}") from exc


def measure(e: Povm, rho: State) -> np.ndarray:
    """Outcome probabilities tr(rho T^(x)), clipped at 0, in label order."""
    if rho.algebra != e.algebra:
        raise DimensionError("POVM algebra does not match the state's algebra")
    probs = np.array(
        [float(np.trace(rho.matrix @ eff).real) for _, eff in e.outcomes]
    )
    if probs.min() < -PROB_FLOOR:
        raise InternalError(
            f"measurement produced probability {probs.min():.3e} below -{PROB_FLOOR:g}"
        )
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise InternalError(
            f"measurement probabilities sum to {probs.sum():.12f}"
        )
    return probs


def instrument_apply(ins: Instrument, rho: State) -> list[tuple[str, float, State | None]]:
    """Outcome probabilities and normalized post-measurement states.

    Arms with probability below the 1e-12 floor report ``None`` as their
    post state instead of dividing by (almost) zero.
    """
    if rho.algebra != ins.input:
        raise DimensionError("instrument input algebra does not match the state")
    results = []
    total = 0.0
    for label, ops in ins.arms:
        raw = apply_kraus(ops, rho.matrix)
        prob = float(np.trace(raw).real)
        total += prob
        if prob > PROB_FLOOR:
            results.append((label, prob, State(ins.input, raw / prob)))
        else:
            results.append((label, max(prob, 0.0), None))
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InternalError(f"instrument arm probabilities sum to {total:.12f}")
    return results


def lift_channel(t: Channel, bystander: AlgebraSpec, side: str = "left") -> Channel:
    """Extend a channel by the identity on a bystander algebra.

    ``side`` names where the *channel* acts: ``"left"`` builds T (x) Id on
    ``input (x) bystander``, ``"right"`` builds Id (x) T on
    ``bystander (x) input``.
    """
    eye = np.eye(bystander.dim, dtype=complex)
    if side == "left":
        kraus = tuple(np.kron(k, eye) for k in t.kraus)
        return Channel(t.input.tensor(bystander), t.output.tensor(bystander), kraus)
    if side == "right":
        kraus = tuple(np.kron(eye, k) for k in t.kraus)
        return Channel(bystander.tensor(t.input), bystander.tensor(t.output), kraus)
    raise ValidationError(f"lift side must be 'left' or 'right', got {side!r}")
