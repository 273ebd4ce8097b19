import numpy as np
import pytest

from qct import linalg
from qct.algebra import (
    AlgebraSpec,
    Channel,
    Instrument,
    ParamInstrument,
    Povm,
    State,
    apply_channel,
    embed_classical,
    identity_channel,
    instrument_apply,
    instrument_povm,
    instrument_total_channel,
    lift_channel,
    measure,
    off_block_mass,
    pure_state,
    unitary_channel,
)
from qct.errors import DimensionError, ValidationError

QUBIT = AlgebraSpec.quantum(2)
QUTRIT = AlgebraSpec.quantum(3)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestAlgebraSpec:
    def test_kind_predicates(self):
        assert QUTRIT.is_quantum and not QUTRIT.is_classical
        bits = AlgebraSpec.classical(["0", "1"])
        assert bits.is_classical and not bits.is_quantum
        hybrid = AlgebraSpec.hybrid([("0", 3), ("1", 3)])
        assert not hybrid.is_quantum and not hybrid.is_classical
        assert hybrid.dim == 6

    def test_sectors_of_primitive(self):
        hybrid = AlgebraSpec.hybrid([("a", 2), ("b", 3)])
        np.testing.assert_array_equal(hybrid.sectors(), [0, 0, 1, 1, 1])

    def test_tensor_blocks_and_sectors(self):
        bits = AlgebraSpec.classical(["0", "1"])
        comp = bits.tensor(QUBIT)
        assert comp.dim == 4
        assert comp.labels == ("0,q", "1,q")
        np.testing.assert_array_equal(comp.sectors(), [0, 0, 1, 1])
        # tensoring on the other side interleaves the sectors
        comp2 = QUBIT.tensor(bits)
        np.testing.assert_array_equal(comp2.sectors(), [0, 1, 0, 1])

    def test_label_uniqueness(self):
        with pytest.raises(ValidationError, match="unique"):
            AlgebraSpec.hybrid([("x", 1), ("x", 2)])

    def test_dimension_positive(self):
        with pytest.raises(ValidationError, match="dimension"):
            AlgebraSpec.hybrid([("x", 0)])


class TestState:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            State(QUBIT, np.array([[0.5, 1.0], [0.0, 0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValidationError, match="trace"):
            State(QUBIT, np.diag([0.9, 0.3]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValidationError, match="eigenvalue"):
            State(QUBIT, np.diag([1.2, -0.2]))

    def test_rejects_off_block_mass(self):
        bits = AlgebraSpec.classical(["0", "1"])
        m = np.full((2, 2), 0.5, dtype=complex)
        with pytest.raises(ValidationError, match="off-block"):
            State(bits, m)

    def test_block_diagonal_hybrid_state(self):
        hybrid = AlgebraSpec.hybrid([("0", 2), ("1", 2)])
        rho = np.zeros((4, 4), dtype=complex)
        rho[:2, :2] = np.diag([0.25, 0.25])
        rho[2:, 2:] = np.full((2, 2), 0.25)
        s = State(hybrid, rho)
        assert off_block_mass(s.matrix, hybrid) == 0.0


class TestEmbedClassical:
    def test_deterministic_bit(self):
        s = embed_classical([1.0, 0.0], ["0", "1"])
        np.testing.assert_allclose(s.matrix, np.diag([1.0, 0.0]))

    def test_fair_coin(self):
        s = embed_classical([0.5, 0.5], ["0", "1"])
        np.testing.assert_allclose(s.matrix, np.diag([0.5, 0.5]))

    def test_dice(self):
        s = embed_classical([1.0 / 6] * 6, [str(i) for i in range(1, 7)])
        np.testing.assert_allclose(np.diag(s.matrix), np.full(6, 1.0 / 6))

    def test_rejects_negative(self):
        with pytest.raises(ValidationError, match="negative"):
            embed_classical([1.5, -0.5], ["0", "1"])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError, match="sum"):
            embed_classical([0.6, 0.6], ["0", "1"])


class TestApplyChannel:
    def test_identity(self):
        rng = np.random.default_rng(0)
        rho = State(QUTRIT, random_density(rng, 3))
        out = apply_channel(identity_channel(QUTRIT), rho)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)

    def test_swap_exchanges_factors(self):
        rng = np.random.default_rng(1)
        rho = random_density(rng, 3)
        sigma = random_density(rng, 3)
        both = AlgebraSpec.quantum(9)
        swap = linalg.permutation_operator([3, 3], [1, 0])
        out = apply_channel(
            unitary_channel(both, swap), State(both, linalg.tensor(rho, sigma))
        )
        np.testing.assert_allclose(out.matrix, linalg.tensor(sigma, rho), atol=1e-12)

    def test_completely_depolarizing(self):
        d = 3
        kraus = tuple(
            np.outer(linalg.basis_vector(d, i), linalg.basis_vector(d, j)) / np.sqrt(d)
            for i in range(d)
            for j in range(d)
        )
        chan = Channel(QUTRIT, QUTRIT, kraus)
        rng = np.random.default_rng(2)
        rho = State(QUTRIT, random_density(rng, 3))
        out = apply_channel(chan, rho)
        np.testing.assert_allclose(out.matrix, np.eye(3) / 3, atol=1e-12)

    def test_algebra_mismatch(self):
        rng = np.random.default_rng(3)
        rho = State(QUBIT, random_density(rng, 2))
        with pytest.raises(DimensionError):
            apply_channel(identity_channel(QUTRIT), rho)

    def test_trace_preservation_random(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
            q, _ = np.linalg.qr(a)
            kraus = tuple(q.reshape(3, 2, 3)[:, k, :] for k in range(2))
            chan = Channel(QUTRIT, QUTRIT, kraus)
            rho = State(QUTRIT, random_density(rng, 3))
            out = apply_channel(chan, rho)
            assert abs(np.trace(out.matrix) - 1.0) < 1e-9


class TestChannelValidation:
    def test_rejects_non_trace_preserving(self):
        with pytest.raises(ValidationError, match="trace-preserving"):
            Channel(QUBIT, QUBIT, (0.5 * np.eye(2),))

    def test_rejects_block_structure_break(self):
        # Hadamard-like rotation creates coherence between classical labels
        bits = AlgebraSpec.classical(["0", "1"])
        had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        with pytest.raises(ValidationError, match="block"):
            Channel(bits, bits, (had,))

    def test_classical_readout_channel(self):
        # measure-and-record: quantum input, classical output
        labels = ["0", "1", "2"]
        kraus = tuple(
            np.outer(linalg.basis_vector(3, i), linalg.basis_vector(3, i))
            for i in range(3)
        )
        chan = Channel(QUTRIT, AlgebraSpec.classical(labels), kraus)
        rng = np.random.default_rng(5)
        rho = State(QUTRIT, random_density(rng, 3))
        out = apply_channel(chan, rho)
        np.testing.assert_allclose(
            np.diag(out.matrix).real, np.diag(rho.matrix).real, atol=1e-12
        )


class TestMeasure:
    def test_projective_on_diagonal_state(self):
        povm = Povm(
            QUTRIT,
            tuple(
                (str(i), np.outer(linalg.basis_vector(3, i), linalg.basis_vector(3, i)))
                for i in range(3)
            ),
        )
        rho = State(QUTRIT, np.diag([0.5, 0.0, 0.5]).astype(complex))
        np.testing.assert_allclose(measure(povm, rho), [0.5, 0.0, 0.5], atol=1e-12)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(6)
        from qct.randomized import generator, random_povm

        povm = random_povm(generator(7), QUTRIT, 4)
        rho = State(QUTRIT, random_density(rng, 3))
        assert abs(measure(povm, rho).sum() - 1.0) < 1e-9

    def test_commitment_projectors_on_committed_state(self):
        from qct.ct_protocols import PSI0, PSI1

        space = AlgebraSpec.quantum(9)
        p0 = linalg.projector(PSI0)
        p1 = linalg.projector(PSI1)
        povm = Povm(space, (("0", p0), ("1", p1), ("abort", np.eye(9) - p0 - p1)))
        probs = measure(povm, pure_state(space, PSI0))
        np.testing.assert_allclose(probs, [1.0, 0.0, 0.0], atol=1e-12)

    def test_matches_readout_channel_diagonal(self):
        # measuring equals reading the diagonal of the induced q->c channel
        from qct.randomized import generator, random_povm

        povm = random_povm(generator(8), QUTRIT, 3)
        kraus = []
        for x, (_, eff) in enumerate(povm.outcomes):
            w, v = np.linalg.eigh(eff)
            for lam, vec in zip(w, v.T):
                if lam > 1e-12:
                    kraus.append(
                        np.sqrt(lam) * np.outer(linalg.basis_vector(3, x), vec.conj())
                    )
        chan = Channel(QUTRIT, AlgebraSpec.classical(["0", "1", "2"]), tuple(kraus))
        rng = np.random.default_rng(9)
        rho = State(QUTRIT, random_density(rng, 3))
        out = apply_channel(chan, rho)
        np.testing.assert_allclose(
            measure(povm, rho), np.diag(out.matrix).real, atol=1e-9
        )


class TestInstrument:
    def _lueders(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        return Instrument(QUBIT, (("0", (p0,)), ("1", (p1,))))

    def test_lueders_on_plus_state(self):
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        results = instrument_apply(self._lueders(), pure_state(QUBIT, plus))
        assert [label for label, _, _ in results] == ["0", "1"]
        for i, (_, prob, post) in enumerate(results):
            assert abs(prob - 0.5) < 1e-12
            expected = np.zeros((2, 2))
            expected[i, i] = 1.0
            np.testing.assert_allclose(post.matrix, expected, atol=1e-12)

    def test_trivial_instrument(self):
        ins = Instrument(QUBIT, (("only", (np.eye(2, dtype=complex),)),))
        rng = np.random.default_rng(10)
        rho = State(QUBIT, random_density(rng, 2))
        ((_, prob, post),) = instrument_apply(ins, rho)
        assert abs(prob - 1.0) < 1e-12
        np.testing.assert_allclose(post.matrix, rho.matrix, atol=1e-12)

    def test_marginal_law(self):
        ins = self._lueders()
        rng = np.random.default_rng(11)
        rho = State(QUBIT, random_density(rng, 2))
        total = apply_channel(instrument_total_channel(ins), rho)
        mix = sum(
            prob * post.matrix for _, prob, post in instrument_apply(ins, rho)
        )
        np.testing.assert_allclose(total.matrix, mix, atol=1e-12)

    def test_induced_povm_is_valid(self):
        povm = instrument_povm(self._lueders())
        assert povm.labels == ("0", "1")

    def test_rejects_non_trace_preserving_union(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        with pytest.raises(ValidationError, match="trace-preserving"):
            Instrument(QUBIT, (("0", (p0,)),))

    def test_zero_probability_arm_flagged_absent(self):
        ins = self._lueders()
        rho = pure_state(QUBIT, np.array([1.0, 0.0]))
        results = instrument_apply(ins, rho)
        assert results[0][1] == pytest.approx(1.0)
        assert results[1][2] is None


class TestParamInstrument:
    def test_dispatch(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        lueders = Instrument(QUBIT, (("0", (p0,)), ("1", (p1,))))
        skip = Instrument(QUBIT, (("0", (np.eye(2, dtype=complex),)),))
        pins = ParamInstrument(("measure", "skip"), (("measure", lueders), ("skip", skip)))
        rho = pure_state(QUBIT, np.array([1.0, 1.0]) / np.sqrt(2))
        assert len(pins.apply("measure", rho)) == 2
        assert len(pins.apply("skip", rho)) == 1

    def test_missing_label(self):
        p = Instrument(QUBIT, (("0", (np.eye(2, dtype=complex),)),))
        with pytest.raises(ValidationError, match="misses"):
            ParamInstrument(("a", "b"), (("a", p),))


class TestLiftChannel:
    def test_lift_identity(self):
        lifted = lift_channel(identity_channel(QUBIT), QUTRIT, side="left")
        rng = np.random.default_rng(12)
        rho = State(lifted.input, random_density(rng, 6))
        out = apply_channel(lifted, rho)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)

    def test_product_law(self):
        rng = np.random.default_rng(13)
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        chan = unitary_channel(QUBIT, u)
        lifted = lift_channel(chan, QUTRIT, side="left")
        rho = random_density(rng, 2)
        sigma = random_density(rng, 3)
        out = apply_channel(lifted, State(lifted.input, linalg.tensor(rho, sigma)))
        np.testing.assert_allclose(
            out.matrix, linalg.tensor(u @ rho @ u.conj().T, sigma), atol=1e-12
        )

    def test_commutes_with_partial_trace_on_correlated_input(self):
        from qct.randomized import generator, random_kraus_channel

        rng = generator(14)
        chan = random_kraus_channel(rng, QUBIT, 2)
        lifted = lift_channel(chan, QUBIT, side="left")
        for _ in range(5):
            joint = random_density(np.random.default_rng(15), 4)
            out = sum(k @ joint @ k.conj().T for k in lifted.kraus)
            left = linalg.partial_trace(out, [2, 2], [0])
            reduced = linalg.partial_trace(joint, [2, 2], [0])
            right = sum(k @ reduced @ k.conj().T for k in chan.kraus)
            np.testing.assert_allclose(left, right, atol=1e-10)

    def test_right_side_lift(self):
        rng = np.random.default_rng(16)
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        lifted = lift_channel(unitary_channel(QUBIT, u), QUTRIT, side="right")
        assert lifted.input.dim == 6
        np.testing.assert_allclose(
            lifted.kraus[0], linalg.tensor(np.eye(3), u), atol=1e-12
        )

    def test_block_structure_preserved_on_hybrid(self):
        from qct.ct_protocols import MAILBOX, honest_bob

        move = honest_bob().moves[0]
        lifted = lift_channel(move, AlgebraSpec.quantum(2), side="right")
        rng = np.random.default_rng(17)
        # random block-diagonal input on the lifted composite
        spec = lifted.input
        mask = spec.block_mask()
        raw = random_density(rng, spec.dim)
        raw = np.where(mask, raw, 0.0)
        raw /= np.trace(raw).real
        out = sum(k @ raw @ k.conj().T for k in lifted.kraus)
        assert off_block_mass(out, lifted.output) < 1e-9
        assert MAILBOX.tensor(honest_bob().private_algebra) == move.input
