import numpy as np
import pytest

from qct import linalg
from qct.algebra import AlgebraSpec, Channel, Povm, State, pure_state, unitary_channel
from qct.dilation import (
    NaimarkForm,
    PureStrategy,
    embed_quantum,
    naimark,
    normal_form_deviation,
    purify,
    stinespring,
    unitary_normal_form,
)
from qct.errors import ValidationError
from qct.protocol import OUTCOMES, Protocol, run_exact
from qct.randomized import (
    generator,
    random_density,
    random_kraus_channel,
    random_opponent_for,
    random_povm,
    random_strategy,
    random_unitary,
)

QUBIT = AlgebraSpec.quantum(2)
QUTRIT = AlgebraSpec.quantum(3)


class TestPurify:
    def test_pure_input_trivial_ancilla(self):
        rng = generator(0)
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        v /= np.linalg.norm(v)
        phi = purify(linalg.projector(v))
        assert phi.size == 3  # ancilla dimension 1
        np.testing.assert_allclose(
            linalg.projector(phi), linalg.projector(v), atol=1e-10
        )

    def test_fair_coin_purification(self):
        phi = purify(np.diag([0.5, 0.5]).astype(complex))
        assert phi.size == 4
        back = linalg.partial_trace(linalg.projector(phi), [2, 2], [0])
        np.testing.assert_allclose(back, np.diag([0.5, 0.5]), atol=1e-10)

    @pytest.mark.parametrize("dim,rank", [(3, 2), (4, 3), (9, 2)])
    def test_traceback_roundtrip(self, dim, rank):
        rng = generator(dim * 10 + rank)
        rho = random_density(rng, dim, rank=rank)
        phi = purify(rho)
        assert phi.size == dim * rank
        back = linalg.partial_trace(linalg.projector(phi), [dim, rank], [0])
        assert linalg.max_abs(back - rho) < 1e-9

    def test_accepts_state_objects(self):
        s = State(QUBIT, np.diag([0.5, 0.5]).astype(complex))
        assert purify(s).size == 4


class TestStinespring:
    def test_unitary_channel_trivial_ancilla(self):
        rng = generator(1)
        u = random_unitary(rng, 3)
        form = stinespring(unitary_channel(QUTRIT, u))
        assert form.ancilla_dim == 1
        np.testing.assert_allclose(form.unitary, u, atol=1e-12)

    def test_depolarizing_reconstruction_on_operator_basis(self):
        d = 2
        kraus = tuple(
            np.outer(linalg.basis_vector(d, i), linalg.basis_vector(d, j)) / np.sqrt(d)
            for i in range(d)
            for j in range(d)
        )
        chan = Channel(QUBIT, QUBIT, kraus)
        form = stinespring(chan)
        for a in range(d):
            for b in range(d):
                unit = np.zeros((d, d), dtype=complex)
                unit[a, b] = 1.0
                expected = np.trace(unit) * np.eye(d) / d
                assert linalg.max_abs(form.apply(unit) - expected) < 1e-9

    @pytest.mark.parametrize("seed", range(4))
    def test_random_channel_reconstruction(self, seed):
        rng = generator(20 + seed)
        chan = random_kraus_channel(rng, QUBIT, 2)
        form = stinespring(chan)
        assert form.ancilla_dim == 2
        for _ in range(5):
            rho = random_density(rng, 2)
            direct = sum(k @ rho @ k.conj().T for k in chan.kraus)
            assert linalg.max_abs(form.apply(rho) - direct) < 1e-9

    def test_hybrid_channel_dilates_in_enveloping_algebra(self):
        from qct.ct_protocols import honest_alice

        move = honest_alice().moves[0]
        form = stinespring(move)
        assert form.ancilla_dim == len(move.kraus)
        rng = generator(30)
        rho = random_density(rng, move.input.dim)
        direct = sum(k @ rho @ k.conj().T for k in move.kraus)
        assert linalg.max_abs(form.apply(rho) - direct) < 1e-9


class TestNaimark:
    def test_projective_povm_identity_embedding(self):
        effects = tuple(
            (str(i), np.outer(linalg.basis_vector(3, i), linalg.basis_vector(3, i)))
            for i in range(3)
        )
        form = naimark(Povm(QUTRIT, effects))
        assert form.ancilla_dim == 1
        for i, (_, eff) in enumerate(effects):
            np.testing.assert_allclose(form.projectors[i], eff, atol=1e-12)

    def test_commitment_measurement_identity_embedding(self):
        from qct.ct_protocols import PSI0, PSI1

        space = AlgebraSpec.quantum(9)
        p0, p1 = linalg.projector(PSI0), linalg.projector(PSI1)
        form = naimark(
            Povm(space, (("0", p0), ("1", p1), ("abort", np.eye(9) - p0 - p1)))
        )
        assert form.ancilla_dim == 1

    def test_trine_povm_probability_match(self):
        angles = [0.0, 2 * np.pi / 3, 4 * np.pi / 3]
        effects = []
        for i, a in enumerate(angles):
            v = np.array([np.cos(a), np.sin(a)], dtype=complex)
            effects.append((str(i), (2.0 / 3.0) * linalg.projector(v)))
        povm = Povm(QUBIT, tuple(effects))
        form = naimark(povm)
        assert form.ancilla_dim == 3
        rng = generator(40)
        for _ in range(50):
            rho = random_density(rng, 2)
            for x, (_, eff) in enumerate(povm.outcomes):
                want = float(np.trace(eff @ rho).real)
                assert abs(form.probability(x, rho) - want) < 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_random_povm_probability_match(self, seed):
        rng = generator(50 + seed)
        povm = random_povm(rng, QUTRIT, 3)
        form = naimark(povm)
        for _ in range(10):
            rho = random_density(rng, 3)
            for x, (_, eff) in enumerate(povm.outcomes):
                want = float(np.trace(eff @ rho).real)
                assert abs(form.probability(x, rho) - want) < 1e-9

    def test_validates_projector_structure(self):
        with pytest.raises(ValidationError, match="projection"):
            NaimarkForm(1, np.array([1.0]), (np.diag([0.5, 0.5]), np.diag([0.5, 0.5])))


class TestUnitaryNormalForm:
    def test_output_is_pure_strategy(self):
        rng = generator(60)
        s = random_strategy(rng, "alice", 2, 2, 1, True)
        pure = unitary_normal_form(s)
        assert isinstance(pure, PureStrategy)
        assert pure.private_algebra.is_quantum
        assert pure.mailbox_algebra.is_quantum

    def test_already_pure_strategy_unchanged_distributions(self):
        rng = generator(61)
        s = random_strategy(
            rng, "alice", 2, 2, 1, True, init_rank=1, n_kraus=1, projective=True
        )
        pure = unitary_normal_form(s)
        # trivial ancillas only: preparation and moves add dimension 1
        assert pure.private_algebra.dim == s.private_algebra.dim
        opp = random_opponent_for(rng, pure)
        assert normal_form_deviation(s, pure, opp) < 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_random_mixed_strategy_equivalence(self, seed):
        rng = generator(70 + seed)
        n_moves = int(rng.integers(0, 3))
        s = random_strategy(rng, "alice", 3, 2, n_moves, True, init_rank=2, n_kraus=2)
        pure = unitary_normal_form(s)
        for _ in range(4):
            opp = random_opponent_for(rng, pure, private_dim=2)
            assert normal_form_deviation(s, pure, opp) < 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_bob_side_dilation(self, seed):
        rng = generator(80 + seed)
        s = random_strategy(rng, "bob", 2, 3, 2, False, init_rank=2, n_kraus=2)
        pure = unitary_normal_form(s)
        for _ in range(3):
            opp = random_opponent_for(rng, pure, private_dim=2)
            assert normal_form_deviation(s, pure, opp) < 1e-9

    def test_bob_as_preparer_dilation(self):
        rng = generator(90)
        s = random_strategy(rng, "bob", 2, 2, 1, True, init_rank=2, n_kraus=2)
        pure = unitary_normal_form(s)
        opp = random_opponent_for(rng, pure, private_dim=2)
        assert normal_form_deviation(s, pure, opp, first_mover="bob") < 1e-9

    def test_dilated_strategy_runs_against_arbitrary_opponents(self):
        # the dilated strategy and the original may meet opponents of any
        # private dimension; the distributions stay equal for all of them
        rng = generator(100)
        s = random_strategy(rng, "alice", 2, 2, 2, True, init_rank=2, n_kraus=2)
        pure = unitary_normal_form(s)
        for dim in (2, 3, 4):
            opp = random_opponent_for(rng, pure, private_dim=dim)
            assert normal_form_deviation(s, pure, opp) < 1e-9


class TestHonestProtocolDilation:
    def test_honest_alice_normal_form(self):
        # the mixed honest strategy (classical coin) becomes a pure one on
        # an enlarged notepad without changing any outcome distribution,
        # neither against the honest partner nor against the published cheat
        from qct.ct_protocols import build_bob_cheat, honest_alice, honest_bob

        alice = honest_alice()
        pure = unitary_normal_form(alice)
        assert isinstance(pure, PureStrategy)
        dev_honest = normal_form_deviation(alice, pure, embed_quantum(honest_bob()))
        assert dev_honest < 1e-9
        dev_cheat = normal_form_deviation(
            alice, pure, embed_quantum(build_bob_cheat(1))
        )
        assert dev_cheat < 1e-9

    def test_honest_bob_cheat_normal_form(self):
        # the cheating Bob mixes a coin in the uninformative branch; his
        # normal form behaves identically against honest Alice
        from qct.ct_protocols import build_bob_cheat, honest_alice

        cheat = build_bob_cheat(1)
        pure = unitary_normal_form(cheat)
        dev = normal_form_deviation(cheat, pure, embed_quantum(honest_alice()))
        assert dev < 1e-9


class TestAncillaBookkeeping:
    def test_disjoint_slot_moves_commute(self):
        # dilated moves act on their own ancilla slot and the shared
        # system; with the system factors equal, operators on disjoint
        # ancilla slots commute
        rng = generator(110)
        dims = [2, 3, 2, 2]
        a = linalg.embed_factors(random_unitary(rng, 3), [1], dims)
        b = linalg.embed_factors(random_unitary(rng, 4), [2, 3], dims)
        assert linalg.max_abs(a @ b - b @ a) < 1e-12

    def test_moves_touch_only_their_own_ancilla_slot(self):
        rng = generator(111)
        s = random_strategy(rng, "alice", 2, 2, 2, True, init_rank=2, n_kraus=2)
        pure = unitary_normal_form(s)
        (k1,) = pure.moves[0].kraus
        (k2,) = pure.moves[1].kraus
        # layout: [system 2, preparation ancilla 2, move-1 ancilla 2,
        #          move-2 ancilla 2, pointer ancilla 3, mailbox 2]
        dims = [2, 2, 2, 2, 3, 2]
        assert pure.private_algebra.dim * 2 == int(np.prod(dims))
        probe_m2 = linalg.embed_factors(random_unitary(rng, 2), [3], dims)
        probe_prep = linalg.embed_factors(random_unitary(rng, 2), [1], dims)
        # move 1 is the identity on the preparation and move-2 slots
        assert linalg.max_abs(k1 @ probe_m2 - probe_m2 @ k1) < 1e-9
        assert linalg.max_abs(k1 @ probe_prep - probe_prep @ k1) < 1e-9
        # move 2 is the identity on the move-1 slot
        probe_m1 = linalg.embed_factors(random_unitary(rng, 2), [2], dims)
        assert linalg.max_abs(k2 @ probe_m1 - probe_m1 @ k2) < 1e-9


class TestEmbedQuantum:
    def test_preserves_matrices_and_distribution(self):
        from qct.ct_protocols import build_dk_honest

        p = build_dk_honest()
        base = run_exact(p).table
        lifted = Protocol(
            embed_quantum(p.alice),
            embed_quantum(p.bob),
            AlgebraSpec.quantum(p.mailbox.dim),
            p.rounds,
        )
        assert linalg.max_abs(run_exact(lifted).table - base) < 1e-12
