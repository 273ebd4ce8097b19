"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
Timing assertions measure the steady-state runtime of the operation under
test (the module fixture warms the process first, so one-time allocator
and BLAS setup costs are excluded).
"""

import time

import numpy as np
import pytest

from qct import linalg
from qct.algebra import State
from qct.cheat_opt import SearchConfig, alice_preparation_bound, helstrom, optimize_cheat
from qct.ct_protocols import (
    BOB_NOTEPAD,
    PSI0,
    PSI1,
    build_alice_cheat,
    build_bob_cheat,
    build_dk_honest,
    honest_bob,
    iter_correct_classical_protocols,
    psi_tilde,
    published_family,
    solve_winning,
)
from qct.dilation import normal_form_deviation, unitary_normal_form
from qct.protocol import Protocol, Strategy, forcing_probability, run_exact, sample
from qct.randomized import generator, random_opponent_for, random_strategy


def report(criterion: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def honest_protocol():
    p = build_dk_honest()
    run_exact(p)  # warm the engine so timings measure steady state
    return p


def test_criterion_1_honest_distribution(honest_protocol):
    start = time.perf_counter()
    d = run_exact(honest_protocol)
    elapsed = time.perf_counter() - start
    cells_ok = abs(d.prob("0", "0") - 0.5) < 1e-10 and abs(d.prob("1", "1") - 0.5) < 1e-10
    off = d.table.copy()
    off[0, 0] = off[1, 1] = 0.0
    ok = cells_ok and off.max() < 1e-10 and elapsed < 1.0
    report(
        "criterion 1 (honest protocol is a fair coin)",
        ok,
        f"P(0,0)={d.prob('0','0'):.12f}, P(1,1)={d.prob('1','1'):.12f}, "
        f"max other cell={off.max():.2e}, runtime={elapsed:.3f}s",
    )


def test_criterion_2_bob_published_cheat(honest_protocol):
    start = time.perf_counter()
    values = [
        forcing_probability(honest_protocol, "bob", t, build_bob_cheat(t))
        for t in (0, 1)
    ]
    elapsed = time.perf_counter() - start
    ok = all(abs(v - 0.75) < 1e-10 for v in values) and elapsed < 1.0
    report(
        "criterion 2 (Bob's published cheat forces 3/4)",
        ok,
        f"forcing probabilities={values}, runtime={elapsed:.3f}s",
    )


def test_criterion_3_alice_published_cheat(honest_protocol):
    values = [
        forcing_probability(honest_protocol, "alice", t, build_alice_cheat(t))
        for t in (0, 1)
    ]
    overlaps = [
        abs(np.vdot(PSI0, psi_tilde(0))) ** 2,
        abs(np.vdot(PSI1, psi_tilde(1))) ** 2,
    ]
    # per-branch decomposition: fix Bob's announced coin and check each
    # branch forces with probability exactly 3/4
    branch_values = []
    base_bob = honest_bob()
    for b in (0, 1):
        coin = np.zeros((2, 2), dtype=complex)
        coin[b, b] = 1.0
        register = linalg.projector(linalg.basis_vector(9, 8))
        fixed_coin_bob = Strategy(
            "bob",
            BOB_NOTEPAD,
            base_bob.mailbox_algebra,
            State(BOB_NOTEPAD, np.kron(coin, register)),
            base_bob.moves,
            base_bob.final_measurement,
        )
        branch = Protocol(
            build_alice_cheat(0), fixed_coin_bob, base_bob.mailbox_algebra, 3
        )
        branch_values.append(run_exact(branch).prob("0", "0"))
    combined = 0.5 * branch_values[0] + 0.5 * branch_values[1]
    ok = (
        all(abs(v - 0.75) < 1e-10 for v in values)
        and all(abs(o - 0.75) < 1e-12 for o in overlaps)
        and all(abs(b - 0.75) < 1e-10 for b in branch_values)
        and abs(combined - 0.75) < 1e-10
    )
    report(
        "criterion 3 (Alice's published cheat forces 3/4 branchwise)",
        ok,
        f"forcing={values}, overlaps={overlaps}, branches={branch_values}",
    )


def test_criterion_4_helstrom_oracle():
    red0 = linalg.partial_trace(linalg.projector(PSI0), [3, 3], [1])
    red1 = linalg.partial_trace(linalg.projector(PSI1), [3, 3], [1])
    value = helstrom(red0, red1, 0.5)
    ok = abs(value - 0.75) < 1e-12
    report(
        "criterion 4 (Helstrom oracle certifies the 3/4 ceiling)",
        ok,
        f"optimal discrimination probability={value:.15f}",
    )


def test_criterion_5_preparation_bound_optimizer():
    start = time.perf_counter()
    rep = alice_preparation_bound(
        PSI0, PSI1, dims=(3, 3), mailbox_factor=1, restarts=32, budget=20000, seed=0
    )
    elapsed = time.perf_counter() - start
    ok = rep.value >= 0.749 and rep.value <= 0.75 + 1e-6 and elapsed < 30.0
    report(
        "criterion 5 (preparation-bound optimizer reaches 3/4)",
        ok,
        f"value={rep.value:.9f} in [0.749, 0.75+1e-6], "
        f"evaluations={rep.evaluations}, runtime={elapsed:.1f}s",
    )


def test_criterion_6_unitary_normal_form_equivalence():
    start = time.perf_counter()
    rng = generator(2026)
    worst = 0.0
    for i in range(20):
        n_moves = [0, 1, 1, 2, 2][i % 5]
        private_dim = 2 if i % 2 == 0 else 3
        mailbox_dim = 3 if i % 7 == 3 else 2
        s = random_strategy(
            rng,
            "alice" if i % 3 else "bob",
            private_dim,
            mailbox_dim,
            n_moves,
            prepares=(i % 3 != 0),
            init_rank=2,
            n_kraus=2,
        )
        pure = unitary_normal_form(s)
        first_mover = s.party if s.prepares_mailbox else (
            "bob" if s.party == "alice" else "alice"
        )
        for _ in range(20):
            opp = random_opponent_for(rng, pure, private_dim=2)
            worst = max(worst, normal_form_deviation(s, pure, opp, first_mover))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 60.0
    report(
        "criterion 6 (unitary normal form preserves all distributions)",
        ok,
        f"max deviation over 20 strategies x 20 opponents={worst:.2e}, "
        f"runtime={elapsed:.1f}s",
    )


def test_criterion_7_classical_bias_is_always_half():
    start = time.perf_counter()
    total = 0
    forced = 0
    for c in iter_correct_classical_protocols(max_rounds=3):
        total += 1
        analyses = [solve_winning(c, outcome) for outcome in ("0", "1")]
        if any(a.party is not None and a.value >= 1.0 for a in analyses):
            forced += 1
    elapsed = time.perf_counter() - start
    ok = total > 0 and forced == total and elapsed < 60.0
    report(
        "criterion 7 (every correct classical protocol is fully breakable)",
        ok,
        f"{forced}/{total} protocols admit a certain winner, runtime={elapsed:.1f}s",
    )


def test_criterion_8_monte_carlo_consistency(honest_protocol):
    n = 100_000
    counts = sample(honest_protocol, n, seed=20260809)
    exact = run_exact(honest_protocol).table
    worst_margin = -np.inf
    ok = True
    for i in range(3):
        for j in range(3):
            p = exact[i, j]
            bound = 5.0 * np.sqrt(p * (1.0 - p) / n)
            gap = abs(counts[i, j] / n - p)
            worst_margin = max(worst_margin, gap - bound)
            if gap > bound:
                ok = False
    report(
        "criterion 8 (sampled frequencies match the exact distribution)",
        ok,
        f"n={n}, worst (gap - 5 sigma bound)={worst_margin:.2e}",
    )


def test_criterion_9_exclusions_are_substituted(honest_protocol):
    """The no-zero-bias theorem, the round lower bound and exact optimality
    of 1/4 over all strategies are theory results outside desk scale; the
    artifact substitutes the analytic oracle ceilings (criteria 4 and 5)
    plus a loud diagnostic whenever any search exceeds the published value.
    """
    import warnings

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = optimize_cheat(
            honest_protocol,
            published_family("bob", 1),
            1,
            SearchConfig(seed=0, ceiling=0.6),  # artificially low ceiling
        )
    diagnostic_fires = rep.ceiling_violated and any(
        "ceiling" in str(w.message) for w in caught
    )
    honest_rep = optimize_cheat(
        honest_protocol, published_family("bob", 1), 1,
        SearchConfig(seed=0, ceiling=0.75),
    )
    ok = diagnostic_fires and not honest_rep.ceiling_violated
    report(
        "criterion 9 (excluded theory is substituted by oracle ceilings)",
        ok,
        "no-zero-bias theorem and round lower bound are out of scope; "
        f"ceiling diagnostic fires on demand={diagnostic_fires}, "
        f"published value respects the 3/4 ceiling={not honest_rep.ceiling_violated}",
    )
