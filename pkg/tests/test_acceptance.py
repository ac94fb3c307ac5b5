"""Acceptance suite: one test per quantitative criterion.

Each test prints a single PASS line with its headline numbers; instance
generation is keyed by per-instance seed sequences, so the randomized
suites are reproducible and independent of execution order (criterion 9
re-runs them on a thread pool and compares reports byte for byte).
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import permutations as iter_permutations

import numpy as np
import pytest

from orbitforge import (
    Coupling,
    Dist,
    FiniteAction,
    Observable,
    ball,
    ball_transport_certificate,
    cycle_decomposition,
    empirical_distribution,
    empirical_pair_distribution,
    ergodic_profile,
    good_observable,
    inverse_permutation,
    permutation_with_cycle_lengths,
    rearrange_line,
    refine_partition,
    rewire,
    round_coupling,
    verify_same_orbits,
)
from orbitforge.pipeline import PipelineConfig, run_experiment
from orbitforge.rearrange import _close, _merge, build_tau

MASTER_SEED = 20240801


def _rng(*key):
    return np.random.default_rng(np.random.SeedSequence((MASTER_SEED, *key)))


def random_target(rng, alphabet, eps, n, headroom=0.25):
    """Symmetric fully supported coupling with min entry above the rounding bar."""
    floor = 2 * alphabet * eps + alphabet * alphabet / n
    m = floor + headroom * (1 / alphabet**2 - floor)
    w = rng.random((alphabet, alphabet))
    w = w + w.T
    w /= w.sum()
    return Coupling.from_probs(np.full((alphabet, alphabet), m) + (1 - m * alphabet**2) * w)


def rounded_counts(target_real, total):
    """Largest-remainder integer counts for ``target_real * total``."""
    goal = target_real * total
    counts = np.floor(goal).astype(np.int64)
    short = total - int(counts.sum())
    order = np.argsort(-(goal - np.floor(goal)), kind="stable")
    counts[order[:short]] += 1
    return counts


def labels_near_margins(rng, j, n):
    counts = rounded_counts(j.row_margin(), n)
    labels = rng.permutation(np.repeat(np.arange(j.alphabet_size), counts))
    return Observable(labels, j.alphabet_size)


# ---------------------------------------------------------------------------
# criterion 1: line rearrangement bound on 1000 randomized instances
# ---------------------------------------------------------------------------

# feasible (alphabet, eps) pairs: the min-entry hypothesis needs
# 2|A|eps + |A|^2/N < 1/|A|^2
CRIT1_COMBOS = [(2, 0.005), (2, 0.01), (2, 0.05), (3, 0.005), (3, 0.01), (4, 0.005)]
CRIT1_SIZES = [1_000, 10_000, 100_000]
CRIT1_COUNT = 1000


def _crit1_instance(i):
    rng = _rng(1, i)
    alphabet, eps = CRIT1_COMBOS[i % len(CRIT1_COMBOS)]
    n = CRIT1_SIZES[i % len(CRIT1_SIZES)]
    j = random_target(rng, alphabet, eps, n)
    phi = labels_near_margins(rng, j, n)
    sigma, report = rearrange_line(phi, j, eps)
    return {
        "instance": i,
        "n": n,
        "alphabet": alphabet,
        "eps": eps,
        "connected": sigma.is_connected(),
        "achieved_error": report.achieved_error,
        "bound": report.bound,
        "components_after_merge": report.components_after_merge,
        "edges_changed_by_close": report.edges_changed_by_close,
    }


def _run_crit1(workers):
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(_crit1_instance, range(CRIT1_COUNT)))
    return json.dumps(records, sort_keys=True).encode()


@pytest.fixture(scope="module")
def crit1_run():
    start = time.perf_counter()
    payload = _run_crit1(workers=1)
    elapsed = time.perf_counter() - start
    return payload, elapsed


def test_criterion_1_rearrangement_bound(crit1_run):
    payload, elapsed = crit1_run
    records = json.loads(payload)
    assert len(records) == CRIT1_COUNT
    connected = sum(r["connected"] for r in records)
    within = sum(r["achieved_error"] < r["bound"] for r in records)
    assert connected == CRIT1_COUNT
    assert within == CRIT1_COUNT
    assert elapsed < 60.0
    print(
        f"\nACCEPTANCE 1 rearrangement bound: PASS "
        f"({connected}/{CRIT1_COUNT} connected, {within}/{CRIT1_COUNT} within "
        f"2|A|eps+3|A|^2/N, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion 2: per-claim checks, 500 randomized instances each
# ---------------------------------------------------------------------------


def test_criterion_2_claim_level_checks():
    failures = 0
    for i in range(500):
        rng = _rng(2, i)
        alphabet = int(rng.integers(2, 4))
        # eps clear of the 1/N label granularity, min-entry bar satisfiable
        eps = 0.01 if alphabet == 3 else float(rng.choice([0.01, 0.02]))
        n = int(rng.integers(300, 700))
        j = random_target(rng, alphabet, eps, n)
        phi = labels_near_margins(rng, j, n)
        pi = empirical_distribution(phi)

        rounded = round_coupling(j, pi, eps)
        if not (
            np.array_equal(rounded.counts.sum(axis=1), pi.counts)
            and np.array_equal(rounded.counts.sum(axis=0), pi.counts)
        ):
            failures += 1
            continue

        tau = build_tau(phi, rounded)
        j_tau = empirical_pair_distribution(phi, tau)
        gap = max(
            abs(Fraction(int(ct), n - 1) - Fraction(int(cr), n))
            for ct, cr in zip(j_tau.counts.ravel(), rounded.counts.ravel())
        )
        if gap > Fraction(2, n - 1):
            failures += 1
            continue

        tau_star, n_comp = _merge(phi.labels, alphabet, tau)
        if not np.array_equal(
            empirical_pair_distribution(phi, tau_star).counts, j_tau.counts
        ):
            failures += 1
            continue
        if n_comp > alphabet**2:
            failures += 1
            continue

        sigma, _, changed = _close(tau_star)
        if changed > alphabet**2 or int(np.count_nonzero(sigma != tau_star)) != changed:
            failures += 1
    assert failures == 0
    print("\nACCEPTANCE 2 claim-level checks: PASS (500 instances per claim, 0 failures)")


# ---------------------------------------------------------------------------
# criterion 3: exhaustive oracle at N <= 8
# ---------------------------------------------------------------------------

ORACLE_GRID = [
    np.full((2, 2), 0.25),
    np.array([[0.5, 0.0], [0.0, 0.5]]),
    np.array([[0.4, 0.1], [0.1, 0.4]]),
    np.array([[0.1, 0.4], [0.4, 0.1]]),
    np.array([[0.7, 0.1], [0.1, 0.1]]),
]


def test_criterion_3_exhaustive_oracle():
    start = time.perf_counter()
    checked = 0
    # degenerate single-symbol leg: the only coupling is [1], optimum is 0
    for n in range(2, 9):
        phi = Observable.constant(n)
        _, report = rearrange_line(phi, Coupling.from_probs([[1.0]]), 0.25, check=False)
        assert report.achieved_error == 0.0
        checked += 1
    for n in range(2, 9):
        orders = np.array(
            [(0, *mid, n - 1) for mid in iter_permutations(range(1, n - 1))],
            dtype=np.int64,
        )
        src, dst = orders[:, :-1], orders[:, 1:]
        rows = np.repeat(np.arange(orders.shape[0]), n - 1)
        slack = 4 / (n - 1)
        for bits in range(2**n):
            labels = np.array([(bits >> k) & 1 for k in range(n)], dtype=np.int64)
            phi = Observable(labels, 2)
            cells = labels[src] * 2 + labels[dst]
            counts = np.zeros((orders.shape[0], 4), dtype=np.int64)
            np.add.at(counts, (rows, cells.ravel()), 1)
            freq = counts / (n - 1)
            for jmat in ORACLE_GRID:
                j = Coupling.from_probs(jmat)
                sigma, report = rearrange_line(phi, j, 0.25, check=False)
                assert sigma.is_connected()
                best = np.abs(freq - jmat.ravel()[None, :]).max(axis=1).min()
                assert report.achieved_error <= best + slack + 1e-12
                checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(
        f"\nACCEPTANCE 3 exhaustive oracle: PASS ({checked} instances within "
        f"|A|^2/(N-1) of optimum, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion 4: orbit preservation, unconditional
# ---------------------------------------------------------------------------


def test_criterion_4_orbit_preservation():
    checked = 0
    for i in range(10_000):
        rng = _rng(4, i)
        n = int(rng.integers(1, 50))
        style = i % 5
        if style == 0:
            t = np.arange(n)  # identity: all fixed points
        elif style == 1:
            order = rng.permutation(n)
            t = np.arange(n)
            for u, v in zip(order[0 : 2 * (n // 2) : 2], order[1 : 2 * (n // 2) : 2]):
                t[u], t[v] = v, u  # involution
        elif style == 2:
            t = permutation_with_cycle_lengths([n], rng)  # single cycle
        elif style == 3:
            t = rng.permutation(n)
        else:
            lengths = []
            left = n
            while left:
                size = int(min(left, rng.integers(1, 6)))
                lengths.append(size)
                left -= size
            t = permutation_with_cycle_lengths(lengths, rng)
        alphabet = int(rng.integers(1, 4))
        psi = Observable(rng.integers(0, alphabet, size=n), alphabet)
        w = rng.random((alphabet, alphabet))
        w = w + w.T
        j = Coupling.from_probs(w / w.sum())
        t_new, report = rewire(t, psi, j, 0.12, check=False)
        assert verify_same_orbits(t, t_new)
        assert len(report.per_cycle) == len(cycle_decomposition(t).cycles)
        checked += 1
    assert checked == 10_000
    print("\nACCEPTANCE 4 orbit preservation: PASS (10000/10000 identical cycle partitions)")


# ---------------------------------------------------------------------------
# criterion 5: rewire bound on 200 hypothesis-satisfying instances at n = 1e5
# ---------------------------------------------------------------------------

CRIT5_COUNT = 200
CRIT5_N = 100_000


def _crit5_instance(i):
    rng = _rng(5, i)
    if i % 4 == 3:
        alphabet, eps = 3, 0.015
    else:
        alphabet, eps = 2, [0.02, 0.05, 0.05][i % 4 % 3]
    sampled = i % 2 == 0
    floor_needed = 2 * alphabet * eps
    floor = floor_needed + 0.5 * (1 / alphabet**2 - floor_needed)
    j = random_target(rng, alphabet, eps, CRIT5_N, headroom=0.5)
    if float(j.real.min()) <= floor_needed:
        raise AssertionError("instance generator produced a thin coupling")
    min_len = int(np.ceil(alphabet**2 / eps))
    if sampled:
        min_len = max(min_len, int(np.ceil(6 / eps**2)))
    k = int(rng.integers(2, max(3, min(9, CRIT5_N // min_len + 1))))
    k = min(k, CRIT5_N // min_len)
    base = [min_len] * k
    extra = CRIT5_N - min_len * k
    cuts = np.sort(rng.integers(0, extra + 1, size=k - 1)) if k > 1 else np.array([], int)
    parts = np.diff(np.concatenate(([0], cuts, [extra])))
    lengths = [b + int(p) for b, p in zip(base, parts)]
    t = permutation_with_cycle_lengths(lengths, rng)
    dec = cycle_decomposition(t)
    margins = j.row_margin()
    if sampled:
        labels = rng.choice(j.alphabet_size, size=CRIT5_N, p=margins / margins.sum())
    else:
        labels = np.empty(CRIT5_N, dtype=np.int64)
        for cyc in dec.cycles:
            counts = rounded_counts(margins, len(cyc))
            labels[cyc] = rng.permutation(np.repeat(np.arange(alphabet), counts))
    psi = Observable(labels.astype(np.int64), alphabet)
    bad_mass, _ = ergodic_profile(t, psi, eps)
    t_new, report = rewire(t, psi, j, eps)
    return {
        "instance": i,
        "alphabet": alphabet,
        "eps": eps,
        "hypotheses_hold": bool(
            bad_mass < eps and min(lengths) >= alphabet**2 / eps
        ),
        "same_orbits": verify_same_orbits(t, t_new),
        "achieved_error": report.achieved_error,
        "bound": report.bound,
        "good_mass": report.good_mass,
    }


def _run_crit5(workers):
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(_crit5_instance, range(CRIT5_COUNT)))
    return json.dumps(records, sort_keys=True).encode()


@pytest.fixture(scope="module")
def crit5_run():
    start = time.perf_counter()
    payload = _run_crit5(workers=1)
    elapsed = time.perf_counter() - start
    return payload, elapsed


def test_criterion_5_rewire_bound(crit5_run):
    payload, elapsed = crit5_run
    records = json.loads(payload)
    assert len(records) == CRIT5_COUNT
    assert all(r["hypotheses_hold"] for r in records)
    assert all(r["same_orbits"] for r in records)
    within = sum(r["achieved_error"] <= r["bound"] for r in records)
    assert within == CRIT5_COUNT
    assert elapsed < 120.0
    print(
        f"\nACCEPTANCE 5 rewire bound: PASS ({within}/{CRIT5_COUNT} within "
        f"9|A|eps at n=1e5, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion 6: end-to-end pipeline at n = 1e5
# ---------------------------------------------------------------------------

CRIT6_CONFIG = dict(
    n=100_000,
    rank=2,
    alphabet=2,
    eps_schedule=(0.1, 0.03, 0.01),
    seed=42,
    retries=5,
)


@pytest.fixture(scope="module")
def crit6_run():
    start = time.perf_counter()
    result = run_experiment(PipelineConfig(**CRIT6_CONFIG, workers=1))
    elapsed = time.perf_counter() - start
    return result, elapsed


def test_criterion_6_end_to_end_pipeline(crit6_run):
    result, elapsed = crit6_run
    assert elapsed < 300.0
    assert result.all_bounds_held
    final = result.reports[-1]
    assert final.eps == 0.01
    for g in final.generators:
        assert g.achieved_error <= 0.2
    assert all(r.orbit_equivalent for r in result.reports)
    csv_lines = result.csv_text.strip().splitlines()
    assert len(csv_lines) == 1 + 3 * CRIT6_CONFIG["rank"]
    kech = [r.kechris_distance for r in result.reports]
    assert all(a >= b for a, b in zip(kech, kech[1:]))
    print(
        f"\nACCEPTANCE 6 end-to-end pipeline: PASS (errors at eps=0.01 "
        f"{[round(g.achieved_error, 4) for g in final.generators]} <= 0.2, "
        f"kechris along schedule {[round(v, 5) for v in kech]}, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion 7: ball transport certificates on 100 constructed instances
# ---------------------------------------------------------------------------


def test_criterion_7_ball_transport():
    checked = 0
    for i in range(100):
        rng = _rng(7, i)
        if i % 10 < 7:
            # exact conjugacy: the generator-level hypothesis holds with gap 0
            rank = 1 + (i % 2)
            radius = 1 + (i % 2)
            n = int(rng.integers(40, 400))
            eps = float(rng.choice([0.2, 0.5]))
            v = FiniteAction.from_perms([rng.permutation(n) for _ in range(rank)])
            conj = rng.permutation(n)
            inv_c = inverse_permutation(conj)
            w = FiniteAction.from_perms([conj[p[inv_c]] for p in v.perms])
            p = Observable(rng.integers(0, 2, size=n), 2)
            pprime = refine_partition(p, ball(rank, radius), v)
            beta = Observable(pprime.labels[inv_c], pprime.alphabet_size)
        else:
            # rotation with an interval partition; opponent differs by one
            # transposition, small enough to keep the hypothesis strict
            rank, radius = 1, 2
            n = 30_000
            eps = 0.5
            shift = np.roll(np.arange(n), -1)
            v = FiniteAction.from_perms([shift])
            p = Observable((np.arange(n) >= n // 2).astype(np.int64), 2)
            perturbed = shift.copy()
            x, y = rng.choice(n, size=2, replace=False)
            perturbed[[x, y]] = perturbed[[y, x]]
            w = FiniteAction.from_perms([perturbed])
            pprime = refine_partition(p, ball(rank, radius), v)
            beta = np.arange(pprime.alphabet_size)
        cert = ball_transport_certificate(v, w, p, radius, beta, eps)
        assert cert.hypothesis_ok
        assert cert.claim1_max < eps / 2
        for g, val in cert.claim2_max_per_word.items():
            assert val <= cert.claim2_bound(g) + 1e-15
        assert cert.final_discrepancy < eps
        checked += 1
    assert checked == 100
    print("\nACCEPTANCE 7 ball transport: PASS (100/100 certificates within claim bounds)")


# ---------------------------------------------------------------------------
# criterion 8: sampled-observable calibration
# ---------------------------------------------------------------------------


def test_criterion_8_good_observable_calibration():
    successes = 0
    pi = Dist(np.array([1, 1]), 2)
    for seed in range(100):
        rng = _rng(8, seed)
        action = FiniteAction.from_perms(
            [permutation_with_cycle_lengths([10_000] * 10, rng) for _ in range(2)]
        )
        try:
            _, attempts = good_observable(action, pi, 0.05, 5, seed=seed)
        except Exception:
            continue
        if attempts <= 5:
            successes += 1
    assert successes >= 99
    print(
        f"\nACCEPTANCE 8 sampled-observable calibration: PASS "
        f"({successes}/100 seeds within 5 retries at eps=0.05)"
    )


# ---------------------------------------------------------------------------
# criterion 9: byte-identical reports across 1 and 8 worker threads
# ---------------------------------------------------------------------------


def test_criterion_9_determinism_across_workers(crit1_run, crit5_run, crit6_run):
    assert _run_crit1(workers=8) == crit1_run[0]
    assert _run_crit5(workers=8) == crit5_run[0]
    threaded = run_experiment(PipelineConfig(**CRIT6_CONFIG, workers=8))
    assert threaded.csv_text == crit6_run[0].csv_text
    assert threaded.json_text == crit6_run[0].json_text
    print(
        "\nACCEPTANCE 9 determinism: PASS (runs 1, 5, 6 byte-identical across "
        "1 and 8 worker threads)"
    )
