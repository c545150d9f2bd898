"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`.  The desk-scale study
(criteria 9 and 12) executes exactly twice across the whole module: once via
the shared fixture and once more for the determinism re-run.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from wass1d.dpm import (
    ChainConfig,
    DpmConfig,
    draw_location_clusters,
    location_posterior_params,
    prior_predictive_sample,
    run_chain,
    tail_mass_diagnostic,
)
from wass1d.dyadic_bounds import (
    ApproximationUndefinedError,
    bound_compact,
    bound_unbounded,
    coupling_discrepancy,
)
from wass1d.experiments import StudyConfig, cell_seed, run_study, splitmix64
from wass1d.measures import (
    DiscreteMeasure,
    SortedSample,
    dyadic_cells,
    empirical_from_sample,
)
from wass1d.reference import StandardNormal, approx_error_bound, by_name, discretize
from wass1d.reference import sample as draw_sample
from wass1d.wasserstein import (
    w1_cdf,
    w1_duality_gap,
    wp_quantile,
    wp_sorted_equal,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:02d}] {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num} ({name}): {detail}"


def random_measure(rng, max_atoms=8, lo=-1.0, hi=1.0):
    n = int(rng.integers(1, max_atoms + 1))
    atoms = lo + (hi - lo) * (1.0 - rng.random(n))
    return DiscreteMeasure(atoms, rng.dirichlet(np.ones(n)))


_PERMS = {n: np.array(list(itertools.permutations(range(n)))) for n in range(1, 8)}


def brute_force_power(x, y, p):
    n = len(x)
    costs = np.abs(x[:, None] - y[None, :]) ** p
    totals = costs[np.arange(n)[None, :], _PERMS[n]].sum(axis=1)
    return float(totals.min()) / n


@pytest.fixture(scope="module")
def desk_config(tmp_path_factory) -> StudyConfig:
    raw = StudyConfig.from_json(CONFIG_DIR / "desk.json").to_dict()
    raw["out"] = str(tmp_path_factory.mktemp("desk") / "run1")
    return StudyConfig.from_dict(raw)


@pytest.fixture(scope="module")
def desk_run(desk_config):
    start = time.perf_counter()
    results, summary = run_study(desk_config)
    return results, summary, time.perf_counter() - start


def test_criterion_01_sorted_coupling_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 8))
        x = np.sort(rng.standard_normal(n) * 2.0)
        y = np.sort(rng.standard_normal(n) * 2.0)
        for p in (1.0, 2.0, 3.0):
            fast = wp_sorted_equal(SortedSample(x), SortedSample(y), p)
            slow = brute_force_power(x, y, p)
            worst = max(worst, abs(fast - slow))
    elapsed = time.perf_counter() - start
    report(1, "sorted-coupling exactness", worst <= 1e-12 and elapsed < 5.0,
           f"max gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_quantile_cdf_agreement():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(500):
        a = random_measure(rng, max_atoms=10, lo=-4.0, hi=4.0)
        b = random_measure(rng, max_atoms=10, lo=-4.0, hi=4.0)
        worst = max(worst, abs(wp_quantile(a, b, 1.0) - w1_cdf(a, b)))
    exact = True
    for _ in range(200):
        n = int(rng.integers(1, 40))
        x = np.sort(rng.standard_normal(n))
        y = np.sort(rng.standard_normal(n))
        via_samples = wp_sorted_equal(SortedSample(x), SortedSample(y), 2.0)
        via_measures = wp_quantile(
            empirical_from_sample(SortedSample(x)),
            empirical_from_sample(SortedSample(y)),
            2.0,
        )
        exact = exact and (via_samples == via_measures)
    elapsed = time.perf_counter() - start
    report(2, "quantile/CDF agreement", worst <= 1e-10 and exact and elapsed < 5.0,
           f"max gap {worst:.2e}, equal-weight exact={exact}, {elapsed:.1f}s")


def test_criterion_03_compact_bound_dominance():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    violations = 0
    for _ in range(1000):
        P = random_measure(rng, max_atoms=6)
        Q = random_measure(rng, max_atoms=6)
        for p in (1.0, 2.0):
            exact = wp_quantile(P, Q, p)
            for L in range(1, 9):
                if bound_compact(P, Q, L, p).bound < exact:
                    violations += 1
    elapsed = time.perf_counter() - start
    report(3, "compact bound dominance", violations == 0 and elapsed < 10.0,
           f"{violations} violations, {elapsed:.1f}s")


def test_criterion_04_unbounded_bound_dominance():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    violations = recursive_below = 0
    for _ in range(500):
        P = random_measure(rng, max_atoms=6, lo=-8.0, hi=8.0)
        Q = random_measure(rng, max_atoms=6, lo=-8.0, hi=8.0)
        for p in (1.0, 2.0):
            exact = wp_quantile(P, Q, p)
            exact_mode = bound_unbounded(P, Q, p).bound
            if exact_mode < exact:
                violations += 1
            if bound_unbounded(P, Q, p, inner="recursive", L=4).bound < exact_mode:
                recursive_below += 1
    elapsed = time.perf_counter() - start
    report(4, "block bound dominance", violations == 0 and recursive_below == 0
           and elapsed < 10.0,
           f"{violations} violations, {recursive_below} recursive gaps, {elapsed:.1f}s")


def test_criterion_05_partition_coupling_identity():
    rng = np.random.default_rng(505)
    checked = 0
    exact = True
    while checked < 200:
        P = random_measure(rng, max_atoms=10)
        Q = random_measure(rng, max_atoms=10)
        cells = dyadic_cells(int(rng.integers(0, 4)))
        try:
            got = coupling_discrepancy(P, Q, cells)
        except ApproximationUndefinedError:
            continue
        pm = [P.mass_in(*c.bounds) for c in cells]
        qm = [Q.mass_in(*c.bounds) for c in cells]
        expect = 0.5 * math.fsum(abs(a - b) for a, b in zip(pm, qm))
        exact = exact and (got == expect)
        checked += 1
    with pytest.raises(ApproximationUndefinedError):
        coupling_discrepancy(
            DiscreteMeasure(np.array([0.25]), np.array([1.0])),
            DiscreteMeasure(np.array([-0.5, 0.5]), np.array([0.5, 0.5])),
            dyadic_cells(1),
        )
    report(5, "partition coupling identity", exact, f"{checked} defined triples")


def test_criterion_06_duality_lower_bound():
    rng = np.random.default_rng(606)
    violations = 0
    for _ in range(1000):
        P = random_measure(rng, max_atoms=10, lo=-5.0, hi=5.0)
        Q = random_measure(rng, max_atoms=10, lo=-5.0, hi=5.0)
        if w1_duality_gap(P, Q) > wp_quantile(P, Q, 1.0) + 1e-12:
            violations += 1
    report(6, "moment-gap duality bound", violations == 0, f"{violations} violations")


def test_criterion_07_discretization_error_bounds():
    start = time.perf_counter()
    ms = [2 ** k for k in range(4, 13)]
    monotone = True
    for name in ("uniform", "normal", "laplace", "t20", "t10", "t5"):
        dist = by_name(name)
        for p in (1.0, 2.0):
            values = [approx_error_bound(dist, M, p) for M in ms]
            monotone = monotone and all(
                b <= a * (1 + 1e-12) for a, b in zip(values, values[1:])
            )
    divergent = approx_error_bound(by_name("t5"), 64, 8.0) == math.inf
    normal = StandardNormal()
    xs = normal.quantile(np.array([0.5, 0.75]))
    tail_oracle, _ = quad(lambda x: (x - xs[1]) * float(normal.pdf(x)), xs[1], np.inf,
                          epsabs=1e-12, epsrel=1e-12)
    oracle = 2.0 * tail_oracle + 2.0 * (xs[1] - xs[0])
    got = approx_error_bound(normal, 4, 1.0)
    close = abs(got - oracle) <= 1e-3 and abs(got - 1.647) <= 1e-3
    elapsed = time.perf_counter() - start
    report(7, "discretization error bound", monotone and divergent and close
           and elapsed < 30.0,
           f"normal p1 M4 = {got:.6f} vs oracle {oracle:.6f}, {elapsed:.1f}s")


def test_criterion_08_empirical_rate(tmp_path):
    start = time.perf_counter()
    config = StudyConfig(
        distributions=("normal",),
        p_values=(1.0,),
        n_grid=(100, 400, 1600, 6400),
        repetitions=50,
        M=20_000,
        mode="empirical-baseline",
        seed=808,
        out=str(tmp_path / "rate"),
    )
    _, summary = run_study(config)
    ns = np.array([row[2] for row in summary], dtype=float)
    medians = np.array([row[3] for row in summary])
    slope = float(np.polyfit(np.log(ns), np.log(medians), 1)[0])
    elapsed = time.perf_counter() - start
    report(8, "empirical n^(-1/2) benchmark", -0.65 <= slope <= -0.35 and elapsed < 120.0,
           f"slope {slope:.3f}, {elapsed:.1f}s")


def test_criterion_09_dpm_desk_contraction(desk_config, desk_run):
    results, summary, elapsed = desk_run
    medians = {row[2]: row[3] for row in summary}
    ns = sorted(medians)
    decreasing = all(medians[a] > medians[b] for a, b in zip(ns, ns[1:]))

    qm = discretize(StandardNormal(), desk_config.M)
    prior_medians = {}
    for n in ns:
        vals = []
        for rep in range(desk_config.repetitions):
            seed = splitmix64(cell_seed(desk_config.seed, "normal-prior", 1.0, n, rep))
            draws = prior_predictive_sample(
                desk_config.dpm, desk_config.chain.n_draws, seed
            )
            prior = empirical_from_sample(SortedSample(np.sort(draws)))
            vals.append(wp_quantile(prior, qm, 1.0))
        prior_medians[n] = float(np.median(vals))
    below = all(medians[n] < prior_medians[n] for n in ns)
    detail = ", ".join(
        f"n={n}: {medians[n]:.4f} (prior {prior_medians[n]:.4f})" for n in ns
    )
    report(9, "desk-scale posterior contraction",
           decreasing and below and elapsed < 900.0, f"{detail}, {elapsed:.0f}s")


def test_criterion_10_conjugacy_unit():
    mean, var = location_posterior_params(1, 1.0, 1.0, DpmConfig())
    rng = np.random.default_rng(1010)
    cfg = DpmConfig(fixed_sigma2=1.0)
    draws = np.array(
        [
            draw_location_clusters(np.array([1.0]), np.array([1.0]), 1.0, cfg, rng)[0]
            for _ in range(10_000)
        ]
    )
    se_mean = math.sqrt(0.5 / draws.size)
    se_var = 0.5 * math.sqrt(2.0 / (draws.size - 1))
    ok = (
        (mean, var) == (0.5, 0.5)
        and abs(draws.mean() - 0.5) < 3 * se_mean
        and abs(draws.var(ddof=1) - 0.5) < 3 * se_var
    )
    report(10, "single-cluster conjugacy",
           ok, f"mean {draws.mean():.4f}, var {draws.var(ddof=1):.4f}")


def test_criterion_11_tail_mass_diagnostics():
    masses = [4.0 ** -m for m in range(1, 11)]
    designed = DiscreteMeasure(
        np.array([1.0] + [2.0 ** m for m in range(1, 11)]),
        np.array([1.0 - sum(masses)] + masses),
    )
    designed_ok = tail_mass_diagnostic(designed, 2.0, 10).k_prime == 1.0

    kps = []
    for seed in range(5):
        data = draw_sample(StandardNormal(), 800, 4000 + seed)
        draws, _ = run_chain(
            data, DpmConfig(), ChainConfig(burn_in=300, n_draws=2000, seed=seed)
        )
        measure = empirical_from_sample(SortedSample(np.sort(draws)))
        kps.append(tail_mass_diagnostic(measure, 2.0, 10).k_prime)
    finite = all(math.isfinite(k) for k in kps)
    stable = max(kps) <= 3.0 * min(kps)
    report(11, "tail-mass diagnostic",
           designed_ok and finite and stable,
           f"designed K'=1 exact={designed_ok}, fitted K' in [{min(kps):.3f}, {max(kps):.3f}]")


def test_criterion_12_study_determinism(desk_config, desk_run, tmp_path):
    raw = desk_config.to_dict()
    raw["out"] = str(tmp_path / "run2")
    rerun_config = StudyConfig.from_dict(raw)
    run_study(rerun_config)

    def stripped(path: Path) -> list[str]:
        return [",".join(line.split(",")[:-1]) for line in path.read_text().splitlines()]

    first = stripped(Path(desk_config.out) / "results.csv")
    second = stripped(Path(rerun_config.out) / "results.csv")
    report(12, "study determinism", first == second,
           f"{len(first) - 1} rows compared byte-for-byte (runtime column excluded)")
