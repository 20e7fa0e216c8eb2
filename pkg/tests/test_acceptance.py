"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion (a failed assertion marks the criterion FAIL).
"""

import math
import time

import numpy as np

import relay_aloha as ra
from relay_aloha.config import make_app_config, resolve
from relay_aloha.numerics import regularized_gamma_p, regularized_gamma_q
from relay_aloha.sweep import SweepSpec, emit_csv, run_sweep
from relay_aloha.validate import run_consistency_grid


class _Budget:
    """Wall-clock guard for a criterion's stated runtime limit."""

    def __init__(self, seconds: float):
        self.limit = seconds
        self.start = time.perf_counter()

    def check(self) -> float:
        elapsed = time.perf_counter() - self.start
        assert elapsed < self.limit, f"runtime {elapsed:.1f}s exceeded {self.limit:.0f}s budget"
        return elapsed


def _report(name: str, detail: str, elapsed: float) -> None:
    print(f"PASS  {name}: {detail} [{elapsed:.2f}s]")


def test_criterion_1_series_vs_closed_form_grid():
    budget = _Budget(5.0)
    report = run_consistency_grid(tolerance=1e-9, tail_tol=1e-12)
    assert report.points == 8 * 6 * 3 * 3 * 2
    assert report.passed, report.to_text()
    elapsed = budget.check()
    _report(
        "criterion 1 (series/closed-form equivalence)",
        f"max |diff| = {report.max_abs_diff:.2e} <= 1e-9 over {report.points} points",
        elapsed,
    )


def test_criterion_2_classical_slotted_aloha_limit():
    budget = _Budget(1.0)
    worst = 0.0
    for g in np.linspace(0.0, 10.0, 101):
        cfg = ra.SystemConfig(load_g=float(g), num_relays=1, forward_prob=1.0,
                              eps_vlc=0.0, eps_rf=0.0)
        expected = g * math.exp(-g)
        for res in (ra.end_to_end_closed_form(cfg), ra.end_to_end_series(cfg)):
            worst = max(worst, abs(res.value - expected))
            assert abs(res.value - expected) <= 1e-12
    cfg = ra.SystemConfig(load_g=1.0, num_relays=1, forward_prob=1.0, eps_vlc=0.0, eps_rf=0.0)
    g_opt, s_max = ra.optimal_load(cfg, 0.0, 10.0, tol=1e-4)
    assert abs(g_opt - 1.0) < 1e-4
    assert abs(s_max - math.exp(-1.0)) < 1e-8
    elapsed = budget.check()
    _report(
        "criterion 2 (classical SA limit)",
        f"max |S - G e^-G| = {worst:.1e} <= 1e-12; G_opt = {g_opt:.6f}",
        elapsed,
    )


def test_criterion_3_simulation_vs_analysis():
    budget = _Budget(120.0)
    master = np.random.default_rng(20250810)
    slots = 1_000_000
    ok_e2e = ok_up = 0
    for i in range(20):
        k = int(master.integers(1, 7))
        g = float(master.uniform(0.1, 8.0))
        ev = float(master.uniform(0.05, 0.95))
        er = float(master.uniform(0.0, 0.7))
        d = float(master.uniform(0.5, 1.0))
        sysc = ra.SystemConfig(load_g=g, num_relays=k, forward_prob=d, eps_vlc=ev, eps_rf=er)
        out = ra.simulate(ra.SimConfig(system=sysc, num_slots=slots, seed=1000 + i))
        closed = ra.end_to_end_closed_form(sysc).value
        uplink = ra.uplink_throughput(g, ev)
        ok_e2e += abs(out.end_to_end.mean - closed) < 3.0 * out.end_to_end.stderr
        ok_up += abs(out.uplink.mean - uplink) < 3.0 * out.uplink.stderr
    assert ok_e2e >= 19, f"end-to-end agreement only {ok_e2e}/20"
    assert ok_up >= 19, f"uplink agreement only {ok_up}/20"
    elapsed = budget.check()
    _report(
        "criterion 3 (simulation vs analysis, 20 seeded configs x 1e6 slots)",
        f"end-to-end {ok_e2e}/20 and uplink {ok_up}/20 within 3 stderr",
        elapsed,
    )


def test_criterion_4_vlc_distribution_identity():
    budget = _Budget(5.0)
    resolved = resolve(make_app_config())
    rng = np.random.default_rng(4)
    samples = np.sort(ra.sample_user_snr(resolved.model, resolved.derived, rng, size=100_000))
    d = ra.ks_statistic(samples, lambda g: ra.vlc_snr_cdf(resolved.model, resolved.derived, g))
    assert d < 0.01
    elapsed = budget.check()
    _report(
        "criterion 4 (VLC distribution identity)",
        f"KS = {d:.4f} < 0.01 at 1e5 draws",
        elapsed,
    )


def test_criterion_5_nakagami_kernel():
    budget = _Budget(10.0)
    params = ra.RfChannelParams(m1=1.0, mu_rf=6.0)
    assert abs(ra.rf_snr_cdf(params, 6.0) - (1.0 - math.exp(-1.0))) <= 1e-10
    worst_ks = 0.0
    for m1 in (0.5, 1.0, 2.0, 3.5):
        p = ra.RfChannelParams(m1=m1, mu_rf=8.0)
        rng = np.random.default_rng(int(m1 * 100))
        samples = np.sort(ra.sample_rf_snr(p, rng, size=100_000))
        d = ra.ks_statistic(samples, lambda g: np.array([ra.rf_snr_cdf(p, x) for x in g]))
        worst_ks = max(worst_ks, d)
        assert d < 0.01, f"m1={m1}: KS={d}"
    rng = np.random.default_rng(55)
    worst_unity = 0.0
    for _ in range(100):
        a = float(rng.uniform(0.5, 25.0))
        x = float(rng.uniform(0.0, 50.0))
        gap = abs(regularized_gamma_q(a, x) + regularized_gamma_p(a, x) - 1.0)
        worst_unity = max(worst_unity, gap)
        assert gap <= 1e-10
    elapsed = budget.check()
    _report(
        "criterion 5 (Nakagami kernel)",
        f"Rayleigh CDF exact, worst sampler KS = {worst_ks:.4f} < 0.01, "
        f"worst |Q+P-1| = {worst_unity:.1e} <= 1e-10",
        elapsed,
    )


def test_criterion_6_ancillary_recursion_fixtures():
    budget = _Budget(1.0)
    assert abs(ra.ancillary_h(1, 1.0) - math.e) <= 1e-12
    assert abs(ra.ancillary_h(2, 1.0) - 2.0 * math.e) <= 1e-12
    for m in range(1, 21):
        assert ra.ancillary_h(m, 0.0) == 0.0
    elapsed = budget.check()
    _report(
        "criterion 6 (ancillary recursion fixtures)",
        "H_1(1)=e and H_2(1)=2e to 1e-12; H_m(0)=0 for m=1..20",
        elapsed,
    )


def test_criterion_7_qualitative_trend_reproduction():
    budget = _Budget(30.0)
    rows = ra.run_trend_rows(make_app_config())
    text = ra.report_trends(rows)
    print(text)
    assert "FAIL" not in text and text.count("PASS") == 4
    elapsed = budget.check()
    _report(
        "criterion 7 (trend reproduction T1-T4)",
        "low-load relay penalty, G_opt vs K, G_opt vs L, throughput vs m1 all PASS",
        elapsed,
    )


def test_criterion_8_vanishing_optical_erasure():
    budget = _Budget(1.0)
    worst = 0.0
    for k in range(1, 7):
        cfg = ra.SystemConfig(load_g=0.5, num_relays=k, forward_prob=0.5,
                              eps_vlc=1e-6, eps_rf=0.5)
        q = cfg.forward_prob * (1.0 - cfg.eps_rf)
        limit = 0.5 * math.exp(-0.5) * k * q * (1.0 - q) ** (k - 1)
        res = ra.end_to_end_closed_form(cfg)
        assert res.method == "closed_form"
        worst = max(worst, abs(res.value - limit))
        assert abs(res.value - limit) < 1e-6
    elapsed = budget.check()
    _report(
        "criterion 8 (eps_vlc -> 0 singularity handling)",
        f"closed form at eps=1e-6 within {worst:.1e} of the analytic limit for K=1..6",
        elapsed,
    )


def test_criterion_9_determinism(tmp_path):
    budget = _Budget(60.0)
    spec = SweepSpec(
        parameter="load_g",
        values=tuple(np.linspace(0.5, 3.0, 6)),
        base=make_app_config(),
        engines=("closed_form", "series", "simulation"),
        num_slots=20_000,
        seed=99,
    )
    p1, p2 = tmp_path / "run1.csv", tmp_path / "run2.csv"
    emit_csv(run_sweep(spec), str(p1))
    emit_csv(run_sweep(spec), str(p2))
    assert p1.read_bytes() == p2.read_bytes()

    cfg = ra.SimConfig(
        system=ra.SystemConfig(load_g=2.0, num_relays=4, forward_prob=0.9,
                               eps_vlc=0.4, eps_rf=0.2),
        num_slots=200_000, seed=17,
    )
    serial = ra.simulate(cfg, workers=1)
    parallel = ra.simulate(cfg, workers=4)
    assert serial.end_to_end == parallel.end_to_end
    assert serial.uplink == parallel.uplink
    assert serial.trace == parallel.trace
    elapsed = budget.check()
    _report(
        "criterion 9 (determinism)",
        "sweep CSVs byte-identical; parallel and serial statistics identical",
        elapsed,
    )
