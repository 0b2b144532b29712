import io
import math

import numpy as np
import pytest

from duavsim import seeding
from duavsim.config import Strategy, SweepSpec, preset
from duavsim.deployment import place_nodes
from duavsim.secrecy import receiver_sinr, tagged_link
from duavsim.spectrum import TAG_CELLULAR, TAG_OVERLAY
from duavsim.engine import (CSV_HEADER, AllDegenerate, aggregate, emit_csv, run_drop,
                            run_ensemble, run_monte_carlo, run_sweep, simulate_drop, summarize)

SMALL = preset("aerial-ue", area_m2=2e4, n_drops=20, master_seed=11)


def test_drop_partitions_ue_set():
    cfg = preset("flying-bs", area_m2=2e4, master_seed=4)
    state = simulate_drop(cfg, [Strategy.NEW, Strategy.TRADITIONAL], 0)
    n_ue = len(state.deployment.ue_rows)
    for strategy, r in state.results.items():
        assert r.n_cellular + r.n_overlay + r.n_underlay + r.n_idle == n_ue
        plan = state.plans[strategy]
        assert (r.n_cellular, r.n_idle) == (plan.n_cellular, plan.n_idle)
        for v in (r.sr_overlay_bps, r.sr_cellular_bps):
            assert v is None or v >= 0.0


def test_no_eavesdroppers_gives_link_rate():
    cfg = SMALL.with_(eaves_density_per_m2=0.0)
    state = simulate_drop(cfg, [Strategy.NEW], 2)
    plan = state.plans[Strategy.NEW]
    r = state.results[Strategy.NEW]
    for tag, sr in ((TAG_OVERLAY, r.sr_overlay_bps), (TAG_CELLULAR, r.sr_cellular_bps)):
        link = tagged_link(plan, tag)
        if link is None:
            assert sr is None
            continue
        s_rx = receiver_sinr(link, plan, state.deployment, state.channels, cfg)
        assert sr == pytest.approx(link.bandwidth_hz * math.log2(1 + s_rx), rel=1e-12)


def test_drop_is_deterministic():
    a = run_drop(SMALL, "new", 3)
    assert run_drop(SMALL, "new", 3) == a
    assert simulate_drop(SMALL, ["new"], 3).deployment.positions.tobytes() == \
        simulate_drop(SMALL, ["new"], 3).deployment.positions.tobytes()


def test_singleton_ensemble():
    cfg = SMALL
    r = run_drop(cfg, "new", 0)
    assert not r.degenerate
    overlay, cellular = run_monte_carlo(cfg, "new", n_drops=1)
    for stats, v in ((overlay, r.sr_overlay_bps), (cellular, r.sr_cellular_bps)):
        assert stats.n_drops == 1
        if v is None:
            assert stats.n_effective == 0 and stats.skip_count == 1
        else:
            assert stats.mean_bps == v and stats.std_bps == 0.0
            assert stats.ci95_lo_bps == stats.ci95_hi_bps == v


def test_serial_and_parallel_agree():
    a = run_ensemble(SMALL, ["new", "traditional"], n_drops=12, workers=1)
    b = run_ensemble(SMALL, ["new", "traditional"], n_drops=12, workers=2)
    assert a == b


def test_ci_shrinks_like_root_n():
    cfg = preset("aerial-ue", area_m2=2e4)
    ratios = []
    for seed in range(4):
        c = cfg.with_(master_seed=1000 + seed)
        small = run_monte_carlo(c, "new", n_drops=40)[0]
        large = run_monte_carlo(c, "new", n_drops=80)[0]
        ratios.append(large.ci_half_width / small.ci_half_width)
    # expected 1/sqrt(2) = 0.707 averaged over repeated ensembles
    assert 0.5 <= float(np.mean(ratios)) <= 0.95


def test_summarize():
    n, mean, std, lo, hi = summarize([1.0, 3.0, None, math.nan])
    assert (n, mean) == (2, 2.0)
    assert std == pytest.approx(math.sqrt(2.0))
    assert hi - mean == pytest.approx(1.959963984540054 * math.sqrt(2.0) / math.sqrt(2))
    assert summarize([])[0] == 0


def test_all_degenerate_raises():
    cfg = SMALL.with_(ue_density_per_m2=0.0, uav_density_per_m2=0.0)
    with pytest.raises(AllDegenerate) as info:
        run_monte_carlo(cfg, "new", n_drops=3)
    assert info.value.skip_count == 3


def test_skip_accounting_and_stats_invariants():
    rows = run_sweep(SMALL, SweepSpec("eaves_density_per_m2", (0.001, 0.01)), ["new", "traditional"],
                     n_drops=10)
    for row in rows:
        assert row.n_effective + row.skip_count == row.n_drops == 10
        if row.n_effective:
            assert row.ci95_lo_bps <= row.mean_bps <= row.ci95_hi_bps


def test_sweep_shape_and_order():
    rows = run_sweep(SMALL, SweepSpec("eaves_density_per_m2", (0.001, 0.04)), {"new", "traditional"},
                     n_drops=4)
    assert len(rows) == 8
    keys = [(r.sweep_value, r.strategy.value, r.link) for r in rows]
    assert keys == [(v, s, l) for v in (0.001, 0.04) for s in ("traditional", "new")
                    for l in ("overlay", "cellular")]
    assert run_sweep(SMALL, SweepSpec("eaves_density_per_m2", (0.001,)), set(), n_drops=4) == []


def test_uav_density_sweep():
    values = (1e-3, 2e-3, 3.5e-3, 5.5e-3)
    rows = run_sweep(SMALL, SweepSpec("uav_density_per_m2", values), ["new"], n_drops=3)
    assert [r.sweep_value for r in rows] == [v for v in values for _ in range(2)]
    assert {r.scenario for r in rows} == {"aerial-ue"}


def test_sweep_points_share_drop_seeds():
    # the sparser eavesdropper set is a prefix of the denser one in every drop
    lo = SMALL.with_(eaves_density_per_m2=0.001)
    hi = SMALL.with_(eaves_density_per_m2=0.01)
    a, b = place_nodes(lo, seeding.drop_seed(11, 0)), place_nodes(hi, seeding.drop_seed(11, 0))
    ea, eb = a.positions[a.eaves_rows], b.positions[b.eaves_rows]
    np.testing.assert_array_equal(eb[: len(ea)], ea)
    np.testing.assert_array_equal(a.positions[a.ue_rows], b.positions[b.ue_rows])


def test_emit_csv(tmp_path):
    sweep = SweepSpec("eaves_density_per_m2", (0.001, 0.04))
    rows = run_sweep(SMALL, sweep, ["new", "traditional"], n_drops=4)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(rows, p1)
    emit_csv(run_sweep(SMALL, sweep, ["new", "traditional"], n_drops=4), p2)
    lines = p1.read_text().splitlines()
    assert len(lines) == 9
    assert lines[0] == ",".join(CSV_HEADER)
    assert p1.read_bytes() == p2.read_bytes()
    # full precision survives a round trip
    first = lines[1].split(",")
    if first[8]:
        assert float(first[8]) == rows[0].mean_bps
    buf = io.StringIO()
    emit_csv([], buf)
    assert buf.getvalue() == ",".join(CSV_HEADER) + "\n"


def test_aggregate_counts_missing_links():
    results = run_ensemble(SMALL, ["new"], n_drops=6)[Strategy.NEW]
    stats = aggregate(results, "cellular", SMALL)
    assert stats.n_effective == sum(r.sr_cellular_bps is not None for r in results)
    assert len(stats.values) == 6
