import os

import numpy as np
import pytest

from repmut.bifurcation import (
    _parallel_map,
    bt_point,
    classify_region,
    conjecture_harness,
    cusp_point,
    fold_curve_uniform,
    homoclinic_trace,
    hopf_curve_alld_allc,
    hopf_curve_tft_allc,
    hopf_detect_numeric,
    random_admissible_m,
    sn_curve_alld_allc,
    sn_curve_tft_allc,
    stability_diagram,
)
from repmut.model import ParamError


def test_sn_curves_at_zero():
    assert sn_curve_tft_allc(0.0) == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert sn_curve_alld_allc(0.0) == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_sn_curves_decreasing_near_zero():
    assert sn_curve_tft_allc(0.01) < sn_curve_tft_allc(0.001)
    assert sn_curve_alld_allc(0.01) < sn_curve_alld_allc(0.001)


HOPF_A_REFERENCE = {
    0.01: 0.0018229261,
    0.02: 0.0074321720,
    0.03: 0.0171937548,
    0.04: 0.0318238225,
    0.05: 0.0528040554,
}


def test_hopf_tft_allc_reference_values():
    for mu, c_ref in HOPF_A_REFERENCE.items():
        assert hopf_curve_tft_allc(mu) == pytest.approx(c_ref, abs=1e-8)


def test_hopf_alld_allc_reference_value():
    assert hopf_curve_alld_allc(0.08) == pytest.approx(0.1724442276, abs=1e-8)


def test_hopf_outside_domain_raises():
    with pytest.raises(ParamError):
        hopf_curve_alld_allc(0.03)  # below the Bogdanov-Takens mu
    with pytest.raises(ParamError):
        hopf_curve_tft_allc(0.3)


def test_hopf_numeric_matches_closed_form():
    c = hopf_curve_tft_allc(0.03)
    cn = hopf_detect_numeric("tft_to_allc", 0.03, (0.5 * c, 1.5 * c))
    assert cn == pytest.approx(c, abs=1e-8)


def test_hopf_numeric_no_crossing_raises():
    with pytest.raises(ParamError):
        hopf_detect_numeric("tft_to_allc", 0.03, (0.3, 0.32))


def test_bt_points():
    bt_a = bt_point("tft_to_allc")
    assert (bt_a.mu, bt_a.c) == pytest.approx((0.0576419575, 0.3018029240), abs=1e-6)
    bt_b = bt_point("alld_to_allc")
    assert (bt_b.mu, bt_b.c) == pytest.approx((0.0655808490, 0.2246185686), abs=1e-6)
    bt_u = bt_point("uniform")
    assert (bt_u.mu, bt_u.c) == pytest.approx((0.0185524036, 0.4329000294), abs=1e-5)
    for bt in (bt_a, bt_b, bt_u):
        assert bt.residual < 1e-10
        assert bt.kind == "bogdanov_takens"


def test_bt_on_sn_curve():
    bt = bt_point("tft_to_allc")
    assert sn_curve_tft_allc(bt.mu) == pytest.approx(bt.c, abs=1e-8)
    bt = bt_point("alld_to_allc")
    assert sn_curve_alld_allc(bt.mu) == pytest.approx(bt.c, abs=1e-8)


def test_fold_branch_spans_both_folds():
    branch = fold_curve_uniform()
    assert len(branch) > 50
    cs = [p.c for p in branch]
    # both fold branches present: costs well below and well above the cusp
    assert min(cs) < 0.1
    assert max(cs) > 0.6


def test_cusp_point():
    cp = cusp_point()
    assert (cp.mu, cp.c) == pytest.approx((0.0330992680, 0.3982424829), abs=1e-5)
    assert cp.kind == "cusp"


HOMOCLINIC_REFERENCE = {
    ("tft_to_allc", 0.01, (0.05, 0.5)): 0.117044,
    ("tft_to_allc", 0.05, (0.06, 0.3)): 0.197959,
    ("alld_to_allc", 0.01, (0.005, 0.05)): 0.020337,
    ("alld_to_allc", 0.05, (0.02, 0.2)): 0.080864,
}


def test_homoclinic_reference_values():
    for (system_id, mu, bracket), c_ref in HOMOCLINIC_REFERENCE.items():
        res = homoclinic_trace(system_id, mu, bracket)
        assert res.c == pytest.approx(c_ref, abs=1e-3)
        assert res.bracket[1] - res.bracket[0] <= 1e-4
        assert res.cycle_side == "below"


def test_homoclinic_bad_bracket_raises():
    with pytest.raises(ParamError):
        homoclinic_trace("tft_to_allc", 0.05, (0.4, 0.5))  # no cycle at either end


def test_homoclinic_period_blowup():
    res = homoclinic_trace("alld_to_allc", 0.05, (0.02, 0.2))
    # periods observed during bisection grow far beyond the mid-region period
    assert res.max_period_observed > 100.0


REGION_PROBES = {
    "tft_to_allc": {
        (0.05, 0.55): (1, {"almost_ALLD_point"}),
        (0.05, 0.30): (2, {"almost_ALLD_point"}),
        (0.05, 0.10): (3, {"almost_ALLD_point", "stable_cycle"}),
        (0.05, 0.03): (4, {"almost_ALLD_point", "stable_spiral"}),
    },
    "alld_to_allc": {
        (0.05, 0.50): (1, {"almost_ALLD_point"}),
        (0.05, 0.25): (2, {"almost_ALLD_point"}),
        (0.05, 0.04): (3, {"almost_ALLD_point", "stable_cycle"}),
        (0.08, 0.175): (4, {"almost_ALLD_point", "stable_spiral"}),
    },
    "uniform": {
        (0.005, 0.60): (1, {"almost_ALLD_point"}),
        (0.005, 0.30): (2, {"almost_ALLD_point"}),
        (0.001, 0.20): (3, {"almost_ALLD_point", "stable_cycle"}),
        (0.002, 0.12): (4, {"stable_cycle"}),
        (0.002, 0.08): (5, {"stable_spiral"}),
    },
}


@pytest.mark.parametrize("system_id", sorted(REGION_PROBES))
def test_classify_region_probes(system_id):
    for (mu, c), (region, inventory) in REGION_PROBES[system_id].items():
        label = classify_region(system_id, mu, c)
        assert label.region_id == region, (mu, c, label)
        assert set(label.inventory) == inventory, (mu, c, label)


def test_stability_diagram_pairwise():
    d = stability_diagram(
        "tft_to_allc", resolution=40, homoclinic_samples=2
    )
    kinds = {cv.kind for cv in d.curves}
    assert kinds == {"saddle_node", "hopf", "homoclinic"}
    assert d.bt is not None and d.cusp is None
    hom = next(cv for cv in d.curves if cv.kind == "homoclinic")
    assert len(hom.samples) == 2


def test_stability_diagram_uniform():
    d = stability_diagram(
        "uniform", resolution=40, homoclinic_samples=0
    )
    assert d.bt is not None and d.cusp is not None
    sn = next(cv for cv in d.curves if cv.kind == "saddle_node")
    assert sn.method == "numeric_continuation"
    assert len(sn.samples) > 50


def test_random_admissible_m_properties():
    rng = np.random.default_rng(5)
    for _ in range(10):
        m = random_admissible_m(rng)
        assert np.allclose(m.sum(axis=1), 0.0, atol=1e-12)
        off = m[~np.eye(3, dtype=bool)]
        assert (off <= 0).all()
        assert (np.diag(m) >= 0).all()


def test_conjecture_harness_reports():
    reports = conjecture_harness(n_matrices=2, seed=7)
    assert len(reports) == 2
    for r in reports:
        assert set(r) == {"matrix", "cycle_found", "cycle"}
        if r["cycle_found"]:
            assert r["cycle"]["period"] > 0


def test_parallel_map_respects_thread_env(monkeypatch):
    monkeypatch.setenv("REPMUT_THREADS", "1")
    assert _parallel_map(lambda v: v * v, [1, 2, 3]) == [1, 4, 9]
    monkeypatch.setenv("REPMUT_THREADS", "4")
    assert _parallel_map(lambda v: v * v, [1, 2, 3]) == [1, 4, 9]
