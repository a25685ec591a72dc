import numpy as np
import pytest

from repmut.cycles import cycle_metrics, detect_limit_cycle, rotation_order
from repmut.dynamics import named_field
from repmut.model import SimplexState


@pytest.fixture(scope="module")
def reference_cycle():
    field = named_field("alld_to_allc", 0.08, 0.04)
    record = detect_limit_cycle(field)
    assert record is not None
    return record


def test_cycle_exists_and_is_stable(reference_cycle):
    assert reference_cycle.stable
    assert reference_cycle.period > 0


def test_cycle_period_reference_value(reference_cycle):
    # repository reference value, validated by the return map itself
    assert reference_cycle.period == pytest.approx(67.158, abs=0.01)


def test_returns_contract(reference_cycle):
    rs = np.asarray(reference_cycle.returns)
    devs = np.abs(rs - rs[-1])
    devs = devs[devs > 1e-6]
    assert (np.diff(devs) < 0).all()


def test_orbit_closes(reference_cycle):
    s = reference_cycle.states
    assert np.hypot(s[0, 0] - s[-1, 0], s[0, 1] - s[-1, 1]) < 1e-5


def test_rotation_order(reference_cycle):
    assert rotation_order(reference_cycle) == ("ALLD", "TFT", "ALLC")


def test_metrics_keys_and_cooperation(reference_cycle):
    m = cycle_metrics(reference_cycle)
    assert m["cooperation_mean"] == pytest.approx(
        m["tft_mean"] + m["allc_mean"], abs=1e-12
    )
    assert m["cooperation_mean"] > 0.5
    assert 0.0 <= m["alld_min"] <= m["alld_max"] <= 1.0


def test_no_cycle_without_interior_spiral():
    # above the saddle-node curve there is no interior pair at all
    field = named_field("alld_to_allc", 0.05, 0.5)
    assert detect_limit_cycle(field) is None


def test_no_cycle_when_spiral_is_stable():
    field = named_field("tft_to_allc", 0.05, 0.03)
    assert detect_limit_cycle(field) is None


def test_replicator_has_no_cycles():
    for c in (0.1, 0.5, 1.5):
        field = named_field("replicator", 0.0, c)
        assert detect_limit_cycle(field) is None


def test_seeded_detection_agrees(reference_cycle):
    field = named_field("alld_to_allc", 0.08, 0.04)
    other = detect_limit_cycle(field, seed=SimplexState(0.15, 0.6))
    assert other is not None
    assert other.period == pytest.approx(reference_cycle.period, abs=5e-3)
