import io

import numpy as np
import pytest

from repmut.dynamics import named_field
from repmut.integrator import (
    CycleAttractor,
    FixedPointAttractor,
    Trajectory,
    find_attractor,
    integrate,
)
from repmut.model import SimplexState


def test_convergence_event_replicator():
    field = named_field("replicator", 0.0, 0.5)
    traj = integrate(field, SimplexState(0.3, 0.3))
    assert traj.terminal_event == "converged_to_fixed_point"
    final = traj.final_state()
    # positive cost sends interior orbits to the ALLD corner
    assert final.x == pytest.approx(1.0, abs=1e-6)


def test_states_stay_on_simplex():
    field = named_field("alld_to_allc", 0.08, 0.04)
    traj = integrate(field, SimplexState(0.1, 0.8), t_max=300.0)
    s = traj.states
    assert (s >= -1e-9).all()
    assert np.allclose(s.sum(axis=1), 1.0, atol=1e-9)


def test_accuracy_against_tight_tolerance_run():
    field = named_field("tft_to_allc", 0.05, 0.1)
    loose = integrate(
        field, SimplexState(0.4, 0.3), t_max=50.0, detect_convergence=False
    )
    tight = integrate(
        field,
        SimplexState(0.4, 0.3),
        t_max=50.0,
        rel_tol=1e-12,
        abs_tol=1e-13,
        detect_convergence=False,
    )
    assert loose.states[-1, 0] == pytest.approx(tight.states[-1, 0], abs=1e-6)
    assert loose.states[-1, 1] == pytest.approx(tight.states[-1, 1], abs=1e-6)


def test_csv_header_and_format():
    field = named_field("replicator", 0.0, 0.5)
    traj = integrate(field, SimplexState(0.3, 0.3), t_max=1.0)
    buf = io.StringIO()
    traj.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x_alld,y_tft,z_allc"
    assert len(lines) == len(traj) + 1
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == pytest.approx(0.3)


def test_determinism():
    field = named_field("uniform", 0.02, 0.3)
    a = integrate(field, SimplexState(0.25, 0.5), t_max=100.0)
    b = integrate(field, SimplexState(0.25, 0.5), t_max=100.0)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)


def test_step_callback_event_stops_run():
    field = named_field("replicator", 0.0, 0.5)

    def cb(t0, p0, d0, t1, p1, d1):
        return "custom_stop" if t1 > 2.0 else None

    traj = integrate(field, SimplexState(0.3, 0.3), step_callback=cb)
    assert traj.terminal_event == "custom_stop"
    assert traj.times[-1] > 2.0


def test_max_time_event():
    field = named_field("alld_to_allc", 0.08, 0.04)
    traj = integrate(field, SimplexState(0.3, 0.3), t_max=5.0, detect_convergence=False)
    assert traj.terminal_event == "max_time"
    assert traj.times[-1] == pytest.approx(5.0, abs=1e-9)


def test_find_attractor_fixed_point():
    field = named_field("replicator", 0.0, 0.5)
    res = find_attractor(field, SimplexState(0.3, 0.3))
    assert isinstance(res, FixedPointAttractor)
    assert res.location.x == pytest.approx(1.0, abs=1e-6)


def test_find_attractor_cycle():
    field = named_field("alld_to_allc", 0.08, 0.04)
    res = find_attractor(field, SimplexState(0.3, 0.3))
    assert isinstance(res, CycleAttractor)
    assert res.cycle.period > 0
