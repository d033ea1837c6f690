import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

import oracle
from conftest import protocol_params
from ndlatency.buffer import ProbabilityBuffer
from ndlatency.engine import (closed_form_ta_le_ds, compute_latency, grow_to_right,
                              initialize, shrink_to_left, split_growing, split_shrinking)
from ndlatency.gamma import GammaStage, Mode, build_schedule, max_order
from ndlatency.params import ProtocolParams
from ndlatency.simulator import simulate_offset


def test_closed_form_spot_value():
    r = compute_latency(ProtocolParams.from_seconds(0.1, 2.42, 0.59, 0.0))
    assert r.max == pytest.approx(1.9, rel=1e-12)
    assert r.max_ticks == 1_900_000
    assert not r.coupled
    # mean by integrating the per-offset closed form over a tick grid of 10 ms
    p = ProtocolParams(Ta=10, Ts=242, ds=59)
    expected = Fraction(sum(closed_form_ta_le_ds(p, k + Fraction(1, 2)) if k + 1 <= 242 - 59
                            else 0 for k in range(242)), 242)
    assert compute_latency(p).mean_ticks == expected


def test_equal_intervals_are_coupled():
    r = compute_latency(ProtocolParams.from_seconds(1.0, 1.0, 0.25))
    assert r.coupled and math.isinf(r.mean) and math.isinf(r.max)


def test_small_instance_matches_brute_force():
    p = ProtocolParams(Ta=26, Ts=20, ds=3)
    r = compute_latency(p)
    mean, mx = oracle.mean_and_max(26, 20, 3, 0)
    assert (r.mean_ticks, r.max_ticks) == (mean, mx)


def test_always_listening_scanner():
    r = compute_latency(ProtocolParams(Ta=4, Ts=2, ds=2))
    assert (r.mean_ticks, r.max_ticks, r.coupled) == (0, 0, False)
    # with a packet duration the effective window no longer covers the interval
    r = compute_latency(ProtocolParams(Ta=4, Ts=2, ds=2, da=1))
    assert r.coupled and oracle.coupled(4, 2, 2, 1)
    r = compute_latency(ProtocolParams(Ta=3, Ts=2, ds=2, da=1))
    assert (r.mean_ticks, r.max_ticks) == oracle.mean_and_max(3, 2, 2, 1)


def test_closed_form_examples():
    p = ProtocolParams(Ta=2, Ts=10, ds=4)
    assert closed_form_ta_le_ds(p, 0) == 6
    assert closed_form_ta_le_ds(p, 10 - 4) == 0
    pd = ProtocolParams(Ta=2, Ts=10, ds=5, da=1)
    assert closed_form_ta_le_ds(pd, 10 - 4) == 1
    with pytest.raises(ValueError):
        closed_form_ta_le_ds(ProtocolParams(Ta=5, Ts=10, ds=4), 0)


def test_split_growing_and_shrinking():
    p = ProtocolParams(Ta=26, Ts=100, ds=10).effective()
    # reach = 90; grid points 90, 64, 38, 12
    sp = split_growing(5, 70, 26, p)
    assert (sp.N_l, sp.N_u, sp.d_Nl, sp.d_Nu) == (1, 3, 6, 7)
    sp = split_shrinking(5, 70, 26)
    assert (sp.N_l, sp.N_u, sp.d_Nl, sp.d_Nu) == (1, 2, 21, 18)


def test_iteration_functions_reject_wrong_mode():
    p = ProtocolParams(Ta=26, Ts=100, ds=10).effective()
    _, buf = initialize(p)
    g = GammaStage(order=0, gamma=26, mode=Mode.GROWING, sigma=26, sigma_s=0, d_t=100)
    s = GammaStage(order=0, gamma=26, mode=Mode.SHRINKING, sigma=26, sigma_s=0, d_t=100)
    with pytest.raises(ValueError):
        shrink_to_left(buf, g, Mode.SHRINKING, p)
    with pytest.raises(ValueError):
        grow_to_right(buf, s, Mode.SHRINKING, p)


def test_initialize():
    acc, buf = initialize(ProtocolParams(Ta=3, Ts=50, ds=12, da=2))
    assert acc == 0
    assert [(s.t_s, s.t_e, s.p) for s in buf] == [(0, 40, 1)]
    assert not initialize(ProtocolParams(Ta=3, Ts=50, ds=50))[1]


@settings(max_examples=400, deadline=None)
@given(protocol_params(max_ts=120))
def test_engine_equals_independent_brute_force(params):
    ref = oracle.mean_and_max(params.Ta, params.Ts, params.ds, params.da)
    r = compute_latency(params)
    if oracle.coupled(params.Ta, params.Ts, params.ds, params.da):
        assert r.coupled and ref is None
    else:
        assert ref is not None and not r.coupled
        assert (r.mean_ticks, r.max_ticks) == ref
        assert r.mean_ticks <= r.max_ticks


@settings(max_examples=300, deadline=None)
@given(protocol_params(max_ts=20_000))
def test_trace_mass_empties_and_iterations_bounded(params):
    trace = []
    r = compute_latency(params, trace=trace)
    if r.coupled or not trace:
        return
    masses = [m for *_, m, _ in trace]
    assert masses[0] == Fraction(params.Ts - (params.ds - params.da), params.Ts)
    assert all(b <= a for a, b in zip(masses, masses[1:]))
    assert len(trace) <= max_order(params.effective()) + 1
    # partial means add up to the reported mean
    assert sum(part for *_, part in trace) + params.da == r.mean_ticks


def test_single_stage_shrinking_per_offset_formula():
    rng = random.Random(11)
    checked = 0
    while checked < 40:
        Ts = rng.randint(10, 3000)
        Ta = rng.randint(Ts + 1, 4 * Ts)
        ds_eff = rng.randint(1, Ts - 1)
        da = rng.randint(0, min(20, Ts - ds_eff))
        p = ProtocolParams(Ta, Ts, ds_eff + da, da)
        sched = build_schedule(p.effective())
        if len(sched) != 1 or sched[0].mode is not Mode.SHRINKING:
            continue
        gamma = sched[0].gamma
        for _ in range(50):
            t0 = rng.randrange(Ts) + Fraction(1, 2)
            # distance past the end of the preceding effective window
            phi = (t0 - (Ts - da)) % Ts
            expected = da if phi >= Ts - ds_eff else math.ceil(phi / gamma) * Ta + da
            assert simulate_offset(p, t0, 10 ** 12) == expected
        checked += 1
