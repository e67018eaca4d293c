"""World tests: dynamics integrator, road geometry, rendering, expert."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from langdrive.config import WorldConfig
from langdrive.world import (Action, RoadNetwork, RoutePlan, WorldState,
                             build_town, expert_step, render_observation,
                             sample_spawn, spawn_on_edge, step, town_from_json,
                             town_to_json, wrap_angle)
from langdrive.world.dynamics import Diagnostics
from langdrive.world.expert import ExpertTrackingError
from langdrive.world.geometry import (point_on_polyline, polyline_lengths,
                                      project_to_polyline)
from langdrive.world.observe import camera_set

WCFG = WorldConfig()


@pytest.fixture(scope="module")
def town_a():
    return build_town("A", 0)


@pytest.fixture(scope="module")
def town_b():
    return build_town("B", 0)


# -- dynamics ---------------------------------------------------------------


def reference_rollout(throttle, steer, ticks, v0=0.0):
    """Plain-float reimplementation of the vehicle update, kept independent."""
    x = y = h = 0.0
    v = v0
    for _ in range(ticks):
        nx = x + v * math.cos(h) * 0.1
        ny = y + v * math.sin(h) * 0.1
        nh = h + (v / 2.5) * math.tan(steer * math.radians(35.0)) * 0.1
        nv = v + (throttle * 4.0 - 0.5 * v) * 0.1
        nv = min(max(nv, 0.0), 8.0)
        x, y, h, v = nx, ny, nh, nv
    return x, y, h, v


def test_full_throttle_frozen_values():
    s = WorldState(0.0, 0.0, 0.0, 0.0, 0)
    for _ in range(5):
        s = step(s, Action(1.0, 0.0), WCFG)
    assert s.speed == pytest.approx(1.8097525, abs=1e-9)
    assert s.x == pytest.approx(0.3804950, abs=1e-9)
    assert s.y == 0.0
    assert s.tick == 5


def test_matches_reference_integrator():
    for throttle, steer, ticks in [(1.0, 0.0, 40), (0.6, 0.3, 120),
                                   (0.2, -0.9, 77), (1.0, 1.0, 200)]:
        s = WorldState(0.0, 0.0, 0.0, 0.0, 0)
        for _ in range(ticks):
            s = step(s, Action(throttle, steer), WCFG)
        rx, ry, rh, rv = reference_rollout(throttle, steer, ticks)
        assert s.x == pytest.approx(rx, abs=1e-9)
        assert s.y == pytest.approx(ry, abs=1e-9)
        assert wrap_angle(s.heading - rh) == pytest.approx(0.0, abs=1e-9)
        assert s.speed == pytest.approx(rv, abs=1e-9)


def test_terminal_speed_approaches_cap():
    # drag balances full throttle exactly at the speed cap
    s = WorldState(0.0, 0.0, 0.0, 0.0, 0)
    for _ in range(300):
        s = step(s, Action(1.0, 0.0), WCFG)
    assert 7.99 <= s.speed <= 8.0


def test_rest_stays_at_rest():
    s = WorldState(3.0, -2.0, 1.0, 0.0, 7)
    n = step(s, Action(0.0, 1.0), WCFG)
    assert (n.x, n.y, n.heading, n.speed) == (3.0, -2.0, 1.0, 0.0)
    assert n.tick == 8


def test_steer_mirror_symmetry():
    a = WorldState(0.0, 0.0, 0.0, 2.0, 0)
    b = WorldState(0.0, 0.0, 0.0, 2.0, 0)
    for _ in range(50):
        a = step(a, Action(0.5, 0.7), WCFG)
        b = step(b, Action(0.5, -0.7), WCFG)
    assert a.x == pytest.approx(b.x, abs=1e-12)
    assert a.y == pytest.approx(-b.y, abs=1e-12)
    assert a.heading == pytest.approx(-b.heading, abs=1e-12)


def test_nan_action_raises():
    with pytest.raises(ValueError):
        step(WorldState(0, 0, 0, 0, 0), Action(float("nan"), 0.0), WCFG)


def test_clamp_diagnostics_counted():
    d = Diagnostics()
    step(WorldState(0, 0, 0, 0, 0), Action(2.0, -3.0), WCFG, d)
    assert d.clamped == 1
    step(WorldState(0, 0, 0, 0, 0), Action(0.5, 0.5), WCFG, d)
    assert d.clamped == 1


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 50))
def test_state_stays_in_envelope(throttle, steer, ticks):
    s = WorldState(0.0, 0.0, 0.5, 3.0, 0)
    for _ in range(ticks):
        s = step(s, Action(throttle, steer), WCFG)
    assert 0.0 <= s.speed <= 8.0
    assert -math.pi < s.heading <= math.pi


# -- geometry helpers -------------------------------------------------------


def test_wrap_angle_range_and_fixpoints():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    for a in np.linspace(-20, 20, 401):
        w = wrap_angle(float(a))
        assert -math.pi < w <= math.pi + 1e-12
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-9)


def test_windowed_projection_disambiguates_overlap():
    # out-and-back path: the same point is at s=2 and s=18
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 0.1], [0.0, 0.1]])
    cum = polyline_lengths(pts)
    p = np.array([2.0, 0.05])
    s_out, _, _ = project_to_polyline(pts, cum, p, 0.0, 6.0)
    s_back, _, _ = project_to_polyline(pts, cum, p, 14.0, cum[-1])
    assert s_out == pytest.approx(2.0, abs=1e-6)
    assert s_back == pytest.approx(cum[-1] - 2.0 - 0.1, abs=0.2)


def test_point_on_polyline_clamps():
    pts = np.array([[0.0, 0.0], [4.0, 0.0]])
    cum = polyline_lengths(pts)
    assert np.allclose(point_on_polyline(pts, cum, -3.0), [0, 0])
    assert np.allclose(point_on_polyline(pts, cum, 99.0), [4, 0])
    assert np.allclose(point_on_polyline(pts, cum, 1.0), [1, 0])


def test_signed_offset_positive_left():
    pts = np.array([[0.0, 0.0], [10.0, 0.0]])  # travel +x; +y is left
    cum = polyline_lengths(pts)
    _, off_left, _ = project_to_polyline(pts, cum, np.array([5.0, 2.0]))
    _, off_right, _ = project_to_polyline(pts, cum, np.array([5.0, -2.0]))
    assert off_left == pytest.approx(2.0)
    assert off_right == pytest.approx(-2.0)


# -- road network -----------------------------------------------------------

# every seed hits the same orientation quota, so the kind histogram is fixed
A_HIST = {"four_way": 6, "t_north": 6, "t_south": 6, "t_west": 4, "t_east": 4}
B_HIST = {"four_way": 6, "t_north": 4, "t_south": 4, "t_west": 6, "t_east": 6}


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_town_histograms_fixed_and_distinct(seed):
    a = build_town("A", seed).kind_histogram()
    b = build_town("B", seed).kind_histogram()
    assert a == A_HIST
    assert b == B_HIST
    assert a != b


def test_same_seed_same_town(town_a):
    again = build_town("A", 0)
    assert town_to_json(again) == town_to_json(town_a)


def test_different_seeds_differ():
    assert town_to_json(build_town("A", 0)) != town_to_json(build_town("A", 1))


def test_unknown_town_raises():
    with pytest.raises(ValueError):
        build_town("Z", 0)


# independent compass table: traveling along `enter`, exit arm -> turn
_TURNS = {
    "e": {"n": "left", "s": "right", "e": "straight"},
    "w": {"s": "left", "n": "right", "w": "straight"},
    "n": {"w": "left", "e": "right", "n": "straight"},
    "s": {"e": "left", "w": "right", "s": "straight"},
}
_OPP = {"n": "s", "s": "n", "e": "w", "w": "e"}


def _walk_exits(net, edge):
    """Graph-walk oracle for exits_from, using only node arm bookkeeping."""
    dst = net.nodes[edge.dst]
    enter = None
    for arm, (nbr, road, _vec) in dst.arms.items():
        if nbr == edge.src and road == edge.road:
            enter = _OPP[arm]  # direction of travel into the node
    out = {}
    for arm, (nbr, road, _vec) in dst.arms.items():
        if arm == _OPP[enter]:
            continue  # no U-turns
        turn = _TURNS[enter][arm]
        for cand in net.edges:
            if cand.src == edge.dst and cand.dst == nbr and cand.road == road:
                out[turn] = cand.idx
    return out


def test_exits_match_graph_walk(town_a, town_b):
    for net in (town_a, town_b):
        for edge in net.edges:
            assert net.exits_from(edge.idx) == _walk_exits(net, edge), edge.idx


def test_turn_counts_by_kind(town_a, town_b):
    for net in (town_a, town_b):
        for edge in net.edges:
            kind = net.nodes[edge.dst].kind
            nexits = len(net.exits_from(edge.idx))
            assert nexits == (3 if kind == "four_way" else 2)


def test_available_turns_flags(town_a):
    net = town_a
    edge = net.edges[0]
    far = point_on_polyline(edge.lane, edge.cum, 1.0)
    hd = math.atan2(*edge.start_dir[::-1])
    q = net.available_turns(WorldState(far[0], far[1], hd, 0.0, 0))
    near = point_on_polyline(edge.lane, edge.cum, edge.length - 1.0)
    hd2 = math.atan2(*edge.end_dir[::-1])
    q2 = net.available_turns(WorldState(near[0], near[1], hd2, 0.0, 0))
    assert q2.at_junction and q2.node == edge.dst
    assert q2.turns == frozenset(net.exits_from(edge.idx))
    if not q.at_junction:
        assert q.turns == frozenset()


def test_regions_disjoint(town_a):
    pos = town_a.node_pos
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            cheb = np.abs(pos[i] - pos[j]).max()
            assert cheb > 2 * town_a.cfg.region_half
    nid = town_a.region_node(pos[3] + np.array([4.0, -9.0]))
    assert nid == 3
    assert town_a.region_node(pos[3] + np.array([11.0, 0.0])) is None


def test_on_road_hand_points(town_a):
    net = town_a
    # bottom-row straight road between (40,0) and (80,0): y in [-4, 4]
    assert net.on_road((60.0, 4.0))
    assert not net.on_road((60.0, 4.01))
    assert net.on_road((60.0, -4.0))
    # junction square at (40, 0) spans [32,48] x [-8,8]
    assert net.on_road((47.9, 7.9))
    assert not net.on_road((49.0, 7.9))
    # ring corner bend at (0,0): both legs present
    assert net.on_road((0.0, 0.0))
    assert net.on_road((-3.9, -3.9))
    assert not net.on_road((-4.1, 0.0))
    # mid-block gap
    assert not net.on_road((60.0, 20.0))


def test_town_json_roundtrip(town_a):
    doc = town_to_json(town_a)
    net2 = town_from_json(doc)
    assert town_to_json(net2) == doc
    assert np.allclose(net2.rects, town_a.rects)
    parsed = json.loads(doc)
    assert parsed["format_version"] == 1


# -- observation ------------------------------------------------------------


def brute_force_grid(net, state, yaw, cfg=WCFG):
    """Per-cell point-in-rectangle check, no prefilter, no vectorization."""
    rows, cols, cell = cfg.grid_rows, cfg.grid_cols, cfg.cell_size
    h = state.heading + yaw
    fwd = (math.cos(h), math.sin(h))
    left = (-math.sin(h), math.cos(h))
    g = np.zeros((rows, cols), np.uint8)
    for i in range(rows):
        for j in range(cols):
            f = (rows - i - 0.5) * cell
            l = (cols / 2 - j - 0.5) * cell
            x = state.x + f * fwd[0] + l * left[0]
            y = state.y + f * fwd[1] + l * left[1]
            for r in net.rects:
                if r[0] <= x <= r[2] and r[1] <= y <= r[3]:
                    g[i, j] = 1
                    break
    return g


def test_render_matches_brute_force(town_a):
    poses = [WorldState(60.0, 0.0, 0.0, 0.0, 0),
             WorldState(40.0, 10.0, math.pi / 2, 0.0, 0),
             WorldState(100.0, 37.0, 2.2, 0.0, 0)]
    yaw = math.radians(WCFG.camera_yaw_deg)
    for state in poses:
        for cam in (-yaw, 0.0, yaw):
            obs = render_observation(town_a, state, WCFG, cam)
            assert not obs.off_map
            assert np.array_equal(obs.grid, brute_force_grid(town_a, state, cam))


def test_render_known_cells(town_a):
    state = WorldState(60.0, 0.0, 0.0, 0.0, 0)  # heading east along the road
    g = render_observation(town_a, state, WCFG).grid
    # nearest row: road half-width 4 -> the 8 middle columns
    assert g[31, 28:36].all()
    assert g[31, :26].sum() == 0 and g[31, 38:].sum() == 0
    # row 0 is 31.5 m ahead: x=91.5 sits on the (80,0)-(120,0) road
    assert g[0, 31] == 1
    assert g.dtype == np.uint8


def test_camera_yaw_equals_rotated_heading(town_a):
    state = WorldState(55.0, 2.0, 0.7, 0.0, 0)
    yaw = math.radians(14.0)
    a = render_observation(town_a, state, WCFG, yaw).grid
    b = render_observation(
        town_a, WorldState(55.0, 2.0, 0.7 + yaw, 0.0, 0), WCFG).grid
    assert np.array_equal(a, b)


def test_off_map_flag(town_a):
    obs = render_observation(town_a, WorldState(-500.0, -500.0, 0.0, 0.0, 0),
                             WCFG)
    assert obs.off_map
    assert obs.grid.sum() == 0


def test_camera_set_order(town_a):
    state = WorldState(60.0, 0.0, 0.0, 0.0, 0)
    obs = camera_set(town_a, state, WCFG)
    assert len(obs) == 3
    assert obs[0].camera_yaw == pytest.approx(-math.radians(14.0))
    assert obs[1].camera_yaw == 0.0
    assert obs[2].camera_yaw == pytest.approx(math.radians(14.0))
    for o in obs:
        single = render_observation(town_a, state, WCFG, o.camera_yaw)
        assert np.array_equal(o.grid, single.grid)


# -- expert -----------------------------------------------------------------


@pytest.mark.parametrize("town,seed", [("A", 11), ("B", 12)])
def test_expert_stays_on_road(town, seed):
    net = build_town(town, 0)
    rng = np.random.default_rng(seed)
    state, edge = sample_spawn(net, rng)
    plan = RoutePlan(net, edge, rng=rng)
    labels = set()
    for _ in range(1500):
        act, lab = expert_step(plan, state)
        labels.add(lab)
        assert 0.0 <= act.throttle <= 1.0 and -1.0 <= act.steer <= 1.0
        state = step(state, act, WCFG)
        assert net.on_road((state.x, state.y))
        assert state.speed <= 8.0
    assert plan.active >= 3  # actually drove through junctions
    assert labels <= {"lanefollow", "left", "right", "straight"}
    assert "lanefollow" in labels


def test_forced_turns_are_taken(town_a):
    net = town_a
    # find an edge whose junction allows a left then chain a right
    for e in net.edges:
        ex1 = net.exits_from(e.idx)
        if "left" not in ex1:
            continue
        ex2 = net.exits_from(ex1["left"])
        if "right" not in ex2:
            continue
        plan = RoutePlan(net, e.idx, turns=["left", "right"])
        assert plan.steps[0].turn == "left"
        assert plan.steps[1].turn == "right"
        return
    pytest.fail("no left-right chain found")


def test_forced_turn_unavailable_raises(town_a):
    net = town_a
    for e in net.edges:
        missing = [t for t in ("left", "right", "straight")
                   if t not in net.exits_from(e.idx)]
        if missing:
            with pytest.raises(ValueError):
                RoutePlan(net, e.idx, turns=[missing[0]])
            return
    pytest.fail("every junction offers every turn?")


def test_expert_raises_when_displaced(town_a):
    rng = np.random.default_rng(5)
    state, edge = sample_spawn(town_a, rng)
    plan = RoutePlan(town_a, edge, rng=rng)
    expert_step(plan, state)
    lost = WorldState(state.x - 3.5 * math.sin(state.heading),
                      state.y + 3.5 * math.cos(state.heading),
                      state.heading, state.speed, 1)
    with pytest.raises(ExpertTrackingError):
        expert_step(plan, lost)


def test_spawn_has_runway(town_a):
    rng = np.random.default_rng(9)
    for _ in range(40):
        state, edge_idx = sample_spawn(town_a, rng, clearance=15.0)
        e = town_a.edges[edge_idx]
        s, off, _ = project_to_polyline(e.lane, e.cum,
                                        np.array([state.x, state.y]))
        assert abs(off) < 1e-6
        assert e.length - s >= 15.0 - 1e-6
        assert town_a.on_road((state.x, state.y))


def test_spawn_heading_matches_lane(town_a):
    st_ = spawn_on_edge(town_a, 0, 3.0)
    e = town_a.edges[0]
    d = e.start_dir
    assert math.cos(st_.heading) == pytest.approx(d[0], abs=1e-6)
    assert math.sin(st_.heading) == pytest.approx(d[1], abs=1e-6)
    assert st_.speed == 0.0


def test_expert_slows_for_turns(town_a):
    rng = np.random.default_rng(21)
    state, edge = sample_spawn(town_a, rng)
    plan = RoutePlan(town_a, edge, rng=rng)
    turn_speeds, lane_speeds = [], []
    for _ in range(3000):
        act, lab = expert_step(plan, state)
        state = step(state, act, WCFG)
        (turn_speeds if lab in ("left", "right") else lane_speeds).append(state.speed)
    assert turn_speeds and lane_speeds
    assert max(turn_speeds) < 4.5
    assert max(lane_speeds) > 5.0
