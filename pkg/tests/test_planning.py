import math

import numpy as np
import pytest

from src.planning import (
    CellState,
    Costmap,
    DwaConfig,
    GridFormatError,
    GridMap,
    Limits,
    PlanError,
    arc_poses,
    dwa_plan,
    footprint_hits_lethal,
    footprint_outline,
    load_navigability,
    load_plan,
    read_pgm,
    read_plan_file,
    sample_window,
    update_costmap,
)

ORIGIN_POSE = (0.0, 0.0, 0.0)
NO_POINTS = np.empty((0, 2))


def _brute_projection(waypoints, point):
    best_d, best_s, s0 = math.inf, 0.0, 0.0
    for a, b in zip(waypoints[:-1], waypoints[1:], strict=True):
        seg = b - a
        length = float(np.linalg.norm(seg))
        t = min(max(float(np.dot(point - a, seg)) / length**2, 0.0), 1.0)
        d = float(np.linalg.norm(point - (a + t * seg)))
        if d < best_d - 1e-12:
            best_d, best_s = d, s0 + t * length
        s0 += length
    return best_d, best_s


def _wall(x, y_lo=-5.0, y_hi=5.0, spacing=0.05):
    ys = np.arange(y_lo, y_hi + 1e-9, spacing)
    return np.column_stack([np.full_like(ys, x), ys])


def _disc(cx, cy, r, count=24):
    a = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
    return np.column_stack([cx + r * np.cos(a), cy + r * np.sin(a)])


def _costmap(points, pose=ORIGIN_POSE, base=None):
    return update_costmap(Costmap.empty(), points, base, pose)


def _advance(pose, v, w, period=0.1):
    return tuple(float(c) for c in arc_poses(pose, np.array([v]), np.array([w]), period, period)[0, -1])


# --- global plan ----------------------------------------------------------


def test_two_points_ten_metres_apart_give_21_waypoints():
    plan = load_plan([(0.0, 0.0), (10.0, 0.0)])

    assert len(plan.waypoints) == 21
    assert np.allclose(np.diff(plan.waypoints[:, 0]), 0.5)
    assert plan.length == pytest.approx(10.0)
    assert plan.goal == (10.0, 0.0)


def test_closed_square_arclength():
    plan = load_plan([(0, 0), (5, 0), (5, 5), (0, 5), (0, 0)])

    assert plan.length == pytest.approx(20.0)
    assert np.all(np.linalg.norm(np.diff(plan.waypoints, axis=0), axis=1) <= 0.5 + 1e-12)


def test_repeated_points_are_dropped():
    plan = load_plan([(0, 0), (0, 0), (1, 0), (1, 0)])

    assert plan.length == pytest.approx(1.0)
    assert len(plan.waypoints) == 3


@pytest.mark.parametrize("points", [[(1.0, 2.0)], [(1.0, 2.0), (1.0, 2.0)], []])
def test_degenerate_plans_are_rejected(points):
    with pytest.raises(PlanError):
        load_plan(points)


def test_projection_matches_brute_force():
    rng = np.random.default_rng(3)
    plan = load_plan(rng.uniform(-5, 5, size=(6, 2)))
    points = rng.uniform(-7, 7, size=(200, 2))

    dists, arcs = plan.project_many(points)

    for point, d, s in zip(points, dists, arcs, strict=True):
        want_d, want_s = _brute_projection(plan.waypoints, point)
        assert d == pytest.approx(want_d, abs=1e-9)
        assert s == pytest.approx(want_s, abs=1e-9)


def test_plan_file_accepts_both_separators_and_comments(tmp_path):
    path = tmp_path / "route.txt"
    path.write_text("# corridor\n0 0\n\n4,0   # door\n4 3\n", encoding="utf-8")

    plan = read_plan_file(path)

    assert plan.length == pytest.approx(7.0)
    assert plan.goal == (4.0, 3.0)


def test_plan_file_error_names_the_line(tmp_path):
    path = tmp_path / "route.txt"
    path.write_text("0 0\n1 0\n2 zero\n", encoding="utf-8")

    with pytest.raises(PlanError) as excinfo:
        read_plan_file(path)

    assert excinfo.value.line == 3
    assert excinfo.value.path == path


# --- navigability grids ---------------------------------------------------


def test_ascii_pgm_is_flipped_and_thresholded(tmp_path):
    path = tmp_path / "nav.pgm"
    path.write_text("P2\n# made by hand\n3 2\n255\n0 255 128\n255 0 127\n", encoding="ascii")

    grid = load_navigability(path, resolution=1.0)

    assert read_pgm(path).shape == (2, 3)
    assert grid.cells.tolist() == [[True, False, False], [False, True, True]]
    assert grid.value_at(0.5, 0.5)
    assert not grid.value_at(1.5, 0.5)
    assert grid.value_at(2.5, 1.5)
    assert not grid.value_at(-0.5, 0.5)


def test_binary_pgm_with_small_maxval(tmp_path):
    path = tmp_path / "nav.pgm"
    path.write_bytes(b"P5\n2 2\n15\n" + bytes([0, 15, 8, 7]))

    image = read_pgm(path)

    assert image.tolist() == [[0, 255], [136, 119]]


@pytest.mark.parametrize(
    "payload",
    [
        b"P3\n2 2\n255\n0 0 0 0\n",
        b"P5\n2 2\n255\n\x00\x00",
        b"P2\n2 2\n255\n0 0 0\n",
        b"P2\n2 2\n255\n0 0 0 300\n",
        b"P2\n2 x\n255\n0 0 0 0\n",
    ],
)
def test_malformed_pgm_is_rejected(tmp_path, payload):
    path = tmp_path / "bad.pgm"
    path.write_bytes(payload)

    with pytest.raises(GridFormatError) as excinfo:
        read_pgm(path)

    assert excinfo.value.path == path


# --- costmap --------------------------------------------------------------


def test_empty_scan_on_open_ground_is_all_free():
    base = GridMap(cells=np.ones((400, 400), dtype=bool), resolution=0.1, origin=(-20.0, -20.0))

    costmap = _costmap(NO_POINTS, base=base)

    assert costmap.count(CellState.FREE) == 200 * 200


def test_single_point_marks_one_lethal_cell_and_inflated_disc():
    costmap = _costmap(np.array([[0.05, 0.05]]))

    assert costmap.count(CellState.LETHAL) == 1
    assert costmap.count(CellState.INFLATED) == 80
    assert costmap.state_at(0.05, 0.05) is CellState.LETHAL
    assert costmap.state_at(0.55, 0.05) is CellState.INFLATED
    assert costmap.state_at(0.65, 0.05) is CellState.FREE


def test_stairs_in_navigability_map_are_lethal_without_scan():
    cells = np.ones((100, 100), dtype=bool)
    cells[40:60, 70:80] = False  # x in [2, 3), y in [-1, 1)
    base = GridMap(cells=cells, resolution=0.1, origin=(-5.0, -5.0))

    costmap = _costmap(NO_POINTS, base=base)

    assert costmap.state_at(2.5, 0.0) is CellState.LETHAL
    assert costmap.state_at(1.7, 0.0) is CellState.INFLATED
    assert costmap.state_at(0.0, 0.0) is CellState.FREE
    assert costmap.state_at(7.0, 0.0) is CellState.LETHAL


def test_window_follows_the_robot_on_the_lattice():
    costmap = _costmap(NO_POINTS, pose=(3.04, -1.27, 0.0))

    assert costmap.origin[0] == pytest.approx(-7.0)
    assert costmap.origin[1] == pytest.approx(-11.3)
    assert costmap.state_at(3.04 + 10.5, -1.27) is CellState.LETHAL


# --- dynamic window -------------------------------------------------------


def test_footprint_outline_is_the_square_perimeter():
    outline = footprint_outline()

    assert np.all(np.isclose(np.abs(outline).max(axis=1), 0.3))
    assert len(outline) == 48


def test_arc_poses_follow_the_unicycle():
    poses = arc_poses((1.0, 2.0, 0.5), np.array([1.0]), np.array([0.5]), 3.0, 0.1)[0]

    assert poses.shape == (30, 3)
    t = 3.0
    radius = 2.0
    assert poses[-1, 0] == pytest.approx(1.0 + radius * (math.sin(0.5 + 0.5 * t) - math.sin(0.5)))
    assert poses[-1, 1] == pytest.approx(2.0 - radius * (math.cos(0.5 + 0.5 * t) - math.cos(0.5)))
    assert poses[-1, 2] == pytest.approx(0.5 + 0.5 * t)


@pytest.mark.parametrize("v, w", [(0.0, 0.0), (0.73, -0.4), (1.5, 1.0), (1.45, -0.98), (0.05, 0.2)])
def test_every_sample_is_reachable_in_one_period(v, w):
    limits = Limits()
    config = DwaConfig()

    samples = sample_window(v, w, limits, config)

    assert np.all(np.abs(samples[:, 0] - v) <= limits.a_max * config.period + 1e-12)
    assert np.all(np.abs(samples[:, 1] - w) <= limits.alpha_max * config.period + 1e-12)
    assert np.all((samples[:, 0] >= limits.v_min) & (samples[:, 0] <= limits.v_max))
    assert np.all(np.abs(samples[:, 1]) <= limits.w_max)
    assert any(np.array_equal(row, [v, w]) for row in samples)


def test_open_ground_straight_plan_drives_straight_at_top_of_window():
    plan = load_plan([(0, 0), (20, 0)])

    result = dwa_plan(_costmap(NO_POINTS), plan, ORIGIN_POSE, 1.0, 0.0)

    assert result.feasible
    assert result.w == 0.0
    assert result.v == pytest.approx(1.1)


def test_endpoint_cost_falls_as_speed_rises():
    plan = load_plan([(0, 0), (20, 0)])
    costmap = _costmap(NO_POINTS)

    costs = [dwa_plan(costmap, plan, ORIGIN_POSE, v, 0.0).best.cost for v in np.arange(0.1, 1.45, 0.1)]

    assert all(b < a for a, b in zip(costs, costs[1:], strict=False))


def test_wall_ahead_at_speed_is_infeasible():
    plan = load_plan([(0, 0), (20, 0)])

    result = dwa_plan(_costmap(_wall(1.0)), plan, ORIGIN_POSE, 1.0, 0.0)

    assert not result.feasible
    assert (result.v, result.w) == (0.0, 0.0)
    assert result.collisions == result.candidates - 1


def test_wall_ahead_at_rest_still_creeps():
    plan = load_plan([(0, 0), (20, 0)])

    result = dwa_plan(_costmap(_wall(1.0)), plan, ORIGIN_POSE, 0.0, 0.0)

    assert result.feasible
    assert 0.0 < result.v <= 0.1


def test_bollard_gap_is_passed_clear_of_inflation():
    plan = load_plan([(0, 0), (20, 0)])
    bollards = np.vstack([_disc(3.0, 0.8, 0.1), _disc(3.0, -0.8, 0.1)])
    pose, v, w = ORIGIN_POSE, 0.0, 0.0

    for _ in range(60):
        costmap = _costmap(bollards, pose=pose)
        result = dwa_plan(costmap, plan, pose, v, w)
        assert result.feasible
        assert np.all(costmap.states(result.best.poses[:, 0], result.best.poses[:, 1]) == CellState.FREE)
        assert not footprint_hits_lethal(costmap, result.best.poses)
        v, w = result.v, result.w
        pose = _advance(pose, v, w)

    assert pose[0] > 5.0
    assert abs(pose[1]) < 0.1


def test_returned_arcs_never_sweep_over_lethal_cells():
    rng = np.random.default_rng(11)
    plan = load_plan([(-6, -6), (6, 6)])
    for _ in range(25):
        angles = rng.uniform(0, 2 * math.pi, 40)
        radii = rng.uniform(1.0, 6.0, 40)
        obstacles = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        costmap = _costmap(obstacles)

        result = dwa_plan(costmap, plan, (0.0, 0.0, rng.uniform(-math.pi, math.pi)), rng.uniform(0, 1.5), rng.uniform(-1, 1))

        if result.best is not None:
            assert not footprint_hits_lethal(costmap, result.best.poses)


def test_planner_is_deterministic_and_parallel_matches_serial():
    plan = load_plan([(0, 0), (6, 2), (10, 0)])
    costmap = _costmap(np.vstack([_disc(3.5, -1.0, 0.3), _wall(4.0, 1.5, 4.0)]))
    pose = (0.0, 0.0, 0.2)

    first = dwa_plan(costmap, plan, pose, 0.6, 0.1)
    again = dwa_plan(costmap, plan, pose, 0.6, 0.1)
    parallel = dwa_plan(costmap, plan, pose, 0.6, 0.1, config=DwaConfig(max_workers=4, chunk_size=16))

    for other in (again, parallel):
        assert (other.v, other.w, other.feasible) == (first.v, first.w, first.feasible)
        assert other.best.cost == first.best.cost
        assert np.array_equal(other.best.poses, first.best.poses)
