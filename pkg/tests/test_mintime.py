"""Tests for the settling-time program: layout, assembly, and solving."""

import numpy as np
import pytest

from ddmintime.hankel import build_data_model, is_persistently_exciting
from ddmintime.mintime import (
    InfeasibleProblemError,
    MinTimeSpec,
    PathConstraint,
    PolyhedralTarget,
    WeightSpreadWarning,
    assemble_lp,
    exp_weights,
    extract_solution,
    input_box_path,
    point_target,
    segment_layout,
    solve_min_time,
)
from ddmintime.statespace import (
    StateSpaceModel,
    generate_excitation_data,
    is_admissible,
    simulate,
)
from ddmintime.trajectories import Trajectory


def integrator_model() -> StateSpaceModel:
    return StateSpaceModel(A=[[1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]])


def integrator_spec(**overrides) -> MinTimeSpec:
    kwargs = dict(
        K_i=1,
        K_f=1,
        u_init=np.zeros(1),
        y_init=np.array([-5.0]),
        target=point_target(np.zeros(1)),
        path=input_box_path(1, 1, 1.0),
        T0=0,
        T1=10,
        L=6,
    )
    kwargs.update(overrides)
    return MinTimeSpec(**kwargs)


def integrator_data_model(L: int = 6):
    model = integrator_model()
    data = generate_excitation_data(model, None, 60, 1.0, seed=11)
    assert is_persistently_exciting(data.u, L + model.n)
    return model, build_data_model(data, L)


# ----- weights ------------------------------------------------------------------


def test_weights_grow_geometrically_from_the_window_start():
    w = exp_weights(2.0, 3, 6)
    assert np.allclose(w, [1.0, 2.0, 4.0, 8.0])


def test_rescaled_weights_keep_the_ratio_but_centre_the_range():
    w = exp_weights(2.0, 0, 4, rescale=True)
    assert np.allclose(w[1:] / w[:-1], 2.0)
    assert w[2] == pytest.approx(1.0)


def test_wide_windows_warn_about_weight_spread():
    with pytest.warns(WeightSpreadWarning):
        exp_weights(2.0, 100, 140)


def test_narrow_windows_do_not_warn():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        exp_weights(2.0, 0, 30)


# ----- targets and path constraints ------------------------------------------------


def test_point_target_is_an_equality_band():
    target = point_target(np.array([1.0, 2.0]))
    assert target.q_g == 0
    assert target.q_h == 2
    assert np.array_equal(target.H, np.eye(2))
    assert np.array_equal(target.h, [1.0, 2.0])


def test_input_box_path_bounds_every_channel():
    path = input_box_path(2, 1, 0.5)
    assert path.q_s == 4
    assert np.array_equal(path.S_y, np.zeros((4, 1)))
    # each input channel appears with +1 and -1
    u = np.array([0.4, -0.6])
    values = path.S_u @ u
    assert np.max(values) > 0.5  # the violated face shows up
    assert np.max(path.S_u @ np.array([0.4, -0.4])) <= 0.5


def test_input_box_path_requires_positive_bound():
    with pytest.raises(ValueError, match="bound must be positive"):
        input_box_path(1, 1, 0.0)


def test_polyhedral_target_needs_a_row():
    with pytest.raises(ValueError, match="at least one row"):
        PolyhedralTarget(
            G=np.zeros((0, 2)), g=np.zeros(0), H=np.zeros((0, 2)), h=np.zeros(0)
        )


# ----- problem validation -----------------------------------------------------------


def test_spec_rejects_window_reaching_before_the_history():
    with pytest.raises(ValueError, match="raise T0 or shrink K_f"):
        integrator_spec(K_f=3, T0=0)


def test_spec_rejects_short_segments():
    with pytest.raises(ValueError, match="L"):
        integrator_spec(L=1)


def test_spec_rejects_flat_weights():
    with pytest.raises(ValueError, match="theta"):
        integrator_spec(theta=1.0)


def test_spec_rejects_misaligned_history():
    with pytest.raises(ValueError, match="u_init"):
        integrator_spec(K_i=2, u_init=np.zeros(1), y_init=np.zeros(2))


def test_spec_rejects_target_of_wrong_width():
    with pytest.raises(ValueError, match="target"):
        integrator_spec(target=point_target(np.zeros(2)))


# ----- layout -----------------------------------------------------------------------


def test_layout_covers_the_horizon_with_overlapping_segments():
    spec = integrator_spec()
    layout = segment_layout(spec)
    assert layout.step == 5  # L - K_i
    assert layout.K == 3  # ceil((T1 + K_f) / step) = ceil(11 / 5)
    assert layout.N == 15
    assert layout.N >= spec.T1 + spec.K_f


def test_layout_matches_the_flight_example_dimensions():
    spec = MinTimeSpec(
        K_i=2,
        K_f=2,
        u_init=np.zeros(6),
        y_init=np.zeros(6),
        target=point_target(np.zeros(6)),
        path=input_box_path(3, 3, 1.0),
        T0=100,
        T1=140,
        L=40,
    )
    layout = segment_layout(spec)
    assert (layout.K, layout.N) == (4, 152)
    # one slack per pinned output over the two-sample arrival window
    assert layout.eps_per_t == 6
    assert layout.n_eps == 41 * 6


def test_owner_maps_history_and_horizon_samples():
    spec = integrator_spec()
    layout = segment_layout(spec)
    assert layout.owner(-1) == (0, 0)
    assert layout.owner(0) == (0, 1)
    assert layout.owner(4) == (0, 5)
    assert layout.owner(5) == (1, 1)
    assert layout.owner(14) == (2, 5)


def test_variable_indices_are_disjoint_and_complete():
    spec = integrator_spec()
    layout = segment_layout(spec, model_width=0)
    seen = set()
    for k in range(layout.K):
        for sl in (layout.u_slice(k), layout.y_slice(k), layout.zeta_slice(k)):
            block = set(range(sl.start, sl.stop))
            assert not block & seen
            seen |= block
    for t in range(spec.T0, spec.T1 + 1):
        sl = layout.eps_slice(t)
        block = set(range(sl.start, sl.stop))
        assert not block & seen
        seen |= block
    assert seen == set(range(layout.n_vars))


# ----- assembly ----------------------------------------------------------------------


def test_assembled_program_has_the_expected_shape():
    model_ss, data_model = integrator_data_model()
    spec = integrator_spec()
    reduced = data_model.reduce()
    problem = assemble_lp(spec, reduced)
    layout = segment_layout(spec)
    # the reduced route keeps only the window samples as variables
    seg_vars = 2 * spec.L
    assert problem.n == layout.K * seg_vars + layout.n_eps
    # row relations per segment, overlap matching, one initial-window pin
    dyn_rows = layout.K * (2 * spec.L - reduced.r)
    match_rows = (layout.K - 1) * spec.K_i * 2 + spec.K_i * 2
    assert problem.n_eq == dyn_rows + match_rows
    # path rows on every horizon sample, a +/- pair per detection sample
    assert problem.n_ub == 2 * layout.N + (spec.T1 - spec.T0 + 1) * 2
    # slack variables never go negative, window samples are free
    assert np.all(problem.lower[-layout.n_eps :] == 0.0)
    assert np.all(np.isneginf(problem.lower[: layout.K * seg_vars]))


def test_slack_costs_follow_the_exponential_weights():
    _, data_model = integrator_data_model()
    spec = integrator_spec()
    problem = assemble_lp(spec, data_model.reduce())
    layout = segment_layout(spec)
    for t in range(spec.T0, spec.T1 + 1):
        sl = layout.eps_slice(t)
        assert np.all(problem.c[sl] == 2.0 ** (t - spec.T0))
    assert np.all(problem.c[: sl.start - layout.eps_per_t * (t - spec.T0)] == 0.0)


# ----- solving ------------------------------------------------------------------------


def test_integrator_settles_in_five_steps():
    _, data_model = integrator_data_model()
    spec = integrator_spec()
    solution = solve_min_time(spec, data_model.reduce())
    assert solution.t_star == 5
    # the optimal plan saturates the input until arrival
    planned = solution.trajectory.inputs[spec.K_i : spec.K_i + 5]
    assert np.allclose(planned, 1.0, atol=1e-7)


def test_settling_time_is_zero_when_already_at_the_target():
    _, data_model = integrator_data_model()
    spec = integrator_spec(y_init=np.array([0.0]))
    solution = solve_min_time(spec, data_model.reduce())
    assert solution.t_star == 0


def test_raw_and_reduced_routes_agree():
    _, data_model = integrator_data_model()
    spec = integrator_spec()
    raw = solve_min_time(spec, data_model)
    red = solve_min_time(spec, data_model.reduce())
    assert raw.t_star == red.t_star == 5
    assert raw.objective == pytest.approx(red.objective, rel=1e-6)


def test_sharper_weights_do_not_change_the_answer():
    _, data_model = integrator_data_model()
    reduced = data_model.reduce()
    answers = {
        theta: solve_min_time(integrator_spec(theta=theta), reduced).t_star
        for theta in (2.0, 4.0)
    }
    assert answers[2.0] == answers[4.0] == 5


def test_slack_schedule_decays_and_vanishes_at_the_settling_time():
    _, data_model = integrator_data_model()
    spec = integrator_spec()
    solution = solve_min_time(spec, data_model.reduce())
    totals = {t: float(np.sum(eps)) for t, eps in solution.eps_schedule.items()}
    assert sorted(totals) == list(range(spec.T0, spec.T1 + 1))
    assert solution.t_star == min(t for t, v in totals.items() if v < spec.eps_tol)
    for t in range(solution.t_star, spec.T1 + 1):
        assert totals[t] < spec.eps_tol


def test_solution_trajectory_is_admissible_and_obeys_the_problem():
    model_ss, data_model = integrator_data_model()
    spec = integrator_spec()
    solution = solve_min_time(spec, data_model.reduce())
    traj = solution.trajectory
    assert traj.start_index == -spec.K_i
    assert traj.length == segment_layout(spec).N + spec.K_i
    # the stitched pair is a trajectory of the generating system
    assert is_admissible(model_ss, traj, tol=1e-6)
    # the history window is copied through exactly
    assert np.array_equal(traj.inputs[0], spec.u_init)
    assert np.array_equal(traj.outputs[0], spec.y_init)
    # the input box holds over the whole horizon
    assert np.max(np.abs(traj.inputs[spec.K_i :])) <= 1.0 + 1e-6


def test_contradictory_path_constraints_raise_with_families():
    _, data_model = integrator_data_model()
    # u <= -2 and u >= 2 at every sample can never hold together
    clash = PathConstraint(
        S_u=np.array([[1.0], [-1.0]]),
        S_y=np.zeros((2, 1)),
        s=np.array([-2.0, -2.0]),
    )
    spec = integrator_spec(path=clash)
    with pytest.raises(InfeasibleProblemError) as excinfo:
        solve_min_time(spec, data_model.reduce())
    assert "constraint families" in str(excinfo.value)
    assert excinfo.value.families


def test_never_settling_is_reported_as_none():
    _, data_model = integrator_data_model()
    spec = integrator_spec(T1=3)  # cannot reach the origin by t = 3
    solution = solve_min_time(spec, data_model.reduce())
    assert solution.t_star is None
    assert all(np.sum(eps) >= spec.eps_tol for eps in solution.eps_schedule.values())


def test_solver_stats_are_filled_in():
    _, data_model = integrator_data_model()
    solution = solve_min_time(integrator_spec(), data_model.reduce())
    stats = solution.solver_stats
    assert stats.status == "optimal"
    assert stats.iterations > 0
    assert stats.runtime_s >= 0.0
    assert stats.lp_rows > 0 and stats.lp_vars > 0
    assert stats.max_violation <= 1e-9


def test_reported_objective_matches_the_weighted_slack_sum():
    _, data_model = integrator_data_model()
    spec = integrator_spec()
    solution = solve_min_time(spec, data_model.reduce())
    recomputed = sum(
        spec.theta ** (t - spec.T0) * float(np.sum(eps))
        for t, eps in solution.eps_schedule.items()
    )
    assert solution.objective == pytest.approx(recomputed, abs=1e-9)


# ----- a second-order cross-check -----------------------------------------------------


def test_two_state_example_matches_direct_state_reasoning():
    # double integrator, outputs the position; drive (-4, 0) to the origin
    # with |u| <= 1; a time-symmetric bang-bang needs four steps
    model = StateSpaceModel(
        A=[[1.0, 1.0], [0.0, 1.0]], B=[[0.0], [1.0]], C=[[1.0, 0.0]], D=[[0.0]]
    )
    x_start = np.array([-4.0, 0.0])
    x_back = np.linalg.solve(model.A @ model.A, x_start)
    y_init, _ = simulate(model, x_back, np.zeros((2, 1)))
    data = generate_excitation_data(model, None, 120, 1.0, seed=21)
    data_model = build_data_model(data, 8)
    spec = MinTimeSpec(
        K_i=2,
        K_f=1,
        u_init=np.zeros(2),
        y_init=y_init.reshape(-1),
        target=point_target(np.zeros(1)),
        path=input_box_path(1, 1, 1.0),
        T0=0,
        T1=12,
        L=8,
    )
    solution = solve_min_time(spec, data_model.reduce())
    assert solution.t_star == 4
