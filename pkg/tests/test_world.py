from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robochat.errors import (
    InvalidBoxCount,
    InvalidLocation,
    ObjectHeld,
    UnknownBuiltin,
    UnknownObject,
)
from robochat.tasks import GoalClause, TaskSpec
from robochat.world import (
    BUILTINS,
    COFFEE_PLAN,
    GRASP_WIDTH,
    OPEN_WIDTH,
    execute_atomic,
    goal_satisfied,
    ground_truth_plan,
    jog_route,
    perturb,
    reset,
    resolve_object,
)


class TestReset:
    def test_same_seed_same_world(self):
        a = reset("tabletop", n_boxes=5, seed=9)
        b = reset("tabletop", n_boxes=5, seed=9)
        assert a.to_dict() == b.to_dict()

    def test_different_seed_differs(self):
        a = reset("tabletop", n_boxes=5, seed=9)
        b = reset("tabletop", n_boxes=5, seed=10)
        assert a.to_dict() != b.to_dict()

    @pytest.mark.parametrize("n", [0, 1, 9, -3])
    def test_box_count_bounds(self, n):
        with pytest.raises(InvalidBoxCount):
            reset("tabletop", n_boxes=n)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_distinct_colors_up_to_seven(self, n):
        w = reset("tabletop", n_boxes=n, seed=4)
        colors = [o.color for o in w.objects.values()]
        if n <= 7:
            assert len(set(colors)) == n
        else:
            assert len(set(colors)) == 7      # one color repeats at n=8
            dupes = [oid for oid in w.objects if oid.endswith("_2")]
            assert len(dupes) == 1

    def test_all_cubes_start_in_table_zones(self):
        w = reset("tabletop", n_boxes=6, seed=2)
        for o in w.objects.values():
            assert o.location.kind == "zone"
            assert o.location.ref.startswith("table_")

    def test_coffee_layout(self):
        w = reset("coffee")
        assert w.objects["mug"].location.ref == "table_center"
        assert w.objects["spoon"].location.ref == "table_right"
        assert w.objects["bowl"].location.ref == "cabinet"
        assert not w.cabinet_door_open
        assert not w.machine_cover_open
        assert not w.machine_on

    def test_supervisory_layout(self):
        w = reset("supervisory")
        assert w.grid is not None
        assert w.grid.gripper_cell == (2, 0, 2)
        assert w.grid.object_cells["blue_cube"] == (0, 2, 0)
        assert w.grid.object_cells["red_cube"] == (4, 2, 0)
        assert w.grid.object_cells["blue_bowl"] == (0, 4, 0)
        assert (2, 2, 0) in w.grid.obstacle_cells
        assert (2, 2, 1) in w.grid.obstacle_cells

    def test_gripper_starts_open(self):
        w = reset("tabletop", n_boxes=2, seed=1)
        assert w.gripper.open
        assert w.gripper.width == OPEN_WIDTH
        assert w.gripper.held is None


class TestResolve:
    @pytest.fixture
    def scene(self):
        return reset("tabletop", n_boxes=3, seed=42)  # purple, red, white

    def test_color_and_kind(self, scene):
        assert resolve_object(scene, "the red cube").id == "red_cube"
        assert resolve_object(scene, "red box").id == "red_cube"
        assert resolve_object(scene, "RED BLOCK").id == "red_cube"

    def test_kind_only_takes_lowest_id(self, scene):
        assert resolve_object(scene, "a cube").id == "purple_cube"

    def test_unknown_adjective_resolves_to_nothing(self, scene):
        assert resolve_object(scene, "turquoise cube") is None
        assert resolve_object(scene, "the shiny cube") is None

    def test_absent_color_resolves_to_nothing(self, scene):
        assert resolve_object(scene, "blue cube") is None

    def test_exact_id_wins(self):
        w = reset("tabletop", n_boxes=8, seed=4)
        dupe = next(oid for oid in w.objects if oid.endswith("_2"))
        assert resolve_object(w, dupe).id == dupe

    def test_coffee_nouns(self):
        w = reset("coffee")
        assert resolve_object(w, "mug").id == "mug"
        assert resolve_object(w, "the cup").id == "mug"
        assert resolve_object(w, "spoon").id == "spoon"
        assert resolve_object(w, "bowl").id == "bowl"
        assert resolve_object(w, "the bowl").id == "bowl"


class TestAtomicActions:
    @pytest.fixture
    def scene(self):
        return reset("tabletop", n_boxes=3, seed=42)

    def test_unknown_builtin(self, scene):
        with pytest.raises(UnknownBuiltin):
            execute_atomic(scene, "fly_away")

    def test_pick_and_place_on(self, scene):
        w, r = execute_atomic(scene, "pick_up", "red cube")
        assert r.failure == 0
        assert w.gripper.held == "red_cube"
        assert w.gripper.width == GRASP_WIDTH
        assert not w.gripper.open
        w, r = execute_atomic(w, "place_on", "white cube")
        assert r.failure == 0
        assert w.objects["red_cube"].location.kind == "on"
        assert w.objects["red_cube"].location.ref == "white_cube"
        assert w.gripper.held is None

    def test_pick_while_holding_fails(self, scene):
        w, _ = execute_atomic(scene, "pick_up", "red cube")
        w, r = execute_atomic(w, "pick_up", "white cube")
        assert r.failure == 1
        assert "gripper is full" in r.output
        # held cube keeps its width, zero-width rule applies to empty hands only
        assert w.gripper.width == GRASP_WIDTH
        assert w.gripper.held == "red_cube"

    def test_grasp_failure_zeroes_width(self, scene):
        w, r = execute_atomic(scene, "pick_up", "blue cube")
        assert r.failure == 1
        assert w.gripper.width == 0.0
        assert w.gripper.held is None

    def test_pick_under_another_cube_fails(self, scene):
        w, _ = execute_atomic(scene, "pick_up", "red cube")
        w, _ = execute_atomic(w, "place_on", "white cube")
        w, r = execute_atomic(w, "pick_up", "white cube")
        assert r.failure == 1
        assert "on top" in r.output

    def test_close_on_nothing_is_failed_grasp(self, scene):
        w, r = execute_atomic(scene, "close_gripper")
        assert r.failure == 1
        assert w.gripper.width == 0.0

    def test_failure_atomicity(self, scene):
        before = scene.to_dict()
        w, r = execute_atomic(scene, "pick_up", "blue cube")
        assert r.failure == 1
        after = w.to_dict()
        # only the gripper width and the step counter may move on failure
        before["gripper"]["width"] = after["gripper"]["width"]
        before["step_count"] = after["step_count"]
        assert before == after

    def test_held_implies_positive_width(self, scene):
        w, _ = execute_atomic(scene, "pick_up", "red cube")
        for name in ("pick_up", "close_gripper"):
            w2, r = execute_atomic(w, name, "white cube")
            if w2.gripper.held is not None:
                assert w2.gripper.width > 0

    def test_step_count_always_advances(self, scene):
        w1, _ = execute_atomic(scene, "home_arm")
        w2, _ = execute_atomic(w1, "pick_up", "blue cube")  # failure
        assert w1.step_count == scene.step_count + 1
        assert w2.step_count == w1.step_count + 1

    def test_object_conservation(self, scene):
        ids = set(scene.objects)
        w = scene
        for name, arg in [("pick_up", "red cube"), ("place_on", "white cube"),
                          ("pick_up", "purple cube"), ("drop_in_sink", "")]:
            w, _ = execute_atomic(w, name, arg)
            assert set(w.objects) == ids


class TestOcclusion:
    def test_locate_blocked_until_homed(self):
        w = reset("tabletop", n_boxes=3, seed=42, occlusion=True)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        w, _ = execute_atomic(w, "drop_in_sink")
        w, r = execute_atomic(w, "locate_object", "white cube")
        assert r.failure == 1
        assert r.output == "camera occluded by arm"
        w, r = execute_atomic(w, "home_arm")
        assert r.failure == 0
        w, r = execute_atomic(w, "locate_object", "white cube")
        assert r.failure == 0

    def test_no_occlusion_by_default(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        w, _ = execute_atomic(w, "drop_in_sink")
        w, r = execute_atomic(w, "locate_object", "white cube")
        assert r.failure == 0


class TestBeliefAndPerturbation:
    @pytest.fixture
    def scene(self):
        return reset("tabletop", n_boxes=3, seed=42)

    def test_locate_reports_zone(self, scene):
        w, r = execute_atomic(scene, "locate_object", "red cube")
        zone = scene.objects["red_cube"].location.ref
        assert r.output == f"found red cube in {zone}"

    def test_stale_belief_breaks_grasp(self, scene):
        w, _ = execute_atomic(scene, "locate_object", "red cube")
        w = perturb(w, "red_cube", new_zone="table_right")
        w, r = execute_atomic(w, "pick_up", "red cube")
        assert r.failure == 1
        assert "moved since last seen" in r.output
        assert w.gripper.width == 0.0

    def test_relocate_heals_belief(self, scene):
        w, _ = execute_atomic(scene, "locate_object", "red cube")
        w = perturb(w, "red_cube", new_zone="table_right")
        w, _ = execute_atomic(w, "locate_object", "red cube")
        w, r = execute_atomic(w, "pick_up", "red cube")
        assert r.failure == 0

    def test_unseen_object_grasps_directly(self, scene):
        w = perturb(scene, "red_cube", new_zone="table_right")
        w, r = execute_atomic(w, "pick_up", "red cube")
        assert r.failure == 0

    def test_perturb_validation(self, scene):
        with pytest.raises(UnknownObject):
            perturb(scene, "ghost", new_zone="sink")
        with pytest.raises(InvalidLocation):
            perturb(scene, "red_cube", new_zone="atlantis")
        held, _ = execute_atomic(scene, "pick_up", "red cube")
        with pytest.raises(ObjectHeld):
            perturb(held, "red_cube", new_zone="sink")


class TestCoffee:
    def test_full_plan_reaches_terminal_state(self):
        w = reset("coffee")
        for name, arg in COFFEE_PLAN:
            w, r = execute_atomic(w, name, arg)
            assert r.failure == 0, (name, r.output)
        assert w.machine_on
        assert w.objects["mug"].location.ref == "machine"
        assert not w.cabinet_door_open
        assert not w.machine_cover_open

    def test_cabinet_guard(self):
        w = reset("coffee")
        w, r = execute_atomic(w, "take_out_of_cabinet", "bowl")
        assert r.failure == 1
        assert "door" in r.output

    def test_scoop_needs_spoon(self):
        w = reset("coffee")
        w, r = execute_atomic(w, "scoop_from_bowl")
        assert r.failure == 1

    def test_pour_needs_open_cover(self):
        w = reset("coffee")
        w, _ = execute_atomic(w, "open_door")
        w, _ = execute_atomic(w, "take_out_of_cabinet", "bowl")
        w, _ = execute_atomic(w, "pick_up", "spoon")
        w, _ = execute_atomic(w, "scoop_from_bowl")
        w, r = execute_atomic(w, "pour_into_machine")
        assert r.failure == 1
        assert "cover" in r.output

    def test_insert_mug_requires_mug_in_hand(self):
        w = reset("coffee")
        w, r = execute_atomic(w, "insert_mug", "mug")
        assert r.failure == 1
        w, _ = execute_atomic(w, "pick_up", "spoon")
        w, r = execute_atomic(w, "insert_mug", "mug")
        assert r.failure == 1
        assert "not a mug" in r.output


class TestSupervisoryGrid:
    def test_moves_and_bounds(self):
        w = reset("supervisory")
        w, r = execute_atomic(w, "move_up")
        assert r.failure == 1                 # already at the top layer
        assert r.output == "workspace limit reached"
        w, r = execute_atomic(w, "move_forward")
        assert r.failure == 0
        assert w.grid.gripper_cell == (2, 1, 2)

    def test_obstacle_blocks(self):
        w = reset("supervisory")
        w, _ = execute_atomic(w, "move_forward")    # (2,1,2)
        w, _ = execute_atomic(w, "move_down")       # (2,1,1)
        w, r = execute_atomic(w, "move_forward")    # (2,2,1) is an obstacle
        assert r.failure == 1
        assert r.output == "blocked by obstacle"
        assert w.grid.gripper_cell == (2, 1, 1)

    def test_jogging_unavailable_elsewhere(self):
        w = reset("tabletop", n_boxes=2, seed=1)
        w, r = execute_atomic(w, "move_left")
        assert r.failure == 1
        assert "not available" in r.output

    def test_grip_and_carry(self):
        w = reset("supervisory")
        task = TaskSpec(id="j", n_boxes=0, instruction="",
                        goals=(GoalClause("on", "blue cube", "blue bowl"),))
        for name, arg in jog_route(w, task):
            w, r = execute_atomic(w, name, arg)
            assert r.failure == 0, (name, r.output)
        assert w.grid.object_cells["blue_cube"] == w.grid.object_cells["blue_bowl"]
        assert goal_satisfied(w, task)


class TestGoals:
    def test_in_zone_via_stack_base(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        w, _ = execute_atomic(w, "place_on", "white cube")
        zone = w.objects["white_cube"].location.ref
        task = TaskSpec(id="g", n_boxes=3, instruction="",
                        goals=(GoalClause("in_zone", "red cube", zone),))
        assert goal_satisfied(w, task)

    def test_on_clause(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        task = TaskSpec(id="g", n_boxes=3, instruction="",
                        goals=(GoalClause("on", "red cube", "white cube"),))
        assert not goal_satisfied(w, task)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        w, _ = execute_atomic(w, "place_on", "white cube")
        assert goal_satisfied(w, task)

    def test_held_object_is_in_no_zone(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        zone = w.objects["red_cube"].location.ref
        task = TaskSpec(id="g", n_boxes=3, instruction="",
                        goals=(GoalClause("in_zone", "red cube", zone),))
        assert goal_satisfied(w, task)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        assert not goal_satisfied(w, task)


class TestGroundTruthPlans:
    def test_plan_solves_every_generated_task(self):
        # cross-checked harder in the bench tests, spot check here
        from robochat.actions import builtin_library
        from robochat.engine import ActionRouter, run_sequence
        from robochat.parsing import ActionStep

        task = TaskSpec(
            id="chain", n_boxes=3, instruction="",
            goals=(GoalClause("on", "red cube", "white cube"),
                   GoalClause("on", "purple cube", "red cube")), seed=42)
        w = reset("tabletop", n_boxes=3, seed=42)
        plan = ground_truth_plan(w, task)
        trace = run_sequence([ActionStep(n, a) for n, a in plan], w,
                             ActionRouter(builtin_library()))
        assert trace.behavior_failure == 0
        assert goal_satisfied(trace.final_state, task)

    def test_chain_builds_bottom_up(self):
        task = TaskSpec(
            id="chain", n_boxes=3, instruction="",
            goals=(GoalClause("on", "purple cube", "red cube"),
                   GoalClause("on", "red cube", "white cube")), seed=42)
        w = reset("tabletop", n_boxes=3, seed=42)
        plan = ground_truth_plan(w, task)
        places = [arg for name, arg in plan if name == "place_on"]
        assert places == ["white cube", "red cube"]

    def test_guarded_doubles_the_looking(self):
        task = TaskSpec(id="g", n_boxes=3, instruction="",
                        goals=(GoalClause("in_zone", "red cube", "sink"),), seed=42)
        w = reset("tabletop", n_boxes=3, seed=42)
        plain = ground_truth_plan(w, task)
        guarded = ground_truth_plan(w, task, guarded=True)
        assert sum(1 for n, _ in plain if n == "locate_object") == 1
        assert sum(1 for n, _ in guarded if n == "locate_object") == 2


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    n=st.integers(min_value=2, max_value=8),
    moves=st.lists(
        st.tuples(st.sampled_from(sorted(BUILTINS)),
                  st.sampled_from(["", "red cube", "cube", "mug", "white cube"])),
        max_size=8),
)
def test_random_walk_keeps_invariants(seed, n, moves):
    """No action sequence can corrupt the world."""
    w = reset("tabletop", n_boxes=n, seed=seed)
    ids = set(w.objects)
    for name, arg in moves:
        w, r = execute_atomic(w, name, arg)
        assert set(w.objects) == ids
        g = w.gripper
        if g.held is not None:
            assert g.width > 0 and not g.open
        if g.open:
            assert g.held is None
        for o in w.objects.values():
            if o.location.kind == "on":
                assert o.location.ref in w.objects
            if g.held == o.id:
                assert o.location.kind == "held"
