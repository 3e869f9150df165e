from __future__ import annotations

import json

import pytest

from robochat.actions import builtin_library, render_library_description
from robochat.errors import (
    BadExemplarFence,
    DuplicateObserver,
    EmptyConfig,
    EmptyTask,
    MissingFormatNote,
    UnsupportedMode,
)
from robochat.observe import (
    ObserverSpec,
    collect_observation,
    default_observers,
    register_observer,
)
from robochat.prompts import SECTION_LABELS, build_prompt, load_template
from robochat.world import execute_atomic, reset

LIB_TEXT = render_library_description(builtin_library())


@pytest.fixture(scope="module")
def template():
    return load_template()


def make_obs(scenario="tabletop", n=3, seed=42):
    w = reset(scenario, n_boxes=n, seed=seed) if scenario == "tabletop" else reset(scenario)
    return w, collect_observation(w, default_observers(scenario))


class TestObservation:
    def test_gripper_line_open(self):
        _, obs = make_obs()
        assert obs.lines[0] == "the gripper is open"

    def test_gripper_line_holding(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        obs = collect_observation(w, default_observers("tabletop"))
        assert obs.lines[0] == "the gripper is closed holding the red cube"

    def test_object_lines_cover_every_object(self):
        w, obs = make_obs()
        text = obs.text
        for o in w.objects.values():
            assert any(o.color in line for line in obs.lines)
        assert "the red cube is in" in text

    def test_stacked_object_line(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        w, _ = execute_atomic(w, "pick_up", "red cube")
        w, _ = execute_atomic(w, "place_on", "white cube")
        obs = collect_observation(w, default_observers("tabletop"))
        assert "the red cube is on the white cube" in obs.lines

    def test_doors_reported_for_coffee(self):
        _, obs = make_obs("coffee")
        assert "the cabinet door is closed" in obs.lines
        assert "the machine cover is closed" in obs.lines
        assert "the machine is off" in obs.lines

    def test_grid_positions_for_supervisory(self):
        _, obs = make_obs("supervisory")
        assert any("(0, 2, 0)" in line for line in obs.lines)
        assert any("gripper" in line and "(2, 0, 2)" in line for line in obs.lines)

    def test_freshness_tracks_world_version(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        obs1 = collect_observation(w, default_observers("tabletop"))
        w2, _ = execute_atomic(w, "home_arm")
        obs2 = collect_observation(w2, default_observers("tabletop"))
        assert obs1.world_version == w.world_version
        assert obs2.world_version == w2.world_version
        assert obs2.world_version > obs1.world_version

    def test_no_observers_is_an_error(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        with pytest.raises(EmptyConfig):
            collect_observation(w, [])

    def test_broken_observer_reports_unavailable(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        bad = ObserverSpec(name="flaky", kind="custom_template",
                           template="{no_such_slot}")
        obs = collect_observation(w, [bad])
        assert obs.lines == ("flaky: unavailable",)

    def test_custom_template_slots(self):
        w = reset("tabletop", n_boxes=3, seed=42)
        spec = ObserverSpec(name="counts", kind="custom_template",
                            template="{n_objects} objects, arm at {arm_zone}")
        obs = collect_observation(w, [spec])
        assert obs.lines == ("3 objects, arm at home",)

    def test_duplicate_observer_name_rejected(self):
        specs = default_observers("tabletop")
        with pytest.raises(DuplicateObserver):
            register_observer(specs, ObserverSpec(name=specs[0].name,
                                                  kind="arm", template=""))


class TestPromptAssembly:
    def test_section_order_is_fixed(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "tidy the table")
        assert tuple(label for label, _ in prompt.sections) == SECTION_LABELS
        rendered_order = [prompt.rendered.index(f"## {label}")
                          for label in SECTION_LABELS]
        assert rendered_order == sorted(rendered_order)

    def test_system_vs_user_split(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "tidy the table")
        assert prompt.system_text == dict(prompt.sections)["ROLE"]
        assert "## ROLE" not in prompt.user_text
        assert "## REQUEST" in prompt.user_text

    def test_task_lands_in_request(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "stack the cubes")
        assert "stack the cubes" in prompt.section("REQUEST")

    def test_feedback_numbering(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "t",
                              feedback=("too slow", "wrong cube"))
        section = prompt.section("FEEDBACK HISTORY")
        assert "FEEDBACK[1]: too slow" in section
        assert "FEEDBACK[2]: wrong cube" in section
        assert section.index("FEEDBACK[1]") < section.index("FEEDBACK[2]")

    def test_empty_feedback_placeholder(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "t")
        assert "(none yet)" in prompt.section("FEEDBACK HISTORY")

    def test_mode_switches_format_note(self, template):
        w, obs = make_obs()
        seq = build_prompt(template, LIB_TEXT, obs, "t", mode="sequence")
        tree = build_prompt(template, LIB_TEXT, obs, "t", mode="tree")
        assert seq.section("ANSWER FORMAT") != tree.section("ANSWER FORMAT")

    def test_unsupported_mode(self, template):
        w, obs = make_obs()
        with pytest.raises(UnsupportedMode):
            build_prompt(template, LIB_TEXT, obs, "t", mode="poem")

    def test_empty_task(self, template):
        w, obs = make_obs()
        with pytest.raises(EmptyTask):
            build_prompt(template, LIB_TEXT, obs, "   ")

    def test_scene_lands_in_prompt(self, template):
        w, obs = make_obs()
        scene = prompt_scene = build_prompt(template, LIB_TEXT, obs, "t")
        for line in obs.lines:
            assert line in prompt_scene.section("CURRENT SCENE")

    def test_library_lands_in_prompt(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "t")
        assert "- pick_up (action):" in prompt.section("AVAILABLE ACTIONS")

    def test_world_version_stamped(self, template):
        w, obs = make_obs()
        prompt = build_prompt(template, LIB_TEXT, obs, "t")
        assert prompt.world_version == w.world_version


class TestPromptInjectivity:
    """Different inputs must never render to the same prompt text."""

    def test_distinct_tasks(self, template):
        w, obs = make_obs()
        a = build_prompt(template, LIB_TEXT, obs, "task one")
        b = build_prompt(template, LIB_TEXT, obs, "task two")
        assert a.rendered != b.rendered

    def test_distinct_scenes(self, template):
        _, obs1 = make_obs(seed=42)
        _, obs2 = make_obs(seed=43)
        a = build_prompt(template, LIB_TEXT, obs1, "t")
        b = build_prompt(template, LIB_TEXT, obs2, "t")
        assert a.rendered != b.rendered

    def test_distinct_feedback(self, template):
        w, obs = make_obs()
        a = build_prompt(template, LIB_TEXT, obs, "t", feedback=("x",))
        b = build_prompt(template, LIB_TEXT, obs, "t", feedback=("y",))
        c = build_prompt(template, LIB_TEXT, obs, "t", feedback=("x", "y"))
        assert len({a.rendered, b.rendered, c.rendered}) == 3

    def test_same_inputs_same_text(self, template):
        w, obs = make_obs()
        a = build_prompt(template, LIB_TEXT, obs, "t")
        b = build_prompt(template, LIB_TEXT, obs, "t")
        assert a.rendered == b.rendered


class TestTemplateFile:
    def test_default_has_all_format_notes(self, template):
        assert set(template.format_notes) == {"sequence", "tree", "fsm", "script"}

    def test_exemplars_are_quarantined(self, template):
        """Exemplar objects must never appear in a live scene."""
        from robochat.world import COLORS, KINDS
        scene_words = set(COLORS) | {"cube", "mug", "spoon", "bowl"}
        for ex in template.exemplars:
            subject_words = set(ex.situation.lower().split())
            assert not (subject_words & scene_words)

    def test_exemplar_answers_have_one_fence(self, template):
        from robochat.parsing import extract_fenced_block
        for ex in template.exemplars:
            extract_fenced_block(ex.response)

    def test_missing_format_note_rejected(self, tmp_path):
        data = {
            "preamble": "p", "cot_instruction": "c",
            "format_notes": {"sequence": "s", "tree": "t", "fsm": "f"},
            "exemplars": [],
        }
        path = tmp_path / "t.json"
        path.write_text(json.dumps(data))
        with pytest.raises(MissingFormatNote):
            load_template(path)

    def test_bad_exemplar_fence_rejected(self, tmp_path):
        data = {
            "preamble": "p", "cot_instruction": "c",
            "format_notes": {m: "x" for m in ("sequence", "tree", "fsm", "script")},
            "exemplars": [{"situation": "s", "response": "no fence here"}],
        }
        path = tmp_path / "t.json"
        path.write_text(json.dumps(data))
        with pytest.raises(BadExemplarFence):
            load_template(path)
