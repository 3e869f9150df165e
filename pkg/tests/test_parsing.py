from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robochat.errors import (
    ArityError,
    DanglingTransition,
    NoFence,
    NoSuccessTerminal,
    SchemaError,
    UnknownElement,
    UnsupportedConstruct,
    UnterminatedFence,
    XmlError,
)
from robochat.parsing import (
    ActionStep,
    Behavior,
    extract_fenced_block,
    fenced,
    fsm_to_sequence,
    parse_block,
    parse_response,
    plan_to_payload,
    sequence_to_fsm,
    sequence_to_tree,
    serialize_behavior,
    serialize_fsm,
    serialize_script,
    serialize_sequence,
    serialize_tree,
    tree_to_sequence,
)

SEQ_PAYLOAD = '{"actions": [{"name": "home_arm", "input": ""}]}'

name_st = st.from_regex(r"[a-z][a-z0-9_]{0,10}", fullmatch=True)
input_st = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters=" _-"),
    max_size=12).map(lambda s: s.strip())
steps_st = st.lists(
    st.builds(ActionStep, name=name_st, input=input_st), min_size=1, max_size=8)


class TestFenceExtraction:
    def test_basic(self):
        text = f"some words\n{fenced('json', SEQ_PAYLOAD)}\nafter"
        block = extract_fenced_block(text)
        assert block.tag == "json"
        assert block.payload.strip() == SEQ_PAYLOAD

    def test_first_fence_wins(self):
        text = (fenced("json", '{"actions": []}') + "\n"
                + fenced("json", SEQ_PAYLOAD))
        block = extract_fenced_block(text)
        assert block.payload.strip() == '{"actions": []}'

    def test_unsupported_tag_is_prose(self):
        text = (fenced("ruby", "puts 1") + "\n" + fenced("json", SEQ_PAYLOAD))
        block = extract_fenced_block(text)
        assert block.tag == "json"

    def test_no_fence(self):
        with pytest.raises(NoFence):
            extract_fenced_block("I cannot do that.")

    def test_unterminated(self):
        with pytest.raises(UnterminatedFence):
            extract_fenced_block("```json\n{\"actions\": []}")

    def test_offsets_slice_the_source(self):
        text = "lead\n" + fenced("python", 'home_arm()')
        block = extract_fenced_block(text)
        assert "home_arm()" in text[block.start:block.end]


class TestSequenceGrammar:
    def test_round_trip(self):
        steps = (ActionStep("home_arm", ""), ActionStep("pick_up", "red cube"))
        behavior = parse_block("json", serialize_sequence(steps))
        assert behavior.mode == "sequence"
        assert behavior.steps == steps

    def test_missing_actions_key(self):
        with pytest.raises(SchemaError) as e:
            parse_block("json", '{"steps": []}')
        assert e.value.path == "/actions"

    def test_step_missing_name(self):
        with pytest.raises(SchemaError) as e:
            parse_block("json", '{"actions": [{"input": "x"}]}')
        assert e.value.path == "/actions/0/name"

    def test_bad_name_chars(self):
        with pytest.raises(SchemaError):
            parse_block("json", '{"actions": [{"name": "Pick Up", "input": ""}]}')

    def test_not_json(self):
        with pytest.raises(SchemaError):
            parse_block("json", "actions: nope")

    @given(steps_st)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, steps):
        behavior = parse_block("json", serialize_sequence(tuple(steps)))
        assert list(behavior.steps) == steps


class TestTreeGrammar:
    def test_round_trip(self):
        steps = [ActionStep("home_arm", ""), ActionStep("pick_up", "red cube")]
        root = sequence_to_tree(steps)
        behavior = parse_block("xml", serialize_tree(root))
        assert behavior.mode == "tree"
        assert list(tree_to_sequence(behavior.root)) == steps

    def test_unknown_element(self):
        xml = "<BehaviorTree><Twirl/></BehaviorTree>"
        with pytest.raises(UnknownElement):
            parse_block("xml", xml)

    def test_root_arity(self):
        xml = ("<BehaviorTree><Action name=\"home_arm\"/>"
               "<Action name=\"home_arm\"/></BehaviorTree>")
        with pytest.raises(ArityError):
            parse_block("xml", xml)

    def test_inverter_arity(self):
        xml = ("<BehaviorTree><Inverter><Action name=\"home_arm\"/>"
               "<Action name=\"open_gripper\"/></Inverter></BehaviorTree>")
        with pytest.raises(ArityError):
            parse_block("xml", xml)

    def test_parallel_threshold_range(self):
        xml = ("<BehaviorTree><Parallel threshold=\"5\">"
               "<Action name=\"home_arm\"/></Parallel></BehaviorTree>")
        with pytest.raises(ArityError):
            parse_block("xml", xml)

    def test_retry_needs_positive_count(self):
        xml = ("<BehaviorTree><Retry num=\"0\">"
               "<Action name=\"home_arm\"/></Retry></BehaviorTree>")
        with pytest.raises(ArityError):
            parse_block("xml", xml)

    def test_leaf_needs_name(self):
        xml = "<BehaviorTree><Action/></BehaviorTree>"
        with pytest.raises(SchemaError):
            parse_block("xml", xml)

    def test_malformed_xml_reports_line(self):
        with pytest.raises(XmlError) as e:
            parse_block("xml", "<BehaviorTree>\n<oops\n</BehaviorTree>")
        assert e.value.line >= 1

    @given(steps_st)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, steps):
        root = sequence_to_tree(steps)
        behavior = parse_block("xml", serialize_tree(root))
        assert list(tree_to_sequence(behavior.root)) == steps


class TestFsmGrammar:
    def test_round_trip(self):
        steps = [ActionStep("home_arm", ""), ActionStep("pick_up", "red cube")]
        graph = sequence_to_fsm(steps)
        behavior = parse_block("json", serialize_fsm(graph))
        assert behavior.mode == "fsm"
        assert list(fsm_to_sequence(behavior.fsm)) == steps

    def test_dangling_transition(self):
        payload = ('{"fsm": {"initial": "a", "states": {'
                   '"a": {"action": "home_arm", "input": "", '
                   '"on_success": "nowhere", "on_failure": "failed"}}, '
                   '"terminals": {"done": "success", "failed": "failure"}}}')
        with pytest.raises(DanglingTransition) as e:
            parse_block("json", payload)
        assert e.value.target == "nowhere"

    def test_unreachable_success_terminal(self):
        payload = ('{"fsm": {"initial": "a", "states": {'
                   '"a": {"action": "home_arm", "input": "", '
                   '"on_success": "failed", "on_failure": "failed"}}, '
                   '"terminals": {"done": "success", "failed": "failure"}}}')
        with pytest.raises(NoSuccessTerminal):
            parse_block("json", payload)

    def test_missing_initial(self):
        payload = '{"fsm": {"states": {}, "terminals": {"d": "success"}}}'
        with pytest.raises(SchemaError):
            parse_block("json", payload)

    def test_state_terminal_overlap(self):
        payload = ('{"fsm": {"initial": "a", "states": {'
                   '"a": {"action": "home_arm", "input": "", '
                   '"on_success": "a", "on_failure": "a"}}, '
                   '"terminals": {"a": "success"}}}')
        with pytest.raises(SchemaError):
            parse_block("json", payload)

    @given(steps_st)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, steps):
        graph = sequence_to_fsm(steps)
        behavior = parse_block("json", serialize_fsm(graph))
        assert list(fsm_to_sequence(behavior.fsm)) == steps


class TestScriptGrammar:
    def test_round_trip(self):
        steps = (ActionStep("home_arm", ""), ActionStep("pick_up", "red cube"))
        behavior = parse_block("python", serialize_script(steps))
        assert behavior.mode == "sequence"
        assert behavior.steps == steps
        assert behavior.source_tag == "python"

    def test_comments_and_blanks_skipped(self):
        src = "# plan\n\nhome_arm()\npick_up(\"red cube\")  # grab it\n"
        behavior = parse_block("python", src)
        assert [s.name for s in behavior.steps] == ["home_arm", "pick_up"]

    @pytest.mark.parametrize("line", [
        "for i in range(3): home_arm()",
        "x = pick_up(\"red cube\")",
        "if ready:",
        "home_arm(); open_gripper()",
        "pick_up('single quotes')",
    ])
    def test_unsupported_constructs(self, line):
        with pytest.raises(UnsupportedConstruct) as e:
            parse_block("python", f"home_arm()\n{line}")
        assert e.value.line_no == 2

    @given(steps_st)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, steps):
        clean = [s for s in steps if '"' not in s.input]
        if not clean:
            return
        behavior = parse_block("python", serialize_script(clean))
        assert list(behavior.steps) == clean


class TestResponseParsing:
    def test_prose_then_fence(self):
        text = "Thinking through the scene.\n" + fenced("json", SEQ_PAYLOAD)
        behavior = parse_response(text)
        assert behavior.mode == "sequence"

    def test_refusal_without_fence_raises(self):
        with pytest.raises(NoFence):
            parse_response("I only operate the gantry via jog commands.")

    def test_json_fsm_vs_sequence_detection(self):
        seq = parse_response(fenced("json", SEQ_PAYLOAD))
        graph = sequence_to_fsm([ActionStep("home_arm", "")])
        fsm = parse_response(fenced("json", serialize_fsm(graph)))
        assert seq.mode == "sequence"
        assert fsm.mode == "fsm"


class TestPlanPayloads:
    @pytest.mark.parametrize("mode", ["sequence", "tree", "fsm", "script"])
    def test_all_modes_round_trip_a_plan(self, mode):
        plan = [("locate_object", "red cube"), ("pick_up", "red cube"),
                ("drop_in_sink", "")]
        tag, payload = plan_to_payload(plan, mode)
        behavior = parse_block(tag, payload)
        if behavior.mode == "tree":
            steps = tree_to_sequence(behavior.root)
        elif behavior.mode == "fsm":
            steps = fsm_to_sequence(behavior.fsm)
        else:
            steps = list(behavior.steps)
        assert [(s.name, s.input) for s in steps] == plan

    def test_serialize_behavior_inverse(self):
        steps = (ActionStep("home_arm", ""),)
        for behavior in (
            Behavior(mode="sequence", steps=steps),
            Behavior(mode="tree", root=sequence_to_tree(steps)),
            Behavior(mode="fsm", fsm=sequence_to_fsm(steps)),
        ):
            tag, payload = serialize_behavior(behavior)
            again = parse_block(tag, payload)
            assert again.mode == behavior.mode
