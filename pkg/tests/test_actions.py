from __future__ import annotations

import json

import pytest

from robochat.actions import (
    ActionLibrary,
    AtomicActionSpec,
    EndpointBinding,
    builtin_library,
    load_library,
    register_action,
    render_library_description,
    save_library,
    validate_behavior_names,
)
from robochat.errors import (
    DuplicateName,
    MalformedFile,
    MissingField,
    UnknownEndpointType,
)
from robochat.parsing import ActionStep, Behavior


def spec(name="open_gripper", type="service", desc="opens the parallel gripper"):
    return AtomicActionSpec(
        name=name, type=type, description=desc,
        endpoint=EndpointBinding(kind="sim_builtin", target=name))


class TestLibrary:
    def test_add_and_lookup(self):
        lib = ActionLibrary()
        lib.add(spec())
        assert "open_gripper" in lib
        assert lib.get("open_gripper").description.startswith("opens")
        assert len(lib) == 1

    def test_duplicate_rejected(self):
        lib = ActionLibrary()
        lib.add(spec())
        with pytest.raises(DuplicateName):
            lib.add(spec())

    def test_insertion_order_preserved(self):
        lib = ActionLibrary()
        for n in ("c_action", "a_action", "b_action"):
            lib.add(spec(name=n))
        assert lib.names() == ["c_action", "a_action", "b_action"]

    @pytest.mark.parametrize("bad", ["Open_Gripper", "open gripper", "", "grab!"])
    def test_name_charset(self, bad):
        with pytest.raises(MalformedFile):
            spec(name=bad)

    def test_unknown_type_rejected(self):
        with pytest.raises(MalformedFile):
            spec(type="magic")

    def test_unknown_endpoint_kind(self):
        with pytest.raises(UnknownEndpointType):
            AtomicActionSpec(
                name="x", type="service", description="d",
                endpoint=EndpointBinding(kind="carrier_pigeon", target="x"))


class TestSerialization:
    def test_save_load_round_trip(self, tmp_path):
        lib = builtin_library()
        path = tmp_path / "lib.json"
        save_library(lib, path)
        again = load_library(path)
        assert again.names() == lib.names()
        for name in lib.names():
            assert again.get(name) == lib.get(name)

    def test_load_from_list(self):
        lib = load_library([{
            "name": "open_gripper", "type": "service",
            "description": "opens the parallel gripper; returns final width",
        }])
        assert len(lib) == 1
        assert lib.get("open_gripper").type == "service"

    def test_missing_field(self):
        with pytest.raises(MissingField) as e:
            load_library([{"name": "x", "type": "service"}])
        assert e.value.field == "description"

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("not json at all{")
        with pytest.raises(MalformedFile):
            load_library(path)

    def test_duplicate_in_file(self):
        row = {"name": "x", "type": "service", "description": "d"}
        with pytest.raises(DuplicateName):
            load_library([row, row])


class TestRendering:
    def test_single_service_line(self):
        lib = load_library([{
            "name": "open_gripper", "type": "service",
            "description": "opens the parallel gripper; returns final width",
        }])
        assert render_library_description(lib) == (
            "- open_gripper (service): opens the parallel gripper; "
            "returns final width\n")

    def test_one_line_per_action(self):
        lib = builtin_library()
        text = render_library_description(lib)
        lines = text.strip().split("\n")
        assert len(lines) == len(lib)
        for line, name in zip(lines, lib.names()):
            assert line.startswith(f"- {name} (")


class TestValidation:
    def test_reports_unknown_names_in_first_appearance_order(self):
        lib = builtin_library()
        behavior = Behavior(mode="sequence", steps=(
            ActionStep("home_arm", ""),
            ActionStep("warp_drive", ""),
            ActionStep("pick_up", "x"),
            ActionStep("time_travel", ""),
            ActionStep("warp_drive", ""),
        ))
        assert validate_behavior_names(behavior, lib) == ["warp_drive", "time_travel"]

    def test_clean_behavior_passes(self):
        lib = builtin_library()
        behavior = Behavior(mode="sequence", steps=(ActionStep("home_arm", ""),))
        assert validate_behavior_names(behavior, lib) == []

    def test_register_action_extends_library(self):
        lib = builtin_library()
        register_action(lib, {
            "name": "wave", "type": "action", "description": "waves",
            "endpoint": {"kind": "http_bridge", "target": "http://b/act"}})
        assert "wave" in lib
        assert lib.get("wave").endpoint.kind == "http_bridge"


class TestBuiltins:
    def test_every_builtin_is_executable(self):
        from robochat.world import BUILTINS
        lib = builtin_library()
        for name in lib.names():
            if lib.get(name).endpoint.kind == "sim_builtin":
                assert name in BUILTINS

    def test_every_sim_handler_is_listed(self):
        from robochat.world import BUILTINS
        lib = builtin_library()
        for name in BUILTINS:
            assert name in lib
