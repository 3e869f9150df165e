from __future__ import annotations

import json
from pathlib import Path

import pytest

from robochat.bench import (
    BenchReport,
    BenchResult,
    CSV_COLUMNS,
    check_gates,
    generate_tasks,
    main,
    run_benchmark,
    run_coffee,
    run_sensitivity_corpus,
    report_to_csv,
    _parse_gateway,
    _parse_sizes,
)
from robochat.engine import run_behavior, ActionRouter
from robochat.actions import builtin_library
from robochat.gateway import GatewayConfig
from robochat.parsing import ActionStep, Behavior
from robochat.world import goal_satisfied, ground_truth_plan, reset

FIXTURE = Path(__file__).parent.parent / "src" / "robochat" / "fixtures" / \
    "tasks_default.json"


class TestTaskGeneration:
    def test_thirty_five_tasks_five_per_size(self):
        tasks = generate_tasks()
        assert len(tasks) == 35
        sizes = sorted({t.n_boxes for t in tasks})
        assert sizes == [2, 3, 4, 5, 6, 7, 8]
        for n in sizes:
            assert sum(t.n_boxes == n for t in tasks) == 5

    def test_generation_is_deterministic(self):
        assert generate_tasks() == generate_tasks()

    def test_distinct_ids_and_seeds(self):
        tasks = generate_tasks()
        assert len({t.id for t in tasks}) == 35
        # scene seeds are drawn independently; collisions would be rare
        assert len({t.seed for t in tasks}) >= 30

    def test_matches_frozen_fixture(self):
        frozen = json.loads(FIXTURE.read_text())
        tasks = generate_tasks(tuple(frozen["sizes"]), frozen["per_size"],
                               frozen["master_seed"])
        assert [t.to_dict() for t in tasks] == frozen["tasks"]

    def test_every_task_is_solvable_by_its_oracle_plan(self):
        lib = builtin_library()
        router = ActionRouter(lib)
        for task in generate_tasks():
            world = reset("tabletop", n_boxes=task.n_boxes, seed=task.seed)
            plan = ground_truth_plan(world, task)
            behavior = Behavior(mode="sequence", steps=tuple(
                ActionStep(name=n, input=i) for n, i in plan))
            trace = run_behavior(behavior, world, router, [])
            assert trace.behavior_failure == 0, task.id
            assert goal_satisfied(trace.final_state, task), task.id

    def test_instructions_only_mention_scene_colors(self):
        for task in generate_tasks():
            world = reset("tabletop", n_boxes=task.n_boxes, seed=task.seed)
            colors = {o.color for o in world.objects.values() if o.kind == "cube"}
            for goal in task.goals:
                named = goal.subject.split()[0]
                assert named in colors, (task.id, named)


class TestOracleRuns:
    @pytest.mark.parametrize("mode", ["sequence", "tree"])
    def test_oracle_solves_everything(self, mode):
        report = run_benchmark(generate_tasks(), GatewayConfig(backend="oracle"),
                               mode=mode)
        assert report.overall_rate() == 1.0
        assert report.per_size_rate() == {n: 1.0 for n in range(2, 9)}
        assert all(r.condition == "no_feedback" for r in report.results)
        assert all(r.cause == "" for r in report.results)
        assert all(r.steps_attempt_1 >= 3 for r in report.results)

    def test_coffee_run_reaches_terminal_state(self):
        session, episode, ok = run_coffee()
        assert ok
        assert len(episode.steps) == 12
        assert session.ledger_value() == -1.0


class TestCorruptedRuns:
    def make_reports(self):
        tasks = generate_tasks()
        cfg = GatewayConfig(backend="corrupting", corruption_seed=11)
        baseline = run_benchmark(tasks, cfg, feedback="none")
        healed = run_benchmark(tasks, cfg, feedback="scripted")
        return baseline, healed

    def test_feedback_never_hurts_and_often_rescues(self):
        baseline, healed = self.make_reports()
        without = baseline.per_size_rate()
        with_fb = healed.per_size_rate()
        for n in range(2, 9):
            assert with_fb[n] >= without[n], f"size {n}"
        assert sum(rate < 1.0 for rate in without.values()) >= 5
        assert check_gates(healed, baseline) == []

    def test_failed_attempts_carry_cause_and_feedback(self):
        _, healed = self.make_reports()
        recovered = [r for r in healed.results if not r.attempt_1_success]
        assert recovered, "corruption seed should break at least one task"
        for r in recovered:
            assert r.cause in {"parse", "unknown_action", "wrong_order",
                               "wrong_target", "env_failure"}
            assert r.feedback
            assert r.steps_attempt_2 > 0 or not r.attempt_2_success


class TestGates:
    def result(self, **kw):
        base = dict(task_id="t", n_boxes=2, mode="sequence",
                    condition="no_feedback", attempt_1_success=True,
                    attempt_2_success=None, steps_attempt_1=3,
                    steps_attempt_2=0, cause="", feedback="", wall_ms=1.0)
        base.update(kw)
        return BenchResult(**base)

    def test_oracle_failure_is_flagged(self):
        report = BenchReport(mode="sequence", condition="no_feedback",
                             gateway="oracle",
                             results=[self.result(attempt_1_success=False)])
        assert "oracle_soundness" in check_gates(report)

    def test_unexplained_failure_is_flagged(self):
        report = BenchReport(
            mode="sequence", condition="with_feedback", gateway="corrupting",
            results=[self.result(condition="with_feedback",
                                 attempt_1_success=False,
                                 attempt_2_success=False, cause="")])
        assert "missing_cause:t" in check_gates(report)

    def test_regression_against_baseline_is_flagged(self):
        baseline = BenchReport(mode="sequence", condition="no_feedback",
                               gateway="corrupting", results=[self.result()])
        report = BenchReport(
            mode="sequence", condition="with_feedback", gateway="corrupting",
            results=[self.result(condition="with_feedback",
                                 attempt_1_success=False,
                                 attempt_2_success=False, cause="env_failure")])
        assert "feedback_not_monotone:size_2" in check_gates(report, baseline)

    def test_clean_run_has_no_violations(self):
        report = BenchReport(mode="sequence", condition="no_feedback",
                             gateway="oracle", results=[self.result()])
        assert check_gates(report) == []


class TestCsvOutput:
    def small_run(self):
        tasks = generate_tasks(sizes=(2,))
        return run_benchmark(tasks, GatewayConfig(backend="oracle"))

    def test_header_and_row_count(self):
        report = self.small_run()
        lines = report_to_csv(report).splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + len(report.results)

    def test_byte_identical_across_runs(self):
        assert report_to_csv(self.small_run()) == report_to_csv(self.small_run())

    def test_blank_second_attempt_when_not_taken(self):
        report = self.small_run()
        first_row = report_to_csv(report).splitlines()[1].split(",")
        assert first_row[CSV_COLUMNS.index("attempt_2_success")] == ""


class TestSensitivityCorpus:
    def test_oracle_treats_paraphrases_alike(self):
        report = run_sensitivity_corpus(GatewayConfig(backend="oracle"))
        assert len(report.rows) == 4
        assert report.all_equal
        assert all(r.parsed_a and r.parsed_b for r in report.rows)

    def test_divergent_transcript_is_caught(self, tmp_path):
        recording = tmp_path / "corpus.jsonl"
        run_sensitivity_corpus(GatewayConfig(backend="oracle",
                                             record_path=str(recording)))
        records = [json.loads(line) for line in
                   recording.read_text().splitlines()]
        assert len(records) == 8
        # rewrite one phrasing's reply so the pair no longer matches
        victim = records[1]
        victim["response"] = (
            "A different reading of the request.\n"
            "```json\n"
            '{"actions": [{"name": "open_gripper", "input": ""}]}\n'
            "```")
        transcript = tmp_path / "edited.jsonl"
        transcript.write_text(
            "\n".join(json.dumps(r) for r in records) + "\n")
        report = run_sensitivity_corpus(
            GatewayConfig(backend="replay", transcript_path=str(transcript)))
        assert not report.all_equal
        assert [r.equal for r in report.rows] == [False, True, True, True]


class TestCliPlumbing:
    def test_size_range_syntax(self):
        assert _parse_sizes("2..8") == (2, 3, 4, 5, 6, 7, 8)
        assert _parse_sizes("2,5") == (2, 5)

    def test_gateway_syntax(self):
        assert _parse_gateway("oracle").backend == "oracle"
        corrupting = _parse_gateway("corrupting:7")
        assert (corrupting.backend, corrupting.corruption_seed) == ("corrupting", 7)
        replay = _parse_gateway("replay:/tmp/x.jsonl")
        assert (replay.backend, replay.transcript_path) == \
            ("replay", "/tmp/x.jsonl")
        http = _parse_gateway("http:http://localhost:9")
        assert (http.backend, http.base_url) == ("http", "http://localhost:9")
        with pytest.raises(Exception):
            _parse_gateway("psychic")

    def test_run_command_writes_csv_and_exits_zero(self, tmp_path):
        out = tmp_path / "report.csv"
        code = main(["run", "--sizes", "2", "--gateway", "oracle",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 6

    def test_tasks_command_emits_fixture_shape(self, tmp_path):
        out = tmp_path / "tasks.json"
        code = main(["tasks", "--sizes", "2,3", "--emit", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["sizes"] == [2, 3]
        assert len(payload["tasks"]) == 10

    def test_coffee_command_succeeds(self, capsys):
        assert main(["coffee"]) == 0
        assert "coffee ready" in capsys.readouterr().out
