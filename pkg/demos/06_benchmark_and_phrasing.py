"""
Measuring the pipeline, not just eyeballing it
==============================================

Two measurement harnesses ship with the library.  The task benchmark
generates 35 self-checking tabletop tasks (five each at 2 through 8
cubes) and scores any gateway against them, with or without a round of
scripted corrective feedback.  The phrasing corpus re-asks the same
request in near-identical wordings and checks whether the produced
behaviors agree, which is how brittle prompt handling shows up early.
"""
from robochat import GatewayConfig
from robochat.bench import (
    check_gates,
    generate_tasks,
    run_benchmark,
    run_sensitivity_corpus,
)

tasks = generate_tasks()
print(f"generated {len(tasks)} tasks; a sample:")
for t in tasks[::9]:
    print(f"  [{t.n_boxes} cubes] {t.instruction}")

# -- the oracle gateway sets the ceiling: everything must pass ---------------

print("\noracle gateway, all four behavior formats:")
for mode in ("sequence", "tree", "fsm", "script"):
    report = run_benchmark(tasks, GatewayConfig(backend="oracle"), mode=mode)
    print(f"  {mode:8s} overall success {report.overall_rate():.2f}")

# -- a flawed gateway shows the value of one corrective sentence -------------

flawed = GatewayConfig(backend="corrupting", corruption_seed=11)
baseline = run_benchmark(tasks, flawed, feedback="none")
healed = run_benchmark(tasks, flawed, feedback="scripted")
print("\ncorrupting gateway, success rate by scene size:")
print("  size     " + "".join(f"{n:>6d}" for n in range(2, 9)))
print("  no help  " + "".join(
    f"{baseline.per_size_rate()[n]:>6.2f}" for n in range(2, 9)))
print("  helped   " + "".join(
    f"{healed.per_size_rate()[n]:>6.2f}" for n in range(2, 9)))
causes = sorted({r.cause for r in healed.results if r.cause})
print(f"  failure causes seen: {', '.join(causes)}")
print(f"  gate violations: {check_gates(healed, baseline) or 'none'}")

# -- paraphrases should not change the behavior ------------------------------

corpus = run_sensitivity_corpus(GatewayConfig(backend="oracle"))
print("\nphrasing corpus (oracle):")
for row in corpus.rows:
    print(f"  {row.pair_id:18s} {'same' if row.equal else 'DIVERGES'}")
print(f"  all pairs equal: {corpus.all_equal}")
