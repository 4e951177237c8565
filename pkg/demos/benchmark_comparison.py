"""A small cross-validated comparison of the grouped and plain fits.

Uses the benchmark harness at toy scale so it finishes quickly; the
full desk-scale protocol (n=500, 5 folds, 5 replications, 300 draws) is
what the plan files and the acceptance suite run.
"""

from gbart import (
    BenchmarkPlan,
    GroupSearchConfig,
    McmcConfig,
    parse_dataset_spec,
    run_benchmark,
)

plan = BenchmarkPlan(
    datasets=(parse_dataset_spec("case:3:n=200"),),
    methods=("GBART", "BART"),
    folds=5,
    replications=3,
    master_seed=1,
    mcmc=McmcConfig(ndpost=150, burn_in=50),
    search=GroupSearchConfig(stage1_trees=50, stage2_trees=100),
)

print("running 2 methods x 3 replications of 5-fold CV (a few minutes)...")
table = run_benchmark(plan)
print()
print(table.to_csv())
for row in table.rows:
    reps = ", ".join(f"{m:.3f}" for m in row.mses)
    print(f"{row.method}: per-replication MSEs [{reps}]")
