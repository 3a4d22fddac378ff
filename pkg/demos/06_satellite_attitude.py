"""Miniature attitude-estimation benchmark.

Unit quaternions live on the 3-sphere, so attitude filtering is a direct
application of the sphere machinery. This runs a shortened version of the
full benchmark (five runs, ten simulated seconds) and prints the summary
table. The full study is available from the command line:

    manifold-ukf bench satellite --out results/
    manifold-ukf bench scalar --out results-scalar/
"""

from manifold_ukf.bench import SatelliteConfig, run_satellite

config = SatelliteConfig(duration=10.0, num_runs=5, seed=7)
report = run_satellite(config)

print(f"{config.num_runs} runs, {config.steps} steps of dt={config.dt}s each")
print()
print(f"{'filter':<24s} {'RMSE (x 1e-6 rad)':>18s} {'failed runs':>12s}")
for s in report.summaries:
    rmse = "-" if s.failed_runs == s.total_runs else f"{s.rmse * 1e6:18.6f}"
    print(f"{s.name:<24s} {rmse:>18s} {s.failed_runs:>8d} / {s.total_runs}")

print()
for run_id, name, step in report.failures:
    print(f"run {run_id}: {name} lost covariance positiveness at step {step}")
