"""
A small replicated study
========================

A few replications of the contaminated-normal design, tuned by 5-fold CV on a
reduced grid, reported as ``mean (sd)`` cells. Raise ``reps`` for tighter
numbers; each replication takes several seconds on one core.
"""

from wmcen import SolverConfig
from wmcen.io import render_report, study_rows
from wmcen.simgen import SimulationSpec, desk_study_grid, run_study

spec = SimulationSpec(p=12, eta=0.25, xi=0.02, error_kind="mixture", reps=3, seed=11)
cfg = SolverConfig(tol=1e-3)

results = [run_study(spec, desk_study_grid(m), cfg, method=m) for m in ("wmcen", "wlasso")]
rows = [{k: str(v) if not isinstance(v, bool) else str(int(v)) for k, v in r.items()}
        for res in results for r in study_rows(res)]
print(render_report(rows))
