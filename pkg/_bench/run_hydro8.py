"""Criterion-5/6 runs: hydrostatic plate at bh/dp^S = 8, rkgc and uncorrected."""
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, "src")
from sphfsi.cases import load_case_config, run_case

base = Path("_bench/hydro8")
for correction in ("rkgc", "none"):
    cfg = load_case_config("hydrostatic-plate")
    cfg.correction = correction
    outdir = base / correction
    t0 = time.time()
    summary = run_case(cfg, output_dir=outdir, log_every=0.1)
    (outdir / "summary.json").write_text(json.dumps({
        "wall_time_s": summary["wall_time_s"],
        "acoustic_steps": summary["acoustic_steps"],
        "counters": summary["counters"],
        "coupling_balance_max": summary["coupling_balance_max"],
    }, indent=2))
    print(f"{correction}: done in {time.time()-t0:.0f}s", flush=True)
print("ALL DONE")
