"""Walk through the communication/radar trade-off on the reference system.

Run with ``python3 demos/tradeoff_walkthrough.py``. Prints rate and ISMR for
both hybrid structures as the weight phi moves from pure radar (0) to pure
communication (1), then reports where the radar-only design points its beams.
"""

import numpy as np

from dfrc_hbf.cli import beampattern_table
from dfrc_hbf.experiments import ExperimentConfig, build_problem, design, evaluate

cfg = ExperimentConfig()
problem = build_problem(cfg, seed=0)
s = problem.system
print(f"{s.n_tx} antennas, {s.n_rf} RF chains, {s.n_streams} streams, SNR {cfg.snr_db} dB")

# fully digital references bracket what any hybrid design can do
for name, f in (("digital ZF", problem.refs.f_com), ("digital radar", problem.refs.f_rad)):
    rate, ism, _ = evaluate(f, problem, 0.5, cfg.snr_db)
    print(f"{name:>14}: rate {rate:6.2f} bits/s/Hz, ISMR {10 * np.log10(ism):7.2f} dB")

print("\n  phi  structure             rate   ISMR(dB)  iterations")
for phi in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    for structure in ("full", "partial"):
        bf, report = design(cfg, problem, phi, structure)
        rate, ism, _ = evaluate(bf.f_rf @ bf.f_bb, problem, phi, cfg.snr_db)
        print(f"  {phi:.1f}  {bf.structure:<20} {rate:6.2f}  {10 * np.log10(ism):8.2f}  {report.iterations:4d}")

# phi = 0 ignores the users entirely; the pattern should peak at the targets
bf, _ = design(cfg, problem, 0.0, "full")
theta, p_db = beampattern_table(bf.f_rf @ bf.f_bb, 0.1)
peaks = [k for k in range(1, len(p_db) - 1) if p_db[k] >= p_db[k - 1] and p_db[k] > p_db[k + 1]]
top = sorted(peaks, key=lambda k: -p_db[k])[:2]
print("\nradar-only beam peaks (deg):", sorted(float(theta[k]) for k in top))
