"""Scaling model: where the physical device overtakes a cubic digital baseline.

Device time is compile/load (quadratic in dimension) plus readout and
dynamics (linear in samples); the digital baseline is fitted from a
measured table and grows cubically.  With the bundled assumptions the time
crossover lands near dimension 3000 and the energy advantage holds at
every dimension.
"""

from pathlib import Path

import numpy as np

from spusim.perf import (crossover, load_digital_baseline, loglog_slope,
                         performance_curves, spu_time)
from spusim.svgplot import line_plot

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

digital = load_digital_baseline()
dims = np.unique(np.geomspace(100, 100_000, 30).astype(int))
table = performance_curves(dims, n_samples=10_000, digital=digital)

d_star = crossover(digital=digital)
print(f"time crossover at dimension {d_star}")
big = np.unique(np.geomspace(1e3, 1e5, 12).astype(int))
print(f"device time slope  (d in [1e3, 1e5]): "
      f"{loglog_slope(big, [spu_time(int(d), 10_000) for d in big]):.3f}")
print(f"digital time slope (d in [1e3, 1e5]): "
      f"{loglog_slope(big, table[np.isin(table[:, 0], big)][:, 2]):.3f}"
      if np.isin(big, table[:, 0]).all() else "")
speedup = table[-1, 2] / table[-1, 1]
energy_ratio = table[-1, 4] / table[-1, 3]
print(f"at d = {int(table[-1, 0])}: {speedup:.1f}x faster, "
      f"{energy_ratio:.0f}x less energy")

np.savetxt(out / "perf_curves.csv", table, delimiter=",",
           header="d,spu_time_s,digital_time_s,spu_energy_j,digital_energy_j",
           comments="", fmt="%.8g")
line_plot(out / "perf_time.svg",
          [(table[:, 0], table[:, 1], "device"),
           (table[:, 0], table[:, 2], "digital")],
          title="time to 10k samples", xlabel="dimension", ylabel="seconds",
          log_x=True, log_y=True)
line_plot(out / "perf_energy.svg",
          [(table[:, 0], table[:, 3], "device"),
           (table[:, 0], table[:, 4], "digital")],
          title="energy to 10k samples", xlabel="dimension", ylabel="joules",
          log_x=True, log_y=True)
print(f"artifacts in {out}")
