"""Watch the initial layer shrink as the acoustic speed grows.

For ill-prepared data the density N carries oscillations of frequency 1/eps
that never die out, while the auxiliary unknown F stays smooth.  The scheme
advances F and adds the oscillatory part back analytically, so one fixed
time step handles every eps below.

    python3 demos/initial_layer.py
"""

import numpy as np

from zakfd import make_case, norm_l2, run

TAU = 1e-3
H = 0.1
TIMES = [0.25, 0.5, 0.75, 1.0]

print(f"{'eps':>8} {'max|N|':>8} {'||F_t||':>9} {'||N_t||':>9} {'mass defect':>12} {'iters':>6}")
for eps in (1.0, 1 / 4, 1 / 16, 1 / 64):
    case = make_case("case-II", eps, domain=(-40.0, 40.0))
    grid = case.grid(H)
    traj = run(case, grid, TAU, sample_times=TIMES)
    # time derivatives between the last two samples, a crude measure of how fast each field moves
    a, b = traj.snapshots[-2], traj.snapshots[-1]
    dF = norm_l2(grid, b.F - a.F) / (b.t - a.t)
    dN = norm_l2(grid, b.N - a.N) / (b.t - a.t)
    print(f"{eps:8.4g} {np.max(np.abs(b.N)):8.3f} {dF:9.3f} {dN:9.3f} "
          f"{traj.relative_mass_defect:12.1e} {traj.max_iterations:6d}")
