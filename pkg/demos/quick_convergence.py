"""A desk-sized spatial refinement study.

Same layout as the full sweep driven by ``zakfd sweep --sweep spatial
--table``, but on a short time interval and a narrow domain so it finishes
in seconds.  The rate lines should sit close to 2 for every eps.
"""

from zakfd import SweepSpec, emit_table, run_sweep

spec = SweepSpec(
    kind="spatial",
    case="case-II",
    epsilon_list=(1.0, 1 / 4, 1 / 16),
    h_list=(0.4, 0.2, 0.1),
    tau_fixed=1e-3,
    T=0.1,
    domain=(-40.0, 40.0),
)
result = run_sweep(spec)
print(emit_table(result.records))
print("reference:", result.records[0].ref_descriptor)
