"""Compare the Zakharov solution with its eps -> 0 limit.

As eps halves, the distance between the finite difference solution and the
splitting solution of the limit Schroedinger equation (which keeps the
oscillatory potential) should drop by about four.  A soliton run shows the
splitting solver on its own.  The limit check runs on the full domain with
h = 0.0125 and takes about a minute; coarser meshes let the spatial error
swamp the small eps distances.
"""

from zakfd import limit_consistency_check, soliton_benchmark

bench = soliton_benchmark()
print(f"soliton: L2 error {bench['l2_error']:.2e}, mass drift {bench['relative_mass_drift']:.1e}")

rows = limit_consistency_check("case-I", [1 / 4, 1 / 8, 1 / 16])
print(f"{'eps':>8} {'distance':>10} {'ratio':>6}")
for r in rows:
    ratio = "-" if r.ratio is None else f"{r.ratio:.2f}"
    print(f"{r.epsilon:8.4g} {r.difference:10.3e} {ratio:>6}")
