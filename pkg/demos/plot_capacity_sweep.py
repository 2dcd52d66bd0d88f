"""
More storage, more local hits
=============================

A small replicated sweep of the user cache size with the harness. Every
seed fixes one scene that all schemes share, so differences are paired.
Five seeds and 40 iterations keep this under a couple of minutes; the
acceptance suite uses 20 seeds and 100 iterations.
"""

import dataclasses

from edgecache.harness import Sweep, plot_summary_svg, preset, run

base = preset("paper-sec5")
spec = base.replace(
    seeds=tuple(range(5)),
    pso=dataclasses.replace(base.pso, max_iters=40),
    sweep=Sweep("cd", (1, 2, 4)),
    name="user cache sweep",
)
result = run(spec, progress=lambda rec: print(".", end="", flush=True))
print()

for (scheme, value), (mean, std, n) in sorted(result.aggregates().items()):
    print(f"C_d={value}: {scheme:6s} {mean:.4f} +- {std:.4f} (n={n})")

plot_summary_svg(result, "capacity_sweep.svg", title=spec.name)
