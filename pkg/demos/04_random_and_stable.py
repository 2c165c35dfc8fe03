"""
Random polar points and stability
=================================

Points at distance r_k in random directions: along a typical direction the
image is dense when sum 1/r_k diverges and discrete when it converges.  The
second half compares the lattice with a jittered copy, which stays within
bounded distance and so has the same P-bounded directions.
"""

from projlab.classifier import ClassifierParams, RadiiSchedule
from projlab.experiments import stability_experiment
from projlab.generators import GeneratorSpec
from projlab.random_polar import PolarProcessSpec, dichotomy_experiment, random_directions
from projlab.sequences import SequenceSpec

# %%
# A smaller version of the bundled random_dichotomy recipe: 40 directions, final radius 10^5.
sched = RadiiSchedule(97.65625, 4, 6)
params = ClassifierParams(T=10, delta_dense=2.0, gamma_disc=0.01, form="phi")
for label, rseq in [("r_k = k", SequenceSpec.arithmetic(1)), ("r_k = k^2", SequenceSpec.polynomial(2))]:
    rep = dichotomy_experiment(PolarProcessSpec(rseq, 2024), 40, sched, params)
    print(f"{label:>10}: dense {float(rep.dense_frac):.2f}  discrete {float(rep.disc_frac):.2f}  "
          f"undetermined {float(rep.und_frac):.2f}")

# %%
# Lattice against jittered lattice: Hausdorff distance stays near 1 at every
# radius, and every direction gets the same P-boundedness verdict.
res = stability_experiment(GeneratorSpec.lattice(), GeneratorSpec.jittered(0.4, 11), random_directions(20, 5),
                           RadiiSchedule(10, 2, 5))
print("hausdorff by radius:", [round(h["hausdorff"], 3) for h in res["hausdorff"]])
print("agreement:", res["agreement"])

# %%
# The squares drift ever further from the lattice, and the report says so.
res = stability_experiment(GeneratorSpec.lattice(), GeneratorSpec.squares(), random_directions(5, 5),
                           RadiiSchedule(10, 2, 5))
print("hausdorff by radius:", [round(h["hausdorff"], 3) for h in res["hausdorff"]],
      "growing:", res["hausdorff_growing"])
