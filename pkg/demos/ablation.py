"""
Weighting schemes side by side
==============================

Run the harness on a short schedule for a few seeds and compare the Beta
schedule with random order, a fixed mix and training on everything at once.
Outputs land in ./demo_out.
"""

import numpy as np

from atsgraph import harness
from atsgraph.trainer import Scheme

cfg = harness.parse_config("", ["total_epochs=200", "hidden1=64", "hidden2=32",
                                "classify=false", "out=demo_out"])
results = {}
for kind in ("beta", "uniform", "fixed", "all-at-once"):
    r = [harness.run_seed(cfg, s, scheme=Scheme(kind)) for s in (0, 1, 2)]
    results[kind] = np.array([x["recall@20"] for x in r])
    print("%-12s Recall@20 %.4f +/- %.4f" % (kind, results[kind].mean(), results[kind].std()))

# full learning curves and an SVG chart for every weighting arm
final = harness.cmd_ablate_weights(cfg)["final"]
for row in final:
    print("%-13s final Recall@20 %.4f" % (row["scheme"], row["recall@20"]))
print("see demo_out/weights_curves.csv and demo_out/weights_curves.svg")
