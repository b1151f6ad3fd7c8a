"""Score a few placements of the same sheet and pick the best one.

A greedy-plus-search placement is compared with seeded random scatters; the
ranker picks the candidate with the highest weighted total.
"""

from __future__ import annotations

import random

from cellplan import DEFAULT_WEIGHTS, evaluate, heuristic_place, rank
from cellplan.placer import random_place
from cellplan.synth import synth_sheet

sheet = synth_sheet(random.Random(7))
print(f"sheet topic={sheet.topic.value}, components={[c.id for c in sheet.components]}")

structure = DEFAULT_WEIGHTS.structure_stage()
candidates = {"heuristic": heuristic_place(sheet)}
for seed in range(3):
    candidates[f"random#{seed}"] = random_place(sheet, seed)

reports = {name: evaluate(lay, weights=structure) for name, lay in candidates.items()}
for name, rep in reports.items():
    print(f"{name:<10} total={rep.weighted_total:.3f} fullness={rep.fullness:.3f} overlap={rep.overlap:.3f}")

names = list(reports)
best = names[rank(list(reports.values()), structure)]
print(f"ranker picks: {best}")
