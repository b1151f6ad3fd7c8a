"""Threshold-triggered revision of a poor layout.

A random scatter usually scores below threshold on several aspects. The
triggered instructions are printed, then an offline local-search reviser runs
one round and the totals before and after are shown.
"""

from __future__ import annotations

import random

from cellplan import ThresholdProfile, evaluate, triggers
from cellplan.placer import random_place
from cellplan.reflection import STRUCTURE_WEIGHTS, reflect_trace, search_reviser
from cellplan.synth import synth_sheet

sheet = synth_sheet(random.Random(3))
draft = random_place(sheet, seed=1)
report = evaluate(draft, weights=STRUCTURE_WEIGHTS)

print("triggered instructions:")
for text in triggers(report, ThresholdProfile()):
    print(f"  - {text}")

trace = reflect_trace(draft, search_reviser(300), ThresholdProfile(), max_rounds=2, include_vision=False)
print(f"reviser invocations: {trace.invocations}")
print(f"weighted total: {trace.initial_total:.3f} -> {trace.final_total:.3f}")
