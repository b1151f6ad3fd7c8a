"""Fitted column widths and row heights versus a width-only AutoFit.

Sheets with long text cells are where wrapping matters: AutoFit stretches a
column to its longest line, while the fitter wraps text and balances widths
and heights. Compatibility is the share of cell area the text actually uses.
"""

from __future__ import annotations

from cellplan import evaluate, heuristic_place
from cellplan.populator import autofit_layout, populate
from cellplan.synth import has_long_text, synth_corpus

sheets = [s for s in synth_corpus(seed=11, n=40) if has_long_text(s)][:5]
for i, sheet in enumerate(sheets):
    placed = heuristic_place(sheet)
    fitted, auto = evaluate(populate(placed)), evaluate(autofit_layout(placed))
    f = (fitted.compat_h + fitted.compat_v) / 2
    a = (auto.compat_h + auto.compat_v) / 2
    print(f"sheet {i}: fitted compat={f:.3f}  autofit compat={a:.3f}")
