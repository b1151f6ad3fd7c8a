"""Render a colored-grid sketch and snap a pixel layout back onto the grid.

The sketch is what a vision-capable reviser sees. Converting a layout to
pixel boxes, nudging them, and snapping them back shows that snapping moves
each edge by at most half a cell.
"""

from __future__ import annotations

import random
import tempfile
from pathlib import Path

from cellplan import heuristic_place
from cellplan.pixels import GridSpec, PixelBox, PixelLayout, edge_displacements, snap, to_pixels
from cellplan.sketch import rasterize, render_sketch
from cellplan.synth import synth_sheet

layout = heuristic_place(synth_sheet(random.Random(5)))
doc = render_sketch(layout)
out = Path(tempfile.mkdtemp()) / "sketch.png"
out.write_bytes(rasterize(doc))
print(f"sketch written to {out}")

spec = GridSpec()
pix = to_pixels(layout, spec)
nudged = PixelLayout(tuple(
    PixelBox(b.id, b.type, b.x1 + 7, b.y1 + 4, b.x2 + 7, b.y2 + 4) for b in pix.boxes
))
snapped = snap(nudged, spec)
moves = edge_displacements(nudged, snapped, spec)  # pixels, ordered x1, x2, y1, y2 per box
cells = [m / (spec.cell_x if i % 4 < 2 else spec.cell_y) for i, m in enumerate(moves)]
print(f"snapped {len(snapped.components)} components; worst edge move {max(cells):.2f} cell")
