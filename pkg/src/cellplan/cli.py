"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 provider error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .llm import ExemplarStore, HeuristicProvider, HttpProvider, ProviderConfig, ProviderError, Transcript
from .metrics import TABLE_COLUMNS, MetricConstants, evaluate
from .model import dumps, load_layout, load_processed, load_sheet
from .pixels import GridSpec, load_pixel_layout, snap
from .placer import PlacementConfig, generate_candidates, heuristic_generator, random_generator
from .populator import autofit_layout, populate
from .ranker import DEFAULT_WEIGHTS, rank
from .reflection import ThresholdProfile, reflect_trace, search_reviser
from .sketch import rasterize, render_sketch
from .synth import CorpusProfile, synth_corpus

EXIT_OK, EXIT_VALIDATION, EXIT_PROVIDER, EXIT_IO = 0, 2, 3, 4
STRUCTURE = DEFAULT_WEIGHTS.structure_stage()


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _read(path: str) -> bytes:
    try:
        return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None


def _write(path: str | None, data: str | bytes) -> None:
    raw = data.encode("utf-8") if isinstance(data, str) else data
    if path is None or path == "-":
        sys.stdout.buffer.write(raw)
        sys.stdout.flush()
        return
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(raw)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _constants(args: argparse.Namespace) -> MetricConstants:
    return MetricConstants(compat_mode=getattr(args, "compat_mode", "mean_abs"))


def _thresholds(args: argparse.Namespace) -> ThresholdProfile:
    return ThresholdProfile.uniform(args.threshold)


def _provider(args: argparse.Namespace):
    kind = getattr(args, "provider", "mock")
    if kind == "mock":
        return HeuristicProvider(vision_capable=not getattr(args, "text_only", False))
    if not args.provider_config:
        raise CliError("--provider http needs --provider-config", EXIT_VALIDATION)
    return HttpProvider(ProviderConfig.from_file(args.provider_config))


def _corpus_files(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise CliError(f"no *.json sheets in {path}", EXIT_VALIDATION)
        return files
    if not p.exists():
        raise CliError(f"{path} does not exist", EXIT_IO)
    return [p]


def _relations_hint(doc: bytes) -> list[tuple[str, str]]:
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError:
        return []
    rel = obj.get("relations") if isinstance(obj, dict) else None
    return [tuple(p) for p in rel if isinstance(p, list) and len(p) == 2] if isinstance(rel, list) else []  # type: ignore[misc]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_score(args: argparse.Namespace) -> int:
    layout = load_layout(_read(args.layout))
    weights = STRUCTURE if args.structure else DEFAULT_WEIGHTS
    report = evaluate(layout, None, _constants(args), weights)
    _write(args.output, _json(report.to_dict()))
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    weights = STRUCTURE if args.structure else DEFAULT_WEIGHTS
    reports = [evaluate(load_layout(_read(p)), None, _constants(args), weights) for p in args.layouts]
    best = rank(reports, weights)
    out = {
        "best": best,
        "best_path": args.layouts[best],
        "totals": [r.weighted_total for r in reports],
    }
    _write(args.output, _json(out))
    return EXIT_OK


def cmd_place(args: argparse.Namespace) -> int:
    sheet = load_processed(_read(args.sheet))
    if args.generator == "llm":
        from .llm import Bridge

        bridge = Bridge(_provider(args))
        layouts = [bridge.place(sheet, None, args.seed + i) for i in range(args.candidates)]
    else:
        gen = heuristic_generator() if args.generator == "heuristic" else random_generator
        batch = generate_candidates(sheet, gen, PlacementConfig(n_candidates=args.candidates, seed=args.seed))
        for i, err in batch.errors:
            print(f"candidate {i} failed: {err}", file=sys.stderr)
        layouts = batch.layouts
        if not layouts:
            raise CliError("no placement candidate succeeded", EXIT_VALIDATION)
    best = layouts[rank([evaluate(lay, None, weights=STRUCTURE) for lay in layouts], STRUCTURE)]
    _write(args.output, dumps(best))
    return EXIT_OK


def cmd_reflect(args: argparse.Namespace) -> int:
    layout = load_layout(_read(args.layout))
    if args.provider == "http" or args.generator == "llm":
        from .llm import Bridge

        bridge = Bridge(_provider(args))
        vision = not args.no_vision

        def reviser(lay, plan):
            return bridge.revise(lay, plan, vision, args.seed)

    else:
        reviser = search_reviser(args.iterations, args.seed)
    trace = reflect_trace(layout, reviser, _thresholds(args), args.max_rounds, include_vision=not args.no_vision)
    print(f"reflection rounds: {trace.invocations}, total {trace.initial_total:.4f} -> {trace.final_total:.4f}", file=sys.stderr)
    _write(args.output, dumps(trace.layout))
    return EXIT_OK


def cmd_populate(args: argparse.Namespace) -> int:
    layout = load_layout(_read(args.layout))
    out = autofit_layout(layout) if args.autofit else populate(layout, args.candidates)
    _write(args.output, dumps(out))
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    doc = render_sketch(load_layout(_read(args.layout)))
    fmt = args.format or ("png" if str(args.output).lower().endswith(".png") else "svg")
    _write(args.output, rasterize(doc, args.cell_px) if fmt == "png" else doc.to_svg(args.unit))
    return EXIT_OK


def cmd_snap(args: argparse.Namespace) -> int:
    spec = GridSpec(args.bg_x, args.bg_y, args.cell_x, args.cell_y)
    _write(args.output, dumps(snap(load_pixel_layout(_read(args.pixels)), spec)))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    profile = CorpusProfile(allow_charts=not args.no_charts, p_long_text=args.p_long_text)
    out = Path(args.out_dir)
    for i, sheet in enumerate(synth_corpus(args.seed, args.n, profile)):
        _write(str(out / f"sheet_{i:03d}.json"), dumps(sheet))
    print(f"wrote {args.n} sheets to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    from .pipeline import PipelineConfig, run_pipeline

    cfg = PipelineConfig(
        seed=args.seed,
        generator=args.generator,
        n_place=args.candidates,
        n_populate=args.populate_candidates,
        reflect=not args.no_reflect,
        thresholds=_thresholds(args),
        max_rounds=args.max_rounds,
        include_vision=not args.no_vision,
    )
    provider = _provider(args) if (args.generator == "llm" or args.provider == "http") else HeuristicProvider()
    exemplars = ExemplarStore.load(args.exemplars) if args.exemplars else None
    files = _corpus_files(args.input)
    out_dir = Path(args.out_dir)
    summary = []
    for path in files:
        doc = _read(str(path))
        raw = load_sheet(doc)
        target = out_dir / path.stem if len(files) > 1 or Path(args.input).is_dir() else out_dir
        transcript = Transcript(target / "transcript.jsonl") if args.transcript else None
        res = run_pipeline(
            raw,
            cfg,
            provider,
            relations_hint=_relations_hint(doc),
            transcript=transcript,
            exemplars=exemplars,
            input_name=f"{path.name} sha256:{hashlib.sha256(doc).hexdigest()}",
        )
        _write(str(target / "layout.json"), dumps(res.layout))
        _write(str(target / "report.json"), _json(res.report.to_dict()))
        _write(str(target / "manifest.json"), _json(res.manifest.to_dict()))
        if args.keep_intermediates:
            _write(str(target / "placed.json"), dumps(res.placed))
            _write(str(target / "reflected.json"), dumps(res.reflected))
        summary.append((path.stem, res.report.weighted_total))
    for name, total in summary:
        print(f"{name}\t{total:.4f}", file=sys.stderr)
    return EXIT_OK


# --- bench -----------------------------------------------------------------


def _bench_one(job: tuple[str, bytes, str, int, int, bool]) -> tuple[str, str, dict[str, float] | str]:
    name, doc, generator, candidates, seed, reflect = job
    try:
        sheet = load_processed(doc)
        gen = heuristic_generator() if generator == "heuristic" else random_generator
        batch = generate_candidates(sheet, gen, PlacementConfig(n_candidates=candidates, seed=seed))
        if not batch.layouts:
            raise ValueError("; ".join(e for _, e in batch.errors))
        layout = batch.layouts[rank([evaluate(l, weights=STRUCTURE) for l in batch.layouts], STRUCTURE)]
        if reflect:
            layout = reflect_trace(layout, search_reviser(300, seed), include_vision=False).layout
        report = evaluate(populate(layout, 3))
        return generator, name, report.to_dict()  # type: ignore[return-value]
    except Exception as exc:  # noqa: BLE001 - per-sheet failures are recorded, the run continues
        return generator, name, f"{type(exc).__name__}: {exc}"


def bench_table(
    results: Sequence[tuple[str, str, dict[str, float] | str]], generators: Sequence[str], tail: float | None
) -> tuple[list[dict[str, Any]], list[dict[str, str]]]:
    labels = [label for label, _ in TABLE_COLUMNS]
    rows: list[dict[str, Any]] = []
    failures = [{"generator": g, "sheet": n, "error": r} for g, n, r in results if isinstance(r, str)]
    for g in generators:
        reps = [r for gg, _, r in results if gg == g and not isinstance(r, str)]
        if not reps:
            continue
        row: dict[str, Any] = {"generator": g, "n": len(reps)}
        for label in labels:
            vals = [r[label] for r in reps if r[label] is not None]
            row[label] = statistics.fmean(vals) if vals else None
        rows.append(row)
        if tail:
            k = max(1, math.ceil(tail * len(reps)))
            trow: dict[str, Any] = {"generator": f"{g}@low{tail:g}", "n": k}
            for label in labels:
                vals = sorted(r[label] for r in reps if r[label] is not None)
                trow[label] = statistics.fmean(vals[:k]) if vals else None
            rows.append(trow)
    return rows, failures


def cmd_bench(args: argparse.Namespace) -> int:
    generators = [g.strip() for g in args.generators.split(",") if g.strip()]
    bad = [g for g in generators if g not in ("heuristic", "random")]
    if bad:
        raise CliError(f"bench supports heuristic and random generators, not {bad}", EXIT_VALIDATION)
    docs = [(p.stem, _read(str(p))) for p in _corpus_files(args.corpus)]
    jobs = [(n, d, g, args.candidates, args.seed, args.reflect) for g in generators for n, d in docs]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    rows, failures = bench_table(results, generators, args.tail)
    for f in failures:
        print(f"failed: {f['generator']} {f['sheet']}: {f['error']}", file=sys.stderr)
    if args.format == "json":
        _write(args.output, _json({"rows": rows, "failures": failures}))
    else:
        buf = io.StringIO()
        fields = ["generator", "n"] + [label for label, _ in TABLE_COLUMNS]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in row.items()})
        _write(args.output, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_provider(p: argparse.ArgumentParser) -> None:
    p.add_argument("--provider", choices=["mock", "http"], default="mock")
    p.add_argument("--provider-config", help="JSON provider settings; the secret comes from the env var it names")
    p.add_argument("--text-only", action="store_true", help="treat the mock provider as text-only")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cellplan", description="Grid layout generation and scoring for spreadsheets.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a placed layout")
    p.add_argument("layout")
    p.add_argument("-o", "--output")
    p.add_argument("--structure", action="store_true", help="structure-stage weights (no compatibility)")
    p.add_argument("--compat-mode", choices=["mean_abs", "literal"], default="mean_abs")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="pick the best of several layouts")
    p.add_argument("layouts", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--structure", action="store_true")
    p.add_argument("--compat-mode", choices=["mean_abs", "literal"], default="mean_abs")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("place", help="place the components of a typed sheet")
    p.add_argument("sheet")
    p.add_argument("-o", "--output")
    p.add_argument("--generator", choices=["heuristic", "random", "llm"], default="heuristic")
    p.add_argument("--candidates", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    _add_provider(p)
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("reflect", help="threshold-triggered revision of a layout")
    p.add_argument("layout")
    p.add_argument("-o", "--output")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--max-rounds", type=int, default=1)
    p.add_argument("--no-vision", action="store_true")
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generator", choices=["heuristic", "llm"], default="heuristic")
    _add_provider(p)
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("populate", help="line breaks, column widths and row heights")
    p.add_argument("layout")
    p.add_argument("-o", "--output")
    p.add_argument("--autofit", action="store_true", help="widest-unwrapped-line baseline instead")
    p.add_argument("--candidates", type=int, default=3)
    p.set_defaults(func=cmd_populate)

    p = sub.add_parser("render", help="colored-grid sketch as SVG or PNG")
    p.add_argument("layout")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=["svg", "png"])
    p.add_argument("--cell-px", type=int, default=25)
    p.add_argument("--unit", type=int, default=40, help="SVG pixels per cell")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("snap", help="snap a pixel bounding-box layout onto the grid")
    p.add_argument("pixels")
    p.add_argument("-o", "--output")
    p.add_argument("--bg-x", type=int, default=1000)
    p.add_argument("--bg-y", type=int, default=500)
    p.add_argument("--cell-x", type=int, default=50)
    p.add_argument("--cell-y", type=int, default=25)
    p.set_defaults(func=cmd_snap)

    p = sub.add_parser("pipeline", help="full run on one sheet or a directory of sheets")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--generator", choices=["heuristic", "random", "llm"], default="heuristic")
    p.add_argument("--candidates", type=int, default=3)
    p.add_argument("--populate-candidates", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--max-rounds", type=int, default=1)
    p.add_argument("--no-reflect", action="store_true")
    p.add_argument("--no-vision", action="store_true")
    p.add_argument("--exemplars", help="JSON map of topic label -> exemplar image paths")
    p.add_argument("--transcript", action="store_true", help="log model exchanges as JSON lines")
    p.add_argument("--keep-intermediates", action="store_true")
    _add_provider(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("bench", help="mean scores per generator over a corpus")
    p.add_argument("corpus")
    p.add_argument("--generators", default="heuristic,random")
    p.add_argument("--candidates", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reflect", action="store_true")
    p.add_argument("--tail", type=float, help="also report the mean of the lowest fraction, e.g. 0.05")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-long-text", type=float, default=0.4)
    p.add_argument("--no-charts", action="store_true")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # map to the documented exit codes
        from .pipeline import StageError

        cause = exc.cause if isinstance(exc, StageError) else exc
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, ProviderError):
            return EXIT_PROVIDER
        if isinstance(cause, OSError):
            return EXIT_IO
        if isinstance(cause, (ValueError, KeyError)):
            return EXIT_VALIDATION
        raise


if __name__ == "__main__":
    sys.exit(main())
