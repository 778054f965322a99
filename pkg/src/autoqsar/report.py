"""Report bundle for a finished run: predictions, scatter plot, histograms, summary.

Files written to the output directory:

* ``predictions.csv``: id, set (train/test), experimental, predicted for the top model
* ``scatter.svg``: predicted vs experimental, one ``<circle class="point train|test">`` per molecule
* ``histogram.csv``: activity bin counts for the train, test and full sets
* ``summary.json`` / ``summary.txt``: top-10 scorecards with wall times
"""

import csv
import json
import re
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import NoSuccessfulModelsError
from .learners import predict
from .pipeline import features_for

SVG_SIZE = 480
SVG_MARGIN = 50
N_BINS = 10
TOP_N = 10


def top_predictions(rm, ds):
    """Rows ``(id, set, experimental, predicted)`` for the top-ranked model."""
    if not rm.cards:
        raise NoSuccessfulModelsError("no successful models to report")
    card = rm.best
    model = rm.models.get(card.model_id)
    if model is None:
        raise NoSuccessfulModelsError(f"top model {card.model_id} is not retained in this run")
    pred = predict(model, features_for(model.spec, ds.molecules))
    train = set(card.split.train_ids)
    rows = []
    for rec, p in zip(ds.records, pred):
        rows.append((rec.id, "train" if rec.id in train else "test", float(rec.activity), float(p)))
    return card, rows


def _scale(lo, hi):
    span = hi - lo
    inner = SVG_SIZE - 2 * SVG_MARGIN

    def to_px(v):
        return SVG_MARGIN + (v - lo) / span * inner

    return to_px


def scatter_svg(rows, title=""):
    """Static SVG: x = experimental, y = predicted, identity line, train/test classes."""
    vals = [r[2] for r in rows] + [r[3] for r in rows]
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    px = _scale(lo, hi)
    top = SVG_SIZE - SVG_MARGIN

    def py(v):
        # SVG y grows downwards
        return SVG_SIZE - px(v)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}" data-lo="{lo!r}" data-hi="{hi!r}">',
        "<style>.train{fill:#1f77b4}.test{fill:#d62728}.identity{stroke:#555;stroke-dasharray:4 3}"
        "text{font:12px sans-serif}</style>",
        f'<rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{top - SVG_MARGIN}" height="{top - SVG_MARGIN}" '
        'fill="none" stroke="#000"/>',
        f'<line class="identity" x1="{px(lo)!r}" y1="{py(lo)!r}" x2="{px(hi)!r}" y2="{py(hi)!r}"/>',
    ]
    for rid, which, exp, pred in rows:
        out.append(
            f'<circle class="point {which}" cx="{px(exp)!r}" cy="{py(pred)!r}" r="3">'
            f"<title>{escape(rid)}</title></circle>"
        )
    out.append(f'<text x="{SVG_SIZE / 2}" y="{SVG_SIZE - 12}" text-anchor="middle">experimental</text>')
    out.append(f'<text x="14" y="{SVG_SIZE / 2}" transform="rotate(-90 14 {SVG_SIZE / 2})" '
               'text-anchor="middle">predicted</text>')
    if title:
        out.append(f'<text x="{SVG_SIZE / 2}" y="24" text-anchor="middle">{escape(title)}</text>')
    out.append('<g class="legend"><circle class="train" cx="70" cy="70" r="4"/><text x="80" y="74">train</text>'
               '<circle class="test" cx="70" cy="88" r="4"/><text x="80" y="92">test</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_points(svg_text):
    """Recover ``(class, x_value, y_value)`` per plotted molecule from our own SVG."""
    lo = float(re.search(r'data-lo="([^"]+)"', svg_text).group(1))
    hi = float(re.search(r'data-hi="([^"]+)"', svg_text).group(1))
    inner = SVG_SIZE - 2 * SVG_MARGIN
    pts = []
    for m in re.finditer(r'<circle class="point (\w+)" cx="([^"]+)" cy="([^"]+)"', svg_text):
        cx, cy = float(m.group(2)), float(m.group(3))
        x = lo + (cx - SVG_MARGIN) / inner * (hi - lo)
        y = lo + (SVG_SIZE - cy - SVG_MARGIN) / inner * (hi - lo)
        pts.append((m.group(1), x, y))
    return pts


def histogram_rows(rows, n_bins=N_BINS):
    values = np.array([r[2] for r in rows])
    edges = np.histogram_bin_edges(values, bins=n_bins)
    sets = {
        "train": values[[r[1] == "train" for r in rows]],
        "test": values[[r[1] == "test" for r in rows]],
        "full": values,
    }
    counts = {k: np.histogram(v, bins=edges)[0] for k, v in sets.items()}
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts["train"][i]), int(counts["test"][i]), int(counts["full"][i]))
        for i in range(n_bins)
    ]


def summary(rm, top=TOP_N):
    return {
        "run_wall_time": rm.wall_time,
        "n_models": len(rm.cards) + len(rm.failed),
        "n_failed": len(rm.failed),
        "score_formula": rm.manifest.get("score_formula"),
        "dataset_digest": rm.manifest.get("dataset_digest"),
        "top": [dict(c.to_json(with_time=True), rank=i) for i, c in enumerate(rm.cards[:top], start=1)],
    }


def _summary_text(summ):
    lines = [
        f"models: {summ['n_models']} ({summ['n_failed']} failed), run wall time {summ['run_wall_time']:.2f} s",
        f"score = {summ['score_formula']}",
        "",
        f"{'rank':>4}  {'model':<28} {'r2':>7} {'q2':>7} {'score':>7} {'N':>3} {'frac':>5} {'time_s':>8}",
    ]
    for c in summ["top"]:
        n = "-" if c["n_components"] is None else str(c["n_components"])
        lines.append(
            f"{c['rank']:>4}  {c['label']:<28} {c['r2_train']:7.4f} {c['q2_test']:7.4f} {c['score']:7.4f} "
            f"{n:>3} {c['train_fraction']:5.2f} {c['wall_time']:8.4f}"
        )
    return "\n".join(lines) + "\n"


def report(rm, ds, path):
    """Write the report bundle to directory ``path``; returns the file paths."""
    if not rm.cards:
        raise NoSuccessfulModelsError("no successful models to report")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    card, rows = top_predictions(rm, ds)
    files = {}

    files["predictions"] = out / "predictions.csv"
    with open(files["predictions"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "set", "experimental", "predicted"])
        for rid, which, exp, pred in rows:
            w.writerow([rid, which, repr(exp), repr(pred)])

    files["scatter"] = out / "scatter.svg"
    title = f"{card.label}  r2={card.r2_train:.3f}  q2={card.q2_test:.3f}"
    files["scatter"].write_text(scatter_svg(rows, title), encoding="utf-8")

    files["histogram"] = out / "histogram.csv"
    with open(files["histogram"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "train", "test", "full"])
        w.writerows(histogram_rows(rows))

    summ = summary(rm)
    files["summary"] = out / "summary.json"
    files["summary"].write_text(json.dumps(summ, indent=1), encoding="utf-8")
    files["summary_text"] = out / "summary.txt"
    files["summary_text"].write_text(_summary_text(summ), encoding="utf-8")
    return files
