"""Command line front end: ``autoqsar build | predict | report | inspect``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(bad input file, unparseable SMILES, corrupt archive), 3 no successful models.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .dataset import ACTIVITY_TRANSFORMS, load_csv
from .descriptors import catalog_csv
from .errors import ArchiveError, ConfigError, DataError, NoSuccessfulModelsError, QSARError, SmilesError
from .fingerprints import SCHEMES
from .learners import ModelSpec, predict, predict_proba
from .molgraph import parse_smiles
from .persistence import load_model, load_run, save_models, write_scorecards_csv
from .pipeline import DEFAULT_METHODS, PipelineConfig, default_roster, features_for, run_pipeline
from .report import report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_MODELS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def build_parser():
    p = _Parser(prog="autoqsar", description="Automated QSAR model building over a split grid.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="run the split x method sweep and save the best models")
    b.add_argument("--input", required=True, help="CSV with id, smiles, activity columns")
    b.add_argument("--out", required=True, help="run directory to create")
    b.add_argument("--frac-min", type=float, default=0.70)
    b.add_argument("--frac-max", type=float, default=0.80)
    b.add_argument("--step", type=float, default=0.01)
    b.add_argument("--per-interval", type=int, default=99, help="splits per training fraction")
    b.add_argument("--max-pair-corr", type=float, default=0.99)
    b.add_argument("--methods", type=_csv_list, default=DEFAULT_METHODS,
                   help="comma list of kpls,pls,pcr,mlr,rp,bayes or explicit specs like kpls-radial2")
    b.add_argument("--fingerprints", type=_csv_list, default=SCHEMES,
                   help="schemes expanded for kpls/bayes")
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--activity-transform", choices=ACTIVITY_TRANSFORMS, default="none")
    b.add_argument("--threshold", type=float, default=None, help="activity threshold for bayes")
    b.add_argument("--top-k", type=int, default=5, help="number of model archives to save")

    pr = sub.add_parser("predict", help="predict activities with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True, help="CSV with id and smiles columns")
    pr.add_argument("--out", required=True)

    r = sub.add_parser("report", help="write the report bundle for a run directory")
    r.add_argument("--run", required=True)
    r.add_argument("--out", required=True)

    i = sub.add_parser("inspect", help="show the descriptor catalog or a run summary")
    g = i.add_mutually_exclusive_group(required=True)
    g.add_argument("--catalog", action="store_true")
    g.add_argument("--run")
    i.add_argument("--out", help="write output to a file instead of stdout")
    return p


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_build(args):
    if args.top_k < 1:
        raise ConfigError("--top-k must be >= 1")
    roster = default_roster(args.methods, args.fingerprints, args.threshold)
    config = PipelineConfig(
        frac_min=args.frac_min, frac_max=args.frac_max, step=args.step,
        models_per_interval=args.per_interval, max_pair_correlation=args.max_pair_corr,
        methods=roster, master_seed=args.seed, thread_count=args.threads,
        classification_threshold=args.threshold, retain_models=args.top_k,
    )
    ds = load_csv(args.input, args.activity_transform)
    rm = run_pipeline(config, ds)
    # the manifest and scorecards are useful even when everything failed
    if not rm.cards:
        save_models_failed_only(rm, args.out)
        raise NoSuccessfulModelsError(f"all {len(rm.failed)} model fits failed; see {args.out}/scorecards.csv")
    save_models(rm, args.out, args.top_k)
    best = rm.best
    print(f"{len(rm.cards)} models ranked ({len(rm.failed)} failed) in {rm.wall_time:.1f} s")
    print(f"best: {best.label} r2={best.r2_train:.4f} q2={best.q2_test:.4f} score={best.score:.4f} "
          f"id={best.model_id}")
    return EXIT_OK


def save_models_failed_only(rm, out):
    Path(out).mkdir(parents=True, exist_ok=True)
    (Path(out) / "manifest.json").write_bytes(rm.manifest_bytes())
    write_scorecards_csv(rm, Path(out) / "scorecards.csv")


def _read_predict_input(path):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        cols = {h.strip().lower(): k for k, h in enumerate(header)}
        if "smiles" not in cols:
            raise DataError(f"{path}: missing column smiles")
        ids, mols = [], []
        for row in reader:
            if not any(c.strip() for c in row):
                continue
            line = reader.line_num
            try:
                smi = row[cols["smiles"]].strip()
                rid = row[cols["id"]].strip() if "id" in cols else str(len(ids) + 1)
            except IndexError:
                raise DataError(f"{path}: row {line}: too few fields") from None
            try:
                mols.append(parse_smiles(smi))
            except SmilesError as exc:
                raise DataError(f"{path}: row {line}: {exc}") from exc
            ids.append(rid)
    if not ids:
        raise DataError(f"{path}: no molecules")
    return ids, mols


def cmd_predict(args):
    model = load_model(args.model)
    ids, mols = _read_predict_input(args.input)
    X = features_for(model.spec, mols)
    pred = predict(model, X)
    header = ["id", "predicted"]
    extra = None
    if model.spec.is_classifier:
        extra = predict_proba(model, X)[:, 1]
        header.append("p_active")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, rid in enumerate(ids):
            row = [rid, repr(float(pred[k]))]
            if extra is not None:
                row.append(repr(float(extra[k])))
            w.writerow(row)
    print(f"{len(ids)} predictions written to {args.out} with {model.spec.label}")
    return EXIT_OK


def cmd_report(args):
    rm = load_run(args.run)
    if not rm.cards:
        raise NoSuccessfulModelsError(f"{args.run}: no successful models")
    if rm.dataset is None:
        raise DataError(f"{args.run}: dataset.csv missing")
    files = report(rm, rm.dataset, args.out)
    for f in files.values():
        print(f)
    return EXIT_OK


def cmd_inspect(args):
    if args.catalog:
        _emit(catalog_csv(), args.out)
        return EXIT_OK
    run = Path(args.run)
    try:
        manifest = json.loads((run / "manifest.json").read_text())
    except FileNotFoundError:
        raise DataError(f"{run}: no manifest.json") from None
    cfg = manifest["config"]
    lines = [
        f"dataset digest   {manifest['dataset_digest']} ({manifest['dataset_size']} records)",
        f"intervals/splits {manifest['n_intervals']} / {manifest['n_splits']}",
        f"models           {manifest['n_models']} ({manifest['n_failed']} failed)",
        f"roster           {', '.join(ModelSpec.from_json(m).label for m in cfg['methods'])}",
        f"max pair corr    {cfg['max_pair_correlation']}",
        f"master seed      {cfg['master_seed']}",
        f"score            {manifest['score_formula']}",
    ]
    for k, c in enumerate(manifest["ranked"][:10], start=1):
        lines.append(f"{k:>3}. {c['label']:<28} q2={c['q2_test']:.4f} r2={c['r2_train']:.4f} "
                     f"score={c['score']:.4f} id={c['model_id']}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"build": cmd_build, "predict": cmd_predict, "report": cmd_report, "inspect": cmd_inspect}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NoSuccessfulModelsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_MODELS
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ArchiveError, SmilesError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QSARError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
