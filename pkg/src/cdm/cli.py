"""Command-line interface: ``cdm experiment|synth|fit|predict|diagnose``.

Failures exit with status 1 and print one JSON line ``{"error": ..., "message": ...}``
on stderr.
"""

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from cdm.dataset import write_dense_csv
from cdm.errors import CdmError
from cdm.experiment import (
    DEFAULTS,
    cdm_config,
    load_config,
    load_data,
    normalize_config,
    payload_bytes,
    run_experiment,
    write_report,
    write_rounds_csv,
)
from cdm.pipeline import cdm_fit, cdm_predict, hypothesis_check, load_model, save_model
from cdm.synth import SynthParams, generate


def _value(text):
    """Config values on the command line are JSON literals, else plain strings."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _add_config_flags(parser, skip=()):
    group = parser.add_argument_group("config overrides (JSON literals; same keys as the config file)")
    for key in DEFAULTS:
        if key in skip:
            continue
        group.add_argument("--" + key.replace("_", "-"), dest=key, type=_value, default=argparse.SUPPRESS)


def _config_from(args, skip=()):
    raw = load_config(args.config) if getattr(args, "config", None) else {}
    for key in DEFAULTS:
        if key not in skip and hasattr(args, key):
            raw[key] = getattr(args, key)
    return raw


def cmd_experiment(args):
    raw = _config_from(args)
    report = run_experiment(raw)
    out = raw.get("output")
    if out:
        write_report(report, out)
    if raw.get("csv_output"):
        write_rounds_csv(report, raw["csv_output"])
    p = report["payload"]
    summary = {
        "cdm_mean": p["cdm"]["mean"], "cdm_std": p["cdm"]["std"],
        "baseline_mean": p["baseline"]["mean"], "baseline_std": p["baseline"]["std"],
        "rounds": len(p["rounds"]), "output": out,
    }
    print(json.dumps(summary))
    if not out:
        sys.stdout.write(payload_bytes(report).decode() + "\n")


def cmd_synth(args):
    params = SynthParams(**{f.name: getattr(args, f.name) for f in fields(SynthParams)})
    ltm, sm = generate(params)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_dense_csv(ltm, out / "ltm.csv")
    write_dense_csv(sm, out / "sm.csv")
    print(json.dumps({"ltm": str(out / "ltm.csv"), "sm": str(out / "sm.csv"),
                      "ltm_shape": list(ltm.features.shape), "sm_shape": list(sm.features.shape)}))


def _datasets(args, cfg, *names):
    dims = {"ltm": cfg["ltm_dim"], "sm_train": cfg["sm_dim"], "query": cfg["sm_dim"], "holdout": cfg["sm_dim"]}
    fmts = {"ltm": cfg["ltm_format"]}
    return [load_data(getattr(args, n), fmts.get(n, cfg["sm_format"]), cfg["label_column"], dims[n], n) for n in names]


def cmd_fit(args):
    cfg = normalize_config(_config_from(args))
    ltm, sm = _datasets(args, cfg, "ltm", "sm_train")
    model = cdm_fit(ltm, sm, cdm_config(cfg))
    save_model(model, args.model)
    print(json.dumps({"model": args.model, "classes": list(model.classes), "latent_dim": model.latent_dim,
                      "P": model.P.kind, "H": model.H.kind}))


def cmd_predict(args):
    cfg = normalize_config(_config_from(args))
    model = load_model(args.model)
    ltm, sm, query = _datasets(args, cfg, "ltm", "sm_train", "query")
    codes = cdm_predict(model, ltm, sm, query)
    labels = [model.classes[c] for c in codes]
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "predicted"])
            w.writerows(enumerate(labels))
    else:
        print(json.dumps({"predicted": labels}))


def cmd_diagnose(args):
    cfg = normalize_config(_config_from(args))
    model = load_model(args.model)
    ltm, sm, holdout = _datasets(args, cfg, "ltm", "sm_train", "holdout")
    diag = hypothesis_check(model, ltm, sm, holdout)
    doc = diag.to_dict()
    doc["classes"] = list(model.classes)
    doc["ltm_radii"] = [s.radius for s in model.medians]
    doc["hypothesis_holds"] = diag.err_combined <= diag.err_sm_only
    print(json.dumps(doc))


def build_parser():
    parser = argparse.ArgumentParser(prog="cdm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("experiment", help="repeated few-shot CDM vs baseline rounds")
    p.add_argument("--config", help="flat JSON config file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="write a synthetic LTM/SM pair as CSV")
    p.add_argument("--out-dir", required=True)
    defaults = SynthParams()
    for f in fields(SynthParams):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=type(getattr(defaults, f.name)),
                       default=getattr(defaults, f.name))
    p.set_defaults(func=cmd_synth)

    # fit/predict/diagnose work on the files as given (no PCA, no sampling)
    data_skip = ("ltm_path", "sm_path", "output", "csv_output", "rounds", "k_per_class", "ltm_per_class",
                 "workers", "pca_energy", "baseline_features", "diagnostics")

    p = sub.add_parser("fit", help="fit a model and save it as JSON")
    p.add_argument("--ltm", required=True)
    p.add_argument("--sm-train", required=True)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--config")
    _add_config_flags(p, data_skip)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="label SM query rows with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--ltm", required=True)
    p.add_argument("--sm-train", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--output", help="CSV of predictions (default: JSON on stdout)")
    p.add_argument("--config")
    # the saved model carries its own CDM and classifier settings
    io_keys = ("ltm_format", "sm_format", "label_column", "ltm_dim", "sm_dim")
    _add_config_flags(p, [k for k in DEFAULTS if k not in io_keys])
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("diagnose", help="psi sums, cluster radii/margins and the hypothesis check")
    p.add_argument("--model", required=True)
    p.add_argument("--ltm", required=True)
    p.add_argument("--sm-train", required=True)
    p.add_argument("--holdout", required=True)
    p.add_argument("--config")
    _add_config_flags(p, data_skip)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CdmError, OSError, ValueError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
