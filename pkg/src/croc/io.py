"""File formats: panels, truth records, logit tables, constraint files, reports.

Files number streams from 1 (``stream`` columns, ``k_star``, partition
specs); the in-memory API numbers them from 0.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import (
    ConstraintSet,
    StreamPanel,
    build_constraint_common,
    build_constraint_explicit,
    build_constraint_full_grid,
    build_constraint_one_early,
)
from .densities import GaussianModel
from .engine import GroupPartition
from .errors import ValidationError

REPORT_CSV_COLUMNS = ("stream", "p_value", "in_set", "flag_excluded_by_R")


# -- panels ---------------------------------------------------------------------

def read_panel_csv(path, header: bool = False) -> StreamPanel:
    """``n`` rows by ``K`` columns of numbers; the first row is skipped if ``header``."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if header:
        rows = rows[1:]
    try:
        values = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric cell ({exc})") from None
    if len({len(r) for r in values}) > 1:
        raise ValidationError(f"{path}: rows have differing column counts")
    return StreamPanel(np.array(values, dtype=float))


def write_panel_csv(panel: StreamPanel, path, header: bool = False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"stream{k + 1}" for k in range(panel.K)])
        for row in panel.values:
            w.writerow([repr(float(v)) for v in row])


def read_panel_json(path) -> StreamPanel:
    with open(path) as fh:
        obj = json.load(fh)
    try:
        panel = StreamPanel(np.array(obj["values"], dtype=float))
    except KeyError:
        raise ValidationError(f"{path}: missing 'values'") from None
    for key, actual in (("n", panel.n), ("K", panel.K)):
        if key in obj and int(obj[key]) != actual:
            raise ValidationError(f"{path}: declared {key}={obj[key]} but values give {actual}")
    return panel


def write_panel_json(panel: StreamPanel, path):
    obj = {"n": panel.n, "K": panel.K, "values": panel.values.tolist()}
    Path(path).write_text(json.dumps(obj) + "\n")


def read_panel(path, header: bool = False) -> StreamPanel:
    if str(path).lower().endswith(".json"):
        return read_panel_json(path)
    return read_panel_csv(path, header=header)


# -- truth records --------------------------------------------------------------

def truth_record(spec, xi, model: GaussianModel) -> dict:
    rec = {
        "xi": [int(v) for v in xi],
        "k_star": int(spec.root) + 1,
        "n": spec.n,
        "K": spec.K,
        "early": spec.early,
        "late": spec.late,
        "delta0": spec.delta_root,
        "delta1": spec.delta_other,
        "mean_grid": [spec.mean_lo, spec.mean_hi],
        "seed": spec.seed,
        "model": {
            "family": "gaussian",
            "mean0": model.mean0.tolist(),
            "sd0": model.sd0.tolist(),
            "mean1": model.mean1.tolist(),
            "sd1": model.sd1.tolist(),
        },
    }
    if hasattr(spec, "rho"):
        rec["rho"] = spec.rho
        rec["pairs"] = [[a + 1, b + 1] for a, b in spec.pairs]
        rec["partition"] = [[k + 1 for k in g] for g in spec.groups]
    return rec


def read_truth(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def model_from_truth(truth: dict) -> GaussianModel:
    try:
        m = truth["model"]
    except KeyError:
        raise ValidationError("truth file has no 'model' entry; oracle scores need one") from None
    if m.get("family") != "gaussian":
        raise ValidationError(f"unsupported model family {m.get('family')!r}")
    return GaussianModel(m["mean0"], m["sd0"], m["mean1"], m["sd1"], "oracle")


# -- logits ---------------------------------------------------------------------

def read_logits_csv(path) -> StreamPanel:
    """Long-format logits (``stream,index,logit``, both 1-based) as an ``n x K`` panel."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"stream", "index", "logit"} - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{path}: missing columns {sorted(missing)}")
        entries = [(int(r["stream"]), int(r["index"]), float(r["logit"])) for r in reader]
    if not entries:
        raise ValidationError(f"{path}: no rows")
    K = max(e[0] for e in entries)
    n = max(e[1] for e in entries)
    values = np.full((n, K), np.nan)
    for k, i, v in entries:
        if k < 1 or i < 1:
            raise ValidationError(f"{path}: stream and index are 1-based, got ({k}, {i})")
        values[i - 1, k - 1] = v
    if np.isnan(values).any():
        raise ValidationError(f"{path}: logit table does not cover every (stream, index)")
    return StreamPanel(values)


def write_logits_csv(panel: StreamPanel, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stream", "index", "logit"])
        for k in range(panel.K):
            for i in range(panel.n):
                w.writerow([k + 1, i + 1, repr(float(panel.values[i, k]))])


# -- constraint sets and partitions ---------------------------------------------

def read_constraint_file(path, n, K) -> ConstraintSet:
    """JSON list of configs, or CSV with one config per row."""
    text = Path(path).read_text()
    if str(path).lower().endswith(".json"):
        configs = json.loads(text)
        if isinstance(configs, dict):
            configs = configs["configs"]
    else:
        configs = [[int(c) for c in row] for row in csv.reader(text.splitlines()) if row]
    return build_constraint_explicit(n, K, configs)


def parse_constraint(spec: str, n: int, K: int) -> ConstraintSet:
    """``grid``, ``common``, ``one-early:EARLY,LATE`` or ``file:PATH``."""
    if spec == "grid":
        return build_constraint_full_grid(n, K)
    if spec == "common":
        return build_constraint_common(n, K)
    if spec.startswith("one-early:"):
        try:
            early, late = (int(v) for v in spec.split(":", 1)[1].split(","))
        except ValueError:
            raise ValidationError(f"bad constraint spec {spec!r}; expected one-early:EARLY,LATE") from None
        return build_constraint_one_early(n, K, early, late)
    if spec.startswith("file:"):
        return read_constraint_file(spec[5:], n, K)
    raise ValidationError(f"unknown constraint spec {spec!r}")


def parse_partition(spec: str, K: int) -> GroupPartition:
    """Groups separated by ``;``, 1-based streams separated by ``,`` (e.g. ``1,3,5;2,4,6``)."""
    try:
        groups = [tuple(int(v) - 1 for v in g.split(",") if v.strip()) for g in spec.split(";") if g.strip()]
    except ValueError:
        raise ValidationError(f"bad partition spec {spec!r}") from None
    return GroupPartition(tuple(groups)).validate(K)


# -- reports --------------------------------------------------------------------

def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def write_report_csv(result, path):
    rows = result.to_dict()["streams"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_CSV_COLUMNS)
        for r in rows:
            w.writerow([r["stream"], repr(float(r["p_value"])), int(r["in_set"]),
                        int(r["flag_excluded_by_R"])])
