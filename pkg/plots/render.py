#!/usr/bin/env python3
"""Render publication-style views of the pipeline's CSV/JSON artifacts.

Every plot is a pure view of the artifact files: no statistics are
recomputed (the one exception, required for the estimator histograms,
is the moment-matched normal overlay).  Each rendered image gets a
sidecar JSON holding the plotted numbers verbatim, so regression tests
can assert numbers instead of pixels.

Usage: render.py --spec FILE.json

The spec file is a JSON object:
    {
      "kind": "<plot kind>",
      "inputs": {"<role>": "<artifact path>"},
      "output": "<image path>",
      "x_scale": "linear" | "log",      optional
      "y_scale": "linear" | "log",      optional
      "hist_bins": <int>                optional, histogram kinds only
    }
Relative input/output paths resolve against the spec file's directory.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FORMAT_VERSION = 1
DPI = 150

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (4.8, 3.2),
    "savefig.dpi": DPI,
}


class RenderError(Exception):
    """Bad spec, missing input, schema mismatch or empty data."""


# ---------------------------------------------------------------------------
# artifact readers (schema-checked, values kept verbatim)


def _read_csv_artifact(path: Path, kind: str, required: tuple):
    meta, columns, rows = {}, None, []
    try:
        fh = open(path)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    with fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    if columns is None:
        raise RenderError(f"{path} contains no header row")
    if meta.get("kind") != kind:
        raise RenderError(f"{path}: expected a {kind!r} artifact, got "
                          f"{meta.get('kind')!r}")
    if meta.get("version") != str(FORMAT_VERSION):
        raise RenderError(f"{path}: version {meta.get('version')!r} does not "
                          f"match {FORMAT_VERSION}")
    missing = [c for c in required if c not in columns]
    if missing:
        raise RenderError(f"{path}: missing columns {missing}; a {kind!r} "
                          f"artifact must provide {list(required)}")
    if not rows:
        raise RenderError(f"{path} contains no data rows")
    out = {}
    for name in required:
        i = columns.index(name)
        cells = [r[i] for r in rows]
        try:
            out[name] = [float(c) for c in cells]
        except ValueError:
            out[name] = cells  # non-numeric column (estimator tags, flags)
    return out


def _read_json_artifact(path: Path, kind: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RenderError(f"{path} is not valid JSON: {exc}") from exc
    if doc.get("kind") != kind:
        raise RenderError(f"{path}: expected a {kind!r} artifact, got "
                          f"{doc.get('kind')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise RenderError(f"{path}: version {doc.get('version')!r} does not "
                          f"match {FORMAT_VERSION}")
    return doc


def _lambda_of_p(p: float) -> float:
    """log10((1-p)/p), clipped to the axis range for p in {0, 1}."""
    if p <= 0.0:
        return math.inf
    if p >= 1.0:
        return -math.inf
    return math.log10((1.0 - p) / p)


# ---------------------------------------------------------------------------
# plot kinds


def _plot_score_histogram(spec, inputs, ax):
    """Per-bin shot counts of a calibration run: the score histogram."""
    doc = _read_json_artifact(inputs["curve"], "curve")
    bins = doc.get("bins", [])
    if not bins:
        raise RenderError(f"{inputs['curve']}: curve has no bins")
    centers = [b["phi_center"] for b in bins]
    counts = [b["n_total"] for b in bins]
    width = (max(centers) - min(centers)) / max(len(centers) - 1, 1) or 1.0
    ax.bar(centers, counts, width=0.9 * width, color="#4878cf")
    ax.set_xlabel("confidence score $\\varphi$")
    ax.set_ylabel("shots per bin")
    return {"curve": {"phi_center": centers, "n_total": counts}}


def _plot_calibration_curve(spec, inputs, ax):
    """Binned empirical log odds with Wilson error bars and the fit."""
    doc = _read_json_artifact(inputs["curve"], "curve")
    bins = [b for b in doc.get("bins", []) if b["lambda_hat"] is not None]
    if not bins:
        raise RenderError(f"{inputs['curve']}: curve has no usable bins")
    x = [b["phi_center"] for b in bins]
    y = [b["lambda_hat"] for b in bins]
    # Wilson bounds are on the failure probability; in log odds the
    # upper probability bound is the lower odds bound and vice versa
    y_lo = [_lambda_of_p(b["wilson_hi"]) for b in bins]
    y_hi = [_lambda_of_p(b["wilson_lo"]) for b in bins]
    # clip the open-ended bounds (n_fail = 0 or n) to the plotted range
    err = [
        [yi - max(lo, min(y) - 2) for yi, lo in zip(y, y_lo)],
        [min(hi, max(y) + 2) - yi for yi, hi in zip(y, y_hi)],
    ]
    ax.errorbar(x, y, yerr=err, fmt="o", ms=3, capsize=2, color="#4878cf",
                label="binned log odds")
    a, b = doc["a"], doc["b"]
    xs = np.linspace(min(x), max(x), 50)
    ax.plot(xs, a * xs + b, color="#d65f5f",
            label=f"fit $\\lambda = {a:.3g}\\varphi {b:+.3g}$")
    ax.set_xlabel("confidence score $\\varphi$")
    ax.set_ylabel("log success odds $\\lambda$")
    ax.legend()
    return {
        "curve": {
            "a": a,
            "b": b,
            "bins": [
                {k: bin_[k] for k in
                 ("phi_center", "n_total", "n_fail", "lambda_hat",
                  "wilson_lo", "wilson_hi")}
                for bin_ in bins
            ],
        }
    }


def _plot_retained_ler(spec, inputs, ax):
    """Calculated mean LEP vs observed LER as risky windows are discarded."""
    cols = _read_csv_artifact(
        inputs["sweep"], "sweep",
        ("fraction", "mean_lep", "ler", "wilson_lo", "wilson_hi", "n_kept"),
    )
    frac = cols["fraction"]
    err = [
        [l - lo for l, lo in zip(cols["ler"], cols["wilson_lo"])],
        [hi - l for l, hi in zip(cols["ler"], cols["wilson_hi"])],
    ]
    ax.plot(frac, cols["mean_lep"], "s-", ms=4, color="#d65f5f",
            label="calculated mean LEP")
    ax.errorbar(frac, cols["ler"], yerr=err, fmt="o", ms=4, capsize=2,
                color="#4878cf", label="observed LER (Wilson bounds)")
    ax.set_xlabel("discard fraction")
    ax.set_ylabel("logical error probability")
    ax.legend()
    return {"sweep": cols}


def _plot_estimator_distribution(spec, inputs, ax):
    """Histogram of repeated estimates per estimator, with a normal
    overlay of matching mean and variance."""
    cols = _read_csv_artifact(
        inputs["mle"], "mle", ("rep", "estimator", "estimate"))
    tags = sorted(set(cols["estimator"]))
    n_bins = int(spec.get("hist_bins", 30))
    palette = ("#4878cf", "#d65f5f", "#6acc65", "#b47cc7")
    for tag, color in zip(tags, palette):
        values = np.array(
            [e for e, t in zip(cols["estimate"], cols["estimator"]) if t == tag]
        )
        ax.hist(values, bins=n_bins, density=True, alpha=0.45, color=color,
                label=tag)
        mean, std = float(values.mean()), float(values.std())
        if std > 0:
            xs = np.linspace(values.min(), values.max(), 200)
            ax.plot(xs, np.exp(-0.5 * ((xs - mean) / std) ** 2)
                    / (std * math.sqrt(2 * math.pi)), color=color, lw=1.2)
    ax.set_xlabel("estimate")
    ax.set_ylabel("density")
    ax.legend()
    return {"mle": cols}


def _plot_abort_channel_comparison(spec, inputs, ax):
    """Per-trial LEP reduction factors: aborting on the observable score
    versus on the latent log odds, at matched abort rates."""
    cols = _read_csv_artifact(
        inputs["analytic"], "analytic",
        ("rho", "discard_fraction", "overhead", "phi_threshold",
         "lambda_threshold", "trial", "phi_reduction", "lambda_reduction"),
    )
    x = cols["discard_fraction"]
    ax.scatter(x, cols["phi_reduction"], s=14, color="#4878cf",
               label="abort on score $\\varphi$")
    ax.scatter(x, cols["lambda_reduction"], s=14, marker="^", color="#d65f5f",
               label="abort on latent $\\lambda$")
    ax.set_xlabel("circuit discard fraction")
    ax.set_ylabel("LEP reduction factor")
    ax.legend()
    return {"analytic": cols}


PLOT_KINDS = {
    "score-histogram": (_plot_score_histogram, ("curve",)),
    "calibration-curve": (_plot_calibration_curve, ("curve",)),
    "retained-ler": (_plot_retained_ler, ("sweep",)),
    "estimator-distribution": (_plot_estimator_distribution, ("mle",)),
    "abort-channel-comparison": (_plot_abort_channel_comparison, ("analytic",)),
}

_SCALES = ("linear", "log")


def render(spec: dict, base_dir: Path | None = None) -> tuple[Path, Path]:
    """Render one plot spec; returns (image path, sidecar path).

    Nothing is written unless rendering succeeds end to end.
    """
    base = Path(base_dir) if base_dir is not None else Path(".")
    kind = spec.get("kind")
    if kind not in PLOT_KINDS:
        raise RenderError(
            f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}"
        )
    fn, roles = PLOT_KINDS[kind]
    given = spec.get("inputs", {})
    missing = [r for r in roles if r not in given]
    if missing:
        raise RenderError(f"plot kind {kind!r} needs inputs {list(roles)}; "
                          f"missing {missing}")
    if "output" not in spec:
        raise RenderError("spec is missing the output image path")
    inputs = {role: base / given[role] for role in roles}
    out_path = base / spec["output"]

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            series = fn(spec, inputs, ax)
            for axis in ("x_scale", "y_scale"):
                scale = spec.get(axis, "linear")
                if scale not in _SCALES:
                    raise RenderError(f"{axis} must be one of {_SCALES}")
                (ax.set_xscale if axis == "x_scale" else ax.set_yscale)(scale)
            fig.tight_layout()
            out_path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out_path, metadata={"Software": "render"})
        finally:
            plt.close(fig)

    sidecar_path = out_path.with_name(out_path.name + ".json")
    sidecar = {
        "kind": kind,
        "version": FORMAT_VERSION,
        "inputs": {role: str(given[role]) for role in roles},
        "series": series,
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return out_path, sidecar_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render plots from pipeline artifacts."
    )
    parser.add_argument("--spec", required=True, help="plot spec JSON file")
    args = parser.parse_args(argv)
    spec_path = Path(args.spec)
    try:
        with open(spec_path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot load spec {spec_path}: {exc}", file=sys.stderr)
        return 2
    try:
        image, sidecar = render(spec, base_dir=spec_path.parent)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{image}\n{sidecar}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
