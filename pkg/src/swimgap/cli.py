"""Command line entry point: reproducible experiment pipelines.

Every stage reads and writes documented CSV/JSON artifacts inside an
output directory.  All randomness derives from a mandatory seed, and
every artifact carries a header with the configuration hash, so reruns
with an identical configuration are byte-identical.  Stages can be run
as individual subcommands or declared as a pipeline in a JSON config
passed via --config.

Exit codes: 0 ok, 2 configuration error, 3 capability limit exceeded,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationCurve, bin_dcs, fit_calibration, lep_from_dcs
from .decoder import decode, is_success
from .errors import CapabilityError, ConfigError, SwimgapError
from .graphs import (
    DecodingGraph,
    build_code_capacity_graph,
    build_phenomenological_graph,
    logical_parity,
)
from .mle import estimate_mle, estimate_unmitigated, synthesize_runs
from .multiwindow import (
    WindowPool,
    retained_ler_curve,
    simulate_circuits,
    spacetime_plan,
    time_overhead,
)
from .noise import rng_stream, sample_error_batch, syndrome_of
from .pipeline import score_shots
from .scalemodel import (
    compare_abort_channels,
    deform_to_target_mean,
    model_from_histogram,
)

FORMAT_VERSION = 1

STAGE_NAMES = (
    "build-graph",
    "sample",
    "decode",
    "score",
    "calibrate",
    "sweep-abort",
    "mle",
    "analytic-model",
    "plan",
    "report",
)


def load_schemas() -> dict:
    with resources.files("swimgap").joinpath("schemas.json").open() as fh:
        return json.load(fh)


# -- configuration -------------------------------------------------------


@dataclass
class ExperimentConfig:
    seed: int
    out_dir: str
    pipeline: list = field(default_factory=list)
    threads: int = 1
    version: int = FORMAT_VERSION

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {"seed", "out_dir", "pipeline", "threads", "version"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in doc:
            raise ConfigError("config must declare a seed (no wall-clock default)")
        version = doc.get("version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ConfigError(
                f"config version {version} not supported (expected {FORMAT_VERSION})"
            )
        stages = doc.get("pipeline", [])
        if not isinstance(stages, list):
            raise ConfigError("pipeline must be a list of stage entries")
        for entry in stages:
            if not isinstance(entry, dict) or "stage" not in entry:
                raise ConfigError("each pipeline entry needs a 'stage' key")
            if entry["stage"] not in STAGE_NAMES:
                raise ConfigError(f"unknown stage {entry['stage']!r}")
            extra = set(entry) - {"stage", "params"}
            if extra:
                raise ConfigError(f"unknown stage entry keys: {sorted(extra)}")
        return cls(
            seed=int(doc["seed"]),
            out_dir=str(doc.get("out_dir", ".")),
            pipeline=stages,
            threads=int(doc.get("threads", 1)),
            version=version,
        )

    def to_canonical_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "seed": self.seed,
                "out_dir": self.out_dir,
                "threads": self.threads,
                "pipeline": self.pipeline,
            },
            sort_keys=True,
        )

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.to_canonical_json().encode()).hexdigest()[:16]


@dataclass
class StageContext:
    out_dir: Path
    seed: int
    config_hash: str
    stream: int = 0

    def rng(self):
        return rng_stream(self.seed, self.stream)

    def path(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.out_dir / p


# -- artifact IO ---------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, kind: str, columns, rows, ctx: StageContext) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w") as fh:
        fh.write(f"# kind={kind}\n")
        fh.write(f"# version={FORMAT_VERSION}\n")
        fh.write(f"# config_hash={ctx.config_hash}\n")
        fh.write(f"# seed={ctx.seed}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    tmp.rename(path)
    return path


def _write_json(path: Path, kind: str, doc: dict, ctx: StageContext) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".partial")
    out = {
        "kind": kind,
        "version": FORMAT_VERSION,
        "config_hash": ctx.config_hash,
        "seed": ctx.seed,
        **doc,
    }
    with open(tmp, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
        fh.write("\n")
    tmp.rename(path)
    return path


def _read_csv(path: Path):
    """(meta, columns, rows-of-strings) from an artifact CSV."""
    meta, columns, rows = {}, None, []
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
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
        raise ConfigError(f"{path} contains no header row")
    return meta, columns, rows


def _read_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _check_schema(path: Path, meta: dict, columns, schemas: dict) -> str:
    kind = meta.get("kind")
    if kind not in schemas["artifacts"]:
        raise ConfigError(f"{path}: unknown artifact kind {kind!r}")
    if meta.get("version") not in (str(FORMAT_VERSION), FORMAT_VERSION):
        raise ConfigError(
            f"{path}: version {meta.get('version')!r} does not match {FORMAT_VERSION}"
        )
    expected = list(schemas["artifacts"][kind].get("columns", {}))
    if expected and list(columns) != expected:
        missing = [c for c in expected if c not in columns]
        raise ConfigError(
            f"{path}: columns {columns} do not match schema for {kind!r} "
            f"(missing: {missing})"
        )
    return kind


def _columns(path: Path, names, kinds=None, schemas=None):
    """Named columns of an artifact CSV as float arrays."""
    meta, columns, rows = _read_csv(path)
    if schemas is not None:
        kind = _check_schema(path, meta, columns, schemas)
        if kinds is not None and kind not in kinds:
            raise ConfigError(f"{path}: expected a {kinds} artifact, got {kind!r}")
    out = []
    for name in names:
        if name not in columns:
            raise ConfigError(f"{path}: missing column {name!r}")
        i = columns.index(name)
        out.append(np.array([float(r[i]) for r in rows]))
    return out


def _join(indices) -> str:
    return ";".join(str(int(i)) for i in indices)


def _split(text: str) -> list[int]:
    return [int(t) for t in text.split(";") if t != ""]


# -- stages --------------------------------------------------------------


def _params(given: dict, required: tuple, optional: dict) -> dict:
    unknown = set(given) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown parameters: {sorted(unknown)}")
    missing = [k for k in required if given.get(k) is None]
    if missing:
        raise ConfigError(f"missing required parameters: {missing}")
    out = dict(optional)
    out.update({k: v for k, v in given.items() if v is not None})
    return out


def _load_graph(ctx: StageContext, name: str) -> DecodingGraph:
    return DecodingGraph.from_json_dict(_read_json(ctx.path(name)))


def stage_build_graph(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("model",),
        {
            "d_x": None, "d_z": None, "p": None,
            "d": None, "rounds": None, "p_data": None, "p_meas": None,
            "out": "graph.json",
        },
    )
    if p["model"] == "code-capacity":
        if p["d_x"] is None or p["d_z"] is None or p["p"] is None:
            raise ConfigError("code-capacity needs d_x, d_z and p")
        graph = build_code_capacity_graph(int(p["d_x"]), int(p["d_z"]), float(p["p"]))
    elif p["model"] == "phenomenological":
        if p["d"] is None or p["rounds"] is None or p["p_data"] is None or p["p_meas"] is None:
            raise ConfigError("phenomenological needs d, rounds, p_data and p_meas")
        graph = build_phenomenological_graph(
            int(p["d"]), int(p["rounds"]), float(p["p_data"]), float(p["p_meas"])
        )
    else:
        raise ConfigError(f"unknown graph model {p['model']!r}")
    return [_write_json(ctx.path(p["out"]), "graph", graph.to_json_dict(), ctx)]


def stage_sample(given: dict, ctx: StageContext):
    p = _params(given, ("shots",), {"graph": "graph.json", "out": "samples.csv"})
    graph = _load_graph(ctx, p["graph"])
    errors = sample_error_batch(graph, int(p["shots"]), ctx.rng())
    rows = [
        (i, _join(err), _join(syndrome_of(graph, err))) for i, err in enumerate(errors)
    ]
    return [
        _write_csv(
            ctx.path(p["out"]), "samples", ("shot", "error_edges", "syndrome"), rows, ctx
        )
    ]


def stage_decode(given: dict, ctx: StageContext):
    p = _params(
        given, (), {"graph": "graph.json", "samples": "samples.csv", "out": "corrections.csv"}
    )
    graph = _load_graph(ctx, p["graph"])
    _, columns, rows = _read_csv(ctx.path(p["samples"]))
    for col in ("shot", "error_edges", "syndrome"):
        if col not in columns:
            raise ConfigError(f"{p['samples']}: missing column {col!r}")
    i_shot = columns.index("shot")
    i_err = columns.index("error_edges")
    i_syn = columns.index("syndrome")
    out_rows = []
    for row in rows:
        err = _split(row[i_err])
        corr = decode(graph, _split(row[i_syn]))
        out_rows.append(
            (
                int(row[i_shot]),
                _join(corr.edges),
                corr.total_weight,
                logical_parity(graph, corr.edges),
                is_success(graph, err, corr),
            )
        )
    cols = ("shot", "correction_edges", "weight", "logical_class", "success")
    return [_write_csv(ctx.path(p["out"]), "corrections", cols, out_rows, ctx)]


def stage_score(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("shots",),
        {"graph": "graph.json", "sample_p": None, "out": "scores.csv"},
    )
    graph = _load_graph(ctx, p["graph"])
    sp = None if p["sample_p"] is None else float(p["sample_p"])
    scored = score_shots(graph, int(p["shots"]), ctx.rng(), sample_probabilities=sp)
    w = scored.weights if scored.weights is not None else np.ones(scored.n_shots)
    phi_g, phi_s, succ = scored.phi_gap, scored.phi_swim, scored.success
    rows = (
        (i, float(phi_g[i]), float(phi_s[i]), int(succ[i]), float(w[i]))
        for i in range(scored.n_shots)
    )
    cols = ("shot", "phi_gap", "phi_swim", "success", "weight")
    return [_write_csv(ctx.path(p["out"]), "scores", cols, rows, ctx)]


_KIND_COLUMN = {"complementary_gap": "phi_gap", "swim_distance": "phi_swim"}


def _scores_for(ctx, scores_file, kind, schemas):
    if kind not in _KIND_COLUMN:
        raise ConfigError(f"unknown score kind {kind!r}")
    phi, success, weight = _columns(
        ctx.path(scores_file),
        (_KIND_COLUMN[kind], "success", "weight"),
        kinds=("scores",),
        schemas=schemas,
    )
    weights = None if np.all(weight == 1.0) else weight
    return phi, success, weights


def stage_calibrate(given: dict, ctx: StageContext):
    p = _params(
        given,
        (),
        {"scores": "scores.csv", "kind": "complementary_gap", "bins": 50,
         "out": "curve.json"},
    )
    phi, success, weights = _scores_for(ctx, p["scores"], p["kind"], load_schemas())
    bins = bin_dcs(phi=phi, success=success, weights=weights, bin_count=int(p["bins"]))
    curve = fit_calibration(bins, meta={"kind": p["kind"], "n_shots": int(phi.size)})
    return [_write_json(ctx.path(p["out"]), "curve", curve.to_json_dict(), ctx)]


def _pool_from_artifacts(ctx, scores_file, curve_file, kind, schemas) -> WindowPool:
    phi, success, weights = _scores_for(ctx, scores_file, kind, schemas)
    if weights is not None:
        raise ConfigError("pools must be built from unweighted (deployment) scores")
    curve = CalibrationCurve.from_json_dict(_read_json(ctx.path(curve_file)))
    lep = np.asarray(lep_from_dcs(curve, phi))
    return WindowPool(p_L=lep, x=(1.0 - success).astype(np.uint8))


def stage_sweep_abort(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("fractions",),
        {"scores": "scores.csv", "curve": "curve.json",
         "kind": "complementary_gap", "out": "sweep.csv"},
    )
    pool = _pool_from_artifacts(ctx, p["scores"], p["curve"], p["kind"], load_schemas())
    rows = retained_ler_curve(pool, [float(f) for f in p["fractions"]])
    cols = ("fraction", "mean_lep", "ler", "wilson_lo", "wilson_hi", "n_kept")
    return [_write_csv(ctx.path(p["out"]), "sweep", cols, rows, ctx)]


def stage_mle(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("n_windows", "n_runs", "z_mean"),
        {"scores": "scores.csv", "curve": "curve.json", "kind": "complementary_gap",
         "reps": 1, "out": "mle.csv"},
    )
    pool = _pool_from_artifacts(ctx, p["scores"], p["curve"], p["kind"], load_schemas())
    rng = ctx.rng()
    rows = []
    for rep in range(int(p["reps"])):
        runs = simulate_circuits(pool, int(p["n_windows"]), int(p["n_runs"]), rng)
        dataset = synthesize_runs(runs, float(p["z_mean"]), rng)
        for est in (estimate_unmitigated(dataset), estimate_mle(dataset)):
            rows.append(
                (
                    rep,
                    est.tag,
                    est.estimate,
                    "" if est.theta is None else est.theta,
                    "" if est.eta is None else est.eta,
                    ";".join(est.flags),
                )
            )
    cols = ("rep", "estimator", "estimate", "theta", "eta", "flags")
    return [_write_csv(ctx.path(p["out"]), "mle", cols, rows, ctx)]


def stage_analytic_model(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("dcs_hist", "target_mean_pl", "n_windows"),
        {"delta": 1.0, "thresholds": None, "abort_rates": None, "trials": 1,
         "samples_per_trial": None, "mode": "shift", "out": "analytic.csv"},
    )
    _, columns, rows = _read_csv(ctx.path(p["dcs_hist"]))
    for col in ("center", "weight"):
        if col not in columns:
            raise ConfigError(f"{p['dcs_hist']}: missing column {col!r}")
    centers = np.array([float(r[columns.index("center")]) for r in rows])
    weights = np.array([float(r[columns.index("weight")]) for r in rows])
    model = model_from_histogram(centers, weights, float(p["delta"]))
    model = deform_to_target_mean(model, float(p["target_mean_pl"]), mode=p["mode"])
    spt = None if p["samples_per_trial"] is None else int(p["samples_per_trial"])
    table = compare_abort_channels(
        model,
        thresholds=p["thresholds"],
        n_windows=int(p["n_windows"]),
        trials=int(p["trials"]),
        rng=ctx.rng(),
        samples_per_trial=spt,
        abort_rates=p["abort_rates"],
    )
    out_rows = []
    for entry in table:
        for t, (rf_phi, rf_lam) in enumerate(
            zip(entry["phi_reduction"], entry["lambda_reduction"])
        ):
            out_rows.append(
                (
                    entry["rho"], entry["discard_fraction"], entry["overhead"],
                    entry["phi_threshold"], entry["lambda_threshold"],
                    t, rf_phi, rf_lam,
                )
            )
    cols = (
        "rho", "discard_fraction", "overhead", "phi_threshold",
        "lambda_threshold", "trial", "phi_reduction", "lambda_reduction",
    )
    return [_write_csv(ctx.path(p["out"]), "analytic", cols, out_rows, ctx)]


def stage_plan(given: dict, ctx: StageContext):
    p = _params(
        given,
        ("d_from", "d_to"),
        {"overhead": None, "f": None, "n_windows": None, "out": "plan.json"},
    )
    if p["overhead"] is not None:
        overhead = float(p["overhead"])
    elif p["f"] is not None and p["n_windows"] is not None:
        overhead = time_overhead(float(p["f"]), int(p["n_windows"]))
    else:
        raise ConfigError("give overhead directly or both f and n_windows")
    plan = spacetime_plan(int(p["d_from"]), int(p["d_to"]), overhead)
    doc = {
        "spacetime_factor": plan.spacetime_factor,
        "qubit_factor": plan.qubit_factor,
        "duration_factor": plan.duration_factor,
        "overhead": plan.overhead,
    }
    return [_write_json(ctx.path(p["out"]), "plan", doc, ctx)]


def stage_report(given: dict, ctx: StageContext):
    p = _params(given, ("inputs",), {"out": "report.json"})
    schemas = load_schemas()
    groups = {"sweeps": {}, "mle": {}, "analytic": {}, "plans": {}}
    group_of = {"sweep": "sweeps", "mle": "mle", "analytic": "analytic", "plan": "plans"}
    for name in p["inputs"]:
        path = ctx.path(name)
        if path.suffix == ".json":
            doc = _read_json(path)
            kind = doc.get("kind")
            if kind != "plan":
                raise ConfigError(f"{path}: JSON report inputs must be plans, got {kind!r}")
            if doc.get("version") != FORMAT_VERSION:
                raise ConfigError(f"{path}: version mismatch")
            groups["plans"][path.name] = {
                k: doc[k]
                for k in ("spacetime_factor", "qubit_factor", "duration_factor", "overhead")
            }
            continue
        meta, columns, rows = _read_csv(path)
        kind = _check_schema(path, meta, columns, schemas)
        if kind not in group_of:
            raise ConfigError(f"{path}: artifact kind {kind!r} is not reportable")
        table = {c: [r[i] for r in rows] for i, c in enumerate(columns)}
        groups[group_of[kind]][path.name] = table
    return [_write_json(ctx.path(p["out"]), "report", groups, ctx)]


STAGES = {
    "build-graph": stage_build_graph,
    "sample": stage_sample,
    "decode": stage_decode,
    "score": stage_score,
    "calibrate": stage_calibrate,
    "sweep-abort": stage_sweep_abort,
    "mle": stage_mle,
    "analytic-model": stage_analytic_model,
    "plan": stage_plan,
    "report": stage_report,
}


def run_pipeline(config: ExperimentConfig) -> list[Path]:
    """Run declared stages in order; each stage gets its own RNG stream."""
    ctx = StageContext(
        out_dir=Path(config.out_dir), seed=config.seed, config_hash=config.config_hash
    )
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, entry in enumerate(config.pipeline):
        ctx.stream = i
        stage = entry["stage"]
        try:
            written.extend(STAGES[stage](entry.get("params", {}), ctx))
        except SwimgapError as exc:
            raise type(exc)(f"stage {stage!r}: {exc}") from exc
    return written


# -- argument parsing ----------------------------------------------------


def _add_stage_parsers(sub):
    def sp(name, **kw):
        return sub.add_parser(name, **kw)

    p = sp("build-graph", help="construct a decoding graph artifact")
    p.add_argument("--model", required=True, choices=["code-capacity", "phenomenological"])
    p.add_argument("--d-x", type=int, dest="d_x")
    p.add_argument("--d-z", type=int, dest="d_z")
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--p-data", type=float, dest="p_data")
    p.add_argument("--p-meas", type=float, dest="p_meas")
    p.add_argument("--out")

    p = sp("sample", help="draw error chains and their syndromes")
    p.add_argument("--graph")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--out")

    p = sp("decode", help="decode sampled syndromes")
    p.add_argument("--graph")
    p.add_argument("--samples")
    p.add_argument("--out")

    p = sp("score", help="sample, decode and confidence-score shots")
    p.add_argument("--graph")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--sample-p", type=float, dest="sample_p",
                   help="elevated uniform sampling probability (importance weighted)")
    p.add_argument("--out")

    p = sp("calibrate", help="fit a score-to-log-odds calibration line")
    p.add_argument("--scores")
    p.add_argument("--kind", choices=list(_KIND_COLUMN))
    p.add_argument("--bins", type=int)
    p.add_argument("--out")

    p = sp("sweep-abort", help="retained LEP/LER versus discard fraction")
    p.add_argument("--scores")
    p.add_argument("--curve")
    p.add_argument("--kind", choices=list(_KIND_COLUMN))
    p.add_argument("--fractions", type=float, nargs="+", required=True)
    p.add_argument("--out")

    p = sp("mle", help="expectation-value estimators on synthesized circuits")
    p.add_argument("--scores")
    p.add_argument("--curve")
    p.add_argument("--kind", choices=list(_KIND_COLUMN))
    p.add_argument("--n-windows", type=int, dest="n_windows", required=True)
    p.add_argument("--n-runs", type=int, dest="n_runs", required=True)
    p.add_argument("--z-mean", type=float, dest="z_mean", required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--out")

    p = sp("analytic-model", help="latent log-odds model abort comparison")
    p.add_argument("--dcs-hist", dest="dcs_hist", required=True)
    p.add_argument("--target-mean-pl", type=float, dest="target_mean_pl", required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-windows", type=int, dest="n_windows", required=True)
    p.add_argument("--thresholds", type=float, nargs="+")
    p.add_argument("--abort-rates", type=float, nargs="+", dest="abort_rates")
    p.add_argument("--trials", type=int)
    p.add_argument("--samples-per-trial", type=int, dest="samples_per_trial")
    p.add_argument("--mode", choices=["shift", "scale"])
    p.add_argument("--out")

    p = sp("plan", help="spacetime cost of an abort-enabled distance change")
    p.add_argument("--d-from", type=int, dest="d_from", required=True)
    p.add_argument("--d-to", type=int, dest="d_to", required=True)
    p.add_argument("--overhead", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--n-windows", type=int, dest="n_windows")
    p.add_argument("--out")

    p = sp("report", help="aggregate artifacts into a summary report")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swimgap",
        description="decoder-confidence experiment pipelines",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, help="RNG seed (required for stochastic stages)")
    parser.add_argument("--threads", type=int, default=1, help="worker bound")
    parser.add_argument("--out-dir", default=".", help="artifact directory")
    parser.add_argument("--config", help="JSON pipeline config; runs all declared stages")
    sub = parser.add_subparsers(dest="command")
    _add_stage_parsers(sub)
    return parser


_GLOBAL_KEYS = {"seed", "threads", "out_dir", "config", "command", "version"}
_STOCHASTIC = {"sample", "score", "mle", "analytic-model"}


def _dispatch(args: argparse.Namespace) -> int:
    if args.config is not None:
        if args.command is not None:
            raise ConfigError("--config runs a whole pipeline; do not add a subcommand")
        doc = _read_json(Path(args.config))
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.out_dir != ".":
            doc["out_dir"] = args.out_dir
        config = ExperimentConfig.from_dict(doc)
        for path in run_pipeline(config):
            print(path)
        return 0
    if args.command is None:
        raise ConfigError("give a subcommand or --config FILE")
    if args.seed is None and args.command in _STOCHASTIC:
        raise ConfigError(f"{args.command} is stochastic: --seed is required")
    params = {
        k: v for k, v in vars(args).items() if k not in _GLOBAL_KEYS and v is not None
    }
    config = ExperimentConfig(
        seed=args.seed if args.seed is not None else 0,
        out_dir=args.out_dir,
        pipeline=[{"stage": args.command, "params": params}],
        threads=args.threads,
    )
    for path in run_pipeline(config):
        print(path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    except SwimgapError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
