"""Experiment harness: config files, seeded multi-run execution, artifacts.

An experiment is a set of (variant, seed) runs on one problem instance.  Each
run writes its final front and hypervolume trace as CSV; the harness then
normalizes every front against a shared reference box (1.1 times the union
nadir) and emits a summary table plus a JSON manifest, so every reported
number can be recomputed from the persisted fronts and box alone.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .fewn import N_OBJECTIVES, FewnProblem, ResourceTopology, decision_dim
from .indicators import ReferenceBox, normalized_hv, summarize
from .solvers import VARIANTS, SolverConfig, run

DEFAULT_VARIANTS = tuple(VARIANTS)

_HV_SEED = 0  # normalization Monte Carlo seed, fixed for reproducibility


@dataclass
class ExperimentConfig:
    """Everything a `run` invocation needs; defaults match the 567-variable,
    5-objective instance (7 water, 7 energy, 7 food sources, 6 demands)."""

    water: int = 7
    energy: int = 7
    food: int = 7
    demand: int = 6
    variants: tuple[str, ...] = DEFAULT_VARIANTS
    population: int = 70
    budget: int = 50_000
    runs: int = 10
    seed: int = 1
    workers: int | None = None
    hv_method: str = "auto"  # auto | exact | mc
    mc_samples: int = 100_000
    champion: str = "inverse_model"
    level: float = 0.05
    out_dir: str = "results"
    save_decisions: bool = False
    # Solver knobs, shared by all variants that use them.
    resource_split: float = 0.5
    target_sigma: float = 0.3
    perturbations: int = 4
    ridge: float = 1e-6
    dva_mask_budget: int | None = None
    dva_sample_size: int = 5
    trace_samples: int = 4096
    eta_c: float = 20.0
    eta_m: float = 20.0
    mutation_rate: float | None = None

    def validate(self) -> None:
        if self.runs < 1:
            raise ValueError("need at least one run per variant")
        if not self.variants:
            raise ValueError("no variants selected")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if self.hv_method not in ("auto", "exact", "mc"):
            raise ValueError("hv method must be auto, exact, or mc")

    @property
    def topology(self) -> ResourceTopology:
        return ResourceTopology(self.water, self.energy, self.food, self.demand)

    def solver_config(self, variant: str, seed: int) -> SolverConfig:
        return SolverConfig(
            variant=variant,
            budget=self.budget,
            seed=seed,
            population_size=self.population,
            eta_c=self.eta_c,
            eta_m=self.eta_m,
            mutation_rate=self.mutation_rate,
            resource_split=self.resource_split,
            perturbations=self.perturbations,
            ridge=self.ridge,
            target_sigma=self.target_sigma,
            dva_mask_budget=self.dva_mask_budget,
            dva_sample_size=self.dva_sample_size,
            trace_samples=self.trace_samples,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variants"] = list(self.variants)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = cls(**{**data, "variants": tuple(data.get("variants", DEFAULT_VARIANTS))})
        cfg.validate()
        return cfg


_SECTION_FIELDS = {
    "instance": ("water", "energy", "food", "demand"),
    "run": ("variants", "population", "budget", "runs", "seed", "workers"),
    "hv": ("hv_method", "mc_samples"),
    "compare": ("champion", "level"),
    "solver": (
        "resource_split",
        "target_sigma",
        "perturbations",
        "ridge",
        "dva_mask_budget",
        "dva_sample_size",
        "trace_samples",
        "eta_c",
        "eta_m",
        "mutation_rate",
    ),
    "output": ("out_dir", "save_decisions"),
}

_KEY_ALIASES = {"method": "hv_method", "dir": "out_dir"}


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a TOML config file of [instance]/[run]/[hv]/[compare]/[solver]/[output] sections."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    flat: dict = {}
    for section, entries in raw.items():
        if section not in _SECTION_FIELDS:
            raise ValueError(f"unknown config section [{section}]")
        if not isinstance(entries, dict):
            raise ValueError(f"section [{section}] must hold key/value pairs")
        for key, value in entries.items():
            key = _KEY_ALIASES.get(key, key)
            if key not in _SECTION_FIELDS[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            flat[key] = value
    if "variants" in flat:
        flat["variants"] = tuple(flat["variants"])
    cfg = ExperimentConfig(**flat)
    cfg.validate()
    return cfg


def resolve_workers(requested: int | None) -> int:
    cap = os.environ.get("NEXUS_OPT_WORKERS")
    limit = int(cap) if cap else None
    workers = requested if requested is not None else (os.cpu_count() or 1)
    if limit is not None:
        workers = min(workers, limit)
    return max(1, workers)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_front_csv(path: Path, F: np.ndarray) -> None:
    header = [f"f{i + 1}" for i in range(F.shape[1] if F.ndim == 2 else 0)]
    _atomic_write(path, _csv_text(header, np.atleast_2d(F) if np.size(F) else []))


def read_front_csv(path: Path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    return np.array(rows).reshape(-1, len(header))


def write_trace_csv(path: Path, trace) -> None:
    lines = ["generation,evaluations,hv"]
    for gen, evals, hv in trace:
        lines.append(f"{int(gen)},{int(evals)},{repr(float(hv))}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _run_stem(variant: str, seed: int) -> str:
    return f"{variant}_seed{seed:05d}"


def _execute_run(config_dict: dict, variant: str, seed: int, out_dir: str) -> dict:
    """Worker entry: one seeded run plus its persisted artifacts."""
    cfg = ExperimentConfig.from_dict(config_dict)
    problem = FewnProblem(cfg.topology)
    result = run(problem, cfg.solver_config(variant, seed))
    out = Path(out_dir)
    stem = _run_stem(variant, seed)
    front_path = out / "fronts" / f"{stem}.csv"
    trace_path = out / "traces" / f"{stem}.csv"
    write_front_csv(front_path, result.front_F)
    write_trace_csv(trace_path, result.trace)
    meta = {
        "variant": variant,
        "seed": seed,
        "front": str(front_path.relative_to(out)),
        "trace": str(trace_path.relative_to(out)),
        "front_size": int(len(result.front_F)),
        "evaluations": int(result.evaluations),
        "duration_s": float(result.duration),
        "trace_box": {
            "lower": [float(v) for v in result.trace_box[0]],
            "reference": [float(v) for v in result.trace_box[1]],
        },
    }
    if cfg.save_decisions:
        dec_path = out / "decisions" / f"{stem}.csv"
        header = [f"x{i + 1}" for i in range(result.front_X.shape[1])]
        _atomic_write(dec_path, _csv_text(header, result.front_X))
        meta["decisions"] = str(dec_path.relative_to(out))
    return meta


def _resolve_method(cfg_method: str, fronts: list[np.ndarray], n_obj: int) -> str:
    if cfg_method != "auto":
        return cfg_method
    from .indicators import EXACT_MAX_OBJECTIVES, EXACT_MAX_POINTS

    if n_obj <= EXACT_MAX_OBJECTIVES and all(len(f) <= EXACT_MAX_POINTS for f in fronts):
        return "exact"
    return "mc"


def _score_fronts(
    fronts: list[np.ndarray], method: str, mc_samples: int
) -> tuple[list[float], dict]:
    """Normalized hypervolume per front against the shared union box."""
    union = np.concatenate(fronts)
    box = ReferenceBox.from_fronts(fronts)
    ideal = union.min(axis=0)
    scores = [
        normalized_hv(
            f,
            box.point,
            ideal=ideal,
            method=method,
            mc_samples=mc_samples,
            seed=_HV_SEED,
        )
        for f in fronts
    ]
    record = {
        "ideal": [float(v) for v in ideal],
        "point": [float(v) for v in box.point],
        "method": method,
        "mc_samples": mc_samples if method == "mc" else None,
        "mc_seed": _HV_SEED if method == "mc" else None,
    }
    return scores, record


def format_comparison_table(
    instance_label: str,
    n_obj: int,
    dim: int,
    verdict,
    order: list[str],
    run_counts: dict[str, int],
) -> str:
    """Plain-text table: one instance row of mean (std) cells plus a tally row."""
    cells = {}
    for name in order:
        cell = verdict.formatted[name]
        marker = verdict.markers.get(name)
        if marker:
            cell += f" {marker}"
        if name == verdict.best:
            cell = f"**{cell}**"
        cells[name] = cell
    tally = {}
    for name in order:
        if verdict.champion is not None and name == verdict.champion:
            tally[name] = "/"
        else:
            m = verdict.markers.get(name)
            tally[name] = (
                f"{int(m == '+')} / {int(m == '-')} / {int(m == '≈')}" if m else ""
            )
    headers = ["Problem", "M", "D"] + [f"{n} (n={run_counts[n]})" for n in order]
    row1 = [instance_label, str(n_obj), str(dim)] + [cells[n] for n in order]
    row2 = ["+ / - / ≈", "", ""] + [tally[n] for n in order]
    widths = [
        max(len(h), len(a), len(b)) for h, a, b in zip(headers, row1, row2)
    ]
    def fmt(row):
        return "  ".join(s.ljust(w) for s, w in zip(row, widths)).rstrip()

    return "\n".join([fmt(headers), fmt(["-" * w for w in widths]), fmt(row1), fmt(row2)])


def cmd_run(config: ExperimentConfig, echo=print) -> dict:
    """Execute the configured experiment; returns the manifest dictionary."""
    config.validate()
    out = Path(config.out_dir)
    (out / "fronts").mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    if config.save_decisions:
        (out / "decisions").mkdir(parents=True, exist_ok=True)
    jobs = [
        (variant, config.seed + i)
        for variant in config.variants
        for i in range(config.runs)
    ]
    workers = resolve_workers(config.workers)
    config_dict = config.to_dict()
    metas: list[dict] = []
    if workers == 1 or len(jobs) == 1:
        for variant, seed in jobs:
            metas.append(_execute_run(config_dict, variant, seed, str(out)))
            echo(f"  finished {variant} seed {seed} ({metas[-1]['evaluations']} evals)")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_execute_run, config_dict, variant, seed, str(out))
                for variant, seed in jobs
            ]
            for fut in futures:
                metas.append(fut.result())
                echo(
                    f"  finished {metas[-1]['variant']} seed {metas[-1]['seed']} "
                    f"({metas[-1]['evaluations']} evals)"
                )
    fronts = [read_front_csv(out / meta["front"]) for meta in metas]
    method = _resolve_method(config.hv_method, fronts, N_OBJECTIVES)
    scores, box_record = _score_fronts(fronts, method, config.mc_samples)
    for meta, score in zip(metas, scores):
        meta["normalized_hv"] = float(score)
    samples_by_variant = {
        v: [m["normalized_hv"] for m in metas if m["variant"] == v]
        for v in config.variants
    }
    champion = (
        config.champion
        if len(config.variants) > 1 and config.champion in config.variants
        else None
    )
    verdict = summarize(samples_by_variant, champion=champion, level=config.level)
    dim = decision_dim(config.topology)
    table = format_comparison_table(
        "FEWN",
        N_OBJECTIVES,
        dim,
        verdict,
        list(config.variants),
        {v: len(samples_by_variant[v]) for v in config.variants},
    )
    echo(table)
    summary_lines = ["variant,runs,mean_hv,std_hv,formatted,marker,best"]
    for v in config.variants:
        summary_lines.append(
            ",".join(
                [
                    v,
                    str(len(samples_by_variant[v])),
                    repr(verdict.means[v]),
                    repr(verdict.stds[v]),
                    f'"{verdict.formatted[v]}"',
                    verdict.markers.get(v, ""),
                    "1" if v == verdict.best else "0",
                ]
            )
        )
    _atomic_write(out / "summary.csv", "\n".join(summary_lines) + "\n")
    manifest = {
        "kind": "nexus-opt-experiment",
        "version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "config": config_dict,
        "instance": {
            "water": config.water,
            "energy": config.energy,
            "food": config.food,
            "demand": config.demand,
            "n_obj": N_OBJECTIVES,
            "dim": dim,
        },
        "reference_box": box_record,
        "champion": champion,
        "best": verdict.best,
        "runs": metas,
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


def _load_manifest(directory: Path) -> dict:
    path = directory / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.json in {directory}")
    with open(path) as fh:
        return json.load(fh)


def cmd_compare(
    directories: list[str | Path],
    champion: str | None = None,
    level: float | None = None,
    hv_method: str | None = None,
    mc_samples: int | None = None,
    echo=print,
) -> str:
    """Cross-directory comparison table over runs of the same instance.

    All directories must record the same instance and the same reference box;
    hypervolumes are recomputed from the persisted fronts against that box.
    """
    if not directories:
        raise ValueError("need at least one result directory")
    manifests = [(_load_manifest(Path(d)), Path(d)) for d in directories]
    instance0 = manifests[0][0]["instance"]
    box0 = manifests[0][0]["reference_box"]
    for man, d in manifests[1:]:
        if man["instance"] != instance0:
            raise ValueError(
                f"instance mismatch: {d} ran {man['instance']}, expected {instance0}"
            )
        if man["reference_box"]["point"] != box0["point"] or (
            man["reference_box"]["ideal"] != box0["ideal"]
        ):
            raise ValueError(
                f"reference box mismatch in {d}; re-run or regenerate with a shared box"
            )
    method = hv_method or box0["method"]
    samples = mc_samples or box0.get("mc_samples") or 100_000
    ref = np.array(box0["point"])
    ideal = np.array(box0["ideal"])
    scores_by_variant: dict[str, list[float]] = {}
    for man, d in manifests:
        for meta in man["runs"]:
            F = read_front_csv(d / meta["front"])
            hv = normalized_hv(
                F, ref, ideal=ideal, method=method, mc_samples=samples, seed=_HV_SEED
            )
            scores_by_variant.setdefault(meta["variant"], []).append(hv)
    if champion is None:
        champion = manifests[0][0].get("champion")
    if champion is not None and champion not in scores_by_variant:
        champion = None
    if len(scores_by_variant) < 2:
        champion = None
    verdict = summarize(
        scores_by_variant,
        champion=champion,
        level=level if level is not None else 0.05,
    )
    order = sorted(scores_by_variant)
    table = format_comparison_table(
        "FEWN",
        instance0["n_obj"],
        instance0["dim"],
        verdict,
        order,
        {v: len(scores_by_variant[v]) for v in order},
    )
    echo(table)
    return table


def cmd_front_dump(
    directory: str | Path,
    variant: str | None = None,
    seed: int | None = None,
    fmt: str = "csv",
    out_path: str | Path | None = None,
    include_decisions: bool = False,
    normalized: bool = False,
) -> Path:
    """Re-emit one run's final front from its persisted artifacts.

    CSV rows carry one solution per line under an f1..fM header (decision
    columns appended on request); JSON mirrors the same columns.  With
    ``normalized`` the objectives are scaled into the recorded reference box
    and headers gain a ``_norm`` suffix.
    """
    directory = Path(directory)
    man = _load_manifest(directory)
    runs = man["runs"]
    if variant is not None:
        runs = [r for r in runs if r["variant"] == variant]
    if seed is not None:
        runs = [r for r in runs if r["seed"] == seed]
    if len(runs) != 1:
        raise ValueError(
            f"front dump needs exactly one matching run, found {len(runs)}; "
            "narrow with variant/seed"
        )
    meta = runs[0]
    F = read_front_csv(directory / meta["front"])
    headers = [f"f{i + 1}" for i in range(man["instance"]["n_obj"])]
    if normalized:
        ideal = np.array(man["reference_box"]["ideal"])
        ref = np.array(man["reference_box"]["point"])
        span = np.maximum(ref - ideal, 1e-300)
        F = (F - ideal) / span
        headers = [h + "_norm" for h in headers]
    data = F
    if include_decisions:
        if "decisions" not in meta:
            raise ValueError(
                "run was executed without save_decisions; decision values were not persisted"
            )
        X = read_front_csv(directory / meta["decisions"])
        headers = headers + [f"x{i + 1}" for i in range(X.shape[1])]
        data = np.hstack([F, X])
    if out_path is None:
        suffix = "_norm" if normalized else ""
        out_path = directory / f"front_{_run_stem(meta['variant'], meta['seed'])}{suffix}.{fmt}"
    out_path = Path(out_path)
    if fmt == "csv":
        _atomic_write(out_path, _csv_text(headers, data))
    elif fmt == "json":
        payload = {
            "columns": headers,
            "rows": [[float(v) for v in row] for row in data],
        }
        _atomic_write(out_path, json.dumps(payload, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected csv or json")
    return out_path
