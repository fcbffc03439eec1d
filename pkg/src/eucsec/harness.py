"""Declarative experiment sweeps.

A sweep file is TOML (or JSON with the same structure)::

    name = "coord-check"
    mode = "distortion"          # bounds | distortion | conjecture | kashin | lambdap

    [generator]
    name = "coordinate"

    [grid]
    N = [8, 12]
    d = [1, 2, 3]

    p = [1.0]
    measure = "counting"

    [seeds]
    base = 7
    count = 1

    [budget]
    restarts = 50
    cap = 20

    [output]
    path = "out/coord-check"
    format = ["csv", "json"]

Every cell of the Cartesian product of the grid lists (in file order, then
p, then replicate) produces one row. Rows are written in cell order no
matter how many worker threads run them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .bounds import bound_report
from .conjecture import evaluate_instance, family_matrix, instance_seed
from .distortion import Target, evaluate, lambda_heuristic
from .generators import (
    character_subspace,
    kashin_sample,
    make_subspace,
    random_frequencies,
    sidon_frequencies,
)
from .types import DomainError, Field, TheoremViolation

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

CSV_SCHEMA = 1
MODES = ("bounds", "distortion", "conjecture", "kashin", "lambdap")
MAX_CAP = 24
MAX_SUPPORTS = 5_000_000
_SAFE_NAME = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3


class SpecError(ValueError):
    """Sweep file does not parse or validate (exit code 2)."""


class CapError(ValueError):
    """A requested cap exceeds what the modules allow (exit code 3)."""


@dataclass
class ExperimentSpec:
    name: str
    mode: str
    grid: dict
    p: list = dc_field(default_factory=lambda: [1.0])
    measure: str = "counting"
    field: str = "real"
    generator: dict = dc_field(default_factory=dict)
    seeds: dict = dc_field(default_factory=lambda: {"base": 0, "count": 1})
    budget: dict = dc_field(default_factory=dict)
    output: dict = dc_field(default_factory=dict)
    source_hash: str = ""

    @classmethod
    def from_mapping(cls, data: dict, source_hash: str = "") -> "ExperimentSpec":
        try:
            spec = cls(
                name=str(data["name"]),
                mode=str(data["mode"]).lower(),
                grid=dict(data.get("grid", {})),
                p=[float(v) for v in _as_list(data.get("p", [1.0]))],
                measure=str(data.get("measure", "counting")),
                field=str(data.get("field", "real")),
                generator=dict(data.get("generator", {})),
                seeds={"base": 0, "count": 1, **dict(data.get("seeds", {}))},
                budget=dict(data.get("budget", {})),
                output=dict(data.get("output", {})),
                source_hash=source_hash,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"invalid sweep spec: {exc}") from exc
        spec.validate()
        return spec

    def validate(self) -> None:
        if not self.name or not _SAFE_NAME.match(self.name):
            raise SpecError(f"name {self.name!r} is empty or not filesystem-safe")
        if self.mode not in MODES:
            raise SpecError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.p:
            raise SpecError("p grid is empty")
        for key, vals in self.grid.items():
            if isinstance(vals, str):
                continue
            if not _as_list(vals):
                raise SpecError(f"grid {key!r} is empty")
        if self.mode == "distortion" and "name" not in self.generator:
            raise SpecError("distortion mode needs [generator] name")
        if int(self.seeds.get("count", 1)) < 1:
            raise SpecError("seeds.count must be >= 1")
        cap = int(self.budget.get("cap", 20))
        if cap > MAX_CAP or cap < 1:
            raise CapError(f"cap {cap} outside [1, {MAX_CAP}]")
        if int(self.budget.get("max_supports", 200_000)) > MAX_SUPPORTS:
            raise CapError(f"max_supports exceeds {MAX_SUPPORTS}")


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def load_spec(path) -> ExperimentSpec:
    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        if str(path).lower().endswith(".json"):
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise SpecError(f"{path}: {exc}") from exc
    return ExperimentSpec.from_mapping(data, digest)


# ------------------------------------------------------------------------ cells

def _expand_d(rule, N: int) -> list:
    if isinstance(rule, str):
        if rule == "all":
            return list(range(1, N + 1))
        m = re.fullmatch(r"(\d+)\.\.N", rule)
        if m:
            return list(range(int(m.group(1)), N + 1))
        raise SpecError(f"unknown d rule {rule!r}")
    return [int(x) for x in _as_list(rule)]


def _cells(spec: ExperimentSpec) -> list:
    """Ordered list of coordinate dicts (grid x p x replicate)."""
    grid = dict(spec.grid)
    d_rule = grid.pop("d", None)
    keys = list(grid)
    out = []
    for combo in itertools.product(*[_as_list(grid[k]) for k in keys]):
        base = dict(zip(keys, combo))
        ds = [None]
        if d_rule is not None:
            if "N" not in base:
                raise SpecError("grid d needs grid N")
            ds = [d for d in _expand_d(d_rule, int(base["N"])) if 1 <= d <= int(base["N"])]
        for d in ds:
            for p in spec.p:
                for rep in range(int(spec.seeds["count"])):
                    c = dict(base)
                    if d is not None:
                        c["d"] = d
                    c["p"] = p
                    c["replicate"] = rep
                    out.append(c)
    return out


def _seed_for(spec: ExperimentSpec, coords: dict) -> int:
    return instance_seed(int(spec.seeds["base"]), spec.mode, coords)


# ----------------------------------------------------------------- mode runners

def _row_bounds(spec, c):
    N, d, p = int(c["N"]), int(c["d"]), float(c["p"])
    rep = bound_report(N, d, p, c.get("field", spec.field), c.get("measure", spec.measure))
    row = rep.to_dict()
    flags = []
    if rep.measure.value == "counting":
        if rep.thm_upper_lambda > N ** (1.0 / p - 0.5) * math.sqrt(d) * (1 + 1e-12):
            flags.append("upper_exceeds_trivial")
        if rep.thm_lower_lambda_prime is not None and rep.meyer_pajor_lower is not None \
                and rep.meyer_pajor_lower > rep.thm_lower_lambda_prime * (1 + 1e-12):
            flags.append("volume_bound_above_sqrt_d")
    row["violation"] = int(bool(flags))
    return row


def _row_distortion(spec, c):
    seed = _seed_for(spec, c)
    params = {k: v for k, v in c.items() if k not in ("p", "replicate")}
    params.update({k: v for k, v in spec.generator.items() if k != "name"})
    gen = spec.generator["name"]
    E = make_subspace(gen, params, seed)
    b = spec.budget
    measure = c.get("measure", spec.measure)
    row = {**{k: c[k] for k in c}, "generator": gen, "seed": seed, "N_actual": E.N,
           "d_actual": E.d, "measure": str(measure)}
    try:
        est = evaluate(E, float(c["p"]), measure, int(b.get("restarts", 50)),
                       int(b.get("restarts_min", 200)), seed, int(b.get("cap", 20)),
                       int(b.get("max_supports", 200_000)))
    except TheoremViolation as exc:
        row.update({"lambda_min": math.nan, "lambda_min_kind": "", "lambda_max": math.nan,
                    "lambda_max_kind": "", "upper_bound": math.nan, "prime_lower": math.nan,
                    "min_le_upper": "", "max_ge_prime": "", "violation": 1, "note": str(exc)})
        return row
    bc = est.bound_check
    row.update({
        "lambda_min": est.lambda_min.value, "lambda_min_kind": est.lambda_min.kind.value,
        "lambda_max": est.lambda_max.value, "lambda_max_kind": est.lambda_max.kind.value,
        "upper_bound": bc["upper_bound"], "prime_lower": bc["prime_lower"],
        "min_le_upper": bc["min_le_upper"], "max_ge_prime": bc["max_ge_prime"],
        "violation": 0, "note": "; ".join(bc["inconclusive"]),
    })
    return row


def _row_conjecture(spec, c):
    variant, fam, p = str(c["variant"]), str(c["family"]), float(c["p"])
    seed = _seed_for(spec, c)
    b = spec.budget
    n_range = tuple(b.get("n_range", (2, 8)))
    M = family_matrix(fam, variant, np.random.default_rng(seed), n_range)
    row = {"variant": variant, "p": p, "family": fam, "replicate": c["replicate"], "seed": seed}
    try:
        inst = evaluate_instance(variant, p, M, int(b.get("restarts", 10)), seed,
                                 int(b.get("escalation", 100)), int(b.get("cap", 20)))
    except TheoremViolation as exc:
        row.update({"r": math.nan, "lhs": math.nan, "lhs_kind": "", "rhs": math.nan,
                    "slack": math.nan, "status": "violation", "violation": 1, "note": str(exc)})
        return row
    row.update({"r": inst.r, "lhs": inst.lhs, "lhs_kind": inst.lhs_kind.value, "rhs": inst.rhs,
                "slack": inst.slack, "status": inst.status.value,
                "violation": int(inst.lhs_kind.value == "exact" and inst.slack < -1e-9),
                "note": ""})
    return row


def _row_kashin(spec, c):
    seed = _seed_for(spec, c)
    k = kashin_sample(int(c["N"]), float(c["eta"]), seed,
                      restarts=int(spec.budget.get("restarts", 8)))
    row = {**k.row(), "replicate": c["replicate"]}
    row["within_bound"] = bool(0.0 < row["measured_c"] <= row["c_upper"] * (1 + 1e-12))
    row["violation"] = int(not row["measured_c"] > 0.0)
    return row


def _row_lambdap(spec, c):
    seed = _seed_for(spec, c)
    N, p = int(c["N"]), float(c["p"])
    construction = str(c.get("construction", "sidon"))
    fld = c.get("field", spec.field)
    sid = sidon_frequencies(N)
    freqs = sid if construction == "sidon" else random_frequencies(N, len(sid.S), seed)
    E = character_subspace(freqs, fld)
    restarts = int(spec.budget.get("restarts", 20))
    lmax = lambda_heuristic(E, p, Target.MAX, restarts, seed, "normalized")
    lmin = lambda_heuristic(E, p, Target.MIN, restarts, seed, "normalized")
    return {"N": N, "p": p, "construction": construction, "field": str(Field(fld).value),
            "replicate": c["replicate"], "seed": seed, "size": len(freqs.S),
            "frequencies": json.dumps(list(freqs.S)), "sidon": freqs.is_sidon(),
            "lambda_max": lmax.value, "lambda_max_kind": lmax.kind.value,
            "lambda_min": lmin.value, "lambda_min_kind": lmin.kind.value,
            "violation": 0}


_RUNNERS = {"bounds": _row_bounds, "distortion": _row_distortion,
            "conjecture": _row_conjecture, "kashin": _row_kashin, "lambdap": _row_lambdap}


def run_rows(spec: ExperimentSpec, threads: int = 1) -> list:
    cells = _cells(spec)
    if spec.mode == "distortion":
        cells = [c for c in cells if "d" not in c or "N" not in c or int(c["d"]) <= int(c["N"])]
    runner = _RUNNERS[spec.mode]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(lambda c: runner(spec, c), cells))
    return [runner(spec, c) for c in cells]


# ---------------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def rows_to_csv(rows: list, mode: str) -> str:
    buf = io.StringIO()
    buf.write(f"# eucsec-csv schema={CSV_SCHEMA} mode={mode}\n")
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(k)) for k in cols])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, np.generic):
        return v.item()
    if hasattr(v, "value") and not isinstance(v, (int, float, str)):
        return v.value
    return v


def rows_to_json(rows: list, mode: str) -> str:
    doc = {"schema": f"eucsec.rows/{CSV_SCHEMA}", "mode": mode,
           "rows": [{k: _jsonable(v) for k, v in r.items()} for r in rows]}
    return json.dumps(doc, indent=1, sort_keys=False)


@dataclass
class RunResult:
    exit_code: int
    rows: list
    files: list
    manifest: dict


def run_spec(spec: ExperimentSpec, out: Optional[str] = None, threads: int = 1,
             formats: Optional[list] = None) -> RunResult:
    t0 = time.perf_counter()
    rows = run_rows(spec, threads)
    wall = time.perf_counter() - t0
    violations = sum(int(r.get("violation", 0)) for r in rows)
    base = Path(out or spec.output.get("path") or spec.name)
    formats = formats or _as_list(spec.output.get("format", ["csv", "json"]))
    base.parent.mkdir(parents=True, exist_ok=True)
    files = []
    if "csv" in formats:
        p = base.with_suffix(".csv")
        p.write_text(rows_to_csv(rows, spec.mode), encoding="utf-8")
        files.append(str(p))
    if "json" in formats:
        p = base.with_suffix(".json")
        p.write_text(rows_to_json(rows, spec.mode), encoding="utf-8")
        files.append(str(p))
    manifest = {"name": spec.name, "mode": spec.mode, "spec_sha256": spec.source_hash,
                "code_version": __version__, "total_instances": len(rows),
                "violation_count": violations, "wall_time_s": wall, "threads": threads,
                "files": files}
    mp = base.with_name(base.name + ".manifest.json")
    mp.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    files.append(str(mp))
    return RunResult(EXIT_VIOLATION if violations else EXIT_OK, rows, files, manifest)


def run(spec_file, out: Optional[str] = None, threads: int = 1) -> int:
    """Run a sweep file; returns the process exit code."""
    try:
        spec = load_spec(spec_file)
    except CapError:
        return EXIT_CAP
    except (SpecError, OSError):
        return EXIT_PARSE
    return run_spec(spec, out, threads).exit_code


def bounds_table(N_list, d_rule="all", p_list=(1.0,), field="real",
                 measure="counting") -> list:
    """Rows of :func:`bound_report` over N x d(N) x p."""
    rows = []
    for N in N_list:
        for d in _expand_d(d_rule, int(N)):
            if not 1 <= d <= N:
                continue
            for p in p_list:
                rows.append(bound_report(int(N), d, float(p), field, measure).to_dict())
    return rows
