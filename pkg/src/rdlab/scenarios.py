"""Scenario registry, JSON config ingestion, single runs and parameter sweeps.

A config is either a *scenario* (one problem plus stepper overrides and a
list of checks) or a *sweep* (a base scenario and axes of JSON-pointer
parameters). Loading validates against the shipped JSON schema, fills in
every default and echoes it back into the canonical config, so that the
config hash identifies the inputs completely.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import itertools
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from jsonschema.exceptions import best_match

from . import diagnostics as dg
from . import dsl
from .errors import (
    ConfigError,
    ExpressionSyntaxError,
    MissingParameterError,
    RDLabError,
    ScenarioError,
    UnknownFamilyError,
)
from .meshfield import Grid
from .odecmp import compare_pde_ode
from .stepper import Problem, StepperConfig, simulate
from .trace import SCHEMA_VERSION

log = logging.getLogger(__name__)

__all__ = [
    "REGISTRY",
    "ScenarioSpec",
    "SweepSpec",
    "RunRecord",
    "load_config",
    "parse_config",
    "run_scenario",
    "run_sweep",
    "list_scenarios",
    "registry_config",
    "config_hash",
    "default_out_dir",
    "EXIT_OK",
    "EXIT_MISMATCH",
    "EXIT_COUNTEREXAMPLE",
]

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_COUNTEREXAMPLE = 3

OUT_DIR_ENV = "RDLAB_OUT_DIR"
DEFAULT_NODES = {1: [257], 2: [129, 129]}
CHECK_IDS = ("sign", "positivity", "mass_control", "mass_control_strict", "ratio_trend",
             "gronwall", "max_principle_sub", "max_principle_super", "lemma1",
             "ode_compare", "theorem_probe")
SYSTEM_ONLY = ("mass_control", "mass_control_strict", "ratio_trend")


def _load_schema():
    text = resources.files("rdlab").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


SCHEMA = _load_schema()


def _validator(kind):
    sub = {"$schema": SCHEMA["$schema"], "$defs": SCHEMA["$defs"], "$ref": f"#/$defs/{kind}"}
    return jsonschema.Draft202012Validator(sub)


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _validate(doc, kind):
    err = best_match(_validator(kind).iter_errors(doc))
    if err is None:
        return
    path = list(err.absolute_path)
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path.append(missing[0])
    raise ConfigError(err.message, _pointer(path))


def _resolve(doc, pointer):
    """Follow a JSON pointer; returns ``(parent, key)`` with the key present."""
    parts = [p.replace("~1", "/").replace("~0", "~") for p in pointer.split("/")[1:]]
    node = doc
    for i, p in enumerate(parts):
        if isinstance(node, list):
            try:
                p = int(p)
                node[p]
            except (ValueError, IndexError):
                raise ConfigError("no such element", pointer) from None
        elif not isinstance(node, dict) or p not in node:
            raise ConfigError("parameter does not exist in the base scenario", pointer)
        if i == len(parts) - 1:
            return node, p
        node = node[p]
    raise ConfigError("pointer must name a parameter", pointer)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(config):
    """SHA-256 of the canonical JSON text of a (normalized) config."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def default_out_dir():
    return Path(os.environ.get(OUT_DIR_ENV) or "rdlab-out")


# ------------------------------------------------------------------ registry


def _entry(description, problem, expect=None, checks=(), stepper=None):
    cfg = {"description": description, "problem": problem, "checks": list(checks)}
    if stepper:
        cfg["stepper"] = stepper
    if expect:
        cfg["expect"] = expect
    return cfg


REGISTRY = {
    "power": _entry(
        "f = u^p with p = 2 from u0 = 1; blows up at t = 1/(p-1)",
        {"a": 1.0, "reaction": {"builtin": "power", "params": {"p": 2.0}}, "u0": 1.0, "T": 2.0},
        "blowup", ["sign", "positivity", "theorem_probe"],
    ),
    "frank_kamenetskii": _entry(
        "(-u e^v, u e^v) with a=2, b=1, u0=1, v0=0.1 inside the 8ab/(a-b)^2 bound",
        {"a": 2.0, "b": 1.0, "reaction": {"builtin": "frank_kamenetskii"},
         "u0": 1.0, "v0": 0.1, "T": 5.0},
        "completed", ["sign", "positivity", "mass_control", "gronwall", "ratio_trend", "theorem_probe"],
    ),
    "haraux_youkana": _entry(
        "(-u exp(v^g), u exp(v^g)) with g = 1/2 and non-constant u0",
        {"a": 1.0, "b": 1.0, "reaction": {"builtin": "haraux_youkana", "params": {"gamma": 0.5}},
         "u0": "1 + 0.5*cos(pi*x)", "v0": 0.1, "T": 2.0},
        "completed", ["sign", "positivity", "mass_control", "gronwall", "ratio_trend", "theorem_probe"],
    ),
    "robin_lambda": _entry(
        "lambda e^u under a Robin boundary u_n + u = 0, lambda = 0.5",
        {"domain": {"boundary": {"kind": "robin", "alpha": 1.0, "beta": 1.0}},
         "a": 1.0, "reaction": {"builtin": "robin_lambda", "params": {"lambda": 0.5}},
         "u0": 0.0, "T": 2.0},
        "completed", ["sign", "positivity", "theorem_probe"],
    ),
    "mass_control_pair": _entry(
        "(-uv, uv): f + g = 0, reactions vanish on the axes",
        {"a": 1.0, "b": 0.5, "reaction": {"builtin": "mass_control_pair"},
         "u0": "1 + 0.5*cos(pi*x)", "v0": 1.0, "T": 2.0},
        "completed", ["sign", "positivity", "mass_control_strict", "gronwall", "theorem_probe"],
    ),
    "decaying_positive": _entry(
        "f = e^{-t} u from u0 = 1; bounded by exp(1 - e^{-t})",
        {"a": 1.0, "reaction": {"builtin": "decaying_positive"}, "u0": 1.0, "T": 20.0},
        "completed", ["sign", "positivity", "max_principle_super", "theorem_probe"],
    ),
}


def registry_config(name):
    try:
        entry = REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}", "/name") from None
    return {"name": name, **copy.deepcopy(entry)}


def _user_configs(user_dir):
    out = {}
    if not user_dir:
        return out
    for path in sorted(Path(user_dir).glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        if isinstance(doc, dict) and "problem" in doc and isinstance(doc.get("name"), str):
            out[doc["name"]] = (doc, path)
    return out


def list_scenarios(user_dir=None):
    """Registry entries plus any scenario files in ``user_dir``: ``[{name, description, source}]``."""
    rows = [{"name": n, "description": e["description"], "source": "builtin"} for n, e in REGISTRY.items()]
    for name, (doc, path) in _user_configs(user_dir).items():
        rows.append({"name": name, "description": doc.get("description", ""), "source": str(path)})
    return rows


# ------------------------------------------------------------- normalization


def _normalize_problem(p, seed=None):
    p = copy.deepcopy(p)
    dom = p.setdefault("domain", {})
    length = dom.get("length", 1.0)
    nodes = p.get("nodes")
    dim = dom.get("dim")
    if dim is None:
        sizes = [len(x) for x in (length, nodes) if isinstance(x, list)]
        dim = max(sizes) if sizes else 1
    lengths = length if isinstance(length, list) else [length] * dim
    if len(lengths) == 1:
        lengths = lengths * dim
    if len(lengths) != dim:
        raise ConfigError(f"expected {dim} length(s)", "/problem/domain/length")
    b = dom.get("boundary", "neumann")
    b = {"kind": b} if isinstance(b, str) else dict(b)
    if b["kind"] == "robin":
        if "alpha" not in b or "beta" not in b:
            raise ConfigError("robin boundary needs alpha and beta", "/problem/domain/boundary")
    else:
        b = {"kind": b["kind"]}
    p["domain"] = {"dim": dim, "length": [float(x) for x in lengths], "boundary": b}
    if nodes is None:
        nodes = list(DEFAULT_NODES[dim])
    nodes = nodes if isinstance(nodes, list) else [nodes] * dim
    if len(nodes) == 1:
        nodes = nodes * dim
    if len(nodes) != dim:
        raise ConfigError(f"expected {dim} node count(s)", "/problem/nodes")
    p["nodes"] = nodes
    r = p["reaction"]
    if isinstance(r, dict):
        r = dict(r)
        r.setdefault("params", {})
        p["reaction"] = r
    for key in ("u0", "v0"):
        init = p.get(key)
        if isinstance(init, dict):
            rnd = {"low": 0.0, "high": 1.0, "seed": 0, **init["random"]}
            if seed is not None:
                rnd["seed"] = int(seed)
            if not rnd["low"] < rnd["high"]:
                raise ConfigError("need low < high", f"/problem/{key}/random")
            p[key] = {"random": rnd}
    return p


def _normalize_checks(checks):
    out = []
    for i, c in enumerate(checks):
        c = {"id": c} if isinstance(c, str) else dict(c)
        if c["id"] == "lemma1" and "level" not in c:
            raise ConfigError("lemma1 needs a positive 'level'", f"/checks/{i}/level")
        out.append(c)
    return out


def normalize_scenario(doc, seed=None, stride=None):
    """Validate a scenario document and return it with every default filled in."""
    _validate(doc, "scenario")
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "name": doc["name"],
        "description": doc.get("description", ""),
        "problem": _normalize_problem(doc["problem"], seed),
    }
    step = dict(doc.get("stepper", {}))
    if stride is not None:
        step["stride"] = int(stride)
    try:
        sc = StepperConfig(**{k: tuple(v) if k == "trace_p" else v for k, v in step.items()})
    except RDLabError as exc:
        raise ConfigError(str(exc), "/stepper") from None
    cfg["stepper"] = sc.to_dict()
    cfg["checks"] = _normalize_checks(doc.get("checks", []))
    if "expect" in doc:
        cfg["expect"] = doc["expect"]
    _validate(cfg, "scenario")
    return cfg


# ------------------------------------------------------------------ building


def _parse_expr(text, pointer, params=None):
    try:
        return dsl.parse(text, params)
    except ExpressionSyntaxError as exc:
        err = ConfigError(str(exc), pointer)
        err.offset = exc.offset
        raise err from None


def _build_reaction(r):
    if isinstance(r, str):
        return dsl.ReactionSpec("scalar", (_parse_expr(r, "/problem/reaction"),), {}, (r,))
    params = r.get("params", {})
    if "builtin" in r:
        try:
            return dsl.builtin(r["builtin"], **params)
        except UnknownFamilyError as exc:
            raise ConfigError(exc.args[0], "/problem/reaction/builtin") from None
        except MissingParameterError as exc:
            raise ConfigError(exc.args[0], "/problem/reaction/params") from None
    f = _parse_expr(r["f"], "/problem/reaction/f", params)
    if "g" not in r:
        return dsl.ReactionSpec("scalar", (f,), params, (r["f"],))
    g = _parse_expr(r["g"], "/problem/reaction/g", params)
    return dsl.ReactionSpec("system", (f, g), params, (r["f"], r["g"]))


def _build_initial(grid, init, pointer):
    if isinstance(init, (int, float)):
        vals = np.full(grid.shape, float(init))
    elif isinstance(init, str):
        expr = _parse_expr(init, pointer)
        allowed = {"x", "y"} if grid.dim == 2 else {"x"}
        extra = dsl.variables(expr) - allowed
        if extra:
            raise ConfigError(f"initial data may only use {sorted(allowed)}, found {sorted(extra)}", pointer)
        env = {"x": grid.coords[0], "y": grid.coords[1] if grid.dim == 2 else 0.0}
        try:
            vals = np.broadcast_to(dsl.evaluate(expr, env), grid.shape).astype(float)
        except ArithmeticError as exc:
            raise ConfigError(f"initial data is not finite: {exc}", pointer) from None
    else:
        rnd = init["random"]
        rng = np.random.default_rng(rnd["seed"])
        vals = rng.uniform(rnd["low"], rnd["high"], grid.shape)
    return grid.field(vals)


def build_problem(cfg):
    p = cfg["problem"]
    dom = p["domain"]
    if dom["dim"] == 1:
        grid = Grid.interval(dom["length"][0], p["nodes"][0], dom["boundary"])
    else:
        grid = Grid.rectangle(dom["length"], p["nodes"], dom["boundary"])
    reaction = _build_reaction(p["reaction"])
    if reaction.is_system:
        for key in ("b", "v0"):
            if key not in p:
                raise ConfigError(f"a system needs {key!r}", f"/problem/{key}")
    else:
        for key in ("b", "v0"):
            if key in p:
                raise ConfigError(f"{key!r} only applies to systems", f"/problem/{key}")
        bad = [c["id"] for c in cfg["checks"] if c["id"] in SYSTEM_ONLY]
        if bad:
            raise ConfigError(f"check {bad[0]!r} needs a system", "/checks")
    u0 = _build_initial(grid, p["u0"], "/problem/u0")
    v0 = _build_initial(grid, p["v0"], "/problem/v0") if reaction.is_system else None
    try:
        return Problem(grid, reaction, u0, p["T"], p["a"], p.get("b"), v0, name=cfg["name"])
    except RDLabError as exc:
        raise ConfigError(str(exc), "/problem") from None


@dataclass
class ScenarioSpec:
    name: str
    config: dict
    problem: Problem
    stepper: StepperConfig
    checks: list
    expect: str = None
    config_hash: str = ""
    source: str = None


@dataclass
class SweepSpec:
    name: str
    base: dict
    axes: list  # [(pointer, values)]
    output: str
    config: dict = field(default_factory=dict)
    config_hash: str = ""
    source: str = None

    def points(self):
        """Cartesian product of the axes, in row-major parameter order."""
        if not self.axes:
            return [()]
        return list(itertools.product(*(vals for _, vals in self.axes)))

    def scenario_at(self, point):
        cfg = copy.deepcopy(self.base)
        for (ptr, _), val in zip(self.axes, point):
            parent, key = _resolve(cfg, ptr)
            parent[key] = val
        return parse_config(cfg)


def _scenario_spec(cfg, source=None):
    problem = build_problem(cfg)
    stepper = StepperConfig(**{k: tuple(v) if k == "trace_p" else v for k, v in cfg["stepper"].items()})
    return ScenarioSpec(cfg["name"], cfg, problem, stepper, cfg["checks"], cfg.get("expect"),
                        config_hash(cfg), source)


def _sweep_spec(doc, seed=None, stride=None, source=None, user_dir=None):
    _validate(doc, "sweep")
    base = doc["base"]
    if isinstance(base, str):
        users = _user_configs(user_dir)
        if base in users:
            base = users[base][0]
        else:
            base = registry_config(base)
    base = normalize_scenario(base, seed, stride)
    axes = []
    for i, ax in enumerate(doc.get("axes", [])):
        try:
            _resolve(base, ax["param"])
        except ConfigError as exc:
            raise ConfigError(f"{ax['param']}: {exc}", f"/axes/{i}/param") from None
        axes.append((ax["param"], list(ax["values"])))
    cfg = {"schema_version": SCHEMA_VERSION, "name": doc["name"], "base": base,
           "axes": [{"param": p, "values": v} for p, v in axes],
           "output": doc.get("output", f"{doc['name']}.sweep.csv")}
    spec = SweepSpec(doc["name"], base, axes, cfg["output"], cfg, config_hash(cfg), source)
    # fail early on values that break the base scenario
    for point in spec.points():
        spec.scenario_at(point)
    return spec


def parse_config(doc, seed=None, stride=None, source=None, user_dir=None):
    """Turn an in-memory config document into a :class:`ScenarioSpec` or :class:`SweepSpec`."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "base" in doc or "axes" in doc:
        return _sweep_spec(doc, seed, stride, source, user_dir)
    return _scenario_spec(normalize_scenario(doc, seed, stride), source)


def load_config(path, seed=None, stride=None, user_dir=None):
    """Load a JSON file (or a registry/user scenario name) into a validated spec.

    ``seed`` replaces the seed of every random initial datum and ``stride``
    the record stride; both are echoed into the canonical config.
    """
    p = Path(path)
    if not p.exists():
        users = _user_configs(user_dir)
        if str(path) in users:
            doc, p = users[str(path)]
            return parse_config(doc, seed, stride, str(p), user_dir)
        if str(path) in REGISTRY:
            return parse_config(registry_config(str(path)), seed, stride, f"registry:{path}")
        raise FileNotFoundError(f"no config file or scenario named {str(path)!r}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc, seed, stride, str(p), user_dir)


# ---------------------------------------------------------------------- runs


@dataclass
class RunRecord:
    scenario: str
    config_hash: str
    config: dict
    summary: dict
    reports: dict
    theorem_probe: dict
    exit_status: int
    expected: str = None
    trace_path: str = None
    record_path: str = None
    wall_time: float = 0.0
    trace_text: str = field(default="", repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("trace_text")
        return dg._clean({"schema_version": SCHEMA_VERSION, "kind": "run_record", **d})


def _run_check(check, spec, result):
    cid = check["id"]
    opts = {k: v for k, v in check.items() if k != "id"}
    trace, record = result.trace, result.record
    reaction = spec.problem.reaction
    if cid == "sign":
        return dg.check_sign_condition(trace, **opts).to_dict()
    if cid == "positivity":
        return dg.check_positivity_condition(reaction, **opts).to_dict()
    if cid == "mass_control":
        return dg.check_mass_control(reaction, **opts).to_dict()
    if cid == "mass_control_strict":
        return dg.check_mass_control(reaction, strict=True, **opts).to_dict()
    if cid == "ratio_trend":
        return dg.check_ratio_trend(reaction).to_dict()
    if cid == "gronwall":
        return dg.gronwall_ledger(trace, **opts).to_dict()
    if cid in ("max_principle_sub", "max_principle_super"):
        return dg.max_principle_oracle(record, cid.rsplit("_", 1)[1], **opts).to_dict()
    if cid == "lemma1":
        level = opts.pop("level")
        return dg.lemma1_probe(record, level, **opts).to_dict()
    if cid == "ode_compare":
        cmp = compare_pde_ode(spec.problem, spec.stepper, **opts)
        return dg._clean({"schema_version": SCHEMA_VERSION, "kind": "ode_compare", **asdict(cmp)})
    raise ConfigError(f"unknown check {cid!r}", "/checks")


def trace_json(trace, header):
    cols = {k: trace[k] if k.endswith("_sign") else trace[k].tolist() for k in trace.column_names()}
    doc = {"schema_version": SCHEMA_VERSION, **header, "columns": cols}
    return json.dumps(dg._clean(doc), indent=None, sort_keys=True) + "\n"


def run_scenario(spec, out_dir=None, fmt="csv", write=True):
    """Simulate, run the requested checks and the theorem probe, emit trace and record.

    ``exit_status`` is 3 when the run lands in the counterexample-candidate
    cell, else 2 when the terminal kind differs from ``expect``, else 0.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    t_start = time.perf_counter()
    try:
        result = simulate(spec.problem, spec.stepper)
        reports = {}
        for check in spec.checks:
            if check["id"] != "theorem_probe":
                reports[check["id"]] = _run_check(check, spec, result)
        known = {}
        for cid in ("sign", "positivity", "mass_control"):
            rep = reports.get(cid)
            if rep and rep.get("condition"):
                known[rep["condition"]] = dg.HypothesisReport(
                    rep["condition"], rep["verdict"], rep["witness"], rep["t0_detected"], rep["details"])
        probe = dg.theorem_probe(result.trace, known, terminal=result.terminal)
    except ConfigError:
        raise
    except (RDLabError, ArithmeticError, ValueError) as exc:
        raise ScenarioError(spec.name, exc) from exc
    if probe.counterexample_candidate:
        status = EXIT_COUNTEREXAMPLE
    elif spec.expect and spec.expect != result.terminal:
        status = EXIT_MISMATCH
    else:
        status = EXIT_OK
    header = {"config_hash": spec.config_hash, "scenario": spec.name}
    if fmt == "csv":
        text = result.trace.to_csv(
            header_comment=f"schema_version={SCHEMA_VERSION} config_hash={spec.config_hash} scenario={spec.name}")
    else:
        text = trace_json(result.trace, header)
    rec = RunRecord(spec.name, spec.config_hash, spec.config, result.summary(), reports,
                    probe.to_dict(), status, spec.expect, trace_text=text)
    rec.wall_time = time.perf_counter() - t_start
    if write:
        out = Path(out_dir) if out_dir is not None else default_out_dir()
        out.mkdir(parents=True, exist_ok=True)
        tpath = out / f"{spec.name}.trace.{fmt}"
        rpath = out / f"{spec.name}.record.json"
        rec.trace_path, rec.record_path = str(tpath), str(rpath)
        with open(tpath, "w", newline="") as fh:
            fh.write(text)
        with open(rpath, "w") as fh:
            json.dump(rec.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    log.info("%s: %s (exit %d) in %.2fs", spec.name, result.terminal, status, rec.wall_time)
    return rec


# -------------------------------------------------------------------- sweeps


def _axis_label(ptr):
    return ptr.rstrip("/").rsplit("/", 1)[-1] or ptr


def _sweep_row(spec, index, point, out_dir, fmt):
    row = {"index": index}
    for (ptr, _), val in zip(spec.axes, point):
        row[ptr] = val
    try:
        sc = spec.scenario_at(point)
        sc.name = f"{spec.name}-{index:04d}"
        rec = run_scenario(sc, out_dir, fmt, write=out_dir is not None)
        s = rec.summary
        row.update({
            "terminal": s["terminal"],
            "t_end": s["t_end"],
            "t_est": s["t_est"],
            "max_linf_u": s["max_linf"].get("u"),
            "max_linf_v": s["max_linf"].get("v"),
            "cell": rec.theorem_probe["cell"],
            "exit_status": rec.exit_status,
            "error": "",
        })
    except Exception as exc:  # recorded in the row, the sweep carries on
        log.warning("sweep %s row %d failed: %s", spec.name, index, exc)
        row.update({"terminal": "error", "t_end": None, "t_est": None, "max_linf_u": None,
                    "max_linf_v": None, "cell": None, "exit_status": None,
                    "error": f"{type(exc).__name__}: {exc}"})
    return row


SWEEP_COLUMNS = ("terminal", "t_end", "t_est", "max_linf_u", "max_linf_v", "cell", "exit_status", "error")


def sweep_table(spec, rows, fmt="csv"):
    names = ["index"] + [p for p, _ in spec.axes] + list(SWEEP_COLUMNS)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "sweep": spec.name, "config_hash": spec.config_hash,
               "columns": names, "rows": rows}
        return json.dumps(dg._clean(doc), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} config_hash={spec.config_hash} sweep={spec.name}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow(["" if r.get(k) is None else (repr(r[k]) if isinstance(r[k], float) else r[k])
                    for k in names])
    return buf.getvalue()


def run_sweep(spec, out_dir=None, threads=None, fmt="csv", write=True):
    """Run every point of the sweep; returns rows ordered by parameter index.

    Runs go through a thread pool of ``threads`` workers (default: CPU count,
    at most 8). A failing run becomes a row with ``terminal='error'``.
    """
    points = spec.points()
    threads = threads or min(8, os.cpu_count() or 1)
    run_dir = None
    if write:
        out = Path(out_dir) if out_dir is not None else default_out_dir()
        run_dir = out / f"{spec.name}.runs"
    if threads <= 1 or len(points) == 1:
        rows = [_sweep_row(spec, i, pt, run_dir, fmt) for i, pt in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_sweep_row, spec, i, pt, run_dir, fmt) for i, pt in enumerate(points)]
            rows = [f.result() for f in futures]
    if write:
        path = out / Path(spec.output).with_suffix(f".{fmt}").name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(sweep_table(spec, rows, fmt))
    return rows


def sweep_exit_status(rows):
    """Aggregate exit status: 3 beats 2 beats 0; errored rows count as mismatches."""
    codes = [r["exit_status"] if r["exit_status"] is not None else EXIT_MISMATCH for r in rows]
    if EXIT_COUNTEREXAMPLE in codes:
        return EXIT_COUNTEREXAMPLE
    return EXIT_MISMATCH if EXIT_MISMATCH in codes else EXIT_OK
