"""Scenario-driven command line front end."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from importlib import resources

import click

from .cones import c1_boundary_evidence, check_n, check_npf, cone_fiber, directions_csv
from .density import DEEP_U_GRID, DEFAULT_U_GRID, MCConfig, density_profile, profile_csv
from .expr import ExprSyntaxError, parse
from .probes import FamilyConfig
from .regularity import CONDITIONS, FAILS, HOLDS, INCONCLUSIVE, PairAtPoint, Tolerances, check_condition, slice_pair
from .strata import (
    CATALOG_NAMES,
    AffineStratum,
    CatalogError,
    GraphStratum,
    Interval,
    RegionStratum,
    StratifiedSet,
    catalog,
)

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2
CONE_CHECKS = ("n", "npf", "c1")
OUTCOME_ALIASES = {"HOLDS": HOLDS, "HOLDS_ON_FAMILY": HOLDS, "FAILS": FAILS, "INCONCLUSIVE": INCONCLUSIVE}
U_GRIDS = {"default": DEFAULT_U_GRID, "deep": DEEP_U_GRID}


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- scenario parsing -----------------------------------------------------------


@dataclass
class Scenario:
    S: StratifiedSet
    pairs: list
    basepoints: list
    conditions: list
    family: FamilyConfig = field(default_factory=FamilyConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    cone_grid: list = field(default_factory=list)
    slices: list = field(default_factory=list)
    density: dict | None = None
    expect: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    name: str = ""


def _interval(path, v):
    if isinstance(v, list) and len(v) == 2:
        return Interval(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        try:
            return Interval(
                float(v["lo"]),
                float(v["hi"]),
                bool(v.get("closed_lo", False)),
                bool(v.get("closed_hi", False)),
                bool(v.get("exclude_zero", False)),
            )
        except KeyError as exc:
            raise ScenarioError(f"{path}.{exc.args[0]}", "missing required field") from None
    raise ScenarioError(path, "domain interval must be [lo, hi] or {lo, hi, ...}")


def _req(d, key, path):
    if key not in d:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _inline_set(d, path="set"):
    name = d.get("name", "inline")
    strata = {}
    for i, s in enumerate(_req(d, "strata", path)):
        p = f"{path}.strata[{i}]"
        sname = _req(s, "name", p)
        kind = _req(s, "kind", p)
        try:
            if kind == "graph" or kind == "region":
                try:
                    e = parse(_req(s, "expr", p))
                except ExprSyntaxError as exc:
                    raise ScenarioError(f"{p}.expr", str(exc)) from None
                params = tuple(_req(s, "params", p))
                domain = {k: _interval(f"{p}.domain.{k}", v) for k, v in s.get("domain", {}).items()}
                layout = tuple(_req(s, "layout", p))
                if kind == "graph":
                    strata[sname] = GraphStratum(
                        sname,
                        e,
                        params,
                        domain,
                        layout,
                        s.get("along", params[0] if len(params) == 2 else None),
                        s.get("transverse", params[1] if len(params) == 2 else None),
                    )
                else:
                    strata[sname] = RegionStratum(sname, e, params, domain, layout, _req(s, "bounded", p), float(s.get("lower", 0.0)))
            elif kind == "affine":
                basis = tuple(tuple(float(c) for c in b) for b in _req(s, "basis", p))
                strata[sname] = AffineStratum(sname, basis, tuple(float(c) for c in _req(s, "offset", p)))
            else:
                raise ScenarioError(f"{p}.kind", f"unknown stratum kind {kind!r}")
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScenarioError(p, str(exc)) from None
    pairs = tuple(tuple(x) for x in _req(d, "pairs", path))
    try:
        return StratifiedSet(name, int(d.get("ambient_dim", 3)), strata, pairs, tuple(d.get("notes", ())))
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _point_list(path, v, dim):
    out = []
    for i, p in enumerate(v):
        if isinstance(p, (int, float)):
            p = [float(p)] + [0.0] * (dim - 1)
        if not isinstance(p, list) or len(p) != dim:
            raise ScenarioError(f"{path}[{i}]", f"expected a point with {dim} coordinates")
        out.append(tuple(float(c) for c in p))
    return out


def load_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    setv = _req(data, "set", "")
    if isinstance(setv, str):
        try:
            S = catalog(setv)
        except CatalogError:
            raise ScenarioError("set", f"unknown catalog set {setv!r}; known: {', '.join(CATALOG_NAMES)}") from None
    elif isinstance(setv, dict):
        S = _inline_set(setv)
    else:
        raise ScenarioError("set", "must be a catalog name or an inline set object")
    pairs = [tuple(p) for p in data.get("pairs", [S.pairs[0]])]
    for i, p in enumerate(pairs):
        if p not in S.pairs:
            raise ScenarioError(f"pairs[{i}]", f"{list(p)} is not a declared pair of {S.name}")
    basepoints = _point_list("basepoints", data.get("basepoints", [[0.0] * S.ambient_dim]), S.ambient_dim)
    conditions = list(data.get("conditions", []))
    for i, c in enumerate(conditions):
        base = c.split("(")[0]
        if base not in CONDITIONS and c not in CONE_CHECKS:
            raise ScenarioError(f"conditions[{i}]", f"unknown condition {c!r}")
    try:
        family = FamilyConfig.from_dict(data.get("family", {}))
    except TypeError as exc:
        raise ScenarioError("family", str(exc)) from None
    try:
        tols = Tolerances.from_dict(data.get("tolerances"))
    except TypeError as exc:
        raise ScenarioError("tolerances", str(exc)) from None
    cone_grid = _point_list("cone.grid", data.get("cone", {}).get("grid", []), S.ambient_dim)
    slices = [float(a) for a in data.get("slices", [])]
    density = data.get("density")
    if density is not None:
        if not isinstance(density, dict):
            raise ScenarioError("density", "must be an object")
        st = density.get("stratum", _top_stratum(S))
        if st not in S.strata:
            raise ScenarioError("density.stratum", f"unknown stratum {st!r}")
        _u_grid(density.get("u_grid", "default"), "density.u_grid")
    expect = dict(data.get("expect", {}))
    for k, v in expect.items():
        if not isinstance(v, str):
            raise ScenarioError(f"expect.{k}", "expected outcome must be a string")
    return Scenario(
        S, pairs, basepoints, conditions, family, tols, cone_grid, slices, density, expect, dict(data.get("labels", {})), data.get("name", S.name)
    )


def _top_stratum(S):
    return max(S.strata.values(), key=lambda s: (s.dim, s.kind != "region")).name


def _u_grid(v, path="u_grid"):
    if isinstance(v, str):
        if v in U_GRIDS:
            return U_GRIDS[v]
        try:
            v = [float(c) for c in v.split(",")]
        except ValueError:
            raise ScenarioError(path, f"unknown u-grid {v!r}") from None
    grid = tuple(float(c) for c in v)
    if len(grid) < 5 or any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise ScenarioError(path, "u-grid must hold at least 5 strictly decreasing positive radii")
    return grid


# -- execution ------------------------------------------------------------------


@dataclass
class Row:
    id: str
    check: str
    outcome: str
    witness: str = ""
    limit: str = ""
    label: str = ""
    notes: tuple = ()


@dataclass
class Report:
    name: str
    rows: list = field(default_factory=list)
    curve_rows: list = field(default_factory=list)
    cone_csv: dict = field(default_factory=dict)
    density: dict | None = None
    density_csv: str = ""
    notes: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    errors: int = 0


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return "" if v is None else str(v)


def _check_id(cond, sc: Scenario, pair, x0):
    if len(sc.pairs) == 1 and len(sc.basepoints) == 1:
        return cond
    return f"{cond}:{pair[0]},{pair[1]}@{','.join(f'{c:g}' for c in x0)}"


def _add_verdict(rep, rid, v, label):
    rep.rows.append(Row(rid, v.condition, v.outcome, v.witness or "", _fmt(v.limit), label, v.notes))
    for c in v.curves:
        est = c.estimate
        rep.curve_rows.append(
            [rid, c.label, c.status, est.kind if est else "", _fmt(est.value) if est and est.value is not None else "", c.samples]
        )


def run_conditions(sc: Scenario, rep: Report):
    for pair in sc.pairs:
        for x0 in sc.basepoints:
            P = PairAtPoint(sc.S, pair, x0, sc.family)
            for cond in sc.conditions:
                if cond in CONE_CHECKS:
                    continue
                rid = _check_id(cond, sc, pair, x0)
                try:
                    v = check_condition(P, cond, None, sc.tolerances)
                except Exception as exc:  # reported, not fatal
                    rep.rows.append(Row(rid, cond, f"ERROR: {exc}", label=sc.labels.get(rid, "")))
                    rep.errors += 1
                    continue
                _add_verdict(rep, rid, v, sc.labels.get(rid, ""))


def run_cones(sc: Scenario, rep: Report):
    conds = [c for c in sc.conditions if c in CONE_CHECKS]
    for pair in sc.pairs:
        P = PairAtPoint(sc.S, pair, sc.basepoints[0], sc.family)
        for cond in conds:
            rid = cond if len(sc.pairs) == 1 else f"{cond}:{pair[0]},{pair[1]}"
            label = sc.labels.get(rid, "")
            try:
                if cond == "n":
                    for x0 in sc.basepoints:
                        r = check_n(P, x0)
                        cid = rid if len(sc.basepoints) == 1 else f"{rid}@{x0[0]:g}"
                        wit = r.details.get("witness", "")
                        lim = (
                            f"cone slopes {r.details['cone_slopes'][:1]}..{r.details['cone_slopes'][-1:]} vs fibre {r.details['tangent_slopes']}"
                            if "cone_slopes" in r.details
                            else ""
                        )
                        rep.rows.append(Row(cid, "n", r.outcome, wit, lim, sc.labels.get(cid, label), r.notes))
                elif cond == "npf":
                    grid = sc.cone_grid or sc.basepoints
                    r = check_npf(P, grid)
                    dims = ",".join("?" if d is None else str(d) for d in r.details["dimensions"])
                    wit = f"dimension jump between {r.details['jumps'][0]['between']}" if r.details["jumps"] else ""
                    rep.rows.append(Row(rid, "npf", r.outcome, wit, f"dims ({dims}) over {r.details['grid']}", label, r.notes))
                elif cond == "c1":
                    grid = sc.cone_grid or sc.basepoints
                    e = c1_boundary_evidence(P, grid)
                    bad = next((p for p in e.per_point if not p["unique"] or "jump_from" in p), None)
                    wit = ""
                    if bad and bad["witnesses"]:
                        wit = f"at {bad['along']:g}: planes of {bad['witnesses'][0]} and {bad['witnesses'][1]} differ by {bad['spread']:.3g} rad"
                    elif bad and "jump_from" in bad:
                        wit = f"limit plane jumps between {bad['jump_from']:g} and {bad['along']:g}"
                    elif bad:
                        wit = f"at {bad['along']:g}: no convergent limit plane"
                    rep.rows.append(Row(rid, "c1", e.verdict, wit, "", label, e.notes))
            except Exception as exc:
                rep.rows.append(Row(rid, cond, f"ERROR: {exc}", label=label))
                rep.errors += 1
        for x0 in sc.cone_grid or sc.basepoints:
            try:
                cf = cone_fiber(P, x0)
            except Exception:
                continue
            rep.cone_csv[f"{pair[0]}_{pair[1]}_{x0[0]:g}"] = directions_csv(cf)


def cone_dimensions(sc: Scenario):
    P = PairAtPoint(sc.S, sc.pairs[0], sc.basepoints[0], sc.family)
    return [cone_fiber(P, x0).dimension for x0 in (sc.cone_grid or sc.basepoints)]


def run_slices(sc: Scenario, rep: Report):
    for pair in sc.pairs:
        P = PairAtPoint(sc.S, pair, sc.basepoints[0], sc.family)
        for a in sc.slices:
            rid = f"slice({a:g}):b"
            try:
                sp = slice_pair(P, a)
                if not sp.roots:
                    raise ValueError(sp.errors[0] if sp.errors else "empty slice")
                v = check_condition(sp, "b", None, sc.tolerances)
            except Exception as exc:
                rep.rows.append(Row(rid, "b", f"ERROR: {exc}", label=sc.labels.get(rid, "")))
                rep.errors += 1
                continue
            _add_verdict(rep, rid, replace(v, condition=f"b on slice y={a:g}z"), sc.labels.get(rid, ""))


def run_density(sc: Scenario, rep: Report, mc: MCConfig):
    d = sc.density
    if d is None:
        return
    A = sc.S[d.get("stratum", _top_stratum(sc.S))]
    X = sc.S[d.get("along", next(p[1] for p in sc.S.pairs if sc.S[p[1]].kind == "affine"))]
    grid = d.get("grid", [0.0])
    u_grid = _u_grid(d.get("u_grid", "default"), "density.u_grid")
    try:
        prof = density_profile(A, X, grid, u_grid, mc)
    except Exception as exc:
        rep.rows.append(Row("density", "density", f"ERROR: {exc}"))
        rep.errors += 1
        return
    outcome = "JUMP" if prof.jump else "CONSTANT"
    wit = ""
    if prof.jump:
        i, j, diff, se = prof.jumps[0]
        wit = f"between {prof.estimates[i].center[0]:g} and {prof.estimates[j].center[0]:g}: |diff| {diff:.4g} > 3 x {se:.2g}"
    rep.rows.append(Row("density", "density", outcome, wit, "", sc.labels.get("density", "")))
    rep.density = {
        "stratum": A.name,
        "u_grid": list(u_grid),
        "N": mc.N,
        "seed": mc.seed,
        "points": [
            {
                "center": list(e.center),
                "theta": e.theta,
                "stderr": e.stderr,
                "classification": e.classification,
                "dropped_samples": e.dropped,
                "values": list(e.values),
            }
            for e in prof.estimates
        ],
        "jump": prof.jump,
    }
    rep.density_csv = profile_csv(prof)


def _norm_outcome(v):
    return OUTCOME_ALIASES.get(v.strip().upper(), v.strip().upper())


def evaluate_expectations(sc: Scenario, rep: Report):
    by_id = {r.id: r for r in rep.rows}
    for k, want in sc.expect.items():
        got = by_id.get(k)
        ok = got is not None and _norm_outcome(got.outcome) == _norm_outcome(want)
        rep.expectations.append({"check": k, "expected": want, "got": got.outcome if got else "missing", "ok": ok})


def execute(sc: Scenario, parts, mc: MCConfig) -> Report:
    rep = Report(sc.name)
    rep.notes.extend(sc.S.notes)
    rep.notes.append("FAILS needs one conclusive witness curve; HOLDS_ON_FAMILY is evidence over the probe family, not a proof.")
    rep.notes.append("The probe family is an assumption: limits over all definable arcs cannot be exhausted numerically.")
    if "check" in parts:
        run_conditions(sc, rep)
    if "cone" in parts:
        run_cones(sc, rep)
    if "slice" in parts:
        run_slices(sc, rep)
    if "density" in parts:
        run_density(sc, rep, mc)
    for r in rep.rows:
        for n in r.notes:
            if n not in rep.notes and not n.startswith("FAILS needs"):
                rep.notes.append(n)
    evaluate_expectations(sc, rep)
    return rep


# -- rendering ------------------------------------------------------------------


def _md_cell(s):
    return str(s).replace("|", "\\|")


def render_md(rep: Report) -> str:
    lines = [f"# stratcheck report: {rep.name}", ""]
    if rep.rows:
        lines += ["| check | property | outcome | witness | limit |", "|---|---|---|---|---|"]
        for r in rep.rows:
            lines.append(f"| {_md_cell(r.id)} | {_md_cell(r.label)} | {_md_cell(r.outcome)} | {_md_cell(r.witness)} | {_md_cell(r.limit)} |")
        lines.append("")
    if rep.density:
        d = rep.density
        lines += [f"## Density of {d['stratum']} (N={d['N']}, seed={d['seed']})", ""]
        lines += ["| point | theta | stderr | classification |", "|---|---|---|---|"]
        for p in d["points"]:
            th = "inconclusive" if p["theta"] is None else f"{p['theta']:.4f}"
            lines.append(f"| {', '.join(f'{c:g}' for c in p['center'])} | {th} | {p['stderr']:.2g} | {p['classification']} |")
        lines += ["", f"Profile: {'jump flagged' if d['jump'] else 'no jump'}.", ""]
    if rep.expectations:
        met = sum(e["ok"] for e in rep.expectations)
        lines += [f"## Expectations: {met}/{len(rep.expectations)} met", ""]
        for e in rep.expectations:
            lines.append(f"- {'ok' if e['ok'] else 'MISMATCH'} {e['check']}: expected {e['expected']}, got {e['got']}")
        lines.append("")
    if rep.notes:
        lines += ["## Notes", ""] + [f"- {n}" for n in rep.notes] + [""]
    return "\n".join(lines)


def render_json(rep: Report) -> str:
    doc = {
        "name": rep.name,
        "checks": [
            {"id": r.id, "condition": r.check, "outcome": r.outcome, "witness": r.witness, "limit": r.limit, "label": r.label}
            for r in rep.rows
        ],
        "density": rep.density,
        "expectations": {
            "total": len(rep.expectations),
            "met": sum(e["ok"] for e in rep.expectations),
            "entries": rep.expectations,
        },
        "notes": rep.notes,
    }
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(type(o))


def curves_csv(rep: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "curve", "status", "classification", "value", "samples"])
    w.writerows(rep.curve_rows)
    return buf.getvalue()


def write_outputs(rep: Report, out: str):
    os.makedirs(out, exist_ok=True)
    files = {"report.md": render_md(rep), "summary.json": render_json(rep) + "\n", "curves.csv": curves_csv(rep)}
    for key, text in sorted(rep.cone_csv.items()):
        files[f"cone_{key}.csv"] = text
    if rep.density_csv:
        files["density_profile.csv"] = rep.density_csv
    for name, text in files.items():
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def exit_code(rep: Report) -> int:
    if rep.expectations:
        return EXIT_OK if all(e["ok"] for e in rep.expectations) else EXIT_MISMATCH
    return EXIT_OK if rep.errors == 0 else EXIT_MISMATCH


# -- click wiring -----------------------------------------------------------------


def _read_scenario(path):
    if path in bundled_scenarios():
        text = resources.files("stratcheck").joinpath("scenarios", path).read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ScenarioError("scenario", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return load_scenario(data)


def bundled_scenarios():
    return sorted(p.name for p in resources.files("stratcheck").joinpath("scenarios").iterdir() if p.name.endswith(".json"))


def _floats(text, what):
    try:
        return [float(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise ScenarioError(what, f"expected comma-separated numbers, got {text!r}") from None


def _adhoc(set_name, pair, at, conditions, grid=None, slices=None, density=None):
    data = {"set": set_name}
    if pair:
        data["pairs"] = [pair.split(",")]
    if at is not None:
        data["basepoints"] = [float(v) for v in _floats(at, "--at")]
    if conditions:
        data["conditions"] = [c.strip() for c in conditions.split(",") if c.strip()]
    if grid:
        data["cone"] = {"grid": _floats(grid, "--grid")}
    if slices:
        data["slices"] = slices
    if density:
        data["density"] = density
    return load_scenario(data)


def _common(f):
    opts = [
        click.option("--out", "out", type=click.Path(file_okay=False), default=None, help="Directory for report files."),
        click.option("--seed", type=int, default=None, help="Monte Carlo seed."),
        click.option("--tol", type=float, default=None, help="Limit tolerance (relative)."),
        click.option("--samples", type=int, default=None, help="Monte Carlo samples per radius and point."),
        click.option("--threads", type=int, default=None, help="Worker threads (env STRATCHECK_THREADS)."),
        click.option("--format", "fmt", type=click.Choice(["md", "json", "csv"]), default="md", help="Format printed to stdout."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _finish(sc: Scenario, parts, out, seed, tol, samples, threads, fmt):
    if tol is not None:
        sc.tolerances = replace(sc.tolerances, tol=tol)
    d = sc.density or {}
    mc = MCConfig(
        N=samples if samples is not None else int(d.get("N", 1_000_000)),
        seed=seed if seed is not None else int(d.get("seed", 51966)),
        threads=threads,
    )
    rep = execute(sc, parts, mc)
    if out:
        write_outputs(rep, out)
    text = {"md": render_md, "json": render_json, "csv": curves_csv}[fmt](rep)
    click.echo(text)
    return exit_code(rep)


def _guard(fn):
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except ScenarioError as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        sys.exit(code)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.version_option("0.1.0", prog_name="stratcheck")
def main():
    """Check stratification regularity conditions on catalog or scenario sets."""


@main.command()
@click.argument("scenario", required=False)
@click.option("--set", "set_name", default=None, help="Catalog set name.")
@click.option("--pair", default=None, help="Pair Y,X (default: first declared pair).")
@click.option("--at", default=None, help="Base point as comma-separated coordinates.")
@click.option("--conditions", default="a,bpi,b,r,w", show_default=True)
@_common
@_guard
def check(scenario, set_name, pair, at, conditions, out, seed, tol, samples, threads, fmt):
    """Regularity verdicts: a, bpi, b, r, w, re, rint."""
    sc = _read_scenario(scenario) if scenario else _adhoc(_need_set(set_name), pair, at, conditions)
    return _finish(sc, ("check",), out, seed, tol, samples, threads, fmt)


@main.command()
@click.argument("scenario", required=False)
@click.option("--set", "set_name", default=None)
@click.option("--pair", default=None)
@click.option("--grid", default="0,0.1,0.3", show_default=True, help="Along-coordinates of base points.")
@_common
@_guard
def cone(scenario, set_name, pair, grid, out, seed, tol, samples, threads, fmt):
    """Cone fibres, (n), (npf) and C^1-boundary evidence."""
    if scenario:
        sc = _read_scenario(scenario)
    else:
        sc = _adhoc(_need_set(set_name), pair, None, "n,npf,c1", grid)
        sc.basepoints = sc.cone_grid[:1]
    dims = cone_dimensions(sc)
    code = _finish(sc, ("cone",), out, seed, tol, samples, threads, fmt)
    if fmt == "md":
        click.echo("dimension vector: (" + ",".join("?" if d is None else str(d) for d in dims) + ")")
    return code


@main.command()
@click.argument("scenario", required=False)
@click.option("--set", "set_name", default=None)
@click.option("--at", default=None, help="Comma-separated along-coordinates of the points.")
@click.option("--stratum", default=None, help="Stratum whose density is estimated.")
@click.option("--u-grid", "u_grid", default="default", show_default=True, help="default, deep or comma-separated radii.")
@_common
@_guard
def density(scenario, set_name, at, stratum, u_grid, out, seed, tol, samples, threads, fmt):
    """Density estimates and profiles along X."""
    if scenario:
        sc = _read_scenario(scenario)
    else:
        d = {"grid": _floats(at or "0", "--at"), "u_grid": u_grid}
        if stratum:
            d["stratum"] = stratum
        sc = _adhoc(_need_set(set_name), None, None, None, density=d)
    return _finish(sc, ("density",), out, seed, tol, samples, threads, fmt)


@main.command(name="slice")
@click.argument("scenario", required=False)
@click.option("--set", "set_name", default=None)
@click.option("--pair", default=None)
@click.option("--a", "slopes", default="0.5", show_default=True, help="Comma-separated slice slopes a in y = a z.")
@_common
@_guard
def slice_cmd(scenario, set_name, pair, slopes, out, seed, tol, samples, threads, fmt):
    """Codimension-one slices {y = a z} through X and their (b) verdicts."""
    sc = _read_scenario(scenario) if scenario else _adhoc(_need_set(set_name), pair, None, None, slices=_floats(slopes, "--a"))
    return _finish(sc, ("slice",), out, seed, tol, samples, threads, fmt)


@main.command()
@click.argument("scenario")
@_common
@_guard
def report(scenario, out, seed, tol, samples, threads, fmt):
    """Full bundle: checks, cones, slices and density."""
    sc = _read_scenario(scenario)
    return _finish(sc, ("check", "cone", "slice", "density"), out, seed, tol, samples, threads, fmt)


main.add_command(report, name="run")


@main.command(name="scenarios")
def list_scenarios():
    """List bundled scenario files."""
    for name in bundled_scenarios():
        click.echo(name)


def _need_set(name):
    if not name:
        raise ScenarioError("set", "missing required field (give a scenario file or --set)")
    return name


if __name__ == "__main__":
    main()
