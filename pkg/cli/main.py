# cli/main.py
from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

import typer
try:  # typer>=0.26 vendors click as typer._click
    from typer._click.exceptions import ClickException
except ImportError:  # pragma: no cover - older typer uses upstream click
    from click.exceptions import ClickException

from levelset_lab.arcs import (
    KERNEL_CSV_COLUMNS,
    DyadicLevel,
    TorusPoint,
    arc_membership,
    best_rational_t,
    cell_count,
    enumerate_arcs,
    kernel_bound_report,
)
from levelset_lab.arith import LabeledDiff, as_fraction, format_fraction, gcd_profile
from levelset_lab.census import BOX_CSV_COLUMNS, VARIANTS, box_census
from levelset_lab.config import load_settings_from_env, resolve_config
from levelset_lab.constructions import (
    KINDS,
    Construction,
    build_from_params,
    construction_from_json,
    result_to_json,
)
from levelset_lab.counting import AdmissibleQuery
from levelset_lab.errors import ConfigInvalid, ConfigMissing, LabError
from levelset_lab.events import build_construction_event, build_failed_event, emit
from levelset_lab.exp_sum import eval_kernel
from levelset_lab.graph_lab import (
    build_graph,
    dominant_triple,
    extract_fork,
    fork_f_count_report,
    fork_structure_check,
    graph_to_json,
)
from levelset_lab.probes import admissible_report, run_probe
from levelset_lab.report import ProbeReport, write_csv, write_json, write_report

app = typer.Typer(add_completion=False, no_args_is_help=True, help="levelset-lab CLI")

ARC_CSV_COLUMNS = ["q", "a", "b", "x_lo", "x_hi", "t_lo", "t_hi"]
PROFILE_CSV_COLUMNS = ["a1", "b1", "q1", "a2", "b2", "q2", "d", "m1", "m2", "p", "f", "t_sum", "x_sum"]


def _out_dir(out: Optional[Path]) -> Path:
    return out if out is not None else Path(load_settings_from_env().out_dir)


def _fail(cmd: str, e: Exception, code: int = 2, emit_event: bool = True) -> None:
    if emit_event:
        emit(build_failed_event(kind=cmd, reason=f"{type(e).__name__}: {e}"))
    typer.secho(f"[{cmd}] ERROR: {e}", fg=typer.colors.RED, err=True)
    raise typer.Exit(code=code)


def _finish(cmd: str, report: ProbeReport, out: Path) -> None:
    """Write the report, print its assertion lines, exit 1 if any failed."""
    for path in write_report(report, out):
        typer.echo(f"wrote {path.as_posix()}")
    for a in report.assertions:
        mark = "ok  " if a.passed else "FAIL"
        typer.echo(f"{mark} {a.name}: {a.observed:.6g} vs {a.bound:.6g} (ratio {a.ratio:.3g})  [{a.anchor}]")
    if not report.passed:
        typer.secho(f"[{cmd}] {len(report.failures)} assertion(s) failed", fg=typer.colors.RED)
        raise typer.Exit(code=1)


@app.callback()
def cli_root(verbose: bool = typer.Option(False, "--verbose", "-v", help="DEBUG logging")):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


# -------------------- kernel --------------------

@app.command("kernel")
def cli_kernel(
    N: int = typer.Option(1 << 10, "--N"),
    x: Optional[str] = typer.Option(None, "--x", help="Evaluate at x (num/den or float)"),
    t: Optional[str] = typer.Option(None, "--t", help="Evaluate at t (num/den or float)"),
    Q: int = typer.Option(8, "--Q"),
    l: int = typer.Option(2, "--l"),
    samples: int = typer.Option(1000, "--samples", min=1),
    seed: int = typer.Option(0, "--seed"),
    workers: int = typer.Option(1, "--workers", min=1),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Evaluate the weighted kernel at (x, t), or sample it on and off the arcs of level (Q, l)."""
    try:
        if x is not None or t is not None:
            xv, tv = as_fraction(x or "0"), as_fraction(t or "0")
            val = eval_kernel(N, xv, tv)
            approx, lev = best_rational_t(tv, N)
            typer.echo(f"K({format_fraction(xv)}, {format_fraction(tv)}) = {val.real:.12g} {val.imag:+.12g}i"
                       f"  |K|={abs(val):.12g}  t~{format_fraction(approx)} (Q={lev.Q}, l={lev.l})")
            return
        level = DyadicLevel(Q, l).validate(N)
        rep = kernel_bound_report(N, level, samples, seed, workers=workers)
    except LabError as e:
        _fail("kernel", e)
    report = ProbeReport("kernel", inputs={"N": N, "Q": Q, "l": l, "samples": samples, "seed": seed})
    anchor = "kernel size: |K| <~ 2^(l/2) sqrt(N) on the arcs, <~ sqrt(N) off them"
    report.check_upper("on-arc |K|/(2^(l/2) sqrt N)", anchor, rep.max_on_ratio, 10.0)
    report.check_upper("off-arc |K|/sqrt N", anchor, rep.max_off_ratio, 1.0)
    report.measured = {"on": rep.quantiles(True), "off": rep.quantiles(False),
                       "off_failures": rep.off_failures}
    report.add_table("samples", KERNEL_CSV_COLUMNS, [s.as_row() for s in rep.samples])
    _finish("kernel", report, _out_dir(out))


# -------------------- arcs --------------------

@app.command("arcs")
def cli_arcs(
    N: int = typer.Option(..., "--N"),
    Q: int = typer.Option(..., "--Q"),
    l: int = typer.Option(0, "--l"),
    dyadic: bool = typer.Option(False, "--dyadic", help="Use the dyadic t-annulus"),
    list_cells: bool = typer.Option(False, "--list", help="Write every cell to arcs.csv"),
    classify: Optional[str] = typer.Option(None, "--classify", help="Point 'x,t' to locate"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Enumerate the arc cells of level (Q, l) or classify a point."""
    try:
        level = DyadicLevel(Q, l).validate(N)
        if classify:
            xs, ts = classify.split(",", 1)
            z = TorusPoint(as_fraction(xs), as_fraction(ts))
            cell = arc_membership(z, level, N, dyadic=dyadic)
            if cell is None:
                typer.echo("off-arc")
            else:
                typer.echo(f"q={cell.q} a={cell.a} b={cell.b}")
            return
        if not list_cells:
            typer.echo(f"cells={cell_count(level)}")
            return
        rows = []
        for c in enumerate_arcs(level, N, dyadic=dyadic):
            (xlo, xhi), (tlo, thi) = c.x_interval, c.t_interval
            rows.append({"q": c.q, "a": c.a, "b": c.b, "x_lo": xlo, "x_hi": xhi, "t_lo": tlo, "t_hi": thi})
    except (LabError, ValueError) as e:
        _fail("arcs", e)
    path = write_csv(_out_dir(out) / "arcs.csv", ARC_CSV_COLUMNS, rows)
    typer.echo(f"cells={len(rows)} -> {path.as_posix()}")


# -------------------- profile --------------------

@app.command("profile")
def cli_profile(
    labels: Path = typer.Option(..., "--labels", help="JSON [[a1,b1,q1],[a2,b2,q2]] or a list of such pairs"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """gcd profiles (d, p, f) of labelled difference pairs."""
    try:
        data = json.loads(labels.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        _fail("profile", ConfigMissing(str(e)))
    except json.JSONDecodeError as e:
        _fail("profile", ConfigInvalid(f"{labels}: {e}"))
    pairs = [data] if data and isinstance(data[0][0], int) else data
    rows = []
    try:
        for first, second in pairs:
            l1, l2 = LabeledDiff(*map(int, first)), LabeledDiff(*map(int, second))
            pr = gcd_profile(l1, l2)
            rows.append({
                "a1": l1.a, "b1": l1.b, "q1": l1.q, "a2": l2.a, "b2": l2.b, "q2": l2.q,
                "d": pr.d, "m1": pr.m1, "m2": pr.m2, "p": pr.p, "f": pr.f,
                "t_sum": pr.t_sum, "x_sum": Fraction(pr.x_sum_num, pr.x_sum_den),
            })
            typer.echo(f"{l1.as_tuple()} + {l2.as_tuple()}: d={pr.d} p={pr.p} f={pr.f}")
    except (LabError, TypeError, ValueError) as e:
        _fail("profile", e)
    if out is not None:
        write_csv(out / "profiles.csv", PROFILE_CSV_COLUMNS, rows)


# -------------------- admissible --------------------

@app.command("admissible")
def cli_admissible(
    x: str = typer.Option(..., "--x"),
    t: str = typer.Option(..., "--t"),
    N: int = typer.Option(1 << 10, "--N"),
    Q: int = typer.Option(..., "--Q"),
    l: int = typer.Option(0, "--l"),
    D: int = typer.Option(1, "--D"),
    P: int = typer.Option(1, "--P"),
    F: int = typer.Option(1, "--F"),
    C_t: str = typer.Option("1", "--C-t"),
    C_x: str = typer.Option("1", "--C-x"),
    mode: str = typer.Option("intervals", "--mode", help="intervals | fractions"),
    constant: float = typer.Option(64.0, "--constant", help="Slack constant of the bound checks"),
    log_power: Optional[int] = typer.Option(None, "--log-power", help="Default: LAB_LOG_BUDGET"),
    workers: int = typer.Option(1, "--workers", min=1),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Admissible (q1, q2) pairs for (x, t) and the separated-representation count, checked against their bounds."""
    try:
        power = load_settings_from_env().log_budget if log_power is None else log_power
        query = AdmissibleQuery(as_fraction(x), as_fraction(t), N, DyadicLevel(Q, l).validate(N),
                                D, P, F, as_fraction(C_t), as_fraction(C_x))
        report = admissible_report(query, mode=mode, constant=constant, log_power=power, workers=workers)
    except LabError as e:
        _fail("admissible", e)
    m = report.measured
    typer.echo(f"pairs={m['pairs']} bound={m['count_bound']:.6g} ratio={m['pairs'] / m['count_bound']:.3g}")
    typer.echo(f"L_separated={m['separated']} bound={m['separated_bound']:.6g}")
    _finish("admissible", report, _out_dir(out))


# -------------------- boxes --------------------

@app.command("boxes")
def cli_boxes(
    N: int = typer.Option(1 << 10, "--N"),
    Q: int = typer.Option(..., "--Q"),
    l: int = typer.Option(2, "--l"),
    variants: List[str] = typer.Option(list(VARIANTS), "--variant", help="Repeatable; default all"),
    limit: Optional[int] = typer.Option(None, "--limit", help="Rows written to boxes.csv"),
    workers: int = typer.Option(1, "--workers", min=1),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Per-box counts N_B, N_B*, n_B, n_B*, n~_B at level (Q, l)."""
    try:
        grid = box_census(N, DyadicLevel(Q, l), variants, workers=workers)
    except LabError as e:
        _fail("boxes", e)
    summary = grid.summary().as_dict()
    d = _out_dir(out)
    write_csv(d / "boxes.csv", BOX_CSV_COLUMNS, grid.rows(limit))
    write_json(d / "boxes_summary.json", summary)
    for k in sorted(summary):
        typer.echo(f"{k}={summary[k]}")


# -------------------- construct / graph --------------------

@app.command("construct")
def cli_construct(
    kind: str = typer.Option(..., "--kind", help=" | ".join(KINDS)),
    q: Optional[int] = typer.Option(None, "--q"),
    Q: Optional[int] = typer.Option(None, "--Q"),
    l: Optional[int] = typer.Option(None, "--l"),
    N: Optional[int] = typer.Option(None, "--N"),
    d: Optional[int] = typer.Option(None, "--d"),
    M: Optional[float] = typer.Option(None, "--M"),
    R: Optional[int] = typer.Option(None, "--R"),
    Q1: Optional[int] = typer.Option(None, "--Q1"),
    Q2: Optional[int] = typer.Option(None, "--Q2"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    param: List[str] = typer.Option([], "--param", help="Extra key=value (repeatable)"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Build a named construction and write construction.json."""
    params: Dict[str, object] = {"q": q, "Q": Q, "l": l, "N": N, "d": d, "M": M, "R": R,
                                 "Q1": Q1, "Q2": Q2, "seed": seed}
    try:
        for kv in param:
            k, v = kv.split("=", 1)
            params[k.strip()] = int(v)
        result = build_from_params(kind, params)
    except (LabError, ValueError) as e:
        _fail("construct", e)
    doc = result_to_json(result)
    path = write_json(_out_dir(out) / "construction.json", doc)
    size = result.R if isinstance(result, Construction) else int(doc.get("size", doc.get("hits", 0)))
    emit(build_construction_event(kind=kind, R=size,
                                  params={k: v for k, v in params.items() if v is not None}))
    typer.echo(f"kind={kind} size={size} -> {path.as_posix()}")
    for name, pred in sorted(doc.get("predicted", {}).items()):
        typer.echo(f"  predicted {name} = {pred['value']} ({pred['source']})")


@app.command("graph")
def cli_graph(
    source: Optional[Path] = typer.Option(None, "--input", help="construction.json (default <out>/construction.json)"),
    analyze: bool = typer.Option(False, "--analyze", help="Dominant (D, P, F) triple"),
    fork: bool = typer.Option(False, "--fork", help="Extract a fork at the dominant triple"),
    K: Optional[float] = typer.Option(None, "--K", help="Density parameter; default R^2/(2E)"),
    workers: int = typer.Option(1, "--workers", min=1),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Build the configuration graph of a construction; optionally analyze it."""
    d = _out_dir(out)
    src = source or d / "construction.json"
    try:
        data = json.loads(src.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        _fail("graph", ConfigMissing(str(e)))
    except json.JSONDecodeError as e:
        _fail("graph", ConfigInvalid(f"{src}: {e}"))
    try:
        c = construction_from_json(data)
        g = build_graph(c.points, c.N, c.level, edge_rule=c.edge_rule, rule_name=c.rule_name,
                        workers=workers)
        typer.echo(f"R={g.R} E={g.edge_count} K_emp={g.K_emp:.4g}")
        write_json(d / "graph.json", graph_to_json(g))
        if not (analyze or fork):
            return
        k = K if K is not None else g.K_emp
        dom = dominant_triple(g, k, log_power=load_settings_from_env().log_budget)
        typer.echo(f"dominant triple D={dom.D} P={dom.P} F={dom.F} mass={dom.mass} ratio={dom.ratio:.4g} "
                   f"floor={dom.floor:.4g} floor_ok={dom.floor_ok}")
        summary: Dict[str, object] = {"R": g.R, "E": g.edge_count, "K": k,
                                      "triple": list(dom.key), "mass": dom.mass,
                                      "floor": dom.floor, "floor_ok": dom.floor_ok,
                                      "masses": {" ".join(map(str, t)): m for t, m in dom.masses.items()}}
        if fork:
            fc = extract_fork(g, dom.D, dom.P, dom.F, k)
            st = fork_structure_check(fc)
            fr = fork_f_count_report(fc, g)
            typer.echo(f"fork handle={fc.handle} |S|={len(fc.S)} |S'|={len(fc.S_prime)} "
                       f"|S''|={len(fc.S_dprime)} |S'''|={len(fc.S_tprime)} violations={len(st.violations)}")
            summary["fork"] = {"handle": list(fc.handle), "sizes": [len(fc.S), len(fc.S_prime),
                                                                     len(fc.S_dprime), len(fc.S_tprime)],
                               "violations": len(st.violations), "f_count": fr.size,
                               "f_bound": fr.bound, "residue_classes": fr.residue_classes}
        write_json(d / "graph_analysis.json", summary)
    except LabError as e:
        _fail("graph", e)


# -------------------- probe --------------------

@app.command("probe")
def cli_probe(
    kind: Optional[str] = typer.Option(None, "--kind", help="levelset | lp | conditional | case_bounds"),
    config: Optional[Path] = typer.Option(None, "--config", help="JSON ProbeConfig"),
    N: Optional[int] = typer.Option(None, "--N"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Run a probe: config file, then LAB_* env, then these flags."""
    try:
        cfg = resolve_config(config, probe=kind, N=N, seed=seed, workers=workers,
                             out_dir=out.as_posix() if out is not None else None)
    except LabError as e:
        _fail("probe", e)
    try:
        report = run_probe(cfg)
    except LabError as e:
        # run_probe has already emitted probe.failed
        _fail("probe", e, emit_event=False)
    _finish("probe", report, Path(cfg.out_dir))


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Run the app on argv and return its exit code instead of exiting."""
    try:
        rv = app(args=argv, standalone_mode=False)
    except ClickException as e:
        e.show()
        return e.exit_code
    return rv if isinstance(rv, int) else 0


def main():
    app()


if __name__ == "__main__":
    main()
