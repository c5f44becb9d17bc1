"""Command-line front end: point estimates, sweeps, switching points, Pareto.

Exit codes: 0 success (possibly with warnings), 2 validation failure with
a path-qualified message, 3 when --require-crossing is set and no
crossing exists.  Machine output is kg CO2e; human tables print grams.
File outputs are written to a temp file and atomically renamed.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import explorer
from .carbon import CarbonBreakdown, evaluate
from .errors import CarbonModelError, NoCrossing, ValidationError
from .geometry import gates_from_area
from .params import (
    FixtureRegistry,
    Integration,
    Scenario,
    Stacking,
    design_to_document,
    load_scenario,
)

SCHEMA_VERSION = "1"

BREAKDOWN_COLUMNS = (
    "c_die", "c_bonding", "c_packaging", "c_substrate",
    "c_embodied_overall", "c_operational", "c_embodied_amortized", "c_total",
    "cdp", "cep", "tcdp",
)
UNITS = {
    "c_die": "kg", "c_bonding": "kg", "c_packaging": "kg", "c_substrate": "kg",
    "c_embodied_overall": "kg", "c_operational": "kg",
    "c_embodied_amortized": "kg", "c_total": "kg",
    "cdp": "kg*s", "cep": "kg*kWh", "tcdp": "kg*s",
    "gate_count": "gates", "area": "cm^2", "gamma": "1",
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".9g")
    return str(x)


def _grams(kg: float) -> str:
    return f"{kg * 1000.0:,.1f}"


def _breakdown_values(b: CarbonBreakdown) -> list[float]:
    return [
        b.c_die, b.c_bonding, b.c_packaging, b.c_substrate,
        b.c_embodied_overall, b.c_operational, b.c_embodied_amortized, b.c_total,
        b.metrics.cdp, b.metrics.cep, b.metrics.tcdp,
    ]


def _inputs_digest(scenario: Scenario) -> str:
    doc = design_to_document(scenario.design, scenario.profiles, scenario.environment)
    doc["gamma"] = scenario.gamma
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def _write_atomic(path: str, text: str):
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


def _emit(text: str, out: str | None):
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _csv_header(digest: str, columns: list[str], extra_meta: list[str] | None = None) -> list[str]:
    lines = [f"# schema_version={SCHEMA_VERSION}", f"# inputs_digest={digest}"]
    units = " ".join(f"{c}={UNITS[c]}" for c in columns if c in UNITS)
    if units:
        lines.append(f"# units: {units}")
    lines.extend(extra_meta or [])
    lines.append(",".join(columns))
    return lines


def _report_document(scenario: Scenario, breakdown: CarbonBreakdown, warning_list: list[str]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "inputs_digest": _inputs_digest(scenario),
        "gamma": scenario.gamma,
        "breakdown": {
            "c_die_per_die": list(breakdown.c_die_per_die),
            "c_die": breakdown.c_die,
            "c_bonding": breakdown.c_bonding,
            "c_packaging": breakdown.c_packaging,
            "c_substrate": breakdown.c_substrate,
            "c_embodied_overall": breakdown.c_embodied_overall,
            "c_operational": breakdown.c_operational,
            "c_embodied_amortized": breakdown.c_embodied_amortized,
            "c_total": breakdown.c_total,
            "operational_energy_kwh": breakdown.operational_energy_kwh,
        },
        "metrics": dataclasses.asdict(breakdown.metrics),
        "units": {**{k: "kg" for k in (
            "c_die_per_die", "c_die", "c_bonding", "c_packaging", "c_substrate",
            "c_embodied_overall", "c_operational", "c_embodied_amortized", "c_total",
        )}, "operational_energy_kwh": "kWh", "cdp": "kg*s", "cep": "kg*kWh", "tcdp": "kg*s"},
        "warnings": warning_list,
    }


def _estimate_table(scenario: Scenario, breakdown: CarbonBreakdown, breakdown_per_die: bool) -> str:
    design = scenario.design
    lines = [
        f"Carbon estimate  [{design.integration.value}, {len(design.dies)} die(s), gamma={scenario.gamma:g}]",
        f"{'component':<28}{'g CO2e':>16}",
    ]
    if breakdown_per_die:
        for i, (die, c) in enumerate(zip(design.dies, breakdown.c_die_per_die)):
            lines.append(f"{f'die {i + 1} ({die.technology.node_name})':<28}{_grams(c):>16}")
    lines += [
        f"{'die total':<28}{_grams(breakdown.c_die):>16}",
        f"{'bonding':<28}{_grams(breakdown.c_bonding):>16}",
        f"{'packaging':<28}{_grams(breakdown.c_packaging):>16}",
        f"{'substrate':<28}{_grams(breakdown.c_substrate):>16}",
        f"{'embodied (overall)':<28}{_grams(breakdown.c_embodied_overall):>16}",
        f"{'embodied (amortized)':<28}{_grams(breakdown.c_embodied_amortized):>16}",
        f"{'operational':<28}{_grams(breakdown.c_operational):>16}",
        f"{'total':<28}{_grams(breakdown.c_total):>16}",
        "",
        f"metrics: CDP={breakdown.metrics.cdp:.6g} kg*s   "
        f"CEP={breakdown.metrics.cep:.6g} kg*kWh   tCDP={breakdown.metrics.tcdp:.6g} kg*s",
    ]
    return "\n".join(lines) + "\n"


def _collect_warnings(record) -> list[str]:
    seen, out = set(), []
    for w in record:
        text = str(w.message)
        if text not in seen:
            seen.add(text)
            out.append(text)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_estimate(args) -> int:
    registry = FixtureRegistry.bundled()
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        scenario = load_scenario(args.config, registry, gamma=args.gamma)
        breakdown = evaluate(scenario)
    warning_list = _collect_warnings(rec)
    for text in warning_list:
        print(f"warning: {text}", file=sys.stderr)

    if args.format == "table":
        _emit(_estimate_table(scenario, breakdown, args.breakdown), args.out)
    elif args.format == "json":
        _emit(json.dumps(_report_document(scenario, breakdown, warning_list), indent=2) + "\n", args.out)
    else:
        columns = ["component", "value", "unit"]
        rows = [(name, value, UNITS[name]) for name, value in zip(BREAKDOWN_COLUMNS, _breakdown_values(breakdown))]
        if args.breakdown:
            rows = [(f"c_die[{i}]", c, "kg") for i, c in enumerate(breakdown.c_die_per_die)] + rows
        lines = _csv_header(_inputs_digest(scenario), columns)
        lines += [f"{name},{_fmt(value)},{unit}" for name, value, unit in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _parse_axis(text: str) -> explorer.SweepAxis:
    path, sep, raw = text.partition("=")
    if not sep or not raw:
        raise ValidationError("--axis", f"expected <path>=<v1,v2,...>, got {text!r}")
    values = []
    for token in raw.split(","):
        token = token.strip()
        try:
            values.append(float(token))
        except ValueError:
            values.append(token)
    return explorer.SweepAxis(path.strip(), values)


def cmd_sweep(args) -> int:
    registry = FixtureRegistry.bundled()
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        scenario = load_scenario(args.config, registry, gamma=args.gamma)
        axes = [_parse_axis(a) for a in args.axis or []]
        result = explorer.sweep(scenario, axes, registry, baseline=args.baseline)
    for text in _collect_warnings(rec):
        print(f"warning: {text}", file=sys.stderr)

    axis_names = [a.parameter_path for a in result.axes]
    columns = axis_names + list(BREAKDOWN_COLUMNS)
    if result.baseline is not None:
        columns.append("baseline_c_embodied_overall")
    lines = _csv_header(_inputs_digest(scenario), columns)
    for i, row in enumerate(result.rows):
        cells = [_fmt(v) for v in row.values] + [_fmt(v) for v in _breakdown_values(row.breakdown)]
        if result.baseline is not None:
            cells.append(_fmt(result.baseline[i].c_embodied_overall))
        lines.append(",".join(cells))
    for value, integ in result.switching_points:
        lines.append(f"# switching_point value={_fmt(value)} integration={integ}")
    _emit("\n".join(lines) + "\n", args.out)

    if args.plot_out and result.rows:
        x_name = axis_names[0] if axis_names else "index"
        plot_cols = [x_name, "c_embodied_overall", "c_operational", "c_total"]
        plines = _csv_header(_inputs_digest(scenario), plot_cols)
        for i, row in enumerate(result.rows):
            x = row.values[0] if row.values else i
            b = row.breakdown
            plines.append(",".join(_fmt(v) for v in (x, b.c_embodied_overall, b.c_operational, b.c_total)))
        _write_atomic(args.plot_out, "\n".join(plines) + "\n")
    return 0


def cmd_switch(args) -> int:
    registry = FixtureRegistry.bundled()
    lo, hi = args.range
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        scenario = load_scenario(args.config, registry, gamma=args.gamma)
        point = explorer.switching_point(
            scenario,
            Integration(args.integration),
            args.node,
            args.dies,
            lo,
            hi,
            registry,
            stacking=Stacking(args.stacking),
        )
    for text in _collect_warnings(rec):
        print(f"warning: {text}", file=sys.stderr)

    columns = ["integration", "node", "n_dies", "status", "gate_count", "area"]
    lines = _csv_header(_inputs_digest(scenario), columns)
    lines.append(",".join([
        point.integration, point.node, str(point.n_dies), point.status,
        _fmt(point.gate_count), _fmt(point.area_cm2),
    ]))
    lines.append(f"# switching_point value={_fmt(point.gate_count)} integration={point.integration}")
    _emit("\n".join(lines) + "\n", args.out)

    if args.require_crossing and point.status != "crossing":
        raise NoCrossing(f"no crossing on [{lo:g}, {hi:g}] ({point.status})")
    return 0


def cmd_pareto(args) -> int:
    registry = FixtureRegistry.bundled()
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        scenario = load_scenario(args.config, registry, gamma=args.gamma)
        gammas = [float(g) for g in args.gammas.split(",") if g.strip()]
        designs = [("reference", scenario.design)]
        base_die = scenario.design.dies[0]
        total_gates = sum(
            d.gate_count if d.gate_count is not None else gates_from_area(d.explicit_area, d.technology)
            for d in scenario.design.dies
        )
        for name in (args.integrations.split(",") if args.integrations else []):
            integ = Integration(name.strip().lower())
            n = 1 if integ is Integration.MONO_2D else args.dies
            design = explorer.build_design(
                integ, base_die.technology, base_die.wiring, n, total_gates, scenario.design.usage
            )
            designs.append((integ.value, design))
        result = explorer.gamma_pareto(scenario, designs, gammas)
    for text in _collect_warnings(rec):
        print(f"warning: {text}", file=sys.stderr)

    names = [name for name, _ in designs]
    columns = ["gamma"] + [f"tcdp_norm_{n}" for n in names]
    meta = [f"# reference_tcdp={_fmt(result.reference_tcdp)} (kg*s at gamma=1)"]
    lines = _csv_header(_inputs_digest(scenario), columns, extra_meta=meta)
    for i, g in enumerate(result.gammas):
        cells = [_fmt(g)] + [_fmt(result.series[n][i]) for n in names]
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)

    if args.plot_out:
        _write_atomic(args.plot_out, "\n".join(lines) + "\n")
    return 0


def cmd_fixtures(args) -> int:
    registry = FixtureRegistry.bundled()
    if args.fixtures_action == "list":
        print(f"{'node':<8}{'lambda(cm)':>12}{'beta':>8}{'EPA_FEOL':>10}{'maxBEOL':>9}{'D0':>7}{'alpha':>7}")
        for name in registry.node_names():
            t = registry.technology(name)
            print(
                f"{t.node_name:<8}{t.feature_size_cm:>12.2e}{t.gate_area_scaling:>8g}"
                f"{t.epa_feol:>10g}{t.max_beol_layers:>9d}{t.defect_density_d0:>7g}{t.cluster_alpha:>7g}"
            )
        print(f"\nfixture root: {registry.root}")
    return 0


def _range_pair(text: str) -> tuple[float, float]:
    sep = ":" if ":" in text else ","
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected <lo>{sep}<hi>, got {text!r}")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carbon3d",
        description="Life-cycle carbon estimation and design-space exploration for 2D/2.5D/3D ICs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("-c", "--config", required=config_required, help="JSON design document")
        p.add_argument("--gamma", type=float, default=1.0, help="embodied-vs-operational weight (default 1)")
        p.add_argument("--out", help="write the report here (atomic); default stdout")

    p = sub.add_parser("estimate", help="full carbon breakdown for one design")
    common(p)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--breakdown", action="store_true", help="include per-die rows")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="evaluate a cartesian parameter sweep")
    common(p)
    p.add_argument("--axis", action="append", metavar="PATH=V1,V2,...",
                   help="sweep axis; repeatable")
    p.add_argument("--baseline", action="store_true",
                   help="also evaluate the mono-2D equivalent per row")
    p.add_argument("--plot-out", help="write an (x, series...) plot-data CSV here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("switch", help="embodied-carbon switching point vs the 2D baseline")
    common(p)
    p.add_argument("--integration", required=True,
                   choices=[i.value for i in Integration if i is not Integration.MONO_2D])
    p.add_argument("--node", required=True)
    p.add_argument("--dies", type=int, default=2)
    p.add_argument("--stacking", choices=("d2w", "w2w"), default="d2w")
    p.add_argument("--range", type=_range_pair, default=(1e6, 1e11),
                   help="gate-count search range <lo>:<hi> (default 1e6:1e11)")
    p.add_argument("--require-crossing", action="store_true",
                   help="exit 3 when the sign never changes on the range")
    p.set_defaults(func=cmd_switch)

    p = sub.add_parser("pareto", help="normalized tCDP curves over a gamma grid")
    common(p)
    p.add_argument("--gammas", default="0,0.25,0.5,1,2,4")
    p.add_argument("--integrations", default="mono_2d,micro_3d,hybrid_3d,m3d",
                   help="comma-separated variants to compare against the config design")
    p.add_argument("--dies", type=int, default=2, help="die count for the built variants")
    p.add_argument("--plot-out", help="also write the table as plot data")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("fixtures", help="inspect the bundled fixture registry")
    p.add_argument("fixtures_action", choices=("list",))
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoCrossing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CarbonModelError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
