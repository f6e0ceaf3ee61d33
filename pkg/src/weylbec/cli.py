"""Command-line interface: ``weylbec {weyl,arcs,spectrum,verify}``.

Exit codes: 0 success (verify: all vectors equal), 1 verify verdict failed,
2 assumption violated, 3 numerical failure, 4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .chern import DEFAULT_SURFACE_GRID
from .correspondence import FLOW_METHODS, VerifyOptions, choose_basis, verify_bec, weyl_charges
from .edge import DEFAULT_SAMPLES, DEFAULT_SITES, Loop, spectral_flow_analytic, spectral_flow_numeric, spectrum_rows
from .errors import AssumptionViolated, ConfigError, NumericalError, WeylBecError
from .expr import SurfacePair, load_model_file, parse_expr
from .fermiarc import arc_rows
from .model import LocalFormModel
from .presets import get_preset
from .weyl import DEFAULT_GRID, check_assumptions

EXIT_OK, EXIT_FAIL, EXIT_ASSUMPTION, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2, 3, 4

CONFIG_KEYS = {"name", "a", "b", "model", "grid", "sites", "samples", "base", "order", "radius",
               "flow", "out", "loop", "full"}


@dataclass
class RunConfig:
    name: str
    pair: SurfacePair
    grid_n: int = DEFAULT_GRID
    n_sites: int = DEFAULT_SITES
    loop_samples: int = DEFAULT_SAMPLES
    base: tuple[float, float] | None = None
    order: list | None = None
    radius: float | None = None
    flow_method: str = "numeric"
    out: Path = field(default_factory=lambda: Path("."))
    loop: str | None = None
    full: bool = False

    def validate(self):
        for label, v in (("grid", self.grid_n), ("sites", self.n_sites), ("samples", self.loop_samples)):
            if not isinstance(v, int) or v <= 0:
                raise ConfigError(f"--{label} must be a positive integer")
        if self.grid_n < 64:
            raise ConfigError("--grid must be at least 64")
        if self.radius is not None and not self.radius > 0:
            raise ConfigError("--radius must be positive")
        if self.flow_method not in FLOW_METHODS:
            raise ConfigError(f"--flow must be one of {FLOW_METHODS}")


def parse_number(text) -> float:
    """A constant in the expression grammar, e.g. ``3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)
    e = parse_expr(str(text))
    if not e.is_constant():
        raise ConfigError(f"expected a constant, got {text!r}")
    return float(e(0.0, 0.0))


def parse_point(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected a point 'kx,ky', got {text!r}")
    return parse_number(parts[0]), parse_number(parts[1])


def parse_order(text) -> list:
    if isinstance(text, list):
        return [parse_point(p) for p in text]
    return [parse_point(p) for p in str(text).split(";") if p.strip()]


def build_config(args) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def pick(flag, key):
        v = getattr(args, flag, None)
        return v if v is not None else data.get(key)

    model = pick("model", "model")
    a_text, b_text = pick("a", "a"), pick("b", "b")
    preset = None
    if model is not None:
        if a_text is not None or b_text is not None:
            raise ConfigError("give either --model or --a/--b, not both")
        if Path(str(model)).suffix == ".json" and Path(str(model)).exists():
            name, pair, _ = load_model_file(model)
        else:
            preset = get_preset(str(model))
            name, pair = preset.name, preset.pair
    elif a_text is not None and b_text is not None:
        pair = SurfacePair.parse(str(a_text), str(b_text))
        name = str(data.get("name", "custom"))
    else:
        raise ConfigError("a model is required: --model NAME or both --a and --b")

    base = pick("base", "base")
    order = pick("order", "order")
    cfg = RunConfig(
        name=name,
        pair=pair,
        grid_n=int(pick("grid", "grid") or DEFAULT_GRID),
        n_sites=int(pick("sites", "sites") or DEFAULT_SITES),
        loop_samples=int(pick("samples", "samples") or DEFAULT_SAMPLES),
        base=parse_point(base) if base is not None else (preset.base if preset else None),
        order=parse_order(order) if order is not None else (list(preset.order) if preset and preset.order else None),
        radius=parse_number(pick("radius", "radius")) if pick("radius", "radius") is not None else None,
        flow_method=str(pick("flow", "flow") or "numeric"),
        out=Path(pick("out", "out") or "."),
        loop=pick("loop", "loop"),
        full=bool(getattr(args, "full", False) or data.get("full", False)),
    )
    cfg.validate()
    return cfg


# -- output helpers --------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return obj
    return obj


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _model_dict(cfg: RunConfig):
    return {"name": cfg.name, "a": str(cfg.pair.a), "b": str(cfg.pair.b)}


# -- commands ----------------------------------------------------------------------

def cmd_weyl(cfg: RunConfig) -> int:
    report = check_assumptions(cfg.pair, cfg.grid_n, base=cfg.base)
    weyl = report.weyl
    charges = weyl_charges(LocalFormModel(cfg.pair, cfg.name), weyl)
    write_json(cfg.out / "weyl.json", {
        "model": _model_dict(cfg),
        "points": [p.as_dict() for p in weyl],
        "projected": [list(p) for p in weyl.projected],
        "multiplicities": weyl.multiplicities,
        "charge_total": int(sum(charges)),
        "assumptions": report.as_dict(),
    })
    print(f"{len(weyl)} Weyl point(s); charges {charges}")
    report.raise_if_failed()
    return EXIT_OK


def cmd_arcs(cfg: RunConfig) -> int:
    report = check_assumptions(cfg.pair, cfg.grid_n, base=cfg.base)
    report.raise_if_failed()
    comps = report.components
    write_csv(cfg.out / "arcs.csv", ["component_id", "kind", "epsilon", "kx", "ky"], arc_rows(comps))
    write_json(cfg.out / "arcs.json", {
        "model": _model_dict(cfg),
        "projected": [list(p) for p in report.weyl.projected],
        "components": [c.as_dict() for c in comps],
    })
    print(f"{len(comps)} component(s); epsilons {[c.epsilon for c in comps]}")
    return EXIT_OK


def parse_loop(spec: str, n_samples: int) -> Loop:
    """``x:<ky>``, ``y:<kx>``, ``circle:<kx>,<ky>,<r>`` or ``point:<kx>,<ky>``."""
    kind, _, rest = str(spec).partition(":")
    try:
        if kind == "x":
            return Loop.horizontal(parse_number(rest), n_samples)
        if kind == "y":
            return Loop.vertical(parse_number(rest), n_samples)
        if kind == "circle":
            x, y, r = rest.split(",")
            return Loop.circle((parse_number(x), parse_number(y)), parse_number(r), n_samples)
        if kind == "point":
            return Loop.constant(parse_point(rest), n_samples)
    except ValueError as exc:
        raise ConfigError(f"bad loop spec {spec!r}: {exc}") from exc
    raise ConfigError(f"loop spec must start with x:, y:, circle: or point:, got {spec!r}")


def default_loop(cfg: RunConfig) -> Loop:
    """A circle around the second projected Weyl point, else the x-loop at ky = 0."""
    report = check_assumptions(cfg.pair, cfg.grid_n, base=cfg.base)
    if len(report.weyl.projected) >= 2:
        basis = choose_basis(cfg.pair, report.weyl, base=report.base_point, order=cfg.order,
                             radius=cfg.radius, n_samples=cfg.loop_samples)
        return basis.circle(1)
    return Loop.horizontal(0.0, cfg.loop_samples)


def cmd_spectrum(cfg: RunConfig) -> int:
    loop = parse_loop(cfg.loop, cfg.loop_samples) if cfg.loop else default_loop(cfg)
    rows = spectrum_rows(cfg.pair, loop, cfg.n_sites, full=cfg.full)
    write_csv(cfg.out / "spectrum.csv", ["sample_index", "s", "eigenvalue", "left_weight"], rows)
    analytic = spectral_flow_analytic(cfg.pair, loop)
    numeric = spectral_flow_numeric(cfg.pair, loop, cfg.n_sites)
    print(f"loop {loop.label}: spectral flow analytic {analytic}, numeric {numeric}; {len(rows)} rows")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    opts = VerifyOptions(grid_n=cfg.grid_n, n_sites=cfg.n_sites, n_samples=cfg.loop_samples,
                         chern_grid=DEFAULT_SURFACE_GRID, base=cfg.base, order=cfg.order,
                         radius=cfg.radius, flow_method=cfg.flow_method)
    report = verify_bec(cfg.pair, opts, cfg.name)
    write_json(cfg.out / "bec_report.json", report.as_dict())
    vec = report.edge.as_tuple()
    print(f"bulk {report.bulk.as_tuple()} edge {vec} fermi {report.fermi.as_tuple()}: "
          f"{'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"weyl": cmd_weyl, "arcs": cmd_arcs, "spectrum": cmd_spectrum, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="preset (example1, example1-alt, example2, example3, qwz:<n>:<u>) "
                                        "or a JSON model file with name/a/b")
    common.add_argument("--a", help="expression for a(kx, ky)")
    common.add_argument("--b", help="expression for b(kx, ky)")
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--grid", type=int, help=f"torus grid size (default {DEFAULT_GRID})")
    common.add_argument("--sites", type=int, help=f"edge chain length (default {DEFAULT_SITES})")
    common.add_argument("--samples", type=int, help=f"samples per loop (default {DEFAULT_SAMPLES})")
    common.add_argument("--base", help="base point 'kx0,ky0', constants like pi/4 allowed")
    common.add_argument("--order", help="ordering of projected Weyl points 'x,y;x,y;...'")
    common.add_argument("--radius", help="disc radius around projected Weyl points")
    common.add_argument("--flow", choices=FLOW_METHODS, help="spectral-flow method (default numeric)")
    common.add_argument("--out", help="output directory (default .)")

    parser = argparse.ArgumentParser(prog="weylbec", description="Bulk-edge correspondence for Weyl semimetals")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weyl", parents=[common], help="Weyl points, charges, assumption report (weyl.json)")
    sub.add_parser("arcs", parents=[common], help="Fermi-arc components (arcs.csv, arcs.json)")
    sp = sub.add_parser("spectrum", parents=[common], help="edge spectrum along a loop (spectrum.csv)")
    sp.add_argument("--loop", help="x:<ky> | y:<kx> | circle:<kx>,<ky>,<r> | point:<kx>,<ky>")
    sp.add_argument("--full", action="store_true", default=None, help="dump the whole spectrum, not only the gap")
    sub.add_parser("verify", parents=[common], help="compare bulk, edge and Fermi vectors (bec_report.json)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolated as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except WeylBecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
