"""Command-line front end: ``cpgraphene <subcommand> [--config F] [--out F] [--tol R]``.

Subcommands
    potential  one scenario point
    sweep      the scenario along its sweep axis
    ratio      shielding ratio against the sheet alone, along gap_d
    response   raw response functions on a user grid
    table1     built-in doping regression for Rb above graphene at 1 um

Output is CSV with a ``#``-prefixed provenance header. Exit status: 0 on
success, 1 for configuration errors, 2 when any numerical evaluation failed
(rows that failed carry the message in the ``error`` column).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from . import __version__
from .atoms import AtomFixtureError, load_builtin_atom
from .config import (PLAIN, ConfigError, ScenarioConfig, build_scenario, config_hash, parse_grid,
                     parse_scenario)
from .engine import (PotentialResult, Scenario, SweepRow, evaluate_row, scenario_at, sweep,
                     total_potential)
from .numerics import QuadratureError, QuadratureSpec
from .reflection import (LayerStack, SubstrateKind, SubstrateModel, drude_eps_imag,
                         stack_reflection)
from .sheets import (DomainError, SheetResponse, bilayer_sigma_xx, bilayer_sigma_zz, chi_doped,
                     chi_undoped, f_doped, sheet_alpha)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

POTENTIAL_COLUMNS = ["z_A_m", "gap_d_m", "doping_m-2", "u_over_hbar_rad_s", "u_joule_J",
                     "nonresonant_rad_s", "resonant_rad_s", "err_estimate_rad_s", "ratio", "error"]
TABLE1_COLUMNS = ["case", "doping_m-2", "u_over_hbar_rad_s", "target_rad_s", "rel_deviation",
                  "err_estimate_rad_s", "error"]

#: (label, doping in m^-2 or None for the undoped sheet, reference U/hbar in rad/s)
TABLE1_TARGETS = [
    ("undoped", None, -90.987),
    ("1e10 cm^-2", 1e14, -121.940),
    ("1e11 cm^-2", 1e15, -165.489),
    ("1e12 cm^-2", 1e16, -244.768),
    ("1e13 cm^-2", 1e17, -371.140),
]
TABLE1_HEIGHT = 1e-6


def fmt(value) -> str:
    """Shortest round-tripping text for numbers, '' for missing values."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_csv(stream, columns: Sequence[str], rows: Iterable[Sequence],
              provenance: Sequence[str] = ()) -> None:
    for line in provenance:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def provenance_lines(command: str, cfg: Optional[ScenarioConfig], quad: QuadratureSpec,
                     mode: str = "mixed") -> list[str]:
    lines = [f"cpgraphene {__version__} {command}"]
    if cfg is not None:
        lines.append(f"config_sha256: {config_hash(cfg)}")
    lines.append(f"rel_tol: {quad.rel_tol!r} abs_tol: {quad.abs_tol!r} "
                 f"max_refinements: {quad.max_refinements} mode: {mode}")
    lines.append("units: SI; potentials are U/hbar in rad/s")
    return lines


# -- potential rows ------------------------------------------------------------

def _doping_of(s: Scenario) -> Optional[float]:
    sheet = s.stack.sheet
    return sheet.n if sheet is not None and sheet.n > 0 else None


def potential_row(s: Scenario, row: SweepRow) -> list:
    r: Optional[PotentialResult] = row.result
    base = [s.z_A, s.stack.gap_d, _doping_of(s)]
    if r is None:
        return base + [None] * 6 + [row.error]
    return base + [r.u_over_hbar, r.u_joule, r.nonresonant, r.resonant, r.err_estimate,
                   row.ratio, row.error]


def _sweep_rows(template: Scenario, axis: str, grid, workers: int) -> list[list]:
    rows = sweep(template, axis, grid, workers=workers)
    return [potential_row(scenario_at(template, axis, row.value), row) for row in rows]


def _with_ratio(s: Scenario) -> bool:
    return s.stack.sheet is not None and s.stack.substrate.kind is not SubstrateKind.VACUUM


# -- response dumps --------------------------------------------------------------

def _grid_product(grid: dict, axes: Sequence[str]):
    missing = [a for a in axes if a not in grid or len(grid[a]) == 0]
    if missing:
        raise ConfigError(f"response grid needs values for {', '.join(missing)}")
    return list(itertools.product(*(grid[a] for a in axes)))


def dump_response(kind: str, grid: dict, sheet: Optional[SheetResponse] = None,
                  stack: Optional[LayerStack] = None, doping: Optional[float] = None,
                  substrate: Optional[SubstrateModel] = None) -> tuple[list[str], list[list]]:
    """Evaluate one response function on the Cartesian product of the grid axes.

    Returns ``(columns, rows)``. Kinds and their axes:

    ``chi_undoped``, ``chi_doped``, ``alpha``, ``reflection``: k [1/m], xi [rad/s];
    ``f_doped``: k_tilde, xi_tilde; ``sigma_xx``, ``sigma_zz``: omega [rad/s];
    ``sigma_imag`` (bilayer, Kramers-Kronig) and ``eps_drude``: xi [rad/s].
    """
    sheet = sheet or SheetResponse.undoped()
    if kind == "chi_undoped":
        pts = _grid_product(grid, ("k", "xi"))
        return ["k_m-1", "xi_rad_s", "chi_J-1_m-2"], [
            [k, xi, chi_undoped(k, xi, sheet.v_F, sheet.g)] for k, xi in pts]
    if kind == "chi_doped":
        n = doping if doping is not None else sheet.n
        if not n or n <= 0:
            raise ConfigError("chi_doped needs a positive doping")
        pts = _grid_product(grid, ("k", "xi"))
        return ["k_m-1", "xi_rad_s", "doping_m-2", "chi_J-1_m-2"], [
            [k, xi, n, chi_doped(k, xi, n, sheet.v_F, sheet.g)] for k, xi in pts]
    if kind == "f_doped":
        pts = _grid_product(grid, ("k_tilde", "xi_tilde"))
        rows = []
        for kt, xt in pts:
            f = complex(f_doped(kt, xt))
            rows.append([kt, xt, f.real, f.imag])
        return ["k_tilde", "xi_tilde", "f_real", "f_imag"], rows
    if kind in ("sigma_xx", "sigma_zz"):
        pts = _grid_product(grid, ("omega",))
        if kind == "sigma_xx":
            fn = lambda w: bilayer_sigma_xx(w, sheet.gamma_hop)
        else:
            fn = lambda w: bilayer_sigma_zz(w, sheet.gamma_hop, sheet.d_layer, sheet.v_F)
        return ["omega_rad_s", f"{kind}_S"], [[w, fn(w)] for (w,) in pts]
    if kind == "sigma_imag":
        bilayer = sheet if sheet.kind.value == "bilayer" else SheetResponse.bilayer()
        pts = _grid_product(grid, ("xi",))
        return ["xi_rad_s", "sigma_imag_axis_S"], [[xi, bilayer.sigma_imag_axis(xi)]
                                                   for (xi,) in pts]
    if kind == "eps_drude":
        sub = substrate or SubstrateModel.gold()
        pts = _grid_product(grid, ("xi",))
        return ["xi_rad_s", "eps"], [[xi, drude_eps_imag(sub, xi)] for (xi,) in pts]
    if kind == "alpha":
        pts = _grid_product(grid, ("k", "xi"))
        return ["k_m-1", "xi_rad_s", "alpha"], [[k, xi, sheet_alpha(sheet, k, xi)]
                                                for k, xi in pts]
    if kind == "reflection":
        stack = stack or LayerStack(sheet)
        pts = _grid_product(grid, ("k", "xi"))
        rows = []
        for k, xi in pts:
            r = stack_reflection(stack, k, xi)
            rows.append([k, xi, float(r.r_tm), float(r.r_te)])
        return ["k_m-1", "xi_rad_s", "r_tm", "r_te"], rows
    raise ConfigError(f"unknown response kind {kind!r}; choose from {RESPONSE_KINDS}")


RESPONSE_KINDS = ("chi_undoped", "chi_doped", "f_doped", "sigma_xx", "sigma_zz", "sigma_imag",
                  "eps_drude", "alpha", "reflection")


# -- commands ----------------------------------------------------------------------

def _load_config(args) -> tuple[ScenarioConfig, Scenario]:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    path = Path(args.config)
    try:
        with open(path, "rb") as fh:
            cfg = parse_scenario(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if args.tol is not None:
        cfg = cfg.replace(rel_tol=args.tol)
    if getattr(args, "workers", None):
        cfg = cfg.replace(workers=args.workers)
    try:
        scenario = build_scenario(cfg, base_dir=path.parent)
    except (OSError, KeyError) as exc:
        raise ConfigError(f"atom {cfg.atom!r}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, scenario


def cmd_potential(args, out) -> int:
    cfg, s = _load_config(args)
    if cfg.is_sweep:
        raise ConfigError("the config defines a sweep; use the 'sweep' subcommand")
    rows = [potential_row(s, evaluate_row(s, "z_A", s.z_A))]
    write_csv(out(cfg), POTENTIAL_COLUMNS, rows, provenance_lines("potential", cfg, s.quad, cfg.mode))
    return EXIT_NUMERIC if rows[0][-1] else EXIT_OK


def cmd_sweep(args, out) -> int:
    cfg, s = _load_config(args)
    if not cfg.is_sweep:
        raise ConfigError("the config has no sweep axis; use the 'potential' subcommand")
    rows = _sweep_rows(s, cfg.sweep, cfg.grid, cfg.workers)
    write_csv(out(cfg), POTENTIAL_COLUMNS, rows, provenance_lines("sweep", cfg, s.quad, cfg.mode))
    return EXIT_NUMERIC if any(r[-1] for r in rows) else EXIT_OK


def cmd_ratio(args, out) -> int:
    cfg, s = _load_config(args)
    if not _with_ratio(s):
        raise ConfigError("the shielding ratio needs both a sheet and a substrate")
    if cfg.is_sweep and cfg.sweep != "gap_d":
        raise ConfigError("the ratio subcommand runs along gap_d; set 'sweep: gap_d'")
    grid = cfg.grid if cfg.is_sweep else (s.stack.gap_d,)
    if any(v <= 0 for v in grid):
        raise ConfigError("ratio needs gap_d > 0")
    rows = _sweep_rows(s, "gap_d", grid, cfg.workers)
    write_csv(out(cfg), POTENTIAL_COLUMNS, rows, provenance_lines("ratio", cfg, s.quad, cfg.mode))
    return EXIT_NUMERIC if any(r[-1] for r in rows) else EXIT_OK


def table1_rows(quad: QuadratureSpec, z_A: float = TABLE1_HEIGHT) -> list[list]:
    atom = load_builtin_atom("rb-ground")
    rows = []
    for label, n, target in TABLE1_TARGETS:
        sheet = SheetResponse.undoped() if n is None else SheetResponse.doped(n)
        try:
            r = total_potential(Scenario(atom, LayerStack(sheet), z_A, quad))
            rows.append([label, n, r.u_over_hbar, target, r.u_over_hbar / target - 1,
                         r.err_estimate, ""])
        except QuadratureError as exc:
            rows.append([label, n, None, target, None, None, f"{type(exc).__name__}: {exc}"])
    return rows


def cmd_table1(args, out) -> int:
    quad = QuadratureSpec(rel_tol=args.tol if args.tol is not None else 1e-8)
    rows = table1_rows(quad)
    write_csv(out(None), TABLE1_COLUMNS, rows, provenance_lines("table1", None, quad))
    return EXIT_NUMERIC if any(r[-1] for r in rows) else EXIT_OK


def _cli_grid(text: Optional[str]):
    if text is None:
        return ()
    try:
        return parse_grid(text, PLAIN)
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None


def cmd_response(args, out) -> int:
    stack = None
    cfg = None
    if args.config:
        cfg, s = _load_config(args)
        stack = s.stack
        sheet = stack.sheet or SheetResponse.undoped()
        substrate = stack.substrate if stack.substrate.kind is SubstrateKind.DRUDE else None
    else:
        sheet = {"undoped": SheetResponse.undoped, "bilayer": SheetResponse.bilayer,
                 "perfect": SheetResponse.perfect}.get(args.sheet, SheetResponse.undoped)()
        if args.sheet == "doped":
            if args.doping is None:
                raise ConfigError("--sheet doped needs --doping")
            sheet = SheetResponse.doped(args.doping)
        substrate = {"gold": SubstrateModel.gold, "perfect": SubstrateModel.perfect,
                     "vacuum": SubstrateModel.vacuum}[args.substrate]()
        if args.kind == "reflection":
            stack = LayerStack(None if args.sheet == "none" else sheet, args.gap, substrate)
    grid = {"k": _cli_grid(args.k), "xi": _cli_grid(args.xi), "omega": _cli_grid(args.omega),
            "k_tilde": _cli_grid(args.k_tilde), "xi_tilde": _cli_grid(args.xi_tilde)}
    try:
        columns, rows = dump_response(args.kind, grid, sheet=sheet, stack=stack,
                                      doping=args.doping, substrate=substrate)
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    write_csv(out(cfg), columns, rows,
              [f"cpgraphene {__version__} response {args.kind}", "units: SI"])
    return EXIT_OK


COMMANDS: dict[str, Callable] = {
    "potential": cmd_potential,
    "sweep": cmd_sweep,
    "ratio": cmd_ratio,
    "response": cmd_response,
    "table1": cmd_table1,
}


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors, so they exit with status 1 rather than 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cpgraphene",
        description="Casimir-Polder potentials of atoms above graphene sheets and substrates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="scenario file")
        p.add_argument("--out", help="CSV output path (default: config 'out' key, else stdout)")
        p.add_argument("--tol", type=float, help="relative quadrature tolerance override")

    for name, text in (("potential", "evaluate one scenario point"),
                       ("sweep", "evaluate the scenario along its sweep axis"),
                       ("ratio", "shielding ratio against the sheet alone, along gap_d")):
        p = sub.add_parser(name, help=text)
        common(p)
        if name != "potential":
            p.add_argument("--workers", type=int, help="parallel worker processes for sweep rows")

    p = sub.add_parser("table1", help="undoped and doped graphene at 1 um, Rb ground state")
    common(p, config_required=False)

    p = sub.add_parser("response", help="dump a response function on a grid")
    common(p, config_required=False)
    p.add_argument("--kind", required=True, choices=RESPONSE_KINDS)
    for flag in ("k", "xi", "omega", "k-tilde", "xi-tilde"):
        p.add_argument(f"--{flag}", help="comma list, geom(a, b, n) or lin(a, b, n); SI units")
    p.add_argument("--sheet", default="undoped",
                   choices=("none", "undoped", "doped", "bilayer", "perfect"))
    p.add_argument("--doping", type=float, help="doping in m^-2")
    p.add_argument("--substrate", default="vacuum", choices=("vacuum", "gold", "perfect"))
    p.add_argument("--gap", type=float, default=0.0, help="sheet-substrate gap in m")
    return parser


@contextmanager
def _opened(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_CONFIG

    handles = []

    def out(cfg: Optional[ScenarioConfig]):
        path = args.out or (cfg.out if cfg is not None else None)
        ctx = _opened(path)
        handles.append(ctx)
        return ctx.__enter__()

    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, AtomFixtureError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        for ctx in handles:
            ctx.__exit__(None, None, None)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
