"""Command-line entry point.

Every subcommand reads one JSON run configuration, writes CSV files into the
output directory and exits with

    0  success
    2  configuration error
    3  integrator failure
    4  Appendix oracle mismatch on a non-flagged entry

Floats are written in shortest round-trip form with LF line endings, so a
rerun with the same configuration and build reproduces every file byte for
byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .appendix import appendix_oracle, compare_with_oracle
from .element import build_element
from .jets import jet_space
from .section import DEFAULT_POISSON, Material, rect_section, shear_modulus_default
from .shapefn import DOF_NAMES, jet_shape
from .system import (
    DistributedLoad,
    IntegratorError,
    Mesh,
    PointLoad,
    SingularMassError,
    build_system,
    cbt_frequencies,
    integrate,
    modal,
)

__all__ = ["CONFIG_SCHEMA", "ConfigError", "RunConfig", "load_config", "main"]

log = logging.getLogger("cosserat_cre")

DEFAULT_TOL = 1e-8
DEFAULT_OUTPUT_DT = 1e-3
EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATOR, EXIT_ORACLE = 0, 2, 3, 4

_POS = {"type": "number", "exclusiveMinimum": 0}
_DOF = {"type": "integer", "minimum": 0, "maximum": 5}


def _obj(props, required=None):
    return {
        "type": "object",
        "additionalProperties": False,
        "properties": props,
        "required": list(props) if required is None else required,
    }


CONFIG_SCHEMA = _obj(
    {
        "version": {"const": 1},
        "geometry": _obj({"length": _POS, "width": _POS, "thickness": _POS}),
        "material": _obj(
            {"E": _POS, "rho": _POS, "nu_poisson": {"type": "number", "exclusiveMinimum": -1, "maximum": 0.5}},
            required=["E", "rho"],
        ),
        "mesh": _obj({"elements": {"type": "integer", "minimum": 1, "maximum": 100}}),
        "restraints": {
            "type": "array",
            "items": _obj(
                {
                    "node": {"type": "integer", "minimum": 0},
                    "dofs": {"type": "array", "items": _DOF, "minItems": 1, "uniqueItems": True},
                }
            ),
        },
        "loads": {
            "type": "array",
            "items": _obj(
                {
                    "node": {"type": "integer", "minimum": 0},
                    "dof": _DOF,
                    "amplitude": {"type": "number"},
                    "frequency": {"type": "number", "minimum": 0},
                    "phase": {"type": "number"},
                    "kind": {"enum": ["cos", "sin"]},
                }
            ),
        },
        "distributed_loads": {
            "type": "array",
            "items": _obj({"component": {"type": "integer", "minimum": 0, "maximum": 2}, "amplitude": {"type": "number"}}),
        },
        "integrator": _obj(
            {
                "t_end": _POS,
                "tol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-2},
                "output_dt": _POS,
            },
            required=["t_end"],
        ),
        "modal": _obj(
            {
                "count": {"type": "integer", "minimum": 1},
                "sweep": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1, "maximum": 100},
                    "minItems": 1,
                    "uniqueItems": True,
                },
            },
            required=["count"],
        ),
        "simulate": _obj({"phase_plane": {"type": "boolean"}}),
        "shapefn": _obj({"order": {"type": "integer", "minimum": 1, "maximum": 3}}),
    },
    required=["version", "geometry", "material", "mesh", "restraints"],
)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending line or field."""


class RunConfig:
    """Validated configuration with the documented defaults filled in."""

    def __init__(self, raw: dict, elements: int = None):
        self.raw = raw
        g, m = raw["geometry"], raw["material"]
        self.length, self.width, self.thickness = g["length"], g["width"], g["thickness"]
        self.E, self.rho = m["E"], m["rho"]
        self.nu_poisson = m.get("nu_poisson", DEFAULT_POISSON)
        self.elements = raw["mesh"]["elements"] if elements is None else elements
        if self.elements < 1:
            raise ConfigError("--elements: must be at least 1")
        integ = raw.get("integrator", {})
        self.t_end = integ.get("t_end")
        self.tol = integ.get("tol", DEFAULT_TOL)
        self.output_dt = integ.get("output_dt", DEFAULT_OUTPUT_DT)
        nnodes = self.elements + 1
        self.restrained = set()
        for i, r in enumerate(raw["restraints"]):
            if r["node"] >= nnodes:
                raise ConfigError(f"restraints[{i}].node: node {r['node']} does not exist ({nnodes} nodes)")
            self.restrained.update(6 * r["node"] + d for d in r["dofs"])
        self.point_loads = []
        for i, p in enumerate(raw.get("loads", [])):
            if p["node"] >= nnodes:
                raise ConfigError(f"loads[{i}].node: node {p['node']} does not exist ({nnodes} nodes)")
            self.point_loads.append(
                PointLoad(p["node"], p["dof"], p["amplitude"], p["frequency"], p["phase"], p["kind"])
            )
        self.distributed = [DistributedLoad(d["component"], d["amplitude"]) for d in raw.get("distributed_loads", [])]

    @property
    def material(self) -> Material:
        return Material(self.E, self.rho, shear_modulus_default(self.E, self.nu_poisson))

    @property
    def section(self):
        return rect_section(self.width, self.thickness, self.material)

    @property
    def element_length(self) -> float:
        return self.length / self.elements

    def mesh(self) -> Mesh:
        m = Mesh.uniform(self.length, self.elements, self.section, clamp_base=False)
        return Mesh(m.nodes, m.elements, m.sections, frozenset(self.restrained))

    def require(self, section: str, key: str = None):
        block = self.raw.get(section)
        if block is None:
            raise ConfigError(f"{section}: section is required by this command")
        if key is not None and key not in block:
            raise ConfigError(f"{section}.{key}: required by this command")
        return block if key is None else block[key]


def load_config(path, elements: int = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        msgs = []
        for e in errors:
            where = ".".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise ConfigError("; ".join(msgs))
    try:
        return RunConfig(raw, elements)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    log.info("wrote %s", path)


def _monomial_name(exps) -> str:
    if exps is None:
        return "1"
    names = [f"{DOF_NAMES[i % 6]}_{'ab'[i // 6]}" for i in range(12)]
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(names[i])
        elif e > 1:
            parts.append(f"{names[i]}^{e}")
    return "*".join(parts) if parts else "1"


# ---------------------------------------------------------------------------
# subcommands

_FLEX = (("e2-e3", "J11"), ("e1-e3", "J22"))


def _modal_rows(cfg: RunConfig, count: int):
    sec = cfg.section
    sys_ = build_system(cfg.mesh())
    res = modal(sys_)
    rows = []
    for plane, attr in _FLEX:
        w = res.plane(plane, count)
        cbt = cbt_frequencies(cfg.length, getattr(sec, attr), sec.mu, len(w)) if len(w) else []
        for k, (wk, ck) in enumerate(zip(w, cbt), start=1):
            rows.append((k, float(wk), plane, float(ck), float(100.0 * (wk - ck) / ck)))
    return rows


def cmd_modal(cfg: RunConfig, out: Path) -> int:
    count = cfg.require("modal", "count")
    _write_csv(out / "modal.csv", ["mode", "omega_rad_s", "plane", "cbt_omega", "rel_err_pct"], _modal_rows(cfg, count))
    sweep = cfg.raw["modal"].get("sweep")
    if sweep:
        rows = []
        # loads do not enter the modal problem and may name nodes absent from coarse meshes
        unloaded = {k: v for k, v in cfg.raw.items() if k not in ("loads", "distributed_loads")}
        for n in sorted(sweep):
            sub = RunConfig(unloaded, n)
            for r in _modal_rows(sub, count):
                rows.append((n,) + r)
        _write_csv(
            out / "convergence.csv", ["elements", "mode", "omega_rad_s", "plane", "cbt_omega", "rel_err_pct"], rows
        )
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    t_end = cfg.require("integrator", "t_end")
    sys_ = build_system(cfg.mesh(), cfg.point_loads, cfg.distributed)
    try:
        ts = integrate(sys_, t_end, tol=cfg.tol, output_dt=cfg.output_dt)
    except IntegratorError as exc:
        print(f"integrator failure: {exc} (last good time {exc.last_time!r} s)", file=sys.stderr)
        return EXIT_INTEGRATOR
    tip = cfg.elements
    hist = ts.node_history(tip)
    rows = ((t,) + tuple(h) for t, h in zip(ts.t, hist))
    _write_csv(out / "simulate.csv", ["t", "X_b", "Y_b", "Z_b", "Phi_xb", "Phi_yb", "Phi_zb"], rows)
    if cfg.raw.get("simulate", {}).get("phase_plane", False):
        _write_csv(out / "phase_plane.csv", ["Y", "Ydot"], zip(ts.dof(tip, 1), ts.dof(tip, 1, rates=True)))
    return EXIT_OK


def cmd_shapefn(cfg: RunConfig, out: Path) -> int:
    order = cfg.require("shapefn", "order")
    sh = jet_shape(cfg.section, cfg.element_length, order)
    rows = [(f, k, p, _monomial_name(m), c) for f, k, p, m, c in sh.coefficient_table()]
    _write_csv(out / "shapefn.csv", ["field", "order", "sigma_power", "monomial(q)", "coefficient"], rows)
    return EXIT_OK


def cmd_element_dump(cfg: RunConfig, out: Path) -> int:
    ops = build_element(cfg.section, cfg.element_length)
    rows = []
    for name, A in (("M", ops.M), ("K", ops.K)):
        for i in range(12):
            for j in range(i, 12):
                rows.append((f"{name}[{i + 1},{j + 1}]", float(A[i, j]), None, None, "computed"))
    sp = jet_space(12, 3)
    start = sp.degree_start[2]
    for i in range(12):
        for c in np.nonzero(ops.G[i])[0]:
            exps = sp.exponents[start + c]
            rows.append((f"g[{i + 1},{_monomial_name(exps)}]", float(ops.G[i, c]), None, None, "computed"))
    _write_csv(out / "element.csv", ["name", "computed", "oracle", "rel_err", "status"], rows)
    return EXIT_OK


def cmd_verify_appendix(cfg: RunConfig, out: Path) -> int:
    sec, l = cfg.section, cfg.element_length
    rows = compare_with_oracle(build_element(sec, l), appendix_oracle(sec, l))
    _write_csv(
        out / "appendix.csv",
        ["name", "computed", "oracle", "rel_err", "status"],
        ((r.name, r.computed, r.oracle, r.rel_err, r.status) for r in rows),
    )
    bad = [r.name for r in rows if r.status == "fail"]
    if bad:
        print(f"Appendix mismatch on non-flagged entries: {', '.join(bad)}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


COMMANDS = {
    "modal": cmd_modal,
    "simulate": cmd_simulate,
    "shapefn": cmd_shapefn,
    "element-dump": cmd_element_dump,
    "verify-appendix": cmd_verify_appendix,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cosserat-cre", description="Cosserat rod element toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--out", default=".", help="output directory (created if missing)")
        s.add_argument("--elements", type=int, default=None, help="override mesh.elements")
        s.add_argument("--seed", type=int, default=None, help="accepted for interface compatibility; unused")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.elements)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularMassError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
