"""Command line: ``heatbasis <command> --config <path> [--out <dir>]``.

Each command reads one JSON config, writes CSV files plus ``config.json``
(the canonical echo of the validated config, with defaults filled in) to the
output directory, and prints the written paths. Failures print one JSON line
``{"error": <code>, "message": ...}`` to stderr.

Exit codes: 0 success, 2 invalid config, 3 numerical failure (no
convergence, indefinite Gram, truncation required), 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._csvio import write_csv
from .caloric import atom_from_dict
from .dobasis import (
    DensityConfig,
    build_gram_pair,
    continue_solution,
    density_experiment,
    double_orthogonal_basis,
    heat_polynomial_family,
    separable_family,
)
from .domain import Ball, Cylinder
from .exceptions import (
    ConvergenceError,
    HeatBasisError,
    InvalidConfigError,
    NotPSDError,
    TruncationRequiredError,
)
from .potentials import PotentialResolution, green_identity
from .specialfn import bessel_zero

__all__ = ["main", "run", "normalize_config", "COMMANDS", "EXIT_OK", "EXIT_INVALID_CONFIG",
           "EXIT_NUMERICAL", "EXIT_ERROR"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("green-check", "basis", "density", "continue", "bessel-zeros")

_NUMERICAL = (ConvergenceError, NotPSDError, TruncationRequiredError)


def _fail(msg: str):
    raise InvalidConfigError(msg)


def _num(cfg: dict, key: str, default=None, *, lo=None, hi=None, integer=False):
    v = cfg.get(key, default)
    if v is None:
        _fail(f"missing field {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"field {key!r} must be a number")
    if integer:
        if int(v) != v:
            _fail(f"field {key!r} must be an integer")
        v = int(v)
    else:
        v = float(v)
    if lo is not None and v < lo or hi is not None and v > hi:
        _fail(f"field {key!r} = {v} out of range")
    return v


def _tol(cfg: dict, key: str, default: float) -> float:
    v = _num(cfg, key, default)
    if not 0 < v < 1:
        _fail(f"tolerance {key!r} must lie in (0, 1)")
    return v


def _int_list(cfg: dict, key: str, default, length=None) -> list:
    v = cfg.get(key, default)
    if not isinstance(v, list) or not all(isinstance(a, int) and not isinstance(a, bool) and a >= 1 for a in v):
        _fail(f"field {key!r} must be a list of positive integers")
    if length is not None and len(v) != length:
        _fail(f"field {key!r} must have {length} entries")
    return list(v)


def _cylinder(cfg: dict, key: str) -> Cylinder:
    if key not in cfg:
        _fail(f"missing field {key!r}")
    d = cfg[key]
    if not isinstance(d, dict):
        _fail(f"field {key!r} must be an object")
    t = d.get("t")
    if isinstance(t, list) and len(t) == 2 and all(isinstance(v, (int, float)) for v in t) and t[0] >= t[1]:
        _fail(f"{key}: T1 must be smaller than T2")
    try:
        return Cylinder.from_dict(d)
    except (HeatBasisError, TypeError, ValueError) as exc:
        _fail(f"{key}: {exc}")


def _nested_balls(omega: Cylinder, Omega: Cylinder):
    if (omega.t_start, omega.t_end) != (Omega.t_start, Omega.t_end):
        _fail("omega and Omega must share the time interval")
    if not isinstance(Omega.base, Ball):
        _fail("Omega must be a ball cylinder")
    b, a = Omega.base, omega.base
    if a.center != b.center:
        _fail("omega and Omega must be concentric")
    r = getattr(a, "radius", None) or getattr(a, "r_outer", None)
    if r is None or not r < b.radius:
        _fail("omega must lie strictly inside Omega")


def _dictionary(cfg: dict, n: int, R2: float) -> list:
    d = cfg.get("dictionary", {})
    if not isinstance(d, dict):
        _fail("field 'dictionary' must be an object")
    atoms = []
    sep = d.get("separable")
    if sep is not None:
        if not isinstance(sep, dict):
            _fail("dictionary.separable must be an object")
        probs = sep.get("problems", ["dirichlet", "neumann"])
        if not isinstance(probs, list) or not set(probs) <= {"dirichlet", "neumann"} or not probs:
            _fail("dictionary.separable.problems must list 'dirichlet' and/or 'neumann'")
        atoms += separable_family(n, _num(sep, "k_max", 2, lo=0, integer=True),
                                  _num(sep, "m_max", 2, lo=1, integer=True), R2, tuple(probs))
    if "heat_degree" in d:
        atoms += heat_polynomial_family(n, _num(d, "heat_degree", lo=0, hi=8, integer=True))
    for rec in d.get("atoms", []):
        try:
            atoms.append(atom_from_dict(rec))
        except (HeatBasisError, TypeError, ValueError) as exc:
            _fail(f"dictionary.atoms: {exc}")
    if not atoms:
        _fail("dictionary is empty")
    if any(a.n != n for a in atoms):
        _fail("dictionary atoms must match the cylinder dimension")
    return atoms


def _big(cfg: dict) -> dict:
    big = cfg.get("big", {})
    kind = big.get("kind", "aniso")
    if kind not in ("l2", "aniso", "aniso_k"):
        _fail(f"big.kind must be l2, aniso or aniso_k, got {kind!r}")
    s = _num(big, "s", 1 if kind != "l2" else 0, lo=0, hi=2, integer=True)
    k = _num(big, "k", 0, lo=0, hi=4, integer=True)
    if k + 2 * s > 4:
        _fail("big inner product needs k + 2 s <= 4")
    return {"kind": kind, "s": s, "k": k}


def _resolutions(cfg: dict) -> dict:
    r = cfg.get("resolutions", {})
    return {"big": _int_list(r, "big", [16, 32, 32], 3), "small": _int_list(r, "small", [16, 32, 32], 3)}


def _pair_setup(cfg: dict) -> dict:
    omega, Omega = _cylinder(cfg, "omega"), _cylinder(cfg, "Omega")
    _nested_balls(omega, Omega)
    _dictionary(cfg, Omega.dimension, Omega.base.radius)
    return {
        "omega": omega.to_dict(),
        "Omega": Omega.to_dict(),
        "dictionary": cfg.get("dictionary", {}),
        "big": _big(cfg),
        "resolutions": _resolutions(cfg),
        "rel_tol": _tol(cfg, "rel_tol", 1e-10),
    }


def normalize_config(cfg) -> dict:
    """Validate a raw config and return it with every default filled in."""
    if not isinstance(cfg, dict):
        _fail("config must be a JSON object")
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        _fail(f"command must be one of {', '.join(COMMANDS)}")
    out: dict = {"command": cmd}
    if cmd == "bessel-zeros":
        orders = cfg.get("orders", [0])
        if not isinstance(orders, list) or not orders or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and 0 <= v <= 150 for v in orders):
            _fail("orders must be a non-empty list of numbers in [0, 150]")
        kind = cfg.get("kind", "function")
        if kind not in ("function", "derivative"):
            _fail("kind must be 'function' or 'derivative'")
        out.update(orders=[float(v) for v in orders], count=_num(cfg, "count", 3, lo=1, hi=1000, integer=True),
                   kind=kind)
    elif cmd == "green-check":
        cyl = _cylinder(cfg, "cylinder")
        if not isinstance(cyl.base, Ball):
            _fail("green-check needs a ball cylinder")
        targets = cfg.get("targets")
        if not isinstance(targets, list) or not targets:
            _fail("targets must be a non-empty list of atom records")
        for t in targets:
            try:
                if atom_from_dict(t).n != cyl.dimension:
                    _fail("target dimension does not match the cylinder")
            except (TypeError, ValueError) as exc:
                if isinstance(exc, InvalidConfigError):
                    raise
                _fail(f"targets: {exc}")
        probes = cfg.get("probes")
        if not isinstance(probes, list) or not probes or not all(
                isinstance(p, list) and len(p) == cyl.dimension + 1
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p) for p in probes):
            _fail(f"probes must be a non-empty list of {cyl.dimension + 1}-vectors")
        res = cfg.get("resolution", {})
        default = PotentialResolution()
        out.update(cylinder=cyl.to_dict(), targets=targets, probes=[[float(v) for v in p] for p in probes],
                   resolution={
                       "surface": _num(res, "surface", default.surface, lo=1, integer=True),
                       "time": _num(res, "time", default.time, lo=1, integer=True),
                       "radial": _num(res, "radial", default.radial, lo=1, integer=True),
                       "angular": _num(res, "angular", default.angular, lo=1, integer=True),
                       "levels": _num(res, "levels", default.levels, lo=0, integer=True),
                       "ratio": _tol(res, "ratio", default.ratio),
                   })
    elif cmd == "basis":
        out.update(_pair_setup(cfg))
    elif cmd == "continue":
        out.update(_pair_setup(cfg))
        if not isinstance(cfg.get("target"), dict):
            _fail("continue needs a target atom record")
        try:
            atom_from_dict(cfg["target"])
        except (TypeError, ValueError) as exc:
            _fail(f"target: {exc}")
        probes = cfg.get("probes", {"count": 10, "seed": 0})
        if isinstance(probes, dict):
            probes = {"count": _num(probes, "count", 10, lo=1, integer=True),
                      "seed": _num(probes, "seed", 0, lo=0, integer=True)}
        elif not isinstance(probes, list) or not probes:
            _fail("probes must be a list of points or {count, seed}")
        out.update(target=cfg["target"], probes=probes)
    elif cmd == "density":
        scen = cfg.get("scenario")
        if scen not in ("no_hole", "hole"):
            _fail("scenario must be 'no_hole' or 'hole'")
        base = DensityConfig()
        fields = {}
        for key, dv in base.to_dict().items():
            v = cfg.get(key, dv)
            if isinstance(dv, list):
                if not isinstance(v, list) or len(v) != len(dv) and key != "sizes" or not all(
                        isinstance(a, (int, float)) and not isinstance(a, bool) for a in v):
                    _fail(f"field {key!r} must be a list like {dv}")
                v = [type(a)(b) for a, b in zip(dv, v)] if key != "sizes" else [int(b) for b in v]
            elif isinstance(dv, bool):
                if not isinstance(v, bool):
                    _fail(f"field {key!r} must be true or false")
            elif isinstance(dv, int):
                v = _num(cfg, key, dv, integer=True)
            else:
                v = _num(cfg, key, dv)
            fields[key] = v
        if not 0 < fields["rcond"] < 1:
            _fail("tolerance 'rcond' must lie in (0, 1)")
        if fields["T"][0] >= fields["T"][1]:
            _fail("T1 must be smaller than T2")
        try:
            _density_config(fields).validate()
        except HeatBasisError as exc:
            _fail(str(exc))
        out.update(scenario=scen, **fields)
    unknown = set(cfg) - set(out)
    if unknown:
        _fail(f"unknown fields: {', '.join(sorted(unknown))}")
    return out


def _density_config(fields: dict) -> DensityConfig:
    return DensityConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in fields.items()})


def _build_pair(cfg: dict):
    omega, Omega = Cylinder.from_dict(cfg["omega"]), Cylinder.from_dict(cfg["Omega"])
    atoms = _dictionary(cfg, Omega.dimension, Omega.base.radius)
    big = cfg["big"]
    res = cfg["resolutions"]
    pair = build_gram_pair(atoms, omega, Omega, (big["kind"], big["s"], big["k"]),
                           (tuple(res["big"]), tuple(res["small"])))
    return pair, double_orthogonal_basis(pair, cfg["rel_tol"])


def _probe_points(cfg: dict, omega: Cylinder, Omega: Cylinder) -> np.ndarray:
    probes = cfg["probes"]
    n = Omega.dimension
    if isinstance(probes, list):
        P = np.asarray(probes, dtype=float)
        if P.ndim != 2 or P.shape[1] != n + 1 or not np.all(Omega.contains(P)):
            _fail("probes must be points inside the big cylinder")
        return P
    rng = np.random.default_rng(probes["seed"])
    b = omega.base
    r_in = getattr(b, "radius", None) or b.r_outer
    R = Omega.base.radius
    m = probes["count"]
    d = rng.normal(size=(m, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.uniform(r_in + 0.1 * (R - r_in), R - 0.05 * (R - r_in), m)
    t = rng.uniform(Omega.t_start, Omega.t_end, m)
    return np.column_stack([np.asarray(Omega.base.center) + r[:, None] * d, t])


def run(cfg: dict, out_dir) -> list:
    """Execute a normalized config; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cmd = cfg["command"]
    written = []
    if cmd == "bessel-zeros":
        rows = [(nu, m, bessel_zero(nu, m, cfg["kind"])) for nu in cfg["orders"]
                for m in range(1, cfg["count"] + 1)]
        written.append(write_csv(out / "bessel_zeros.csv", ["nu", "m", "zero"], rows))
    elif cmd == "green-check":
        cyl = Cylinder.from_dict(cfg["cylinder"])
        res = PotentialResolution(**cfg["resolution"])
        rows = []
        for ti, rec in enumerate(cfg["targets"]):
            u = atom_from_dict(rec)
            for pi, p in enumerate(cfg["probes"]):
                rep, resid = green_identity(u, cyl, p, res)
                inside = int(bool(cyl.contains(np.asarray(p))[0]))
                rows.append((ti, pi, inside, rep, resid))
        written.append(write_csv(out / "green_check.csv",
                                 ["target", "probe", "inside", "reproduced", "residual"], rows))
    elif cmd == "basis":
        _, basis = _build_pair(cfg)
        written.append(write_csv(out / "mu.csv", ["nu", "mu_nu"],
                                 [(i + 1, m) for i, m in enumerate(basis.mu)]))
        written.append(write_csv(out / "diagnostics.csv", ["name", "value"],
                                 sorted(basis.diagnostics.items()) + [("rank", basis.rank)]))
    elif cmd == "continue":
        pair, basis = _build_pair(cfg)
        omega, Omega = Cylinder.from_dict(cfg["omega"]), Cylinder.from_dict(cfg["Omega"])
        target = atom_from_dict(cfg["target"])
        P = _probe_points(cfg, omega, Omega)
        exact = target(P)
        scale = float(np.max(np.abs(exact))) or 1.0
        usable = int(np.sum(basis.mu >= 1e-14 * basis.mu[0]))
        rows = []
        for N in range(usable + 1):
            err = float(np.max(np.abs(continue_solution(target, basis, pair, N)(P) - exact)))
            rows.append((N, err, err / scale))
        written.append(write_csv(out / "continue.csv", ["n_trunc", "max_error", "max_error_over_scale"], rows))
    elif cmd == "density":
        fields = {k: v for k, v in cfg.items() if k not in ("command", "scenario")}
        curve = density_experiment(cfg["scenario"], _density_config(fields))
        written.append(write_csv(out / f"density_{cfg['scenario']}.csv",
                                 ["N", "residual", "residual_over_norm"], curve))
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
    written.append(cfg_path)
    return written


def _emit(code: str, message: str):
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit("invalid-config", message)
        raise SystemExit(EXIT_INVALID_CONFIG)


def main(argv=None) -> int:
    parser = _Parser(prog="heatbasis", description="Caloric basis experiments driven by JSON configs.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path of the JSON config")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    args = parser.parse_args(argv)
    try:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _fail(f"cannot read config: {exc}")
        if isinstance(raw, dict):
            raw.setdefault("command", args.command)
            if raw["command"] != args.command:
                _fail(f"config is for {raw['command']!r}, not {args.command!r}")
        cfg = normalize_config(raw)
        for path in run(cfg, args.out):
            print(path)
    except InvalidConfigError as exc:
        _emit("invalid-config", str(exc).replace("\n", " "))
        return EXIT_INVALID_CONFIG
    except _NUMERICAL as exc:
        _emit("numerical-failure", str(exc).replace("\n", " "))
        return EXIT_NUMERICAL
    except HeatBasisError as exc:
        _emit(type(exc).__name__, str(exc).replace("\n", " "))
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
