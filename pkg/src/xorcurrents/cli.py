"""Experiment orchestration: reproducible verification runs.

Every subcommand reads a strict ``key = value`` configuration file
(unknown keys are an error), runs one experiment determined entirely by
the config, and writes machine-readable artifacts plus ``manifest.json``
(config hash, seeds, sample counts, package versions) into the output
directory.  No timestamps are written, so identical configs produce
byte-identical artifacts.

Exit codes:
  0  success / all checks passed
  2  a statistical check failed (estimate outside its error budget)
  3  a deterministic invariant was violated
  4  configuration error (unparseable file, unknown command or key)
  5  an exact-enumeration capacity limit was exceeded
"""

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from . import (continuum, coupling, currents, decomposition, gff, ising,
               lattice, loewner)
from .errors import (ConfigError, ContractViolation, CouplingViolation,
                     OracleCapacityExceeded, ParityInconsistency,
                     PointSwallowed, SignCountMismatch, XorCurrentsError)

EXIT_OK = 0
EXIT_STATISTICAL = 2
EXIT_INVARIANT = 3
EXIT_CONFIG = 4
EXIT_CAPACITY = 5

_INVARIANT_ERRORS = (ContractViolation, CouplingViolation,
                     ParityInconsistency, SignCountMismatch)


# -- config handling ---------------------------------------------------------

def _parse_scalar(text):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config(path) -> dict:
    """Strict ``key = value`` file; ``#`` comments; commas make lists."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for ln, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key or key in cfg:
            raise ConfigError(f"line {ln}: empty or duplicate key {key!r}")
        if "," in val:
            cfg[key] = [_parse_scalar(v) for v in val.split(",")]
        else:
            cfg[key] = _parse_scalar(val)
    return cfg


def _take(cfg, schema):
    """Validate ``cfg`` against ``{key: default-or-REQUIRED}``."""
    unknown = set(cfg) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in schema.items():
        if key in cfg:
            out[key] = cfg[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            out[key] = default
    return out


_REQUIRED = object()


def _beta(value):
    if value == "critical":
        return ising.critical_beta()
    if isinstance(value, (int, float)) and value > 0:
        return float(value)
    raise ConfigError(f"beta must be positive or 'critical', got {value!r}")


def _as_list(value):
    return value if isinstance(value, list) else [value]


def _domain(cfg):
    shape = cfg.get("shape", "unit_square")
    if "size" in cfg and cfg["size"] is not None:
        return lattice.build_domain(shape, 1.0 / (int(cfg["size"]) + 1))
    if "delta" in cfg and cfg["delta"] is not None:
        return lattice.build_domain(shape, float(cfg["delta"]))
    raise ConfigError("config needs either 'size' or 'delta'")


class _Run:
    """Output directory plus the manifest accumulated during a command."""

    def __init__(self, out_dir, command, cfg):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        canon = json.dumps(cfg, sort_keys=True)
        self.manifest = {
            "command": command,
            "config": cfg,
            "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
            "versions": {"xorcurrents": _pkg_version,
                         "numpy": np.__version__},
            "artifacts": [],
        }

    def write_json(self, name, payload):
        path = self.dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                                   default=_jsonable) + "\n")
        self.manifest["artifacts"].append(name)

    def write_csv(self, name, header, rows):
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_csv_cell(v) for v in row))
        (self.dir / name).write_text("\n".join(lines) + "\n")
        self.manifest["artifacts"].append(name)

    def finish(self):
        (self.dir / "manifest.json").write_text(
            json.dumps(self.manifest, indent=2, sort_keys=True,
                       default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


# -- subcommands -------------------------------------------------------------

def _cmd_sample_coupling(cfg, run):
    opts = _take(cfg, {"shape": "unit_square", "size": None, "delta": None,
                       "beta": "critical", "seed": _REQUIRED,
                       "samples": 1})
    dom = _domain(opts)
    beta = _beta(opts["beta"])
    n = int(opts["samples"])
    sample = coupling.sample_master_coupling(dom, beta, int(opts["seed"]))
    run.write_json("sample.json", json.loads(sample.to_json()))
    if n > 1:
        out = coupling.sample_coupling_batch(dom, beta, int(opts["seed"]),
                                             n, check=True)
        run.write_json("batch_summary.json", {
            "n_samples": n, "seed": int(opts["seed"]),
            "mean_tau": out["tau"].astype(float).mean(),
            "mean_tau_dual": out["tau_dual"].astype(float).mean(),
            "mean_odd_fraction": out["odd"].astype(float).mean(),
            "mean_abs_height": float(np.abs(out["h2_vertex"]).mean() / 2.0),
        })
    return EXIT_OK


def _cmd_decompose(cfg, run):
    opts = _take(cfg, {"shape": "unit_square", "size": None, "delta": None,
                       "beta": "critical", "seed": _REQUIRED})
    dom = _domain(opts)
    sample = coupling.sample_master_coupling(dom, _beta(opts["beta"]),
                                             int(opts["seed"]))
    dec = decomposition.decompose(sample, dom)
    if not np.array_equal(decomposition.reconstruct(dec), sample.tau):
        raise ContractViolation("reconstruction does not match the field")
    rows = [(k, cl.diameter, len(cl.vertices), int(dec.signs[k]),
             int(cl.is_boundary_cluster), len(cl.inner_boundaries))
            for k, cl in enumerate(dec.clusters)]
    run.write_csv("clusters.csv",
                  ["index", "diameter", "n_vertices", "sign",
                   "is_boundary", "n_holes"], rows)
    run.write_json("decomposition.json", {
        "n_clusters": len(dec.clusters), "delta": dec.delta,
        "seed": int(opts["seed"]), "reconstruction_exact": True})
    return EXIT_OK


def _cmd_verify_switching(cfg, run):
    opts = _take(cfg, {"shape": "unit_square", "size": None, "delta": None,
                       "beta": "critical", "seed": _REQUIRED,
                       "samples": _REQUIRED, "vertices": _REQUIRED})
    dom = _domain(opts)
    A = [int(v) for v in _as_list(opts["vertices"])]
    rep = decomposition.verify_switching(dom, A, _beta(opts["beta"]),
                                         int(opts["samples"]),
                                         int(opts["seed"]))
    run.write_json("switching.json", rep)
    return EXIT_OK if rep["pass"] else EXIT_STATISTICAL


def _cmd_verify_bosonisation(cfg, run):
    opts = _take(cfg, {"shape": "unit_square", "size": None, "delta": None,
                       "seed": _REQUIRED, "samples": _REQUIRED,
                       "primal_vertices": _REQUIRED, "dual_faces": _REQUIRED})
    dom = _domain(opts)
    pv = [int(v) for v in _as_list(opts["primal_vertices"])]
    df = [int(v) for v in _as_list(opts["dual_faces"])]
    rep = coupling.verify_bosonisation(dom, pv, df, int(opts["samples"]),
                                       int(opts["seed"]))
    run.write_json("bosonisation.json", rep)
    return EXIT_OK if rep["pass"] else EXIT_STATISTICAL


def _cmd_scaling_study(cfg, run):
    opts = _take(cfg, {"sizes": _REQUIRED, "beta": "critical",
                       "samples": _REQUIRED, "seed": _REQUIRED,
                       "parts": "two_point", "height_size": None,
                       "boundary_size": None})
    parts = tuple(_as_list(opts["parts"]))
    rep = decomposition.scaling_study(
        [int(s) for s in _as_list(opts["sizes"])], _beta(opts["beta"]),
        int(opts["samples"]), int(opts["seed"]), parts=parts,
        height_size=opts["height_size"], boundary_size=opts["boundary_size"])
    for part in parts:
        table = rep.get(part)
        if isinstance(table, list) and table:
            header = list(table[0])
            run.write_csv(f"{part}.csv", header,
                          [[row[h] for h in header] for row in table])
    run.write_json("fits.json",
                   {k: v for k, v in rep.items() if not isinstance(v, list)})
    return EXIT_OK


def _cmd_gff_chaos(cfg, run):
    opts = _take(cfg, {"grid": _REQUIRED, "alpha": 1.0 / math.sqrt(2.0),
                       "x": _REQUIRED, "y": _REQUIRED,
                       "mode": "cos-cos", "samples": _REQUIRED,
                       "seed": _REQUIRED, "pairs": 0,
                       "alpha_grid": None, "u_grid": None})
    gdims = [int(v) for v in _as_list(opts["grid"])]
    grid = gdims[0] if len(gdims) == 1 else tuple(gdims[:2])
    x = tuple(int(v) for v in _as_list(opts["x"]))
    y = tuple(int(v) for v in _as_list(opts["y"]))
    rep = gff.chaos_pair_mc(grid, float(opts["alpha"]), x, y,
                            str(opts["mode"]), int(opts["samples"]),
                            int(opts["seed"]))
    run.write_json("chaos.json", rep)
    status = EXIT_OK if rep["pass"] else EXIT_STATISTICAL
    if int(opts["pairs"]) > 0:
        agrid = [float(a) for a in _as_list(opts["alpha_grid"] or
                                            [float(opts["alpha"])])]
        ugrid = [float(u) for u in _as_list(opts["u_grid"] or [0.0])]
        ineq = gff.check_chaos_inequalities(grid, int(opts["pairs"]),
                                            agrid, ugrid,
                                            int(opts["seed"]))
        run.write_json("inequalities.json", ineq)
        if ineq["violations"]:
            status = EXIT_INVARIANT
    return status


def _cmd_continuum_inequalities(cfg, run):
    opts = _take(cfg, {"pairs": _REQUIRED, "alpha_grid": _REQUIRED,
                       "u_grid": 0.0, "seed": _REQUIRED,
                       "hyperbolic_triples": 0,
                       "hyperbolic_alpha_grid": 1.0})
    agrid = [float(a) for a in _as_list(opts["alpha_grid"])]
    ugrid = [float(u) for u in _as_list(opts["u_grid"])]
    rep = continuum.check_inequalities(int(opts["pairs"]), agrid, ugrid,
                                       int(opts["seed"]))
    run.write_json("kernel_inequalities.json", rep)
    status = EXIT_OK if not rep["violations"] else EXIT_INVARIANT
    if int(opts["hyperbolic_triples"]) > 0:
        hgrid = [float(a) for a in _as_list(opts["hyperbolic_alpha_grid"])]
        hyp = continuum.check_hyperbolic(int(opts["hyperbolic_triples"]),
                                         hgrid, int(opts["seed"]))
        run.write_json("hyperbolic.json", hyp)
        if hyp["violations"]:
            status = EXIT_INVARIANT
    return status


def _cmd_loewner_sweep(cfg, run):
    opts = _take(cfg, {"driver": "constant", "driver_value": 0.0,
                       "driver_scale": 1.0, "t_max": 0.5,
                       "triples": _REQUIRED, "alpha_grid": _REQUIRED,
                       "dt": 1e-3, "hadamard_dt": 1e-4, "seed": _REQUIRED})
    name = str(opts["driver"])
    if name == "constant":
        driver = loewner.ConstantDriver(float(opts["driver_value"]))
    elif name == "brownian":
        driver = loewner.BrownianDriver(int(opts["seed"]),
                                        scale=float(opts["driver_scale"]),
                                        t_max=float(opts["t_max"]) + 0.1)
    else:
        raise ConfigError(f"unknown driver {name!r}")
    chain = loewner.LoewnerChain(driver, t_max=float(opts["t_max"]) + 0.1)
    rng = np.random.default_rng(int(opts["seed"]))
    alphas = [float(a) for a in _as_list(opts["alpha_grid"])]
    rows = []
    n_done = 0
    while n_done < int(opts["triples"]):
        t = float(rng.uniform(0.0, float(opts["t_max"])))
        r = 0.6 * np.sqrt(rng.random(2))
        th = 2 * np.pi * rng.random(2)
        z, w = (r * np.exp(1j * th)).tolist()
        if z == w:
            continue
        try:
            had = loewner.hadamard_check(chain, t, z, w,
                                         float(opts["hadamard_dt"]))
            for alpha in alphas:
                mono = loewner.monotonicity_check(chain, t, z, w, alpha,
                                                 dt=float(opts["dt"]))
                rows.append((t, z.real, z.imag, w.real, w.imag, alpha,
                             mono["dC"], mono["dS"], had["rel_err"]))
        except PointSwallowed:
            continue  # swallowed point: draw another triple
        n_done += 1
    run.write_csv("sweep.csv",
                  ["t", "z_re", "z_im", "w_re", "w_im", "alpha",
                   "dC", "dS", "hadamard_rel_err"], rows)
    run.write_json("sweep_summary.json", {
        "n_triples": n_done, "max_dC": max(r[6] for r in rows),
        "min_dS_alpha_le_1": min(r[7] for r in rows if r[5] <= 1.0),
        "max_hadamard_rel_err": max(r[8] for r in rows),
        "seed": int(opts["seed"])})
    return EXIT_OK


def _cmd_oracle_enumerate(cfg, run):
    opts = _take(cfg, {"shape": "unit_square", "size": None, "delta": None,
                       "bc": _REQUIRED, "beta": "critical",
                       "double": 0})
    dom = _domain(opts)
    table = currents.enumerate_trace_distribution(
        dom, str(opts["bc"]), _beta(opts["beta"]),
        double=bool(int(opts["double"])))
    rows = [(f"{k[0]:x}", f"{k[1]:x}", p)
            for k, p in sorted(table.items())]
    run.write_csv("trace_distribution.csv",
                  ["odd_mask_hex", "occupied_mask_hex", "probability"], rows)
    run.write_json("summary.json", {"n_atoms": len(rows),
                                    "total": sum(p for _, _, p in rows)})
    return EXIT_OK


_COMMANDS = {
    "sample-coupling": _cmd_sample_coupling,
    "decompose": _cmd_decompose,
    "verify-switching": _cmd_verify_switching,
    "verify-bosonisation": _cmd_verify_bosonisation,
    "scaling-study": _cmd_scaling_study,
    "gff-chaos": _cmd_gff_chaos,
    "continuum-inequalities": _cmd_continuum_inequalities,
    "loewner-sweep": _cmd_loewner_sweep,
    "oracle-enumerate": _cmd_oracle_enumerate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="xorcurrents",
        description="Reproducible verification experiments for the "
                    "XOR-Ising excursion decomposition workbench.")
    parser.add_argument("command", choices=sorted(_COMMANDS),
                        help="experiment to run")
    parser.add_argument("--config", required=True,
                        help="key = value configuration file")
    parser.add_argument("--out", required=True,
                        help="output directory for artifacts")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        cfg = parse_config(args.config)
        run = _Run(args.out, args.command, cfg)
        status = _COMMANDS[args.command](cfg, run)
        run.finish()
        return status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleCapacityExceeded as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except _INVARIANT_ERRORS as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except XorCurrentsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
