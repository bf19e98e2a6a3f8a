"""Experiment runner: JSON config in, CSV/JSON products plus a manifest out.

Commands: `run <config.json>`, `validate <config.json>`, `list-experiments`.
Every output file is deterministic for a fixed config and seed: floats are
printed with 17 significant digits, JSON keys are sorted, and the only RNG in
play is seeded from the config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import nogo, spectral, walk
from .evolution import evolve, step
from .fermion import (
    DimensionTooLargeError,
    LadderOp,
    NotLinearError,
    OpKind,
    heisenberg_image,
)
from .lattice import (
    Boundary,
    Eps,
    FockState,
    LatticeConfig,
    LatticeError,
    inner_product,
    vacuum,
)
from .fermion import build_state


class ParseError(Exception):
    """Malformed or out-of-bounds experiment configuration."""


class ResourceError(Exception):
    """Requested instance exceeds a documented size cap."""


EXPERIMENTS = (
    "dispersion_sweep",
    "wavepacket",
    "two_particle_scatter",
    "dirac_limit",
    "heisenberg_check",
    "dirac_sea",
    "nogo_witness",
    "nogo_csp",
)


# ---------------------------------------------------------------------------
# deterministic serialization


def fmt(x: float) -> str:
    return "%.17g" % float(x)


def _jsonable(obj):
    """Render floats as 17-significant-digit strings-free JSON fragments."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_jsonable(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return (
            "{"
            + ", ".join(f"{json.dumps(str(k))}: {_jsonable(v)}" for k, v in items)
            + "}"
        )
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj) -> str:
    return _jsonable(obj) + "\n"


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(fmt(v) if isinstance(v, float) else str(v) for v in row)
        )
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# config handling


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def load_config(path: str | Path) -> dict:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as e:
        raise ParseError(f"cannot read config {p}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{p}: invalid JSON at line {e.lineno}: {e.msg}") from e
    _require(isinstance(raw, dict), f"{p}: top level must be an object")
    for fieldname in ("experiment", "lattice", "output_dir", "seed"):
        _require(fieldname in raw, f"{p}: missing required field '{fieldname}'")
    _require(
        raw["experiment"] in EXPERIMENTS,
        f"{p}: unknown experiment {raw['experiment']!r}; see list-experiments",
    )
    _require(isinstance(raw["seed"], int), f"{p}: seed must be an integer")
    raw.setdefault("params", {})
    _require(isinstance(raw["params"], dict), f"{p}: params must be an object")
    lat = raw["lattice"]
    _require(isinstance(lat, dict) and "L" in lat, f"{p}: lattice needs field 'L'")
    try:
        raw["_config"] = LatticeConfig(
            L=int(lat["L"]),
            dx=float(lat.get("dx", 1.0)),
            dt=float(lat.get("dt", 1.0)),
            theta=float(lat.get("theta", 0.0)),
            boundary=Boundary(lat.get("boundary", "periodic")),
        )
    except (ValueError, LatticeError) as e:
        raise ParseError(f"{p}: bad lattice block: {e}") from e
    params = raw["params"]
    nsteps = params.get("nsteps", 0)
    _require(isinstance(nsteps, int) and nsteps >= 0, f"{p}: nsteps must be >= 0")
    for key in ("cell",):
        if key in params:
            _require(
                0 <= int(params[key]) < raw["_config"].L,
                f"{p}: {key}={params[key]} outside the lattice",
            )
    return raw


def config_hash(raw: dict) -> str:
    clean = {k: v for k, v in raw.items() if not k.startswith("_")}
    return hashlib.sha256(
        json.dumps(clean, sort_keys=True).encode()
    ).hexdigest()


# ---------------------------------------------------------------------------
# experiments: each returns (rows_written, checks); checks are dicts with
# name / passed / measured / tolerance


def _check(name: str, measured: float, tol: float, *, lower: bool = False) -> dict:
    passed = measured >= tol if lower else measured <= tol
    return {
        "name": name,
        "passed": bool(passed),
        "measured": float(measured),
        "tolerance": float(tol),
        "direction": "min" if lower else "max",
    }


def run_dispersion_sweep(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    rows = spectral.dispersion_rows(cfg)
    write_csv(
        outdir / "dispersion.csv",
        ["k", "kdx", "phi", "E_lattice", "E_dirac", "abs_err"],
        rows,
    )
    checks = []
    phases = spectral.n_particle_eigenphases(cfg, 1)
    expected = np.sort(
        np.concatenate(
            [[-r[2] for r in rows], [r[2] for r in rows]]
        )
    )
    dev = spectral.circular_multiset_distance(phases, expected)
    checks.append(_check("one_particle_eigenphases", dev, 1e-10))
    slope = spectral.phi_convergence_slope()
    checks.append(_check("dispersion_convergence_slope", slope, 2.9, lower=True))
    extras = {
        "max_abs_err": max(r[5] for r in rows),
        "convergence_slope": slope,
    }
    return extras, checks


def run_wavepacket(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    cell = int(params.get("cell", cfg.L // 2))
    eps = Eps.PLUS if params.get("eps", "plus") == "plus" else Eps.MINUS
    nsteps = int(params.get("nsteps", cfg.L // 2))
    rows = walk.wavepacket_trace(cfg, (cell, eps), nsteps)
    write_csv(outdir / "wavepacket.csv", ["step", "cell", "prob"], rows)
    norm_dev = 0.0
    leak = 0.0
    for t in range(nsteps + 1):
        probs = [p for (tt, _, p) in rows if tt == t]
        norm_dev = max(norm_dev, abs(sum(probs) - 1.0))
        for c, p in enumerate(probs):
            d = abs(c - cell)
            if cfg.boundary is Boundary.PERIODIC:
                d = min(d, cfg.L - d)
            if d > t:
                leak += p
    checks = [
        _check("norm_conservation", norm_dev, 1e-12),
        _check("light_cone_leak", leak, 1e-12),
    ]
    # cross-validate the dense walk against the automaton's one-particle
    # sector at each requested coin angle
    for theta in params.get("compare_thetas", [cfg.theta]):
        ccfg = LatticeConfig(cfg.L, cfg.dx, cfg.dt, float(theta), cfg.boundary)
        dev = walk.compare_one_particle(ccfg, (cell, eps), nsteps)
        checks.append(_check(f"walk_vs_automaton_theta_{theta}", dev, 1e-12))
    return {"nsteps": nsteps}, checks


def run_two_particle_scatter(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    x = int(params.get("cell", cfg.L // 2 - 1))
    c, s = math.cos(cfg.theta), math.sin(cfg.theta)
    initial = build_state(
        cfg,
        [
            LadderOp(OpKind.CREATE, x, Eps.PLUS),
            LadderOp(OpKind.CREATE, x + 1, Eps.MINUS),
        ],
    )
    final = step(initial)
    probes = [
        ("counter_swapped", [(x, Eps.MINUS), (x + 1, Eps.PLUS)], -c * c),
        ("both_left", [(x, Eps.MINUS), (x + 1, Eps.MINUS)], -c * s),
        ("both_right", [(x, Eps.PLUS), (x + 1, Eps.PLUS)], c * s),
        ("counter_restored", [(x, Eps.PLUS), (x + 1, Eps.MINUS)], s * s),
    ]
    rows = []
    checks = []
    for name, sites, expected in probes:
        probe = build_state(cfg, [LadderOp(OpKind.CREATE, c0, e) for c0, e in sites])
        amp = inner_product(probe, final)
        rows.append((name, float(amp.real), float(amp.imag), float(expected)))
        checks.append(_check(f"coefficient_{name}", abs(amp - expected), 1e-14))
    # two counter-movers meeting head-on at cell x from distance one: the
    # crossed pair picks up a bare -1, independent of theta
    meet_initial = build_state(
        cfg,
        [
            LadderOp(OpKind.CREATE, x - 1, Eps.PLUS),
            LadderOp(OpKind.CREATE, x + 1, Eps.MINUS),
        ],
    )
    meet_probe = build_state(
        cfg,
        [LadderOp(OpKind.CREATE, x, Eps.MINUS), LadderOp(OpKind.CREATE, x, Eps.PLUS)],
    )
    amp = inner_product(meet_probe, step(meet_initial))
    rows.append(("head_on_meeting", float(amp.real), float(amp.imag), -1.0))
    checks.append(_check("crossing_phase_minus_one", abs(amp - (-1.0)), 1e-14))
    write_csv(
        outdir / "scatter.csv", ["branch", "re", "im", "expected"], rows
    )
    return {"cell": x, "theta": cfg.theta}, checks


def run_dirac_limit(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    nsamples = int(params.get("nsamples", 100))
    eps = float(params.get("eps", 0.05))
    rows = []
    worst = 0.0
    for _ in range(nsamples):
        theta = float(rng.uniform(-1.2, 1.2))
        k = float(rng.uniform(-math.pi / cfg.dx, math.pi / cfg.dx))
        sample_cfg = LatticeConfig(cfg.L, cfg.dx, cfg.dt, theta, cfg.boundary)
        H = spectral.effective_hamiltonian(sample_cfg, k)
        M = spectral.step_matrix(sample_cfg, k).matrix
        w, v = np.linalg.eigh(H)
        expH = v @ np.diag(np.exp(-1j * w * cfg.dt)) @ v.conj().T
        dev = float(np.max(np.abs(expH - M)))
        worst = max(worst, dev)
        rows.append((theta, k, dev))
    write_csv(outdir / "dirac_limit.csv", ["theta", "k", "exp_dev"], rows)
    checks = [_check("exp_of_hamiltonian_matches_step", worst, 1e-12)]
    # energy deviation from the relativistic dispersion at theta = k dx = eps;
    # third order in eps, hence the cubic tolerance
    small = LatticeConfig(cfg.L, cfg.dx, cfg.dt, eps, cfg.boundary)
    k_small = eps / cfg.dx
    e = spectral.energy(small, k_small)
    checks.append(
        _check("dirac_energy_deviation", abs(e.e_plus - e.dirac), 0.2 * eps**3 / cfg.dt)
    )
    return {"nsamples": nsamples, "eps": eps}, checks


def run_heisenberg_check(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    cell = int(params.get("cell", cfg.L // 2))
    c, s = math.cos(cfg.theta), math.sin(cfg.theta)
    expected = {
        Eps.PLUS: {(cell + 1, Eps.PLUS): c, (cell + 1, Eps.MINUS): s},
        Eps.MINUS: {(cell - 1, Eps.MINUS): c, (cell - 1, Eps.PLUS): -s},
    }
    rows = []
    checks = []
    for eps in (Eps.PLUS, Eps.MINUS):
        combo = heisenberg_image(cfg, LadderOp(OpKind.CREATE, cell, eps))
        fitted = {(op.cell, op.eps): coeff for coeff, op in combo.terms}
        dev = 0.0
        want = expected[eps]
        for key in set(fitted) | set(want):
            dev = max(dev, abs(fitted.get(key, 0.0) - want.get(key, 0.0)))
        for (c2, e2), coeff in sorted(fitted.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            rows.append(
                (eps.name.lower(), c2, e2.name.lower(), coeff.real, coeff.imag)
            )
        checks.append(_check(f"image_coefficients_{eps.name.lower()}", dev, 1e-12))
    write_csv(
        outdir / "heisenberg.csv",
        ["source_eps", "target_cell", "target_eps", "re", "im"],
        rows,
    )
    # negative control: with the doubly-occupied phases flipped to +1 the
    # conjugated operator stops being a linear ladder combination
    try:
        heisenberg_image(
            cfg, LadderOp(OpKind.CREATE, cell, Eps.PLUS), bosonic=True,
            residual_tol=1e-3,
        )
        residual = 0.0
    except NotLinearError as e:
        residual = float(str(e).split("residual ")[1].rstrip(")"))
    checks.append(_check("bosonic_control_residual", residual, 1e-3, lower=True))
    return {"cell": cell, "theta": cfg.theta}, checks


def run_dirac_sea(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    sea, excitations = spectral.dirac_sea_excitations(cfg)
    modulus, phase = spectral.eigenphase_of(sea)
    rows = [
        (e.kind, e.k, e.phi, e.gap, e.eigen_modulus, abs(e.gap - e.phi / cfg.dt))
        for e in excitations
    ]
    write_csv(
        outdir / "dirac_sea.csv",
        ["kind", "k", "phi", "gap", "eigen_modulus", "abs_err"],
        rows,
    )
    (outdir / "sea_state.json").write_text(dump_json(sea.to_json_obj()))
    checks = [
        _check("sea_is_eigenstate", abs(modulus - 1.0), 1e-10),
        _check(
            "excitations_are_eigenstates",
            max(abs(e.eigen_modulus - 1.0) for e in excitations),
            1e-10,
        ),
        _check("gaps_match_phi", max(r[5] for r in rows), 1e-10),
        _check("gaps_positive", min(e.gap for e in excitations), 1e-12, lower=True),
    ]
    return {"sea_phase": phase, "n_excitations": len(excitations)}, checks


def run_nogo_witness(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    lattice_size = int(params.get("lattice_size", 15))
    min_distance = int(params.get("min_distance", 3))
    height = params.get("height")
    spec_name = params.get("spec", "full")
    num_eps = int(params.get("num_eps", 2))
    spec = nogo.trivial_spec(num_eps) if spec_name == "trivial" else nogo.full_spec(num_eps)
    triple = nogo.find_witness_triple(
        spec, lattice_size, min_distance, None if height is None else int(height)
    )
    expect_found = bool(params.get("expect_found", height is None or int(height) > 1))
    obj = triple.to_json_obj() if triple else {"type": "witness", "sites": None}
    (outdir / "witness.json").write_text(dump_json(obj))
    checks = [
        {
            "name": "witness_found_matches_expectation",
            "passed": (triple is not None) == expect_found,
            "measured": float(triple is not None),
            "tolerance": float(expect_found),
            "direction": "eq",
        }
    ]
    return {
        "lattice_size": lattice_size,
        "min_distance": min_distance,
        "found": triple is not None,
    }, checks


def run_nogo_csp(cfg: LatticeConfig, params: dict, rng, outdir: Path):
    dimension = int(params.get("dimension", 2))
    radius = int(params.get("radius", 1))
    lattice_size = int(params.get("lattice_size", 5))
    spec_name = params.get("spec", "full")
    spec = None
    if dimension == 2:
        spec = (
            nogo.trivial_spec(2) if spec_name == "trivial" else nogo.full_spec(2)
        )
    result = nogo.sign_csp(dimension, radius, spec, lattice_size)
    (outdir / "csp.json").write_text(dump_json(result.to_json_obj()))
    expect_sat = bool(
        params.get("expect_sat", dimension == 1 or spec_name == "trivial")
    )
    checks = [
        {
            "name": "satisfiability_matches_expectation",
            "passed": result.sat == expect_sat,
            "measured": float(result.sat),
            "tolerance": float(expect_sat),
            "direction": "eq",
        }
    ]
    return {
        "dimension": dimension,
        "radius": radius,
        "sat": result.sat,
        "constraints": result.num_constraints,
    }, checks


RUNNERS = {
    "dispersion_sweep": run_dispersion_sweep,
    "wavepacket": run_wavepacket,
    "two_particle_scatter": run_two_particle_scatter,
    "dirac_limit": run_dirac_limit,
    "heisenberg_check": run_heisenberg_check,
    "dirac_sea": run_dirac_sea,
    "nogo_witness": run_nogo_witness,
    "nogo_csp": run_nogo_csp,
}


def run_experiment(raw: dict, output_dir: str | None = None, quiet: bool = False) -> int:
    cfg: LatticeConfig = raw["_config"]
    outdir = Path(output_dir or raw["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(raw["seed"])
    try:
        extras, checks = RUNNERS[raw["experiment"]](cfg, raw["params"], rng, outdir)
    except DimensionTooLargeError as e:
        raise ResourceError(str(e)) from e
    ok = all(c["passed"] for c in checks)
    manifest = {
        "config_sha256": config_hash(raw),
        "experiment": raw["experiment"],
        "seed": raw["seed"],
        "lattice": {
            "L": cfg.L,
            "dx": cfg.dx,
            "dt": cfg.dt,
            "theta": cfg.theta,
            "boundary": cfg.boundary.value,
        },
        "parameters": extras,
        "checks": checks,
        "ok": ok,
    }
    (outdir / "manifest.json").write_text(dump_json(manifest))
    if not quiet:
        for c in checks:
            print(
                f"[{'PASS' if c['passed'] else 'FAIL'}] {raw['experiment']}."
                f"{c['name']}: measured {fmt(c['measured'])}"
                f" vs {c['direction']} {fmt(c['tolerance'])}"
            )
        print(f"wrote {outdir / 'manifest.json'}")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fqca",
        description="Fermionic quantum cellular automaton experiment runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--quiet", action="store_true")
    p_run.add_argument("--threads", type=int, default=0, help="0 = auto")
    p_val = sub.add_parser("validate", help="parse and bounds-check a config")
    p_val.add_argument("config")
    sub.add_parser("list-experiments", help="print known experiment names")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(name)
        return 0
    try:
        raw = load_config(args.config)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {args.config} ({raw['experiment']})")
        return 0
    try:
        return run_experiment(raw, args.output_dir, args.quiet)
    except ResourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
