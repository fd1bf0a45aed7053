"""Command-line front end.

Every subcommand reads one JSON configuration, runs its experiment, and writes
``<out>/<command>/<config-hash>/report.json`` plus CSV tables. The report is a
pure function of configuration, command options and package version; the
wall-clock time lives in a separate ``meta.json`` so reports stay
byte-identical across reruns. Exit status is 0 when every check passes, 1 when
a scientific check fails and 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, config_from_dict, config_hash, load_config
from .errors import CeilingError, LeeLabError, NoBoundStateError

__all__ = ["main", "run_command", "ResultRecord", "COMMANDS", "OUT_ENV"]

OUT_ENV = "LEELAB_OUT"
DEFAULT_OUT = "leelab-results"

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultRecord:
    config_hash: str
    command: str
    timestamp: str
    payload: dict
    version: str
    directory: Path
    cached: bool

    @property
    def passed(self) -> bool:
        return bool(self.payload.get("passed"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


class _Checks:
    def __init__(self):
        self.items = []

    def add(self, name, passed, value=None, limit=None):
        self.items.append({"name": name, "passed": bool(passed), "value": value, "limit": limit})

    @property
    def passed(self):
        return all(c["passed"] for c in self.items)


# --------------------------------------------------------------------- commands

def cmd_renorm(cfg: RunConfig, opts):
    from .principal import bare_mass_sweep, fit_log_divergence, bare_mass
    from .fock import enumerate_sector
    from .spectral import ground_energy

    md, cu = cfg["model"], cfg["scan"]["cutoffs"]
    cutoffs = np.logspace(math.log10(cu["start"]), math.log10(cu["stop"]), cu["num"])
    sweep = bare_mass_sweep(cfg.manifold, md["m"], md["mu_p"], md["lambda"], cutoffs,
                            mode_ceiling=max(cfg["truncation"]["mode_ceiling"], 100_000))
    mus = np.array([r.mu for r in sweep])
    a, b, r2 = fit_log_divergence(cutoffs, mus)
    checks = _Checks()
    if md["lambda"] > 0:
        checks.add("log fit R^2 > 0.999", r2 > 0.999, r2, 0.999)
        checks.add("log fit slope > 0", a > 0, a, 0.0)
    else:
        dev = float(np.max(np.abs(mus - md["mu_p"])))
        checks.add("mu(Lambda) = mu_p at zero coupling", dev == 0.0, dev, 0.0)
    # renormalization condition: the n = 0 root sits at mu_p
    p0 = cfg.params(n=0)
    worst = abs(ground_energy(p0, enumerate_sector(p0.catalog, 0)).E_gr - md["mu_p"])
    checks.add("n=0 root equals mu_p", worst <= 1e-12, worst, 1e-12)
    base = bare_mass(p0)
    rows = ["cutoff,mu_bare,tail_estimate"] + [
        f"{c!r},{r.mu!r},{r.tail_estimate!r}" for c, r in zip(cutoffs.tolist(), sweep)]
    results = {
        "cutoffs": cutoffs, "mu_bare": mus, "tail_estimate": [r.tail_estimate for r in sweep],
        "fit": {"a": a, "b": b, "r2": r2, "weyl_slope": md["lambda"] ** 2 / (8 * math.pi)},
        "configured_cutoff": {"cutoff": base.cutoff, "mu_bare": base.mu, "tail_estimate": base.tail_estimate},
    }
    return results, checks, {"renorm.csv": "\n".join(rows) + "\n"}


def _sector(cfg, params):
    from .fock import enumerate_sector
    return enumerate_sector(params.catalog, params.n, dim_ceiling=cfg["truncation"]["dim_ceiling"])


def _e_grid(cfg, params):
    from .bounds import default_lower_bound
    g = cfg["scan"]["E_grid"]
    lo = g["lower"] if g["lower"] is not None else default_lower_bound(params)
    hi = g["upper"] if g["upper"] is not None else params.threshold
    return np.linspace(lo, hi, g["points"])


def cmd_flow(cfg: RunConfig, opts):
    from .spectral import eigen_flow, fh_check, flow_to_csv

    params = cfg.params()
    sector = _sector(cfg, params)
    grid = _e_grid(cfg, params)
    dc = cfg["truncation"]["dense_ceiling"]
    samples = eigen_flow(params, sector, grid, n_eigs=4, dense_ceiling=dc, workers=opts.threads)
    w0 = np.array([s.omega0 for s in samples])
    fh = fh_check(params, sector, samples, dense_ceiling=dc)
    checks = _Checks()
    diffs = np.diff(w0)
    checks.add("omega_0 strictly decreasing", bool(np.all(diffs < 0)), float(diffs.max()), 0.0)
    finite = fh[np.isfinite(fh)]
    worst = float(finite.max()) if finite.size else 0.0
    checks.add("Feynman-Hellmann vs central difference", worst < 1e-6, worst, 1e-6)
    results = {
        "n_modes": len(params.catalog), "dim": sector.dim,
        "E": [s.E for s in samples], "omega": [s.eigenvalues for s in samples],
        "domega0_dE": [s.fh_derivative for s in samples], "fh_relative_error": fh,
    }
    return results, checks, {"flow.csv": flow_to_csv(samples)}


def _wavefunction_csv(upper, lower, rep):
    lines = ["block,index,occupation,amplitude"]
    for name, basis, vec in (("upper", upper, rep.wavefunction_upper), ("lower", lower, rep.wavefunction_lower)):
        for i in range(basis.dim):
            occ = " ".join(str(int(c)) for c in basis.counts[i])
            lines.append(f"{name},{i},{occ},{float(vec[i])!r}")
    return "\n".join(lines) + "\n"


def cmd_groundstate(cfg: RunConfig, opts):
    from .bounds import bound_report
    from .fock import enumerate_sector
    from .spectral import solve_ground_state

    params = cfg.params()
    sector = _sector(cfg, params)
    dc = cfg["truncation"]["dense_ceiling"]
    checks = _Checks()
    try:
        rep = solve_ground_state(params, sector, n_flow=cfg["scan"]["E_grid"]["points"],
                                 dense_ceiling=dc, workers=opts.threads)
    except NoBoundStateError as exc:
        checks.add("bound state below threshold", False, exc.omega_b, 0.0)
        return {"error": str(exc), "bracket": [exc.a, exc.b],
                "omega_at_endpoints": [exc.omega_a, exc.omega_b]}, checks, {}
    bounds = bound_report(params, rep.E_gr, sector=sector if params.n >= 1 else None)
    results = {
        "n_modes": len(params.catalog), "dim": sector.dim,
        "e_gr": rep.E_gr, "bracket": list(rep.bracket), "bound_state": rep.bound_state,
        "threshold": params.threshold, "gap": rep.gap, "degenerate": rep.degenerate,
        "normalization": rep.normalization, "normalization_identity": rep.normalization_identity,
        "norm_factor": rep.norm_factor, "fh_derivative": rep.fh_derivative,
        "flow_samples": [{"E": s.E, "omega": s.eigenvalues, "domega0_dE": s.fh_derivative}
                         for s in rep.flow_samples or []],
        "wavefunction_upper": rep.wavefunction_upper, "wavefunction_lower": rep.wavefunction_lower,
        "bounds": bounds.to_dict(),
    }
    if params.n == 0:
        dev = abs(rep.E_gr - params.mu_p)
        checks.add("n=0 ground energy equals mu_p", dev <= 1e-12, dev, 1e-12)
    checks.add("lower bound <= E_gr", bounds.lower_ok, bounds.E_gr - bounds.lower_bound, 0.0)
    checks.add("E_gr below threshold" if params.lam > 0 and params.n >= 1 else "E_gr at or below threshold",
               bounds.upper_ok, params.threshold - rep.E_gr, 0.0)
    nd = abs(rep.normalization - 1.0)
    checks.add("wavefunction normalized", nd < 1e-8, nd, 1e-8)
    ni = abs(rep.normalization_identity - 1.0)
    checks.add("normalization identity", ni < 1e-8, ni, 1e-8)
    upper = enumerate_sector(params.catalog, params.n + 1, dim_ceiling=cfg["truncation"]["dim_ceiling"])
    if opts.oracle:
        from .hamiltonian import assemble_h
        H = assemble_h(params, dim_ceiling=cfg["truncation"]["dim_ceiling"])
        e0, v0 = H.ground()
        psi = np.concatenate([rep.wavefunction_upper, rep.wavefunction_lower])
        diff = abs(rep.E_gr - e0)
        overlap = abs(float(psi @ v0))
        results["oracle_comparison"] = {"oracle_e": e0, "abs_diff": diff, "overlap": overlap}
        checks.add("oracle energy match", diff < 1e-9, diff, 1e-9)
        checks.add("oracle overlap", overlap > 1 - 1e-8, 1 - overlap, 1e-8)
    return results, checks, {"wavefunction.csv": _wavefunction_csv(upper, sector, rep)}


def cmd_bounds(cfg: RunConfig, opts):
    from .bounds import (bound_report, crude_inequality_holds, default_heat_constant,
                         invertibility_threshold, relative_potential_norm)
    from .hamiltonian import lowering_inequality
    from .spectral import ground_energy, phi_eigenpairs

    params = cfg.params()
    sector = _sector(cfg, params)
    dc = cfg["truncation"]["dense_ceiling"]
    C = default_heat_constant(params.catalog.spec)
    checks = _Checks()
    root = ground_energy(params, sector, dense_ceiling=dc)
    rep = bound_report(params, root.E_gr, C=C, sector=sector if params.n >= 1 else None)
    checks.add("lower bound <= E_gr", rep.lower_ok, rep.E_gr - rep.lower_bound, 0.0)
    checks.add("E_gr below threshold", rep.upper_ok, rep.threshold - rep.E_gr, 0.0)
    results = {"report": rep.to_dict(), "n_modes": len(params.catalog), "dim": sector.dim}
    if params.n >= 1:
        checks.add("variational value negative", rep.variational_negative, rep.variational_value, 0.0)
        w_thr = float(phi_eigenpairs(params, sector, params.threshold, k=1, dense_ceiling=dc)[0][0])
        checks.add("variational value >= omega_0(threshold)", rep.variational_value >= w_thr - 1e-10,
                   rep.variational_value - w_thr, -1e-10)
        results["omega0_at_threshold"] = w_thr
        results["closed_form_discrepancy"] = {
            "printed_minus_value": rep.printed_closed_form - rep.variational_value,
            "recomputed_minus_value": rep.recomputed_closed_form - rep.variational_value,
        }
        low = lowering_inequality(params, seed=cfg["scan"]["seed"])
        checks.add("lowering inequality with factor n", low.holds, low.empirical_constant, low.stated_factor)
        results["lowering_inequality"] = {"stated_factor": low.stated_factor,
                                          "empirical_constant": low.empirical_constant,
                                          "sharp_factor": low.sharp_factor}
    E_star = invertibility_threshold(params, C)
    samples = []
    for offset in (0.01, 0.1, 1.0, 5.0):
        E = E_star - offset
        un = relative_potential_norm(params, sector, E)
        w0 = float(phi_eigenpairs(params, sector, E, k=1, dense_ceiling=dc)[0][0])
        samples.append({"E": E, "relative_potential_norm": un, "omega0": w0})
    checks.add("||U~|| < 1 below E_*", all(s["relative_potential_norm"] < 1 for s in samples),
               max(s["relative_potential_norm"] for s in samples), 1.0)
    checks.add("omega_0 > 0 below E_*", all(s["omega0"] > 0 for s in samples),
               min(s["omega0"] for s in samples), 0.0)
    chi = np.logspace(-3, 3, 25)
    checks.add("crude decoupling inequality", crude_inequality_holds(params, chi))
    results["below_threshold_samples"] = samples
    results["E_star"] = E_star
    return results, checks, {}


def cmd_resolvent_check(cfg: RunConfig, opts):
    from .hamiltonian import (assemble_h, block_resolvent, conjugation_residual, decay_check,
                              decay_to_csv, direct_inverse, pseudo_resolvent_residual,
                              random_energy_pairs, residuals_to_csv)
    from concurrent.futures import ThreadPoolExecutor

    params = cfg.params()
    H = assemble_h(params, dim_ceiling=cfg["truncation"]["dim_ceiling"])
    sc = cfg["scan"]
    real, cplx = random_energy_pairs(H, count=sc["pairs"], seed=sc["seed"])
    pairs = real + cplx

    def res(pair):
        return pseudo_resolvent_residual(H, *pair)

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            vals = list(pool.map(res, pairs))
            conj = list(pool.map(lambda p: conjugation_residual(H, p[0]), cplx))
    else:
        vals = [res(p) for p in pairs]
        conj = [conjugation_residual(H, p[0]) for p in cplx]
    e0, _ = H.ground()
    Eb = e0 - 1.0
    blk = float(np.max(np.abs(block_resolvent(H, Eb).matrix - direct_inverse(H, Eb))))
    lk = sc["lambda_k"]
    grid = np.logspace(math.log10(lk["start"]), math.log10(lk["stop"]), lk["num"])
    dec = decay_check(H, grid, workers=opts.threads)
    checks = _Checks()
    worst_real = max(vals[: len(real)])
    worst_cplx = max(vals[len(real):])
    checks.add("pseudo-resolvent residual (real pairs)", worst_real < 1e-10, worst_real, 1e-10)
    checks.add("pseudo-resolvent residual (complex pairs)", worst_cplx < 1e-10, worst_cplx, 1e-10)
    checks.add("R(conj E) = R(E)^+", max(conj) < 1e-10, max(conj), 1e-10)
    checks.add("block formula = direct inverse", blk < 1e-10, blk, 1e-10)
    lo, hi = dec.slope_range
    checks.add("decay slopes in [-1.2, -0.8]", lo >= -1.2 and hi <= -0.8, [lo, hi], [-1.2, -0.8])
    top = float(dec.norms[-1].max())
    if lk["stop"] >= 1e6:
        checks.add("decay norm at top |lambda_k| < 1e-4", top < 1e-4, top, 1e-4)
    bmax = float(np.nanmax(dec.beta_slopes))
    checks.add("beta-block slope <= -1/2", bmax <= -0.5, bmax, -0.5)
    print(f"max pseudo-resolvent residual: {max(vals):.3e}")
    results = {
        "dim": H.dim, "mu_bare": H.mu, "ground_eigenvalue": e0,
        "max_residual": max(vals), "max_conjugation_residual": max(conj), "block_vs_direct": blk,
        "decay": {"lambda_k": grid, "slopes": dec.slopes, "beta_slopes": dec.beta_slopes,
                  "top_norm": top, "n_probes": int(dec.norms.shape[1])},
    }
    rows = [(a, b, r) for (a, b), r in zip(pairs, vals)]
    return results, checks, {"residuals.csv": residuals_to_csv(rows), "decay.csv": decay_to_csv(dec)}


def cmd_heatkernel(cfg: RunConfig, opts):
    from .bounds import HEAT_FIT_GRID, default_heat_constant
    from .manifold import heat_kernel_diag, heat_kernel_diag_images

    spec = cfg.manifold
    V = spec.volume
    checks = _Checks()
    ts = np.logspace(-2, 1, 31)
    spectral = np.array([heat_kernel_diag(spec, t) for t in ts])
    results = {"volume": V, "t": ts, "spectral": spectral}
    lines = ["t,spectral,images"]
    if spec.kind == "torus":
        images = np.array([heat_kernel_diag_images(spec, t) for t in ts])
        rel = float(np.max(np.abs(spectral - images) / np.abs(images)))
        checks.add("spectral sum = image sum", rel < 1e-10, rel, 1e-10)
        results["images"] = images
        lines += [f"{t!r},{s!r},{i!r}" for t, s, i in zip(ts.tolist(), spectral.tolist(), images.tolist())]
    else:
        lines += [f"{t!r},{s!r}," for t, s in zip(ts.tolist(), spectral.tolist())]
    short = 4 * math.pi * 1e-4 * heat_kernel_diag(spec, 1e-4)
    checks.add("4 pi t K_t at t=1e-4 in [0.99, 1.01]", 0.99 <= short <= 1.01, short, [0.99, 1.01])
    C = default_heat_constant(spec)
    dense = np.logspace(math.log10(HEAT_FIT_GRID[0]), math.log10(HEAT_FIT_GRID[-1]), 10 * HEAT_FIT_GRID.size)
    excess = max((heat_kernel_diag(spec, t) - (1 / V + C / t)) / (1 / V + C / t) for t in dense)
    checks.add("K_t <= 1/V + C/t on 10x denser grid (relative slack)", excess <= 1e-12, excess, 1e-12)
    results.update({"short_time": short, "C": C})
    return results, checks, {"heatkernel.csv": "\n".join(lines) + "\n"}


def cmd_lightfront_bounds(cfg: RunConfig, opts):
    from .lightfront import (LightFrontParams, beta_decay, derive_c0, k1, k1_chain_checks,
                             k1_log_bound, lightfront_lower_bound, lightfront_table_csv,
                             u_chain_checks, u_norm_bound)

    md = cfg["model"]
    n = max(md["n"], 1)
    p = LightFrontParams(md["m"], md["mu_p"], md["lambda"], n)
    m = p.m
    edge = (n - 1) * m + p.mu_P
    E_grid = edge - np.linspace(5.0, 0.05, 10) * m
    checks = _Checks()
    ub = [u_norm_bound(p, E) for E in E_grid]
    checks.add("U quadrature <= closed form", all(u.quadrature.value <= u.closed_form for u in ub),
               max(u.quadrature.value - u.closed_form for u in ub), 0.0)
    ref = u_norm_bound(LightFrontParams(1.0, 0.5, 1.0, 2), 0.0)
    dref = abs(ref.closed_form - math.pi / 1.5)
    checks.add("closed form at reference point = pi/1.5", dref <= 1e-12, dref, 1e-12)
    C0, C0_grid = derive_c0(p)
    h_grid = (n - 1) * m + np.linspace(0.0, 5.0, 10) * m
    margin = math.inf
    for E in E_grid:
        for h in h_grid:
            margin = min(margin, k1(p, E, h).value - k1_log_bound(p, E, h, C0))
    checks.add("K1 >= C0 ln((h0-E+mu_P+m)/m)", margin >= 0, margin, 0.0)
    chain = k1_chain_checks(p, E_grid[-1], h_grid[0]) + u_chain_checks(p, E_grid[-1])
    for c in chain:
        checks.add(f"pointwise step: {c.name}", c.holds, c.worst_margin)
    beta = beta_decay(p, np.logspace(2, 4, 5))
    sp, sq = beta.slope("printed"), beta.slope("quadrature")
    checks.add("beta printed slope = -1 +/- 0.1", abs(sp + 1) <= 0.1, sp, [-1.1, -0.9])
    checks.add("beta quadrature slope = -1 +/- 0.1", abs(sq + 1) <= 0.1, sq, [-1.1, -0.9])
    qd = float(np.max(np.abs(beta.quadrature - beta.derived) / beta.derived))
    checks.add("||g||^2 quadrature = 1/(4 pi ((n+1) m + L))", qd < 1e-8, qd, 1e-8)
    results = {
        "n_used": n, "E_grid": E_grid, "lower_bound": lightfront_lower_bound(p),
        "u_quadrature": [u.quadrature.value for u in ub], "u_factorized": [u.factorized for u in ub],
        "u_closed_form": [u.closed_form for u in ub], "reference_closed_form": ref.closed_form,
        "C0": C0, "C0_grid_min": C0_grid,
        "beta": {"L": beta.L, "printed": beta.printed, "quadrature": beta.quadrature,
                 "printed_over_quadrature": beta.printed / beta.quadrature,
                 "ratio_1e2_1e4": float(beta.printed[0] / beta.printed[-1])},
    }
    beta_csv = "L,printed,quadrature,derived\n" + "".join(
        f"{a!r},{b!r},{c!r},{d!r}\n" for a, b, c, d in
        zip(beta.L.tolist(), beta.printed.tolist(), beta.quadrature.tolist(), beta.derived.tolist()))
    return results, checks, {"lightfront.csv": lightfront_table_csv(p, E_grid, h0=float(h_grid[0])),
                             "beta.csv": beta_csv}


COMMANDS = {
    "renorm": cmd_renorm,
    "flow": cmd_flow,
    "groundstate": cmd_groundstate,
    "bounds": cmd_bounds,
    "resolvent-check": cmd_resolvent_check,
    "heatkernel": cmd_heatkernel,
    "lightfront-bounds": cmd_lightfront_bounds,
}


# ------------------------------------------------------------------ orchestration

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_payload(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


@dataclass
class _Options:
    oracle: bool = False
    threads: int = 1


def run_command(command: str, config: RunConfig, out_dir, use_cache: bool = True,
                oracle: bool = False, threads: int = 1) -> ResultRecord:
    """Run (or fetch from the cache) one subcommand and write its artifacts."""
    if command not in COMMANDS:
        raise KeyError(command)
    extra = {"oracle": bool(oracle)} if command == "groundstate" else {}
    h = config_hash(config, command, extra, __version__)
    directory = Path(out_dir) / command / h
    report = directory / "report.json"
    if use_cache and report.exists():
        try:
            payload = json.loads(report.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            payload = None
        if payload is not None and payload.get("config_hash") == h:
            meta = json.loads((directory / "meta.json").read_text()) if (directory / "meta.json").exists() else {}
            return ResultRecord(h, command, meta.get("timestamp", ""), payload, __version__, directory, True)
    results, checks, tables = COMMANDS[command](config, _Options(oracle=oracle, threads=max(1, threads)))
    payload = {
        "command": command, "config_hash": h, "version": __version__,
        "config": json.loads(config.canonical()), "options": extra,
        "passed": checks.passed, "checks": checks.items, "results": results,
    }
    payload = json.loads(dumps_payload(payload))
    formats = config["output"]["formats"]
    if "csv" in formats:
        for name, text in sorted(tables.items()):
            _atomic_write(directory / name, text)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _atomic_write(directory / "meta.json", json.dumps(
        {"timestamp": stamp, "command": command, "config_hash": h, "version": __version__},
        sort_keys=True, indent=2) + "\n")
    # report.json is always written, and last, so a partial run never looks like a cache hit
    _atomic_write(report, dumps_payload(payload))
    return ResultRecord(h, command, stamp, payload, __version__, directory, False)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file (defaults apply when omitted)")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--oracle", action="store_true", help="cross-check against the explicit Hamiltonian")
    common.add_argument("--no-cache", action="store_true", help="recompute even when a cached report exists")
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid scans")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="leelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"leelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else config_from_dict({})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg["output"]["directory"] or os.environ.get(OUT_ENV) or DEFAULT_OUT
    if args.threads < 1:
        print("config error: field '--threads': must be positive", file=sys.stderr)
        return 2
    try:
        rec = run_command(args.command, cfg, out, use_cache=not args.no_cache,
                          oracle=args.oracle, threads=args.threads)
    except (ConfigError, CeilingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LeeLabError as exc:
        print(f"FAIL {args.command}: {exc}", file=sys.stderr)
        return 1
    for c in rec.payload["checks"]:
        tag = "PASS" if c["passed"] else "FAIL"
        extra = "" if c["value"] is None else f" (value {c['value']}, limit {c['limit']})"
        print(f"{tag} {c['name']}{extra}")
    print(f"report: {rec.directory / 'report.json'}{' [cached]' if rec.cached else ''}")
    return 0 if rec.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
