"""Command-line front end: instance generation, solving, and report emission.

Every command is driven by a single JSON config document; command-line flags
override config keys, and the effective config is snapshotted alongside the
outputs so each run is reproducible from its directory alone. Layout: one
directory per run containing config.json, the run record, and report CSVs.

The BFDCQO_THREADS environment variable caps the worker fan-out when a run
config lists several seeds.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import hubo, solvers
from .driver import BfdcqoConfig, RunRecord, run_bfdcqo
from .cd import DriveSpec

BASELINE_SCHEMA = "baseline-run/1"

_PROBLEM_KINDS = ("nn_spin_glass", "max3sat_nn", "max3sat_dense")
_METHODS = ("bfdcqo", "sa", "ls", "tabu", "exact", "brute")


def _load_config(path):
    if path is None:
        return {}
    with open(path) as f:
        return json.load(f)


def _apply_overrides(cfg, args, keys):
    for key in keys:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _build_problem(cfg) -> hubo.HuboProblem:
    if "problem" in cfg:  # path to a problem file wins over inline spec
        if any(k in cfg for k in ("kind", "n")):
            raise SystemExit("config must give either a problem file or an inline spec, not both")
        return hubo.HuboProblem.load(cfg["problem"])
    kind = cfg.get("kind")
    if kind not in _PROBLEM_KINDS:
        raise SystemExit(f"unknown problem kind {kind!r} (choose from {_PROBLEM_KINDS})")
    n = int(cfg["n"])
    seed = int(cfg.get("seed", 0))
    if kind == "nn_spin_glass":
        return hubo.gen_nn_spin_glass(n, seed)
    weighted = bool(cfg.get("weighted", True))
    if kind == "max3sat_nn":
        cnf = hubo.gen_max3sat_nn(n, weighted, seed)
    else:
        cnf = hubo.gen_max3sat(n, float(cfg.get("density", 4.3)), weighted, seed)
    return hubo.cnf_to_hubo(cnf)


def _build_cnf(cfg):
    kind = cfg.get("kind")
    n, seed = int(cfg["n"]), int(cfg.get("seed", 0))
    weighted = bool(cfg.get("weighted", True))
    if kind == "max3sat_nn":
        return hubo.gen_max3sat_nn(n, weighted, seed)
    return hubo.gen_max3sat(n, float(cfg.get("density", 4.3)), weighted, seed)


def _exact_if_tractable(p):
    spread = p.coupling_range()
    if spread <= min(20, p.n):
        e0, _ = solvers.exact_dp(p, r=max(spread, 1))
        return e0
    if p.n <= 24:
        e0, _ = solvers.brute_force(p)
        return e0
    return None


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args, ("kind", "n", "density", "seed"))
    out = Path(args.out or cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    kind = cfg.get("kind")
    stem = f"{kind}_n{cfg['n']}_s{cfg.get('seed', 0)}"
    if kind in ("max3sat_nn", "max3sat_dense"):
        cnf = _build_cnf(cfg)
        cnf.save(out / f"{stem}.wcnf")
        p = hubo.cnf_to_hubo(cnf)
        print(f"wrote {out / (stem + '.wcnf')} ({len(cnf.clauses)} clauses)")
    else:
        p = _build_problem(cfg)
    p.save(out / f"{stem}.json")
    print(f"wrote {out / (stem + '.json')} ({p.num_terms} terms)")
    e0 = _exact_if_tractable(p)
    if e0 is not None:
        print(f"E0 = {e0:.12g}")
    return 0


def _bfdcqo_config(cfg, args) -> BfdcqoConfig:
    section = dict(cfg.get("bfdcqo", {}))
    if args.shots is not None:
        section["shots"] = args.shots
    if args.alpha is not None:
        section["alpha"] = args.alpha
    if args.iterations is not None:
        section["iterations"] = args.iterations
    if args.kappa is not None:
        section["kappa"] = args.kappa
    if args.strategy is not None:
        section["strategy_schedule"] = args.strategy.split(",")
    if args.backend is not None:
        section["backend"] = {"sv": "statevector", "mps": "mps"}[args.backend]
    drive = dict(section.pop("drive", {}))
    if args.cutoff is not None:
        drive["theta_cutoff"] = args.cutoff
    return BfdcqoConfig(
        iterations=int(section.get("iterations", 11)),
        alpha=float(section.get("alpha", 0.01)),
        strategy_schedule=tuple(section.get("strategy_schedule", ())),
        kappa=float(section.get("kappa", 5.0)),
        drive=DriveSpec(**drive),
        shots=int(section.get("shots", 2000)),
        seed=int(section.get("seed", 0)),
        backend=section.get("backend", "statevector"),
        max_bond=section.get("max_bond", 64),
        trunc_cutoff=float(section.get("trunc_cutoff", 1e-10)),
        e0=section.get("e0"),
    )


def _run_one_bfdcqo(p, base_cfg, seed, run_dir):
    from dataclasses import replace
    cfg = replace(base_cfg, seed=seed)
    rec = run_bfdcqo(p, cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    rec.save(run_dir / "run.json")
    with open(run_dir / "config.json", "w") as f:
        json.dump(rec.config, f, indent=2)
        f.write("\n")
    return rec


def _print_iteration_table(rec: RunRecord):
    print(f"n={rec.n}  E0={rec.e0:.12g}")
    print(f"{'iter':>4} {'strategy':<18} {'AR':>10} {'DS':>10} "
          f"{'mean':>14} {'cvar':>14} {'best':>14}")
    for it in rec.iterations:
        print(f"{it.iteration:>4} {it.strategy:<18} {it.ar:>10.6f} {it.ds:>10.6f} "
              f"{it.mean_energy:>14.6f} {it.cvar_energy:>14.6f} {it.best_energy:>14.6f}")
    print(f"best energy {rec.best_energy:.12g}  bitstring {rec.best_bitstring}")


def _run_baseline(p, method, cfg, seed):
    params = dict(cfg.get(method, {}))
    t0 = time.perf_counter()
    if method == "sa":
        ap = solvers.AnnealParams(
            reads=int(params.get("reads", 1000)),
            sweeps=int(params.get("sweeps", 1000)),
            t_initial=float(params.get("t_initial", 2.0)),
            t_final=float(params.get("t_final", 0.05)))
        e, spins = solvers.simulated_annealing(p, ap, seed)
    elif method == "ls":
        e, spins = solvers.local_search(
            p, int(params.get("reads", 100)), int(params.get("sweeps", 100)), seed)
    else:
        tp = solvers.TabuParams(
            reads=int(params.get("reads", 100)),
            tenure=int(params.get("tenure", 10)),
            max_stagnation=int(params.get("max_stagnation", 100)))
        e, spins = solvers.tabu_search(p, tp, seed)
    return {
        "schema": BASELINE_SCHEMA,
        "method": method,
        "n": p.n,
        "seed": seed,
        "params": params,
        "best_energy": e,
        "best_bitstring": hubo.bits_from_assignment(spins),
        "wall_time": time.perf_counter() - t0,
    }


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args, ("kind", "n", "density", "seed", "method"))
    method = cfg.get("method")
    if method not in _METHODS:
        raise SystemExit(f"unknown method {method!r} (choose from {_METHODS})")
    p = _build_problem(cfg)
    out = Path(args.out or cfg.get("out", "runs"))

    if method == "exact":
        spread = p.coupling_range()
        if spread > min(20, p.n):
            raise SystemExit("exact method needs short-ranged couplings; try brute")
        e0, spins = solvers.exact_dp(p, r=max(spread, 1))
        print(f"E0 = {e0:.12g}  bitstring {hubo.bits_from_assignment(spins)}")
        return 0
    if method == "brute":
        e0, degenerate = solvers.brute_force(p)
        print(f"E0 = {e0:.12g}  ({len(degenerate)} optimal assignments)")
        return 0

    seeds = cfg.get("seeds")
    if seeds is None:
        seeds = [int(cfg.get("bfdcqo", {}).get("seed", cfg.get("seed", 0)))
                 if method == "bfdcqo" else int(cfg.get("seed", 0))]
    workers = max(1, int(os.environ.get("BFDCQO_THREADS", "1")))

    if method == "bfdcqo":
        base = _bfdcqo_config(cfg, args)
        jobs = {s: out / f"seed{s}" for s in seeds}
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as ex:
            futures = {s: ex.submit(_run_one_bfdcqo, p, base, s, d)
                       for s, d in jobs.items()}
            for s in seeds:
                _print_iteration_table(futures[s].result())
        return 0

    out.mkdir(parents=True, exist_ok=True)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {s: ex.submit(_run_baseline, p, method, cfg, s) for s in seeds}
        for s in seeds:
            rec = futures[s].result()
            path = out / f"{method}_seed{s}.json"
            with open(path, "w") as f:
                json.dump(rec, f)
                f.write("\n")
            print(f"{method} seed={s} best={rec['best_energy']:.12g} -> {path}")
    return 0


def _write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")


def cmd_report(args) -> int:
    out = Path(args.out or "report")
    out.mkdir(parents=True, exist_ok=True)
    problem = hubo.HuboProblem.load(args.problem) if args.problem else None
    comparison = []
    for run_path in args.runs:
        rec = RunRecord.load(run_path)
        stem = Path(run_path).stem
        _write_csv(out / f"{stem}_metrics.csv",
                   ["iteration", "strategy", "ar", "ds", "mean_energy",
                    "cvar_energy", "best_energy"],
                   [(it.iteration, it.strategy, it.ar, it.ds, it.mean_energy,
                     it.cvar_energy, it.best_energy) for it in rec.iterations])
        if any(it.entropy is not None for it in rec.iterations):
            _write_csv(out / f"{stem}_entropy.csv", ["iteration", "entropy"],
                       [(it.iteration, it.entropy) for it in rec.iterations
                        if it.entropy is not None])
        if problem is not None:
            for it in rec.iterations:
                rows = {}
                for bits, count in it.samples:
                    e = hubo.energy(problem, hubo.assignment_from_bits(bits))
                    key = round(e, 9)
                    rows[key] = rows.get(key, 0) + count
                _write_csv(out / f"{stem}_hist_iter{it.iteration:02d}.csv",
                           ["bin", "count"], sorted(rows.items()))
        final = rec.iterations[-1]
        comparison.append(("bfdcqo", stem, rec.e0, rec.best_energy,
                           final.ar, final.ds))
    if len(comparison) > 1:
        _write_csv(out / "comparison.csv",
                   ["method", "run", "e0", "best_energy", "final_ar", "final_ds"],
                   comparison)
    print(f"report written to {out}")
    return 0


def cmd_selftest(args) -> int:
    """Fast internal consistency checks; a cheap stand-in for the test suite."""
    from .cd import (BiasState, build_cd_circuit, build_hf_sum, build_hi_sum,
                     build_o1_symbolic, gamma1, gamma2)
    from .pauli import commutator
    from .statevector import run_circuit, sample
    checks = []
    rng = np.random.default_rng(7)

    p = hubo.gen_nn_spin_glass(6, seed=3)
    b = BiasState(rng.normal(size=6))
    d = DriveSpec()
    o1 = build_o1_symbolic(p, d, b)
    g1_closed = gamma1(p, d)
    checks.append(("gamma1 closed form", abs(o1.hs_norm_sq() - g1_closed)
                   <= 1e-9 * max(1.0, abs(g1_closed))))

    lam = 0.37
    hx = d.hx_vector(p.n)
    h_ad = build_hi_sum(p.n, hx, b.hb).scaled(1 - lam) + build_hf_sum(p).scaled(lam)
    o2 = commutator(h_ad, o1)
    g2_closed = gamma2(p, d, b, lam)
    checks.append(("gamma2 closed form", abs(o2.hs_norm_sq() - g2_closed)
                   <= 1e-9 * max(1.0, abs(g2_closed))))

    small = hubo.gen_nn_spin_glass(8, seed=1)
    circ = build_cd_circuit(small, DriveSpec(), BiasState.zero(8))
    state = run_circuit(circ)
    sset = sample(state, 500, seed=11).with_energies(small)
    e0, _ = solvers.exact_dp(small, r=3)
    checks.append(("sampled energies bounded by E0", sset.min_energy() >= e0 - 1e-9))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bfdcqo",
        description="Bias-field counterdiabatic optimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory")

    g = sub.add_parser("generate", help="write a problem instance file")
    common(g)
    g.add_argument("--kind", choices=_PROBLEM_KINDS, default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--density", type=float, default=None)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="solve an instance with a chosen method")
    common(r)
    r.add_argument("--kind", choices=_PROBLEM_KINDS, default=None)
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--density", type=float, default=None)
    r.add_argument("--method", choices=_METHODS, default=None)
    r.add_argument("--backend", choices=("sv", "mps"), default=None)
    r.add_argument("--shots", type=int, default=None)
    r.add_argument("--alpha", type=float, default=None)
    r.add_argument("--cutoff", type=float, default=None)
    r.add_argument("--iterations", type=int, default=None)
    r.add_argument("--strategy", default=None,
                   help="comma-separated per-iteration strategy names")
    r.add_argument("--kappa", type=float, default=None)
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="emit CSVs from run record files")
    rep.add_argument("runs", nargs="+", help="run record JSON files")
    rep.add_argument("--out", default=None)
    rep.add_argument("--problem", default=None,
                     help="problem file, enables energy histograms")
    rep.set_defaults(func=cmd_report)

    st = sub.add_parser("selftest", help="run quick oracle checks")
    st.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # contract: nonzero exit with a message
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
