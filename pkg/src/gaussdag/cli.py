"""Command-line front door: simulate, learn, summarize, causal, diagnose.

Every command that takes --seed is bit-reproducible; without it a seed is
drawn from system entropy and recorded in the manifest. Exit codes: 0 ok,
1 I/O failure, 2 validation failure, 3 numeric failure. The manifest
(schema "gaussdag-manifest/1") echoes everything needed to reproduce a run
except wall-clock timing.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .causal import CausalQuery, bma_causal_effect, posterior_causal_effects
from .dagwishart import DagWishartHyper, resolve_hyper
from .errors import (
    CollapsedChainError,
    ConfigError,
    CorruptEncodingError,
    DegenerateError,
    DomainError,
    EmptyChainError,
    HyperError,
    NotSpdError,
    QueryError,
    ShapeError,
)
from .graph import save_adjacency_csv
from .mcmc import Chain, McmcConfig, _run, load_chain, save_chain
from .numkernel import derive_seeds
from .simulate import Dataset, rand_dag, rand_sem_params, sample_data
from .summaries import (
    diagnostics,
    edge_probabilities,
    map_dag,
    mpm_dag,
)

MANIFEST_SCHEMA = "gaussdag-manifest/1"

_VALIDATION_ERRORS = (
    HyperError,
    DomainError,
    ShapeError,
    ConfigError,
    QueryError,
    DegenerateError,
    CollapsedChainError,
    EmptyChainError,
    CorruptEncodingError,
    ValueError,
)
_NUMERIC_ERRORS = (NotSpdError, FloatingPointError, np.linalg.LinAlgError)


def _fail(message: str, code: int) -> int:
    print(f"gaussdag: error: {message}", file=sys.stderr)
    return code


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _write_manifest(out_dir, payload: dict) -> str:
    payload = {"schema": MANIFEST_SCHEMA, "tool_version": __version__, **payload}
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _require_file(path, what: str) -> int | None:
    if not os.path.isfile(path):
        return _fail(f"{what} not found: {path}", 2)
    return None


def _save_matrix(path, mat) -> None:
    np.savetxt(path, np.asarray(mat, dtype=np.float64), delimiter=",", fmt="%.17g")


def cmd_simulate(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    seed = _resolve_seed(args.seed)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    t0 = time.perf_counter()
    dag = rand_dag(args.q, args.w, rng)
    params = rand_sem_params(dag, args.lmin, args.lmax, np.ones(args.q), rng)
    data = sample_data(args.n, params, rng)
    save_adjacency_csv(dag, os.path.join(args.out_dir, "dag.csv"))
    _save_matrix(os.path.join(args.out_dir, "L.csv"), params.L)
    _save_matrix(os.path.join(args.out_dir, "D.csv"), params.D)
    data_path = os.path.join(args.out_dir, "data.csv")
    data.to_csv(data_path)
    _write_manifest(
        args.out_dir,
        {
            "command": "simulate",
            "config": {
                "q": args.q,
                "w": args.w,
                "lmin": args.lmin,
                "lmax": args.lmax,
                "n": args.n,
                "seed": seed,
            },
            "data": {"n": args.n, "q": args.q, "sha256": _sha256(data_path)},
            "wall_clock_sec": time.perf_counter() - t0,
        },
    )
    return 0


def _parse_U(raw: str | None, q: int):
    if raw is None:
        return None, "identity"
    try:
        return float(raw), f"scalar:{float(raw)}"
    except ValueError:
        pass
    if not os.path.isfile(raw):
        raise FileNotFoundError(raw)
    mat = np.loadtxt(raw, delimiter=",", ndmin=2)
    if mat.shape != (q, q):
        raise ShapeError(f"rate matrix file must be {q}x{q}, got {mat.shape}")
    return mat, f"file:{raw}"


def cmd_learn(args) -> int:
    code = _require_file(args.data, "data file")
    if code is not None:
        return code
    os.makedirs(args.out_dir, exist_ok=True)
    data = Dataset.from_csv(args.data)
    q = data.q
    a = float(args.a) if args.a is not None else float(q)
    try:
        U, u_source = _parse_U(args.U, q)
        hyper = resolve_hyper(q, a, U)
    except HyperError:
        return _fail(f"prior shape must satisfy a > q-1 (q={q}, a={a})", 2)
    except NotSpdError:
        return _fail("rate matrix U must be symmetric positive definite", 2)
    except FileNotFoundError as exc:
        return _fail(f"rate matrix file not found: {exc}", 2)

    seed = _resolve_seed(args.seed)
    n_chains = args.chains
    if n_chains < 1:
        return _fail("--chains must be at least 1", 2)
    chain_seeds = [seed] if n_chains == 1 else derive_seeds(seed, n_chains)

    def run_one(chain_seed: int) -> Chain:
        config = McmcConfig(
            S=args.S,
            burn=args.burn,
            w=args.w,
            fast=args.fast,
            collapse=args.collapse,
            save_memory=args.save_memory,
            seed=chain_seed,
        )
        return _run(config, data, hyper)

    t0 = time.perf_counter()
    if n_chains == 1:
        chains = [run_one(chain_seeds[0])]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_chains) as pool:
            chains = list(pool.map(run_one, chain_seeds))
    wall = time.perf_counter() - t0

    if n_chains == 1:
        save_chain(chains[0], os.path.join(args.out_dir, "chain.bin"))
    else:
        for i, chain in enumerate(chains):
            save_chain(chain, os.path.join(args.out_dir, f"chain_{i:02d}.bin"))
        if args.S > 0:
            merged = np.mean([edge_probabilities(c) for c in chains], axis=0)
            _save_matrix(os.path.join(args.out_dir, "edgeprobs_merged.csv"), merged)

    _write_manifest(
        args.out_dir,
        {
            "command": "learn",
            "config": {
                "S": args.S,
                "burn": args.burn,
                "w": args.w,
                "fast": args.fast,
                "collapse": args.collapse,
                "save_memory": args.save_memory,
                "seed": seed,
                "chains": n_chains,
                "chain_seeds": chain_seeds,
                "init": None,
            },
            "hyper": {"a": a, "U": u_source},
            "data": {"n": data.n, "q": q, "sha256": _sha256(args.data)},
            "acceptance_rate": [c.acceptance_rate for c in chains],
            "wall_clock_sec": wall,
        },
    )
    return 0


def cmd_summarize(args) -> int:
    code = _require_file(args.chain, "chain file")
    if code is not None:
        return code
    os.makedirs(args.out_dir, exist_ok=True)
    chain = load_chain(args.chain)
    everything = not (args.edgeprobs or args.map or args.mpm)
    if args.edgeprobs or everything:
        _save_matrix(os.path.join(args.out_dir, "edgeprobs.csv"), edge_probabilities(chain))
    if args.map or everything:
        save_adjacency_csv(map_dag(chain), os.path.join(args.out_dir, "map.csv"))
    if args.mpm or everything:
        np.savetxt(
            os.path.join(args.out_dir, "mpm.csv"), mpm_dag(chain), fmt="%d", delimiter=","
        )
    return 0


def cmd_causal(args) -> int:
    code = _require_file(args.chain, "chain file")
    if code is not None:
        return code
    os.makedirs(args.out_dir, exist_ok=True)
    chain = load_chain(args.chain)
    try:
        targets = tuple(int(t) for t in args.targets.split(","))
    except ValueError:
        return _fail(f"--targets must be comma-separated integers, got {args.targets!r}", 2)
    query = CausalQuery(targets, args.response)
    draws = posterior_causal_effects(chain, query)
    draws.to_csv(os.path.join(args.out_dir, "causal_draws.csv"))
    if args.bma:
        means = bma_causal_effect(draws)
        with open(os.path.join(args.out_dir, "causal_bma.csv"), "w", encoding="utf-8") as fh:
            fh.write(",".join(draws.column_labels) + "\n")
            fh.write(",".join(f"{x:.17g}" for x in means) + "\n")
    return 0


def cmd_diagnose(args) -> int:
    code = _require_file(args.chain, "chain file")
    if code is not None:
        return code
    chain = load_chain(args.chain)
    report = diagnostics(chain)
    report.write_csv(args.out_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussdag",
        description="Bayesian structure learning and causal effects for Gaussian DAG models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a random SEM and Gaussian data")
    p.add_argument("--q", type=int, required=True, help="number of nodes")
    p.add_argument("--w", type=float, required=True, help="edge probability")
    p.add_argument("--lmin", type=float, default=0.1, help="coefficient lower bound")
    p.add_argument("--lmax", type=float, default=1.0, help="coefficient upper bound")
    p.add_argument("--n", type=int, required=True, help="number of observations")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("learn", help="run the posterior sampler on a data CSV")
    p.add_argument("--data", required=True, help="CSV data matrix, one row per observation")
    p.add_argument("--S", type=int, required=True, help="retained iterations")
    p.add_argument("--burn", type=int, default=0, help="burn-in iterations")
    p.add_argument("--a", type=float, default=None, help="prior shape (default: q)")
    p.add_argument(
        "--U", default=None, help="prior rate: scalar c for c*I, or a CSV matrix file"
    )
    p.add_argument("--w", type=float, default=0.1, help="prior edge probability")
    p.add_argument("--fast", action="store_true", help="rejection proposal")
    p.add_argument("--collapse", action="store_true", help="graph-only sampler")
    p.add_argument("--save-memory", action="store_true", dest="save_memory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--chains", type=int, default=1, help="independent chains on threads")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("summarize", help="edge probabilities / MAP / MPM of a chain")
    p.add_argument("--chain", required=True, help="chain.bin produced by learn")
    p.add_argument("--edgeprobs", action="store_true")
    p.add_argument("--map", action="store_true")
    p.add_argument("--mpm", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("causal", help="posterior causal-effect draws from a chain")
    p.add_argument("--chain", required=True)
    p.add_argument("--targets", required=True, help="comma-separated 1-based labels")
    p.add_argument("--response", type=int, required=True, help="1-based response label")
    p.add_argument("--bma", action="store_true", help="also write the posterior means")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_causal)

    p = sub.add_parser("diagnose", help="convergence-diagnostic CSV bundle")
    p.add_argument("--chain", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        return _fail(f"I/O failure: {exc}", 1)
    except _VALIDATION_ERRORS as exc:
        return _fail(str(exc), 2)
    except _NUMERIC_ERRORS as exc:
        return _fail(f"numeric failure: {exc}", 3)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
