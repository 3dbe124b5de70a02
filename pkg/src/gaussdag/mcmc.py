"""Metropolis-Hastings samplers over DAG space, with compact chain storage.

Two targets: the joint posterior of (graph, parameters), sampled by
alternating a partial-analytic-structure accept step over graphs with a
conjugate full-conditional parameter draw; and the marginal posterior over
graphs alone (collapsed), which drops the parameter draw.

The accept ratio for a single-edge move touching node v reduces to the node-v
marginal-likelihood ratio times the structure-prior ratio times the proposal
ratio; a reversal touches both endpoint nodes and contributes both node
ratios. Exact proposals use the valid-move counts for the proposal ratio;
fast proposals treat it as 1.

Each chain owns two independent RNG streams derived from its seed: one for
propose/accept decisions, one for parameter draws. Collapsed and joint runs
with the same seed therefore visit the same DAG trajectory, which is what
makes their equivalence directly testable. Burn-in parameter draws are
skipped (they live on the dedicated stream, so the trajectory is unchanged).

Chain payload format "GDCHAIN1" (all integers little-endian):

    bytes 0..7     magic b"GDCHAIN1"
    u32            q
    u64            S                 retained states
    u64            T                 total proposals (burn + S)
    u8             has_params        0 or 1
    u64            accept_count      over all T proposals
    u32            n_cfg, then n_cfg bytes of UTF-8 config JSON
    T bytes        proposed-operator kinds (0 insert, 1 delete, 2 reverse,
                   255 none)
    ceil(T/8)      accepted flags, packed bits (big-endian within byte)
    S*ceil(q*q/8)  adjacency bitstrings, one row-major matrix per state
    per state s (only when has_params = 1):
        u32        k_s               edge count of state s
        k_s * f8   L values at the state's edges, row-major flat order
        q * f8     conditional variances (diagonal of D)
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .dagprior import check_edge_probability, log_prior_ratio
from .dagwishart import (
    CholParams,
    DagWishartHyper,
    DagWishartSampler,
    NodeMarginalCache,
    posterior_hyper,
    resolve_hyper,
)
from .errors import (
    ConfigError,
    CorruptEncodingError,
    ShapeError,
)
from .graph import (
    Dag,
    Operator,
    OpKind,
    count_valid_operators,
    from_edge_dict,
    propose_exact,
    propose_fast,
    to_edge_dict,
)
from .numkernel import spawn_rngs
from .simulate import Dataset

_MAGIC = b"GDCHAIN1"
_NO_OP = 255


@dataclass(frozen=True)
class McmcConfig:
    """Sampler settings: retained length S, burn-in, prior and proposal flags."""

    S: int
    burn: int = 0
    w: float = 0.1
    fast: bool = False
    collapse: bool = False
    save_memory: bool = False
    seed: int = 0
    init: Dag | None = None

    def __post_init__(self):
        if self.S < 0 or self.burn < 0:
            raise ConfigError("S and burn must be nonnegative")


def _pa(adj: np.ndarray, j0: int) -> tuple[int, ...]:
    return tuple(int(u) for u in np.flatnonzero(adj[:, j0]))


def _log_accept_ratio(
    cache: NodeMarginalCache,
    adj_old: np.ndarray,
    adj_new: np.ndarray,
    op: Operator,
    w: float,
    log_qratio: float,
) -> float:
    v0 = op.v - 1
    lr = cache.node_lml(v0, _pa(adj_new, v0)) - cache.node_lml(v0, _pa(adj_old, v0))
    if op.kind == OpKind.REVERSE:
        # Reversal = delete u->v + insert v->u: both endpoint nodes change
        # parent sets, so both node marginal ratios enter.
        u0 = op.u - 1
        lr += cache.node_lml(u0, _pa(adj_new, u0)) - cache.node_lml(u0, _pa(adj_old, u0))
    return float(lr + log_prior_ratio(op, w) + log_qratio)


def acceptance_log_ratio(
    dag: Dag,
    dag_new: Dag,
    op: Operator,
    tXX,
    n: int,
    hyper: DagWishartHyper,
    w: float,
    log_qratio: float,
) -> float:
    """Log of the move's acceptance ratio.

    ``dag_new`` must be ``apply_operator(dag, op)``. ``log_qratio`` is
    log|O_D| - log|O_D'| under exact proposals and 0 under fast proposals.
    """
    cache = NodeMarginalCache(tXX, n, hyper)
    return _log_accept_ratio(cache, dag.adj, dag_new.adj, op, w, log_qratio)


class Chain:
    """Ordered posterior sample of DAG states, optionally with parameters.

    States are stored as packed adjacency bitstrings; parameter draws are
    stored densely, or as per-state sparse edge values in save-memory mode.
    Equality is logical (state by state), independent of storage layout.
    """

    def __init__(
        self,
        q: int,
        config: McmcConfig,
        dag_bits: np.ndarray,
        op_kinds: np.ndarray,
        op_accepted: np.ndarray,
        accept_count: int,
        dvecs: np.ndarray | None = None,
        L_dense: np.ndarray | None = None,
        L_sparse: list[np.ndarray] | None = None,
    ):
        self.q = int(q)
        self.config = config
        self._dag_bits = dag_bits
        self.op_kinds = op_kinds
        self.op_accepted = op_accepted
        self.accept_count = int(accept_count)
        self._dvecs = dvecs
        self._L_dense = L_dense
        self._L_sparse = L_sparse

    def __len__(self) -> int:
        return self._dag_bits.shape[0]

    @property
    def S(self) -> int:
        return len(self)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def has_params(self) -> bool:
        return self._dvecs is not None

    @property
    def total_iterations(self) -> int:
        return int(self.op_kinds.shape[0])

    @property
    def acceptance_rate(self) -> float:
        t = self.total_iterations
        return self.accept_count / t if t else 0.0

    def adjacency(self, s: int) -> np.ndarray:
        bits = np.unpackbits(self._dag_bits[s], count=self.q * self.q)
        return bits.reshape(self.q, self.q)

    def adjacency_stack(self) -> np.ndarray:
        """(S, q, q) uint8 array of every retained state."""
        if len(self) == 0:
            return np.zeros((0, self.q, self.q), dtype=np.uint8)
        bits = np.unpackbits(self._dag_bits, axis=1, count=self.q * self.q)
        return bits.reshape(len(self), self.q, self.q)

    def dag(self, s: int) -> Dag:
        return Dag(self.adjacency(s))

    def _L_matrix(self, s: int) -> np.ndarray:
        if self._L_dense is not None:
            return self._L_dense[s]
        L = np.eye(self.q)
        idx = np.flatnonzero(self.adjacency(s).ravel())
        L.ravel()[idx] = self._L_sparse[s]
        return L

    def params(self, s: int) -> CholParams:
        """Parameter draw paired with state s (joint runs only)."""
        from .errors import CollapsedChainError

        if not self.has_params:
            raise CollapsedChainError("chain was run collapsed; no parameter draws")
        return CholParams.from_vectors(self._L_matrix(s), self._dvecs[s])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        if (
            self.q != other.q
            or len(self) != len(other)
            or self.config != other.config
            or self.accept_count != other.accept_count
            or self.has_params != other.has_params
        ):
            return False
        if not (
            np.array_equal(self.op_kinds, other.op_kinds)
            and np.array_equal(self.op_accepted, other.op_accepted)
            and np.array_equal(self._dag_bits, other._dag_bits)
        ):
            return False
        if self.has_params:
            if not np.array_equal(self._dvecs, other._dvecs):
                return False
            for s in range(len(self)):
                if not np.array_equal(self._L_matrix(s), other._L_matrix(s)):
                    return False
        return True

    def __repr__(self) -> str:
        kind = "joint" if self.has_params else "collapsed"
        return f"Chain(q={self.q}, S={len(self)}, {kind}, accept_rate={self.acceptance_rate:.3f})"


def _run(config: McmcConfig, data: Dataset, hyper: DagWishartHyper) -> Chain:
    q = data.q
    if hyper.q != q:
        raise ShapeError("hyperparameter dimension does not match the data")
    if data.n < 1:
        raise ConfigError("sampling requires at least one observation")
    check_edge_probability(config.w)
    store_params = not config.collapse
    S, burn = config.S, config.burn
    total = burn + S

    rng_move, rng_param = spawn_rngs(config.seed, 2)
    cache = NodeMarginalCache(data.gram, data.n, hyper)
    sampler = (
        DagWishartSampler(posterior_hyper(hyper, data.gram, data.n))
        if store_params
        else None
    )

    if config.init is not None:
        if config.init.q != q:
            raise ConfigError("initial DAG has the wrong node count")
        dag = config.init
    else:
        dag = Dag.empty(q)

    nb = (q * q + 7) // 8
    dag_bits = np.empty((S, nb), dtype=np.uint8)
    op_kinds = np.full(total, _NO_OP, dtype=np.uint8)
    op_accepted = np.zeros(total, dtype=bool)
    dvecs = L_dense = L_sparse = None
    if store_params:
        dvecs = np.empty((S, q))
        if config.save_memory:
            L_sparse = []
        else:
            L_dense = np.empty((S, q, q))

    accept_count = 0
    movable = q >= 2
    for s in range(total):
        if movable:
            if config.fast:
                cand, op = propose_fast(dag, rng_move)
                log_q = 0.0
            else:
                cand, op, size_here = propose_exact(dag, rng_move)
                log_q = math.log(size_here) - math.log(count_valid_operators(cand))
            log_r = _log_accept_ratio(cache, dag.adj, cand.adj, op, config.w, log_q)
            op_kinds[s] = int(op.kind)
            u = rng_move.uniform()
            log_u = math.log(u) if u > 0.0 else -math.inf
            if log_u <= log_r:
                dag = cand
                op_accepted[s] = True
                accept_count += 1
        if s >= burn:
            i = s - burn
            dag_bits[i] = np.packbits(dag.adj.ravel())
            if store_params:
                par = sampler.draw(dag, rng_param)
                dvecs[i] = par.dvec
                if config.save_memory:
                    idx = np.flatnonzero(dag.adj.ravel())
                    L_sparse.append(par.L.ravel()[idx])
                else:
                    L_dense[i] = par.L

    return Chain(
        q,
        config,
        dag_bits,
        op_kinds,
        op_accepted,
        accept_count,
        dvecs=dvecs,
        L_dense=L_dense,
        L_sparse=L_sparse,
    )


def run_pas(config: McmcConfig, data: Dataset, hyper: DagWishartHyper) -> Chain:
    """Joint sampler over (graph, parameters); requires collapse = False."""
    if config.collapse:
        raise ConfigError("run_pas requires collapse=False; use run_collapsed")
    return _run(config, data, hyper)


def run_collapsed(config: McmcConfig, data: Dataset, hyper: DagWishartHyper) -> Chain:
    """Graph-only sampler on the marginal posterior; requires collapse = True."""
    if not config.collapse:
        raise ConfigError("run_collapsed requires collapse=True; use run_pas")
    return _run(config, data, hyper)


def learn_dag(
    data,
    S: int,
    burn: int = 0,
    a: float | None = None,
    U=None,
    w: float = 0.1,
    fast: bool = False,
    collapse: bool = False,
    save_memory: bool = False,
    seed: int | None = None,
    init: Dag | None = None,
) -> Chain:
    """One-call front door: resolve hyperparameters, configure, run.

    ``data`` is a Dataset or raw (n, q) array; ``a`` defaults to q and ``U``
    to the identity (a scalar means that multiple of the identity). With
    ``seed=None`` a fresh seed is drawn from system entropy and recorded in
    the returned chain's config.
    """
    if not isinstance(data, Dataset):
        data = Dataset.from_array(data)
    hyper = resolve_hyper(data.q, a, U)
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (1 << 63))
    config = McmcConfig(
        S=S,
        burn=burn,
        w=w,
        fast=fast,
        collapse=collapse,
        save_memory=save_memory,
        seed=int(seed),
        init=init,
    )
    return _run(config, data, hyper)


def _config_to_json(config: McmcConfig) -> bytes:
    payload = {
        "S": config.S,
        "burn": config.burn,
        "w": config.w,
        "fast": config.fast,
        "collapse": config.collapse,
        "save_memory": config.save_memory,
        "seed": config.seed,
        "init": None if config.init is None else to_edge_dict(config.init),
    }
    return json.dumps(payload, sort_keys=True).encode("utf-8")


def _config_from_json(raw: bytes) -> McmcConfig:
    d = json.loads(raw.decode("utf-8"))
    init = None if d["init"] is None else from_edge_dict(d["init"])
    return McmcConfig(
        S=int(d["S"]),
        burn=int(d["burn"]),
        w=float(d["w"]),
        fast=bool(d["fast"]),
        collapse=bool(d["collapse"]),
        save_memory=bool(d["save_memory"]),
        seed=int(d["seed"]),
        init=init,
    )


def encode_compact(chain: Chain) -> bytes:
    """Serialize a chain to the GDCHAIN1 byte format (see module docstring)."""
    cfg = _config_to_json(chain.config)
    S, q, total = len(chain), chain.q, chain.total_iterations
    parts = [
        _MAGIC,
        struct.pack("<IQQBQ", q, S, total, int(chain.has_params), chain.accept_count),
        struct.pack("<I", len(cfg)),
        cfg,
        chain.op_kinds.astype("<u1").tobytes(),
        np.packbits(chain.op_accepted).tobytes(),
        chain._dag_bits.astype("<u1").tobytes(),
    ]
    if chain.has_params:
        for s in range(S):
            idx = np.flatnonzero(chain.adjacency(s).ravel())
            vals = chain._L_matrix(s).ravel()[idx]
            parts.append(struct.pack("<I", idx.size))
            parts.append(vals.astype("<f8").tobytes())
            parts.append(chain._dvecs[s].astype("<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptEncodingError("payload truncated")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype: str, count: int) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * item), dtype=dtype).copy()


def decode_compact(payload: bytes) -> Chain:
    """Inverse of encode_compact; raises CorruptEncodingError on bad input."""
    r = _Reader(payload)
    if r.take(len(_MAGIC)) != _MAGIC:
        raise CorruptEncodingError("bad magic; not a GDCHAIN1 payload")
    q, S, total, has_params, accept_count = r.unpack("<IQQBQ")
    if q < 1 or has_params not in (0, 1) or total < S or accept_count > total:
        raise CorruptEncodingError("inconsistent header fields")
    (n_cfg,) = r.unpack("<I")
    try:
        config = _config_from_json(r.take(n_cfg))
    except (ValueError, KeyError, ConfigError) as exc:
        raise CorruptEncodingError(f"bad config block: {exc}") from None
    if config.S != S or config.burn + S != total:
        raise CorruptEncodingError("config does not match payload dimensions")
    op_kinds = r.array("<u1", total)
    if not np.all(np.isin(op_kinds, (0, 1, 2, _NO_OP))):
        raise CorruptEncodingError("invalid operator kind codes")
    acc_bytes = r.array("<u1", (total + 7) // 8)
    op_accepted = np.unpackbits(acc_bytes, count=total).astype(bool)
    nb = (q * q + 7) // 8
    dag_bits = r.array("<u1", S * nb).reshape(S, nb)
    dvecs = L_sparse = None
    if has_params:
        dvecs = np.empty((S, q))
        L_sparse = []
        for s in range(S):
            (k,) = r.unpack("<I")
            n_edges = int(
                np.unpackbits(dag_bits[s], count=q * q).sum()
            )
            if k != n_edges:
                raise CorruptEncodingError(
                    f"state {s}: {k} stored values for {n_edges} edges"
                )
            L_sparse.append(r.array("<f8", k))
            dvecs[s] = r.array("<f8", q)
            if not np.all(dvecs[s] > 0.0):
                raise CorruptEncodingError(f"state {s}: nonpositive variance")
    if r.pos != len(payload):
        raise CorruptEncodingError("trailing bytes after payload")
    return Chain(
        q,
        config,
        dag_bits,
        op_kinds,
        op_accepted,
        int(accept_count),
        dvecs=dvecs,
        L_sparse=L_sparse,
    )


def save_chain(chain: Chain, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_compact(chain))


def load_chain(path) -> Chain:
    with open(path, "rb") as fh:
        return decode_compact(fh.read())
