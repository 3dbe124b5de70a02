"""Directed acyclic graphs over labeled nodes, with local edge-move proposals.

Nodes carry 1-based labels 1..q (matching the CSV/JSON interfaces); the
underlying adjacency matrix is a plain (q, q) 0/1 array where position
[u-1, v-1] encodes the edge u -> v.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    CycleError,
    NoMoveError,
    NotApplicableError,
    ShapeError,
    TooLargeError,
)


class OpKind(enum.IntEnum):
    """Local edge-move kinds."""

    INSERT = 0
    DELETE = 1
    REVERSE = 2


@dataclass(frozen=True)
class Operator:
    """A single edge move on the pair (u, v), labels 1-based.

    INSERT requires no edge between u and v in either direction; DELETE and
    REVERSE require the edge u -> v to be present.
    """

    kind: OpKind
    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError("operator endpoints must differ")

    def inverse(self) -> "Operator":
        """The move that undoes this one."""
        if self.kind == OpKind.INSERT:
            return Operator(OpKind.DELETE, self.u, self.v)
        if self.kind == OpKind.DELETE:
            return Operator(OpKind.INSERT, self.u, self.v)
        return Operator(OpKind.REVERSE, self.v, self.u)


def _check_binary_square(matrix, allow_nonzero_diag: bool = False) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ShapeError(f"adjacency must be a nonempty square matrix, got shape {a.shape}")
    v = a.astype(np.float64, copy=False)
    if not np.isin(v, (0.0, 1.0)).all():
        raise ShapeError("adjacency entries must be 0 or 1")
    out = a.astype(np.uint8)
    if not allow_nonzero_diag and np.any(np.diag(out) != 0):
        raise ShapeError("adjacency diagonal must be zero")
    return out


def _is_acyclic(adj: np.ndarray) -> bool:
    """Kahn-style peeling on a dense 0/1 adjacency matrix."""
    indeg = adj.sum(axis=0).astype(np.int64)
    alive = np.ones(adj.shape[0], dtype=bool)
    remaining = adj.shape[0]
    while remaining:
        leaves = np.flatnonzero(alive & (indeg == 0))
        if leaves.size == 0:
            return False
        alive[leaves] = False
        indeg -= adj[leaves].sum(axis=0).astype(np.int64)
        remaining -= leaves.size
    return True


def _reachability(adj: np.ndarray) -> np.ndarray:
    """Strict transitive closure: R[i, j] = 1 iff a path i -> ... -> j exists."""
    r = adj.astype(np.uint8)
    q = adj.shape[0]
    steps = max(1, int(np.ceil(np.log2(q))))
    for _ in range(steps):
        nxt = ((r + r @ r) > 0).astype(np.uint8)
        if np.array_equal(nxt, r):
            break
        r = nxt
    return r


def is_acyclic(matrix) -> bool:
    """True iff the given 0/1 adjacency matrix encodes no directed cycle."""
    return _is_acyclic(_check_binary_square(matrix))


class Dag:
    """Immutable directed acyclic graph on labeled nodes 1..q.

    Construction validates shape, binariness, zero diagonal and acyclicity;
    a cyclic matrix raises CycleError, anything structurally wrong raises
    ShapeError.
    """

    __slots__ = ("_adj",)

    def __init__(self, adjacency):
        adj = _check_binary_square(adjacency)
        if not _is_acyclic(adj):
            raise CycleError("adjacency matrix encodes a directed cycle")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "_adj", adj)

    @classmethod
    def empty(cls, q: int) -> "Dag":
        if q < 1:
            raise ShapeError("node count must be positive")
        return cls(np.zeros((q, q), dtype=np.uint8))

    @classmethod
    def from_edges(cls, q: int, edges) -> "Dag":
        """Build from 1-based (u, v) edge pairs."""
        adj = np.zeros((q, q), dtype=np.uint8)
        for u, v in edges:
            if not (1 <= u <= q and 1 <= v <= q):
                raise ShapeError(f"edge ({u}, {v}) out of range for q={q}")
            adj[u - 1, v - 1] = 1
        return cls(adj)

    @property
    def q(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        """Read-only (q, q) uint8 adjacency matrix."""
        return self._adj

    def _check_label(self, j: int) -> int:
        if not 1 <= j <= self.q:
            raise IndexError(f"node label {j} outside 1..{self.q}")
        return j - 1

    def parents(self, j: int) -> frozenset[int]:
        """Labels of the nodes with an edge into j."""
        j0 = self._check_label(j)
        return frozenset(int(u) + 1 for u in np.flatnonzero(self._adj[:, j0]))

    def children(self, j: int) -> frozenset[int]:
        j0 = self._check_label(j)
        return frozenset(int(v) + 1 for v in np.flatnonzero(self._adj[j0, :]))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[self._check_label(u), self._check_label(v)])

    def edges(self) -> list[tuple[int, int]]:
        """All (u, v) edges, 1-based, lexicographic."""
        return [(int(u) + 1, int(v) + 1) for u, v in np.argwhere(self._adj)]

    @property
    def num_edges(self) -> int:
        return int(self._adj.sum())

    def skeleton(self) -> np.ndarray:
        """Symmetric 0/1 matrix of the underlying undirected graph."""
        return ((self._adj + self._adj.T) > 0).astype(np.uint8)

    def topological_order(self) -> list[int]:
        """Node labels in an order where every edge points forward."""
        adj = self._adj
        indeg = adj.sum(axis=0).astype(np.int64)
        alive = np.ones(self.q, dtype=bool)
        order: list[int] = []
        while len(order) < self.q:
            leaves = np.flatnonzero(alive & (indeg == 0))
            for u in leaves:
                order.append(int(u) + 1)
            alive[leaves] = False
            indeg -= adj[leaves].sum(axis=0).astype(np.int64)
        return order

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.q == other.q and np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return hash((self.q, self._adj.tobytes()))

    def __repr__(self) -> str:
        return f"Dag(q={self.q}, edges={self.edges()})"


def _possible_insert_mask(adj: np.ndarray) -> np.ndarray:
    """Pairs with no edge in either direction (off-diagonal)."""
    mask = (adj == 0) & (adj.T == 0)
    np.fill_diagonal(mask, False)
    return mask


def _valid_masks(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Boolean matrices of the insert/delete/reverse moves that keep acyclicity.

    Insert u -> v is valid iff no path v -> ... -> u exists. Delete is always
    valid. Reverse u -> v is valid iff u has no other child w with a path
    w -> ... -> v (in a DAG such a path can never traverse u -> v, so one
    closure of the unmodified graph decides every reversal).
    """
    reach = _reachability(adj)
    ins = _possible_insert_mask(adj) & (reach.T == 0)
    dele = adj.astype(bool)
    rev = dele & ((adj @ reach) == 0)
    return ins, dele, rev


def _ops_from_mask(mask: np.ndarray, kind: OpKind) -> list[Operator]:
    return [Operator(kind, int(u) + 1, int(v) + 1) for u, v in np.argwhere(mask)]


def enumerate_possible_operators(dag: Dag) -> tuple[list[Operator], list[Operator], list[Operator]]:
    """All possible insert, delete and reverse moves, validity not checked."""
    adj = dag.adj
    ins = _ops_from_mask(_possible_insert_mask(adj), OpKind.INSERT)
    edges = adj.astype(bool)
    dele = _ops_from_mask(edges, OpKind.DELETE)
    rev = _ops_from_mask(edges, OpKind.REVERSE)
    return ins, dele, rev


def apply_operator(dag: Dag, op: Operator) -> Dag:
    """Apply a move and return the modified graph.

    Raises NotApplicableError when the move's precondition fails on this
    graph and CycleError when the modified graph is not acyclic. Reversal is
    delete u -> v followed by insert v -> u; acyclicity is checked on the
    fully modified graph.
    """
    u0 = dag._check_label(op.u)
    v0 = dag._check_label(op.v)
    adj = dag.adj.copy()
    if op.kind == OpKind.INSERT:
        if adj[u0, v0] or adj[v0, u0]:
            raise NotApplicableError(f"insert {op.u}->{op.v}: nodes already adjacent")
        adj[u0, v0] = 1
    elif op.kind == OpKind.DELETE:
        if not adj[u0, v0]:
            raise NotApplicableError(f"delete {op.u}->{op.v}: edge absent")
        adj[u0, v0] = 0
    else:
        if not adj[u0, v0]:
            raise NotApplicableError(f"reverse {op.u}->{op.v}: edge absent")
        adj[u0, v0] = 0
        adj[v0, u0] = 1
    if not _is_acyclic(adj):
        raise CycleError(f"{op.kind.name.lower()} {op.u}->{op.v} creates a cycle")
    return Dag(adj)


def valid_operators(dag: Dag) -> list[Operator]:
    """The moves whose application yields an acyclic graph.

    Deterministic order: inserts, then deletes, then reverses, each
    lexicographic by (u, v), so seeded runs are reproducible.
    """
    ins, dele, rev = _valid_masks(dag.adj)
    return (
        _ops_from_mask(ins, OpKind.INSERT)
        + _ops_from_mask(dele, OpKind.DELETE)
        + _ops_from_mask(rev, OpKind.REVERSE)
    )


def count_valid_operators(dag: Dag) -> int:
    """len(valid_operators(dag)) without materializing the list."""
    ins, dele, rev = _valid_masks(dag.adj)
    return int(ins.sum()) + int(dele.sum()) + int(rev.sum())


def _apply_unchecked(adj: np.ndarray, kind: OpKind, u0: int, v0: int) -> np.ndarray:
    out = adj.copy()
    if kind == OpKind.INSERT:
        out[u0, v0] = 1
    elif kind == OpKind.DELETE:
        out[u0, v0] = 0
    else:
        out[u0, v0] = 0
        out[v0, u0] = 1
    return out


def propose_exact(dag: Dag, rng: np.random.Generator) -> tuple[Dag, Operator, int]:
    """Draw a successor uniformly over all valid moves.

    Returns (successor, move, number of valid moves); the transition
    probability of the draw is 1 / that count.
    """
    if dag.q < 2:
        raise NoMoveError("no edge moves exist on a single-node graph")
    ins, dele, rev = _valid_masks(dag.adj)
    cells = [np.argwhere(m) for m in (ins, dele, rev)]
    counts = [c.shape[0] for c in cells]
    size = sum(counts)
    idx = int(rng.integers(size))
    for kind, c, k in zip((OpKind.INSERT, OpKind.DELETE, OpKind.REVERSE), cells, counts):
        if idx < k:
            u0, v0 = (int(x) for x in c[idx])
            op = Operator(kind, u0 + 1, v0 + 1)
            return Dag(_apply_unchecked(dag.adj, kind, u0, v0)), op, size
        idx -= k
    raise AssertionError("unreachable")


def propose_fast(dag: Dag, rng: np.random.Generator) -> tuple[Dag, Operator]:
    """Draw uniformly over possible moves, rejecting until one is valid.

    Skips the valid-move enumeration entirely; conditional on acceptance the
    successor law matches propose_exact, and downstream the proposal ratio
    is treated as 1.
    """
    if dag.q < 2:
        raise NoMoveError("no edge moves exist on a single-node graph")
    adj = dag.adj
    ins_mask, dele_mask, rev_mask = _valid_masks(adj)
    ins_cells = np.argwhere(_possible_insert_mask(adj))
    edge_cells = np.argwhere(adj)
    n_ins, n_edge = ins_cells.shape[0], edge_cells.shape[0]
    total = n_ins + 2 * n_edge
    while True:
        idx = int(rng.integers(total))
        if idx < n_ins:
            kind, cell, mask = OpKind.INSERT, ins_cells[idx], ins_mask
        elif idx < n_ins + n_edge:
            kind, cell, mask = OpKind.DELETE, edge_cells[idx - n_ins], dele_mask
        else:
            kind, cell, mask = OpKind.REVERSE, edge_cells[idx - n_ins - n_edge], rev_mask
        u0, v0 = int(cell[0]), int(cell[1])
        if mask[u0, v0]:
            op = Operator(kind, u0 + 1, v0 + 1)
            return Dag(_apply_unchecked(adj, kind, u0, v0)), op


def enumerate_all_dags(q: int) -> list[Dag]:
    """Every labeled DAG on q <= 4 nodes, by brute-force acyclicity filtering."""
    if not 1 <= q <= 4:
        raise TooLargeError("exhaustive DAG enumeration supports 1 <= q <= 4")
    cells = [(u, v) for u in range(q) for v in range(q) if u != v]
    out = []
    for code in range(1 << len(cells)):
        adj = np.zeros((q, q), dtype=np.uint8)
        for bit, (u, v) in enumerate(cells):
            if code >> bit & 1:
                adj[u, v] = 1
        if _is_acyclic(adj):
            out.append(Dag(adj))
    return out


def vstructures(dag: Dag) -> frozenset[tuple[int, int, int]]:
    """Colliders u -> w <- v with u, v non-adjacent, as (min(u,v), w, max(u,v))."""
    adj = dag.adj
    out = set()
    for w0 in range(dag.q):
        pa = np.flatnonzero(adj[:, w0])
        for i in range(pa.size):
            for k in range(i + 1, pa.size):
                u0, v0 = int(pa[i]), int(pa[k])
                if not (adj[u0, v0] or adj[v0, u0]):
                    out.add((u0 + 1, w0 + 1, v0 + 1))
    return frozenset(out)


def markov_equivalent(d1: Dag, d2: Dag) -> bool:
    """True iff the two DAGs share skeleton and v-structures."""
    if d1.q != d2.q:
        raise ShapeError("graphs must have the same node count")
    if not np.array_equal(d1.skeleton(), d2.skeleton()):
        return False
    return vstructures(d1) == vstructures(d2)


def save_adjacency_csv(dag: Dag, path) -> None:
    """Write a headerless CSV of 0/1 integers (row = source, column = target)."""
    np.savetxt(path, dag.adj, fmt="%d", delimiter=",")


def load_adjacency_csv(path) -> Dag:
    """Read a headerless 0/1 CSV adjacency matrix."""
    mat = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    return Dag(mat)


def to_edge_dict(dag: Dag) -> dict:
    """JSON-ready form {"q": q, "edges": [[u, v], ...]} with 1-based labels."""
    return {"q": dag.q, "edges": [[u, v] for u, v in dag.edges()]}


def from_edge_dict(payload: dict) -> Dag:
    """Inverse of to_edge_dict."""
    return Dag.from_edges(int(payload["q"]), payload["edges"])


def save_edge_json(dag: Dag, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_edge_dict(dag), fh)


def load_edge_json(path) -> Dag:
    with open(path, encoding="utf-8") as fh:
        return from_edge_dict(json.load(fh))
