"""Basis-pursuit instances: validation, generators, preprocessing and file I/O.

An instance is the pair ``(A, b)`` of the problem ``min ||s||_1 s.t. A s = b``
with ``A`` an ``n x m`` matrix of full row rank and ``n <= m``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix

from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    InvalidDensity,
    InvalidNodeIndex,
    NonFinite,
    ParseError,
    RankDeficient,
)

DEFAULT_RANK_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BpInstance:
    """A validated basis-pursuit instance.

    Construction checks shapes, finiteness and full row rank; the stored
    arrays are private read-only copies, so an instance can be shared freely.
    ``ground_truth`` is the planted signal for generated instances and is not
    assumed to be the l1 minimizer.
    """

    A: np.ndarray
    b: np.ndarray
    ground_truth: np.ndarray | None = None
    rank_tol: float = DEFAULT_RANK_TOL
    density: float | None = field(default=None, compare=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2:
            raise DimensionMismatch(f"A must be a matrix, got {A.ndim} dimensions")
        n, m = A.shape
        if b.ndim != 1 or b.shape[0] != n:
            raise DimensionMismatch(
                f"b has length {b.size} but A has {n} rows")
        if n == 0 or m == 0:
            raise DimensionMismatch(f"empty matrix of shape {A.shape}")
        if n > m:
            raise DimensionMismatch(
                f"A has more rows than columns ({n} > {m})")
        if not np.all(np.isfinite(A)):
            raise NonFinite("A has non-finite entries")
        if not np.all(np.isfinite(b)):
            raise NonFinite("b has non-finite entries")
        if not self.rank_tol > 0:
            raise ValueError("rank_tol must be positive")
        sv = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(sv > self.rank_tol * sv[0])) if sv[0] > 0 else 0
        if rank < n:
            raise RankDeficient(rank, n)

        gt = self.ground_truth
        if gt is not None:
            gt = np.asarray(gt, dtype=float)
            if gt.shape != (m,):
                raise DimensionMismatch(
                    f"ground_truth has length {gt.size}, expected {m}")
            gt = _frozen(gt)
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "ground_truth", gt)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.A.shape[1]

    def summary(self):
        out = {"n": self.n, "m": self.m}
        if self.density is not None:
            out["density"] = self.density
        return out


@dataclass(frozen=True)
class FoldMap:
    """Maps a solution of a column-duplicated instance back to the original.

    Columns ``2j`` and ``2j+1`` (0-based) of the duplicated matrix are both
    copies of original column ``j``.
    """

    original_m: int


def validate(A, b, rank_tol=DEFAULT_RANK_TOL):
    """Check ``(A, b)`` and return it as a :class:`BpInstance`.

    ``rank_tol`` is relative to the largest singular value of ``A``.
    """
    return BpInstance(A, b, rank_tol=rank_tol)


def duplicate_columns(inst):
    """Return the instance with every column of ``A`` repeated twice.

    The duplicated instance always admits a solution with no zero entry,
    and its l1 optimum equals that of the original.
    """
    A2 = np.repeat(inst.A, 2, axis=1)
    gt = None
    if inst.ground_truth is not None:
        gt = np.repeat(inst.ground_truth / 2.0, 2)
    dup = BpInstance(A2, inst.b, ground_truth=gt, rank_tol=inst.rank_tol)
    return dup, FoldMap(inst.m)


def fold_solution(s_prime, fmap):
    s_prime = np.asarray(s_prime, dtype=float)
    if s_prime.shape != (2 * fmap.original_m,):
        raise DimensionMismatch(
            f"expected a vector of length {2 * fmap.original_m}, "
            f"got shape {s_prime.shape}")
    return s_prime[0::2] + s_prime[1::2]


def incidence_reduced(num_nodes, edges, grounded_node):
    """Signed node-edge incidence matrix with the grounded node's row removed.

    Nodes are 0-based. Edge ``(u, v)`` gets ``+1`` at ``u`` and ``-1`` at ``v``.
    """
    edges = [tuple(e) for e in edges]
    if not edges:
        raise DisconnectedGraph("graph has no edges")
    if not 0 <= grounded_node < num_nodes:
        raise InvalidNodeIndex(
            f"grounded node {grounded_node} outside 0..{num_nodes - 1}")
    for u, v in edges:
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise InvalidNodeIndex(f"edge ({u}, {v}) outside 0..{num_nodes - 1}")

    tails = np.array([u for u, _ in edges])
    heads = np.array([v for _, v in edges])
    adj = coo_matrix(
        (np.ones(len(edges)), (tails, heads)), shape=(num_nodes, num_nodes))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise DisconnectedGraph(f"graph has {ncomp} connected components")

    B = np.zeros((num_nodes, len(edges)))
    cols = np.arange(len(edges))
    B[tails, cols] += 1.0
    B[heads, cols] -= 1.0
    return np.delete(B, grounded_node, axis=0)


def random_instance(m, n, density, seed):
    """Gaussian instance with a planted sparse signal.

    ``A`` has i.i.d. standard normal entries; the planted signal has exactly
    ``ceil(density * m)`` standard-normal nonzeros at uniformly chosen
    positions, and ``b = A @ signal``.
    """
    if not 0 < density <= 1:
        raise InvalidDensity(f"density must lie in (0, 1], got {density}")
    if n > m:
        raise DimensionMismatch(f"need n <= m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    k = math.ceil(density * m)
    support = rng.choice(m, size=k, replace=False)
    s = np.zeros(m)
    s[support] = rng.standard_normal(k)
    return BpInstance(A, A @ s, ground_truth=s, density=density)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def instance_to_dict(inst):
    out = {
        "n": inst.n,
        "m": inst.m,
        "A": inst.A.tolist(),
        "b": inst.b.tolist(),
    }
    if inst.ground_truth is not None:
        out["ground_truth"] = inst.ground_truth.tolist()
    return out


def instance_from_dict(data, rank_tol=DEFAULT_RANK_TOL):
    try:
        A = np.array(data["A"], dtype=float)
        b = np.array(data["b"], dtype=float)
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed numeric data: {exc}") from None
    if A.ndim != 2:
        raise ParseError("field 'A' must be a list of equal-length rows")
    for key, actual in (("n", A.shape[0]), ("m", A.shape[1])):
        if key in data and data[key] != actual:
            raise DimensionMismatch(
                f"declared {key}={data[key]} but A has {key}={actual}")
    gt = data.get("ground_truth")
    return BpInstance(A, b, ground_truth=gt, rank_tol=rank_tol)


def save_instance(inst, path):
    Path(path).write_text(json.dumps(instance_to_dict(inst)))


def read_rhs(path):
    """Read one real per non-blank line."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(("#", "%")):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: cannot parse {line!r} as a real") from None
    return np.array(values)


def default_rhs_path(mtx_path):
    mtx_path = Path(mtx_path)
    return mtx_path.with_name(mtx_path.stem + "_b.txt")


def load_instance(path, rhs=None, rank_tol=DEFAULT_RANK_TOL):
    """Load an instance from JSON, or from Matrix Market plus a rhs file.

    ``.mtx`` files select Matrix Market; ``rhs`` defaults to
    ``<stem>_b.txt`` next to the matrix file.
    """
    path = Path(path)
    if path.suffix.lower() == ".mtx":
        try:
            A = scipy.io.mmread(str(path))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path}: {exc}") from None
        if hasattr(A, "toarray"):
            A = A.toarray()
        b = read_rhs(rhs if rhs is not None else default_rhs_path(path))
        return BpInstance(np.asarray(A, dtype=float), b, rank_tol=rank_tol)

    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    try:
        return instance_from_dict(data, rank_tol=rank_tol)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
