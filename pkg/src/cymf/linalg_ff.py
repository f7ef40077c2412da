"""Exact sparse and dense linear algebra over a prime field F_p.

Two engines live here.

``SparseMatrixFp`` + :func:`kernel_basis` / :func:`solve_affine` / :func:`rank`
implement structured sparse Gaussian elimination with Markowitz-style
pivoting (pick the pivot minimizing (row_nnz - 1) * (col_nnz - 1), ties broken
by position, so elimination order is a pure function of the matrix).  When the
live submatrix gets denser than ``dense_threshold`` the remaining block is
finished by the dense engine.

``ModularRref`` is the dense engine: an incremental reduced-row-echelon
accumulator mod p built on float64 matmuls.  All intermediate values stay
far below 2**53 (p < 2**16, panel sums bounded by rank * p**2), so BLAS
arithmetic is exact; entries are reduced mod p after every product.  Feeding
rows in any chunking produces the same canonical RREF, and every kernel
vector handed out is re-verified against the accumulated rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .polyring import _is_prime

__all__ = [
    "SparseMatrixFp",
    "SolveReport",
    "ModularRref",
    "kernel_basis",
    "solve_affine",
    "rank",
]

_MAX_PRIME = 1 << 16


def _check_prime(p: int) -> None:
    if not (2 < p < _MAX_PRIME) or not _is_prime(p):
        raise ValueError(f"prime must be an odd prime < 2^16, got {p}")


def _modinv(a: int, p: int) -> int:
    return pow(a % p, p - 2, p)


# --------------------------------------------------------------------------
# dense engine
# --------------------------------------------------------------------------

_PANEL = 96


def _rref_leaf(C: np.ndarray, p: int, width: int) -> tuple[np.ndarray, list[int]]:
    """Elementwise RREF of a small row block (C is consumed)."""
    nr = C.shape[0]
    rows: list[np.ndarray] = []
    piv: list[int] = []
    alive = C.any(axis=1)
    for i in range(nr):
        if not alive[i]:
            continue
        nz = np.nonzero(C[i])[0]
        if nz.size == 0:
            continue
        c = int(nz[0])
        row = np.mod(C[i] * _modinv(int(C[i, c]), p), p)
        if i + 1 < nr:
            col = C[i + 1 :, c]
            mask = col != 0
            if mask.any():
                C[i + 1 :][mask] = np.mod(C[i + 1 :][mask] - np.outer(col[mask], row), p)
        rows.append(row)
        piv.append(c)
    if not rows:
        return np.zeros((0, width)), []
    R = np.array(rows)
    for k in range(len(piv) - 2, -1, -1):
        coef = R[k, piv[k + 1 :]]
        if coef.any():
            R[k] = np.mod(R[k] - coef @ R[k + 1 :], p)
    return R, piv


def _rref_chunk(C: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """RREF of a dense chunk: elementwise panels, matmul trailing updates."""
    m, width = C.shape
    panels: list[tuple[np.ndarray, list[int]]] = []
    pos = 0
    while pos < m:
        pr, pp = _rref_leaf(C[pos : pos + _PANEL].copy(), p, width)
        if pp:
            rest = C[pos + _PANEL :]
            if rest.shape[0]:
                coef = rest[:, pp]
                if coef.any():
                    rest[:] = np.mod(rest - coef @ pr, p)
            panels.append((pr, pp))
        pos += _PANEL
    if not panels:
        return np.zeros((0, width)), []
    # back phase: clear later panels' pivots from earlier panels
    for k in range(len(panels) - 2, -1, -1):
        prk, ppk = panels[k]
        later = np.vstack([pr for pr, _ in panels[k + 1 :]])
        later_piv = [c for _, pp in panels[k + 1 :] for c in pp]
        coef = prk[:, later_piv]
        if coef.any():
            panels[k] = (np.mod(prk - coef @ later, p), ppk)
    rows = np.vstack([pr for pr, _ in panels])
    piv = [c for _, pp in panels for c in pp]
    return rows, piv


class ModularRref:
    """Incremental reduced row echelon form mod p.

    Rows are float64 with entries in [0, p) in a preallocated buffer.
    ``add_rows`` reduces a chunk against the accumulated basis with one
    matmul, runs a panel-blocked elimination within the chunk, then
    back-substitutes the new pivots into the old rows, so the basis is
    always the canonical RREF of everything fed so far (the internal row
    order is discovery order; ``pivots`` and ``rows_int`` present the
    canonical pivot-sorted view).
    """

    def __init__(self, ncols: int, p: int):
        _check_prime(p)
        self.n = int(ncols)
        self.p = p
        self._buf = np.zeros((min(256, max(1, self.n)), self.n))
        self._r = 0
        self._piv: list[int] = []      # discovery order, aligned with buffer rows
        self._pivset: set[int] = set()

    @property
    def rank(self) -> int:
        return self._r

    @property
    def pivots(self) -> list[int]:
        """Pivot columns in canonical (sorted) order."""
        return sorted(self._piv)

    @property
    def rows(self) -> np.ndarray:
        """Live basis rows aligned with the internal pivot order."""
        return self._buf[: self._r]

    def pivots_aligned(self) -> list[int]:
        return list(self._piv)

    def free_columns(self) -> list[int]:
        return [c for c in range(self.n) if c not in self._pivset]

    def reduce(self, chunk: np.ndarray) -> np.ndarray:
        """Return chunk reduced against the basis (entries as residues in [0, p))."""
        C = np.mod(np.asarray(chunk, dtype=np.float64), self.p)
        if C.ndim == 1:
            C = C[None, :]
        if self._r:
            coef = C[:, self._piv]
            if coef.any():
                C = np.mod(C - coef @ self._buf[: self._r], self.p)
        return C

    def add_rows(self, chunk: np.ndarray) -> int:
        """Fold a chunk of rows into the basis; returns the number of new pivots."""
        C = self.reduce(chunk)
        NR, newpiv = _rref_chunk(C, self.p)
        k = len(newpiv)
        if not k:
            return 0
        if self._r:
            coef = self._buf[: self._r, newpiv]
            if coef.any():
                np.mod(self._buf[: self._r] - coef @ NR, self.p, out=self._buf[: self._r])
        if self._r + k > self._buf.shape[0]:
            grow = max(self._buf.shape[0] * 2, self._r + k)
            buf = np.zeros((grow, self.n))
            buf[: self._r] = self._buf[: self._r]
            self._buf = buf
        self._buf[self._r : self._r + k] = NR
        self._r += k
        self._piv.extend(newpiv)
        self._pivset.update(newpiv)
        return k

    def kernel_basis(self) -> np.ndarray:
        """Basis (rows, int64) of the null space of the accumulated row space.

        Canonical: one vector per free column, -1 coefficients read off the
        RREF, independent of feeding order.
        """
        free = self.free_columns()
        K = np.zeros((len(free), self.n), dtype=np.int64)
        if not free:
            return K
        K[np.arange(len(free)), free] = 1
        if self._piv:
            R = np.mod(self._buf[: self._r], self.p).astype(np.int64)
            K[:, self._piv] = np.mod(-R[:, free].T, self.p)
        return K

    def rows_int(self) -> np.ndarray:
        """Canonical RREF rows (sorted by pivot column) as int64."""
        order = sorted(range(self._r), key=self._piv.__getitem__)
        return np.mod(self._buf[order], self.p).astype(np.int64)


def dense_rref(A: np.ndarray, p: int, chunk: int = 1024) -> ModularRref:
    A = np.asarray(A)
    acc = ModularRref(A.shape[1], p)
    for s in range(0, A.shape[0], chunk):
        acc.add_rows(A[s : s + chunk])
    return acc


# --------------------------------------------------------------------------
# sparse matrices and reports
# --------------------------------------------------------------------------

@dataclass
class SolveReport:
    rank: int
    kernel_dim: int
    particular_solution: np.ndarray | None = None
    elapsed: float = 0.0
    pivot_strategy: str = "markowitz"

    def __post_init__(self):
        if self.rank < 0 or self.kernel_dim < 0:
            raise ValueError("rank and kernel_dim must be non-negative")


class SparseMatrixFp:
    """Row-sparse matrix over F_p: per-row sorted (column, coefficient) pairs."""

    __slots__ = ("nrows", "ncols", "prime", "rows")

    def __init__(self, nrows: int, ncols: int, prime: int,
                 rows: list[list[tuple[int, int]]] | None = None):
        _check_prime(prime)
        self.nrows = nrows
        self.ncols = ncols
        self.prime = prime
        self.rows: list[list[tuple[int, int]]] = [[] for _ in range(nrows)]
        if rows is not None:
            if len(rows) != nrows:
                raise ValueError("row count mismatch")
            for i, r in enumerate(rows):
                self.rows[i] = self._clean_row(r)

    def _clean_row(self, entries) -> list[tuple[int, int]]:
        acc: dict[int, int] = {}
        for c, v in entries:
            if not 0 <= c < self.ncols:
                raise ValueError(f"column {c} out of range")
            acc[c] = (acc.get(c, 0) + v) % self.prime
        return sorted((c, v) for c, v in acc.items() if v)

    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, prime: int,
                      triplets) -> "SparseMatrixFp":
        m = cls(nrows, ncols, prime)
        per_row: dict[int, list[tuple[int, int]]] = {}
        for i, j, v in triplets:
            if not 0 <= i < nrows:
                raise ValueError(f"row {i} out of range")
            per_row.setdefault(i, []).append((j, v))
        for i, ents in per_row.items():
            m.rows[i] = m._clean_row(ents)
        return m

    @classmethod
    def from_dense(cls, arr, prime: int) -> "SparseMatrixFp":
        arr = np.asarray(arr)
        m = cls(arr.shape[0], arr.shape[1], prime)
        for i in range(arr.shape[0]):
            m.rows[i] = m._clean_row(
                (int(j), int(arr[i, j]) % prime) for j in np.nonzero(arr[i] % prime)[0]
            )
        return m

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.int64)
        for i, r in enumerate(self.rows):
            for c, v in r:
                out[i, c] = v
        return out

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        if v.shape[0] != self.ncols:
            raise ValueError("vector length mismatch")
        out = np.zeros(self.nrows, dtype=np.int64)
        for i, r in enumerate(self.rows):
            s = 0
            for c, w in r:
                s += w * int(v[c])
            out[i] = s % self.prime
        return out

    # triplet text format: header "nrows ncols prime", then "row col value" lines
    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.nrows} {self.ncols} {self.prime}\n")
            for i, r in enumerate(self.rows):
                for c, v in r:
                    fh.write(f"{i} {c} {v}\n")

    @classmethod
    def load(cls, path) -> "SparseMatrixFp":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 3:
                raise ValueError("bad header: want 'nrows ncols prime'")
            nrows, ncols, prime = map(int, header)
            trips = []
            for ln, line in enumerate(fh, start=2):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 3:
                    raise ValueError(f"line {ln}: want 'row col value'")
                trips.append(tuple(map(int, parts)))
        return cls.from_triplets(nrows, ncols, prime, trips)


# --------------------------------------------------------------------------
# sparse elimination
# --------------------------------------------------------------------------

def _sparse_eliminate(A: SparseMatrixFp, dense_threshold: float = 0.20):
    """Markowitz-ordered elimination; returns the canonical RREF as a ModularRref.

    Rows are kept as dicts while the live submatrix is sparse; once its fill
    exceeds ``dense_threshold`` the rest is handed to the dense engine.  The
    final RREF is canonical, so the choice of crossover cannot change results.
    """
    p = A.prime
    work = [dict(r) for r in A.rows]
    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(work):
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    eliminated: list[dict[int, int]] = []   # pivot rows in elimination order
    live = set(i for i, r in enumerate(work) if r)

    while live:
        nnz = sum(len(work[i]) for i in live)
        if nnz > dense_threshold * len(live) * A.ncols and len(live) > _PANEL // 2:
            break
        # Markowitz: minimize (row_nnz - 1) * (col_nnz - 1), deterministic ties
        best = None
        for i in sorted(live):
            rn = len(work[i])
            for c in work[i]:
                key = ((rn - 1) * (len(col_rows[c]) - 1), i, c)
                if best is None or key < best:
                    best = key
            if best is not None and best[0] == 0:
                break
        _, pi, pc = best
        prow = work[pi]
        inv = _modinv(prow[pc], p)
        prow = {c: (v * inv) % p for c, v in prow.items()}
        # eliminate pc from all other live rows
        for j in list(col_rows.get(pc, ())):
            if j == pi or j not in live:
                continue
            rj = work[j]
            f = rj.get(pc)
            if not f:
                continue
            for c, v in prow.items():
                nv = (rj.get(c, 0) - f * v) % p
                if nv:
                    if c not in rj:
                        col_rows.setdefault(c, set()).add(j)
                    rj[c] = nv
                elif c in rj:
                    del rj[c]
                    col_rows[c].discard(j)
            if not rj:
                live.discard(j)
        for c in prow:
            col_rows[c].discard(pi)
        live.discard(pi)
        work[pi] = {}
        eliminated.append(prow)

    acc = ModularRref(A.ncols, p)
    pending = eliminated + [work[i] for i in sorted(live)]
    for s in range(0, len(pending), 256):
        batch = pending[s : s + 256]
        block = np.zeros((len(batch), A.ncols))
        for k, r in enumerate(batch):
            for c, v in r.items():
                block[k, c] = v
        acc.add_rows(block)
    return acc


def rank(A: SparseMatrixFp) -> int:
    """Rank of A over F_p."""
    return _sparse_eliminate(A).rank


def kernel_basis(A: SparseMatrixFp) -> tuple[list[np.ndarray], SolveReport]:
    """Basis of the right kernel of A; every vector re-verified by sparse multiply."""
    t0 = time.perf_counter()
    acc = _sparse_eliminate(A)
    K = acc.kernel_basis()
    for v in K:
        if np.any(A.matvec(v)):
            raise AssertionError("kernel vector failed re-verification")
    report = SolveReport(
        rank=acc.rank,
        kernel_dim=K.shape[0],
        elapsed=time.perf_counter() - t0,
    )
    assert report.rank + report.kernel_dim == A.ncols
    return [K[i] for i in range(K.shape[0])], report


def solve_affine(A: SparseMatrixFp, b) -> tuple[np.ndarray | None, list[np.ndarray], SolveReport]:
    """Solve A x = b exactly; returns (particular or None, kernel basis, report).

    An inconsistent system yields ``(None, kernel, report)`` rather than an
    exception; the kernel is still that of A.
    """
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=np.int64) % A.prime
    if b.shape[0] != A.nrows:
        raise ValueError("right-hand side length mismatch")
    aug = SparseMatrixFp(A.nrows, A.ncols + 1, A.prime)
    for i, r in enumerate(A.rows):
        row = list(r)
        if b[i]:
            row.append((A.ncols, int(b[i])))
        aug.rows[i] = row
    acc = _sparse_eliminate(aug)
    R = acc.rows_int()
    x0: np.ndarray | None = None
    if all(pc < A.ncols for pc in acc.pivots):
        # rhs column is free: read the particular solution off the RREF
        x0 = np.zeros(A.ncols, dtype=np.int64)
        for rix, pc in enumerate(acc.pivots):
            x0[pc] = R[rix, A.ncols] % A.prime
        if np.any((A.matvec(x0) - b) % A.prime):
            raise AssertionError("particular solution failed re-verification")
    kernel, krep = kernel_basis(A)
    report = SolveReport(
        rank=krep.rank,
        kernel_dim=krep.kernel_dim,
        particular_solution=x0,
        elapsed=time.perf_counter() - t0,
    )
    return x0, kernel, report
