"""Graded matrix factorizations and morphism spaces in their homotopy category.

A factorization of a homogeneous ``f`` of degree ``d`` is a pair of square
polynomial matrices ``d1`` (entries of degree ``a``) and ``d0`` (degree
``b = d - a``) with ``d0 @ d1 == d1 @ d0 == f * I`` exactly; construction
refuses anything else.  Degree-0 morphisms are constant pairs ``(A, B)`` with
``B d1 = d1 A`` and ``A d0 = d0 B``; degree-1 morphisms are pairs with entry
degrees ``(a, b)`` satisfying ``B d1 = d0 A`` and ``A d0 = d1 B``, modulo the
homotopies ``A = d1 T + S d1``, ``B = T d0 + d0 S`` with ``S, T`` constant.

Computations run over F_p.  Small systems are assembled literally (both
squares, all unknowns) and row reduced.  At the E6 scale (39 366 unknowns,
240 570 equations) the cocycle space is computed through an exact reduction:
a pair is a cocycle iff every entry of ``d0 A d0`` is divisible by ``f``,
with ``B = (d0 A d0)/f``.  (Multiply the first square on the right by ``d0``
to get ``f B = d0 A d0``; conversely divisibility rebuilds both squares using
``d0 d1 = d1 d0 = f I`` over the polynomial ring, a domain.)  The divisibility
system is compressed through seeded random functionals vanishing on
``f * (degree-b forms)`` and every kernel basis vector is then certified by
recomputing ``d0 A d0`` and checking divisibility exactly.  Compressed rows
are combinations of full-system rows, so a certified kernel equals the true
kernel, and the canonical RREF makes the outcome independent of the draw.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass

import numpy as np

from .linalg_ff import ModularRref
from .polyring import (
    PolyMatrix,
    RingDescriptor,
    SparsePoly,
    monomials_of_degree,
)

__all__ = [
    "MfVerifyError",
    "NoAdjugatePartnerError",
    "VerifyResult",
    "GradedMF",
    "MorphismSpace",
    "AdjugateReport",
    "SphericalReport",
    "mf_verify",
    "adjugate_partner",
    "hom_degree0",
    "ext1",
    "spherical_check",
    "parse_mf_text",
    "parse_mf_file",
    "format_mf_text",
]


class MfVerifyError(ValueError):
    """A matrix pair fails the factorization identities."""


class NoAdjugatePartnerError(ValueError):
    """No quadratic partner completes M to a factorization of f."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# monomial tensors: an n-by-n matrix of degree-d forms in m variables is an
# int array [num_monomials(m, d), n, n] in canonical monomial order
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _monos(m: int, d: int) -> tuple[bytes, ...]:
    return tuple(monomials_of_degree(m, d))


@functools.lru_cache(maxsize=None)
def _mono_index(m: int, d: int):
    return {mo: i for i, mo in enumerate(_monos(m, d))}


@functools.lru_cache(maxsize=None)
def _pair_table(m: int, da: int, db: int) -> np.ndarray:
    """table[a, b] = canonical index of mono_a * mono_b in degree da + db."""
    A, B = _monos(m, da), _monos(m, db)
    idx = _mono_index(m, da + db)
    t = np.empty((len(A), len(B)), dtype=np.int64)
    for i, ma in enumerate(A):
        for j, mb in enumerate(B):
            t[i, j] = idx[bytes(x + y for x, y in zip(ma, mb))]
    return t


def _to_tensor(mat: PolyMatrix, degree: int) -> np.ndarray:
    m = mat.ring.num_vars
    idx = _mono_index(m, degree)
    out = np.zeros((len(idx), mat.nrows, mat.ncols), dtype=np.int64)
    for i in range(mat.nrows):
        for j in range(mat.ncols):
            e = mat[i, j]
            if not e.is_homogeneous(degree):
                raise ValueError(f"entry ({i},{j}) is not homogeneous of degree {degree}")
            for mono, c in e._terms.items():
                out[idx[mono], i, j] = c
    return out


def _from_tensor(ring: RingDescriptor, degree: int, tensor: np.ndarray) -> PolyMatrix:
    monos = _monos(ring.num_vars, degree)
    _, nr, nc = tensor.shape
    rows = []
    for i in range(nr):
        row = []
        for j in range(nc):
            terms = {monos[t]: int(tensor[t, i, j]) for t in np.nonzero(tensor[:, i, j])[0]}
            row.append(SparsePoly(ring, terms))
        rows.append(row)
    return PolyMatrix(rows)


def _tensor_matmul(X: np.ndarray, Y: np.ndarray, table: np.ndarray, nout: int, p: int) -> np.ndarray:
    """Product of homogeneous matrix tensors, exact mod p via float64 matmuls.

    For fixed a the products m_a * m_b are pairwise distinct, so the scatter
    into the output degree is a collision-free fancy-indexed add.  Values
    stay below nmono * n * p^2 < 2^53 between the periodic reductions.
    """
    Xf = np.mod(X, p).astype(np.float64)
    Yf = np.mod(Y, p).astype(np.float64)
    out = np.zeros((nout, X.shape[1], Y.shape[2]))
    for a in range(X.shape[0]):
        out[table[a]] += np.matmul(Xf[a], Yf)    # [Nb, n, n], entries < n * p^2
        if a % 512 == 511:
            np.mod(out, p, out=out)
    return np.mod(out, p).astype(np.int64)


def _coeffs(poly: SparsePoly, degree: int) -> np.ndarray:
    idx = _mono_index(poly.ring.num_vars, degree)
    v = np.zeros(len(idx), dtype=np.int64)
    for mono, c in poly._terms.items():
        v[idx[mono]] = c
    return v


def _entry_degree(mat: PolyMatrix) -> int | None:
    for i in range(mat.nrows):
        for j in range(mat.ncols):
            if not mat[i, j].is_zero():
                return mat[i, j].degree
    return None


# ---------------------------------------------------------------------------
# verification and construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    side: str | None = None          # "d0*d1" or "d1*d0"
    position: tuple[int, int] | None = None
    residual: SparsePoly | None = None

    def __bool__(self) -> bool:
        return self.ok


def _tensor_first_failure(f, d1, d0, deg1, deg0, side) -> VerifyResult | None:
    ring = f.ring
    p = ring.char
    m = ring.num_vars
    d = deg1 + deg0
    X, dx = (d0, deg0) if side == "d0*d1" else (d1, deg1)
    Y, dy = (d1, deg1) if side == "d0*d1" else (d0, deg0)
    Xt = _to_tensor(X, dx)
    Yt = _to_tensor(Y, dy)
    nd = len(_monos(m, d))
    prod = _tensor_matmul(Xt, Yt, _pair_table(m, dx, dy), nd, p)
    want = np.zeros_like(prod)
    fv = np.mod(_coeffs(f, d), p)
    n = X.nrows
    for i in range(n):
        want[:, i, i] = fv
    diff = np.mod(prod - want, p)
    bad = np.nonzero(diff.any(axis=0))
    if bad[0].size == 0:
        return None
    i, j = int(bad[0][0]), int(bad[1][0])
    residual = _from_tensor(ring, d, diff[:, i : i + 1, j : j + 1])[0, 0]
    return VerifyResult(False, side, (i, j), residual)


def _poly_first_failure(prod: PolyMatrix, f: SparsePoly, side: str) -> VerifyResult | None:
    zero = SparsePoly.zero(f.ring)
    for i in range(prod.nrows):
        for j in range(prod.ncols):
            want = f if i == j else zero
            if prod[i, j] != want:
                return VerifyResult(False, side, (i, j), prod[i, j] - want)
    return None


def mf_verify(f: SparsePoly, d1: PolyMatrix, d0: PolyMatrix) -> VerifyResult:
    """Check d0 @ d1 == d1 @ d0 == f * I exactly; pinpoint the first failure.

    The residual reported for a failing entry is (product - expected) at that
    entry.  Over a prime field with homogeneous entries the products are
    evaluated through coefficient tensors; otherwise through SparsePoly
    arithmetic.  Both are exact.
    """
    if d1.nrows != d1.ncols or d0.nrows != d0.ncols or d1.nrows != d0.nrows:
        raise ValueError("factorization matrices must be square of equal size")
    if d1.ring != f.ring or d0.ring != f.ring:
        raise ValueError("f and the matrices must share one ring")
    deg1, deg0 = _entry_degree(d1), _entry_degree(d0)
    fast = (
        f.ring.char > 0
        and deg1 is not None
        and deg0 is not None
        and d1.entries_homogeneous(deg1)
        and d0.entries_homogeneous(deg0)
        and not f.is_zero()
        and f.is_homogeneous(deg1 + deg0)
    )
    if fast:
        fail = _tensor_first_failure(f, d1, d0, deg1, deg0, "d0*d1") or _tensor_first_failure(
            f, d1, d0, deg1, deg0, "d1*d0"
        )
    else:
        fail = _poly_first_failure(d0 @ d1, f, "d0*d1") or _poly_first_failure(
            d1 @ d0, f, "d1*d0"
        )
    return fail if fail is not None else VerifyResult(True)


@dataclass(frozen=True)
class GradedMF:
    """A verified graded matrix factorization; build through :meth:`build`."""

    f: SparsePoly
    d1: PolyMatrix
    d0: PolyMatrix
    deg_d1: int
    deg_d0: int
    size: int

    @classmethod
    def build(cls, f: SparsePoly, d1: PolyMatrix, d0: PolyMatrix) -> "GradedMF":
        if f.is_zero():
            raise MfVerifyError("f must be nonzero")
        d = f.degree
        if not f.is_homogeneous(d):
            raise MfVerifyError("f must be homogeneous")
        deg1 = _entry_degree(d1)
        deg0 = _entry_degree(d0)
        if deg1 is None or deg0 is None:
            raise MfVerifyError("zero matrix cannot be part of a factorization")
        if deg1 + deg0 != d:
            raise MfVerifyError(f"entry degrees {deg1} + {deg0} do not sum to deg f = {d}")
        if not (d1.entries_homogeneous(deg1) and d0.entries_homogeneous(deg0)):
            raise MfVerifyError("matrix entries are not homogeneous of one degree")
        res = mf_verify(f, d1, d0)
        if not res:
            raise MfVerifyError(
                f"composition {res.side} fails at {res.position}: residual {res.residual!r}"
            )
        return cls(f=f, d1=d1, d0=d0, deg_d1=deg1, deg_d0=deg0, size=d1.nrows)

    @property
    def ring(self) -> RingDescriptor:
        return self.f.ring

    def verify(self) -> VerifyResult:
        return mf_verify(self.f, self.d1, self.d0)

    def direct_sum(self, other: "GradedMF") -> "GradedMF":
        if self.f != other.f or (self.deg_d1, self.deg_d0) != (other.deg_d1, other.deg_d0):
            raise ValueError("direct sum needs matching f and entry degrees")
        zero = SparsePoly.zero(self.ring)

        def block(x: PolyMatrix, y: PolyMatrix) -> PolyMatrix:
            n, k = x.nrows, y.nrows
            return PolyMatrix(
                [
                    [
                        x[i, j] if i < n and j < n
                        else y[i - n, j - n] if i >= n and j >= n
                        else zero
                        for j in range(n + k)
                    ]
                    for i in range(n + k)
                ]
            )

        return GradedMF.build(self.f, block(self.d1, other.d1), block(self.d0, other.d0))


# ---------------------------------------------------------------------------
# adjugate partner
# ---------------------------------------------------------------------------

@dataclass
class AdjugateReport:
    rank: int
    kernel_dim: int
    consistent: bool
    elapsed: float


def adjugate_partner(M: PolyMatrix, f: SparsePoly) -> tuple[PolyMatrix, AdjugateReport]:
    """The degree-(d - a) partner N with M N = N M = f I, by exact linear algebra.

    The system M N = f I is block diagonal across the columns of N: one
    shared coefficient matrix with n right-hand sides.  N M = f I is then
    verified exactly; a failure there means M is singular as a polynomial
    matrix, in which case no two-sided partner exists.  The report records
    the rank and kernel dimension of the one-sided solve (kernel_dim > 0
    would mean a non-unique partner; 0 is observed at generic restrictions).
    """
    t0 = time.perf_counter()
    ring = f.ring
    if ring.char == 0:
        raise ValueError("adjugate_partner runs over a prime field")
    p = ring.char
    n = M.nrows
    if M.nrows != M.ncols:
        raise ValueError("M must be square")
    m = ring.num_vars
    d = f.degree
    a = _entry_degree(M)
    if a is None or not M.entries_homogeneous(a):
        raise ValueError("M must have homogeneous entries of one degree")
    b = d - a
    if b < 0:
        raise ValueError("deg f smaller than the entry degree of M")
    Mt = _to_tensor(M, a)
    Na, Nb, Nd = (len(_monos(m, dd)) for dd in (a, b, d))
    tab = _pair_table(m, a, b)
    # rows (i, mu), cols (k, alpha): sum of Mt[t, i, k] over m_t * m_alpha = mu
    G = np.zeros((Nd, n, n, Nb), dtype=np.int64)
    for t in range(Na):
        for al in range(Nb):
            G[tab[t, al], :, :, al] += Mt[t]
    Gm = np.mod(G.transpose(1, 0, 2, 3).reshape(n * Nd, n * Nb), p)
    fv = np.mod(_coeffs(f, d), p)
    rhs = np.zeros((n * Nd, n), dtype=np.int64)
    for i in range(n):
        rhs[i * Nd : (i + 1) * Nd, i] = fv

    ncols = n * Nb
    acc = ModularRref(ncols + n, p)
    aug = np.concatenate([Gm, rhs], axis=1)
    for s in range(0, aug.shape[0], 1024):
        acc.add_rows(aug[s : s + 1024])
    consistent = all(pc < ncols for pc in acc.pivots)
    hom_rank = sum(1 for pc in acc.pivots if pc < ncols)
    report = AdjugateReport(
        rank=hom_rank,
        kernel_dim=ncols - hom_rank,
        consistent=consistent,
        elapsed=time.perf_counter() - t0,
    )
    if not consistent:
        raise NoAdjugatePartnerError("no adjugate partner exists", report)
    R = acc.rows_int()
    sol = np.zeros((ncols, n), dtype=np.int64)
    for rix, pc in enumerate(acc.pivots):
        if pc < ncols:
            sol[pc] = R[rix, ncols:]
    Nt = sol.reshape(n, Nb, n).transpose(1, 0, 2) % p
    Npoly = _from_tensor(ring, b, Nt)
    res = mf_verify(f, M, Npoly)
    if not res:
        raise NoAdjugatePartnerError(
            f"one-sided solution is not two-sided (M singular): {res.side} fails at {res.position}",
            report,
        )
    report.elapsed = time.perf_counter() - t0
    return Npoly, report


# ---------------------------------------------------------------------------
# morphism spaces
# ---------------------------------------------------------------------------

@dataclass
class MorphismSpace:
    degree: int
    cocycle_dim: int
    coboundary_dim: int
    hom_dim: int
    basis: list[tuple[PolyMatrix, PolyMatrix]] | None = None

    def __post_init__(self):
        if self.hom_dim != self.cocycle_dim - self.coboundary_dim or self.hom_dim < 0:
            raise ValueError("hom_dim must equal cocycle_dim - coboundary_dim >= 0")


def _require_prime_field(mf: GradedMF) -> int:
    p = mf.ring.char
    if p == 0:
        raise ValueError("morphism spaces are computed over a prime field")
    return p


def hom_degree0(mf: GradedMF, with_basis: bool = False) -> MorphismSpace:
    """Degree-0 morphisms: constant pairs (A, B) with B d1 = d1 A and A d0 = d0 B.

    There is no homotopy quotient in degree 0 (a homotopy would need entries
    of negative degree), so hom_dim equals the cocycle dimension.
    """
    p = _require_prime_field(mf)
    n = mf.size
    D1 = _to_tensor(mf.d1, mf.deg_d1)
    D0 = _to_tensor(mf.d0, mf.deg_d0)
    I = np.eye(n)
    acc = ModularRref(2 * n * n, p)
    for t in range(D1.shape[0]):
        Mt = D1[t].astype(np.float64)
        acc.add_rows(np.concatenate([-np.kron(Mt, I), np.kron(I, Mt.T)], axis=1) % p)
    for s in range(D0.shape[0]):
        Ns = D0[s].astype(np.float64)
        acc.add_rows(np.concatenate([np.kron(I, Ns.T), -np.kron(Ns, I)], axis=1) % p)
    kernel = acc.kernel_basis()
    dim = kernel.shape[0]
    basis = None
    if with_basis:
        basis = [
            (
                _from_tensor(mf.ring, 0, v[: n * n].reshape(1, n, n)),
                _from_tensor(mf.ring, 0, v[n * n :].reshape(1, n, n)),
            )
            for v in kernel
        ]
    return MorphismSpace(degree=0, cocycle_dim=dim, coboundary_dim=0, hom_dim=dim, basis=basis)


def _homotopy_blocks(n: int, D1: np.ndarray, D0: np.ndarray, p: int):
    """Row blocks of the homotopy map (S, T) -> (d1 T + S d1, T d0 + d0 S).

    Columns are [vec S | vec T]; the row layout (A-part blocks by monomial,
    then B-part blocks) matches the cocycle unknown layout.
    """
    I = np.eye(n)
    for t in range(D1.shape[0]):
        Mt = D1[t].astype(np.float64)
        yield np.concatenate([np.kron(I, Mt.T), np.kron(Mt, I)], axis=1) % p
    for s in range(D0.shape[0]):
        Ns = D0[s].astype(np.float64)
        yield np.concatenate([np.kron(Ns, I), np.kron(I, Ns.T)], axis=1) % p


_DIRECT_LIMIT = 5000


def ext1(mf: GradedMF, with_basis: bool = False, rng_seed: int = 24247) -> MorphismSpace:
    """Degree-1 morphisms modulo homotopy (dimension 1 of the Ext algebra).

    The unknown layout is [A coefficients by monomial | B coefficients by
    monomial].  Small systems solve the literal two-square constraint matrix;
    large ones use the certified divisibility reduction on A alone (module
    docstring).  In both modes every homotopy image is checked to be a
    cocycle against the computed constraint rows before dimensions are
    reported.
    """
    p = _require_prime_field(mf)
    n = mf.size
    D1 = _to_tensor(mf.d1, mf.deg_d1)
    D0 = _to_tensor(mf.d0, mf.deg_d0)
    Na, Nb = D1.shape[0], D0.shape[0]
    nA, nB = n * n * Na, n * n * Nb

    if nA + nB <= _DIRECT_LIMIT:
        acc, kernel, pairs = _ext1_direct(mf, D1, D0, with_basis)
        direct = True
    else:
        acc, kernel, pairs = _ext1_certified(mf, D1, D0, with_basis, rng_seed)
        direct = False

    # coboundary rank, plus the runtime check that homotopy images are cocycles
    cob = ModularRref(2 * n * n, p)
    R = acc.rows if acc.rank else None
    chk = None if (R is None or not direct) else np.zeros((R.shape[0], 2 * n * n))
    off = 0
    for block in _homotopy_blocks(n, D1, D0, p):
        cob.add_rows(block)
        if chk is not None:
            # direct mode: constraint rows times every homotopy image column
            chk = np.mod(chk + R[:, off : off + block.shape[0]] @ block, p)
        off += block.shape[0]
    if chk is not None and chk.any():
        raise AssertionError("a homotopy image violates the cocycle equations")
    if not direct:
        _check_homotopies_are_cocycles(mf, D1, D0, acc, p, rng_seed)
    coboundary_dim = cob.rank

    cocycle_dim = kernel.shape[0]
    return MorphismSpace(
        degree=1,
        cocycle_dim=cocycle_dim,
        coboundary_dim=coboundary_dim,
        hom_dim=cocycle_dim - coboundary_dim,
        basis=pairs if with_basis else None,
    )


def _check_homotopies_are_cocycles(mf, D1, D0, acc, p, rng_seed, samples=3):
    """Exact spot check in the certified mode: for seeded random constant
    (S, T), the homotopy image (d1 T + S d1, T d0 + d0 S) satisfies both
    squares and lies in the computed cocycle space.  (The inclusion holds
    identically because d0 d1 = d1 d0 = f I; this catches wiring mistakes.)"""
    n = mf.size
    m = mf.ring.num_vars
    a, b = mf.deg_d1, mf.deg_d0
    rng = np.random.default_rng(rng_seed ^ 0xC0B0)
    tab_ba = _pair_table(m, b, a)
    Nd = len(_monos(m, a + b))
    D1f = np.mod(D1, p).astype(np.float64)
    D0f = np.mod(D0, p).astype(np.float64)
    for _ in range(samples):
        S = rng.integers(0, p, size=(n, n)).astype(np.float64)
        T = rng.integers(0, p, size=(n, n)).astype(np.float64)
        At = np.mod(np.matmul(D1f, T) + np.matmul(S, D1f), p)   # [Na, n, n]
        Bt = np.mod(np.matmul(T, D0f) + np.matmul(D0f, S), p)   # [Nb, n, n]
        # square 1: B d1 = d0 A; square 2: A d0 = d1 B, per degree-d monomial
        sq1 = np.zeros((Nd, n, n))
        sq2 = np.zeros((Nd, n, n))
        for s in range(D0.shape[0]):
            sq1[tab_ba[s]] += np.matmul(Bt[s][None, :, :], D1f) - np.matmul(D0f[s], At)
            sq2[tab_ba[s]] += np.matmul(At, D0f[s]) - np.matmul(D1f, Bt[s][None, :, :])
        if np.mod(sq1, p).any() or np.mod(sq2, p).any():
            raise AssertionError("a homotopy image violates the cocycle equations")
        vecA = np.mod(At, p).reshape(-1)
        if acc.rank and np.mod(acc.rows @ vecA, p).any():
            raise AssertionError("a homotopy image escapes the compressed cocycle space")


def _ext1_direct(mf: GradedMF, D1: np.ndarray, D0: np.ndarray, with_basis: bool):
    """Literal two-square cocycle system over all (A, B) coefficients."""
    p = mf.ring.char
    n = mf.size
    m = mf.ring.num_vars
    a, b = mf.deg_d1, mf.deg_d0
    d = a + b
    Na, Nb, Nd = D1.shape[0], D0.shape[0], len(_monos(m, d))
    nA, nB = n * n * Na, n * n * Nb
    I = np.eye(n)
    tab_ba = _pair_table(m, b, a)
    tab_ab = _pair_table(m, a, b)

    # square 1: (B d1 - d0 A)_mu = 0; square 2: (A d0 - d1 B)_mu = 0
    rows1 = np.zeros((Nd, n * n, nA + nB))
    rows2 = np.zeros((Nd, n * n, nA + nB))
    for s in range(Nb):
        Ns = D0[s].astype(np.float64)
        for t in range(Na):
            Mt = D1[t].astype(np.float64)
            mu = int(tab_ba[s, t])
            rows1[mu, :, t * n * n : (t + 1) * n * n] -= np.kron(Ns, I)
            rows1[mu, :, nA + s * n * n : nA + (s + 1) * n * n] += np.kron(I, Mt.T)
            mu2 = int(tab_ab[t, s])
            rows2[mu2, :, t * n * n : (t + 1) * n * n] += np.kron(I, Ns.T)
            rows2[mu2, :, nA + s * n * n : nA + (s + 1) * n * n] -= np.kron(Mt, I)
    acc = ModularRref(nA + nB, p)
    for mu in range(Nd):
        acc.add_rows(rows1[mu] % p)
        acc.add_rows(rows2[mu] % p)
    kernel = acc.kernel_basis()
    pairs = None
    if with_basis:
        pairs = []
        for v in kernel:
            At = v[:nA].reshape(Na, n, n)
            Bt = v[nA:].reshape(Nb, n, n)
            pairs.append((_from_tensor(mf.ring, a, At), _from_tensor(mf.ring, b, Bt)))
    return acc, kernel, pairs


def _f_times_forms_rref(mf: GradedMF) -> tuple[ModularRref, np.ndarray]:
    """RREF of the row space {f * (degree-b form)} inside degree-(d+b) forms."""
    p = mf.ring.char
    m = mf.ring.num_vars
    b = mf.deg_d0
    d = mf.deg_d1 + b
    Nb, Nd, Nq = (len(_monos(m, dd)) for dd in (b, d, d + b))
    tab_db = _pair_table(m, d, b)
    fv = np.mod(_coeffs(mf.f, d), p)
    D = np.zeros((Nb, Nq), dtype=np.int64)
    for u in np.nonzero(fv)[0]:
        D[np.arange(Nb), tab_db[u]] = (D[np.arange(Nb), tab_db[u]] + fv[u]) % p
    acc = ModularRref(Nq, p)
    acc.add_rows(D)
    if acc.rank != Nb:
        raise AssertionError("multiplication by f is not injective")
    return acc, D


def _ext1_certified(mf: GradedMF, D1: np.ndarray, D0: np.ndarray,
                    with_basis: bool, rng_seed: int):
    """Cocycles as {A : d0 A d0 divisible by f}, compressed then certified."""
    p = mf.ring.char
    n = mf.size
    m = mf.ring.num_vars
    a, b = mf.deg_d1, mf.deg_d0
    d = a + b
    Na, Nb = D1.shape[0], D0.shape[0]
    nA = n * n * Na
    tab_ba = _pair_table(m, b, a)      # deg b x deg a -> deg d
    tab_db = _pair_table(m, d, b)      # deg d x deg b -> deg d+b
    D0f = np.mod(D0, p).astype(np.float64)

    f_rref, _ = _f_times_forms_rref(mf)
    functionals = f_rref.kernel_basis()            # annihilator of f * forms
    rng = np.random.default_rng(rng_seed)

    acc = ModularRref(nA, p)
    stall = 0
    drawn = 0
    kernel = None
    while True:
        # draw functionals until the rank is stable, then certify
        while acc.rank < nA and stall < 2 and drawn < 16 * (nA // (n * n) + 1):
            phi = np.mod(functionals.T @ rng.integers(0, p, size=functionals.shape[0]), p)
            added = acc.add_rows(_functional_block(phi, D0f, tab_ba, tab_db, n, Na, Nb, p))
            stall = stall + 1 if added == 0 else 0
            drawn += 1
        kernel = acc.kernel_basis()
        ok, _ = _certify_cocycles(mf, kernel, D0f, tab_ba, tab_db, f_rref, p, want_b=False)
        if ok:
            break
        if acc.rank == nA or drawn >= 16 * (nA // (n * n) + 1):
            raise AssertionError("certification failed with a saturated compression")
        stall = 0  # force more functionals

    pairs = None
    if with_basis:
        _, Bt_all = _certify_cocycles(mf, kernel, D0f, tab_ba, tab_db, f_rref, p, want_b=True)
        pairs = []
        for v, Bt in zip(kernel, Bt_all):
            At = v.reshape(Na, n, n)
            pairs.append((_from_tensor(mf.ring, a, At), _from_tensor(mf.ring, b, Bt)))
    return acc, kernel, pairs


def _functional_block(phi, D0f, tab_ba, tab_db, n, Na, Nb, p) -> np.ndarray:
    """Rows (one per matrix entry) of phi applied to d0 A d0, as a map of A.

    phi(d0 A d0) = sum over (s1, t, s2) of phi[m_s1 m_t m_s2] D0_s1 A_t D0_s2,
    so the block for A_t is sum_s1 kron(D0_s1, Q_s1^T) with
    Q_s1 = sum_s2 phi[...] D0_s2 (row-major vec convention).
    """
    blocks = []
    for t in range(Na):
        C = phi[tab_db[tab_ba[:, t]]]                # [s1, s2]
        Q = np.tensordot(C.astype(np.float64), D0f, axes=(1, 0))   # [s1, n, n]
        T = np.einsum("aik,alj->ijkl", D0f, Q, optimize=True)      # kron(D0_s1, Q_s1^T)
        blocks.append(np.mod(T.reshape(n * n, n * n), p))
    return np.concatenate(blocks, axis=1)


def _certify_cocycles(mf, kernel, D0f, tab_ba, tab_db, f_rref, p, want_b):
    """Recompute d0 A d0 for each kernel vector; check divisibility by f exactly.

    Returns (all_divisible, B tensors per vector if want_b).  Memory-bounded
    by chunking over kernel vectors.  Both product stages run as single
    large float64 matmuls with collision-free fancy-indexed scatters (for a
    fixed factor the monomial products are pairwise distinct); with the
    intermediate reduced mod p the accumulations stay below
    Nb * n * p^2 < 2^53, so everything is exact.
    """
    n = mf.size
    m = mf.ring.num_vars
    a, b = mf.deg_d1, mf.deg_d0
    d = a + b
    Na, Nb = tab_ba.shape[1], D0f.shape[0]
    Nd, Nq = len(_monos(m, d)), len(_monos(m, d + b))
    V = kernel.shape[0]
    if V == 0:
        return True, []
    piv = f_rref.pivots_aligned()
    Rrows = np.mod(f_rref.rows, p)
    Einv = None
    if want_b:
        # change of basis from the f-multiple RREF back to monomial coords:
        # q = coeffs @ D row-wise, so coeffs = q[piv] @ inv(D[:, piv])
        _, D = _f_times_forms_rref(mf)
        sq = ModularRref(Nb + Nb, p)
        sq.add_rows(np.concatenate([D[:, piv], np.eye(Nb, dtype=np.int64)], axis=1))
        Einv = sq.rows_int()[:, Nb:].astype(np.float64)
    D0T = np.ascontiguousarray(D0f.transpose(0, 2, 1))
    chunk = max(1, min(32, int(2.4e8 / max(1, Nq * n * n))))
    B_all = []
    ok = True
    for s0 in range(0, V, chunk):
        A = kernel[s0 : s0 + chunk].reshape(-1, Na, n, n)
        v = A.shape[0]
        # stage 1 via transposes: (d0_{s1} A_t)^T = A_t^T d0_{s1}^T
        AT = np.ascontiguousarray(A.transpose(0, 1, 3, 2)).astype(np.float64)
        C3T = np.zeros((v, Nd, n, n))
        for s1 in range(Nb):
            prods = (AT.reshape(-1, n) @ D0T[s1]).reshape(v, Na, n, n)
            C3T[:, tab_ba[s1]] += prods
        C3 = np.mod(np.ascontiguousarray(C3T.transpose(0, 1, 3, 2)), p)
        # stage 2: (d0 A) d0, right multiplications
        Q5 = np.zeros((v, Nq, n, n))
        for s2 in range(Nb):
            prods = (C3.reshape(-1, n) @ D0f[s2]).reshape(v, Nd, n, n)
            Q5[:, tab_db[:, s2]] += prods
        np.mod(Q5, p, out=Q5)
        Qm = Q5.transpose(0, 2, 3, 1).reshape(v * n * n, Nq)
        red = np.mod(Qm - Qm[:, piv] @ Rrows, p)
        if red.any():
            ok = False
            break
        if want_b:
            coords = np.mod(Qm[:, piv] @ Einv, p)       # [v*n*n, Nb]
            Bt = coords.reshape(v, n, n, Nb).transpose(0, 3, 1, 2).astype(np.int64)
            B_all.extend(Bt)
    return ok, B_all


# ---------------------------------------------------------------------------
# sphericality
# ---------------------------------------------------------------------------

@dataclass
class SphericalReport:
    hom_dim: int | None
    ext1_dim: int | None
    inferred: dict
    verdict: str
    assumed_cy3: bool = True
    note: str = ""

    def profile(self) -> tuple:
        return tuple(self.inferred.get(k) for k in range(4))


def spherical_check(mf: GradedMF, hom: MorphismSpace | None = None,
                    ext: MorphismSpace | None = None) -> SphericalReport:
    """Spherical-object verdict from Hom and Ext1, with CY3 duality bookkeeping.

    The verdict is "spherical" iff (hom_dim, ext1_dim) = (1, 0); Ext^2 and
    Ext^3 are filled in by Serre duality for the ambient CY3 category
    (Ext^3 = Hom^*, Ext^2 = (Ext^1)^*), which is the caller's assumption and
    is recorded as such.
    """
    hom = hom if hom is not None else hom_degree0(mf)
    ext = ext if ext is not None else ext1(mf)
    inferred = {0: hom.hom_dim, 1: ext.hom_dim, 2: ext.hom_dim, 3: hom.hom_dim}
    if hom.hom_dim == 1 and ext.hom_dim == 0:
        verdict = "spherical"
        note = ""
    else:
        verdict = "not-spherical"
        note = (
            "dimensions over F_p exceed the spherical profile; "
            "a non-generic restriction cannot be excluded"
        )
    return SphericalReport(
        hom_dim=hom.hom_dim,
        ext1_dim=ext.hom_dim,
        inferred=inferred,
        verdict=verdict,
        note=note,
    )


# ---------------------------------------------------------------------------
# factorization files (the user-supplied Spin12-style input)
# ---------------------------------------------------------------------------

class MfParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_mf_text(mf: GradedMF) -> str:
    """Serialize: header "n m p d degA degB", then d1 and d0 entries row-major.

    Each entry is one line of comma-separated polyring terms (``0`` for the
    zero entry); ``SELF`` replaces the d0 block when d0 = d1.
    """
    names = [f"x{i+1}" for i in range(mf.ring.num_vars)]

    def entry_line(e: SparsePoly) -> str:
        if e.is_zero():
            return "0"
        return ", ".join(e.to_text(names).splitlines())

    lines = [
        f"{mf.size} {mf.ring.num_vars} {mf.ring.char} "
        f"{mf.deg_d1 + mf.deg_d0} {mf.deg_d1} {mf.deg_d0}"
    ]
    for i in range(mf.size):
        for j in range(mf.size):
            lines.append(entry_line(mf.d1[i, j]))
    if mf.d0 == mf.d1:
        lines.append("SELF")
    else:
        for i in range(mf.size):
            for j in range(mf.size):
                lines.append(entry_line(mf.d0[i, j]))
    return "\n".join(lines) + "\n"


def parse_mf_text(text: str) -> GradedMF:
    """Parse the factorization file format; f is recovered from d0 @ d1 and verified."""
    lines = text.splitlines()
    stripped = [(i + 1, ln.strip()) for i, ln in enumerate(lines)]
    content = [(no, ln) for no, ln in stripped if ln]
    if not content:
        raise MfParseError(1, "empty file")
    no, header = content[0]
    parts = header.split()
    if len(parts) != 6:
        raise MfParseError(no, "header must be 'n m p d degA degB'")
    try:
        n, m, p, d, dega, degb = map(int, parts)
    except ValueError:
        raise MfParseError(no, "header fields must be integers")
    if n < 1 or m < 1:
        raise MfParseError(no, "matrix size and variable count must be positive")
    if dega + degb != d:
        raise MfParseError(no, f"degA + degB = {dega + degb} but d = {d}")
    try:
        ring = RingDescriptor(m, p)
    except ValueError as exc:
        raise MfParseError(no, str(exc))
    names = [f"x{i+1}" for i in range(m)]
    body = content[1:]
    need = n * n

    def parse_entry(no: int, line: str) -> SparsePoly:
        if line == "0":
            return SparsePoly.zero(ring)
        acc = SparsePoly.zero(ring)
        for term in line.split(","):
            try:
                acc = acc + SparsePoly.from_text(ring, term.strip(), names)
            except ValueError as exc:
                raise MfParseError(no, str(exc))
        return acc

    if len(body) < need + 1:
        raise MfParseError(content[-1][0], f"expected {need} d1 entries plus a d0 block")
    d1_entries = [parse_entry(no, ln) for no, ln in body[:need]]
    rest = body[need:]
    if rest[0][1] == "SELF":
        if len(rest) > 1:
            raise MfParseError(rest[1][0], "unexpected content after SELF")
        d0_entries = d1_entries
    else:
        if len(rest) != need:
            raise MfParseError(rest[0][0], f"expected {need} d0 entries or SELF")
        d0_entries = [parse_entry(no, ln) for no, ln in rest]
    d1 = PolyMatrix([d1_entries[i * n : (i + 1) * n] for i in range(n)])
    d0 = PolyMatrix([d0_entries[i * n : (i + 1) * n] for i in range(n)])
    f = (d0 @ d1)[0, 0]
    if f.is_zero():
        raise MfParseError(content[0][0], "d0 @ d1 has zero diagonal; not a factorization")
    try:
        mf = GradedMF.build(f, d1, d0)
    except MfVerifyError as exc:
        raise MfParseError(content[0][0], f"verification failed: {exc}")
    if mf.deg_d1 != dega or mf.deg_d0 != degb:
        raise MfParseError(content[0][0], "declared entry degrees do not match the matrices")
    return mf


def parse_mf_file(path) -> GradedMF:
    with open(path, encoding="utf-8") as fh:
        return parse_mf_text(fh.read())
