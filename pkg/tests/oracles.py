"""Independent brute-force oracles used to cross-check the production code.

Everything here is deliberately naive: plain-Python Gaussian elimination over
F_p, and morphism spaces of matrix factorizations computed by enumerating a
basis of the unknowns and building the full two-square constraint matrix with
SparsePoly arithmetic.  None of it shares code with the fast paths it checks.
"""

from __future__ import annotations

from cymf.polyring import PolyMatrix, SparsePoly, coeff_vector, monomials_of_degree


def naive_rref(mat: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Plain Gaussian elimination to reduced row echelon form over F_p."""
    m = [[x % p for x in row] for row in mat]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, nrows):
            if m[i][c] % p:
                sel = i
                break
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m[:r], pivots


def naive_rank(mat: list[list[int]], p: int) -> int:
    if not mat:
        return 0
    return len(naive_rref(mat, p)[1])


def naive_kernel(mat: list[list[int]], p: int) -> list[list[int]]:
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    R, pivots = naive_rref(mat, p)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(R, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# brute-force morphism spaces for matrix factorizations
# ---------------------------------------------------------------------------

def _unit_matrix(ring, n, i, j, entry):
    zero = SparsePoly.zero(ring)
    return PolyMatrix(
        [[entry if (a, b) == (i, j) else zero for b in range(n)] for a in range(n)]
    )


def _constant_basis(ring, n):
    one = SparsePoly.constant(ring, 1)
    return [
        _unit_matrix(ring, n, i, j, one) for i in range(n) for j in range(n)
    ]


def _graded_basis(ring, n, degree):
    out = []
    for i in range(n):
        for j in range(n):
            for mono in monomials_of_degree(ring.num_vars, degree):
                out.append(_unit_matrix(ring, n, i, j, SparsePoly(ring, {mono: 1})))
    return out


def _flatten(polymat: PolyMatrix, degree: int) -> list[int]:
    out = []
    for i in range(polymat.nrows):
        for j in range(polymat.ncols):
            out.extend(coeff_vector(polymat[i, j], degree))
    return out


def brute_force_hom0(d1: PolyMatrix, d0: PolyMatrix, deg1: int, deg0: int) -> int:
    """dim of constant pairs (A, B) with B d1 = d1 A and A d0 = d0 B."""
    ring = d1.ring
    p = ring.char
    n = d1.nrows
    cols = []
    for E in _constant_basis(ring, n):
        # vary A = E with B = 0
        c1 = (d1 @ E).scale(-1)
        c2 = E @ d0
        cols.append(_flatten(c1, deg1) + _flatten(c2, deg0))
    for E in _constant_basis(ring, n):
        # vary B = E with A = 0
        c1 = E @ d1
        c2 = (d0 @ E).scale(-1)
        cols.append(_flatten(c1, deg1) + _flatten(c2, deg0))
    mat = [list(row) for row in zip(*cols)]
    return len(naive_kernel(mat, p))


def brute_force_ext1(d1: PolyMatrix, d0: PolyMatrix, deg1: int, deg0: int):
    """(cocycle_dim, coboundary_dim, ext1_dim) for degree-1 morphisms.

    Cocycles: pairs (A, B) with entry degrees (deg1, deg0) satisfying both
    squares B d1 = d0 A and A d0 = d1 B.  Coboundaries: images of constant
    (S, T) under A = d1 T + S d1, B = T d0 + d0 S.
    """
    ring = d1.ring
    p = ring.char
    n = d1.nrows
    d = deg1 + deg0
    cols = []
    for E in _graded_basis(ring, n, deg1):
        c1 = (d0 @ E).scale(-1)
        c2 = E @ d0
        cols.append(_flatten(c1, d) + _flatten(c2, d))
    for E in _graded_basis(ring, n, deg0):
        c1 = E @ d1
        c2 = (d1 @ E).scale(-1)
        cols.append(_flatten(c1, d) + _flatten(c2, d))
    mat = [list(row) for row in zip(*cols)]
    cocycle_dim = len(naive_kernel(mat, p))

    img_rows = []
    for S in _constant_basis(ring, n):
        img_rows.append(_flatten(S @ d1, deg1) + _flatten(d0 @ S, deg0))
    for T in _constant_basis(ring, n):
        img_rows.append(_flatten(d1 @ T, deg1) + _flatten(T @ d0, deg0))
    coboundary_dim = naive_rank(img_rows, p)
    return cocycle_dim, coboundary_dim, cocycle_dim - coboundary_dim
