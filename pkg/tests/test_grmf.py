import numpy as np
import pytest

from cymf.grmf import (
    GradedMF,
    MfParseError,
    MfVerifyError,
    MorphismSpace,
    NoAdjugatePartnerError,
    adjugate_partner,
    ext1,
    format_mf_text,
    hom_degree0,
    mf_verify,
    parse_mf_text,
    spherical_check,
)
from cymf.polyring import PolyMatrix, RingDescriptor, SparsePoly
from oracles import brute_force_ext1, brute_force_hom0

R1_313 = RingDescriptor(1, 313)
R2_313 = RingDescriptor(2, 313)
R2_5 = RingDescriptor(2, 5)
R3_313 = RingDescriptor(3, 313)


def x(ring, i):
    return SparsePoly.variable(ring, i)


def mat(ring, rows):
    """Rows of ints or SparsePoly; ints become constants."""
    conv = lambda e: e if isinstance(e, SparsePoly) else SparsePoly.constant(ring, e)
    return PolyMatrix([[conv(e) for e in row] for row in rows])


def cube_mf(ring=R1_313):
    x1 = x(ring, 0)
    return GradedMF.build(x1 ** 3, mat(ring, [[x1]]), mat(ring, [[x1 * x1]]))


def twisted_mf(ring=R2_313):
    """Non-diagonal (1,2) factorization: d1 = [[x1,x2],[x2,x1]], d0 = x1 adj(d1),
    so d1 d0 = x1 (x1^2 - x2^2) I."""
    x1, x2 = x(ring, 0), x(ring, 1)
    f = x1 ** 3 - x1 * x2 * x2
    d1 = PolyMatrix([[x1, x2], [x2, x1]])
    d0 = PolyMatrix([[x1 * x1, -(x1 * x2)], [-(x1 * x2), x1 * x1]])
    return GradedMF.build(f, d1, d0)


def lines_mf(ring=R2_313):
    """diag factorization of a product of three distinct lines (needs cube
    roots of unity, present mod 313)."""
    p = ring.char
    w = next(w for w in range(2, p) if (w * w + w + 1) % p == 0)
    x1, x2 = x(ring, 0), x(ring, 1)
    l1, l2, l3 = x1 + x2, x1 - x2 * w, x1 - x2 * (w * w % p)
    f = l1 * l2 * l3
    zero = SparsePoly.zero(ring)
    d1 = PolyMatrix([[l1, zero], [zero, l2]])
    d0 = PolyMatrix([[l2 * l3, zero], [zero, l1 * l3]])
    return GradedMF.build(f, d1, d0)


def swap_mf(ring=R2_313):
    """Self-adjugate quartic example in the Spin12 shape: M @ M = (x1 x2)^2 I."""
    x1, x2 = x(ring, 0), x(ring, 1)
    zero = SparsePoly.zero(ring)
    M = PolyMatrix([[zero, x1 * x1], [x2 * x2, zero]])
    return GradedMF.build((x1 * x2) ** 2, M, M)


# ---- verification ----

def test_verify_1x1_cube():
    ring = R1_313
    x1 = x(ring, 0)
    assert mf_verify(x1 ** 3, mat(ring, [[x1]]), mat(ring, [[x1 * x1]])).ok


def test_verify_failure_pinpoints_entry():
    ring = RingDescriptor(2)  # over ZZ: exercises the SparsePoly route
    x1, x2 = x(ring, 0), x(ring, 1)
    res = mf_verify(x1 ** 3, mat(ring, [[x1]]), mat(ring, [[x1 * x2]]))
    assert not res.ok
    assert res.position == (0, 0)
    assert res.residual == x1 * x1 * x2 - x1 ** 3


def test_verify_failure_tensor_route_matches_poly_route():
    ring = R2_313
    x1, x2 = x(ring, 0), x(ring, 1)
    res = mf_verify(x1 ** 3, mat(ring, [[x1]]), mat(ring, [[x1 * x2]]))
    assert not res.ok and res.position == (0, 0)
    assert res.residual == x1 * x1 * x2 - x1 ** 3


def test_build_rejects_bad_degrees():
    ring = R1_313
    x1 = x(ring, 0)
    with pytest.raises(MfVerifyError):
        GradedMF.build(x1 ** 3, mat(ring, [[x1]]), mat(ring, [[x1]]))
    with pytest.raises(MfVerifyError):
        GradedMF.build(SparsePoly.zero(ring), mat(ring, [[x1]]), mat(ring, [[x1]]))


def test_direct_sum_is_verified():
    mf = cube_mf()
    mm = mf.direct_sum(mf)
    assert mm.size == 2
    assert mm.verify().ok


# ---- adjugate partner ----

def test_adjugate_1x1():
    ring = R1_313
    x1 = x(ring, 0)
    M = mat(ring, [[x1]])
    N, rep = adjugate_partner(M, x1 ** 3)
    assert N[0, 0] == x1 * x1
    assert rep.consistent and rep.kernel_dim == 0


def test_adjugate_2x2_classical():
    ring = R3_313
    x1, x2, x3 = (x(ring, i) for i in range(3))
    M = PolyMatrix([[x1, x2], [x3, x1]])
    f = x1 ** 3 - x1 * x2 * x3
    N, rep = adjugate_partner(M, f)
    # N must be x1 * adj(M) by uniqueness; verify by direct multiplication
    assert (M @ N)[0, 0] == f
    assert N[0, 0] == x1 * x1
    assert N[0, 1] == -(x1 * x2)
    assert mf_verify(f, M, N).ok


def test_adjugate_inconsistent_system():
    ring = R2_313
    x1 = x(ring, 0)
    zero = SparsePoly.zero(ring)
    M = PolyMatrix([[x1, zero], [zero, zero]])  # singular: no partner for any cubic
    with pytest.raises(NoAdjugatePartnerError):
        adjugate_partner(M, x1 ** 3)


# ---- hom and ext on toy factorizations ----

def test_identity_is_always_a_degree0_morphism():
    for mf in (cube_mf(), twisted_mf(), swap_mf()):
        space = hom_degree0(mf)
        assert space.hom_dim >= 1


def test_hom_of_direct_sum_is_at_least_four():
    mf = twisted_mf().direct_sum(twisted_mf())
    assert hom_degree0(mf).hom_dim >= 4


def test_hom_basis_of_1x1_cube():
    space = hom_degree0(cube_mf(), with_basis=True)
    assert space.hom_dim == 1
    A, B = space.basis[0]
    assert A[0, 0] == B[0, 0]


def test_ext1_of_1x1_cube_vanishes():
    # every linear cocycle a*x1 is the homotopy image of constants
    space = ext1(cube_mf())
    assert space.cocycle_dim == 1
    assert space.coboundary_dim == 1
    assert space.hom_dim == 0


def test_morphism_space_invariant():
    with pytest.raises(ValueError):
        MorphismSpace(degree=1, cocycle_dim=1, coboundary_dim=2, hom_dim=-1)


# ---- oracle suite: exhaustive small factorizations over F_5 and F_313 ----

def _toy_factorizations(p):
    ring1 = RingDescriptor(1, p)
    ring2 = RingDescriptor(2, p)
    x1 = x(ring1, 0)
    out = []
    # 1x1, one variable, all entry-degree splits of x1^d
    for a in (1, 2):
        d1 = mat(ring1, [[x1 ** a]])
        d0 = mat(ring1, [[x1 ** (3 - a)]])
        out.append(GradedMF.build(x1 ** 3, d1, d0))
    # 2x2 over two variables: symmetric pencil and a monomial diagonal
    y1, y2 = x(ring2, 0), x(ring2, 1)
    f = y1 ** 3 - y1 * y2 * y2
    d1 = PolyMatrix([[y1, y2], [y2, y1]])
    d0 = PolyMatrix([[y1 * y1, -(y1 * y2)], [-(y1 * y2), y1 * y1]])
    out.append(GradedMF.build(f, d1, d0))
    z = SparsePoly.zero(ring2)
    d1 = PolyMatrix([[y1, z], [z, y2]])
    d0 = PolyMatrix([[y1 * y2, z], [z, y1 * y1]])
    out.append(GradedMF.build(y1 * y1 * y2, d1, d0))
    # self-adjugate quartic in the Spin12 shape
    M = PolyMatrix([[z, y1 * y1], [y2 * y2, z]])
    out.append(GradedMF.build((y1 * y2) ** 2, M, M))
    # a quartic with distinct entry degrees: (x1^3, x1) factorization
    out.append(GradedMF.build(x1 ** 4, mat(ring1, [[x1 ** 3]]), mat(ring1, [[x1]])))
    return out


@pytest.mark.parametrize("p", [5, 313])
def test_hom_and_ext_agree_with_brute_force(p):
    for mf in _toy_factorizations(p):
        got_hom = hom_degree0(mf).hom_dim
        want_hom = brute_force_hom0(mf.d1, mf.d0, mf.deg_d1, mf.deg_d0)
        assert got_hom == want_hom, f"hom mismatch for size {mf.size} over F_{p}"
        got = ext1(mf)
        want = brute_force_ext1(mf.d1, mf.d0, mf.deg_d1, mf.deg_d0)
        assert (got.cocycle_dim, got.coboundary_dim, got.hom_dim) == want, (
            f"ext mismatch for size {mf.size} over F_{p}"
        )


def test_certified_route_matches_direct_route():
    # force the certified path on a small case by lowering the direct limit
    import cymf.grmf as grmf_mod

    mf = twisted_mf()
    direct = ext1(mf)
    old = grmf_mod._DIRECT_LIMIT
    grmf_mod._DIRECT_LIMIT = 0
    try:
        certified = ext1(mf)
    finally:
        grmf_mod._DIRECT_LIMIT = old
    assert (
        certified.cocycle_dim,
        certified.coboundary_dim,
        certified.hom_dim,
    ) == (direct.cocycle_dim, direct.coboundary_dim, direct.hom_dim)


def test_ext1_basis_pairs_satisfy_both_squares():
    mf = twisted_mf()
    space = ext1(mf, with_basis=True)
    assert space.basis is not None and len(space.basis) == space.cocycle_dim
    for A, B in space.basis:
        assert ((B @ mf.d1) - (mf.d0 @ A)).is_zero()
        assert ((A @ mf.d0) - (mf.d1 @ B)).is_zero()


def test_ext1_certified_basis_pairs_satisfy_both_squares():
    import cymf.grmf as grmf_mod

    mf = twisted_mf()
    old = grmf_mod._DIRECT_LIMIT
    grmf_mod._DIRECT_LIMIT = 0
    try:
        space = ext1(mf, with_basis=True)
    finally:
        grmf_mod._DIRECT_LIMIT = old
    for A, B in space.basis:
        assert ((B @ mf.d1) - (mf.d0 @ A)).is_zero()
        assert ((A @ mf.d0) - (mf.d1 @ B)).is_zero()


# ---- sphericality bookkeeping ----

def test_spherical_check_profile():
    mf = cube_mf()
    rep = spherical_check(mf)
    assert rep.hom_dim == 1 and rep.ext1_dim == 0
    assert rep.verdict == "spherical"
    assert rep.profile() == (1, 0, 0, 1)
    assert rep.inferred[3] == rep.hom_dim and rep.inferred[2] == rep.ext1_dim


def test_spherical_check_rejects_direct_sum():
    mm = twisted_mf().direct_sum(twisted_mf())
    rep = spherical_check(mm)
    assert rep.verdict == "not-spherical"
    assert rep.hom_dim >= 4


# ---- file format ----

def test_mf_text_round_trip():
    mf = twisted_mf()
    text = format_mf_text(mf)
    again = parse_mf_text(text)
    assert again.d1 == mf.d1 and again.d0 == mf.d0 and again.f == mf.f


def test_mf_text_self_round_trip():
    mf = swap_mf()
    text = format_mf_text(mf)
    assert "SELF" in text
    again = parse_mf_text(text)
    assert again.d0 == again.d1 == mf.d1
    assert again.f == mf.f


def test_parse_errors_carry_line_numbers():
    with pytest.raises(MfParseError) as exc:
        parse_mf_text("1 1 313 3 1\n1 x1^1\n1 x1^2\n")
    assert "header" in str(exc.value)
    with pytest.raises(MfParseError) as exc:
        parse_mf_text("1 1 313 3 1 2\n1 q9^1\n1 x1^2\n")
    assert "line 2" in str(exc.value)
    with pytest.raises(MfParseError):
        parse_mf_text("")
    bad = (
        "2 1 313 3 1 2\n"
        "1 x1^1\n0\n0\n1 x1^1\n"
        "1 x1^2\n1 x1^2\n0\n1 x1^2\n"
    )
    with pytest.raises(MfParseError) as exc:  # off-diagonal residue
        parse_mf_text(bad)
    assert "verification failed" in str(exc.value)
