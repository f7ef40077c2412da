"""Complexified octonions, the 27-dimensional Jordan algebra and its cubic.

The octonion basis is ``1, i, j, k, l, m, n, o`` obtained by Cayley-Dickson
doubling of the quaternions: ``l`` is the doubling unit, ``m = i*l``,
``n = j*l``, ``o = k*l``, with product ``(a, b)(c, d) = (ac - d̄b, da + bc̄)``.
With this orientation the determinant of the generic Hermitian 3x3 octonion
matrix (coordinates y1..y27 assigned row by row to sigma1, sigma2, sigma3,
lambda1, lambda2, lambda3) reproduces the 89-term integer cubic stored in
``data/det_e6.txt`` term for term; that golden file is the ground truth the
construction is tested against.

The determinant comes from the Jordan algebra itself: with the symmetrized
product A∘B = (AB + BA)/2 the degree-3 Newton identity gives
``6 det(A) = t1^3 - 3 t1 t2 + 2 t3`` where ``t_k = ReTr(A^k)`` (note
``ReTr(A∘(A∘A)) = ReTr(A(AA))`` since the trace form is symmetric).  The
classical closed form ``l1 l2 l3 - Σ l_i N(σ) + 2 Re(σ1 σ3 σ2)`` is kept as
an independent cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .polyring import PolyMatrix, RingDescriptor, SparsePoly

__all__ = [
    "OCT_BASIS",
    "OCT_TABLE",
    "Octonion",
    "JordanElement",
    "generic_jordan_element",
    "jordan_det",
    "jordan_det_closed_form",
    "hessian",
    "RestrictionSpec",
    "RankDeficientError",
    "restrict",
]

OCT_BASIS = ("1", "i", "j", "k", "l", "m", "n", "o")

_QUAT = (
    ((0, 1), (1, 1), (2, 1), (3, 1)),
    ((1, 1), (0, -1), (3, 1), (2, -1)),
    ((2, 1), (3, -1), (0, -1), (1, 1)),
    ((3, 1), (2, 1), (1, -1), (0, -1)),
)


def _build_table():
    table = [[None] * 8 for _ in range(8)]
    for s in range(8):
        for t in range(8):
            a, b = (s, None) if s < 4 else (None, s - 4)
            c, d = (t, None) if t < 4 else (None, t - 4)
            first: dict[int, int] = {}
            second: dict[int, int] = {}

            def put(dst, idx, sign):
                dst[idx] = dst.get(idx, 0) + sign

            if a is not None and c is not None:
                idx, sg = _QUAT[a][c]
                put(first, idx, sg)
            if d is not None and b is not None:  # -conj(d) * b
                idx, sg = _QUAT[d][b]
                put(first, idx, -sg if d == 0 else sg)
            if d is not None and a is not None:  # d * a
                idx, sg = _QUAT[d][a]
                put(second, idx, sg)
            if b is not None and c is not None:  # b * conj(c)
                idx, sg = _QUAT[b][c]
                put(second, idx, sg if c == 0 else -sg)
            entries = [(idx, sg) for idx, sg in first.items() if sg]
            entries += [(idx + 4, sg) for idx, sg in second.items() if sg]
            assert len(entries) == 1
            table[s][t] = entries[0]
    return tuple(tuple(row) for row in table)


#: basis-times-basis structure constants: OCT_TABLE[s][t] = (index, sign)
OCT_TABLE = _build_table()


class Octonion:
    """Octonion with coordinates in any commutative ring (ints or SparsePoly)."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(coords)
        if len(coords) != 8:
            raise ValueError("an octonion has 8 coordinates")
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("Octonion is immutable")

    @classmethod
    def scalar(cls, c):
        zero = c - c
        return cls((c,) + (zero,) * 7)

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self) -> "Octonion":
        return Octonion(-a for a in self.coords)

    def __mul__(self, other: "Octonion") -> "Octonion":
        zero = self.coords[0] - self.coords[0]
        out = [zero] * 8
        for s, cs in enumerate(self.coords):
            if isinstance(cs, SparsePoly) and cs.is_zero():
                continue
            for t, ct in enumerate(other.coords):
                if isinstance(ct, SparsePoly) and ct.is_zero():
                    continue
                idx, sign = OCT_TABLE[s][t]
                term = cs * ct
                out[idx] = out[idx] + (term if sign == 1 else -term)
        return Octonion(out)

    def conjugate(self) -> "Octonion":
        return Octonion((self.coords[0],) + tuple(-c for c in self.coords[1:]))

    def real_part(self):
        return self.coords[0]

    def norm(self):
        """N(a) = sum of squared coordinates; multiplicative: N(ab) = N(a)N(b)."""
        acc = self.coords[0] * self.coords[0]
        for c in self.coords[1:]:
            acc = acc + c * c
        return acc

    def __eq__(self, other):
        return isinstance(other, Octonion) and self.coords == other.coords

    __hash__ = None


@dataclass(frozen=True)
class JordanElement:
    """Hermitian 3x3 octonion matrix: diagonal scalars and three octonions.

    Layout matches the generic element:
    ``[[l1, s1, conj(s2)], [conj(s1), l2, s3], [s2, conj(s3), l3]]``.
    """

    diag: tuple
    off: tuple  # (sigma1, sigma2, sigma3)

    def matrix(self) -> list[list[Octonion]]:
        l1, l2, l3 = (Octonion.scalar(c) for c in self.diag)
        s1, s2, s3 = self.off
        return [
            [l1, s1, s2.conjugate()],
            [s1.conjugate(), l2, s3],
            [s2, s3.conjugate(), l3],
        ]


#: the ambient 27-variable integer ring for the generic element
RING27 = RingDescriptor(27)

#: variable names used in the golden file and all reports
Y_NAMES = tuple(f"y{i+1}" for i in range(27))


def generic_jordan_element(ring: RingDescriptor = RING27) -> JordanElement:
    """The generic element: sigma1 = (y1..y8), sigma2 = (y9..y16), sigma3 = (y17..y24),
    lambda1 = y25, lambda2 = y26, lambda3 = y27."""
    if ring.num_vars != 27:
        raise ValueError("the generic element needs a 27-variable ring")
    v = [SparsePoly.variable(ring, i) for i in range(27)]
    return JordanElement(
        diag=(v[24], v[25], v[26]),
        off=(
            Octonion(v[0:8]),
            Octonion(v[8:16]),
            Octonion(v[16:24]),
        ),
    )


def _mat_mul(X, Y):
    return [
        [
            (X[i][0] * Y[0][j]) + (X[i][1] * Y[1][j]) + (X[i][2] * Y[2][j])
            for j in range(3)
        ]
        for i in range(3)
    ]


def _re_trace(X):
    return X[0][0].real_part() + X[1][1].real_part() + X[2][2].real_part()


def jordan_det(elem: JordanElement | None = None) -> SparsePoly:
    """Determinant of a Jordan-algebra element via the degree-3 Newton identity.

    With no argument, computes the determinant of the generic element over ZZ,
    which is the 27-variable E6-invariant cubic.  Needs 6 invertible, so the
    coefficient ring must have characteristic 0 or p > 3.
    """
    if elem is None:
        elem = generic_jordan_element()
    A = elem.matrix()
    t1 = elem.diag[0] + elem.diag[1] + elem.diag[2]
    A2 = _mat_mul(A, A)
    t2 = _re_trace(A2)
    t3 = _re_trace(_mat_mul(A, A2))
    six_det = t1 * t1 * t1 - (t1 * t2) * 3 + t3 * 2
    if isinstance(six_det, SparsePoly):
        if six_det.ring.char == 3:
            raise ValueError("jordan_det is undefined in characteristic 3")
        return six_det.exact_div_scalar(6)
    if six_det % 6:
        raise ValueError("trace combination not divisible by 6")
    return six_det // 6


def jordan_det_closed_form(elem: JordanElement | None = None) -> SparsePoly:
    """Classical closed form l1 l2 l3 - l1 N(s3) - l2 N(s2) - l3 N(s1) + 2 Re(s1 s3 s2).

    Independent cross-check of :func:`jordan_det`.
    """
    if elem is None:
        elem = generic_jordan_element()
    l1, l2, l3 = elem.diag
    s1, s2, s3 = elem.off
    out = l1 * l2 * l3
    out = out - l1 * s3.norm()
    out = out - l2 * s2.norm()
    out = out - l3 * s1.norm()
    out = out + ((s1 * s3) * s2).real_part() * 2
    return out


def hessian(f: SparsePoly) -> PolyMatrix:
    """Hessian matrix of a homogeneous cubic; symmetric with linear entries."""
    if not f.is_homogeneous(3):
        raise ValueError("hessian expects a homogeneous cubic")
    n = f.ring.num_vars
    firsts = [f.diff(k) for k in range(n)]
    rows = []
    for k in range(n):
        rows.append([firsts[k].diff(i) for i in range(n)])
    return PolyMatrix(rows)


class RankDeficientError(ValueError):
    """The restriction matrix K does not have full column rank."""


def _rank_over_q(K: np.ndarray) -> int:
    """Exact rank of an integer matrix over the rationals (fraction-free)."""
    from fractions import Fraction

    m = [[Fraction(int(x)) for x in row] for row in K]
    nrows, ncols = len(m), len(m[0])
    r = 0
    for c in range(ncols):
        sel = next((i for i in range(r, nrows) if m[i][c]), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == min(nrows, ncols):
            break
    return r


@dataclass(frozen=True)
class RestrictionSpec:
    """Reproducible restriction of the 27 y-variables to 9 x-variables.

    ``K`` is a 27x9 integer matrix with entries in [-height, height]; the
    substitution is y_j -> (K @ x)_j over F_prime.  ``from_seed`` draws K
    from numpy's seeded PCG64 generator (a documented, stable 64-bit PRNG)
    and resamples until K has rank 9 over Q and over F_prime, so runs are
    exactly reproducible from (prime, seed, height) alone.
    """

    prime: int
    seed: int
    height: int
    K: tuple  # tuple of 27 tuples of ints

    def __post_init__(self):
        K = np.asarray(self.K, dtype=np.int64)
        if K.ndim != 2 or K.shape[1] > K.shape[0]:
            raise ValueError("K must be tall: one row per source variable")
        if np.abs(K).max() > self.height:
            raise ValueError("K entries exceed the declared height")

    @classmethod
    def from_seed(cls, prime: int, seed: int, height: int = 30,
                  shape: tuple[int, int] = (27, 9)) -> "RestrictionSpec":
        rng = np.random.default_rng(seed)
        for _ in range(64):
            K = rng.integers(-height, height, size=shape, endpoint=True)
            if _rank_over_q(K) == shape[1] and _rank_mod_p(K, prime) == shape[1]:
                return cls(prime=prime, seed=seed, height=height,
                           K=tuple(tuple(int(x) for x in row) for row in K))
        raise RankDeficientError(
            f"could not draw a rank-{shape[1]} restriction from seed {seed}"
        )

    def K_array(self) -> np.ndarray:
        return np.asarray(self.K, dtype=np.int64)

    def images(self) -> list[SparsePoly]:
        """The substitution images y_j -> sum_i K[j,i] x_i over F_prime."""
        nfrom, nto = self.K_array().shape
        target = RingDescriptor(nto, self.prime)
        out = []
        for j in range(nfrom):
            terms = {}
            for i in range(nto):
                c = self.K[j][i] % self.prime
                if c:
                    e = bytearray(nto)
                    e[i] = 1
                    terms[bytes(e)] = c
            out.append(SparsePoly(target, terms))
        return out

    def to_json(self) -> str:
        return json.dumps(
            {"prime": self.prime, "seed": self.seed, "height": self.height,
             "K": [list(r) for r in self.K]},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RestrictionSpec":
        d = json.loads(text)
        return cls(prime=d["prime"], seed=d["seed"], height=d["height"],
                   K=tuple(tuple(int(x) for x in row) for row in d["K"]))


def _rank_mod_p(K: np.ndarray, p: int) -> int:
    from .linalg_ff import dense_rref

    return dense_rref(np.mod(K, p), p).rank


def restrict(target, spec: RestrictionSpec):
    """Substitute y_j -> (K x)_j into a 27-variable polynomial or matrix.

    The input may be over ZZ (it is reduced mod p first) or already over
    F_prime; the result lives over F_prime in ``K.shape[1]`` variables.
    Homogeneity is preserved because the images are linear forms.
    """
    K = spec.K_array()
    if _rank_over_q(K) != K.shape[1] or _rank_mod_p(K, spec.prime) != K.shape[1]:
        raise RankDeficientError("restriction matrix is rank deficient")
    images = spec.images()

    def sub_poly(p: SparsePoly) -> SparsePoly:
        if p.ring.num_vars != K.shape[0]:
            raise ValueError("polynomial variable count does not match K")
        if p.ring.char == 0:
            p = p.reduce_mod(spec.prime)
        return p.substitute(images)

    if isinstance(target, SparsePoly):
        return sub_poly(target)
    if isinstance(target, PolyMatrix):
        return target.map(sub_poly)
    raise TypeError("restrict expects a SparsePoly or PolyMatrix")
