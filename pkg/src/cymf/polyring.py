"""Sparse multivariate polynomial arithmetic over ZZ and prime fields F_p.

Polynomials are kept exact: integer coefficients over ZZ, canonical residues
in [0, p) over F_p.  A monomial is a packed exponent vector (``bytes`` of
length ``num_vars``, one byte per exponent), which keeps term maps compact and
hashable.  The canonical monomial order is graded lexicographic with variable
1 highest: compare total degree first, then the exponent vector; polynomials
print, serialize and vectorize with terms in descending canonical order.

Everything here is immutable after construction and all operations are pure,
so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Sequence

__all__ = [
    "RingMismatchError",
    "HomogeneityError",
    "RingDescriptor",
    "SparsePoly",
    "PolyMatrix",
    "monomials_of_degree",
    "coeff_vector",
    "poly_from_coeff_vector",
]


class RingMismatchError(ValueError):
    """Operands live in different rings (variable count or characteristic)."""


class HomogeneityError(ValueError):
    """A polynomial is not homogeneous of the degree an operation requires."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingDescriptor:
    """Coefficient domain and variable count: char 0 means ZZ, else F_p.

    The characteristic, when nonzero, must be an odd prime (the finite-field
    linear algebra and the restriction pipeline both assume p odd).
    """

    num_vars: int
    char: int = 0

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        if self.char != 0:
            if self.char == 2 or not _is_prime(self.char):
                raise ValueError(f"char must be 0 or an odd prime, got {self.char}")

    def reduce(self, c: int) -> int:
        return c % self.char if self.char else c


def _mono_mul(a: bytes, b: bytes) -> bytes:
    return bytes(x + y for x, y in zip(a, b))


def _mono_degree(m: bytes) -> int:
    return sum(m)


def _mono_sort_key(m: bytes):
    # graded lex, variable 1 highest; used descending
    return (sum(m), m)


def monomials_of_degree(num_vars: int, degree: int) -> list[bytes]:
    """All packed monomials of the given total degree, descending canonical order."""
    if num_vars == 0:
        return [b""] if degree == 0 else []
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], rem: int, k: int) -> None:
        if k == num_vars - 1:
            out.append(prefix + (rem,))
            return
        for e in range(rem, -1, -1):
            rec(prefix + (e,), rem - e, k + 1)

    rec((), degree, 0)
    out.sort(reverse=True)
    return [bytes(t) for t in out]


class SparsePoly:
    """Sparse polynomial: map from packed monomial to nonzero coefficient."""

    __slots__ = ("ring", "_terms")

    def __init__(self, ring: RingDescriptor, terms: dict[bytes, int] | None = None):
        clean: dict[bytes, int] = {}
        if terms:
            for m, c in terms.items():
                if len(m) != ring.num_vars:
                    raise ValueError("monomial length does not match ring")
                c = ring.reduce(c)
                if c:
                    clean[m] = c
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("SparsePoly is immutable")

    # ---- constructors ----

    @classmethod
    def zero(cls, ring: RingDescriptor) -> "SparsePoly":
        return cls(ring, {})

    @classmethod
    def constant(cls, ring: RingDescriptor, c: int) -> "SparsePoly":
        return cls(ring, {bytes(ring.num_vars): c})

    @classmethod
    def variable(cls, ring: RingDescriptor, i: int) -> "SparsePoly":
        if not 0 <= i < ring.num_vars:
            raise IndexError(f"variable index {i} out of range")
        e = bytearray(ring.num_vars)
        e[i] = 1
        return cls(ring, {bytes(e): 1})

    @classmethod
    def from_terms(cls, ring: RingDescriptor, terms: Iterable[tuple[Sequence[int], int]]) -> "SparsePoly":
        acc: dict[bytes, int] = {}
        for exps, c in terms:
            m = bytes(exps)
            acc[m] = acc.get(m, 0) + c
        return cls(ring, acc)

    # ---- inspection ----

    def terms(self) -> Iterator[tuple[tuple[int, ...], int]]:
        """Yield (exponent tuple, coefficient) in descending canonical order."""
        for m in sorted(self._terms, key=_mono_sort_key, reverse=True):
            yield tuple(m), self._terms[m]

    def num_terms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; querying the zero polynomial is an error, not a sentinel."""
        if not self._terms:
            raise ValueError("degree of the zero polynomial is undefined")
        return max(_mono_degree(m) for m in self._terms)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        if not self._terms:
            return True
        degs = {_mono_degree(m) for m in self._terms}
        if len(degs) > 1:
            return False
        return degree is None or degs == {degree}

    def coefficient(self, exps: Sequence[int]) -> int:
        return self._terms.get(bytes(exps), 0)

    def _check_ring(self, other: "SparsePoly") -> None:
        if self.ring != other.ring:
            raise RingMismatchError(f"ring mismatch: {self.ring} vs {other.ring}")

    # ---- arithmetic ----

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check_ring(other)
        out = dict(self._terms)
        red = self.ring.reduce
        for m, c in other._terms.items():
            v = red(out.get(m, 0) + c)
            if v:
                out[m] = v
            elif m in out:
                del out[m]
        p = SparsePoly.__new__(SparsePoly)
        object.__setattr__(p, "ring", self.ring)
        object.__setattr__(p, "_terms", out)
        return p

    def __neg__(self) -> "SparsePoly":
        red = self.ring.reduce
        p = SparsePoly.__new__(SparsePoly)
        object.__setattr__(p, "ring", self.ring)
        object.__setattr__(p, "_terms", {m: red(-c) for m, c in self._terms.items()})
        return p

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check_ring(other)
        red = self.ring.reduce
        out: dict[bytes, int] = {}
        a, b = self._terms, other._terms
        if len(a) > len(b):
            a, b = b, a
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = _mono_mul(m1, m2)
                v = out.get(m, 0) + c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        if self.ring.char:
            out = {m: c % self.ring.char for m, c in out.items()}
            out = {m: c for m, c in out.items() if c}
        p = SparsePoly.__new__(SparsePoly)
        object.__setattr__(p, "ring", self.ring)
        object.__setattr__(p, "_terms", out)
        return p

    __rmul__ = __mul__

    def scale(self, c: int) -> "SparsePoly":
        c = self.ring.reduce(c)
        if c == 0:
            return SparsePoly.zero(self.ring)
        red = self.ring.reduce
        return SparsePoly(self.ring, {m: red(v * c) for m, v in self._terms.items()})

    def __pow__(self, n: int) -> "SparsePoly":
        if n < 0:
            raise ValueError("negative powers are not defined")
        result = SparsePoly.constant(self.ring, 1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparsePoly)
            and self.ring == other.ring
            and self._terms == other._terms
        )

    __hash__ = None  # mutable-dict backed; equality without hashing

    def exact_div_scalar(self, c: int) -> "SparsePoly":
        """Divide every coefficient by c, requiring exact divisibility over ZZ."""
        if self.ring.char:
            return self.scale(pow(c % self.ring.char, -1, self.ring.char))
        out = {}
        for m, v in self._terms.items():
            if v % c:
                raise ValueError(f"coefficient {v} not divisible by {c}")
            out[m] = v // c
        return SparsePoly(self.ring, out)

    # ---- calculus and substitution ----

    def diff(self, var_index: int) -> "SparsePoly":
        """Formal partial derivative with respect to one variable."""
        if not 0 <= var_index < self.ring.num_vars:
            raise IndexError(f"variable index {var_index} out of range")
        out: dict[bytes, int] = {}
        red = self.ring.reduce
        for m, c in self._terms.items():
            e = m[var_index]
            if e == 0:
                continue
            d = bytearray(m)
            d[var_index] = e - 1
            v = red(c * e)
            if v:
                out[bytes(d)] = v
        return SparsePoly(self.ring, out)

    def substitute(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        """Ring morphism sending variable i to images[i] (one image per variable)."""
        if len(images) != self.ring.num_vars:
            raise ValueError(
                f"expected {self.ring.num_vars} images, got {len(images)}"
            )
        if not images:
            # constant ring: reinterpret coefficients alone
            raise ValueError("substitution needs a target ring; use reduce_mod instead")
        target = images[0].ring
        for im in images:
            if im.ring != target:
                raise RingMismatchError("images live in different rings")
        if self.ring.char and target.char != self.ring.char:
            raise RingMismatchError("cannot change characteristic by substitution")
        result = SparsePoly.zero(target)
        for m, c in self._terms.items():
            term = SparsePoly.constant(target, c)
            for i, e in enumerate(m):
                for _ in range(e):
                    term = term * images[i]
            result = result + term
        return result

    def reduce_mod(self, p: int) -> "SparsePoly":
        """Reduce a ZZ polynomial into F_p (same variables)."""
        if self.ring.char:
            raise ValueError("polynomial is already over a finite field")
        return SparsePoly(RingDescriptor(self.ring.num_vars, p), dict(self._terms))

    def evaluate(self, point: Sequence[int]) -> int:
        if len(point) != self.ring.num_vars:
            raise ValueError("point length does not match ring")
        total = 0
        for m, c in self._terms.items():
            v = c
            for x, e in zip(point, m):
                v *= x**e
            total += v
        return self.ring.reduce(total)

    # ---- text form ----

    def to_text(self, names: Sequence[str] | None = None) -> str:
        """Canonical text form: one term per line, ``coeff v^e v^e ...``."""
        if names is None:
            names = [f"x{i+1}" for i in range(self.ring.num_vars)]
        lines = []
        for exps, c in self.terms():
            parts = [str(c)]
            parts.extend(
                f"{names[i]}^{e}" for i, e in enumerate(exps) if e
            )
            lines.append(" ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self) -> str:
        if self.is_zero():
            return "SparsePoly(0)"
        body = " + ".join(
            f"{c}*{'*'.join(f'x{i+1}^{e}' for i, e in enumerate(m) if e) or '1'}"
            for m, c in list(self.terms())[:6]
        )
        more = "" if self.num_terms() <= 6 else f" + ... ({self.num_terms()} terms)"
        return f"SparsePoly({body}{more})"

    @classmethod
    def from_text(cls, ring: RingDescriptor, text: str, names: Sequence[str] | None = None) -> "SparsePoly":
        if names is None:
            names = [f"x{i+1}" for i in range(ring.num_vars)]
        index = {n: i for i, n in enumerate(names)}
        acc: dict[bytes, int] = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            try:
                c = int(parts[0])
            except ValueError:
                raise ValueError(f"line {ln}: bad coefficient {parts[0]!r}")
            e = bytearray(ring.num_vars)
            for tok in parts[1:]:
                if "^" not in tok:
                    raise ValueError(f"line {ln}: bad factor {tok!r} (want name^exp)")
                name, _, exp = tok.partition("^")
                if name not in index:
                    raise ValueError(f"line {ln}: unknown variable {name!r}")
                e[index[name]] += int(exp)
            m = bytes(e)
            acc[m] = acc.get(m, 0) + c
        return cls(ring, acc)


def coeff_vector(p: SparsePoly, degree: int) -> list[int]:
    """Dense coefficient vector of a homogeneous polynomial over all degree-d monomials.

    Indexing follows the canonical (descending graded lex) order, so the
    vector length is C(num_vars + d - 1, d) and the map is a linear bijection
    between degree-d forms and vectors.
    """
    if not p.is_homogeneous(degree):
        raise HomogeneityError(f"polynomial is not homogeneous of degree {degree}")
    monos = monomials_of_degree(p.ring.num_vars, degree)
    assert len(monos) == comb(p.ring.num_vars + degree - 1, degree)
    pos = {m: i for i, m in enumerate(monos)}
    out = [0] * len(monos)
    for m, c in p._terms.items():
        out[pos[m]] = c
    return out


def poly_from_coeff_vector(ring: RingDescriptor, degree: int, vec: Sequence[int]) -> SparsePoly:
    """Inverse of :func:`coeff_vector`."""
    monos = monomials_of_degree(ring.num_vars, degree)
    if len(vec) != len(monos):
        raise ValueError(f"expected vector of length {len(monos)}, got {len(vec)}")
    return SparsePoly(ring, {m: int(c) for m, c in zip(monos, vec)})


class PolyMatrix:
    """Rectangular matrix with SparsePoly entries, all over one ring."""

    __slots__ = ("ring", "nrows", "ncols", "_rows")

    def __init__(self, rows: Sequence[Sequence[SparsePoly]]):
        if not rows or not rows[0]:
            raise ValueError("PolyMatrix needs at least one row and column")
        ring = rows[0][0].ring
        width = len(rows[0])
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged rows")
            for e in r:
                if e.ring != ring:
                    raise RingMismatchError("entries in different rings")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "nrows", len(rows))
        object.__setattr__(self, "ncols", width)
        object.__setattr__(self, "_rows", tuple(tuple(r) for r in rows))

    def __setattr__(self, name, value):
        raise AttributeError("PolyMatrix is immutable")

    @classmethod
    def identity(cls, ring: RingDescriptor, n: int, scale: SparsePoly | int = 1) -> "PolyMatrix":
        s = scale if isinstance(scale, SparsePoly) else SparsePoly.constant(ring, scale)
        zero = SparsePoly.zero(ring)
        return cls([[s if i == j else zero for j in range(n)] for i in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> SparsePoly:
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> tuple[SparsePoly, ...]:
        return self._rows[i]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyMatrix)
            and self._rows == other._rows
        )

    __hash__ = None

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return PolyMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)]
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return PolyMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)]
        )

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in product")
        cols = [tuple(other._rows[k][j] for k in range(other.nrows)) for j in range(other.ncols)]
        out = []
        for i in range(self.nrows):
            ri = self._rows[i]
            row = []
            for j in range(other.ncols):
                cj = cols[j]
                acc = ri[0] * cj[0]
                for k in range(1, self.ncols):
                    acc = acc + ri[k] * cj[k]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def scale(self, s: SparsePoly | int) -> "PolyMatrix":
        if isinstance(s, int):
            return PolyMatrix([[e.scale(s) for e in r] for r in self._rows])
        return PolyMatrix([[e * s for e in r] for r in self._rows])

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(
            [[self._rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)]
        )

    def map(self, fn) -> "PolyMatrix":
        """Apply fn entrywise (for example a substitution)."""
        return PolyMatrix([[fn(e) for e in r] for r in self._rows])

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        return all(
            self._rows[i][j] == self._rows[j][i]
            for i in range(self.nrows)
            for j in range(i + 1, self.ncols)
        )

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self._rows for e in r)

    def entries_homogeneous(self, degree: int) -> bool:
        return all(e.is_homogeneous(degree) for r in self._rows for e in r)
