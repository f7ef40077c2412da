"""Hochschild/Hodge bookkeeping for Calabi-Yau-3 categories.

The pipeline mirrors how the numbers are produced for the worked examples:
a (weighted) hypersurface diamond from the Jacobian-ring Hilbert series
(:func:`griffiths_hypersurface`), regrouped into a Hochschild profile by HKR
(:func:`hkr_profile`), stripped of the exceptional-object contribution
(:func:`sod_strip`), and turned into the categorical Hodge diamond by the
five defining clauses (:func:`cy3_hodge_numbers`):

1. h^{i,0} = dim of the homological unit in degree 3 - i,
2. h^{3,1} = dim HH_{-2} - h^{2,0},
3. h^{3,2} = h^{1,0} and h^{2,1} = dim HH_{-1} - h^{1,0} - h^{3,2},
4. h^{3,3} = h^{0,0} and h^{1,1} = h^{2,2} = (dim HH_0 - h^{0,0} - h^{3,3})/2,
5. h^{p,q} = h^{q,p}.

All arithmetic is exact integers; the division in clause 4 checks parity
first.  Negative intermediates raise a clause-named error, except h^{2,1},
whose non-negativity the theory does not guarantee; :func:`validate_cy3`
reports on it instead of rejecting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CY3ClauseError",
    "HodgeDiamond",
    "HochschildProfile",
    "UnitProfile",
    "KLattice",
    "HodgeSpaceAssignment",
    "ValidationReport",
    "hkr_profile",
    "sod_strip",
    "cy3_hodge_numbers",
    "validate_cy3",
    "griffiths_hypersurface",
    "rotate_diamond",
    "klattice_generates",
    "weight2_assignment",
    "weight3_assignment",
    "CY3_UNIT",
]


class CY3ClauseError(ValueError):
    """A defining clause of the categorical Hodge numbers is violated."""

    def __init__(self, clause: str, message: str):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


@dataclass(frozen=True)
class HodgeDiamond:
    """(n+1) x (n+1) grid h[p][q]; integers, not forced non-negative.

    Geometric diamonds satisfy Hodge symmetry h[p][q] = h[q][p] and Serre
    symmetry h[p][q] = h[n-p][n-q]; both are checkable, neither is imposed
    at construction (validate_cy3 flags pathologies instead).
    """

    n: int
    h: tuple

    def __post_init__(self):
        if self.n < 0 or len(self.h) != self.n + 1:
            raise ValueError("grid size must be (n+1) x (n+1)")
        for row in self.h:
            if len(row) != self.n + 1:
                raise ValueError("grid size must be (n+1) x (n+1)")

    @classmethod
    def from_rows(cls, rows) -> "HodgeDiamond":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        return cls(n=len(rows) - 1, h=rows)

    def __getitem__(self, pq: tuple[int, int]) -> int:
        p, q = pq
        return self.h[p][q]

    def hodge_symmetric(self) -> bool:
        return all(
            self.h[p][q] == self.h[q][p]
            for p in range(self.n + 1)
            for q in range(self.n + 1)
        )

    def serre_symmetric(self) -> bool:
        n = self.n
        return all(
            self.h[p][q] == self.h[n - p][n - q]
            for p in range(n + 1)
            for q in range(n + 1)
        )

    def total(self) -> int:
        return sum(sum(r) for r in self.h)

    def middle_row(self) -> tuple:
        """Entries with p + q = n, p descending (the printed middle row)."""
        n = self.n
        return tuple(self.h[p][n - p] for p in range(n, -1, -1))

    def pretty(self) -> str:
        """Triangular layout, h^{0,0} on top, p decreasing left to right."""
        n = self.n
        width = max(len(str(x)) for row in self.h for x in row)
        unit = width + 2
        lines = []
        for r in range(2 * n + 1):
            entries = [
                str(self.h[p][r - p]).center(width)
                for p in range(min(r, n), max(0, r - n) - 1, -1)
            ]
            offset = (n + 1 - len(entries)) * unit // 2
            lines.append((" " * offset + (" " * 2).join(entries)).rstrip())
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "h": [list(r) for r in self.h]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HodgeDiamond":
        d = json.loads(text)
        dia = cls.from_rows(d["h"])
        if dia.n != d["n"]:
            raise ValueError("declared n does not match the grid")
        return dia


@dataclass(frozen=True)
class HochschildProfile:
    """Graded dimensions dims[k] of Hochschild homology, k in [-n, n]."""

    n: int
    dims: tuple  # length 2n + 1, index k + n

    def __post_init__(self):
        if len(self.dims) != 2 * self.n + 1:
            raise ValueError("dims must cover k in [-n, n]")
        if any(d < 0 for d in self.dims):
            raise ValueError("Hochschild dimensions are non-negative")

    @classmethod
    def from_map(cls, mapping: dict, n: int | None = None) -> "HochschildProfile":
        ks = [int(k) for k in mapping]
        if n is None:
            n = max(abs(k) for k in ks) if ks else 0
        dims = [0] * (2 * n + 1)
        for k, v in mapping.items():
            k = int(k)
            if abs(k) > n:
                raise ValueError(f"degree {k} outside [-{n}, {n}]")
            dims[k + n] = int(v)
        return cls(n=n, dims=tuple(dims))

    def __getitem__(self, k: int) -> int:
        if abs(k) > self.n:
            return 0
        return self.dims[k + self.n]

    def total(self) -> int:
        return sum(self.dims)

    def is_symmetric(self) -> bool:
        return all(self[k] == self[-k] for k in range(1, self.n + 1))

    def to_map(self) -> dict:
        return {k: self[k] for k in range(-self.n, self.n + 1) if self[k]}

    def to_json(self) -> str:
        return json.dumps({str(k): v for k, v in self.to_map().items()}, sort_keys=True)


@dataclass(frozen=True)
class UnitProfile:
    """Graded dimensions of the homological unit; degree 0 contains 1."""

    graded_dims: tuple  # ((degree, dim), ...)

    def __post_init__(self):
        if self[0] < 1:
            raise ValueError("the unit contains the ground field in degree 0")

    @classmethod
    def cy(cls, p: int) -> "UnitProfile":
        return cls(graded_dims=((0, 1), (p, 1)))

    def __getitem__(self, degree: int) -> int:
        return dict(self.graded_dims).get(degree, 0)


CY3_UNIT = UnitProfile.cy(3)


@dataclass(frozen=True)
class KLattice:
    rank: int
    class_vectors: tuple

    def __post_init__(self):
        for v in self.class_vectors:
            if len(v) != self.rank:
                raise ValueError("class vectors must have length = rank")


# ---------------------------------------------------------------------------
# profiles and stripping
# ---------------------------------------------------------------------------

def hkr_profile(d: HodgeDiamond) -> HochschildProfile:
    """Regroup a diamond into Hochschild degrees: dims[k] = sum over p - q = k."""
    dims = [0] * (2 * d.n + 1)
    for p in range(d.n + 1):
        for q in range(d.n + 1):
            dims[p - q + d.n] += d.h[p][q]
    return HochschildProfile(n=d.n, dims=tuple(dims))


def sod_strip(hh: HochschildProfile, num_exceptional: int) -> HochschildProfile:
    """Remove the HH contribution of a length-k exceptional sequence (k at degree 0)."""
    if num_exceptional < 0:
        raise ValueError("num_exceptional must be non-negative")
    if hh[0] < num_exceptional:
        raise ValueError(
            f"profile has dims[0] = {hh[0]} < {num_exceptional} exceptional objects"
        )
    dims = list(hh.dims)
    dims[hh.n] -= num_exceptional
    return HochschildProfile(n=hh.n, dims=tuple(dims))


# ---------------------------------------------------------------------------
# the five clauses
# ---------------------------------------------------------------------------

def _window_cy3(hh: HochschildProfile) -> None:
    for k in range(-hh.n, hh.n + 1):
        if abs(k) > 3 and hh[k]:
            raise CY3ClauseError(
                "window", f"profile has nonzero dimension {hh[k]} at degree {k}"
            )


def cy3_hodge_numbers(hh: HochschildProfile, unit: UnitProfile = CY3_UNIT) -> HodgeDiamond:
    """Hodge diamond of a connected CY3 category from its Hochschild profile.

    Implements the five clauses in the module docstring.  Raises
    :class:`CY3ClauseError` (naming the clause) on negative intermediate
    values or a failed parity check, except for h^{2,1} which the theory
    does not bound below; a negative h^{2,1} lands in the diamond and is
    reported by :func:`validate_cy3`.
    """
    _window_cy3(hh)
    hi0 = {i: unit[3 - i] for i in range(4)}
    h20 = hi0[2]
    h31 = hh[-2] - h20
    if h31 < 0:
        raise CY3ClauseError("clause 2", f"dim HH_-2 = {hh[-2]} < h^{{2,0}} = {h20}")
    h32 = hi0[1]
    h21 = hh[-1] - hi0[1] - h32
    h33 = hi0[0]
    rem = hh[0] - hi0[0] - h33
    if rem < 0:
        raise CY3ClauseError(
            "clause 4", f"dim HH_0 = {hh[0]} < h^{{0,0}} + h^{{3,3}} = {hi0[0] + h33}"
        )
    if rem % 2:
        raise CY3ClauseError(
            "clause 4", f"dim HH_0 - h^{{0,0}} - h^{{3,3}} = {rem} is odd"
        )
    h11 = h22 = rem // 2
    grid = [[0] * 4 for _ in range(4)]
    for i in range(4):
        grid[i][0] = hi0[i]
    grid[3][1] = h31
    grid[3][2] = h32
    grid[2][1] = h21
    grid[3][3] = h33
    grid[1][1] = h11
    grid[2][2] = h22
    for p in range(4):
        for q in range(p + 1, 4):
            grid[p][q] = grid[q][p]
    return HodgeDiamond.from_rows(grid)


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)   # (name, passed, detail)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list:
        return [(n, d) for n, p, d in self.checks if not p]

    def to_json(self) -> str:
        return json.dumps(
            [{"check": n, "passed": p, "detail": d} for n, p, d in self.checks]
        )


def validate_cy3(d: HodgeDiamond, hh: HochschildProfile) -> ValidationReport:
    """Positivity/evenness/connectivity/consistency checks, report style.

    h^{2,1} gets its own check flagged as not guaranteed by the theory; a
    failure there is a finding, not a rejection.
    """
    rep = ValidationReport()
    if d.n != 3:
        rep.add("shape", False, f"diamond has n = {d.n}, expected 3")
        return rep
    neg = [
        (p, q)
        for p in range(4)
        for q in range(4)
        if d.h[p][q] < 0 and (p, q) not in ((2, 1), (1, 2))
    ]
    rep.add("non-negativity", not neg, f"negative entries at {neg}" if neg else "")
    rep.add(
        "h21 non-negativity (not guaranteed by the theory)",
        d.h[2][1] >= 0 and d.h[1][2] >= 0,
        f"h^{{2,1}} = {d.h[2][1]}",
    )
    rep.add("hodge symmetry", d.hodge_symmetric(), "")
    rep.add(
        "evenness of dim HH_0",
        hh[0] % 2 == 0,
        f"dim HH_0 = {hh[0]}",
    )
    rep.add("connectivity dim HH_-3 = 1", hh[-3] == 1, f"dim HH_-3 = {hh[-3]}")
    # inverse bookkeeping: the diamond regroups back to the profile
    expected = {
        -3: d.h[0][3],
        -2: d.h[3][1] + d.h[2][0],
        -1: d.h[2][1] + d.h[1][0] + d.h[3][2],
        0: d.h[0][0] + d.h[1][1] + d.h[2][2] + d.h[3][3],
        1: d.h[1][2] + d.h[0][1] + d.h[2][3],
        2: d.h[1][3] + d.h[0][2],
        3: d.h[3][0],
    }
    mismatches = {k: (hh[k], v) for k, v in expected.items() if hh[k] != v}
    rep.add(
        "profile consistency",
        not mismatches,
        f"profile vs diamond mismatches {mismatches}" if mismatches else "",
    )
    return rep


# ---------------------------------------------------------------------------
# Griffiths oracle for (weighted) hypersurfaces
# ---------------------------------------------------------------------------

def _series_coeffs(weights, degree, upto: int) -> list[int]:
    """Coefficients of prod (1 - t^(d - w)) / (1 - t^w), exactly, to order upto."""
    coeffs = [0] * (upto + 1)
    coeffs[0] = 1
    for w in weights:
        e = degree - w
        if e <= upto:
            # multiply by (1 - t^e)
            for i in range(upto, e - 1, -1):
                coeffs[i] -= coeffs[i - e]
    for w in weights:
        # multiply by 1 / (1 - t^w) = sum t^{kw}
        for i in range(w, upto + 1):
            coeffs[i] += coeffs[i - w]
    return coeffs


def griffiths_hypersurface(weights, degree: int) -> HodgeDiamond:
    """Hodge diamond of a generic quasi-smooth hypersurface of the given degree
    in the weighted projective space with the given weights.

    Middle primitive numbers come from the Jacobian-ring Hilbert series
    prod_i (1 - t^(d - w_i)) / (1 - t^w_i): the dimension in degree
    (q+1)d - sum(w) is h^{n-q,q}_prim.  One algebraic (p,p) class per level
    (powers of the polarization) is added on top; that accounts for the whole
    non-primitive cohomology for the hypersurface and double-cover cases this
    models (it is not correct for weighted cases with extra (p,p) classes).
    """
    weights = [int(w) for w in weights]
    if len(weights) < 3 or any(w < 1 for w in weights):
        raise ValueError("need at least 3 positive weights")
    if degree <= max(weights):
        raise ValueError("degree must exceed every weight")
    n = len(weights) - 2
    wsum = sum(weights)
    need = [(q + 1) * degree - wsum for q in range(n + 1)]
    upto = max([x for x in need if x >= 0], default=0)
    coeffs = _series_coeffs(weights, degree, upto)
    prim = [coeffs[x] if 0 <= x <= upto else 0 for x in need]
    if prim != prim[::-1]:
        raise AssertionError("primitive spectrum is not palindromic")
    grid = [[0] * (n + 1) for _ in range(n + 1)]
    for p in range(n + 1):
        grid[p][p] = 1
    for q in range(n + 1):
        grid[n - q][q] += prim[q]
    dia = HodgeDiamond.from_rows(grid)
    if not dia.hodge_symmetric():
        raise AssertionError("assembled diamond is not Hodge symmetric")
    return dia


# ---------------------------------------------------------------------------
# mirror rotation and K-lattice
# ---------------------------------------------------------------------------

def rotate_diamond(d: HodgeDiamond) -> HodgeDiamond:
    """Quarter-turn of the diamond display: rotated[p][q] = h[q][n - p].

    Four applications are the identity; two give the 180-degree rotation
    (Serre partner).
    """
    n = d.n
    return HodgeDiamond.from_rows(
        [[d.h[q][n - p] for q in range(n + 1)] for p in range(n + 1)]
    )


def klattice_generates(lat: KLattice) -> tuple[bool, int]:
    """Do the class vectors span the complexified lattice?  Exact rank over Q."""
    if not lat.class_vectors:
        return (lat.rank == 0, 0)
    from fractions import Fraction

    m = [[Fraction(int(x)) for x in v] for v in lat.class_vectors]
    nrows, ncols = len(m), lat.rank
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
        if r == nrows:
            break
    return (r == lat.rank, r)


# ---------------------------------------------------------------------------
# Hodge-space assignments (explicit model vector spaces)
# ---------------------------------------------------------------------------

@dataclass
class HodgeSpaceAssignment:
    """Model spaces H^{p,q} with explicit bases inside models of HH_k.

    ``spaces[(p, q)] = (k, B)`` places H^{p,q} inside the HH_k model (a
    free module of dimension dims[k]); the columns of the integer matrix B
    are its basis.  ``involution[k]`` is the conjugation matrix
    HH_k -> HH_{-k}; ``symplectic`` is the form on the HH_0 model when one
    is part of the structure (weight 3), else None.
    """

    profile: HochschildProfile
    spaces: dict
    involution: dict
    symplectic: np.ndarray | None = None

    def dims(self) -> dict:
        return {pq: B.shape[1] for pq, (k, B) in self.spaces.items()}

    def check(self) -> None:
        """Assert every structural invariant; raises AssertionError on failure."""
        hh = self.profile
        # graded pieces fill each level exactly
        for k in range(-hh.n, hh.n + 1):
            pieces = [B for (p, q), (kk, B) in self.spaces.items() if kk == k]
            total = sum(B.shape[1] for B in pieces)
            assert total == hh[k], f"level {k}: dims {total} != {hh[k]}"
            if pieces:
                stack = np.concatenate(pieces, axis=1)
                assert stack.shape[0] == hh[k]
                assert _rank_int(stack) == hh[k], f"level {k}: bases do not span"
        # involution squares to the identity and swaps (p,q) <-> (q,p)
        for k, M in self.involution.items():
            back = self.involution[-k]
            assert np.array_equal(back @ M, np.eye(M.shape[1], dtype=np.int64)), (
                f"involution at {k} does not square to identity"
            )
        for (p, q), (k, B) in self.spaces.items():
            img = self.involution[k] @ B
            k2, B2 = self.spaces[(q, p)]
            assert k2 == -k
            if B2.shape[1]:
                sol, ok = _solve_int(B2, img)
                assert ok, f"conjugate of H^{{{p},{q}}} is not H^{{{q},{p}}}"
            else:
                assert not img.any()
        if self.symplectic is not None:
            J = self.symplectic
            assert np.array_equal(J.T, -J), "form is not antisymmetric"
            v1 = [B for (p, q), (k, B) in self.spaces.items() if k == 0 and (p, q) in ((0, 0), (1, 1))]
            v2 = [B for (p, q), (k, B) in self.spaces.items() if k == 0 and (p, q) in ((3, 3), (2, 2))]
            V1 = np.concatenate(v1, axis=1)
            V2 = np.concatenate(v2, axis=1)
            assert not (V1.T @ J @ V1).any(), "V1 is not isotropic"
            assert not (V2.T @ J @ V2).any(), "V2 is not isotropic"
            assert V1.shape[1] == V2.shape[1] == hh[0] // 2
            assert _rank_int(np.concatenate([V1, V2], axis=1)) == hh[0], "V1 + V2 != HH_0"


def _rank_int(M: np.ndarray) -> int:
    from fractions import Fraction

    lat = KLattice(rank=M.shape[0], class_vectors=tuple(tuple(int(x) for x in col) for col in M.T))
    return klattice_generates(lat)[1]


def _solve_int(B: np.ndarray, img: np.ndarray) -> tuple[None, bool]:
    """Is every column of img in the integer column span of B?  (0/1 bases here.)"""
    aug = np.concatenate([B, img], axis=1)
    return None, _rank_int(aug) == _rank_int(B)


def weight2_assignment(hh: HochschildProfile) -> HodgeSpaceAssignment:
    """Weight-2 structure for K3-like profiles (1, h, 1) at degrees (-2, 0, 2).

    H^{2,0} and H^{0,2} are the lines at degrees -2 and 2, H^{1,1} is all of
    HH_0; conjugation swaps the lines and fixes HH_0 pointwise.
    """
    for k in range(-hh.n, hh.n + 1):
        if k not in (-2, 0, 2) and hh[k]:
            raise ValueError(f"profile has nonzero dimension at degree {k}")
    if hh[-2] != 1 or hh[2] != 1:
        raise ValueError("weight-2 shape needs dim HH_{-2} = dim HH_2 = 1")
    h = hh[0]
    one = np.eye(1, dtype=np.int64)
    spaces = {
        (2, 0): (-2, one.copy()),
        (0, 2): (2, one.copy()),
        (1, 1): (0, np.eye(h, dtype=np.int64)),
    }
    involution = {
        -2: one.copy(),
        2: one.copy(),
        0: np.eye(h, dtype=np.int64),
    }
    out = HodgeSpaceAssignment(profile=hh, spaces=spaces, involution=involution)
    out.check()
    return out


def weight3_assignment(hh: HochschildProfile, unit: UnitProfile = CY3_UNIT) -> HodgeSpaceAssignment:
    """Weight-3 Hodge spaces for a connected CY3 profile with unit C + C[3].

    The HH_0 model carries the standard symplectic form in a basis
    (e_1..e_m, f_1..f_m); V1 = span(e) and V2 = span(f) are complementary
    Lagrangians, H^{0,0} = <e_1>, H^{1,1} = <e_2..e_m>, H^{3,3} = <f_1>,
    H^{2,2} = <f_2..f_m>.  H^{3,1} and H^{2,1} are the whole models of
    HH_{-2} and HH_{-1}; conjugates are matched bases at opposite degrees.
    """
    if (unit[0], unit[3]) != (1, 1) or any(unit[i] for i in (1, 2)):
        raise ValueError("weight-3 assignment needs unit C + C[3]")
    if hh[-3] != 1:
        raise ValueError(f"connectivity fails: dim HH_-3 = {hh[-3]}")
    if not hh.is_symmetric():
        raise ValueError("profile is not symmetric under k -> -k")
    if hh[0] % 2 or hh[0] < 2:
        raise ValueError(f"dim HH_0 = {hh[0]} must be even and >= 2")
    _window_cy3(hh)
    m = hh[0] // 2
    dim0 = hh[0]
    I0 = np.eye(dim0, dtype=np.int64)
    e = lambda i: I0[:, i : i + 1]

    def span(cols):
        return (
            np.concatenate(cols, axis=1)
            if cols
            else np.zeros((dim0, 0), dtype=np.int64)
        )

    spaces = {
        (3, 0): (-3, np.eye(1, dtype=np.int64)),
        (0, 3): (3, np.eye(1, dtype=np.int64)),
        (3, 1): (-2, np.eye(hh[-2], dtype=np.int64)),
        (1, 3): (2, np.eye(hh[2], dtype=np.int64)),
        (2, 1): (-1, np.eye(hh[-1], dtype=np.int64)),
        (1, 2): (1, np.eye(hh[1], dtype=np.int64)),
        (0, 0): (0, e(0)),
        (1, 1): (0, span([e(i) for i in range(1, m)])),
        (3, 3): (0, e(m)),
        (2, 2): (0, span([e(i) for i in range(m + 1, 2 * m)])),
        (2, 0): (-2, np.zeros((hh[-2], 0), dtype=np.int64)),
        (0, 2): (2, np.zeros((hh[2], 0), dtype=np.int64)),
        (1, 0): (-1, np.zeros((hh[-1], 0), dtype=np.int64)),
        (0, 1): (1, np.zeros((hh[1], 0), dtype=np.int64)),
        (3, 2): (-1, np.zeros((hh[-1], 0), dtype=np.int64)),
        (2, 3): (1, np.zeros((hh[1], 0), dtype=np.int64)),
    }
    # hold the weight-3 clauses: H^{3,1} exhausts HH_{-2} only when h20 = 0,
    # which the unit guarantees; same at degree -1
    involution = {}
    for k in range(-3, 4):
        dim = hh[k]
        involution[k] = np.eye(dim, dtype=np.int64)
    J = np.zeros((dim0, dim0), dtype=np.int64)
    J[:m, m:] = np.eye(m, dtype=np.int64)
    J[m:, :m] = -np.eye(m, dtype=np.int64)
    out = HodgeSpaceAssignment(
        profile=hh, spaces=spaces, involution=involution, symplectic=J
    )
    out.check()
    return out
