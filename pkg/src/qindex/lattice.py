"""Finite-index sublattices between root and weight lattices.

Everything is exact integer arithmetic in the fundamental-weight basis:
P = Z^r and Q is the column lattice of the Cartan matrix.  The quotient
P/Q is computed by Smith normal form, its subgroups are enumerated and
pulled back to sublattices Q <= Lambda <= P in Hermite normal form, and
the resulting lattice indices are cross-checked against the Watatani index
of the matching cyclic group-algebra inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Sequence


__all__ = [
    "CartanData", "FiniteAbelianGroup", "SublatticeSpec", "IrrepLabel",
    "CenterData", "CrosscheckReport", "cartan_data", "standard_cartan_matrix",
    "smith_normal_form", "hermite_normal_form", "center_group",
    "enumerate_subgroups", "classify_subgroups", "irrep_membership",
    "crosscheck_torus_index", "SUPPORTED_TYPES",
]

SUPPORTED_FAMILIES = ("A", "B", "C", "D", "E", "F", "G")

#: concrete types accepted by the CLI; rank limits keep P/Q enumeration exact
SUPPORTED_TYPES = "A_r (r>=1), B_r (r>=2), C_r (r>=2), D_r (r>=3), E6, E7, E8, F4, G2"


def standard_cartan_matrix(family: str, rank: int) -> list[list[int]]:
    """The standard Cartan matrix of a simple Lie type."""
    def chain(r):
        m = [[0] * r for _ in range(r)]
        for i in range(r):
            m[i][i] = 2
            if i + 1 < r:
                m[i][i + 1] = -1
                m[i + 1][i] = -1
        return m

    if family == "A":
        if rank < 1:
            raise ValueError("A_r needs r >= 1")
        return chain(rank)
    if family == "B":
        if rank < 2:
            raise ValueError("B_r needs r >= 2")
        m = chain(rank)
        m[rank - 2][rank - 1] = -2
        return m
    if family == "C":
        if rank < 2:
            raise ValueError("C_r needs r >= 2")
        m = chain(rank)
        m[rank - 1][rank - 2] = -2
        return m
    if family == "D":
        if rank < 3:
            raise ValueError("D_r needs r >= 3")
        m = chain(rank)
        m[rank - 2][rank - 1] = 0
        m[rank - 1][rank - 2] = 0
        m[rank - 3][rank - 1] = -1
        m[rank - 1][rank - 3] = -1
        return m
    if family == "E":
        if rank not in (6, 7, 8):
            raise ValueError("E supports ranks 6, 7, 8")
        # nodes 1..rank-1 form a chain, the last node attaches to node 3
        m = chain(rank)
        m[rank - 2][rank - 1] = 0
        m[rank - 1][rank - 2] = 0
        m[2][rank - 1] = -1
        m[rank - 1][2] = -1
        return m
    if family == "F":
        if rank != 4:
            raise ValueError("F supports rank 4")
        m = chain(4)
        m[1][2] = -2
        return m
    if family == "G":
        if rank != 2:
            raise ValueError("G supports rank 2")
        return [[2, -1], [-3, 2]]
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class CartanData:
    lie_type: str
    cartan: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        family, rank = _parse_type(self.lie_type)
        want = standard_cartan_matrix(family, rank)
        got = [list(row) for row in self.cartan]
        if got != want:
            raise ValueError(f"matrix does not match the standard Cartan "
                             f"matrix of {self.lie_type}")
        if _det(got) <= 0:
            raise ValueError("Cartan determinant must be positive")

    @property
    def rank(self) -> int:
        return len(self.cartan)

    def matrix(self) -> list[list[int]]:
        return [list(row) for row in self.cartan]


def _parse_type(lie_type: str) -> tuple[str, int]:
    s = lie_type.strip().upper().replace("_", "")
    if len(s) < 2 or s[0] not in SUPPORTED_FAMILIES or not s[1:].isdigit():
        raise ValueError(f"cannot parse Lie type {lie_type!r}")
    return s[0], int(s[1:])


def cartan_data(lie_type: str) -> CartanData:
    family, rank = _parse_type(lie_type)
    m = standard_cartan_matrix(family, rank)
    return CartanData(f"{family}{rank}", tuple(tuple(row) for row in m))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Invariant-factor form d_1 | d_2 | ... with all d_i > 1."""

    invariant_factors: tuple[int, ...]

    def __post_init__(self):
        f = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in f):
            raise ValueError("invariant factors must be > 1")
        for a, b in zip(f, f[1:]):
            if b % a != 0:
                raise ValueError("divisibility chain violated")
        object.__setattr__(self, "invariant_factors", f)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def elements(self) -> list[tuple[int, ...]]:
        return [tuple(e) for e in product(*(range(d) for d in self.invariant_factors))]


@dataclass(frozen=True)
class CenterData:
    """P/Q with the unimodular transforms of the Smith decomposition.

    ``u @ cartan @ v = diag(divisors)``; the class of a weight x in P/Q is
    (u @ x) mod divisors, and only the coordinates with divisor > 1 carry
    information (they are listed in ``nontrivial``).
    """

    group: FiniteAbelianGroup
    divisors: tuple[int, ...]
    u: tuple[tuple[int, ...], ...]
    v: tuple[tuple[int, ...], ...]
    nontrivial: tuple[int, ...]

    def weight_class(self, weight: Sequence[int]) -> tuple[int, ...]:
        """Image of a weight in the invariant-factor coordinates of P/Q."""
        u = [list(r) for r in self.u]
        x = [sum(u[i][j] * int(weight[j]) for j in range(len(weight)))
             for i in range(len(u))]
        return tuple(x[i] % self.divisors[i] for i in self.nontrivial)


@dataclass(frozen=True)
class SublatticeSpec:
    """A sublattice Q <= Lambda <= P in fundamental-weight coordinates.

    ``generators`` is the column Hermite normal form basis of Lambda;
    ``index_in_p`` = [P : Lambda]; ``subgroup`` lists the corresponding
    subgroup of P/Q by its elements in invariant-factor coordinates.
    """

    generators: tuple[tuple[int, ...], ...]
    index_in_p: int
    subgroup: tuple[tuple[int, ...], ...]

    @property
    def subgroup_order(self) -> int:
        return len(self.subgroup)


@dataclass(frozen=True)
class IrrepLabel:
    """Dominant weight in fundamental-weight coordinates."""

    weight: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.weight)
        if any(x < 0 for x in w):
            raise ValueError("dominant weights have nonnegative coordinates")
        object.__setattr__(self, "weight", w)


# ---------------------------------------------------------------------------
# Exact integer normal forms
# ---------------------------------------------------------------------------

def smith_normal_form(mat: Sequence[Sequence[int]]
                      ) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form with transforms: returns (u, d, v) with u m v = d.

    u and v are unimodular, d is diagonal with d_1 | d_2 | ...  Exact
    integer arithmetic throughout.
    """
    m = [list(map(int, row)) for row in mat]
    rows, cols = len(m), len(m[0])
    u = _identity(rows)
    v = _identity(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):
        for k in range(cols):
            m[dst][k] += q * m[src][k]
        for k in range(rows):
            u[dst][k] += q * u[src][k]

    def add_col(src, dst, q):
        for row in m:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    def negate_row(i):
        m[i] = [-x for x in m[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(rows, cols):
        # move a smallest nonzero entry of the trailing block to (t, t)
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if m[i][j] != 0 and (pivot is None or abs(m[i][j]) < abs(m[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        if m[t][t] < 0:
            negate_row(t)
        dirty = False
        for i in range(t + 1, rows):
            if m[i][t] != 0:
                q = m[i][t] // m[t][t]
                add_row(t, i, -q)
                if m[i][t] != 0:
                    dirty = True
        for j in range(t + 1, cols):
            if m[t][j] != 0:
                q = m[t][j] // m[t][t]
                add_col(t, j, -q)
                if m[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # divisibility: fold any non-multiple into the pivot row and retry
        bad = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if m[i][j] % m[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            add_row(bad, t, 1)
            continue
        t += 1
    return u, m, v


def hermite_normal_form(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    """Column Hermite normal form of a full-column-span integer matrix.

    Returns the unique lower-triangular column basis with positive
    diagonal and off-diagonal entries reduced modulo the diagonal of the
    same row (0 <= h[i][j] < h[i][i] for j < i after triangularization).
    Zero columns are dropped.
    """
    m = [list(map(int, row)) for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0

    col = 0
    for row in range(rows):
        # gcd-reduce the entries of this row across columns col..end
        pivot = None
        for j in range(col, cols):
            if m[row][j] != 0:
                pivot = j
                break
        if pivot is None:
            continue
        for j in range(pivot + 1, cols):
            while m[row][j] != 0:
                if abs(m[row][pivot]) > abs(m[row][j]):
                    for i in range(rows):
                        m[i][pivot], m[i][j] = m[i][j], m[i][pivot]
                q = m[row][j] // m[row][pivot]
                for i in range(rows):
                    m[i][j] -= q * m[i][pivot]
        if pivot != col:
            for i in range(rows):
                m[i][pivot], m[i][col] = m[i][col], m[i][pivot]
        if m[row][col] < 0:
            for i in range(rows):
                m[i][col] = -m[i][col]
        # reduce earlier columns against this pivot
        for j in range(col):
            q = m[row][j] // m[row][col]
            if q != 0:
                for i in range(rows):
                    m[i][j] -= q * m[i][col]
        col += 1

    kept = [[m[i][j] for j in range(col)] for i in range(rows)]
    return kept


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _det(mat: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by Gaussian elimination over the rationals."""
    m = [[Fraction(int(x)) for x in row] for row in mat]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return 0
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        inv = m[c][c]
        for r in range(c + 1, n):
            factor = m[r][c] / inv
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[c])]
    assert det.denominator == 1
    return int(det)


def _mat_inverse_exact(mat: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(mat)
    a = [[Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for c in range(n):
        pivot = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[pivot] = a[pivot], a[c]
        inv = a[c][c]
        a[c] = [x / inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


# ---------------------------------------------------------------------------
# Center, subgroups, classification
# ---------------------------------------------------------------------------

def center_group(cartan: CartanData) -> CenterData:
    """P/Q from the Smith normal form of the Cartan matrix."""
    u, d, v = smith_normal_form(cartan.matrix())
    divisors = tuple(d[i][i] for i in range(cartan.rank))
    nontrivial = tuple(i for i, x in enumerate(divisors) if x > 1)
    factors = tuple(divisors[i] for i in nontrivial)
    group = FiniteAbelianGroup(factors) if factors else FiniteAbelianGroup(())
    return CenterData(group, divisors,
                      tuple(tuple(r) for r in u), tuple(tuple(r) for r in v),
                      nontrivial)


def enumerate_subgroups(group: FiniteAbelianGroup,
                        limit: int = 10_000) -> list[tuple[tuple[int, ...], ...]]:
    """All subgroups, each as a tuple of generators in invariant-factor
    coordinates.

    Generated by closing element sets and deduplicated through the Hermite
    normal form of the lifted lattice; refuses groups above ``limit``.
    """
    if group.order > limit:
        raise ValueError(f"group order {group.order} exceeds the limit {limit}")
    factors = group.invariant_factors
    if not factors:
        return [()]
    elements = group.elements()

    def close(gens: frozenset[tuple[int, ...]]) -> frozenset[tuple[int, ...]]:
        seen = {tuple(0 for _ in factors)}
        frontier = list(gens)
        while frontier:
            g = frontier.pop()
            for h in list(seen):
                s = tuple((a + b) % f for a, b, f in zip(g, h, factors))
                if s not in seen:
                    seen.add(s)
                    frontier.append(s)
            if g not in seen:
                seen.add(g)
                frontier.append(g)
        return frozenset(seen)

    trivial = close(frozenset())
    found = {trivial}
    frontier = [trivial]
    while frontier:
        sub = frontier.pop()
        for g in elements:
            if g in sub:
                continue
            bigger = close(frozenset(sub | {g}))
            if bigger not in found:
                found.add(bigger)
                frontier.append(bigger)

    canon = {}
    for sub in found:
        key = _subgroup_hnf_key(sub, factors)
        canon[key] = sub
    out = []
    for key in sorted(canon, key=lambda k: (group.order // _subgroup_order(canon[k]), k)):
        sub = canon[key]
        gens = _minimal_generators(sub, factors)
        out.append(tuple(gens))
    return out


def _subgroup_order(sub: frozenset) -> int:
    return len(sub)


def _subgroup_hnf_key(sub: frozenset, factors: tuple[int, ...]) -> tuple:
    cols = [list(g) for g in sorted(sub)]
    for i, f in enumerate(factors):
        e = [0] * len(factors)
        e[i] = f
        cols.append(e)
    mat = [[cols[c][r] for c in range(len(cols))] for r in range(len(factors))]
    h = hermite_normal_form(mat)
    return tuple(tuple(row) for row in h)


def _minimal_generators(sub: frozenset, factors: tuple[int, ...]
                        ) -> list[tuple[int, ...]]:
    """Greedy small generating set of a subgroup given by its elements."""
    target = set(sub)
    gens: list[tuple[int, ...]] = []
    have = {tuple(0 for _ in factors)}
    for g in sorted(sub, key=lambda e: (-_order_of(e, factors), e)):
        if g in have:
            continue
        gens.append(g)
        new = set(have)
        frontier = [g]
        while frontier:
            x = frontier.pop()
            for h in list(new):
                s = tuple((a + b) % f for a, b, f in zip(x, h, factors))
                if s not in new:
                    new.add(s)
                    frontier.append(s)
            new.add(x)
        have = new
        if have == target:
            break
    return gens


def _order_of(e: tuple[int, ...], factors: tuple[int, ...]) -> int:
    out = 1
    for x, f in zip(e, factors):
        if x:
            out = lcm(out, f // gcd(x, f))
    return out


def classify_subgroups(cartan: CartanData,
                       limit: int = 10_000) -> list[SublatticeSpec]:
    """Sublattices Q <= Lambda <= P for every subgroup of P/Q.

    Lambda = P corresponds to the full dual (index 1) and Lambda = Q to
    the minimal finite-index subgroup.  Output is sorted by index, then by
    the Hermite normal form of the generators.
    """
    center = center_group(cartan)
    r = cartan.rank
    u_inv = _mat_inverse_exact([list(row) for row in center.u])
    subs = enumerate_subgroups(center.group, limit)
    specs = []
    for gens in subs:
        cols: list[list[int]] = [list(col) for col in
                                 zip(*cartan.matrix())] if r else []
        # lift each subgroup generator through the Smith coordinates
        for g in gens:
            full = [0] * r
            for pos, val in zip(center.nontrivial, g):
                full[pos] = val
            lift = [sum(u_inv[i][j] * full[j] for j in range(r)) for i in range(r)]
            assert all(x.denominator == 1 for x in lift)
            cols.append([int(x) for x in lift])
        mat = [[cols[c][i] for c in range(len(cols))] for i in range(r)]
        h = hermite_normal_form(mat)
        index = 1
        for i in range(r):
            index *= h[i][i]
        subgroup_elements = _subgroup_elements_from_gens(gens, center.group)
        specs.append(SublatticeSpec(tuple(tuple(row) for row in h), index,
                                    subgroup_elements))
    specs.sort(key=lambda s: (s.index_in_p, s.generators))
    return specs


def _subgroup_elements_from_gens(gens, group: FiniteAbelianGroup):
    factors = group.invariant_factors
    if not factors:
        return ((),)
    seen = {tuple(0 for _ in factors)}
    frontier = [tuple(g) for g in gens]
    while frontier:
        g = frontier.pop()
        for h in list(seen):
            s = tuple((a + b) % f for a, b, f in zip(g, h, factors))
            if s not in seen:
                seen.add(s)
                frontier.append(s)
        if g not in seen:
            seen.add(g)
            frontier.append(g)
    return tuple(sorted(seen))


def irrep_membership(label: IrrepLabel, spec: SublatticeSpec) -> bool:
    """Whether the irrep with this highest weight factors through Lambda.

    Every weight of the irrep is congruent to the highest weight modulo Q,
    so membership of the class of the highest weight in Lambda/Q decides
    the question; computed by exact triangular solve against the Hermite
    basis of Lambda.
    """
    h = [list(row) for row in spec.generators]
    n = len(h)
    w = [int(x) for x in label.weight]
    if len(w) != n:
        raise ValueError("weight has wrong rank")
    # lower-triangular solve h y = w over the rationals, then check integrality
    y = [Fraction(0)] * n
    for i in range(n):
        acc = Fraction(w[i])
        for j in range(i):
            acc -= h[i][j] * y[j]
        if h[i][i] == 0:
            if acc != 0:
                return False
            y[i] = Fraction(0)
            continue
        y[i] = acc / h[i][i]
    return all(x.denominator == 1 for x in y)


@dataclass(frozen=True)
class CrosscheckReport:
    n: int
    d: int
    expected_index: int
    index_norm: float
    scalar_index: float
    passed: bool


def crosscheck_torus_index(n: int, d: int, tol: float = 1e-9) -> CrosscheckReport:
    """Desk model of the torus expectation behind the classification.

    Builds the cyclic group-algebra inclusion of colevel d in C*(Z/n),
    runs the canonical expectation through the quasi-basis and index
    pipeline, and checks that the Watatani index norm equals the lattice
    index n/d exactly (within tol).
    """
    from .algebra import group_algebra_inclusion
    from .expectation import (canonical_expectation, quasi_basis_report,
                              scalar_index, watatani_index)

    inclusion, tau = group_algebra_inclusion(n, d)
    expectation = canonical_expectation(inclusion, tau)
    result = quasi_basis_report(expectation, tau)
    if result.basis is None:
        raise ValueError(f"quasi-basis construction failed for (n={n}, d={d}): "
                         f"min frame eigenvalue {result.min_eigenvalue:.3e}")
    norm = watatani_index(expectation, result.basis).norm()
    scal = scalar_index(expectation)
    expected = n // d
    passed = abs(norm - expected) <= tol and abs(scal - expected) <= 1e-7
    return CrosscheckReport(n, d, expected, norm, scal, passed)
