"""Multiplicity-level engine for fusion rings and tracial module categories.

All structure constants are exact integers; dimension data (Perron-
Frobenius characters, module traces, standard-solution norms) is
double-precision with verification against the defining equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "FusionRing", "FusionModule", "DimensionVector", "ModuleTrace",
    "TraceSolveResult", "BigradedDims", "MultiplicityFunctor", "StandardSolution",
    "validate_fusion", "validate_module", "pf_dimensions", "module_trace_solve",
    "plancherel_weight", "equivalence_classes", "functor_dims", "d_function",
    "check_locally_constant", "standard_solution_components", "functor_trace",
    "functor_trace_components", "uniformly_finite_check", "jones_membership",
    "qsystem_degree", "action_functor", "jones_value",
]


@dataclass(frozen=True)
class FusionRing:
    """Based ring of a rigid C*-tensor category at the multiplicity level.

    ``tensor[u, v, w]`` is the multiplicity of w in u (x) v; ``dual`` is the
    label involution with N_{u v}^{unit} = delta_{v, dual(u)}.
    """

    labels: tuple[str, ...]
    unit: str
    dual: tuple[tuple[str, str], ...]
    tensor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        r = len(self.labels)
        t = np.asarray(self.tensor, dtype=np.int64)
        if t.shape != (r, r, r):
            raise ValueError(f"tensor must be {r}x{r}x{r}")
        if np.any(t < 0):
            raise ValueError("multiplicities must be nonnegative")
        t = np.ascontiguousarray(t)
        t.flags.writeable = False
        object.__setattr__(self, "tensor", t)
        object.__setattr__(self, "dual", tuple((str(a), str(b)) for a, b in self.dual))

    @property
    def rank(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def dual_label(self, label: str) -> str:
        return dict(self.dual)[label]

    def n(self, u: str, v: str, w: str) -> int:
        return int(self.tensor[self.index(u), self.index(v), self.index(w)])

    def fusion_matrix(self, u: str) -> np.ndarray:
        """Matrix with entries N_{u v}^w at (v, w)."""
        return np.array(self.tensor[self.index(u)])


def validate_fusion(ring: FusionRing) -> list[str]:
    """Exact check of the unit, associativity, and duality axioms.

    Returns an empty list for a valid ring; otherwise the violations in the
    order they were found, each naming the identity and the indices.
    """
    violations = []
    r = ring.rank
    t = ring.tensor
    labels = ring.labels
    if ring.unit not in labels:
        return [f"unit label {ring.unit!r} is not in the label set"]
    dual_map = dict(ring.dual)
    if set(dual_map) != set(labels) or set(dual_map.values()) != set(labels):
        return ["dual involution is not a bijection on the labels"]
    for a in labels:
        if dual_map[dual_map[a]] != a:
            return [f"dual is not an involution at {a!r}"]

    e = ring.index(ring.unit)
    for v in range(r):
        for w in range(r):
            want = 1 if v == w else 0
            if t[e, v, w] != want:
                violations.append(f"unit: N[1,{labels[v]}]^{labels[w]} = {t[e, v, w]}")
            if t[v, e, w] != want:
                violations.append(f"unit: N[{labels[v]},1]^{labels[w]} = {t[v, e, w]}")
            if violations:
                return violations

    # associativity: sum_x N_{uv}^x N_{xw}^y = sum_x N_{vw}^x N_{ux}^y
    lhs = np.einsum("uvx,xwy->uvwy", t, t)
    rhs = np.einsum("vwx,uxy->uvwy", t, t)
    if not np.array_equal(lhs, rhs):
        u, v, w, y = np.argwhere(lhs != rhs)[0]
        violations.append(
            "associativity: "
            f"({labels[u]},{labels[v]},{labels[w]})->{labels[y]}: "
            f"{lhs[u, v, w, y]} != {rhs[u, v, w, y]}")
        return violations

    for u in range(r):
        ubar = ring.index(dual_map[labels[u]])
        for v in range(r):
            want = 1 if v == ubar else 0
            if t[u, v, e] != want:
                violations.append(f"duality: N[{labels[u]},{labels[v]}]^1 = {t[u, v, e]}")
                return violations
    # Frobenius reciprocity at multiplicity level: N_{ubar w}^v = N_{u v}^w
    for u in range(r):
        ubar = ring.index(dual_map[labels[u]])
        for v in range(r):
            for w in range(r):
                if t[ubar, w, v] != t[u, v, w]:
                    violations.append(
                        f"reciprocity: N[{labels[ubar]},{labels[w]}]^{labels[v]}"
                        f" != N[{labels[u]},{labels[v]}]^{labels[w]}")
                    return violations
    return violations


@dataclass(frozen=True)
class FusionModule:
    """Module category data: action[u, i, j] = n_{u,i}^j = dim M(j, u (x) i)."""

    ring: FusionRing
    labels: tuple[str, ...]
    action: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        r = self.ring.rank
        m = len(self.labels)
        a = np.asarray(self.action, dtype=np.int64)
        if a.shape != (r, m, m):
            raise ValueError(f"action tensor must be {r}x{m}x{m}")
        if np.any(a < 0):
            raise ValueError("action multiplicities must be nonnegative")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "action", a)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def action_matrix(self, u: str) -> np.ndarray:
        """Matrix with n_{u,i}^j at (i, j)."""
        return np.array(self.action[self.ring.index(u)])


def validate_module(module: FusionModule) -> list[str]:
    """Exact check of unit action, mixed associativity, and conjugation."""
    violations = []
    ring = module.ring
    ring_violations = validate_fusion(ring)
    if ring_violations:
        return [f"ring: {v}" for v in ring_violations]
    a = module.action
    t = ring.tensor
    e = ring.index(ring.unit)
    if not np.array_equal(a[e], np.eye(module.size, dtype=np.int64)):
        violations.append("unit does not act trivially")
        return violations
    # sum_x N_{uv}^x n_{x,i}^j = sum_k n_{v,i}^k n_{u,k}^j
    lhs = np.einsum("uvx,xij->uvij", t, a)
    rhs = np.einsum("vik,ukj->uvij", a, a)
    if not np.array_equal(lhs, rhs):
        u, v, i, j = np.argwhere(lhs != rhs)[0]
        violations.append(
            "mixed associativity: "
            f"({ring.labels[u]},{ring.labels[v]}) at ({module.labels[i]},"
            f"{module.labels[j]}): {lhs[u, v, i, j]} != {rhs[u, v, i, j]}")
        return violations
    # n_{ubar, j}^i = n_{u, i}^j
    for u, lab in enumerate(ring.labels):
        ubar = ring.index(ring.dual_label(lab))
        if not np.array_equal(a[ubar], a[u].T):
            violations.append(f"conjugate transpose law fails at {lab}")
            return violations
    return violations


@dataclass(frozen=True)
class DimensionVector:
    """Strictly positive dimension function on a label set."""

    values: tuple[tuple[str, float], ...]

    def __getitem__(self, label: str) -> float:
        return dict(self.values)[label]

    def as_dict(self) -> dict[str, float]:
        return dict(self.values)

    @staticmethod
    def from_dict(d: Mapping[str, float]) -> "DimensionVector":
        return DimensionVector(tuple((k, float(v)) for k, v in d.items()))


def pf_dimensions(ring: FusionRing, tol: float = 1e-10) -> DimensionVector:
    """The positive character of the ring from its Perron-Frobenius data.

    The vector of dimensions is the PF eigenvector of sum_u N_u (which has
    strictly positive entries for any valid fusion ring), normalized by
    d(unit) = 1.  The result is verified against the character equation
    sum_w N_{uv}^w d(w) = d(u) d(v); failure raises with the worst
    violation since it means the ring has no positive character at the
    requested accuracy.
    """
    r = ring.rank
    total = np.sum(ring.tensor, axis=0).astype(float)
    evals, evecs = np.linalg.eig(total)
    lead = int(np.argmax(evals.real))
    v = evecs[:, lead].real
    if v[ring.index(ring.unit)] < 0:
        v = -v
    if np.any(v <= 0):
        raise ValueError("leading eigenvector is not strictly positive; "
                         "ring admits no positive character")
    v = v / v[ring.index(ring.unit)]

    worst = 0.0
    for u in range(r):
        resid = ring.tensor[u].astype(float) @ v - v[u] * v
        worst = max(worst, float(np.max(np.abs(resid))))
    if worst > tol:
        raise ValueError(f"character equation fails by {worst:.3e}; "
                         "no positive character at this accuracy")
    dual_drift = max(abs(v[ring.index(ring.dual_label(lab))] - v[i])
                     for i, lab in enumerate(ring.labels))
    if dual_drift > tol:
        raise ValueError(f"dimension function not dual-invariant ({dual_drift:.3e})")
    return DimensionVector(tuple(zip(ring.labels, map(float, v))))


@dataclass(frozen=True)
class ModuleTrace:
    """Positive simultaneous eigenvector of the action matrices.

    Satisfies sum_j n_{u,i}^j m(j) = d(u) m(i), normalized to m = 1 at
    ``base_label``.
    """

    module: FusionModule
    ring_dims: DimensionVector
    values: tuple[tuple[str, float], ...]
    base_label: str

    def __getitem__(self, label: str) -> float:
        return dict(self.values)[label]

    def vector(self) -> np.ndarray:
        return np.array([v for _, v in self.values])

    def as_dict(self) -> dict[str, float]:
        return dict(self.values)


@dataclass(frozen=True)
class TraceSolveResult:
    """Outcome of module_trace_solve.

    status is one of "ok", "no_solution", "no_positive_solution",
    "decomposable" (solution space dimension > 1).
    """

    status: str
    trace: ModuleTrace | None
    solution_dim: int


def module_trace_solve(module: FusionModule, ring_dims: DimensionVector,
                       rtol: float = 1e-10) -> TraceSolveResult:
    """Solve the simultaneous eigenvector equations for a module trace.

    Stacks (A_u - d(u) I) over all ring labels and inspects the null
    space: a unique (up to scale) strictly positive solution gives the
    module trace; zero, indefinite, or multidimensional solution spaces
    are reported as distinct failures.  A solution space of dimension
    greater than one means the module is decomposable.
    """
    m = module.size
    rows = []
    for u, lab in enumerate(module.ring.labels):
        rows.append(module.action[u].astype(float) - ring_dims[lab] * np.eye(m))
    stacked = np.concatenate(rows, axis=0)
    _, svals, vh = np.linalg.svd(stacked, full_matrices=False)
    smax = float(svals[0]) if svals.size else 0.0
    nullity = int(np.sum(svals <= rtol * max(smax, 1.0)))
    if nullity == 0:
        return TraceSolveResult("no_solution", None, 0)
    if nullity > 1:
        return TraceSolveResult("decomposable", None, nullity)
    v = vh[-1].real
    pivot = v[int(np.argmax(np.abs(v)))]
    v = v / pivot
    if np.any(v <= rtol):
        return TraceSolveResult("no_positive_solution", None, 1)
    base = module.labels[0]
    v = v / v[0]
    trace = ModuleTrace(module, ring_dims,
                        tuple(zip(module.labels, map(float, v))), base)
    return TraceSolveResult("ok", trace, 1)


def plancherel_weight(trace: ModuleTrace, a: Mapping[str, complex]) -> complex:
    """sum_i m(i)^2 a_i over the irreducibles of the module."""
    return complex(sum((dict(trace.values)[i] ** 2) * complex(a.get(i, 0.0))
                       for i in trace.module.labels))


def equivalence_classes(module: FusionModule,
                        subring: Iterable[str]) -> list[tuple[str, ...]]:
    """Partition of the module labels under linking by the subring.

    i ~ j when some u in the subring has n_{u,j}^i != 0; the relation is
    symmetric by the conjugate transpose law once the subring is closed
    under duals, and the returned partition is its transitive closure.
    Raises if the subring is not closed under duals and fusion.
    """
    ring = module.ring
    sub = list(dict.fromkeys(subring))
    for u in sub:
        if u not in ring.labels:
            raise ValueError(f"unknown ring label {u!r}")
        if ring.dual_label(u) not in sub:
            raise ValueError(f"subring not closed under duals at {u!r}")
    for u in sub:
        for v in sub:
            for w in ring.labels:
                if ring.n(u, v, w) != 0 and w not in sub:
                    raise ValueError(
                        f"subring not closed under fusion: {u} x {v} contains {w}")

    m = module.size
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for u in sub:
        mat = module.action_matrix(u)
        for i in range(m):
            for j in range(m):
                if mat[i, j] != 0:
                    union(i, j)

    groups: dict[int, list[str]] = {}
    for i, lab in enumerate(module.labels):
        groups.setdefault(find(i), []).append(lab)
    return [tuple(groups[k]) for k in sorted(groups)]


@dataclass(frozen=True)
class BigradedDims:
    """Integer dimensions of an irrM x irrM graded family of Hilbert spaces."""

    dims: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dims, dtype=np.int64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("dims must be a square integer matrix")
        if np.any(d < 0):
            raise ValueError("dims must be nonnegative")
        d = np.ascontiguousarray(d)
        d.flags.writeable = False
        object.__setattr__(self, "dims", d)


def uniformly_finite_check(h: BigradedDims) -> tuple[bool, int, int]:
    """Always true on a finite grading; returns (True, max row, max col sum)."""
    row = int(np.max(np.sum(h.dims, axis=1))) if h.dims.size else 0
    col = int(np.max(np.sum(h.dims, axis=0))) if h.dims.size else 0
    return True, row, col


@dataclass(frozen=True)
class MultiplicityFunctor:
    """An endofunctor of a module category at the multiplicity level.

    ``dims[j, i]`` is dim M(j, F(i)).  When the functor is the action by a
    ring object, standard-solution vectors are attached for trace
    computations.
    """

    module: FusionModule
    dims: BigradedDims
    solution: "StandardSolution | None" = None


def functor_dims(module: FusionModule, u: str) -> BigradedDims:
    """Bigraded dims of the action-by-u functor: dims[j, i] = n_{u,i}^j."""
    return BigradedDims(module.action_matrix(u).T)


def action_functor(module: FusionModule, trace: ModuleTrace,
                   u: str) -> MultiplicityFunctor:
    return MultiplicityFunctor(module, functor_dims(module, u),
                               standard_solution_components(module, trace, u))


def d_function(functor: MultiplicityFunctor, trace: ModuleTrace) -> dict[str, float]:
    """d_F(i) = d(F(i)) / d(i) = sum_j dims[j, i] m(j) / m(i)."""
    m = trace.vector()
    dims = functor.dims.dims.astype(float)
    vals = (dims.T @ m) / m
    return {lab: float(v) for lab, v in zip(functor.module.labels, vals)}


def check_locally_constant(d_f: Mapping[str, float],
                           partition: Sequence[Sequence[str]],
                           tol: float = 1e-9) -> tuple[bool, list[str]]:
    """True iff d_F is constant within tol on every class of the partition."""
    problems = []
    for cls in partition:
        vals = [d_f[i] for i in cls]
        spread = max(vals) - min(vals)
        if spread > tol:
            problems.append(f"class {tuple(cls)} has spread {spread:.3e}")
    return (not problems), problems


@dataclass(frozen=True)
class StandardSolution:
    """Standard conjugate-solution data of an action functor, per (j, i).

    norms_r_sq[j, i]    = (m(j)/m(i)) n_{u,i}^j  (squared norm of R_ji)
    norms_rbar_sq[j, i] = (m(i)/m(j)) n_{u,i}^j  (squared norm of Rbar_ji)

    The explicit vectors realize each component as a scaled maximally
    entangled vector over an orthonormal basis pair of the multiplicity
    spaces M(i, ubar j) and M(j, u i); R_ji lives in their tensor product
    in that order, Rbar_ji in the opposite order.
    """

    ring_label: str
    labels: tuple[str, ...]
    norms_r_sq: np.ndarray
    norms_rbar_sq: np.ndarray
    r_vectors: tuple[tuple[int, int, np.ndarray], ...]
    rbar_vectors: tuple[tuple[int, int, np.ndarray], ...]

    def r_vector(self, j: int, i: int) -> np.ndarray:
        for jj, ii, v in self.r_vectors:
            if (jj, ii) == (j, i):
                return v
        return np.zeros(0, dtype=complex)

    def rbar_vector(self, j: int, i: int) -> np.ndarray:
        for jj, ii, v in self.rbar_vectors:
            if (jj, ii) == (j, i):
                return v
        return np.zeros(0, dtype=complex)


def standard_solution_components(module: FusionModule, trace: ModuleTrace,
                                 u: str) -> StandardSolution:
    """Component norms and explicit vectors of the standard solution.

    The product norms_r_sq * norms_rbar_sq equals (n_{u,i}^j)^2 entrywise.
    """
    mvals = trace.vector()
    action = module.action_matrix(u)
    size = module.size
    nr = np.zeros((size, size))
    nrbar = np.zeros((size, size))
    r_vecs = []
    rbar_vecs = []
    for i in range(size):
        for j in range(size):
            mult = int(action[i, j])
            if mult == 0:
                continue
            ratio = mvals[j] / mvals[i]
            nr[j, i] = ratio * mult
            nrbar[j, i] = mult / ratio
            ent = np.eye(mult, dtype=complex).ravel() / np.sqrt(mult)
            r_vecs.append((j, i, np.sqrt(nr[j, i]) * ent))
            rbar_vecs.append((j, i, np.sqrt(nrbar[j, i]) * ent))
    return StandardSolution(u, module.labels, nr, nrbar,
                            tuple(r_vecs), tuple(rbar_vecs))


def functor_trace_components(functor: MultiplicityFunctor, trace: ModuleTrace,
                             eta: Mapping[tuple[int, int], np.ndarray],
                             ) -> tuple[float, float, float]:
    """Left insertion, right insertion, and closed-form functor trace.

    eta maps (j, i) to a PSD matrix on the multiplicity space M(j, F(i)).
    The left value is omega(R* (id (x) eta) R) evaluated with the explicit
    standard vectors, the right value the mirrored insertion through Rbar,
    and the closed form is sum_{ij} m(i) m(j) tr(eta_{ji}).
    """
    if functor.solution is None:
        raise ValueError("functor carries no standard-solution vectors")
    sol = functor.solution
    mvals = trace.vector()
    dims = functor.dims.dims
    left = 0.0
    right = 0.0
    closed = 0.0
    for (j, i), block in eta.items():
        mult = int(dims[j, i])
        block = np.asarray(block, dtype=complex)
        if block.shape != (mult, mult):
            raise ValueError(f"eta block at {(j, i)} must be {mult}x{mult}")
        if mult == 0:
            continue
        if float(np.max(np.abs(block - block.conj().T))) > 1e-9 or \
                float(np.linalg.eigvalsh(block)[0]) < -1e-9:
            raise ValueError(f"eta block at {(j, i)} is not positive semidefinite")
        tr_eta = float(np.real(np.trace(block)))
        closed += mvals[i] * mvals[j] * tr_eta

        # R_ji in M(i, ubar j) (x) M(j, u i): eta acts on the second factor
        r = sol.r_vector(j, i).reshape(mult, mult)
        left += mvals[i] ** 2 * float(np.real(
            np.sum(r.conj() * (r @ block.T))))
        # Rbar_ji in M(j, u i) (x) M(i, ubar j): eta acts on the first factor
        rbar = sol.rbar_vector(j, i).reshape(mult, mult)
        right += mvals[j] ** 2 * float(np.real(
            np.sum(rbar.conj() * (block @ rbar))))
    return left, right, closed


def functor_trace(functor: MultiplicityFunctor, trace: ModuleTrace,
                  eta: Mapping[tuple[int, int], np.ndarray],
                  tol: float = 1e-9) -> float:
    """Closed-form functor trace, cross-checked against both insertions.

    A disagreement beyond tol means the attached vectors are not standard
    and is raised as an error.
    """
    left, right, closed = functor_trace_components(functor, trace, eta)
    scale = max(1.0, abs(closed))
    if abs(left - closed) > tol * scale or abs(right - closed) > tol * scale:
        raise ValueError(
            f"insertions disagree with closed form: left={left!r}, "
            f"right={right!r}, closed={closed!r}")
    return closed


def jones_value(n: int) -> float:
    """The Jones number 4 cos^2(pi/n)."""
    return float(4.0 * np.cos(np.pi / n) ** 2)


def jones_membership(d: float, tol: float = 1e-9) -> tuple[bool, int | str | None]:
    """Membership of d in {4 cos^2(pi/n) : n >= 3} union [4, infinity).

    Returns (True, n) for a discrete-series match within tol, (True,
    "continuum") for d >= 4 - tol, and (False, None) for values in the
    gaps below 4.  The candidate n is found by inverting the strictly
    increasing map n -> 4 cos^2(pi/n), so arbitrarily large witnesses near
    the accumulation point 4 are still detected.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    if d < 4.0:
        n_real = np.pi / np.arccos(np.sqrt(d) / 2.0)
        candidates = range(max(3, int(np.floor(n_real)) - 1),
                           int(np.ceil(n_real)) + 2)
        best = min(candidates, key=lambda n: abs(d - jones_value(n)))
        if abs(d - jones_value(best)) <= tol:
            return True, best
    if d >= 4.0 - tol:
        return True, "continuum"
    return False, None


def qsystem_degree(ring_dims: DimensionVector, label: str) -> float:
    """Covering degree d(X)^2 of the canonical extension built on X."""
    return float(ring_dims[label] ** 2)
