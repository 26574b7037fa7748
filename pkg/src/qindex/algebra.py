"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

A multimatrix algebra ``M_{m_1} + ... + M_{m_T}`` is the universe for all
index computations in this package.  Elements carry one complex matrix per
block; the coefficient vector of an element is the concatenation of the
row-major flattened blocks, which fixes the matrix convention for every
linear map (homomorphisms, expectations) in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

#: relative eigenvalue threshold used for every rank / invertibility decision
RANK_RTOL = 1e-10

#: default tolerance for Hermiticity and axiom checks
DEFAULT_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    """A direct sum of full matrix algebras, given by its block sizes."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise ValueError("multimatrix algebra needs at least one block")
        if any(m < 1 for m in self.blocks):
            raise ValueError(f"block sizes must be >= 1, got {self.blocks}")
        object.__setattr__(self, "blocks", tuple(int(m) for m in self.blocks))

    @property
    def total_dim(self) -> int:
        """Length of an element's coefficient vector, sum of m_t^2."""
        return int(sum(m * m for m in self.blocks))

    @property
    def rep_dim(self) -> int:
        """Dimension of the block-diagonal faithful representation."""
        return int(sum(self.blocks))

    def element(self, mats: Sequence[np.ndarray]) -> AlgebraElement:
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if len(mats) != len(self.blocks):
            raise ValueError("wrong number of blocks")
        for m, size in zip(mats, self.blocks):
            if m.shape != (size, size):
                raise ValueError(f"block shape {m.shape} does not match size {size}")
        return AlgebraElement(self, tuple(_freeze(m) for m in mats))

    def zero(self) -> AlgebraElement:
        return self.element([np.zeros((m, m)) for m in self.blocks])

    def identity(self) -> AlgebraElement:
        return self.element([np.eye(m) for m in self.blocks])

    def from_vector(self, vec: np.ndarray) -> AlgebraElement:
        vec = np.asarray(vec, dtype=complex).ravel()
        if vec.size != self.total_dim:
            raise ValueError("coefficient vector has wrong length")
        mats, ofs = [], 0
        for m in self.blocks:
            mats.append(vec[ofs:ofs + m * m].reshape(m, m))
            ofs += m * m
        return self.element(mats)

    def basis(self) -> list[AlgebraElement]:
        """Matrix units e^t_{ij}, ordered block by block, row-major."""
        out = []
        for t, m in enumerate(self.blocks):
            for i in range(m):
                for j in range(m):
                    mats = [np.zeros((s, s)) for s in self.blocks]
                    mats[t][i, j] = 1.0
                    out.append(self.element(mats))
        return out

    def matrix_unit(self, t: int, i: int, j: int) -> AlgebraElement:
        mats = [np.zeros((s, s)) for s in self.blocks]
        mats[t][i, j] = 1.0
        return self.element(mats)

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> AlgebraElement:
        mats = []
        for m in self.blocks:
            a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            if hermitian:
                a = (a + a.conj().T) / 2
            mats.append(a)
        return self.element(mats)

    def embed_block_diagonal(self, x: AlgebraElement) -> np.ndarray:
        """Faithful representation of x as one block-diagonal rep_dim matrix."""
        n = self.rep_dim
        out = np.zeros((n, n), dtype=complex)
        ofs = 0
        for mat, m in zip(x.data, self.blocks):
            out[ofs:ofs + m, ofs:ofs + m] = mat
            ofs += m
        return out


@dataclass(frozen=True)
class AlgebraElement:
    """An element of a multimatrix algebra, one matrix per block."""

    parent: MultiMatrixAlgebra
    data: tuple[np.ndarray, ...]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([m.ravel() for m in self.data])

    def adjoint(self) -> AlgebraElement:
        return self.parent.element([m.conj().T for m in self.data])

    @property
    def star(self) -> AlgebraElement:
        return self.adjoint()

    def norm(self) -> float:
        """Operator norm: the largest singular value over all blocks."""
        return max(float(abs(m[0, 0])) if m.shape == (1, 1)
                   else float(np.linalg.norm(m, ord=2)) for m in self.data)

    def trace_vector(self) -> np.ndarray:
        return np.array([np.trace(m) for m in self.data])

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return (self - self.adjoint()).norm() <= tol

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        self._check_parent(other)
        return self.parent.element([a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        self._check_parent(other)
        return self.parent.element([a - b for a, b in zip(self.data, other.data)])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check_parent(other)
            return self.parent.element([a @ b for a, b in zip(self.data, other.data)])
        return self.parent.element([other * a for a in self.data])

    def __rmul__(self, scalar) -> AlgebraElement:
        return self.parent.element([scalar * a for a in self.data])

    def __neg__(self) -> AlgebraElement:
        return self.parent.element([-a for a in self.data])

    def _check_parent(self, other: AlgebraElement):
        if other.parent.blocks != self.parent.blocks:
            raise ValueError("elements live in different algebras")


@dataclass(frozen=True)
class StarHomomorphism:
    """A unital *-homomorphism between multimatrix algebras.

    ``matrix`` acts on coefficient vectors, shape (target.total_dim,
    source.total_dim).  Validity (unital, multiplicative, star-preserving)
    is checked on the matrix-unit basis by :meth:`check`.
    """

    source: MultiMatrixAlgebra
    target: MultiMatrixAlgebra
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.target.total_dim, self.source.total_dim):
            raise ValueError(f"homomorphism matrix has shape {mat.shape}, "
                             f"expected {(self.target.total_dim, self.source.total_dim)}")
        object.__setattr__(self, "matrix", _freeze(mat))

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.parent.blocks != self.source.blocks:
            raise ValueError("element is not in the source algebra")
        return self.target.from_vector(self.matrix @ x.to_vector())

    def compose(self, inner: StarHomomorphism) -> StarHomomorphism:
        """self after inner."""
        if inner.target.blocks != self.source.blocks:
            raise ValueError("composition mismatch")
        return StarHomomorphism(inner.source, self.target, self.matrix @ inner.matrix)

    def image_basis(self) -> list[AlgebraElement]:
        return [self(e) for e in self.source.basis()]

    def check(self, tol: float = DEFAULT_TOL) -> bool:
        """Unital, multiplicative, adjoint-preserving on a spanning set.

        Multiplicativity phi(e x) = phi(e) phi(x) for all x is the matrix
        identity phi L_e = L_{phi(e)} phi, checked per basis element e.
        """
        if (self(self.source.identity()) - self.target.identity()).norm() > tol:
            return False
        for e in self.source.basis():
            fe = self(e)
            if (self(e.adjoint()) - fe.adjoint()).norm() > tol:
                return False
            lhs = self.matrix @ left_mult_matrix(e)
            rhs = left_mult_matrix(fe) @ self.matrix
            if float(np.max(np.abs(lhs - rhs))) > tol:
                return False
        return True


def identity_homomorphism(algebra: MultiMatrixAlgebra) -> StarHomomorphism:
    return StarHomomorphism(algebra, algebra, np.eye(algebra.total_dim))


def left_mult_matrix(x: AlgebraElement) -> np.ndarray:
    """Matrix of y -> x y on coefficient vectors (row-major convention)."""
    blocks = [mat if m == 1 else np.kron(mat, np.eye(m))
              for mat, m in zip(x.data, x.parent.blocks)]
    return _block_diag(blocks)


def right_mult_matrix(x: AlgebraElement) -> np.ndarray:
    """Matrix of y -> y x on coefficient vectors (row-major convention)."""
    blocks = [mat if m == 1 else np.kron(np.eye(m), mat.T)
              for mat, m in zip(x.data, x.parent.blocks)]
    return _block_diag(blocks)


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    ofs = 0
    for b in blocks:
        k = b.shape[0]
        out[ofs:ofs + k, ofs:ofs + k] = b
        ofs += k
    return out


@dataclass(frozen=True)
class TraceWeights:
    """Faithful positive trace tau(x) = sum_t w_t tr(x_t), all w_t > 0."""

    algebra: MultiMatrixAlgebra
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.algebra.blocks):
            raise ValueError("one weight per block required")
        if any(w <= 0 for w in self.weights):
            raise ValueError("trace weights must be strictly positive")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def __call__(self, x: AlgebraElement) -> complex:
        return complex(sum(w * np.trace(m) for w, m in zip(self.weights, x.data)))

    def coordinate_weights(self) -> np.ndarray:
        """Diagonal of the GNS Gram matrix in the matrix-unit basis."""
        return np.concatenate([np.full(m * m, w) for w, m in
                               zip(self.weights, self.algebra.blocks)])

    @staticmethod
    def normalized(algebra: MultiMatrixAlgebra) -> TraceWeights:
        """The tracial state with equal block weights summing against dim."""
        n = algebra.rep_dim
        return TraceWeights(algebra, tuple(1.0 / n for _ in algebra.blocks))


def is_positive(x: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """True iff x = x* and every block's minimum eigenvalue is >= -tol.

    Raises ValueError on non-self-adjoint input: positivity of a
    non-Hermitian element is a caller bug, not a falsy answer.
    """
    if not x.is_hermitian(tol):
        raise ValueError("is_positive called on a non-self-adjoint element")
    for m in x.data:
        h = (m + m.conj().T) / 2
        if float(np.linalg.eigvalsh(h)[0]) < -tol:
            return False
    return True


def commutes_with_algebra(x: AlgebraElement, span: Iterable[AlgebraElement],
                          tol: float = DEFAULT_TOL) -> bool:
    """True iff ||[x, a]|| <= tol for every a in the spanning family."""
    return max_commutator(x, span) <= tol


def max_commutator(x: AlgebraElement, span: Iterable[AlgebraElement]) -> float:
    lx = left_mult_matrix(x)
    rx = right_mult_matrix(x)
    worst = 0.0
    for a in span:
        worst = max(worst, x.parent.from_vector((lx - rx) @ a.to_vector()).norm())
    return worst


def choi_blocks(phi: Callable[[AlgebraElement], np.ndarray],
                domain: MultiMatrixAlgebra) -> list[np.ndarray]:
    """Choi matrices of a linear map from a multimatrix algebra into M_N.

    For each domain block t of size m, returns
    ``C_t = sum_{ij} phi(e^t_{ij}) (x) e_{ij}``, an N*m by N*m Hermitian
    matrix.  phi is completely positive iff every C_t is positive
    semidefinite.
    """
    out = []
    for t, m in enumerate(domain.blocks):
        n = np.asarray(phi(domain.matrix_unit(t, 0, 0)), dtype=complex).shape[0]
        c = np.zeros((n * m, n * m), dtype=complex)
        for i in range(m):
            for j in range(m):
                img = np.asarray(phi(domain.matrix_unit(t, i, j)), dtype=complex)
                c += np.kron(img, _unit_matrix(m, i, j))
        out.append((c + c.conj().T) / 2)
    return out


def _unit_matrix(m: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((m, m))
    e[i, j] = 1.0
    return e


def choi_is_psd(c: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return float(np.linalg.eigvalsh(c)[0]) >= -tol


def group_algebra_inclusion(n: int, d: int) -> tuple[StarHomomorphism, TraceWeights]:
    """Group algebra of the order-d subgroup of Z/n inside C*(Z/n).

    Both algebras are diagonalized by the Fourier transform: C*(Z/n) is the
    n-block algebra of its characters and the subalgebra is the d-block
    algebra of characters of the order-d subgroup <n/d>.  A character k of
    Z/n restricts to the subgroup character k mod d, so the inclusion sends
    (a_0, ..., a_{d-1}) to (a_{k mod d})_{k < n}; each subalgebra character
    appears n/d times.  The trace weights are the Haar trace, 1/n per
    character.
    """
    if n < 1 or d < 1 or n % d != 0:
        raise ValueError(f"d must divide n, got n={n}, d={d}")
    sub = MultiMatrixAlgebra((1,) * d)
    big = MultiMatrixAlgebra((1,) * n)
    mat = np.zeros((n, d))
    for k in range(n):
        mat[k, k % d] = 1.0
    tau = TraceWeights(big, (1.0 / n,) * n)
    return StarHomomorphism(sub, big, mat), tau


# ---------------------------------------------------------------------------
# Structure of *-subalgebras (numerical Artin-Wedderburn decomposition)
# ---------------------------------------------------------------------------

def orthonormal_columns(vectors: Sequence[np.ndarray], rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the given vectors."""
    a = np.stack(vectors, axis=1)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > rtol * max(s[0], 1.0)))
    return u[:, :rank]


def _in_span(vec: np.ndarray, onb: np.ndarray, tol: float) -> bool:
    resid = vec - onb @ (onb.conj().T @ vec)
    return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(vec)))


def subalgebra_structure(span: Sequence[AlgebraElement],
                         tol: float = 1e-8,
                         seed: int = 0) -> StarHomomorphism:
    """Multimatrix structure of a unital *-subalgebra given by a spanning set.

    Returns a StarHomomorphism from a fresh MultiMatrixAlgebra onto the
    subalgebra spanned by ``span`` inside the ambient algebra.  Raises
    ValueError if the span is not a unital *-closed subalgebra.

    The block decomposition is computed numerically: minimal central
    projections from a generic Hermitian element of the center, then
    matrix units inside each corner via one-dimensional intertwiner
    spaces.  Deterministic for a fixed seed.
    """
    if not span:
        raise ValueError("empty spanning set")
    ambient = span[0].parent
    vecs = [x.to_vector() for x in span]
    onb = orthonormal_columns(vecs)

    one = ambient.identity()
    if not _in_span(one.to_vector(), onb, tol):
        raise ValueError("spanning set does not contain the unit")
    elems = [ambient.from_vector(onb[:, k]) for k in range(onb.shape[1])]
    for x in elems:
        if not _in_span(x.adjoint().to_vector(), onb, tol):
            raise ValueError("spanning set is not closed under adjoints")
    for x in elems:
        for y in elems:
            if not _in_span((x * y).to_vector(), onb, tol):
                raise ValueError("spanning set is not closed under products")

    rng = np.random.default_rng(seed)
    n_rep = ambient.rep_dim
    reps = [ambient.embed_block_diagonal(x) for x in elems]

    # center of the subalgebra: solve [z, x_k] = 0 for z in the span
    dim_c = len(elems)
    rows = []
    for r in reps:
        block = np.stack([(r @ s - s @ r).ravel() for s in reps], axis=1)
        rows.append(block)
    comm = np.concatenate(rows, axis=0)
    _, s, vh = np.linalg.svd(comm, full_matrices=False)
    # elements are orthonormal, so commutator singular values are O(1)
    # when genuinely nonzero; an all-roundoff spectrum means abelian
    scale = max(float(s[0]), 1.0) if s.size else 1.0
    null_dim = int(np.sum(s <= RANK_RTOL * scale)) + max(0, dim_c - len(s))
    center_coeffs = vh.conj().T[:, dim_c - null_dim:]

    # generic Hermitian central element; its spectral clusters give the
    # minimal central projections
    coeffs = rng.standard_normal(null_dim) + 1j * rng.standard_normal(null_dim)
    z = np.zeros((n_rep, n_rep), dtype=complex)
    for c, r in zip(center_coeffs @ coeffs, reps):
        z += c * r
    z = (z + z.conj().T) / 2
    evals, evecs = np.linalg.eigh(z)
    clusters = _cluster(evals, tol=1e-6 * max(1.0, float(np.abs(evals).max())))

    central_projs = []
    for idx in clusters:
        v = evecs[:, idx]
        central_projs.append(v @ v.conj().T)

    # matrix units per central block
    blocks: list[int] = []
    unit_reps: list[list[np.ndarray]] = []
    for p in central_projs:
        corner = [p @ r @ p for r in reps]
        corner_onb = orthonormal_columns([c.ravel() for c in corner])
        k2 = corner_onb.shape[1]
        k = int(round(np.sqrt(k2)))
        if k * k != k2:
            raise ValueError("corner dimension is not a perfect square; "
                             "spanning set is not a *-subalgebra")
        units = _corner_matrix_units(corner_onb, p, k, n_rep, rng)
        blocks.append(k)
        unit_reps.append(units)

    order = sorted(range(len(blocks)), key=lambda s_: (blocks[s_], s_))
    blocks = [blocks[s_] for s_ in order]
    unit_reps = [unit_reps[s_] for s_ in order]

    abstract = MultiMatrixAlgebra(tuple(blocks))
    cols = []
    for units in unit_reps:
        for u in units:
            cols.append(_rep_to_vector(ambient, u))
    matrix = np.stack(cols, axis=1)
    hom = StarHomomorphism(abstract, ambient, matrix)
    if not hom.check(max(tol, 1e-7)):
        raise ValueError("failed to realize spanning set as a multimatrix algebra")
    return hom


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups, current = [], [order[0]]
    for idx in order[1:]:
        if values[idx] - values[current[-1]] <= tol:
            current.append(idx)
        else:
            groups.append(np.array(current))
            current = [idx]
    groups.append(np.array(current))
    return groups


def _corner_matrix_units(corner_onb: np.ndarray, proj: np.ndarray, k: int,
                         n_rep: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Matrix units e_{ab} of a corner pCp isomorphic to M_k."""
    mats = [corner_onb[:, i].reshape(n_rep, n_rep) for i in range(corner_onb.shape[1])]
    if k == 1:
        # the corner is C p; tr(p) = multiplicity
        return [proj]

    coeffs = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
    h = np.zeros((n_rep, n_rep), dtype=complex)
    for c, m in zip(coeffs, mats):
        h += c * m
    h = (h + h.conj().T) / 2
    evals, evecs = np.linalg.eigh(h)
    # eigenvectors outside range(p) pair with eigenvalue 0 and projection 0
    active = np.abs(np.diag(evecs.conj().T @ proj @ evecs)) > 0.5
    evals, evecs = evals[active], evecs[:, active]
    clusters = _cluster(evals, tol=1e-6 * max(1.0, float(np.abs(evals).max())))
    if len(clusters) != k:
        raise ValueError("could not separate diagonal projections of a corner")
    diag_projs = []
    for idx in clusters:
        v = evecs[:, idx]
        diag_projs.append(v @ v.conj().T)

    # partial isometries v_a: q_1 -> q_a through the one-dimensional spaces
    # q_a (pCp) q_1
    isometries = [diag_projs[0]]
    for a in range(1, k):
        candidates = [diag_projs[a] @ m @ diag_projs[0] for m in mats]
        w = max(candidates, key=np.linalg.norm)
        if np.linalg.norm(w) <= 1e-10:
            raise ValueError("corner is not a full matrix algebra")
        gram = w.conj().T @ w
        lam = float(np.real(np.trace(gram)) / max(np.real(np.trace(diag_projs[0])), 1e-30))
        isometries.append(w / np.sqrt(lam))

    units = []
    for a in range(k):
        for b in range(k):
            units.append(isometries[a] @ isometries[b].conj().T)
    return units


def _rep_to_vector(algebra: MultiMatrixAlgebra, rep: np.ndarray) -> np.ndarray:
    """Coefficient vector of a block-diagonal representation matrix."""
    parts, ofs = [], 0
    for m in algebra.blocks:
        parts.append(rep[ofs:ofs + m, ofs:ofs + m].ravel())
        ofs += m
    return np.concatenate(parts)
