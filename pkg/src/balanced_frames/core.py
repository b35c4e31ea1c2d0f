"""Frame data model, operator calculus and predicates.

A frame is stored as its synthesis matrix ``T`` of shape ``(d, K)``: column
``k`` is the frame vector ``f_k``.  The inner product is linear in the first
argument and conjugate-linear in the second, so the analysis coefficients of
``f`` are ``T^H f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CombinatorialGuardError, FrameError, HypothesisError, NotAFrameError, ShapeError

ArrayLike = Union[np.ndarray, Sequence]

MAX_SUBSETS = 10**6
PROBE_SEED = 20240521


@dataclass(frozen=True)
class ToleranceConfig:
    """Zero-test tolerances.

    ``rel_tol`` scales every "is this zero" test, ``rank_tol`` is the singular
    value cutoff relative to the largest singular value.
    """

    rel_tol: float = 1e-9
    rank_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rel_tol", "rank_tol"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")


DEFAULT_TOL = ToleranceConfig()


def _tol(tol: Optional[ToleranceConfig]) -> ToleranceConfig:
    return DEFAULT_TOL if tol is None else tol


@dataclass(frozen=True, eq=False)
class Frame:
    """A finite sequence of K vectors in R^d or C^d, held as a d x K matrix.

    The matrix is copied and made read-only on construction.  ``field`` is
    inferred from the dtype unless given; asking for ``"real"`` with
    non-zero imaginary parts is an error.  ``d = 0`` is allowed so that the
    B-complement of a simplex frame (K zero vectors spanning {0}) can be
    represented.
    """

    matrix: np.ndarray
    field: str = field(default="")

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim == 1:
            m = m.reshape(1, -1)
        if m.ndim != 2:
            raise ShapeError("frame matrix must be 2-dimensional", ndim=int(m.ndim))
        if m.shape[1] < 1:
            raise ShapeError("a frame needs at least one vector", shape=list(m.shape))
        fld = self.field or ("complex" if np.iscomplexobj(m) else "real")
        if fld not in ("real", "complex"):
            raise FrameError(f"unknown field {fld!r}")
        if fld == "real":
            if np.iscomplexobj(m):
                if np.any(m.imag != 0):
                    raise FrameError("field='real' but the matrix has imaginary parts")
                m = m.real
            m = np.array(m, dtype=float)
        else:
            m = np.array(m, dtype=complex)
        if not np.all(np.isfinite(m)):
            raise FrameError("frame entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "field", fld)

    @classmethod
    def from_columns(cls, columns: Iterable[ArrayLike], field: str = "") -> "Frame":
        cols = [np.atleast_1d(np.asarray(c)) for c in columns]
        return cls(np.column_stack(cols), field=field)

    @property
    def T(self) -> np.ndarray:
        """Synthesis matrix (alias of ``matrix``)."""
        return self.matrix

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def K(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    def __len__(self):
        return self.K

    def __getitem__(self, k) -> np.ndarray:
        return self.matrix[:, k].copy()

    def __iter__(self):
        for k in range(self.K):
            yield self.matrix[:, k].copy()

    def __repr__(self):
        return f"Frame(field={self.field!r}, d={self.d}, K={self.K})"

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.matrix, axis=0)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other = as_frame(other)
        return self.shape == other.shape and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))

    def conj(self) -> "Frame":
        return Frame(self.matrix.conj(), field=self.field)

    def scaled(self, a) -> "Frame":
        return Frame(a * self.matrix)

    def transformed(self, A: ArrayLike) -> "Frame":
        """Return ``A F``, i.e. ``(A f_k)``."""
        return Frame(np.asarray(A) @ self.matrix)

    def delete(self, index: int) -> "Frame":
        if not -self.K <= index < self.K:
            raise FrameError("index out of range", index=index, K=self.K)
        if self.K == 1:
            raise FrameError("cannot delete the only vector")
        return Frame(np.delete(self.matrix, index, axis=1), field=self.field)

    def union(self, other: "Frame") -> "Frame":
        other = as_frame(other)
        if other.d != self.d:
            raise ShapeError("union needs frames in the same space", d1=self.d, d2=other.d)
        return Frame(np.hstack([self.matrix, other.matrix]))


def as_frame(x) -> Frame:
    return x if isinstance(x, Frame) else Frame(np.asarray(x))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """K x K matrix of pairwise inner products, entry (k, l) = <f_l, f_k>."""

    entries: np.ndarray

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    @property
    def e(self) -> np.ndarray:
        return np.ones(self.K)

    def apply_e(self) -> np.ndarray:
        return self.entries @ self.e

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: tuple
    lower_bound: float
    upper_bound: float
    tight_constant: Optional[float] = None

    @property
    def is_tight(self) -> bool:
        return self.tight_constant is not None


# ---------------------------------------------------------------- operators


def synthesis_apply(F, c: ArrayLike) -> np.ndarray:
    F = as_frame(F)
    c = np.asarray(c)
    if c.shape != (F.K,):
        raise ShapeError("coefficient vector must have length K", K=F.K, got=list(c.shape))
    return F.matrix @ c


def analysis_apply(F, f: ArrayLike) -> np.ndarray:
    """Return the frame coefficients ``(<f, f_k>)_k``."""
    F = as_frame(F)
    f = np.asarray(f)
    if f.shape != (F.d,):
        raise ShapeError("signal must have dimension d", d=F.d, got=list(f.shape))
    return F.matrix.conj().T @ f


def frame_operator(F) -> np.ndarray:
    T = as_frame(F).matrix
    S = T @ T.conj().T
    return (S + S.conj().T) / 2


def gram(F) -> GramMatrix:
    T = as_frame(F).matrix
    G = T.conj().T @ T
    return GramMatrix((G + G.conj().T) / 2)


def balance_sum(F) -> np.ndarray:
    return as_frame(F).matrix.sum(axis=1)


def _scale(F: Frame) -> float:
    norms = F.norms()
    return max(1.0, float(norms.max())) if norms.size else 1.0


def singular_values(F) -> np.ndarray:
    T = as_frame(F).matrix
    if T.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(T, compute_uv=False)


def numerical_rank(A: np.ndarray, rank_tol: float) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def spectral(F, tol: Optional[ToleranceConfig] = None) -> SpectralData:
    tol = _tol(tol)
    F = as_frame(F)
    if F.d == 0:
        return SpectralData((), 0.0, 0.0, None)
    lam = np.clip(np.linalg.eigvalsh(frame_operator(F)), 0.0, None)
    top = float(lam[-1])
    lam[lam <= tol.rank_tol * top] = 0.0
    lo = float(lam[0])
    const = None
    if top > 0 and top - lo <= tol.rel_tol * top:
        const = float(lam.mean())
    return SpectralData(tuple(float(x) for x in lam), lo, top, const)


# --------------------------------------------------------------- predicates


def is_balanced(F, tol: Optional[ToleranceConfig] = None) -> bool:
    tol = _tol(tol)
    F = as_frame(F)
    return bool(np.linalg.norm(balance_sum(F)) <= tol.rel_tol * _scale(F))


def is_frame(F, tol: Optional[ToleranceConfig] = None) -> bool:
    """True iff the vectors span the whole space (rank of T equals d)."""
    tol = _tol(tol)
    F = as_frame(F)
    return numerical_rank(F.matrix, tol.rank_tol) == F.d


def is_tight(F, tol: Optional[ToleranceConfig] = None) -> bool:
    return is_frame(F, tol) and spectral(F, tol).is_tight


def tight_constant(F, tol: Optional[ToleranceConfig] = None) -> Optional[float]:
    return spectral(F, tol).tight_constant if is_frame(F, tol) else None


def is_parseval(F, tol: Optional[ToleranceConfig] = None) -> bool:
    c = tight_constant(F, tol)
    return c is not None and abs(c - 1.0) <= _tol(tol).rel_tol


def is_equal_norm(F, tol: Optional[ToleranceConfig] = None) -> bool:
    norms = as_frame(F).norms()
    top = float(norms.max())
    return bool(top - norms.min() <= _tol(tol).rel_tol * max(top, 1.0))


def is_unit_norm(F, tol: Optional[ToleranceConfig] = None) -> bool:
    return bool(np.all(np.abs(as_frame(F).norms() - 1.0) <= _tol(tol).rel_tol))


def isogonal_value(F, tol: Optional[ToleranceConfig] = None):
    """Common off-diagonal Gram value if F is isogonal, else ``None``.

    The test compares complex entries, but a common value is necessarily
    real: G is Hermitian, so G_lk = conj(G_kl) forces a = conj(a).
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not is_equal_norm(F, tol):
        return None
    if F.K == 1:
        return 0.0
    G = gram(F).entries
    off = G[~np.eye(F.K, dtype=bool)]
    a = off.mean()
    scale = max(float(np.abs(np.diag(G)).max()), 1.0)
    if np.max(np.abs(off - a)) > tol.rel_tol * scale:
        return None
    return float(np.real(a))


def is_isogonal(F, tol: Optional[ToleranceConfig] = None) -> bool:
    return isogonal_value(F, tol) is not None


def is_real(F, tol: Optional[ToleranceConfig] = None) -> bool:
    """Real in the Gram sense: the Gram matrix has no imaginary part."""
    G = gram(F).entries
    if not np.iscomplexobj(G):
        return True
    scale = max(float(np.abs(G).max()), 1.0)
    return bool(np.abs(G.imag).max() <= _tol(tol).rel_tol * scale)


def is_simplex(F, tol: Optional[ToleranceConfig] = None) -> bool:
    F = as_frame(F)
    target = np.eye(F.K) - np.ones((F.K, F.K)) / F.K
    return bool(np.max(np.abs(gram(F).entries - target)) <= _tol(tol).rel_tol)


def is_buntf(F, tol: Optional[ToleranceConfig] = None, on_span: bool = False) -> bool:
    """Balanced unit-norm tight frame test.

    With ``on_span=True`` tightness is judged on the span of the vectors
    (the non-zero eigenvalues of S must coincide), which is how components
    of a frame graph are tested.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not (is_balanced(F, tol) and is_unit_norm(F, tol)):
        return False
    if not on_span:
        return is_tight(F, tol)
    lam = np.array(spectral(F, tol).eigenvalues)
    nz = lam[lam > 0]
    return nz.size > 0 and bool(nz.max() - nz.min() <= tol.rel_tol * nz.max())


def is_maximally_robust(F, tol: Optional[ToleranceConfig] = None) -> bool:
    """Every d-subset is a basis.  Exhaustive; guarded at 10^6 subsets."""
    tol = _tol(tol)
    F = as_frame(F)
    d, K = F.shape
    if K < d:
        return False
    n = math.comb(K, d)
    if n > MAX_SUBSETS:
        raise CombinatorialGuardError("too many subsets to test exhaustively", subsets=n, limit=MAX_SUBSETS)
    T = F.matrix
    chunk = []
    for idx in combinations(range(K), d):
        chunk.append(idx)
        if len(chunk) == 4096:
            if not _all_subsets_full_rank(T, chunk, tol):
                return False
            chunk = []
    return not chunk or _all_subsets_full_rank(T, chunk, tol)


def _all_subsets_full_rank(T, subsets, tol) -> bool:
    blocks = T[:, np.array(subsets)].transpose(1, 0, 2)  # (n, d, d)
    s = np.linalg.svd(blocks, compute_uv=False)
    top = s[:, 0]
    return bool(np.all((top > 0) & (s[:, -1] > tol.rank_tol * top)))


# ------------------------------------------------------ derived frames


def frame_operator_power(F, power: float, tol: Optional[ToleranceConfig] = None) -> np.ndarray:
    """S^power via the Hermitian eigendecomposition of S.

    Refuses when the smallest eigenvalue is at or below rank_tol times the
    largest, i.e. when F does not numerically span.
    """
    tol = _tol(tol)
    lam, V = np.linalg.eigh(frame_operator(F))
    if lam.size == 0 or lam[-1] <= 0 or lam[0] <= tol.rank_tol * lam[-1]:
        raise NotAFrameError("frame operator is not invertible", lambda_min=float(lam[0]) if lam.size else 0.0)
    return (V * lam**power) @ V.conj().T


def canonical_parseval(F, tol: Optional[ToleranceConfig] = None) -> Frame:
    """``S^{-1/2} F``, the canonical Parseval frame associated with F."""
    F = as_frame(F)
    return Frame(frame_operator_power(F, -0.5, tol) @ F.matrix)


def analysis_projection(F, tol: Optional[ToleranceConfig] = None) -> np.ndarray:
    """Orthogonal projection ``T^H S^{-1} T`` onto the analysis range of F."""
    F = as_frame(F)
    T = F.matrix
    P = T.conj().T @ np.linalg.solve(frame_operator(F), T) if is_frame(F, tol) else _range_projector(T.conj().T, tol)
    return (P + P.conj().T) / 2


def _range_projector(A: np.ndarray, tol) -> np.ndarray:
    tol = _tol(tol)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol.rank_tol * s[0])) if s.size and s[0] > 0 else 0
    Q = U[:, :r]
    return Q @ Q.conj().T


def frame_from_gram(G: ArrayLike, d: Optional[int] = None, tol: Optional[ToleranceConfig] = None) -> Frame:
    """Realize a frame whose Gram matrix is the Hermitian PSD matrix ``G``.

    Rows of the result are ``sqrt(lambda_i) v_i^H`` for the ``d`` largest
    eigenpairs of G.  Any other realization differs by a unitary.
    """
    tol = _tol(tol)
    G = np.asarray(G)
    G = (G + G.conj().T) / 2
    lam, V = np.linalg.eigh(G)
    lam, V = lam[::-1], V[:, ::-1]
    if d is None:
        top = max(float(lam[0]), 0.0)
        d = int(np.sum(lam > tol.rank_tol * top)) if top > 0 else 0
    if d > 0 and lam[d - 1] < -tol.rel_tol * max(1.0, abs(lam[0])):
        raise HypothesisError("Gram matrix is not positive semidefinite", lambda_min=float(lam[d - 1]))
    lam_d = np.clip(lam[:d], 0, None)
    T = np.sqrt(lam_d)[:, None] * V[:, :d].conj().T
    if np.iscomplexobj(T) and np.all(np.abs(T.imag) == 0):
        T = T.real
    if d == 0:
        return Frame(np.zeros((0, G.shape[0])))
    return Frame(T)


# -------------------------------------------------- balancedness audit


@dataclass(frozen=True)
class BalancedEquivalences:
    """The eight equivalent characterizations of a balanced sequence."""

    sum_zero: bool
    synthesis_of_ones_zero: bool
    gram_times_ones_zero: bool
    gram_row_sums_zero: bool
    gram_total_zero: bool
    coefficient_sums_zero: bool
    distance_identity: bool
    pairwise_distance_identity: bool

    def as_tuple(self):
        return (
            self.sum_zero,
            self.synthesis_of_ones_zero,
            self.gram_times_ones_zero,
            self.gram_row_sums_zero,
            self.gram_total_zero,
            self.coefficient_sums_zero,
            self.distance_identity,
            self.pairwise_distance_identity,
        )

    @property
    def consistent(self) -> bool:
        v = self.as_tuple()
        return all(v) or not any(v)

    def to_dict(self):
        return {k: bool(getattr(self, k)) for k in self.__dataclass_fields__}


def probe_vectors(d: int, field: str = "real", seed: int = PROBE_SEED) -> np.ndarray:
    """Standard basis plus d seeded random unit vectors, as columns.

    For complex spaces each probe is also included multiplied by i, so that
    identities involving only real parts of inner products pin down the
    imaginary parts too.
    """
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((d, d))
    if field == "complex":
        R = R + 1j * rng.standard_normal((d, d))
    R = R / np.linalg.norm(R, axis=0)
    P = np.hstack([np.eye(d), R])
    if field == "complex":
        P = np.hstack([P, 1j * P])
    return P


def _cancels(total, terms, rel_tol) -> bool:
    """A sum counts as zero when it is tiny relative to the size of its terms."""
    return bool(abs(total) <= rel_tol * terms)


def check_balanced_equivalences(F, tol: Optional[ToleranceConfig] = None) -> BalancedEquivalences:
    """Evaluate each characterization of balancedness independently.

    (1) uses :func:`is_balanced`; the others are cancellation tests, each
    comparing the computed quantity against ``rel_tol`` times the magnitude
    of the terms that produce it.  Universally-quantified items run over
    :func:`probe_vectors`.
    """
    tol = _tol(tol)
    F = as_frame(F)
    T = F.matrix
    K = F.K
    rt = tol.rel_tol
    e = np.ones(K)
    norms2 = F.norms() ** 2
    total_norm2 = float(norms2.sum())
    G = gram(F).entries
    absG = np.abs(G)

    c1 = is_balanced(F, tol)
    Te = T @ e
    c2 = _cancels(np.linalg.norm(Te), float(np.sqrt(norms2).sum()), rt)
    Ge = G @ e
    c3 = _cancels(np.linalg.norm(Ge), float(np.linalg.norm(absG.sum(axis=1))), rt)
    c4 = all(_cancels(Ge[l], float(absG[l].sum()), rt) for l in range(K))
    c5 = _cancels(e @ G @ e, float(absG.sum()), rt)

    probes = probe_vectors(F.d, F.field)
    c6 = c7 = True
    for f in probes.T:
        coeffs = T.conj().T @ f
        c6 &= _cancels(coeffs.sum(), float(np.abs(coeffs).sum()), rt)
        dist = np.linalg.norm(f[:, None] - T, axis=0) ** 2
        ff = float(np.vdot(f, f).real)
        lhs, rhs = float(dist.sum()), total_norm2 + K * ff
        c7 &= _cancels(lhs - rhs, lhs + rhs, rt)

    c8 = True
    for l in range(K):
        dist = np.linalg.norm(T[:, [l]] - T, axis=0) ** 2
        lhs = float(np.delete(dist, l).sum())
        rhs = total_norm2 + K * float(norms2[l])
        c8 &= _cancels(lhs - rhs, lhs + rhs, rt)

    return BalancedEquivalences(c1, c2, c3, c4, c5, bool(c6), bool(c7), bool(c8))


def pairwise_sum_identity_residual(F) -> float:
    """Relative residual of sum_{k<k'} |f_k - f_k'|^2 + |sum f|^2 = K sum |f_k|^2."""
    F = as_frame(F)
    T = F.matrix
    K = F.K
    G = gram(F).entries
    n2 = np.real(np.diag(G))
    pair = 0.0
    for k in range(K - 1):
        pair += float((np.linalg.norm(T[:, [k]] - T[:, k + 1 :], axis=0) ** 2).sum())
    lhs = pair + float(np.linalg.norm(balance_sum(F)) ** 2)
    rhs = K * float(n2.sum())
    return abs(lhs - rhs) / max(rhs, np.finfo(float).tiny)


# --------------------------------------------------------------- Naimark


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """Orthonormal basis of F^K whose projections onto a copy of H_d give F.

    ``isometry`` embeds H_d into F^K (it is ``T^H``), ``projection`` is the
    orthogonal projection onto that copy (the Gram matrix of F) and
    ``basis`` holds the orthonormal basis ``(e_k)`` as columns.
    """

    basis: np.ndarray
    isometry: np.ndarray
    projection: np.ndarray

    def projected(self) -> np.ndarray:
        """Columns ``pi(e_k)`` in F^K coordinates."""
        return self.projection @ self.basis

    def reconstruct(self) -> Frame:
        """Pull the projected basis back to H_d coordinates."""
        return Frame(self.isometry.conj().T @ self.projected())

    def sum_of_basis(self) -> np.ndarray:
        return self.basis.sum(axis=1)


def naimark_complete(F, tol: Optional[ToleranceConfig] = None) -> NaimarkDilation:
    tol = _tol(tol)
    F = as_frame(F)
    if not is_parseval(F, tol):
        raise HypothesisError("Naimark completion needs a Parseval frame")
    if not is_balanced(F, tol):
        raise HypothesisError("balanced Naimark completion needs a balanced frame")
    V = F.matrix.conj().T
    P = gram(F).entries
    basis = np.eye(F.K, dtype=F.matrix.dtype)
    dil = NaimarkDilation(basis, V, P)
    leak = np.linalg.norm(V.conj().T @ dil.sum_of_basis())
    if leak > tol.rel_tol * max(1.0, math.sqrt(F.K)):
        raise HypothesisError("sum of basis vectors is not orthogonal to H_d", leak=float(leak))
    return dil


# ---------------------------------------------------------- frame graph


def frame_graph_components(F, tol: Optional[ToleranceConfig] = None) -> list:
    """Connected components of the frame graph as sorted index lists.

    Vertices k, l are adjacent when ``|<f_k, f_l>| > rel_tol |f_k| |f_l|``.
    """
    tol = _tol(tol)
    F = as_frame(F)
    G = gram(F).entries
    n = F.norms()
    adj = np.abs(G) > tol.rel_tol * np.outer(n, n)
    np.fill_diagonal(adj, False)
    ncomp, labels = connected_components(csr_matrix(adj.astype(np.int8)), directed=False)
    comps = [sorted(np.flatnonzero(labels == c).tolist()) for c in range(ncomp)]
    return sorted(comps, key=lambda c: c[0])


# ------------------------------------------------ spherical 2-designs, d = 2


def angle_frame(angles: ArrayLike) -> Frame:
    th = np.asarray(angles, dtype=float)
    return Frame(np.vstack([np.cos(th), np.sin(th)]))


def is_spherical_2_design_r2(angles: ArrayLike, tol: Optional[ToleranceConfig] = None) -> bool:
    """Points on the unit circle form a 2-design iff both exponential sums vanish."""
    tol = _tol(tol)
    th = np.asarray(angles, dtype=float)
    K = th.size
    s1 = np.exp(1j * th).sum()
    s2 = np.exp(2j * th).sum()
    return bool(abs(s1) <= tol.rel_tol * K and abs(s2) <= tol.rel_tol * K)
