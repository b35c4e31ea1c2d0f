"""Dual frames of balanced frames, erasure duals and complements."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .core import (
    Frame,
    ToleranceConfig,
    _tol,
    analysis_projection,
    as_frame,
    canonical_parseval,
    frame_operator,
    gram,
    is_balanced,
    is_frame,
    is_parseval,
)
from .errors import FrameError, HypothesisError, NotAFrameError, NotDualError, ShapeError


def canonical_dual(F, tol: Optional[ToleranceConfig] = None) -> Frame:
    F = as_frame(F)
    if not is_frame(F, tol):
        raise NotAFrameError("canonical dual needs a spanning sequence", d=F.d, K=F.K)
    return Frame(np.linalg.solve(frame_operator(F), F.matrix))


def duality_residual(F, G) -> float:
    """Largest entry of ``T_G T_F^H - I``."""
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("dual pair needs equal shapes", F=list(F.shape), G=list(G.shape))
    M = G.matrix @ F.matrix.conj().T
    return float(np.max(np.abs(M - np.eye(F.d)))) if F.d else 0.0


def is_dual_pair(F, G, tol: Optional[ToleranceConfig] = None) -> bool:
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    r = duality_residual(F, G)
    scale = max(1.0, np.linalg.norm(F.matrix, 2) * np.linalg.norm(G.matrix, 2)) if F.d else 1.0
    return r <= tol.rel_tol * scale


def _require_dual(F, G, tol):
    if not is_dual_pair(F, G, tol):
        raise NotDualError("frames are not a dual pair", residual=duality_residual(F, G))


def shifted_dual(G, g) -> Frame:
    """``(g_k + g)``: for a balanced frame this stays in the same dual class."""
    G = as_frame(G)
    return Frame(G.matrix + np.asarray(g).reshape(-1, 1))


def balanced_dual_representative(F, G, tol: Optional[ToleranceConfig] = None) -> Frame:
    """The unique balanced member ``(g_k - T_G e / K)`` of the class of G."""
    F, G = as_frame(F), as_frame(G)
    if not is_balanced(F, tol):
        raise HypothesisError("dual classes are defined for balanced frames only")
    _require_dual(F, G, tol)
    return Frame(G.matrix - G.matrix.mean(axis=1, keepdims=True))


@dataclass(frozen=True, eq=False)
class DualPerturbation:
    """``T_G = S^-1 T + R`` with ``R = W (I - T^H S^-1 T)``."""

    W: np.ndarray
    R: np.ndarray
    rank: int

    def range_residual(self, F) -> float:
        """``||R T_F^H||``, zero for every dual."""
        return float(np.linalg.norm(self.R @ as_frame(F).matrix.conj().T))

    def e_residual(self) -> float:
        return float(np.linalg.norm(self.R.sum(axis=1)))

    def W_e_residual(self) -> float:
        return float(np.linalg.norm(self.W.sum(axis=1)))


def perturbation_of(F, G, tol: Optional[ToleranceConfig] = None) -> DualPerturbation:
    """Recover R (and the representative W = R) for a dual G of F."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    _require_dual(F, G, tol)
    R = G.matrix - canonical_dual(F, tol).matrix
    return DualPerturbation(R.copy(), R, _rank_abs(R, F, tol))


def _rank_abs(R, F, tol) -> int:
    # R is often numerically zero; judge its singular values against the frame scale
    if R.size == 0:
        return 0
    s = np.linalg.svd(R, compute_uv=False)
    ref = max(1.0, float(np.linalg.norm(F.matrix, 2)))
    return int(np.sum(s > max(tol.rank_tol, 1e3 * np.finfo(float).eps) * ref * max(F.shape)))


def dual_from_W(F, W, tol: Optional[ToleranceConfig] = None) -> tuple:
    """``S^-1 T + W (I - T^H S^-1 T)`` and its perturbation record."""
    tol = _tol(tol)
    F = as_frame(F)
    W = np.asarray(W)
    if W.shape != F.shape:
        raise ShapeError("W must be d x K", expected=list(F.shape), got=list(W.shape))
    P = analysis_projection(F, tol)
    R = W @ (np.eye(F.K) - P)
    G = Frame(canonical_dual(F, tol).matrix + R)
    return G, DualPerturbation(W, R, _rank_abs(R, F, tol))


def sample_balanced_dual(F, seed: int = 0, scale: float = 1.0, tol: Optional[ToleranceConfig] = None, return_perturbation: bool = False):
    """A random balanced dual of a balanced frame.

    W has i.i.d. normal entries with its row means removed (so ``W e = 0``).
    When K = d + 1 the projector ``I - T^H S^-1 T`` is ``ee^t/K`` and every
    such W gives the canonical dual.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not is_frame(F, tol):
        raise NotAFrameError("balanced duals need a spanning frame")
    if not is_balanced(F, tol):
        raise HypothesisError("sample_balanced_dual needs a balanced frame")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal(F.shape)
    if F.is_complex:
        W = W + 1j * rng.standard_normal(F.shape)
    W = scale * (W - W.mean(axis=1, keepdims=True))
    G, pert = dual_from_W(F, W, tol)
    return (G, pert) if return_perturbation else G


def erasure_dual(F, G, index: int, tol: Optional[ToleranceConfig] = None) -> tuple:
    """Delete vector ``index`` and shift the dual: ``(f_k)_{k!=l}``, ``(g_k - g_l)_{k!=l}``.

    The pair is dual exactly when F is balanced (given ``g_l != 0``); no
    balancedness check is made here so the converse can be observed.
    """
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("frame and dual must have equal shapes", F=list(F.shape), G=list(G.shape))
    if not 0 <= index < F.K:
        raise FrameError("erasure index out of range", index=index, K=F.K)
    if F.K < 2:
        raise FrameError("cannot erase the only vector")
    _require_dual(F, G, tol)
    Tg = G.matrix - G.matrix[:, [index]]
    return F.delete(index), Frame(np.delete(Tg, index, axis=1))


def balanced_by_erasure(F, G, index: int, tol: Optional[ToleranceConfig] = None) -> bool:
    """Balancedness test through the erasure pair.

    ``sum_{k!=l} (g_k - g_l) f_k^H = I - g_l (sum f_k)^H``, so when
    ``g_l != 0`` the erasure pair is dual iff F sums to zero.
    """
    G = as_frame(G)
    if np.linalg.norm(G.matrix[:, index]) == 0:
        raise HypothesisError("test needs a nonzero dual vector at the erased index", index=index)
    Fd, Gd = erasure_dual(F, G, index, tol)
    return is_dual_pair(Fd, Gd, tol)


@dataclass(frozen=True, eq=False)
class TightDualResult:
    frame: Frame
    rho: float
    unique: bool
    s_vectors: Optional[np.ndarray] = None

    @property
    def R(self) -> Optional[np.ndarray]:
        return None if self.s_vectors is None else self.s_vectors.conj().T


def balanced_tight_dual(F, rho: float = 1.0, seed: int = 0, tol: Optional[ToleranceConfig] = None) -> TightDualResult:
    """Balanced (rho + 1)-tight dual of a balanced Parseval frame.

    For K <= 2d the only balanced tight dual is F itself and it is returned
    with ``unique=True``.  Otherwise d orthogonal vectors s_i of squared norm
    rho are chosen in ``(span{e} + im T^H)^perp`` and the rows of R are the
    conjugates ``s_i^H``; the result is ``T + R``.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not (is_parseval(F, tol) and is_balanced(F, tol)):
        raise HypothesisError("balanced_tight_dual needs a balanced Parseval frame")
    if not rho > 0:
        raise FrameError("rho must be positive", rho=rho)
    d, K = F.shape
    if K <= 2 * d:
        return TightDualResult(F, 0.0, True)
    N = null_space(np.vstack([F.matrix, np.ones((1, K))]), rcond=tol.rank_tol)
    # dim N = K - d - 1 >= d
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((N.shape[1], d))
    if F.is_complex:
        C = C + 1j * rng.standard_normal(C.shape)
    Q, _ = np.linalg.qr(N @ C)
    Svec = math.sqrt(rho) * Q
    return TightDualResult(Frame(F.matrix + Svec.conj().T), float(rho), False, Svec)


def complement(F, tol: Optional[ToleranceConfig] = None) -> Frame:
    """Complement of a Parseval frame: Gram ``I - G_F``, dimension K - d."""
    tol = _tol(tol)
    F = as_frame(F)
    if not is_parseval(F, tol):
        raise HypothesisError("complement needs a Parseval frame")
    N = null_space(F.matrix, rcond=tol.rank_tol)
    if N.shape[1] == 0:
        return Frame(np.zeros((0, F.K)))
    return Frame(N.conj().T)


def b_complement(F, tol: Optional[ToleranceConfig] = None) -> Frame:
    """B-complement of a balanced Parseval frame: Gram ``I - G_F - ee^t/K``.

    Realized by an orthonormal basis of ``ker T_F`` orthogonal to e; for a
    simplex frame this is empty and the result is K zero vectors in a
    0-dimensional space.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not (is_parseval(F, tol) and is_balanced(F, tol)):
        raise HypothesisError("b_complement needs a balanced Parseval frame")
    N = null_space(np.vstack([F.matrix, np.ones((1, F.K))]), rcond=tol.rank_tol)
    if N.shape[1] == 0:
        return Frame(np.zeros((0, F.K)))
    return Frame(N.conj().T)


@dataclass(frozen=True)
class BComplementReport:
    b_complements: bool
    ranges_split_e_perp: bool
    dims_and_cross_zero: bool
    inner_sum_balanced_frame: bool
    projector_identity: bool

    def as_tuple(self):
        return (
            self.b_complements,
            self.ranges_split_e_perp,
            self.dims_and_cross_zero,
            self.inner_sum_balanced_frame,
            self.projector_identity,
        )

    @property
    def consistent(self) -> bool:
        v = self.as_tuple()
        return all(v) or not any(v)

    def to_dict(self):
        return {k: bool(getattr(self, k)) for k in self.__dataclass_fields__}


def _parseval_gram(F, tol) -> np.ndarray:
    if F.d == 0:
        return np.zeros((F.K, F.K))
    return gram(canonical_parseval(F, tol)).entries


def check_b_complement_pair(F, G, tol: Optional[ToleranceConfig] = None) -> BComplementReport:
    """Evaluate the five equivalent descriptions of B-complementary frames."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    if F.K != G.K:
        raise ShapeError("B-complements need equally many vectors", K1=F.K, K2=G.K)
    for X in (F, G):
        if not is_balanced(X, tol) or (X.d and not is_frame(X, tol)):
            raise HypothesisError("both sequences must be balanced frames")
    K = F.K
    J = np.ones((K, K)) / K
    target = np.eye(K) - J
    rt = tol.rel_tol * 10
    GF, GG = _parseval_gram(F, tol), _parseval_gram(G, tol)
    c1 = np.max(np.abs(GF + GG - target)) <= rt

    PF = analysis_projection(F, tol) if F.d else np.zeros((K, K))
    PG = analysis_projection(G, tol) if G.d else np.zeros((K, K))
    c2 = np.max(np.abs(PF + PG - target)) <= rt

    cross = G.matrix @ F.matrix.conj().T if F.d and G.d else np.zeros((0, 0))
    scale = max(1.0, float(np.abs(F.matrix).max()) * float(np.abs(G.matrix).max()) * K) if cross.size else 1.0
    cross_zero = not cross.size or float(np.abs(cross).max()) <= tol.rel_tol * scale
    c3 = F.d + G.d == K - 1 and cross_zero

    inner = Frame(np.vstack([F.matrix, G.matrix])) if F.d + G.d else None
    c4 = (
        inner is not None
        and is_balanced(inner, tol)
        and is_frame(inner, tol)
        and K == F.d + G.d + 1
        and cross_zero
    )

    if G.d:
        M = G.matrix @ (np.eye(K) - J - PF)
        fixed = float(np.abs(M - G.matrix).max()) <= tol.rel_tol * max(1.0, float(np.abs(G.matrix).max()) * K)
        c5 = fixed and F.d + G.d == K - 1
    else:
        c5 = F.d == K - 1
    return BComplementReport(bool(c1), bool(c2), bool(c3), bool(c4), bool(c5))

