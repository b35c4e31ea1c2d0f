"""Closest balanced frame to a given frame in the summed-norm and squared-norm senses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import Frame, ToleranceConfig, _tol, as_frame, balance_sum, is_balanced, is_frame
from .errors import FrameError, HypothesisError, NotAFrameError, ShapeError

PERTURB_DELTA = 1e-3
PERTURB_MAX_ITER = 60


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive weights summing to one."""

    p: tuple

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        if p.size == 0 or np.any(p <= 0) or np.any(p >= 1) and p.size > 1 or abs(p.sum() - 1) > 1e-12:
            raise FrameError("weights must lie in (0, 1) and sum to 1", p=p.tolist())
        object.__setattr__(self, "p", tuple(float(x) for x in p))

    @classmethod
    def uniform(cls, K: int) -> "WeightVector":
        return cls(tuple(np.full(K, 1.0 / K)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.p)


@dataclass(frozen=True, eq=False)
class NearestBalanced:
    frame: Frame
    distance: float
    residual: float
    weights: Optional[tuple] = None

    exists = True


@dataclass(frozen=True)
class NotExists:
    """No closest balanced frame; ``infimum`` is still the best achievable value."""

    infimum: float
    reason: str
    residual: float

    exists = False


Result = Union[NearestBalanced, NotExists]


def range_residual(F, v) -> float:
    """``min_f ||T^H f - v||`` by least squares."""
    F = as_frame(F)
    v = np.asarray(v)
    if v.shape != (F.K,):
        raise ShapeError("vector must have length K", K=F.K, got=list(v.shape))
    A = F.matrix.conj().T
    x, *_ = np.linalg.lstsq(A, v.astype(np.result_type(A, v)), rcond=None)
    return float(np.linalg.norm(A @ x - v))


def in_analysis_range(F, v, tol: Optional[ToleranceConfig] = None) -> bool:
    tol = _tol(tol)
    v = np.asarray(v)
    return range_residual(F, v) <= tol.rel_tol * float(np.linalg.norm(v))


def _require_frame(F, tol):
    if not is_frame(F, tol):
        raise NotAFrameError("nearest balanced frame needs a spanning frame", d=F.d, K=F.K)


def balanced_l1_candidate(F, p) -> Frame:
    """``(f_k - p_k sum f_l)``; balanced for every p summing to one."""
    F = as_frame(F)
    p = np.asarray(p, dtype=float)
    return Frame(F.matrix - np.outer(balance_sum(F), p))


def nearest_balanced_l2(F, tol: Optional[ToleranceConfig] = None) -> Result:
    """Mean-subtracted frame, or :class:`NotExists` when e lies in im(T^H)."""
    tol = _tol(tol)
    F = as_frame(F)
    _require_frame(F, tol)
    s = balance_sum(F)
    inf = float(np.vdot(s, s).real) / F.K
    e = np.ones(F.K)
    res = range_residual(F, e)
    if res <= tol.rel_tol * math.sqrt(F.K):
        return NotExists(inf, "e_in_analysis_range", res)
    return NearestBalanced(Frame(F.matrix - s[:, None] / F.K), inf, res, tuple(np.full(F.K, 1.0 / F.K)))


def perturb_weights(F, p, tol: Optional[ToleranceConfig] = None) -> tuple:
    """Move p off im(T^H) while staying in the open simplex.

    Mass ``delta`` is moved from the largest weight to another index; the
    receiving index cycles through the others in ascending-weight order so a
    direction lying inside im(T^H) cannot trap the search.  ``delta`` is
    halved whenever a move would leave the simplex.
    """
    tol = _tol(tol)
    F = as_frame(F)
    p = np.array(p, dtype=float)
    delta = PERTURB_DELTA
    attempt = 0
    for _ in range(PERTURB_MAX_ITER):
        if not in_analysis_range(F, p, tol):
            return p, True
        i = int(np.argmax(p))
        others = [j for j in np.argsort(p, kind="stable") if j != i]
        j = int(others[attempt % len(others)])
        attempt += 1
        q = p.copy()
        q[i] -= delta
        q[j] += delta
        if np.all(q > 0) and np.all(q < 1):
            p = q
        else:
            delta /= 2
    return p, not in_analysis_range(F, p, tol)


def nearest_balanced_l1(F, p=None, tol: Optional[ToleranceConfig] = None) -> Result:
    """A minimizer ``(f_k - p_k sum f_l)`` of the summed distance, or :class:`NotExists` for a basis."""
    tol = _tol(tol)
    F = as_frame(F)
    _require_frame(F, tol)
    s = balance_sum(F)
    inf = float(np.linalg.norm(s))
    if F.K == F.d:
        return NotExists(inf, "basis", 0.0)
    w = WeightVector.uniform(F.K) if p is None else (p if isinstance(p, WeightVector) else WeightVector(tuple(p)))
    q, ok = perturb_weights(F, w.array, tol)
    if not ok:
        raise FrameError("could not move weights off the analysis range", p=q.tolist())
    res = range_residual(F, q)
    return NearestBalanced(balanced_l1_candidate(F, q), inf, res, tuple(q.tolist()))


def weights_valid(F, p, tol: Optional[ToleranceConfig] = None) -> bool:
    """Whether ``(f_k - p_k sum f_l)`` still spans: true iff p is not in im(T^H)."""
    return not in_analysis_range(F, p, tol)


def candidate_rank(F, p, tol: Optional[ToleranceConfig] = None) -> int:
    """Rank of the candidate, with the singular value cutoff scaled by ||T_F||."""
    F = as_frame(F)
    A = balanced_l1_candidate(F, p).matrix
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    scale = float(np.linalg.norm(F.matrix, 2))
    return int(np.sum(s > _tol(tol).rank_tol * scale))


def l1_frame_distance(F, G) -> float:
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("frames must have equal shapes", F=list(F.shape), G=list(G.shape))
    return float(np.linalg.norm(F.matrix - G.matrix, axis=0).sum())


def l2_frame_distance(F, G) -> float:
    """Squared Frobenius distance ``sum ||f_k - g_k||^2``."""
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("frames must have equal shapes", F=list(F.shape), G=list(G.shape))
    D = F.matrix - G.matrix
    return float(np.vdot(D, D).real)


def _spanning_after_delete(F, tol) -> int:
    for j in range(F.K):
        if is_frame(F.delete(j), tol):
            return j
    raise HypothesisError("every vector is needed to span; F is a basis")


def l2_refuter(F, G, tol: Optional[ToleranceConfig] = None) -> Frame:
    """Given a balanced frame G, return a balanced frame strictly closer to F.

    Applies when e lies in im(T_F^H), so no closest balanced frame exists.
    Some f_j can be dropped without losing spanning; it is scaled by
    ``eps`` with ``|1 - eps|`` half the admissible bound and the result is
    mean-subtracted.  Its squared distance to F is
    ``|1-eps|^2 (1 - 1/K) ||f_j||^2 + ||sum f||^2 / K``.
    """
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("candidate must match F's shape", F=list(F.shape), G=list(G.shape))
    _require_frame(F, tol)
    if not is_balanced(G, tol):
        raise HypothesisError("candidate is not balanced")
    K = F.K
    j = _spanning_after_delete(F, tol)
    s = balance_sum(F)
    inf = float(np.vdot(s, s).real) / K
    gap = l2_frame_distance(F, G) - inf
    if gap <= 0:
        raise HypothesisError("candidate already attains the infimum", gap=gap)
    fj = float(np.linalg.norm(F.matrix[:, j]))
    t = 0.5 * math.sqrt(gap / (1 - 1 / K)) / fj
    eps = 1 - min(t, 0.5)
    T = np.array(F.matrix)
    T[:, j] *= eps
    T = T - T.sum(axis=1, keepdims=True) / K
    return Frame(T)
