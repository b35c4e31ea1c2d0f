"""Generators for named balanced frame families and combination / lift builders.

The combination and lift builders return a :class:`Construction`: the frame
together with a checklist of the hypotheses of the corresponding iff-theorem.
With ``strict=True`` (the default) a failing hypothesis raises
:class:`~balanced_frames.errors.HypothesisError`; with ``strict=False`` the
frame is still built so the consequences of the broken hypothesis can be
inspected.

All row / column indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    Frame,
    ToleranceConfig,
    _tol,
    as_frame,
    frame_from_gram,
    frame_operator,
    is_balanced,
    is_buntf,
    is_frame,
    is_tight,
    is_unit_norm,
)
from .errors import FrameError, HypothesisError, NotAFrameError, ShapeError


@dataclass(frozen=True, eq=False)
class Construction:
    frame: Frame
    name: str
    hypotheses: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def failed(self) -> list:
        return [k for k, ok in self.hypotheses.items() if not ok]


def _finish(name, T, hyps, strict) -> Construction:
    c = Construction(Frame(T), name, {k: bool(v) for k, v in hyps.items()})
    if strict and not c.valid:
        raise HypothesisError(f"{name}: hypotheses not satisfied", failed=c.failed)
    return c


def _close(a, b, tol) -> bool:
    return abs(a - b) <= tol.rel_tol * max(1.0, abs(b))


def _modulus_ok(x, target, tol) -> bool:
    return _close(abs(x) ** 2, target, tol)


# ---------------------------------------------------------- named families


def roots_of_unity_frame(K: int) -> Frame:
    """The K-th roots of unity as vectors of R^2."""
    if K < 3:
        raise FrameError("roots-of-unity frame needs K >= 3", K=K)
    th = 2 * np.pi * np.arange(K) / K
    return Frame(np.vstack([np.cos(th), np.sin(th)]))


def fourier_matrix(K: int) -> np.ndarray:
    k = np.arange(K)
    return np.exp(2j * np.pi * np.outer(k, k) / K) / math.sqrt(K)


def harmonic_frame(K: int, rows: Sequence[int]) -> Frame:
    """Rows ``rows`` of the unitary K x K Fourier matrix, as a frame for C^|rows|.

    Row 0 is the constant row; the frame is balanced iff it is excluded.
    """
    rows = list(rows)
    if not rows or len(set(rows)) != len(rows) or any(not 0 <= r < K for r in rows):
        raise FrameError("row indices must be distinct and in range", rows=rows, K=K)
    return Frame(fourier_matrix(K)[rows, :])


def sylvester_hadamard(order: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of order 2^m via H -> [[H, H], [H, -H]]."""
    if order < 1 or order & (order - 1):
        raise FrameError("Sylvester order must be a power of 2", order=order)
    H = np.ones((1, 1))
    while H.shape[0] < order:
        H = np.block([[H, H], [H, -H]])
    return H


def hadamard_subframe(H: np.ndarray, rows: Sequence[int]) -> Frame:
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    rows = list(rows)
    if not rows or len(set(rows)) != len(rows) or any(not 0 <= r < n for r in rows):
        raise FrameError("row indices must be distinct and in range", rows=rows, order=n)
    if not np.allclose(H @ H.T, n * np.eye(n)):
        raise FrameError("matrix is not Hadamard")
    return Frame(H[rows, :])


def cross_frame(U=None, d: Optional[int] = None, tol: Optional[ToleranceConfig] = None) -> Frame:
    """Columns u_1, -u_1, u_2, -u_2, ... for an orthonormal basis U."""
    tol = _tol(tol)
    U = np.eye(d) if U is None else np.asarray(U)
    n = U.shape[0]
    if U.shape != (n, n) or np.max(np.abs(U.conj().T @ U - np.eye(n))) > tol.rel_tol * 10:
        raise HypothesisError("U must be a square matrix with orthonormal columns")
    cols = np.empty((n, 2 * n), dtype=U.dtype)
    cols[:, 0::2] = U
    cols[:, 1::2] = -U
    return Frame(cols)


def eutactic_star(U, P, intrinsic: bool = False, tol: Optional[ToleranceConfig] = None) -> Frame:
    """Orthogonal projection of the cross of U onto im(P).

    By default the vectors stay in the ambient space (a 2-tight frame for
    im(P) only).  ``intrinsic=True`` expresses them in an orthonormal basis
    of im(P), giving an ordinary 2-tight frame of dimension rank(P).
    """
    tol = _tol(tol)
    P = np.asarray(P)
    if np.max(np.abs(P @ P - P)) > 1e-10 or np.max(np.abs(P - P.conj().T)) > 1e-10:
        raise HypothesisError("P must be an orthogonal projection")
    star = P @ cross_frame(U, tol=tol).matrix
    if not intrinsic:
        return Frame(star)
    lam, V = np.linalg.eigh((P + P.conj().T) / 2)
    Q = V[:, lam > 0.5]
    return Frame(Q.conj().T @ star)


@dataclass(frozen=True)
class PartitionSpec:
    eta: tuple

    def __post_init__(self):
        eta = tuple(int(x) for x in self.eta)
        if not eta or eta[0] < 1 or any(a > b for a, b in zip(eta, eta[1:])):
            raise FrameError("partition must be a nondecreasing list of positive integers", eta=list(eta))
        object.__setattr__(self, "eta", eta)

    @property
    def K(self) -> int:
        return sum(self.eta)

    @property
    def n(self) -> int:
        return len(self.eta)

    @property
    def d(self) -> int:
        return self.K - self.n

    def gram(self) -> np.ndarray:
        G = np.zeros((self.K, self.K))
        i = 0
        for m in self.eta:
            G[i : i + m, i : i + m] = np.eye(m) - np.ones((m, m)) / m
            i += m
        return G


def partition_frame(spec) -> Frame:
    """Partition frame: balanced Parseval frame with block Gram I - ee^t/eta_j."""
    if not isinstance(spec, PartitionSpec):
        spec = PartitionSpec(tuple(spec))
    if spec.d < 1:
        raise FrameError("partition frame needs d = K - n >= 1", eta=list(spec.eta))
    return frame_from_gram(spec.gram(), spec.d)


def simplex_frame(d: int) -> Frame:
    """d + 1 vectors in R^d with Gram I - ee^t/(d+1)."""
    if d < 1:
        raise FrameError("simplex frame needs d >= 1", d=d)
    K = d + 1
    return frame_from_gram(np.eye(K) - np.ones((K, K)) / K, d)


def append_balancing_vector(F, tol: Optional[ToleranceConfig] = None) -> Frame:
    F = as_frame(F)
    if not is_frame(F, tol):
        raise NotAFrameError("input must span")
    return Frame(np.hstack([F.matrix, -F.matrix.sum(axis=1, keepdims=True)]))


# ---------------------------------------------------- combination builders


def disjoint_union(F, G, tol=None, strict: bool = False) -> Construction:
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    (d1, K), (d2, L) = F.shape, G.shape
    T = np.zeros((d1 + d2, K + L), dtype=np.result_type(F.matrix, G.matrix))
    T[:d1, :K] = F.matrix
    T[d1:, K:] = G.matrix
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "equal_redundancy": _close(K / d1, L / d2, tol),
    }
    return _finish("disjoint_union", T, hyps, strict)


def cross_gramian(F, G) -> np.ndarray:
    """``T_F T_G^H``."""
    return as_frame(F).matrix @ as_frame(G).matrix.conj().T


def inner_direct_sum(F, G, alpha=None, beta=None, tol=None, strict: bool = False) -> Construction:
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    if F.K != G.K:
        raise ShapeError("inner direct sum needs equally many vectors", K1=F.K, K2=G.K)
    d1, d2 = F.d, G.d
    alpha = math.sqrt(d1 / (d1 + d2)) if alpha is None else alpha
    beta = math.sqrt(d2 / (d1 + d2)) if beta is None else beta
    T = np.vstack([alpha * F.matrix, beta * G.matrix])
    X = cross_gramian(F, G)
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "cross_gramian_zero": np.max(np.abs(X)) <= tol.rel_tol * max(1.0, F.K),
        "alpha_modulus": _modulus_ok(alpha, d1 / (d1 + d2), tol),
        "beta_modulus": _modulus_ok(beta, d2 / (d1 + d2), tol),
        "K_at_least_d1_plus_d2": F.K >= d1 + d2,
    }
    return _finish("inner_direct_sum", T, hyps, strict)


def sum_combine(F, G, alpha=None, beta=None, tol=None, strict: bool = False) -> Construction:
    """All K*L vectors (alpha f_k, beta g_l), ordered with l varying fastest."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    (d1, K), (d2, L) = F.shape, G.shape
    alpha = math.sqrt(d1 / (d1 + d2)) if alpha is None else alpha
    beta = math.sqrt(d2 / (d1 + d2)) if beta is None else beta
    top = np.repeat(alpha * F.matrix, L, axis=1)
    bottom = np.tile(beta * G.matrix, (1, K))
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "alpha_modulus": _modulus_ok(alpha, d1 / (d1 + d2), tol),
        "beta_modulus": _modulus_ok(beta, d2 / (d1 + d2), tol),
    }
    return _finish("sum", np.vstack([top, bottom]), hyps, strict)


def tensor_product(F, G, tol=None, strict: bool = False) -> Construction:
    """Columns f_j (x) g_l, ordered with l varying fastest."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    cols = [np.kron(f, g) for f in F for g in G]
    prods = np.outer(F.norms(), G.norms())
    hyps = {
        "F_is_tight": is_tight(F, tol),
        "G_is_tight": is_tight(G, tol),
        "F_or_G_balanced": is_balanced(F, tol) or is_balanced(G, tol),
        "norm_products_one": bool(np.all(np.abs(prods - 1) <= tol.rel_tol)),
    }
    return _finish("tensor_product", np.column_stack(cols), hyps, strict)


# -------------------------------------------------------------- lifts


def lift_append_antipodal_point(F, alpha=None, beta=None, tol=None, strict: bool = True) -> Construction:
    """Columns (alpha f_k, beta) plus (0, -1) in H_d (+) R.

    The one-dimensional factor uses h = 1, so the appended point is y = -h.
    """
    tol = _tol(tol)
    F = as_frame(F)
    d1, K = F.shape
    alpha = math.sqrt(1 - 1 / K**2) if alpha is None else alpha
    beta = 1 / K if beta is None else beta
    top = np.hstack([alpha * F.matrix, np.zeros((d1, 1))])
    bottom = np.hstack([np.full((1, K), beta, dtype=np.result_type(beta, float)), [[-1.0]]])
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "K_eq_d1_plus_1": K == d1 + 1,
        "alpha_modulus": _modulus_ok(alpha, 1 - 1 / K**2, tol),
        "beta_modulus": _modulus_ok(beta, 1 / K**2, tol),
        "y_eq_minus_K_beta_h": _close(K * beta, 1.0, tol),
    }
    return _finish("lift_append_antipodal_point", np.vstack([top, bottom]), hyps, strict)


def lift_two_antipodal(F, x=None, y=1.0, tol=None, strict: bool = True) -> Construction:
    """Columns (f_k, 0) plus (x, y) and (-x, -y) in H_d (+) R."""
    tol = _tol(tol)
    F = as_frame(F)
    d1, K = F.shape
    x = np.zeros(d1) if x is None else np.asarray(x)
    top = np.hstack([F.matrix, x[:, None], -x[:, None]])
    bottom = np.hstack([np.zeros((1, K)), [[y, -y]]])
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "x_zero": np.linalg.norm(x) <= tol.rel_tol,
        "y_unit": _close(abs(y), 1.0, tol),
        "K_eq_2d1": K == 2 * d1,
    }
    return _finish("lift_two_antipodal", np.vstack([top, bottom]), hyps, strict)


def symmetric_simple_lift(F, G, beta=None, alpha=None, tol=None, strict: bool = True) -> Construction:
    """(alpha F (+) (beta_k)) union (alpha G (+) (-beta_k)) in H_d (+) R."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    if F.shape != G.shape:
        raise ShapeError("F and G must have the same shape", F=list(F.shape), G=list(G.shape))
    d, K = F.shape
    alpha = math.sqrt(d / (d + 1)) if alpha is None else alpha
    beta = np.full(K, 1 / math.sqrt(d + 1)) if beta is None else np.broadcast_to(np.asarray(beta), (K,))
    top = np.hstack([alpha * F.matrix, alpha * G.matrix])
    bottom = np.concatenate([beta, -beta])[None, :]
    wF = F.matrix @ beta.conj()
    wG = G.matrix @ beta.conj()
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "weighted_sums_equal": np.linalg.norm(wF - wG) <= tol.rel_tol * max(1.0, K),
        "alpha_modulus": _modulus_ok(alpha, d / (d + 1), tol),
        "beta_moduli": bool(np.all(np.abs(np.abs(beta) ** 2 - 1 / (d + 1)) <= tol.rel_tol)),
    }
    return _finish("symmetric_simple_lift", np.vstack([top, bottom]), hyps, strict)


def partial_simple_lift(F, G, alpha=None, beta=None, tol=None, strict: bool = True) -> Construction:
    """(f_k, 0) union (alpha g_l, beta): a UNTF (not balanced) for H_d1 (+) R."""
    tol = _tol(tol)
    F, G = as_frame(F), as_frame(G)
    (d1, K), L = F.shape, G.K
    if G.d != d1:
        raise ShapeError("F and G must live in the same space", d1=d1, d2=G.d)
    a2 = (d1 * L - K) / ((d1 + 1) * L)
    b2 = (K + L) / ((d1 + 1) * L)
    if alpha is None:
        alpha = math.sqrt(a2) if a2 > 0 else 0.0
    beta = math.sqrt(b2) if beta is None else beta
    top = np.hstack([F.matrix, alpha * G.matrix])
    bottom = np.concatenate([np.zeros(K), np.full(L, beta)])[None, :]
    hyps = {
        "F_is_untf": is_unit_norm(F, tol) and is_tight(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "L_d1_gt_K": L * d1 > K,
        "alpha_modulus": _modulus_ok(alpha, a2, tol),
        "beta_modulus": _modulus_ok(beta, b2, tol),
    }
    return _finish("partial_simple_lift", np.vstack([top, bottom]), hyps, strict)


def symmetric_partial_lift(F, G, G_tilde, alpha=None, beta=None, tol=None, strict: bool = True) -> Construction:
    """(f_k, 0) union (alpha g_l, beta) union (alpha g~_l, -beta)."""
    tol = _tol(tol)
    F, G, Gt = as_frame(F), as_frame(G), as_frame(G_tilde)
    (d1, K), L = F.shape, G.K
    if G.shape != Gt.shape or G.d != d1:
        raise ShapeError("G and G_tilde must be d1 x L", F=list(F.shape), G=list(G.shape), G_tilde=list(Gt.shape))
    a2 = (2 * d1 * L - K) / (2 * (d1 + 1) * L)
    b2 = (2 * L + K) / (2 * (d1 + 1) * L)
    if alpha is None:
        alpha = math.sqrt(a2) if a2 > 0 else 0.0
    beta = math.sqrt(b2) if beta is None else beta
    top = np.hstack([F.matrix, alpha * G.matrix, alpha * Gt.matrix])
    bottom = np.concatenate([np.zeros(K), np.full(L, beta), np.full(L, -beta)])[None, :]
    hyps = {
        "F_is_buntf": is_buntf(F, tol),
        "G_is_buntf": is_buntf(G, tol),
        "G_tilde_is_buntf": is_buntf(Gt, tol),
        "K_lt_2d1L": K < 2 * d1 * L,
        "sums_equal": np.linalg.norm(G.matrix.sum(axis=1) - Gt.matrix.sum(axis=1)) <= tol.rel_tol * max(1.0, L),
        "alpha_modulus": _modulus_ok(alpha, a2, tol),
        "beta_modulus": _modulus_ok(beta, b2, tol),
    }
    return _finish("symmetric_partial_lift", np.vstack([top, bottom]), hyps, strict)


def multi_lift_union(frames: Sequence, betas: Sequence, alphas=None, tol=None, strict: bool = True) -> Construction:
    """Union over m of (alpha_m F_m (+) beta_m * 1) in H_d1 (+) R."""
    tol = _tol(tol)
    frames = [as_frame(F) for F in frames]
    M = len(frames)
    if M < 2:
        raise FrameError("multi-lift needs at least two frames", M=M)
    shape = frames[0].shape
    if any(F.shape != shape for F in frames):
        raise ShapeError("all frames must share d1 and K", shapes=[list(F.shape) for F in frames])
    d1, K = shape
    betas = np.asarray(betas)
    if betas.shape != (M,):
        raise ShapeError("need one beta per frame", M=M, got=list(betas.shape))
    if alphas is None:
        alphas = np.sqrt(np.clip(1 - np.abs(betas) ** 2, 0, None))
    alphas = np.asarray(alphas)
    blocks = [np.vstack([a * F.matrix, np.full((1, K), b)]) for a, b, F in zip(alphas, betas, frames)]
    hyps = {
        "frames_are_buntf": all(is_buntf(F, tol) for F in frames),
        "unit_coefficients": bool(np.all(np.abs(np.abs(alphas) ** 2 + np.abs(betas) ** 2 - 1) <= tol.rel_tol)),
        "nonzero_coefficients": bool(np.all(np.abs(alphas) > 0) and np.all(np.abs(betas) > 0)),
        "beta_sum_zero": abs(betas.sum()) <= tol.rel_tol * max(1.0, M),
        "beta_energy": _close(float(np.sum(np.abs(betas) ** 2)), M / (d1 + 1), tol),
    }
    return _finish("multi_lift_union", np.hstack(blocks), hyps, strict)


def betas_from_frame_row(F, row: int = 0) -> np.ndarray:
    """Lift coefficients taken from one row of a balanced tight frame for F^(d1+1).

    The row sums to zero because the frame is balanced; it is rescaled so
    that sum |beta_m|^2 = M / (d1 + 1), where M is the number of vectors.
    """
    F = as_frame(F)
    if not (is_balanced(F) and is_tight(F)):
        raise HypothesisError("beta row must come from a balanced tight frame")
    b = F.matrix[row].copy()
    M = F.K
    return b * math.sqrt(M / F.d) / np.linalg.norm(b)


def rotation2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def frame_claims(F, tol=None) -> dict:
    """The predicate suite a builder output is judged against."""
    tol = _tol(tol)
    F = as_frame(F)
    lam = np.linalg.eigvalsh(frame_operator(F))
    return {
        "balanced": is_balanced(F, tol),
        "unit_norm": is_unit_norm(F, tol),
        "tight": is_tight(F, tol),
        "tight_constant": float(lam.mean()) if is_tight(F, tol) else None,
    }
