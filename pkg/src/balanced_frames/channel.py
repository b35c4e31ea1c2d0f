"""Simulated transmission of frame coefficients over a perturbing channel.

A signal f is encoded as ``c = T_F^H f``, the channel perturbs c, and the
receiver decodes with a dual ``f_hat = T_G c'``.  Monte-Carlo estimates are
split into fixed-size blocks with one seed per block, so results do not
depend on how blocks are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    Frame,
    ToleranceConfig,
    _tol,
    analysis_projection,
    as_frame,
    frame_operator,
    is_balanced,
    is_buntf,
    is_tight,
    is_unit_norm,
    spectral,
)
from .duality import canonical_dual, erasure_dual, is_dual_pair
from .errors import FrameError, HypothesisError, NotDualError

BLOCK = 1024
KINDS = ("systematic", "additive", "erasure")
DISTRIBUTIONS = ("gaussian", "uniform")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    c: complex = 0.0
    mu: float = 0.0
    sigma: float = 1.0
    distribution: str = "gaussian"
    indices: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FrameError(f"unknown noise kind {self.kind!r}", kinds=list(KINDS))
        if self.kind == "additive":
            if not self.sigma > 0:
                raise FrameError("sigma must be positive", sigma=self.sigma)
            if self.distribution not in DISTRIBUTIONS:
                raise FrameError(f"unknown distribution {self.distribution!r}")
        if self.kind == "erasure":
            idx = tuple(sorted({int(i) for i in self.indices}))
            if not idx:
                raise FrameError("erasure needs at least one index")
            object.__setattr__(self, "indices", idx)

    @classmethod
    def systematic(cls, c) -> "NoiseSpec":
        return cls("systematic", c=c)

    @classmethod
    def additive(cls, mu: float, sigma: float, distribution: str = "gaussian", seed: int = 0) -> "NoiseSpec":
        return cls("additive", mu=mu, sigma=sigma, distribution=distribution, seed=seed)

    @classmethod
    def erasure(cls, indices) -> "NoiseSpec":
        if isinstance(indices, (int, np.integer)):
            indices = (indices,)
        return cls("erasure", indices=tuple(indices))

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "NoiseSpec":
        """Parse ``systematic:c=0.5``, ``additive:mu=0.7,sigma=1,dist=gaussian`` or ``erasure:3[,5]``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind == "erasure":
            try:
                return cls.erasure(tuple(int(x) for x in rest.split(",") if x.strip()))
            except ValueError:
                raise FrameError(f"bad erasure indices {rest!r}") from None
        opts = {}
        for item in filter(None, (x.strip() for x in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise FrameError(f"expected key=value, got {item!r}")
            opts[key.strip()] = val.strip()
        try:
            if kind == "systematic":
                c = complex(opts.get("c", "0"))
                return cls.systematic(c.real if c.imag == 0 else c)
            if kind == "additive":
                return cls.additive(
                    float(opts.get("mu", 0.0)),
                    float(opts.get("sigma", 1.0)),
                    opts.get("dist", opts.get("distribution", "gaussian")),
                    int(opts.get("seed", seed)),
                )
        except ValueError as exc:
            raise FrameError(f"bad noise parameter: {exc}") from None
        raise FrameError(f"unknown noise kind {kind!r}", kinds=list(KINDS))

    def draw(self, K: int, rng: np.random.Generator, trials: Optional[int] = None) -> np.ndarray:
        """Additive noise samples with mean mu and variance sigma^2, shape (K,) or (trials, K)."""
        shape = (K,) if trials is None else (trials, K)
        if self.distribution == "gaussian":
            z = rng.standard_normal(shape)
        else:
            z = rng.uniform(-math.sqrt(3), math.sqrt(3), shape)
        return self.mu + self.sigma * z


@dataclass
class ChannelReport:
    kind: str
    reconstruction_error_l2: float
    reconstruction_error_inf: float
    coefficient_sum: complex
    bound_values: dict = field(default_factory=dict)
    bounds_hold: dict = field(default_factory=dict)
    empirical_mse: Optional[float] = None
    mse_stderr: Optional[float] = None
    detector_verdict: Optional[str] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        cs = complex(self.coefficient_sum)
        out["coefficient_sum"] = cs.real if cs.imag == 0 else [cs.real, cs.imag]
        return out


def _resolve_dual(F, dual, tol):
    if dual is None:
        return canonical_dual(F, tol), True
    G = as_frame(dual)
    if not is_dual_pair(F, G, tol):
        raise NotDualError("supplied dual does not satisfy T_G T_F^H = I")
    Gc = canonical_dual(F, tol)
    return G, bool(np.allclose(G.matrix, Gc.matrix, rtol=0, atol=1e-12 * max(1.0, np.abs(Gc.matrix).max())))


def encode(F, f) -> np.ndarray:
    return as_frame(F).matrix.conj().T @ np.asarray(f)


def decode(G, c) -> np.ndarray:
    return as_frame(G).matrix @ np.asarray(c)


def transmit(F, f, noise: NoiseSpec, dual=None, zero_fill: bool = False, tol: Optional[ToleranceConfig] = None) -> ChannelReport:
    """Encode f, perturb the coefficients according to ``noise`` and decode.

    Erasures are decoded with the erasure dual of the first erased index;
    any further erased coefficients are set to zero.  ``zero_fill=True``
    instead zeroes every erased coefficient and decodes with the original
    dual, for comparison.
    """
    tol = _tol(tol)
    F = as_frame(F)
    f = np.asarray(f)
    if f.shape != (F.d,):
        raise FrameError("signal must have dimension d", d=F.d, got=list(f.shape))
    G, canonical = _resolve_dual(F, dual, tol)
    c = encode(F, f)
    bounds, holds = {}, {}
    if noise.kind == "systematic":
        a = np.full(F.K, noise.c)
        received = c + a
        f_hat = decode(G, received)
    elif noise.kind == "additive":
        a = noise.draw(F.K, np.random.default_rng(noise.seed))
        received = c + a
        f_hat = decode(G, received)
    else:
        idx = [i for i in noise.indices]
        if any(not 0 <= i < F.K for i in idx) or len(idx) >= F.K:
            raise FrameError("erasure indices must be a proper subset of 0..K-1", indices=idx, K=F.K)
        a = None
        received = c.copy()
        received[idx] = 0
        if zero_fill:
            f_hat = decode(G, received)
        else:
            l = idx[0]
            _, Gl = erasure_dual(F, G, l, tol)
            f_hat = decode(Gl, np.delete(received, l))
    if a is not None and canonical and is_balanced(F, tol):
        mu = noise.c if noise.kind == "systematic" else noise.mu
        rep = verify_error_bounds(F, f, a, mu, tol)
        bounds, holds = rep.bounds, rep.holds
    err = f - f_hat
    return ChannelReport(
        kind=noise.kind,
        reconstruction_error_l2=float(np.linalg.norm(err)),
        reconstruction_error_inf=float(np.max(np.abs(err))) if err.size else 0.0,
        coefficient_sum=complex(received.sum()),
        bound_values=bounds,
        bounds_hold=holds,
    )


@dataclass
class ErrorBoundReport:
    error_l2: float
    error_inf: float
    eps_max: float
    eps_l2: float
    bounds: dict
    holds: dict

    @property
    def all_hold(self) -> bool:
        return all(self.holds.values())


def verify_error_bounds(F, f, a, mu, tol: Optional[ToleranceConfig] = None) -> ErrorBoundReport:
    """Compare the canonical-dual reconstruction error against the deviation bounds.

    With ``eps_max = max |a_k - mu|`` the error is at most
    ``sqrt(K / lambda_min) eps_max``; for a BUNTF also ``sqrt(d) eps_max`` and,
    in the max norm, ``d eps_max``.  With ``eps_l2 = ||a - mu e||`` a BUNTF
    gives ``sqrt(d / K) eps_l2``.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not is_balanced(F, tol):
        raise HypothesisError("error bounds need a balanced frame")
    a = np.asarray(a)
    d, K = F.shape
    f_hat = decode(canonical_dual(F, tol), encode(F, f) + a)
    err = np.asarray(f) - f_hat
    e2 = float(np.linalg.norm(err))
    einf = float(np.max(np.abs(err)))
    dev = a - mu
    eps_max = float(np.max(np.abs(dev)))
    eps_l2 = float(np.linalg.norm(dev))
    lam_min = spectral(F, tol).lower_bound
    bounds = {"sqrt_K_over_lambda_min": math.sqrt(K / lam_min) * eps_max}
    measured = {"sqrt_K_over_lambda_min": e2}
    if is_buntf(F, tol):
        bounds["sqrt_d"] = math.sqrt(d) * eps_max
        bounds["d_inf"] = d * eps_max
        bounds["sqrt_d_over_K"] = math.sqrt(d / K) * eps_l2
        measured.update(sqrt_d=e2, d_inf=einf, sqrt_d_over_K=e2)
    slack = 1e-12
    holds = {k: measured[k] <= bounds[k] * (1 + slack) + slack * max(1.0, eps_max) for k in bounds}
    return ErrorBoundReport(e2, einf, eps_max, eps_l2, bounds, holds)


@dataclass(frozen=True)
class MSEEstimate:
    mse: float
    stderr: float
    trials: int
    predicted: float
    band: tuple

    def within(self, value: float, k: float = 4.0) -> bool:
        return abs(self.mse - value) <= k * self.stderr

    def in_band(self, k: float = 4.0) -> bool:
        lo, hi = self.band
        return lo - k * self.stderr <= self.mse <= hi + k * self.stderr

    def to_dict(self) -> dict:
        return {"mse": self.mse, "stderr": self.stderr, "trials": self.trials, "predicted": self.predicted, "band": list(self.band)}


def _block_seeds(seed: int, trials: int):
    nblocks = -(-trials // BLOCK)
    for b in range(nblocks):
        n = min(BLOCK, trials - b * BLOCK)
        yield np.random.SeedSequence(seed, spawn_key=(b,)), n


def _run_blocks(fn, seed, trials, workers):
    jobs = list(_block_seeds(seed, trials))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda job: fn(*job), jobs))
    else:
        parts = [fn(*job) for job in jobs]
    return np.concatenate(parts)


def _require_balanced_unit_norm(F, tol):
    if not is_balanced(F, tol):
        raise HypothesisError("frame must be balanced")
    if not is_unit_norm(F, tol):
        raise HypothesisError("frame must be unit-norm")


def empirical_mse(
    F,
    mu: float,
    sigma: float,
    trials: int = 10**5,
    seed: int = 0,
    dual=None,
    distribution: str = "gaussian",
    workers: Optional[int] = None,
    tol: Optional[ToleranceConfig] = None,
) -> MSEEstimate:
    """Monte-Carlo estimate of ``(1/d) E ||T_G eta||^2`` for noise of mean ``mu``.

    The noise is fed to the decoder as drawn, mean included; for a balanced
    frame and a balanced dual the mean drops out.  ``predicted`` is the
    exact value ``sigma^2 ||T_G||_F^2 / d`` and ``band`` is
    ``[K sigma^2 / (d beta^2), K sigma^2 / (d alpha^2)]``.
    """
    tol = _tol(tol)
    F = as_frame(F)
    _require_balanced_unit_norm(F, tol)
    if trials < 1000:
        raise FrameError("need at least 1000 trials", trials=trials)
    G, _ = _resolve_dual(F, dual, tol)
    d, K = F.shape
    spec = NoiseSpec.additive(mu, sigma, distribution)
    Tg = G.matrix

    def block(ss, n):
        rng = np.random.default_rng(ss)
        eta = spec.draw(K, rng, n)
        err = eta @ Tg.T
        return np.sum(np.abs(err) ** 2, axis=1) / d

    x = _run_blocks(block, seed, trials, workers)
    sd = spectral(F, tol)
    band = (K * sigma**2 / (d * sd.upper_bound**2), K * sigma**2 / (d * sd.lower_bound**2))
    predicted = sigma**2 * float(np.vdot(Tg, Tg).real) / d
    return MSEEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(trials)), trials, predicted, band)


def projection_coefficient_power(
    F,
    mu: float,
    sigma: float,
    trials: int = 10**5,
    seed: int = 0,
    distribution: str = "gaussian",
    workers: Optional[int] = None,
    tol: Optional[ToleranceConfig] = None,
) -> MSEEstimate:
    """Average per-coordinate power ``E |p(k)|^2`` of the projected noise ``P eta``.

    ``P = T^H S^-1 T`` is the projection onto the analysis range.  Since
    ``P e = 0`` for a balanced frame, the noise mean does not contribute.
    ``predicted`` is ``sigma^2 tr(P) / K``, which is ``(d/K) sigma^2``.
    """
    tol = _tol(tol)
    F = as_frame(F)
    _require_balanced_unit_norm(F, tol)
    if not is_tight(F, tol):
        raise HypothesisError("frame must be tight")
    d, K = F.shape
    if sigma == 0:
        return MSEEstimate(0.0, 0.0, trials, 0.0, (0.0, 0.0))
    P = analysis_projection(F, tol)
    spec = NoiseSpec.additive(mu, sigma, distribution)

    def block(ss, n):
        rng = np.random.default_rng(ss)
        p = spec.draw(K, rng, n) @ P.T
        return np.mean(np.abs(p) ** 2, axis=1)

    x = _run_blocks(block, seed, trials, workers)
    sd = spectral(F, tol)
    pred = sigma**2 * d / K
    return MSEEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(trials)), trials, pred, (sigma**2 / sd.upper_bound, sigma**2 / sd.lower_bound))


# ---------------------------------------------------------------- detector


VERDICTS = ("clean", "systematic", "random", "signal_dependent")


@dataclass(frozen=True)
class DetectorConfig:
    clean_tol: float = 1e-9
    systematic_spread: float = 1e-3
    sign_change_fraction: float = 0.3
    band_factor: float = 4.0
    regression_r2: float = 0.9


@dataclass(frozen=True)
class DetectorResult:
    verdict: str
    sums: tuple
    spread: float
    sign_change_fraction: float
    r2: Optional[float]
    sigma_hat: Optional[float]

    def to_dict(self) -> dict:
        sums = [s.real if s.imag == 0 else [s.real, s.imag] for s in map(complex, self.sums)]
        return {
            "verdict": self.verdict,
            "sums": sums,
            "spread": self.spread,
            "sign_change_fraction": self.sign_change_fraction,
            "r2": self.r2,
            "sigma_hat": self.sigma_hat,
        }


def _r2(y, X) -> Optional[float]:
    n, p = X.shape
    if n <= p + 1:
        return None
    tot = float(np.sum(np.abs(y - y.mean()) ** 2))
    if tot == 0:
        return None
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = float(np.sum(np.abs(y - X @ beta) ** 2))
    return 1.0 - res / tot


def detect_anomaly(F, batches: Sequence, config: DetectorConfig = DetectorConfig(), tol: Optional[ToleranceConfig] = None) -> DetectorResult:
    """Classify received coefficient batches by their sums.

    For a balanced frame clean coefficients sum to zero.  The checks run in
    order: clean (all sums vanish), systematic (sums constant and nonzero),
    signal-dependent (sums explained linearly by the decoded signals),
    random (sums oscillate inside a band compatible with the noise level
    estimated from the component of the batches outside span{e} + im T^H),
    and otherwise signal-dependent.
    """
    tol = _tol(tol)
    F = as_frame(F)
    if not is_balanced(F, tol):
        raise HypothesisError("anomaly detection needs a balanced frame")
    C = np.asarray(batches)
    if C.ndim != 2 or C.shape[1] != F.K:
        raise FrameError("batches must be an (n, K) array", K=F.K, got=list(C.shape))
    n, K = C.shape
    if n < 3:
        raise FrameError("need at least 3 batches", batches=n)
    s = C.sum(axis=1)
    mags = np.abs(C).sum(axis=1)
    m = s.mean()
    spread = float(np.max(np.abs(s - m)))
    track = s.real if np.all(np.imag(s) == 0) else np.abs(s - m)
    diffs = np.diff(track)
    nz = np.sign(diffs[diffs != 0])
    scf = float(np.mean(nz[1:] != nz[:-1])) if nz.size > 1 else 0.0

    def result(verdict, r2=None, sig=None):
        return DetectorResult(verdict, tuple(complex(x) for x in s), spread, scf, r2, sig)

    if np.all(np.abs(s) <= config.clean_tol * np.maximum(1.0, mags)):
        return result("clean")
    if spread <= config.systematic_spread * abs(m):
        return result("systematic")

    G = canonical_dual(F, tol)
    f_hat = C @ G.matrix.T
    X = np.hstack([np.ones((n, 1)), f_hat])
    r2 = _r2(s, X)
    if r2 is not None and r2 >= config.regression_r2:
        return result("signal_dependent", r2)

    P = analysis_projection(F, tol)
    Q = np.eye(K) - P - np.ones((K, K)) / K
    rank_q = K - F.d - 1
    if rank_q > 0:
        resid = C @ Q.T
        sig = math.sqrt(float(np.sum(np.abs(resid) ** 2)) / (n * rank_q))
    else:
        sig = float(np.std(s)) / math.sqrt(K)
    band = float(track.max() - track.min())
    if scf >= config.sign_change_fraction and band <= config.band_factor * K * sig:
        return result("random", r2, sig)
    return result("signal_dependent", r2, sig)
