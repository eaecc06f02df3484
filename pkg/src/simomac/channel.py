"""Block-fading SIMO MAC model: fading/noise generation, input families
under average or peak power constraints, and average-to-peak truncation.

One coherence block: Y = h1 x1^T + h2 x2^T + Z with Z i.i.d. CN(0,1),
Y of shape (N, T).  Monte-Carlo trials play the role of the block count B.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParam
from .linalg import sample_complex_gaussian, sample_uniform_complex_sphere

FADING_KINDS = ("iid_complex_gaussian", "iid_uniform_annulus")

# Annulus amplitude support [r_lo, r_hi] with phase uniform.  r_hi solves
# (r_lo^2 + r_lo*r_hi + r_hi^2)/3 = 1 so that the per-entry power is exactly
# one (second moment of a uniform amplitude).
ANNULUS_R_LO = 0.5
ANNULUS_R_HI = (3.0 * np.sqrt(5.0) - 1.0) / 4.0


@dataclass
class ChannelConfig:
    """Static description of one simulated channel."""

    T: int
    N: int
    P: float
    fading_kind: str = "iid_complex_gaussian"
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.T < 1 or self.N < 1:
            raise InvalidParam("T and N must be >= 1")
        if self.P <= 0:
            raise InvalidParam("P must be positive")
        if self.trials < 1:
            raise InvalidParam("trials must be >= 1")
        if self.fading_kind not in FADING_KINDS:
            raise InvalidParam(f"unknown fading kind {self.fading_kind!r}")

    def rng(self, stream=0):
        """Independent deterministic stream per worker index."""
        return np.random.default_rng(np.random.SeedSequence((self.seed, stream)))


def sample_fading(kind, n, rng, size=None):
    """Fading vector draws with unit per-entry average power.

    Both kinds have finite differential entropy and finite power by
    construction ('generic fading').
    """
    if kind == "iid_complex_gaussian":
        return sample_complex_gaussian(n, rng, size=size)
    if kind == "iid_uniform_annulus":
        shp = (n,) if size is None else tuple(np.atleast_1d(size)) + (n,)
        r = rng.uniform(ANNULUS_R_LO, ANNULUS_R_HI, size=shp)
        ph = rng.uniform(0.0, 2.0 * np.pi, size=shp)
        return r * np.exp(1j * ph)
    raise InvalidParam(f"unknown fading kind {kind!r}")


def annulus_second_moment(r_lo=ANNULUS_R_LO, r_hi=ANNULUS_R_HI):
    """Closed-form E|h|^2 for a uniform amplitude on [r_lo, r_hi]."""
    return (r_lo**2 + r_lo * r_hi + r_hi**2) / 3.0


def apply_channel(h1, h2, x1, x2, rng, noiseless=False):
    """Y = h1 x1^T + h2 x2^T + Z.  Supports batched leading axes on all
    four inputs; output shape (..., N, T).  ``noiseless`` is a test hook."""
    h1 = np.asarray(h1, dtype=complex)
    h2 = np.asarray(h2, dtype=complex)
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    if h1.shape != h2.shape or x1.shape != x2.shape:
        raise InvalidParam("user dimensions must agree")
    if h1.shape[:-1] != x1.shape[:-1]:
        raise InvalidParam("batch shapes of fading and input must agree")
    y = h1[..., :, None] * x1[..., None, :] + h2[..., :, None] * x2[..., None, :]
    if not noiseless:
        n, t = h1.shape[-1], x1.shape[-1]
        y = y + sample_complex_gaussian(t, rng, size=y.shape[:-2] + (n,))
    return y


INPUT_KINDS = (
    "deterministic_point",
    "pilot_data_product",
    "exponent_profile_peak",
    "isotropic_peak",
    "exponential_norm",
)


@dataclass
class InputDistribution:
    """A per-block input law for one user.

    constraint 'average': (1/B) sum ||X[b]||^2 <= P*T over the trials.
    constraint 'peak': ||X||^2 <= peak_bound surely.
    ``truncate_above`` (norm^2 threshold) conditions the law on
    ||X||^2 < threshold via rejection; set by :func:`truncate_to_peak`.
    """

    kind: str
    T: int
    P: float
    constraint: str = "average"
    params: dict = field(default_factory=dict)
    truncate_above: float | None = None

    def __post_init__(self):
        if self.kind not in INPUT_KINDS:
            raise InvalidParam(f"unknown input kind {self.kind!r}")
        if self.constraint not in ("average", "peak"):
            raise InvalidParam("constraint must be 'average' or 'peak'")

    @property
    def peak_bound(self):
        """Sure upper bound on ||X||^2, or None for average-only kinds."""
        if self.truncate_above is not None:
            return self.truncate_above
        if self.kind == "deterministic_point":
            return float(np.linalg.norm(self.params["x"]) ** 2)
        if self.kind == "isotropic_peak":
            return self.P
        if self.kind == "exponent_profile_peak":
            return float(np.sum(self.P ** np.asarray(self.params["exponents"])))
        return None

    def _raw_sample(self, rng, size):
        t = self.T
        if self.kind == "deterministic_point":
            x = np.asarray(self.params["x"], dtype=complex)
            return np.broadcast_to(x, (size, t)).copy()
        if self.kind == "isotropic_peak":
            return np.sqrt(self.P) * sample_uniform_complex_sphere(t, rng, size=size)
        if self.kind == "exponent_profile_peak":
            amps = self.P ** (np.asarray(self.params["exponents"], dtype=float) / 2.0)
            ph = rng.uniform(0.0, 2.0 * np.pi, size=(size, t))
            return amps * np.exp(1j * ph)
        if self.kind == "pilot_data_product":
            pilot_p = self.params.get("pilot_power", self.P)
            data_p = self.params.get("data_power", self.P)
            x = np.sqrt(data_p) * sample_complex_gaussian(t, rng, size=size)
            x[:, 0] = np.sqrt(pilot_p)
            return x
        if self.kind == "exponential_norm":
            norm_sq = rng.exponential(self.P * self.T, size=size)
            u = sample_uniform_complex_sphere(t, rng, size=size)
            return np.sqrt(norm_sq)[:, None] * u
        raise InvalidParam(self.kind)

    def sample(self, rng, size=1):
        """(size, T) draws, honoring truncation by rejection."""
        x = self._raw_sample(rng, size)
        if self.truncate_above is not None:
            for _ in range(1000):
                bad = np.linalg.norm(x, axis=1) ** 2 >= self.truncate_above
                n_bad = int(bad.sum())
                if n_bad == 0:
                    break
                x[bad] = self._raw_sample(rng, n_bad)
            else:
                raise InvalidParam("rejection sampling did not converge")
        return x


@dataclass
class TruncationReport:
    """Empirical tail statistics from an average-to-peak truncation."""

    truncation_prob: float
    truncation_prob_se: float
    markov_bound: float
    rate_gap_order_term: float
    threshold: float


def truncate_to_peak(dist, P, beta, rng, trials=100_000):
    """Condition an average-power input on ||X||^2 < P^beta.

    Returns the conditional (peak-constrained) distribution and a report
    with the empirical tail probability, the Markov bound T*P^(1-beta),
    and the O(P^(1-beta) log P^beta) rate-gap term with unit constant.
    """
    if beta <= 1.0:
        raise InvalidParam("beta must exceed 1")
    threshold = float(P**beta)
    x = dist.sample(rng, size=trials)
    tail = (np.linalg.norm(x, axis=1) ** 2 >= threshold).astype(float)
    p_hat = float(tail.mean())
    se = float(tail.std() / np.sqrt(trials))
    truncated = replace(dist, constraint="peak", truncate_above=threshold)
    report = TruncationReport(
        truncation_prob=p_hat,
        truncation_prob_se=se,
        markov_bound=dist.T * P ** (1.0 - beta),
        rate_gap_order_term=P ** (1.0 - beta) * beta * np.log2(max(P, 2.0)),
        threshold=threshold,
    )
    return truncated, report
