"""Closed-form throughput and capacity of on-off duplex signaling.

All rates are in bits per slot, logarithms base 2 throughout.  Symmetric
network of K mutual neighbors, masks i.i.d. Bernoulli(q):

* OR-channel, signature-independent codes (rate):
    R = max_p 1/(K-1) * sum_{n=1..K-1} C(K-1,n) q^n (1-q)^(K-n) H2(p^n)
  where p is the probability a transmitting node sends a 0 (silence)
  and H2 is the binary entropy function.
* OR-channel, signature-dependent codes (capacity):
    C = [(1-q) - (1-q)^K] / (K-1)
* Gaussian channel, rate:
    R = 1/(K-1) * sum_m C(K-1,m) q^m (1-q)^(K-m) g(m*gamma/q)
  with g(x) = 0.5*log2(1+x); per-slot SNR is gamma/q because a node
  spends its unit power budget over ~qM on-slots.
* Gaussian channel, capacity: same sum with g(w_m), where the per-weight
  power levels w_m = max((K-m)/(K-1)*v - 1, 0) share a single water
  level v fixed by the average-power constraint
    1/K * sum_m C(K,m) q^m (1-q)^(K-m) w_m = gamma.

The ALOHA baselines live here too, under the frame-level collision
model: a broadcast succeeds iff it is the only transmission in the
contention period.

Binomial-weighted sums are evaluated from log-space terms so that K in
the hundreds stays finite and accurate.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

GOLDEN_TOL = 1e-9
WATER_RESIDUAL_REL = 1e-9
SUBSET_ENUM_MAX_NODES = 25

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class WaterLevelBracketError(RuntimeError):
    """Bisection bracket for the water level failed to expand."""


@dataclass
class RateResult:
    """A rate in bits/slot plus optimizer metadata.

    p_star is set only for the signature-independent OR rate, v_star
    only for the Gaussian capacity; residual reports the final optimizer
    or solver tolerance.
    """

    rate: float
    p_star: float = None
    v_star: float = None
    residual: float = None


@dataclass
class SweepRow:
    K: int
    q: float
    gamma: float          # None for OR-channel rows
    rodd_sum_rate: float
    rodd_sum_capacity: float
    aloha: float


@dataclass
class SweepTable:
    rows: list

    CSV_HEADER = "K,q,gamma,rodd_sum_rate,rodd_sum_capacity,aloha"

    def to_csv(self):
        lines = [self.CSV_HEADER]
        for r in self.rows:
            gamma = "" if r.gamma is None else f"{r.gamma:.12g}"
            lines.append(
                f"{r.K},{r.q:.12g},{gamma},{r.rodd_sum_rate:.12g},"
                f"{r.rodd_sum_capacity:.12g},{r.aloha:.12g}"
            )
        return "\n".join(lines) + "\n"


def h2(p):
    """Binary entropy in bits, with 0*log0 = 0.  Accepts scalars or arrays."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("h2 argument must lie in [0, 1]")
    out = np.zeros_like(p)
    inner = (p > 0) & (p < 1)
    pi = p[inner]
    out[inner] = -pi * np.log2(pi) - (1 - pi) * np.log2(1 - pi)
    return float(out) if out.ndim == 0 else out


def g(x):
    """Gaussian-channel rate function 0.5*log2(1+x), x = SNR (linear)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("g argument must be nonnegative")
    out = 0.5 * np.log2(1.0 + x)
    return float(out) if out.ndim == 0 else out


def _check_kq(K, q):
    if K < 2:
        raise ValueError(f"need at least 2 nodes, got K={K}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0,1), got {q}")


def _pattern_weights(K, q):
    """w[n] = C(K-1,n) q^n (1-q)^(K-n) for n = 0..K-1, via log-space terms.

    This is the probability that a given receiver listens while exactly n
    of its K-1 peers transmit.
    """
    n = np.arange(K)
    log_binom = gammaln(K) - gammaln(n + 1) - gammaln(K - n)
    log_w = log_binom + n * math.log(q) + (K - n) * math.log1p(-q)
    return np.exp(log_w)


def _golden_section_max(f, lo, hi, tol):
    """Golden-section search for the maximum of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), b - a


def _maximize_on_unit_interval(f, tol=GOLDEN_TOL, grid_points=1001):
    """Maximize f over [0,1]: coarse grid to locate the mode, golden refine.

    The grid also guards against non-unimodal objectives: refinement is
    confined to a bracket around the global grid maximum, so a spurious
    local mode elsewhere cannot capture the search.
    """
    xs = np.linspace(0.0, 1.0, grid_points)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, grid_points - 1)]
    return _golden_section_max(f, lo, hi, tol)


def or_rate_at_p(K, q, p):
    """Un-maximized OR-channel symmetric rate at silence probability p."""
    _check_kq(K, q)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0,1], got {p}")
    w = _pattern_weights(K, q)
    n = np.arange(1, K)
    return float(np.sum(w[1:] * h2(p**n)) / (K - 1))


def or_symmetric_rate(K, q):
    """Symmetric rate of the OR-channel (signature-independent codes)."""
    _check_kq(K, q)
    w = _pattern_weights(K, q)
    n = np.arange(1, K)

    def objective(p):
        return float(np.sum(w[1:] * h2(p**n)))

    p_star, best, width = _maximize_on_unit_interval(objective)
    return RateResult(rate=best / (K - 1), p_star=p_star, residual=width)


def or_symmetric_capacity(K, q):
    """Symmetric capacity of the OR-channel (signature-dependent codes)."""
    _check_kq(K, q)
    c = ((1.0 - q) - (1.0 - q) ** K) / (K - 1)
    return RateResult(rate=c)


def or_aloha_throughput(K, q):
    """Sum throughput of slotted ALOHA broadcast over the 1-bit alphabet.

    K*q*(1-q)^(K-1): a node's frame goes through iff nobody else
    transmits in the contention period.  Vectorized over q.
    """
    if K < 1:
        raise ValueError(f"need at least 1 node, got K={K}")
    q = np.asarray(q, dtype=np.float64)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("q must lie in [0,1]")
    out = K * q * (1.0 - q) ** (K - 1)
    return float(out) if out.ndim == 0 else out


def gauss_aloha_throughput(K, q, gamma):
    """ALOHA sum throughput over the Gaussian channel: winner gets g(gamma/q)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return or_aloha_throughput(K, q) * g(gamma / q)


def gauss_symmetric_rate(K, q, gamma):
    """Symmetric rate of the Gaussian channel (signature-independent codes)."""
    _check_kq(K, q)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = _pattern_weights(K, q)
    m = np.arange(1, K)
    rate = float(np.sum(w[1:] * g(m * gamma / q)) / (K - 1))
    return RateResult(rate=rate)


def waterfill_lhs(K, q, v):
    """Average allocated power at water level v (left side of the constraint)."""
    m = np.arange(1, K)
    log_binom = gammaln(K + 1) - gammaln(m + 1) - gammaln(K - m + 1)
    w_full = np.exp(log_binom + m * math.log(q) + (K - m) * math.log1p(-q))
    levels = np.maximum((K - m) / (K - 1) * v - 1.0, 0.0)
    return float(np.sum(w_full * levels) / K)


def _power_levels(K, v):
    m = np.arange(1, K)
    return np.maximum((K - m) / (K - 1) * v - 1.0, 0.0)


def solve_water_level(K, q, gamma):
    """Water level v >= 0 meeting the average-power constraint.

    The left side is 0 for v <= 1 and continuous, strictly increasing
    beyond, so a bracketed bisection from v = 1 with geometric upper
    growth always converges.  Residual tolerance is relative to gamma.
    """
    _check_kq(K, q)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lo, hi = 1.0, 2.0
    for _ in range(200):
        if waterfill_lhs(K, q, hi) >= gamma:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise WaterLevelBracketError(
            f"no bracket for K={K} q={q} gamma={gamma}: lhs({hi:g}) = "
            f"{waterfill_lhs(K, q, hi):g} still below gamma"
        )
    target = WATER_RESIDUAL_REL * gamma
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = waterfill_lhs(K, q, mid)
        if abs(val - gamma) <= target:
            return mid
        if val < gamma:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gauss_symmetric_capacity(K, q, gamma):
    """Symmetric capacity of the Gaussian channel (signature-dependent codes).

    Codebook power adapts to the per-slot pattern weight; the weight-m
    level w_m comes from the shared water level.
    """
    v = solve_water_level(K, q, gamma)
    w = _pattern_weights(K, q)
    levels = _power_levels(K, v)
    rate = float(np.sum(w[1:] * g(levels)) / (K - 1))
    return RateResult(rate=rate, v_star=v, residual=abs(waterfill_lhs(K, q, v) - gamma))


def asymmetric_rate_bound(gains, q, k):
    """Achievable rate of node k under per-node on-probabilities q.

    gains.gamma[i][j] is the SNR of node j's signal at receiver i.  For
    every listener i != k the rate is a sum over all transmitter subsets
    A containing k (drawn from everyone but i), weighted by the
    probability of that on-pattern; the bound is the minimum over
    listeners.  Subsets are enumerated by vectorized doubling, so node
    count is capped.
    """
    q = np.asarray(q, dtype=np.float64)
    K = gains.num_nodes
    if q.shape != (K,):
        raise ValueError(f"need one q per node, got shape {q.shape} for K={K}")
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("all q must lie strictly inside (0,1)")
    if K > SUBSET_ENUM_MAX_NODES:
        raise ValueError(
            f"subset enumeration is exponential; K={K} exceeds the cap of "
            f"{SUBSET_ENUM_MAX_NODES}"
        )
    if not (0 <= k < K):
        raise ValueError(f"node index {k} out of range")

    best = math.inf
    for i in range(K):
        if i == k:
            continue
        rest = [j for j in range(K) if j != i and j != k]
        # All subsets A of {everyone but i} with k in A: start from {k} and
        # double over the remaining members.
        h = np.array([gains.gamma[i, k] / q[k]])
        prob = np.array([q[k]])
        for j in rest:
            h = np.concatenate([h, h + gains.gamma[i, j] / q[j]])
            prob = np.concatenate([prob * (1.0 - q[j]), prob * q[j]])
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(h > 0, gains.gamma[i, k] / (q[k] * h) * g(h) * prob, 0.0)
        rate_i = (1.0 - q[i]) * float(np.sum(terms))
        best = min(best, rate_i)
    return best


def sweep_or(Ks, q_grid):
    """Sum rate, sum capacity and ALOHA throughput over a (K, q) grid."""
    rows = []
    for K in Ks:
        for q in q_grid:
            r = or_symmetric_rate(K, q).rate
            c = or_symmetric_capacity(K, q).rate
            rows.append(SweepRow(
                K=K, q=q, gamma=None,
                rodd_sum_rate=K * r,
                rodd_sum_capacity=K * c,
                aloha=or_aloha_throughput(K, q),
            ))
    return SweepTable(rows=rows)


def sweep_gauss(Ks, q_grid, gamma):
    """Gaussian-channel counterpart of sweep_or at a common SNR."""
    rows = []
    for K in Ks:
        for q in q_grid:
            r = gauss_symmetric_rate(K, q, gamma).rate
            c = gauss_symmetric_capacity(K, q, gamma).rate
            rows.append(SweepRow(
                K=K, q=q, gamma=gamma,
                rodd_sum_rate=K * r,
                rodd_sum_capacity=K * c,
                aloha=gauss_aloha_throughput(K, q, gamma),
            ))
    return SweepTable(rows=rows)
