"""Monte Carlo cross-checks of the closed-form rate expressions.

The per-slot information functional is what the closed forms average
over mask randomness, so the strongest desk-scale check is: derive real
masks, look at what receiver 0 sees slot by slot, and average the
functional over the frame.  End-to-end codebooks are out of scope; the
capacity expressions are checked elsewhere through dominance and
closed-form identities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, signatures

_MAX_SEED = 1 << 32
MC_TAG_BASE = 1 << 20  # domain tags reserved for validation books


@dataclass
class McEstimate:
    mean: float
    std_error: float   # sample std / sqrt(trials)
    trials: int


def _mc_book_matrix(K, q, num_slots, seed):
    """Bit matrix of K freshly derived masks; disjoint NIAs per seed."""
    if not (0 <= seed < _MAX_SEED):
        raise ValueError(f"seed must fit in 32 bits, got {seed}")
    nias = [seed * _MAX_SEED + j for j in range(K)]
    book = signatures.reconstruct_book(nias, q, num_slots, MC_TAG_BASE)
    return book.matrix()


def _check_mc_args(K, q, num_slots):
    if K < 2:
        raise ValueError(f"need at least 2 nodes, got K={K}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0,1), got {q}")
    if num_slots < 1000:
        raise ValueError("Monte Carlo runs need at least 10^3 slots")


def mc_weight_distribution(K, q, num_slots, seed):
    """Empirical distribution of the per-slot on-pattern weight 0..K."""
    _check_mc_args(K, q, num_slots)
    masks = _mc_book_matrix(K, q, num_slots, seed)
    weights = masks.sum(axis=0)
    return np.bincount(weights, minlength=K + 1) / num_slots


def _per_slot_estimate(samples):
    m = samples.shape[0]
    return McEstimate(mean=float(samples.mean()),
                      std_error=float(samples.std(ddof=1) / math.sqrt(m)),
                      trials=m)


def mc_or_rate(K, q, p, num_slots, seed):
    """Slot-average of the OR-channel rate functional at silence prob p.

    Receiver 0 contributes h2(p^n)/(K-1) in each of its off-slots, where
    n is the realized count of transmitting peers; on-slots contribute
    0.  The mean estimates the un-maximized symmetric rate at p.
    """
    _check_mc_args(K, q, num_slots)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0,1], got {p}")
    masks = _mc_book_matrix(K, q, num_slots, seed)
    off = masks[0] == 0
    n = masks[1:].sum(axis=0).astype(np.float64)
    samples = np.where(off, analysis.h2(p**n), 0.0) / (K - 1)
    return _per_slot_estimate(samples)


def mc_gauss_rate(K, q, gamma, num_slots, seed):
    """Gaussian counterpart: off-slots of receiver 0 contribute g(n*gamma/q)."""
    _check_mc_args(K, q, num_slots)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    masks = _mc_book_matrix(K, q, num_slots, seed)
    off = masks[0] == 0
    n = masks[1:].sum(axis=0).astype(np.float64)
    samples = np.where(off, analysis.g(n * gamma / q), 0.0) / (K - 1)
    return _per_slot_estimate(samples)


def erased_fraction(K, q, num_slots, seed):
    """Fraction of receiver 0's slots erased by its own transmissions."""
    _check_mc_args(K, q, num_slots)
    masks = _mc_book_matrix(K, q, num_slots, seed)
    return float(masks[0].mean())


@dataclass
class ValidationRow:
    quantity: str
    analytic: float
    mc_mean: float
    mc_stderr: float
    trials: int

    @property
    def passed(self):
        return abs(self.mc_mean - self.analytic) <= 3.0 * self.mc_stderr


@dataclass
class ValidationReport:
    rows: list = field(default_factory=list)

    @property
    def all_passed(self):
        return all(r.passed for r in self.rows)

    def to_csv(self):
        lines = ["quantity,analytic,mc_mean,mc_stderr,trials,pass"]
        for r in self.rows:
            lines.append(
                f"{r.quantity},{r.analytic:.12g},{r.mc_mean:.12g},"
                f"{r.mc_stderr:.12g},{r.trials},{'PASS' if r.passed else 'FAIL'}"
            )
        return "\n".join(lines) + "\n"


def validate_suite(seed, num_slots=100_000, *, suite="all", Ks=(3, 5, 20),
                   q_or=0.3, q_gauss=0.2, gamma=100.0):
    """MC-vs-analytic rows for the OR and Gaussian rate functionals.

    The OR checks run at each K's own optimal silence probability; both
    families also verify that the erased-slot fraction matches q within
    binomial noise.
    """
    report = ValidationReport()
    if suite not in ("all", "or", "gauss"):
        raise ValueError(f"unknown suite {suite!r}")
    if suite in ("all", "or"):
        for K in Ks:
            r = analysis.or_symmetric_rate(K, q_or)
            est = mc_or_rate(K, q_or, r.p_star, num_slots, seed)
            report.rows.append(ValidationRow(
                quantity=f"or_rate_K{K}", analytic=r.rate,
                mc_mean=est.mean, mc_stderr=est.std_error, trials=est.trials))
        frac = erased_fraction(Ks[-1], q_or, num_slots, seed)
        report.rows.append(ValidationRow(
            quantity="erased_fraction_or", analytic=q_or, mc_mean=frac,
            mc_stderr=math.sqrt(q_or * (1 - q_or) / num_slots), trials=num_slots))
    if suite in ("all", "gauss"):
        for K in Ks:
            r = analysis.gauss_symmetric_rate(K, q_gauss, gamma)
            est = mc_gauss_rate(K, q_gauss, gamma, num_slots, seed)
            report.rows.append(ValidationRow(
                quantity=f"gauss_rate_K{K}", analytic=r.rate,
                mc_mean=est.mean, mc_stderr=est.std_error, trials=est.trials))
        frac = erased_fraction(Ks[-1], q_gauss, num_slots, seed)
        report.rows.append(ValidationRow(
            quantity="erased_fraction_gauss", analytic=q_gauss, mc_mean=frac,
            mc_stderr=math.sqrt(q_gauss * (1 - q_gauss) / num_slots),
            trials=num_slots))
    return report
