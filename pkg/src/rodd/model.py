"""Network geometry, link gains and the neighbor relation.

Nodes live on a 2-D square.  The SNR of the link from node j to receiver
k is gamma[k][j] = unit_snr_j * d_kj**(-alpha) * |h_kj|**2; node j is a
neighbor of k when that gain meets the topology's threshold.  The
relation need not be reciprocal once fading is on.
"""

from dataclasses import dataclass, field

import numpy as np

FADING_MODELS = ("none", "rayleigh")


class EmptyNetworkError(ValueError):
    """Poisson draw produced zero nodes."""


class CoincidentNodesError(ValueError):
    """Two nodes at distance zero: the power-law path loss is singular."""


@dataclass
class Topology:
    positions: np.ndarray          # (K, 2) coordinates in meters
    alpha: float                   # path-loss exponent, >= 2
    unit_snr: np.ndarray           # per-node gamma at unit distance, linear
    fading_model: str              # 'none' (h = 1) or 'rayleigh' (E|h|^2 = 1)
    neighbor_threshold: float      # linear SNR threshold for the neighbor relation
    area_side: float               # side of the square the nodes live on
    torus: bool = False            # wrap distances around the square edges

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must have shape (K, 2)")
        self.unit_snr = np.broadcast_to(
            np.asarray(self.unit_snr, dtype=np.float64), (self.num_nodes,)
        ).copy()
        if self.alpha < 2:
            raise ValueError(f"path-loss exponent must be >= 2, got {self.alpha}")
        if np.any(self.unit_snr <= 0):
            raise ValueError("unit_snr must be positive")
        if self.neighbor_threshold <= 0:
            raise ValueError("neighbor_threshold must be positive")
        if self.fading_model not in FADING_MODELS:
            raise ValueError(f"unknown fading model {self.fading_model!r}")

    @property
    def num_nodes(self):
        return self.positions.shape[0]

    def distances(self):
        """Pairwise distance matrix, minimum-image when torus is on."""
        diff = np.abs(self.positions[:, None, :] - self.positions[None, :, :])
        if self.torus:
            diff = np.minimum(diff, self.area_side - diff)
        return np.sqrt(np.sum(diff**2, axis=-1))

    def to_text(self):
        """Line-oriented dump: a key=value header, then `index x y` lines."""
        fields = [
            f"count={self.num_nodes}",
            f"alpha={float(self.alpha)!r}",
            f"unit_snr={float(self.unit_snr[0])!r}",
            f"fading={self.fading_model}",
            f"threshold={float(self.neighbor_threshold)!r}",
            f"area_side={float(self.area_side)!r}",
            f"torus={int(self.torus)}",
        ]
        lines = [" ".join(fields)]
        for i, (x, y) in enumerate(self.positions):
            lines.append(f"{i} {float(x)!r} {float(y)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        count = int(header["count"])
        positions = np.zeros((count, 2))
        for ln in lines[1:]:
            idx, x, y = ln.split()
            positions[int(idx)] = (float(x), float(y))
        return cls(
            positions=positions,
            alpha=float(header["alpha"]),
            unit_snr=float(header["unit_snr"]),
            fading_model=header["fading"],
            neighbor_threshold=float(header["threshold"]),
            area_side=float(header["area_side"]),
            torus=bool(int(header.get("torus", "0"))),
        )


@dataclass
class LinkGains:
    """Dense per-pair SNR matrix; gamma[k][j] is the gain from j at receiver k.

    Diagonal entries are meaningless and left at zero; no consumer reads
    them.
    """

    gamma: np.ndarray  # (K, K), nonnegative

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        if self.gamma.ndim != 2 or self.gamma.shape[0] != self.gamma.shape[1]:
            raise ValueError("gamma must be a square matrix")
        off_diag = self.gamma[~np.eye(self.gamma.shape[0], dtype=bool)]
        if np.any(off_diag < 0):
            raise ValueError("link gains must be nonnegative")

    @property
    def num_nodes(self):
        return self.gamma.shape[0]


def generate_poisson_network(area_side, density, seed, *, alpha=4.0, unit_snr=1.0,
                             fading_model="none", neighbor_threshold=1.0, torus=False):
    """Draw a Poisson network over a square of the given side.

    The node count is Poisson(density * area_side**2) and positions are
    i.i.d. uniform over the square.  Pure function of the seed.
    """
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if density < 0:
        raise ValueError("density must be nonnegative")
    rng = np.random.default_rng(seed)
    count = rng.poisson(density * area_side**2)
    if count == 0:
        raise EmptyNetworkError(
            f"Poisson draw produced zero nodes (mean {density * area_side**2:g})"
        )
    positions = rng.uniform(0.0, area_side, size=(count, 2))
    return Topology(
        positions=positions,
        alpha=alpha,
        unit_snr=unit_snr,
        fading_model=fading_model,
        neighbor_threshold=neighbor_threshold,
        area_side=area_side,
        torus=torus,
    )


def link_gains(topology, seed=None):
    """Per-pair link SNR matrix for the topology.

    Under Rayleigh fading each ordered pair (k, j) gets an independent
    |h|^2 ~ Exponential(1) draw, so gamma[k][j] and gamma[j][k] differ.
    Coincident nodes are rejected rather than clamped: a silent clamp
    would corrupt the SNR statistics.
    """
    if topology.num_nodes < 2:
        raise ValueError("link gains need at least 2 nodes")
    d = topology.distances()
    off = ~np.eye(topology.num_nodes, dtype=bool)
    if np.any(d[off] == 0.0):
        k, j = np.argwhere((d == 0.0) & off)[0]
        raise CoincidentNodesError(f"nodes {k} and {j} are at distance zero")
    with np.errstate(divide="ignore"):
        gamma = topology.unit_snr[None, :] * d ** (-topology.alpha)
    if topology.fading_model == "rayleigh":
        rng = np.random.default_rng(seed)
        gamma = gamma * rng.exponential(1.0, size=gamma.shape)
    np.fill_diagonal(gamma, 0.0)
    return LinkGains(gamma=gamma)


def neighbors(gains, k, threshold):
    """Nodes whose gain at receiver k meets the threshold; never contains k."""
    if not (0 <= k < gains.num_nodes):
        raise ValueError(f"node index {k} out of range")
    hits = np.flatnonzero(gains.gamma[k] >= threshold)
    return {int(j) for j in hits if j != k}
