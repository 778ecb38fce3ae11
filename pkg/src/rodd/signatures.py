"""Deterministic on-off duplex masks derived from node addresses.

Every node owns a binary length-M mask: 1 = transmit in that slot, 0 =
listen.  Masks are never distributed over the air; any party that knows a
node's address (NIA) and the frame parameters (q, M, domain tag) can
re-derive the exact same mask.  Derivation uses the Philox-4x64 counter
PRF keyed by (nia, domain_tag), one 64-bit word per slot, so the bit of
any single slot is computable without generating the prefix.

Bit convention (fixed so independent implementations agree bit for bit):
slot m is ON iff word_m < floor(q * 2**64), where word_m is the m-th raw
64-bit Philox output for that key.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Philox

_WORD_BITS = 64
_MAX_KEY_PART = 1 << 64

# Conventional domain tags.  Discovery signatures and per-message data
# signatures must never collide, so the message code starts its tags at 1.
DISCOVERY_TAG = 0
MESSAGE_TAG_BASE = 1


def _mask_key(nia, domain_tag):
    if not (0 <= nia < _MAX_KEY_PART):
        raise ValueError(f"nia must be an unsigned 64-bit integer, got {nia}")
    if not (0 <= domain_tag < _MAX_KEY_PART):
        raise ValueError(f"domain_tag must be an unsigned 64-bit integer, got {domain_tag}")
    return (domain_tag << 64) | nia


def _on_threshold(q):
    if not (0.0 < q < 1.0):
        raise ValueError(f"on-probability q must lie strictly inside (0,1), got {q}")
    return int(q * 2.0**_WORD_BITS)


@dataclass(eq=False)
class DuplexMask:
    """Binary on-off mask of one node over a frame of M slots."""

    bits: np.ndarray  # uint8 vector, 1 = on/transmit, 0 = off/listen
    owner: int        # NIA the mask was derived from
    q: float          # design on-probability

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError("mask bits must be a 1-D vector")
        if np.any(self.bits > 1):
            raise ValueError("mask bits must be 0/1")

    @property
    def length(self):
        return self.bits.shape[0]

    def on_slots(self):
        return np.flatnonzero(self.bits == 1)

    def off_slots(self):
        return np.flatnonzero(self.bits == 0)

    def __eq__(self, other):
        if not isinstance(other, DuplexMask):
            return NotImplemented
        return (self.owner == other.owner and self.q == other.q
                and np.array_equal(self.bits, other.bits))


def derive_mask(nia, q, num_slots, domain_tag=DISCOVERY_TAG):
    """Derive the on-off mask of `nia` for a frame of `num_slots` slots.

    Deterministic: the same (nia, q, num_slots, domain_tag) yields a
    bit-identical mask on every platform and in every process.
    """
    if num_slots < 1:
        raise ValueError(f"num_slots must be >= 1, got {num_slots}")
    thr = _on_threshold(q)
    words = Philox(key=_mask_key(nia, domain_tag)).random_raw(num_slots)
    bits = (words < np.uint64(thr)).astype(np.uint8)
    return DuplexMask(bits=bits, owner=nia, q=q)


def derive_bit(nia, q, slot, domain_tag=DISCOVERY_TAG):
    """Single mask bit at `slot`, computed in O(1) via the block counter.

    Philox emits 4 words per counter increment, so slot m lives in block
    m // 4 at lane m % 4.
    """
    if slot < 0:
        raise ValueError("slot must be nonnegative")
    thr = _on_threshold(q)
    block, lane = divmod(slot, 4)
    words = Philox(key=_mask_key(nia, domain_tag), counter=block).random_raw(lane + 1)
    return int(words[lane] < np.uint64(thr))


@dataclass
class SignatureBook:
    """Indexed collection of masks sharing one (q, M, domain_tag) derivation."""

    nias: list
    q: float
    num_slots: int
    domain_tag: int = DISCOVERY_TAG
    masks: dict = field(default_factory=dict)  # nia -> DuplexMask

    def __getitem__(self, nia):
        return self.masks[nia]

    def __len__(self):
        return len(self.masks)

    def __contains__(self, nia):
        return nia in self.masks

    def matrix(self):
        """Stacked bit matrix, row i = mask of self.nias[i].  Shape (N, M) uint8."""
        if not self.nias:
            return np.zeros((0, self.num_slots), dtype=np.uint8)
        return np.stack([self.masks[nia].bits for nia in self.nias])

    def export_text(self):
        """One `nia hex-packed-bits` line per mask.

        Bits are packed MSB-first: bit of slot 0 is the most significant
        bit of the first hex byte; the final byte is zero-padded on the
        right when M is not a multiple of 8.
        """
        lines = []
        for nia in self.nias:
            packed = np.packbits(self.masks[nia].bits)  # MSB-first
            lines.append(f"{nia} {packed.tobytes().hex()}")
        return "\n".join(lines) + ("\n" if lines else "")


def reconstruct_book(nias, q, num_slots, domain_tag=DISCOVERY_TAG):
    """Re-derive the masks of every listed NIA.

    Any party holding the same NIA list and parameters reconstructs a
    byte-equal book.  Duplicate NIAs are rejected: masks would silently
    alias.
    """
    nias = list(nias)
    if len(set(nias)) != len(nias):
        raise ValueError("duplicate NIA in book")
    book = SignatureBook(nias=nias, q=q, num_slots=num_slots, domain_tag=domain_tag)
    for nia in nias:
        book.masks[nia] = derive_mask(nia, q, num_slots, domain_tag)
    return book
