"""Noise vectors, quarter permutations and secret bit-permutation functions.

A block has 4n bits, viewed as four n-bit quarters M1..M4 with M1 most
significant.  Each 4-bit nibble v of V_j = U_j xor K selects a permutation
w of the four quarters; the per-nibble round function is

    f_ji(X) = [w(M1, M2, M3, M4)] <<< 1     (1-bit circular left shift)

and f_j is the composition of the n per-nibble functions, first nibble
(most significant) applied first.  Every f_j is a pure bit permutation,
which is exactly what the differential attack exploits.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .backend import ParameterError
from .tentmap import TentParams, extended_step


# ---------------------------------------------------------------------------
# bit extraction (noise vectors)

def threshold_bit(x, alpha) -> int:
    """0 if x <= alpha else 1 (equality goes to the 0 branch)."""
    return 0 if x <= alpha else 1


def extract_bits(orbit, alpha, count: int) -> list[int]:
    """Threshold the first `count` orbit values against alpha."""
    if len(orbit) < count:
        raise ParameterError("orbit shorter than requested bit count")
    return [threshold_bit(orbit[i], alpha) for i in range(count)]


def extract_bits_mended(orbit, count: int, backend) -> list[int]:
    """Balanced variant: threshold fixed at 1/2 regardless of alpha."""
    if len(orbit) < count:
        raise ParameterError("orbit shorter than requested bit count")
    half = backend.half
    return [threshold_bit(orbit[i], half) for i in range(count)]


def bits_to_block(bits) -> int:
    """Pack a bit list into an integer, first bit most significant."""
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def build_noise_vectors(x0, p: TentParams, n: int, j_max: int, backend,
                        mended: bool = False) -> list[int]:
    """Noise vectors U_0 .. U_j_max from the orbit starting at x0.

    Bit u_i thresholds orbit state x_i (the initial condition is x_0), and
    u_{4jn} is the most significant bit of U_j.
    """
    if j_max < 0:
        raise ParameterError("j_max must be >= 0")
    total = 4 * n * (j_max + 1)
    orbit = [x0]
    x = x0
    for _ in range(total - 1):
        x = extended_step(x, p, backend)
        orbit.append(x)
    if mended:
        bits = extract_bits_mended(orbit, total, backend)
    else:
        bits = extract_bits(orbit, p.alpha, total)
    return [bits_to_block(bits[4 * n * j: 4 * n * (j + 1)])
            for j in range(j_max + 1)]


def compute_vj(uj: int, k: int) -> int:
    """V_j = U_j xor K."""
    return uj ^ k


# ---------------------------------------------------------------------------
# quarter-permutation table

class QuarterPermTable:
    """16 permutations of {1,2,3,4}, one per 4-bit selector value.

    The original table of the cipher's authors is not public; the default
    maps v to the v-th permutation of (1,2,3,4) in lexicographic order.  The
    attacks are independent of the table, so any fixed choice preserves all
    results; an authentic table can be loaded from file.
    """

    def __init__(self, entries):
        entries = [tuple(e) for e in entries]
        if len(entries) != 16:
            raise ParameterError("table needs exactly 16 entries")
        for e in entries:
            if sorted(e) != [1, 2, 3, 4]:
                raise ParameterError(f"entry {e} is not a permutation of 1..4")
        self.entries = tuple(entries)

    @classmethod
    def default(cls) -> "QuarterPermTable":
        return cls(list(permutations((1, 2, 3, 4)))[:16])

    @classmethod
    def load(cls, path) -> "QuarterPermTable":
        entries = [None] * 16
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                head, _, tail = line.partition(":")
                entries[int(head)] = tuple(int(x) for x in tail.split())
        if any(e is None for e in entries):
            raise ParameterError(f"table file {path} does not define all 16 entries")
        return cls(entries)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for v, e in enumerate(self.entries):
                fh.write(f"{v}: {e[0]} {e[1]} {e[2]} {e[3]}\n")


DEFAULT_TABLE = QuarterPermTable.default()


# ---------------------------------------------------------------------------
# bit permutations

@dataclass(frozen=True)
class BitPermutation:
    """Permutation of 4n bit positions; dest[i] is where input bit i goes.

    Bit positions are counted from the least significant bit (position 0).
    """

    dest: tuple
    n: int

    def __post_init__(self):
        if sorted(self.dest) != list(range(4 * self.n)):
            raise ParameterError("dest is not a bijection on the bit positions")

    @property
    def width(self) -> int:
        return 4 * self.n


def apply(p: BitPermutation, x: int) -> int:
    """Route every input bit i of x to output position p.dest[i]."""
    if x >> p.width:
        raise ParameterError("block wider than the permutation")
    y = 0
    for i, d in enumerate(p.dest):
        y |= ((x >> i) & 1) << d
    return y


def invert(p: BitPermutation) -> BitPermutation:
    inv = [0] * p.width
    for i, d in enumerate(p.dest):
        inv[d] = i
    return BitPermutation(tuple(inv), p.n)


def compose(outer: BitPermutation, inner: BitPermutation) -> BitPermutation:
    """outer after inner (apply inner first)."""
    return BitPermutation(tuple(outer.dest[d] for d in inner.dest), inner.n)


def build_fji(v: int, table: QuarterPermTable, n: int) -> BitPermutation:
    """Bit permutation of one round: quarter shuffle by table[v], then <<< 1."""
    if not 0 <= v < 16:
        raise ParameterError("selector must be a 4-bit value")
    w = table.entries[v]
    width = 4 * n
    dest = [0] * width
    for slot in range(1, 5):          # output quarter slot, 1 = most significant
        src = w[slot - 1]             # input quarter M_src lands in this slot
        src_base = (4 - src) * n
        slot_base = (4 - slot) * n
        for k in range(n):
            pre = slot_base + k       # position before the rotation
            dest[src_base + k] = (pre + 1) % width
    return BitPermutation(tuple(dest), n)


def compose_fj(vj: int, table: QuarterPermTable, n: int) -> BitPermutation:
    """f_j from the n 4-bit nibbles of V_j, most significant nibble first."""
    width = 4 * n
    if vj >> width:
        raise ParameterError("V_j wider than 4n bits")
    dest = list(range(width))
    for i in range(1, n + 1):
        nib = (vj >> (width - 4 * i)) & 0xF
        step = build_fji(nib, table, n)
        dest = [step.dest[d] for d in dest]
    return BitPermutation(tuple(dest), n)
