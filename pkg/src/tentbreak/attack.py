"""Differential chosen-plaintext/chosen-ciphertext attacks and the
noise-vector solver.

Because every f_j is a bit permutation, two plaintexts that differ in a
single bit of their last block produce ciphertexts that differ in a single
bit of the corresponding block; reading off where the flipped bit lands for
each of the 4n positions reconstructs f_{j-1} exactly with 4n+1 queries.
The chosen-ciphertext dual recovers the inverse permutations the same way.

Once the permutations are known, the noise vectors U_{j+1} (j >= 2) are
found by exhaustive search over the 2^{4n} candidates of

    C_j xor (P_{j-1} [+] x) = f_{j-1}(P_j xor (C_{j-1} [+] x))

from known plaintext/ciphertext pairs.  For the first block the unknown
registers P_0, C_0 only ever appear inside (P_0 [+] U_2) and (C_0 [+] U_2),
and the permutation is XOR-linear, so any consistent register pair (y, z)
decrypts every first block; no search is needed there.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

from . import cipher, keystream
from .backend import ParameterError
from .keystream import BitPermutation


class OracleModelViolation(Exception):
    """The oracle responses contradict the fixed-clock attack model."""


# ---------------------------------------------------------------------------
# oracles

class EncryptionOracle:
    """Victim encryption machine with the clock pinned by the attacker."""

    def __init__(self, session: cipher.Session):
        self._session = session
        self.fixed_clock = session.t
        self.query_count = 0

    def encrypt_blocks(self, blocks) -> list:
        self.query_count += 1
        return cipher.encrypt(self._session, cipher.Message(list(blocks),
                                                            self.fixed_clock)).blocks


class DecryptionOracle:
    """Victim decryption machine; the attacker controls the channel, so the
    timestamp field of every submitted ciphertext is pinned as well."""

    def __init__(self, session: cipher.Session):
        self._session = session
        self.fixed_clock = session.t
        self.query_count = 0

    def decrypt_blocks(self, blocks) -> list:
        self.query_count += 1
        return cipher.decrypt(self._session, cipher.Message(list(blocks),
                                                            self.fixed_clock)).blocks


class DriftingClockOracle(EncryptionOracle):
    """Negative-test oracle: re-derives the session with a fresh timestamp on
    every query, violating the fixed-clock assumption."""

    def encrypt_blocks(self, blocks) -> list:
        self.query_count += 1
        s = self._session
        with warnings.catch_warnings():
            # the key was already vetted when the session was built
            warnings.simplefilter("ignore", cipher.WeakKeyWarning)
            drifted = cipher.init_session(s.key, s.t + self.query_count, s.n,
                                          s.r, s.backend, table=s.table)
        return cipher.encrypt(drifted, cipher.Message(list(blocks), drifted.t)).blocks


# ---------------------------------------------------------------------------
# recovered state

@dataclass
class RecoveredState:
    """Everything needed for keyless decryption, with per-item provenance."""

    n: int
    r: int
    perms: dict = field(default_factory=dict)       # j -> f_j
    noise: dict = field(default_factory=dict)       # j -> U_j  (j >= 3)
    reg1: tuple | None = None                        # (C_0 [+] U_2, P_0 [+] U_2)
    provenance: dict = field(default_factory=dict)   # item name -> method tag
    candidate_sets: dict = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------------------
# differential recovery of the permutations

def gen_cpa_battery(j: int, n: int, p_star: int = 0) -> list:
    """The 4n+1 chosen plaintexts of j blocks: a base message and one
    single-bit variant of the last block per bit position."""
    if j < 1:
        raise ParameterError("block index must be >= 1")
    base = [p_star] * j
    battery = [base]
    for l in range(1, 4 * n + 1):
        battery.append(base[:-1] + [p_star ^ (1 << (l - 1))])
    return battery


def _single_bit_index(delta: int, what: str) -> int:
    if delta == 0 or delta & (delta - 1):
        raise OracleModelViolation(
            f"{what} difference 0x{delta:x} is not a single bit; "
            "the oracle clock is not actually fixed")
    return delta.bit_length() - 1


def recover_fj_cpa(oracle: EncryptionOracle, j: int, n: int,
                   p_star: int = 0) -> BitPermutation:
    """Reconstruct f_{j-1} exactly from the 4n+1 query battery."""
    battery = gen_cpa_battery(j, n, p_star)
    base_c = oracle.encrypt_blocks(battery[0])[j - 1]
    dest = []
    for msg in battery[1:]:
        c = oracle.encrypt_blocks(msg)[j - 1]
        dest.append(_single_bit_index(base_c ^ c, "ciphertext"))
    if sorted(dest) != list(range(4 * n)):
        raise OracleModelViolation("recovered map is not a bijection")
    return BitPermutation(tuple(dest), n)


def recover_all_f(oracle: EncryptionOracle, r: int, n: int,
                  p_star: int = 0) -> RecoveredState:
    state = RecoveredState(n=n, r=r)
    for j in range(1, r + 1):
        state.perms[j - 1] = recover_fj_cpa(oracle, j, n, p_star)
        state.provenance[f"f{j - 1}"] = "cpa"
    return state


def recover_finv_cca(oracle: DecryptionOracle, j: int, n: int,
                     c_star: int = 0) -> BitPermutation:
    """Chosen-ciphertext dual: returns f_{j-1}^{-1}."""
    battery = gen_cpa_battery(j, n, c_star)  # same shape, interpreted as ciphertexts
    base_p = oracle.decrypt_blocks(battery[0])[j - 1]
    dest = []
    for msg in battery[1:]:
        p = oracle.decrypt_blocks(msg)[j - 1]
        dest.append(_single_bit_index(base_p ^ p, "plaintext"))
    if sorted(dest) != list(range(4 * n)):
        raise OracleModelViolation("recovered map is not a bijection")
    return BitPermutation(tuple(dest), n)


def recover_all_finv(oracle: DecryptionOracle, r: int, n: int,
                     c_star: int = 0) -> RecoveredState:
    state = RecoveredState(n=n, r=r)
    for j in range(1, r + 1):
        finv = recover_finv_cca(oracle, j, n, c_star)
        state.perms[j - 1] = keystream.invert(finv)
        state.provenance[f"f{j - 1}"] = "cca"
    return state


# ---------------------------------------------------------------------------
# solving the noise vectors

def solve_uj(pairs, f: BitPermutation, n: int, order=None) -> list:
    """All x = U_{j+1} consistent with every (P_{j-1}, P_j, C_{j-1}, C_j).

    Exhaustive over the 2^{4n} candidates, enumerated in `order` when given
    (e.g. from prioritized_candidates).  An empty result means the inputs are
    inconsistent with the supplied permutation.
    """
    if not pairs:
        raise ParameterError("at least one plaintext/ciphertext pair is needed")
    mask = (1 << (4 * n)) - 1
    candidates = order if order is not None else range(mask + 1)
    sols = []
    for x in candidates:
        ok = True
        for p_prev, p_j, c_prev, c_j in pairs:
            if c_j ^ ((p_prev + x) & mask) != \
                    keystream.apply(f, p_j ^ ((c_prev + x) & mask)):
                ok = False
                break
        if ok:
            sols.append(x)
    if not sols:
        raise ValueError("no candidate satisfies the pairs; wrong permutation "
                         "or mismatched pairs")
    return sols


def solve_block1_registers(pairs, f0: BitPermutation, n: int) -> tuple:
    """A register pair (y, z) with y ~ C_0 [+] U_2 and z ~ P_0 [+] U_2.

    pairs are (P_1, C_1) tuples from known messages.  Since f_0 is
    XOR-linear, (0, C_1 xor f_0(P_1)) reproduces every pair; the remaining
    pairs are used as a consistency check of the recovered f_0.
    """
    if not pairs:
        raise ParameterError("at least one first-block pair is needed")
    p1, c1 = pairs[0]
    y = 0
    z = c1 ^ keystream.apply(f0, p1)
    f0inv = keystream.invert(f0)
    for p, c in pairs:
        if keystream.apply(f0inv, c ^ z) ^ y != p:
            raise ValueError("first-block pairs are inconsistent with f_0")
    return y, z


def prioritized_candidates(alpha_est: float, n: int):
    """All 2^{4n} block values, most probable noise-vector classes first.

    With Prob{bit = 0} = alpha, values fall into classes A_i by their count
    of 0-bits.  alpha < 0.5: plain descending-probability order A_0 -> A_4n.
    alpha > 0.5: the class pairs (A_i, A_{4n-i}) are walked outside-in with
    the heavier class first, the order suited to an attacker who only knows
    alpha is extreme.  alpha = 0.5: natural numeric order.
    """
    if not 0.0 < alpha_est < 1.0:
        raise ParameterError("alpha estimate must be in (0, 1)")
    width = 4 * n
    if alpha_est == 0.5:
        yield from range(1 << width)
        return

    def klass(ones: int):
        """Values with `ones` one-bits, ascending numerically (Gosper)."""
        if ones == 0:
            yield 0
            return
        v = (1 << ones) - 1
        top = 1 << width
        while v < top:
            yield v
            c = v & -v
            rr = v + c
            v = (((rr ^ v) >> 2) // c) | rr

    if alpha_est < 0.5:
        # i 0-bits == width - i 1-bits; A_0 (all ones) is the heaviest
        for zeros in range(width + 1):
            yield from klass(width - zeros)
    else:
        for i in range(2 * n):
            yield from klass(i)               # A_{4n-i}: few ones, many zeros
            yield from klass(width - i)       # A_i
        yield from klass(2 * n)


def keyless_decrypt(state: RecoveredState, blocks) -> list:
    """Decrypt with recovered material only; None marks coverage gaps."""
    mask = (1 << (4 * state.n)) - 1
    out = []
    p_prev = None
    c_prev = None
    for j, c in enumerate(blocks, start=1):
        f = state.perms.get(j - 1)
        if j == 1:
            if f is None or state.reg1 is None:
                out.append(None)
            else:
                y, z = state.reg1
                out.append(keystream.apply(keystream.invert(f), c ^ z) ^ y)
        else:
            u = state.noise.get(j + 1)
            if f is None or u is None or p_prev is None or c_prev is None:
                out.append(None)
            else:
                out.append(keystream.apply(keystream.invert(f),
                                           c ^ ((p_prev + u) & mask))
                           ^ ((c_prev + u) & mask))
        p_prev = out[-1]
        c_prev = c
    return out


def solve_all_noise(state: RecoveredState, known_messages,
                    order=None) -> RecoveredState:
    """Fill state.noise (and reg1) from known (P_blocks, C_blocks) messages.

    Every message must come from the same fixed-clock session the
    permutations were recovered from.  For each block index the solver keeps
    the full candidate set; ambiguous indices get provenance 'ambiguous' and
    the first candidate in enumeration order.
    """
    if not known_messages:
        raise ParameterError("at least one known message is needed")
    first_pairs = [(p[0], c[0]) for p, c in known_messages if p]
    state.reg1 = solve_block1_registers(first_pairs, state.perms[0], state.n)
    state.provenance["reg1"] = "affine"
    max_len = max(len(p) for p, _ in known_messages)
    for j in range(2, max_len + 1):
        pairs = [(p[j - 2], p[j - 1], c[j - 2], c[j - 1])
                 for p, c in known_messages if len(p) >= j]
        sols = solve_uj(pairs, state.perms[j - 1], state.n, order=order)
        state.candidate_sets[j] = sols
        state.noise[j + 1] = sols[0]
        state.provenance[f"U{j + 1}"] = "solved" if len(sols) == 1 else "ambiguous"
    return state


def _settled(sols, f: BitPermutation) -> bool:
    """True once the candidate set is a single equivalence family.

    When f fixes the most significant bit position, x and x [+] 2^{4n-1}
    are equivalent keys: adding the top-bit power is carry-free, so it
    commutes with both the permutation and the modular additions and the
    two candidates decrypt every ciphertext identically.  (Wider top-fixed
    strides do not qualify: their internal carries are data-dependent.)
    """
    if len(sols) <= 1:
        return True
    if f.dest[f.width - 1] != f.width - 1:
        return False
    mod = 1 << (f.width - 1)
    return len({x % mod for x in sols}) == 1


@dataclass
class AttackReport:
    state: RecoveredState
    recovery_queries: int
    extra_queries: int
    candidate_sets: dict


def full_attack(oracle: EncryptionOracle, known_messages, r: int, n: int,
                seed: int = 0, max_extra_queries: int = 32) -> AttackReport:
    """Recover permutations, then the noise vectors, for keyless decryption.

    The solve step searches all 2^{4n} candidates per block against the
    known (P, C) messages.  A single equation has ~2^n structurally related
    solutions (the branch degeneracy of the modular-addition/XOR mixture),
    so leftover ambiguity is resolved with extra chosen-plaintext queries
    until each candidate set collapses to one equivalence family; members of
    a family decrypt identically, so any of them completes the key.
    """
    state = recover_all_f(oracle, r, n)
    recovery_queries = oracle.query_count
    state = solve_all_noise(state, known_messages)
    mask = (1 << (4 * n)) - 1
    sets = dict(state.candidate_sets)
    rng = random.Random(f"disambiguate:{seed}")
    extra = 0
    while extra < max_extra_queries and \
            any(not _settled(sets[j], state.perms[j - 1]) for j in sets):
        p = [rng.randrange(mask + 1) for _ in range(r)]
        c = oracle.encrypt_blocks(p)
        extra += 1
        for j in sets:
            if not _settled(sets[j], state.perms[j - 1]):
                pair = (p[j - 2], p[j - 1], c[j - 2], c[j - 1])
                sets[j] = [x for x in sets[j]
                           if _pair_consistent(x, state.perms[j - 1], pair, mask)]
    for j, sols in sets.items():
        state.noise[j + 1] = sols[0]
        state.provenance[f"U{j + 1}"] = \
            "solved" if _settled(sols, state.perms[j - 1]) else "ambiguous"
    return AttackReport(state=state, recovery_queries=recovery_queries,
                        extra_queries=extra, candidate_sets=sets)


def _pair_consistent(x, f, pair, mask) -> bool:
    p_prev, p_j, c_prev, c_j = pair
    return c_j ^ ((p_prev + x) & mask) == \
        keystream.apply(f, p_j ^ ((c_prev + x) & mask))


# ---------------------------------------------------------------------------
# recovered-state file format

def save_state(state: RecoveredState, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"YTSREC n={state.n} r={state.r}\n")
        for j in sorted(state.perms):
            dest = " ".join(str(d) for d in state.perms[j].dest)
            tag = state.provenance.get(f"f{j}", "assumed")
            fh.write(f"f{j}: {dest}  # {tag}\n")
        for j in sorted(state.noise):
            tag = state.provenance.get(f"U{j}", "assumed")
            fh.write(f"U{j}: 0x{state.noise[j]:0{state.n}x}  # {tag}\n")
        if state.reg1 is not None:
            y, z = state.reg1
            tag = state.provenance.get("reg1", "assumed")
            fh.write(f"reg1: 0x{y:0{state.n}x} 0x{z:0{state.n}x}  # {tag}\n")


def load_state(path) -> RecoveredState:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "YTSREC":
            raise ParameterError(f"{path} is not a recovered-state file")
        meta = dict(item.split("=") for item in header[1:])
        state = RecoveredState(n=int(meta["n"]), r=int(meta["r"]))
        for line in fh:
            body, _, comment = line.partition("#")
            body = body.strip()
            if not body:
                continue
            head, _, tail = body.partition(":")
            tag = comment.strip() or "assumed"
            if head == "reg1":
                y, z = (int(x, 16) for x in tail.split())
                state.reg1 = (y, z)
                state.provenance["reg1"] = tag
            elif head.startswith("f"):
                dest = tuple(int(x) for x in tail.split())
                state.perms[int(head[1:])] = BitPermutation(dest, state.n)
                state.provenance[head] = tag
            elif head.startswith("U"):
                state.noise[int(head[1:])] = int(tail, 16)
                state.provenance[head] = tag
    return state
