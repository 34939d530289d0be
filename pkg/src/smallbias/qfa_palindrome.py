"""Fingerprinting automaton for the Palindrome_s promise problem.

Input is a string over {0,1,#} with a '#' after every s bits.  Each subword
x_0..x_{s-1} is fingerprinted by q = sum_{j<s/2} 2^j x_j and
r = sum_{j>=s/2} 2^(s-j-1) x_j, so q == r exactly when the subword reads the
same backwards.  Branch i of the index register rotates the target by
2 pi k_i (q - r) / 2^(s/2).  The '#' measurement continues with probability
((1/d) sum_i cos(.))^2 and the register restarts from its initial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .derandomizer import ParameterSet, choose_d, find_set
from .group_spectral import CyclicGroup

ALPHABET = frozenset("01#")
# shots per independent random stream; workers must split on these blocks
SHOT_BLOCK = 4096


class PromiseViolation(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"promise violation at offset {offset}: {message}")
        self.offset = offset


@dataclass(frozen=True)
class PromiseWord:
    s: int
    subwords: tuple[str, ...]
    # None when the input ends on a complete subword with no trailing '#'
    ignored_tail: str | None = None

    def reconstruct(self) -> str:
        blocks = list(self.subwords)
        if self.ignored_tail is not None:
            blocks.append(self.ignored_tail)
        return "#".join(blocks)


def _check_s(s: int) -> None:
    if s < 2 or s % 2:
        raise ValueError(f"subword length must be an even integer >= 2, got {s}")


def validate_promise(raw: str, s: int) -> PromiseWord:
    _check_s(s)
    for pos, ch in enumerate(raw):
        if ch not in ALPHABET:
            raise PromiseViolation(f"illegal character {ch!r}", pos)
    blocks = raw.split("#")
    subwords = []
    tail = None
    offset = 0
    for idx, block in enumerate(blocks):
        last = idx == len(blocks) - 1
        if len(block) > s:
            raise PromiseViolation(f"missing '#' after {s} symbols", offset + s)
        if len(block) == s:
            subwords.append(block)
        elif last:
            tail = block
        else:
            raise PromiseViolation(f"subword of length {len(block)} before '#', expected {s}", offset)
        offset += len(block) + 1
    return PromiseWord(s, tuple(subwords), tail)


def fingerprint(subword: str) -> tuple[int, int]:
    s = len(subword)
    _check_s(s)
    half = s // 2
    bits = [int(ch) for ch in subword]
    q = sum(bits[j] << j for j in range(half))
    r = sum(bits[j] << (s - j - 1) for j in range(half, s))
    return q, r


def paper_default_d(s: int, epsilon: float) -> int:
    """ceil(2 log2(2 * 2^(s/2)) / epsilon)."""
    return math.ceil(2.0 * math.log2(2.0 * 2 ** (s // 2)) / epsilon)


def default_d(s: int, epsilon: float) -> int:
    """Size used when no set is supplied: the smallest Phi_0-feasible d.

    The closed-form size is only a starting point: it is shrunk to the
    feasibility minimum when that is smaller, and raised to it otherwise so the
    greedy construction can run.
    """
    _check_s(s)
    return choose_d(CyclicGroup(2 ** (s // 2)), math.sqrt(epsilon))


class PalindromeQfa:
    def __init__(self, s: int, pset: ParameterSet):
        _check_s(s)
        n = 2 ** (s // 2)
        if pset.n != n:
            raise ValueError(f"set modulus {pset.n} does not match 2^(s/2) = {n} for s={s}")
        self.s = s
        self.n = n
        self.pset = pset
        self._ks = np.asarray(pset.ks, dtype=np.int64)

    @classmethod
    def build(cls, s: int, epsilon: float, d: int | None = None) -> "PalindromeQfa":
        _check_s(s)
        if d is None:
            d = default_d(s, epsilon)
        return cls(s, find_set(CyclicGroup(2 ** (s // 2)), d, math.sqrt(epsilon)))

    @property
    def d(self) -> int:
        return self.pset.d

    @property
    def t_qubits(self) -> int:
        return math.ceil(math.log2(self.d)) + 1

    @property
    def position_qubits(self) -> int:
        return math.ceil(math.log2(self.s))

    def _check_subword(self, subword: str) -> None:
        if len(subword) != self.s or set(subword) - {"0", "1"}:
            raise ValueError(f"expected a {self.s}-bit subword, got {subword!r}")

    def fingerprint_angles(self, subword: str) -> np.ndarray:
        self._check_subword(subword)
        q, r = fingerprint(subword)
        return 2.0 * np.pi * (((self._ks * (q - r)) % self.n) / self.n)

    def stepped_subword_angles(self, subword: str) -> np.ndarray:
        """Accumulate the per-symbol rotations branch by branch, returned mod 2 pi."""
        self._check_subword(subword)
        s, half = self.s, self.s // 2
        theta = np.zeros(self.d)
        pos = 0
        for ch in subword:
            if ch == "1":
                if pos < half:
                    theta += 2.0 * np.pi * self._ks * 2**pos / self.n
                else:
                    theta -= 2.0 * np.pi * self._ks * 2 ** (s - pos - 1) / self.n
            pos = (pos + 1) % s
        return np.mod(theta, 2.0 * np.pi)

    def subword_continue_prob(self, subword: str) -> float:
        self._check_subword(subword)
        q, r = fingerprint(subword)
        if q == r:
            return 1.0
        bias = np.cos(2.0 * np.pi * ((self._ks * (q - r)) % self.n) / self.n).sum() / self.d
        return float(bias * bias)

    def simulated_continue_prob(self, subword: str) -> float:
        # target starts in |0>; G(theta)|0> has |0>-amplitude cos(theta), and
        # un-spreading the index register projects onto the uniform branch sum
        amp = np.cos(self.stepped_subword_angles(subword)).sum() / self.d
        return float(amp * amp)

    def continue_probs(self, word: PromiseWord) -> list[float]:
        self._check_word(word)
        return [self.subword_continue_prob(w) for w in word.subwords]

    def _check_word(self, word: PromiseWord) -> None:
        if word.s != self.s:
            raise ValueError(f"word was validated for s={word.s}, automaton has s={self.s}")

    def accept_probability_exact(self, word: PromiseWord) -> float:
        return math.prod(self.continue_probs(word))

    def accept_sampled(self, word: PromiseWord, shots: int, seed: int) -> tuple[int, int]:
        """Seeded shot sampling.

        Shots are cut into blocks of SHOT_BLOCK; block b draws from
        SeedSequence(seed, spawn_key=(b,)), so counts do not depend on how the
        blocks are scheduled.
        """
        if shots < 1:
            raise ValueError(f"shots must be >= 1, got {shots}")
        probs = np.asarray(self.continue_probs(word))
        accepted = 0
        for b, lo in enumerate(range(0, shots, SHOT_BLOCK)):
            size = min(SHOT_BLOCK, shots - lo)
            accepted += _sample_block(probs, size, seed, b)
        return accepted, shots - accepted


def _sample_block(probs: np.ndarray, size: int, seed: int, block: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    if probs.size == 0:
        return size
    draws = rng.random((size, probs.size))
    # a shot survives only if every subword measurement continues
    return int((draws < probs[None, :]).all(axis=1).sum())
