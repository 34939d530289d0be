"""The 2d-state measure-once automaton for MOD_p.

States are ordered q_{1,0}, q_{1,1}, ..., q_{d,0}, q_{d,1}.  Reading ``a``
rotates each pair (q_{i,0}, q_{i,1}) by 2 pi k_i / p.  The right endmarker is
only specified on the uniform direction over the q_{i,0}; the accepting
amplitude is read off by projecting onto that direction.
"""

from __future__ import annotations

import numpy as np
from sympy import isprime

from .derandomizer import ParameterSet


class ModQfa:
    def __init__(self, pset: ParameterSet):
        if not isprime(pset.n):
            raise ValueError(f"MOD_p automaton needs a prime modulus, got n={pset.n}")
        self.pset = pset
        d = pset.d
        self.angles = 2.0 * np.pi * np.asarray(pset.ks, dtype=float) / pset.n
        self._cos = np.cos(self.angles)
        self._sin = np.sin(self.angles)
        self.amplitudes = np.zeros(2 * d)
        self.amplitudes[0::2] = 1.0 / np.sqrt(d)
        self.steps = 0

    @property
    def p(self) -> int:
        return self.pset.n

    @property
    def d(self) -> int:
        return self.pset.d

    @property
    def accepting_state(self) -> int:
        return 0

    def step_a(self) -> "ModQfa":
        x = self.amplitudes[0::2].copy()
        y = self.amplitudes[1::2]
        self.amplitudes[0::2] = self._cos * x - self._sin * y
        self.amplitudes[1::2] = self._sin * x + self._cos * y
        self.steps += 1
        return self

    def run(self, j: int) -> "ModQfa":
        for _ in range(j):
            self.step_a()
        return self

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.amplitudes, self.amplitudes)))

    def accept_amplitude(self) -> float:
        # V_$ sends (1/sqrt d) sum_i q_{i,0} to q_{1,0}; the accepting amplitude
        # is the overlap with that direction
        return float(self.amplitudes[0::2].sum() / np.sqrt(self.d))


def init(pset: ParameterSet) -> ModQfa:
    return ModQfa(pset)


def step_a(qfa: ModQfa) -> ModQfa:
    return qfa.step_a()


def accept_probability_sim(pset: ParameterSet, j: int) -> float:
    if j < 0:
        raise ValueError(f"word length must be >= 0, got {j}")
    amp = ModQfa(pset).run(j).accept_amplitude()
    return amp * amp


def accept_probability_closed(pset: ParameterSet, j: int) -> float:
    if j < 0:
        raise ValueError(f"word length must be >= 0, got {j}")
    if j % pset.n == 0:
        return 1.0
    ks = np.asarray(pset.ks)
    bias = np.cos(2.0 * np.pi * ((ks * j) % pset.n) / pset.n).sum() / pset.d
    return float(bias * bias)


def accept_curve(pset: ParameterSet, js) -> list[tuple[int, float, float]]:
    """(j, closed, simulated) for increasing word lengths, reusing one automaton."""
    js = list(js)
    out = []
    qfa = ModQfa(pset)
    for j in sorted(set(js)):
        qfa.run(j - qfa.steps)
        amp = qfa.accept_amplitude()
        out.append((j, accept_probability_closed(pset, j), amp * amp))
    by_j = {row[0]: row for row in out}
    return [by_j[j] for j in js]
