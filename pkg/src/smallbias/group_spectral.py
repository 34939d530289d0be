"""Spectra of the averaged shift operators f(h) on Z_n.

Every f(h) = (I - J/n)(P_h + P_{-h})/2 is circulant, so the whole family is
diagonalised by the discrete Fourier basis.  Frequency 0 (the all-ones
vector) is annihilated by I - J/n; frequency j >= 1 carries the eigenvalue
cos(2 pi h j / n).  Everything the estimator needs is therefore a vector of
n - 1 per-frequency scalars, and the dense matrices only exist for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# exponents beyond this switch trace accumulation to log-sum-exp
OVERFLOW_EXPONENT = 500.0
DENSE_LIMIT = 64


@dataclass(frozen=True)
class CyclicGroup:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"modulus must be an integer >= 2, got {self.n!r}")

    @cached_property
    def cos_table(self) -> np.ndarray:
        """cos(2 pi r / n) for r in 0..n-1, mirrored so table[r] == table[n-r] bit for bit."""
        n = self.n
        half = np.arange(n // 2 + 1)
        vals = np.cos(2.0 * np.pi * half / n)
        table = np.empty(n)
        table[: n // 2 + 1] = vals
        table[n // 2 + 1 :] = vals[1 : n - n // 2][::-1]
        table.setflags(write=False)
        return table

    @cached_property
    def frequencies(self) -> np.ndarray:
        freqs = np.arange(1, self.n)
        freqs.setflags(write=False)
        return freqs

    def residue(self, h: int) -> int:
        if not 0 <= h < self.n:
            raise ValueError(f"residue {h} outside [0, {self.n})")
        return int(h)

    def frequency_cosines(self, k: int) -> np.ndarray:
        """cos(2 pi k j / n) for j = 1..n-1."""
        return self.cos_table[(k * self.frequencies) % self.n]


def character(group: CyclicGroup, h: int) -> complex:
    # characters are periodic, so any integer is reduced into Z_n first
    h %= group.n
    angle = 2.0 * math.pi * h / group.n
    return complex(math.cos(angle), math.sin(angle))


def f_eigenvalues(group: CyclicGroup, h: int) -> np.ndarray:
    """Eigenvalues of f(h) indexed by Fourier frequency; entry 0 is the annihilated mode."""
    h = group.residue(h)
    lam = np.empty(group.n)
    lam[0] = 0.0
    lam[1:] = group.frequency_cosines(h)
    return lam


def dense_f(group: CyclicGroup, h: int) -> np.ndarray:
    """Dense (I - J/n)(P_h + P_{-h})/2. Oracle use only."""
    n = group.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense_f is limited to n <= {DENSE_LIMIT}, got n={n}")
    h = group.residue(h)
    x = np.arange(n)
    p_h = np.zeros((n, n))
    p_h[x, (x + h) % n] = 1.0
    sym = 0.5 * (p_h + p_h.T)
    centre = np.eye(n) - np.full((n, n), 1.0 / n)
    return centre @ sym


@dataclass
class CosineLedger:
    """Running cosine sums c[j] = sum_i cos(2 pi x_i j / n) over a chosen prefix.

    ``c`` is stored for j = 1..n-1 (array position j-1).  Single writer.
    """

    group: CyclicGroup
    c: np.ndarray = field(default=None)
    prefix: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.c is None:
            self.c = np.zeros(self.group.n - 1)

    @property
    def n(self) -> int:
        return self.group.n

    @property
    def m(self) -> int:
        return len(self.prefix)

    @classmethod
    def from_prefix(cls, group: CyclicGroup, prefix) -> "CosineLedger":
        ledger = cls(group)
        for k in prefix:
            ledger.append(k)
        return ledger

    def append(self, k: int) -> None:
        k = self.group.residue(k)
        self.c = self.c + self.group.frequency_cosines(k)
        self.prefix.append(k)

    def extended(self, k: int) -> "CosineLedger":
        out = CosineLedger(self.group, self.c.copy(), list(self.prefix))
        out.append(k)
        return out


def log_trace_exp_sums(c: np.ndarray, t: float, sign: int) -> np.ndarray:
    """log(1 + sum_j exp(sign t c[..., j])) along the last axis, always in log domain."""
    x = (sign * t) * np.asarray(c, dtype=float)
    top = np.maximum(x.max(axis=-1, initial=0.0), 0.0)
    shifted = np.exp(x - top[..., None]).sum(axis=-1) + np.exp(-top)
    return top + np.log(shifted)


def trace_exp(ledger: CosineLedger, t: float, sign: int) -> float:
    """Tr exp(sign t sum_i f(x_i)), evaluated per frequency."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    c = ledger.c
    if c.size == 0 or t * np.abs(c).max() <= OVERFLOW_EXPONENT:
        return float(1.0 + np.exp((sign * t) * c).sum())
    return float(np.exp(log_trace_exp_sums(c, t, sign)))


def log_trace_exp(ledger: CosineLedger, t: float, sign: int) -> float:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return float(log_trace_exp_sums(ledger.c, t, sign))


@dataclass(frozen=True)
class SpectralProfile:
    """Eigenvalues of E[exp(+-t f(X))] per frequency.

    X is uniform on Z_n, or on Z_n minus {0} when ``exclude_zero`` is set.
    """

    n: int
    t: float
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    exclude_zero: bool = False

    @property
    def nu_plus(self) -> float:
        return float(self.mu_plus.max())

    @property
    def nu_minus(self) -> float:
        return float(self.mu_minus.max())

    @property
    def log_nu_plus(self) -> float:
        return math.log(self.nu_plus)

    @property
    def log_nu_minus(self) -> float:
        return math.log(self.nu_minus)


def _divisors(n: int) -> list[int]:
    small = [g for g in range(1, math.isqrt(n) + 1) if n % g == 0]
    return sorted(set(small + [n // g for g in small]))


def build_profile(group: CyclicGroup, t: float, exclude_zero: bool = False) -> SpectralProfile:
    if t < 0:
        raise ValueError(f"temperature must be non-negative, got {t}")
    n = group.n
    table = group.cos_table
    # {h j mod n : h in Z_n} is the subgroup generated by gcd(j, n), each element
    # hit gcd(j, n) times, so mu[j] depends on j only through gcd(j, n).
    by_gcd_plus = {}
    by_gcd_minus = {}
    for g in _divisors(n):
        if g == n:
            continue
        vals = table[::g]
        by_gcd_plus[g] = float(np.exp(t * vals).mean())
        by_gcd_minus[g] = float(np.exp(-t * vals).mean())
    gcds = np.gcd(np.arange(1, n), n)
    mu_plus = np.empty(n)
    mu_minus = np.empty(n)
    mu_plus[0] = mu_minus[0] = 1.0
    mu_plus[1:] = [by_gcd_plus[g] for g in gcds]
    mu_minus[1:] = [by_gcd_minus[g] for g in gcds]
    if exclude_zero:
        # drop the h = 0 term, where every frequency sees cos(0) = 1
        mu_plus[1:] = (n * mu_plus[1:] - math.exp(t)) / (n - 1)
        mu_minus[1:] = (n * mu_minus[1:] - math.exp(-t)) / (n - 1)
    mu_plus.setflags(write=False)
    mu_minus.setflags(write=False)
    return SpectralProfile(n=n, t=float(t), mu_plus=mu_plus, mu_minus=mu_minus, exclude_zero=exclude_zero)
