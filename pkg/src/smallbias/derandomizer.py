"""Greedy construction of small-biased multisets by pessimistic estimators.

The failure event is max_j |(1/d) sum_i cos(2 pi k_i j / n)| > gamma.  With
t = gamma / 2 the estimator after choosing a prefix of length m is

    Phi_m = exp(-t gamma d) * (Tr exp(+t F) nu_+^(d-m) + Tr exp(-t F) nu_-^(d-m))

where F is the sum of f(k_i) over the prefix and nu_+- are the operator norms
of E[exp(+-t f(X))] for X uniform on the candidate residues 1..n-1.  Each
greedy step appends the candidate that minimises Phi_{m+1}; averaging over
the same candidates keeps Phi from increasing.  All comparisons are done on
log Phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .group_spectral import (
    CosineLedger,
    CyclicGroup,
    SpectralProfile,
    build_profile,
    log_trace_exp_sums,
)

D_MAX = 10**7
# log-domain slack under which two candidates count as tied (smallest k wins)
TIE_TOL = 1e-12
# rows * frequencies evaluated at once in a greedy step
_CHUNK = 1 << 22


class InfeasibleError(ValueError):
    """Raised when the initial estimator cannot certify a set for (n, d, gamma)."""


class DescentError(RuntimeError):
    """Raised when no nonzero candidate keeps the estimator from increasing."""


@dataclass(frozen=True)
class ParameterSet:
    n: int
    d: int
    gamma: float
    ks: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"modulus must be >= 2, got {self.n}")
        if self.d < 1:
            raise ValueError(f"set size must be >= 1, got {self.d}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if len(self.ks) != self.d:
            raise ValueError(f"expected {self.d} residues, got {len(self.ks)}")
        bad = [k for k in self.ks if not 1 <= k < self.n]
        if bad:
            raise ValueError(f"residues must lie in 1..{self.n - 1}, got {bad[0]}")

    @property
    def group(self) -> CyclicGroup:
        return CyclicGroup(self.n)

    @property
    def epsilon(self) -> float:
        return self.gamma**2


def _temperature(gamma: float) -> float:
    return gamma / 2.0


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")


def candidate_profile(group: CyclicGroup, gamma: float) -> SpectralProfile:
    # Expectations run over the residues the greedy may actually pick.  With 0
    # in the average, the descent can stall once the prefix is balanced: only
    # k = 0 (excluded) then lowers the estimator.
    return build_profile(group, _temperature(gamma), exclude_zero=True)


def _log_phi(
    profile: SpectralProfile, d: int, gamma: float, remaining, log_tr_plus, log_tr_minus
):
    t = _temperature(gamma)
    plus = log_tr_plus + remaining * profile.log_nu_plus
    minus = log_tr_minus + remaining * profile.log_nu_minus
    return -t * gamma * d + np.logaddexp(plus, minus)


def log_phi0(group: CyclicGroup, d: int, gamma: float, profile: SpectralProfile | None = None) -> float:
    if profile is None:
        profile = candidate_profile(group, gamma)
    log_n = math.log(group.n)
    return float(_log_phi(profile, d, gamma, d, log_n, log_n))


def phi0(group: CyclicGroup, d: int, gamma: float) -> float:
    return math.exp(log_phi0(group, d, gamma))


@dataclass
class EstimatorState:
    group: CyclicGroup
    profile: SpectralProfile
    d: int
    gamma: float
    ledger: CosineLedger
    log_phi: float = field(default=math.nan)

    def __post_init__(self):
        if math.isnan(self.log_phi):
            self.log_phi = self._log_phi_of(self.ledger)

    @classmethod
    def start(cls, group: CyclicGroup, d: int, gamma: float) -> "EstimatorState":
        _check_gamma(gamma)
        if d < 1:
            raise ValueError(f"set size must be >= 1, got {d}")
        profile = candidate_profile(group, gamma)
        return cls(group, profile, d, gamma, CosineLedger(group))

    @property
    def t(self) -> float:
        return _temperature(self.gamma)

    @property
    def m(self) -> int:
        return self.ledger.m

    @property
    def phi(self) -> float:
        return math.exp(self.log_phi)

    def _log_phi_of(self, ledger: CosineLedger) -> float:
        lp = log_trace_exp_sums(ledger.c, self.t, 1)
        lm = log_trace_exp_sums(ledger.c, self.t, -1)
        return float(_log_phi(self.profile, self.d, self.gamma, self.d - ledger.m, lp, lm))

    def candidate_log_phis(self, candidates: Sequence[int] | None = None) -> np.ndarray:
        """log Phi_{m+1} for each candidate next residue (default 1..n-1)."""
        group = self.group
        if candidates is None:
            candidates = np.arange(1, group.n)
        candidates = np.asarray(candidates, dtype=np.int64)
        freqs = group.frequencies
        remaining = self.d - self.m - 1
        out = np.empty(candidates.size)
        rows = max(1, _CHUNK // max(1, freqs.size))
        for lo in range(0, candidates.size, rows):
            ks = candidates[lo : lo + rows]
            c = self.ledger.c[None, :] + group.cos_table[(ks[:, None] * freqs[None, :]) % group.n]
            lp = log_trace_exp_sums(c, self.t, 1)
            lm = log_trace_exp_sums(c, self.t, -1)
            out[lo : lo + rows] = _log_phi(self.profile, self.d, self.gamma, remaining, lp, lm)
        return out


def estimator_value(state: EstimatorState) -> float:
    return state.phi


def greedy_step(state: EstimatorState) -> tuple[int, EstimatorState]:
    if state.m >= state.d:
        raise ValueError(f"all {state.d} residues already chosen")
    scores = state.candidate_log_phis()
    best = scores.min()
    if best > state.log_phi:
        raise DescentError(
            f"estimator descent failed at step {state.m} (n={state.group.n}): "
            f"best candidate log Phi {best:.17g} > current {state.log_phi:.17g}"
        )
    # order-independent reduction: smallest residue within TIE_TOL of the minimum
    cutoff = min(best + TIE_TOL, state.log_phi)
    k = int(np.flatnonzero(scores <= cutoff)[0]) + 1
    nxt = EstimatorState(
        state.group, state.profile, state.d, state.gamma, state.ledger.extended(k), float(scores[k - 1])
    )
    return k, nxt


def run_greedy(group: CyclicGroup, d: int, gamma: float) -> tuple[ParameterSet, list[float]]:
    """find_set, also returning Phi_0..Phi_d."""
    _check_gamma(gamma)
    state = EstimatorState.start(group, d, gamma)
    if state.log_phi >= 0.0:
        raise InfeasibleError(
            f"infeasible (n, d, gamma) = ({group.n}, {d}, {gamma:.17g}): Phi_0 = {state.phi:.6g} >= 1"
        )
    phis = [state.phi]
    while state.m < d:
        _, state = greedy_step(state)
        phis.append(state.phi)
    pset = ParameterSet(group.n, d, gamma, tuple(state.ledger.prefix))
    report = sigma_check(pset)
    if not report.ok:
        # Phi_d < 1 bounds the failure probability of a fixed set, so this is a bug
        raise AssertionError(f"constructed set fails sigma_check: {report}")
    return pset, phis


def find_set(group: CyclicGroup, d: int, gamma: float) -> ParameterSet:
    return run_greedy(group, d, gamma)[0]


def choose_d(group: CyclicGroup, gamma: float, d_max: int = D_MAX) -> int:
    """Smallest d with Phi_0(n, d, gamma) < 1."""
    _check_gamma(gamma)
    profile = candidate_profile(group, gamma)
    tg = _temperature(gamma) * gamma
    if max(profile.log_nu_plus, profile.log_nu_minus) >= tg or log_phi0(group, d_max, gamma, profile) >= 0:
        raise InfeasibleError(f"infeasible: no d <= {d_max} gives Phi_0 < 1 for n={group.n}, gamma={gamma:.17g}")
    # log Phi_0 is strictly decreasing in d here: bisect for the first negative value
    lo, hi = 0, d_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_phi0(group, mid, gamma, profile) < 0:
            hi = mid
        else:
            lo = mid
    return hi


class SigmaReport(NamedTuple):
    ok: bool
    max_bias: float
    argmax_j: int


def bias_curve(pset: ParameterSet) -> np.ndarray:
    """b(j) = (1/d) sum_i cos(2 pi k_i j / n) for j = 1..n-1."""
    group = pset.group
    counts = np.bincount(np.asarray(pset.ks), minlength=group.n)
    used = np.flatnonzero(counts)
    cos = group.cos_table[(used[:, None] * group.frequencies[None, :]) % group.n]
    return (counts[used, None] * cos).sum(axis=0) / pset.d


def sigma_check(pset: ParameterSet, gamma: float | None = None, tol: float = 0.0) -> SigmaReport:
    gamma = pset.gamma if gamma is None else gamma
    mags = np.abs(bias_curve(pset))
    top = float(mags.max())
    j = int(np.flatnonzero(mags >= top - TIE_TOL)[0]) + 1
    return SigmaReport(top <= gamma + tol, top, j)
