"""Post-selected Monte Carlo estimates of the χ and S terms, η and ε.

The engine processes the fixed ensemble in chunks of trials.  For each chunk
it forms every Alice and Bob quadratic form with two small matrix products
(projectors are factored as ``P = R^† R`` so ``λ^† P λ = ||R λ||^2``; Bob's
factor acts on the right tensor factor of λ viewed as a 4x4 matrix) and then
reduces the detection pattern to integer counts per term.  Counts from
different chunks or workers are merged by integer addition, so the result is
exact and independent of chunking and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hidden import SQRT2_M1, ModelParams, check_seed, noise_block
from .operators import SIGN_TRIPLES, build_magic_square, joint_projector, projector_factor
from .oracle import psi_1234
from .terms import ALL_TERMS, CHI_TERMS, PRODUCT, S_TERMS, TermSpec

CHUNK_TRIALS = 1 << 13
DEFAULT_TRIALS = 1 << 20
DEFAULT_GRID = tuple(0.25 * k for k in range(1, 29))

_SIGNS = np.array(SIGN_TRIPLES, dtype=np.int8)


@dataclass
class TermCounts:
    n_plus: int = 0
    n_minus: int = 0
    n_bob_single: int = 0
    n_coincident: int = 0
    n_alice_multi_coincident: int = 0
    # Diagnostic only: Bob double detections, excluded from every estimate.
    n_bob_multi: int = 0

    def __add__(self, other: "TermCounts") -> "TermCounts":
        return TermCounts(
            self.n_plus + other.n_plus,
            self.n_minus + other.n_minus,
            self.n_bob_single + other.n_bob_single,
            self.n_coincident + other.n_coincident,
            self.n_alice_multi_coincident + other.n_alice_multi_coincident,
            self.n_bob_multi + other.n_bob_multi,
        )

    @property
    def n_conditioned(self) -> int:
        return self.n_plus + self.n_minus


def conditional_expectation(counts: TermCounts) -> float | None:
    """``(n+ - n-) / (n+ + n-)``, or ``None`` when nothing was post-selected."""
    n = counts.n_plus + counts.n_minus
    if n == 0:
        return None
    return (counts.n_plus - counts.n_minus) / n


def standard_error(counts: TermCounts) -> float | None:
    p = conditional_expectation(counts)
    if p is None:
        return None
    return math.sqrt(max(0.0, 1.0 - p * p) / counts.n_conditioned)


def context_efficiency(counts: TermCounts) -> float | None:
    if counts.n_bob_single == 0:
        return None
    return counts.n_coincident / counts.n_bob_single


def context_epsilon(counts: TermCounts) -> float | None:
    if counts.n_bob_single == 0:
        return None
    return counts.n_alice_multi_coincident / counts.n_bob_single


class _Kernel:
    """Stacked projector factors for every context and every Bob observable."""

    def __init__(self):
        sq = build_magic_square()
        self.contexts = sq.contexts
        self.ctx_index = {c.label: i for i, c in enumerate(self.contexts)}
        self.bob_observables = sq.observables
        self.bob_index = {o.name: i for i, o in enumerate(self.bob_observables)}

        self.alice_rows, self.alice_groups = self._stack(
            joint_projector(ctx, st) for ctx in self.contexts for st in SIGN_TRIPLES
        )
        self.bob_rows, self.bob_groups = self._stack(
            obs.projector(sign) for obs in self.bob_observables for sign in (1, -1)
        )
        self.psi = psi_1234()

    @staticmethod
    def _stack(projectors: Iterable[np.ndarray]):
        factors = [projector_factor(p) for p in projectors]
        rows = np.concatenate([f for f in factors if len(f)], axis=0)
        groups = np.zeros((len(factors), len(rows)))
        k = 0
        for g, f in enumerate(factors):
            groups[g, k : k + len(f)] = 1.0
            k += len(f)
        return rows, groups

    @staticmethod
    def _row_norms(rows: np.ndarray, x: np.ndarray) -> np.ndarray:
        # x is (4, n, 4): the factor acts on axis 0, axis 2 is summed over.
        n = x.shape[1]
        y = rows @ np.ascontiguousarray(x).reshape(4, n * 4)
        v = y.view(np.float64).reshape(len(rows), n, 8)
        return np.einsum("ijk,ijk->ij", v, v)

    def forms(self, lam: np.ndarray):
        """Alice forms ``(6, 8, n)`` and Bob forms ``(9, 2, n)`` for a stack of λ."""
        n = lam.shape[0]
        m = lam.reshape(n, 4, 4)
        alice = self.alice_groups @ self._row_norms(self.alice_rows, m.transpose(1, 0, 2))
        bob = self.bob_groups @ self._row_norms(self.bob_rows, m.transpose(2, 0, 1))
        return (
            alice.reshape(len(self.contexts), len(SIGN_TRIPLES), n),
            bob.reshape(len(self.bob_observables), 2, n),
        )


_KERNEL: _Kernel | None = None


def _kernel() -> _Kernel:
    global _KERNEL
    if _KERNEL is None:
        _KERNEL = _Kernel()
    return _KERNEL


def _detections(s: float, seed: int, start: int, stop: int, ctx_labels, bob_names):
    """Per-trial detection patterns for the requested contexts and Bob observables.

    Alice entries are ``(single, multi, signs)``; Bob entries are
    ``(plus, minus, multi)`` where ``plus``/``minus`` already exclude double
    detections.
    """
    k = _kernel()
    lam = (s * SQRT2_M1) * k.psi + noise_block(seed, start, stop)
    alice_f, bob_f = k.forms(lam)

    alice = {}
    for label in ctx_labels:
        exceed = alice_f[k.ctx_index[label]] > 1.0
        hits = exceed.sum(axis=0)
        signs = _SIGNS[exceed.argmax(axis=0)]
        alice[label] = (hits == 1, hits >= 2, signs)

    bob = {}
    for name in bob_names:
        i = k.bob_index[name]
        plus = bob_f[i, 0] > 1.0
        minus = bob_f[i, 1] > 1.0
        bob[name] = (plus & ~minus, minus & ~plus, plus & minus)
    return alice, bob


def _term_outcomes(t: TermSpec, alice, bob):
    """Coincidence mask and the ±1 value each trial contributes to ``t``."""
    a_single, _, signs = alice[t.ctx.label]
    b_plus, b_minus, _ = bob[t.bob_obs.name]
    coinc = a_single & (b_plus | b_minus)
    if t.kind == PRODUCT:
        value = signs.prod(axis=1)
    else:
        value = signs[:, t.ctx.position(t.target)] * np.where(b_plus, 1, -1)
    return coinc, value


def _count_chunk(
    s: float, seed: int, start: int, stop: int, terms: Sequence[TermSpec]
) -> list[TermCounts]:
    alice, bob = _detections(
        s, seed, start, stop, {t.ctx.label for t in terms}, {t.bob_obs.name for t in terms}
    )
    out = []
    for t in terms:
        coinc, value = _term_outcomes(t, alice, bob)
        a_multi = alice[t.ctx.label][1]
        b_plus, b_minus, b_multi = bob[t.bob_obs.name]
        b_single = b_plus | b_minus
        out.append(
            TermCounts(
                n_plus=int(np.count_nonzero(coinc & (value == 1))),
                n_minus=int(np.count_nonzero(coinc & (value == -1))),
                n_bob_single=int(np.count_nonzero(b_single)),
                n_coincident=int(np.count_nonzero(coinc)),
                n_alice_multi_coincident=int(np.count_nonzero(a_multi & b_single)),
                n_bob_multi=int(np.count_nonzero(b_multi)),
            )
        )
    return out


def selected_trials(s: float, seed: int, n_trials: int, term: TermSpec) -> np.ndarray:
    """Indices of the trials post-selected (single coincident detections) for ``term``."""
    found = []
    for lo, hi in _chunks(0, n_trials):
        alice, bob = _detections(s, seed, lo, hi, [term.ctx.label], [term.bob_obs.name])
        coinc, _ = _term_outcomes(term, alice, bob)
        found.append(lo + np.flatnonzero(coinc))
    return np.concatenate(found)


def detection_census(s: float, seed: int, n_trials: int) -> tuple[dict[str, int], dict[str, int]]:
    """Multi-detection counts per Alice context and per Bob observable."""
    sq = build_magic_square()
    labels = [c.label for c in sq.contexts]
    names = [o.name for o in sq.observables]
    alice_multi = dict.fromkeys(labels, 0)
    bob_multi = dict.fromkeys(names, 0)
    for lo, hi in _chunks(0, n_trials):
        alice, bob = _detections(s, seed, lo, hi, labels, names)
        for label in labels:
            alice_multi[label] += int(np.count_nonzero(alice[label][1]))
        for name in names:
            bob_multi[name] += int(np.count_nonzero(bob[name][2]))
    return alice_multi, bob_multi


def _chunks(start: int, stop: int, size: int = CHUNK_TRIALS):
    for lo in range(start, stop, size):
        yield lo, min(lo + size, stop)


def count_terms(
    s: float,
    seed: int,
    start: int,
    stop: int,
    terms: Sequence[TermSpec] = ALL_TERMS,
    threads: int = 1,
) -> list[TermCounts]:
    """Integer counts for ``terms`` over trials ``start <= i < stop``."""
    check_seed(seed)
    if not 0 <= start <= stop:
        raise ValueError(f"invalid trial range [{start}, {stop})")
    totals = [TermCounts() for _ in terms]
    jobs = list(_chunks(start, stop))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(lambda j: _count_chunk(s, seed, j[0], j[1], terms), jobs)
            parts = list(results)
    else:
        parts = [_count_chunk(s, seed, lo, hi, terms) for lo, hi in jobs]
    for part in parts:
        totals = [a + b for a, b in zip(totals, part)]
    return totals


def run_term(params: ModelParams, term: TermSpec, ensemble: range | None = None) -> TermCounts:
    if ensemble is None:
        ensemble = range(params.n_trials)
    if ensemble.step != 1:
        raise ValueError("ensemble must be a contiguous range of trial indices")
    return count_terms(params.s, params.seed, ensemble.start, ensemble.stop, [term])[0]


@dataclass
class SweepPoint:
    s: float
    chi_terms: tuple[float | None, ...]
    S_terms: tuple[float | None, ...]
    chi_stderr: tuple[float | None, ...]
    S_stderr: tuple[float | None, ...]
    chi: float | None
    S: float | None
    omega: float | None
    eta: float | None
    epsilon: float | None
    n_trials: int
    seed: int
    undefined_terms: tuple[str, ...] = ()
    counts: dict[str, TermCounts] = field(default_factory=dict, repr=False, compare=False)

    def term_values(self) -> dict[str, float | None]:
        labels = [t.label for t in ALL_TERMS]
        return dict(zip(labels, self.chi_terms + self.S_terms))


def _signed_sum(terms: Sequence[TermSpec], values: Sequence[float | None]) -> float | None:
    if any(v is None for v in values):
        return None
    return float(sum(t.sign * v for t, v in zip(terms, values)))


def _extreme(values: list[float | None], pick) -> float | None:
    if any(v is None for v in values):
        return None
    return pick(values)


def assemble_point(params: ModelParams, counts: Sequence[TermCounts]) -> SweepPoint:
    by_label = {t.label: c for t, c in zip(ALL_TERMS, counts)}
    chi_c = [by_label[t.label] for t in CHI_TERMS]
    s_c = [by_label[t.label] for t in S_TERMS]
    chi_terms = tuple(conditional_expectation(c) for c in chi_c)
    s_terms = tuple(conditional_expectation(c) for c in s_c)
    chi = _signed_sum(CHI_TERMS, chi_terms)
    s_val = _signed_sum(S_TERMS, s_terms)
    undefined = tuple(
        t.label for t in ALL_TERMS if conditional_expectation(by_label[t.label]) is None
    )
    # η and ε use each context's product-term run (Bob on the designated observable).
    return SweepPoint(
        s=float(params.s),
        chi_terms=chi_terms,
        S_terms=s_terms,
        chi_stderr=tuple(standard_error(c) for c in chi_c),
        S_stderr=tuple(standard_error(c) for c in s_c),
        chi=chi,
        S=s_val,
        omega=None if chi is None or s_val is None else chi + s_val,
        eta=_extreme([context_efficiency(c) for c in chi_c], min),
        epsilon=_extreme([context_epsilon(c) for c in chi_c], max),
        n_trials=int(params.n_trials),
        seed=int(params.seed),
        undefined_terms=undefined,
        counts=by_label,
    )


def run_sweep_point(params: ModelParams, threads: int = 1) -> SweepPoint:
    """Evaluate all 18 terms on one fixed ensemble of ``params.n_trials`` trials."""
    counts = count_terms(params.s, params.seed, 0, params.n_trials, ALL_TERMS, threads)
    return assemble_point(params, counts)


def point_seed(master_seed: int, index: int) -> int:
    """Seed of the ``index``-th point of a sweep."""
    ss = np.random.SeedSequence([check_seed(master_seed), index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_sweep(
    seed: int,
    n_trials: int,
    s_grid: Sequence[float] = DEFAULT_GRID,
    threads: int = 1,
    progress=None,
) -> list[SweepPoint]:
    if len(s_grid) == 0:
        raise ValueError("s_grid must not be empty")
    points = []
    for i, s in enumerate(s_grid):
        params = ModelParams(s=float(s), seed=point_seed(seed, i), n_trials=n_trials)
        points.append(run_sweep_point(params, threads))
        if progress is not None:
            progress(points[-1])
    return points


def make_grid(s_min: float, s_max: float, s_step: float) -> list[float]:
    """Inclusive grid ``s_min, s_min + s_step, ...`` up to ``s_max``."""
    if s_step <= 0:
        raise ValueError("s_step must be positive")
    if s_min > s_max:
        raise ValueError("s_min must not exceed s_max")
    if s_min < 0:
        raise ValueError("s must be nonnegative")
    n = int(math.floor((s_max - s_min) / s_step + 1e-9))
    return [round(s_min + k * s_step, 12) for k in range(n + 1)]
