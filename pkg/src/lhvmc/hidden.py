"""Hidden-variable sampling and threshold-detection outcomes.

Each trial ``i`` of a run with seed ``seed`` owns a fixed window of a Philox
counter-based stream: 32 uniform doubles starting at block ``8 * i``.  Any
trial, or any range of trials, can therefore be regenerated in isolation and
results never depend on how a run is split across workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operators import (
    SIGN_TRIPLES,
    MeasurementContext,
    Observable,
    embed_alice,
    embed_bob,
    joint_projector,
)

SQRT2_M1 = np.sqrt(2.0) - 1.0
DIM = 16

# Box-Muller consumes one (u1, u2) pair per complex component.
_DOUBLES_PER_TRIAL = 2 * DIM
# Philox4x64 emits four 64-bit words per counter step, one double per word.
_BLOCKS_PER_TRIAL = _DOUBLES_PER_TRIAL // 4

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ModelParams:
    s: float
    seed: int
    n_trials: int

    def __post_init__(self):
        if not np.isfinite(self.s) or self.s < 0:
            raise ValueError(f"s must be a finite nonnegative number, got {self.s!r}")
        check_seed(self.seed)
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError(f"n_trials must be a positive integer, got {self.n_trials!r}")


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= _U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def philox_key(seed: int, attempt: int = 0) -> np.ndarray:
    entropy = [check_seed(seed)] if attempt == 0 else [check_seed(seed), attempt]
    return np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)


def _gaussian_block(seed: int, start: int, stop: int, attempt: int = 0) -> np.ndarray:
    bitgen = np.random.Philox(key=philox_key(seed, attempt))
    bitgen.advance(_BLOCKS_PER_TRIAL * start)
    u = np.random.Generator(bitgen).random(_DOUBLES_PER_TRIAL * (stop - start))
    u = u.reshape(stop - start, DIM, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))
    phase = 2.0 * np.pi * u[..., 1]
    return radius * np.cos(phase) + 1j * (radius * np.sin(phase))


def noise_block(seed: int, start: int, stop: int) -> np.ndarray:
    """Unit-norm complex Gaussian vectors for trials ``start <= i < stop``.

    Returns an array of shape ``(stop - start, 16)``.
    """
    if not 0 <= start <= stop:
        raise ValueError(f"invalid trial range [{start}, {stop})")
    z = _gaussian_block(seed, start, stop)
    norms = np.linalg.norm(z, axis=1)
    attempt = 0
    # A vanishing draw has probability zero; redraw from a side stream if it happens.
    while np.any(norms == 0.0):
        attempt += 1
        for i in np.flatnonzero(norms == 0.0):
            z[i] = _gaussian_block(seed, start + i, start + i + 1, attempt)[0]
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def sample_noise(seed: int, index: int = 0) -> np.ndarray:
    """The noise vector of a single trial."""
    return noise_block(seed, index, index + 1)[0]


def assemble_lambda(s: float, psi: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """``s*(sqrt(2)-1)*psi + nu``; ``nu`` may be a single vector or a stack of them."""
    if s < 0:
        raise ValueError(f"s must be nonnegative, got {s!r}")
    return (s * SQRT2_M1) * np.asarray(psi) + np.asarray(nu)


def quadratic_form(lam: np.ndarray, p: np.ndarray) -> float:
    return float(np.vdot(lam, p @ lam).real)


def threshold_exceeds(lam: np.ndarray, p: np.ndarray) -> bool:
    return quadratic_form(lam, p) > 1.0


class BobOutcome(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    NO_DETECT = "no-detect"
    MULTI_DETECT = "multi-detect"

    @property
    def single(self) -> bool:
        return self in (BobOutcome.PLUS, BobOutcome.MINUS)

    @property
    def sign(self) -> int:
        if self is BobOutcome.PLUS:
            return 1
        if self is BobOutcome.MINUS:
            return -1
        raise ValueError(f"{self.name} carries no outcome value")


class AliceKind(enum.Enum):
    SINGLE = "single"
    NO_DETECT = "no-detect"
    MULTI_DETECT = "multi-detect"


class AliceOutcome(NamedTuple):
    kind: AliceKind
    signs: tuple[int, int, int] | None = None

    @property
    def single(self) -> bool:
        return self.kind is AliceKind.SINGLE


def alice_forms(lam: np.ndarray, ctx: MeasurementContext) -> list[float]:
    """Quadratic forms of ``lam`` for the eight embedded joint projectors of ``ctx``."""
    return [quadratic_form(lam, embed_alice(joint_projector(ctx, st))) for st in SIGN_TRIPLES]


def classify_alice(lam: np.ndarray, ctx: MeasurementContext) -> AliceOutcome:
    hits = [st for st, f in zip(SIGN_TRIPLES, alice_forms(lam, ctx)) if f > 1.0]
    if not hits:
        return AliceOutcome(AliceKind.NO_DETECT)
    if len(hits) > 1:
        return AliceOutcome(AliceKind.MULTI_DETECT)
    return AliceOutcome(AliceKind.SINGLE, hits[0])


def classify_bob(lam: np.ndarray, obs: Observable) -> BobOutcome:
    plus = threshold_exceeds(lam, embed_bob(obs.proj_plus))
    minus = threshold_exceeds(lam, embed_bob(obs.proj_minus))
    if plus and minus:
        return BobOutcome.MULTI_DETECT
    if plus:
        return BobOutcome.PLUS
    if minus:
        return BobOutcome.MINUS
    return BobOutcome.NO_DETECT
