"""Ideal quantum predictions for the hyperentangled four-qubit state."""

from __future__ import annotations

import numpy as np

from .operators import ATOL, embed_alice, is_hermitian, kron
from .terms import CHI_TERMS, PRODUCT, S_TERMS, TermSpec


def psi_1234() -> np.ndarray:
    """(|0011> - |0110> - |1001> + |1100>) / 2 as a length-16 vector."""
    psi = np.zeros(16, dtype=np.complex128)
    psi[0b0011] = 0.5
    psi[0b0110] = -0.5
    psi[0b1001] = -0.5
    psi[0b1100] = 0.5
    psi.setflags(write=False)
    return psi


def ideal_expectation(m: np.ndarray, psi: np.ndarray | None = None) -> float:
    m = np.asarray(m)
    if m.shape != (16, 16):
        raise ValueError(f"expected a 16x16 operator, got shape {m.shape}")
    if not is_hermitian(m):
        raise ValueError("operator is not Hermitian")
    if psi is None:
        psi = psi_1234()
    value = np.vdot(psi, m @ psi)
    if abs(value.imag) > ATOL:
        raise ValueError(f"expectation has imaginary part {value.imag:g}")
    return float(value.real)


def term_operator(term: TermSpec) -> np.ndarray:
    if term.kind == PRODUCT:
        a, b, c = (o.matrix for o in term.ctx.triple)
        return embed_alice(a @ b @ c)
    return kron(term.target.matrix, term.target.matrix)


def ideal_term_values(psi: np.ndarray | None = None) -> dict[str, float]:
    return {t.label: ideal_expectation(term_operator(t), psi) for t in CHI_TERMS + S_TERMS}


def ideal_witnesses(psi: np.ndarray | None = None) -> tuple[float, float, float]:
    """Return ``(chi, S, omega)`` predicted by quantum mechanics."""
    values = ideal_term_values(psi)
    chi = sum(t.sign * values[t.label] for t in CHI_TERMS)
    s = sum(t.sign * values[t.label] for t in S_TERMS)
    return chi, s, chi + s
