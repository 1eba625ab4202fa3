"""Sign tables for the χ and S witnesses, shared by the oracle and the simulator."""

from __future__ import annotations

from dataclasses import dataclass

from .operators import MeasurementContext, Observable, build_magic_square

PRODUCT = "product"
CORRELATION = "correlation"

# Bob's observable for a product term; the expectation does not depend on it.
_PRODUCT_BOB = {"CAB": "A", "cba": "b", "βγα": "γ", "αAa": "A", "βbB": "b", "cγC": "γ"}
_PRODUCT_SIGNS = {"CAB": 1, "cba": 1, "βγα": 1, "αAa": 1, "βbB": 1, "cγC": -1}

# (context, target observable, sign) for the twelve correlation terms.
_CORRELATION_TABLE = (
    ("CAB", "A", -1),
    ("CAB", "B", -1),
    ("cba", "b", -1),
    ("cba", "a", -1),
    ("βγα", "γ", 1),
    ("βγα", "α", 1),
    ("αAa", "A", -1),
    ("αAa", "a", -1),
    ("βbB", "b", -1),
    ("βbB", "B", -1),
    ("cγC", "γ", 1),
    ("cγC", "C", 1),
)


@dataclass(frozen=True, eq=False)
class TermSpec:
    """One expectation value entering χ (product term) or S (correlation term).

    For correlation terms ``target`` is the observable both parties measure;
    Alice's value is her outcome at the target's position in the context.
    """

    ctx: MeasurementContext
    bob_obs: Observable
    kind: str
    sign: int
    target: Observable | None = None

    @property
    def label(self) -> str:
        if self.kind == PRODUCT:
            return f"chi_{self.ctx.code}"
        return f"S_{self.ctx.code}_{self.target.code * 2}"

    @property
    def display(self) -> str:
        if self.kind == PRODUCT:
            return f"<{self.ctx.label} ⊗ I4>"
        t = self.target.name
        return f"<{t} ⊗ {t}>_{self.ctx.label}"


def _build_tables():
    sq = build_magic_square()
    chi = []
    for ctx in sq.contexts:
        chi.append(TermSpec(ctx, sq[_PRODUCT_BOB[ctx.label]], PRODUCT, _PRODUCT_SIGNS[ctx.label]))
    s_terms = []
    for label, target, sign in _CORRELATION_TABLE:
        ctx = sq.context(label)
        obs = sq[target]
        ctx.position(obs)
        s_terms.append(TermSpec(ctx, obs, CORRELATION, sign, target=obs))
    return tuple(chi), tuple(s_terms)


CHI_TERMS, S_TERMS = _build_tables()
ALL_TERMS = CHI_TERMS + S_TERMS
