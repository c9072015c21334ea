"""Named reference couplings with closed-form statistics (all at ``u = 2``)."""

from __future__ import annotations

from .coupling import EXACT, Coupling, canonical_coupling, explicit_coupling

U = 2


def identity(d: int = 2, p=None) -> Coupling:
    """``P(i, 0 | j) = [i = j]`` on ``p = q`` (uniform by default): ``w = 0`` surely.

    Unlike the canonical product map this keeps every basis index in place,
    so the joint distribution is ``p_i [i = j]``.
    """
    p = [1.0 / d] * d if p is None else list(p)
    entries = [(i, i, 0, 1.0) for i, pi in enumerate(p) if pi > 0]
    return explicit_coupling(p, p, entries, U, EXACT)


def canonical_d4() -> Coupling:
    """``(1/2, 1/4, 1/8, 1/8)`` to the maximally coherent qudit."""
    return canonical_coupling([0.5, 0.25, 0.125, 0.125], [0.25] * 4, U)


def half_to_pure() -> Coupling:
    """``(1/2, 1/2)`` to ``(1, 0)``: a single change of ``+ln 2``."""
    return canonical_coupling([0.5, 0.5], [1.0, 0.0], U)


def breathing() -> Coupling:
    """Non-canonical coupling on ``p = q = (1/2, 1/2)``.

    ``P(i, +1 | j) = 1/6`` and ``P(i, -1 | j) = 1/3``; it satisfies all three
    conditions but leaves a strict second-law gap of ``ln(2)/3``.
    """
    entries = []
    for i in range(2):
        for j in range(2):
            entries.append((i, j, 1, 1.0 / 6.0))
            entries.append((i, j, -1, 1.0 / 3.0))
    return explicit_coupling([0.5, 0.5], [0.5, 0.5], entries, U, EXACT)


def crooks_fixture() -> Coupling:
    """Rank-3 ``(1/2, 1/4, 1/4, 0)`` to the rank-4 maximally coherent state."""
    return canonical_coupling([0.5, 0.25, 0.25, 0.0], [0.25] * 4, U)


def oracle_d3() -> Coupling:
    """``(1/2, 1/4, 1/4)`` to ``(1/2, 1/2, 0)``, small enough for dense checks."""
    return canonical_coupling([0.5, 0.25, 0.25], [0.5, 0.5, 0.0], U)


# ``(1/2, 1/4, 1/4)`` to ``(1/2, 1/2)`` admits no coupling using only f in {-1, 0}
LP_EXAMPLE = {"p": [0.5, 0.25, 0.25], "q": [0.5, 0.5], "u": U, "f_values": [-1, 0]}

FIXTURES = {
    "identity": identity,
    "canonical_d4": canonical_d4,
    "half_to_pure": half_to_pure,
    "breathing": breathing,
    "crooks": crooks_fixture,
    "oracle_d3": oracle_d3,
}


def get(name: str) -> Coupling:
    return FIXTURES[name]()
