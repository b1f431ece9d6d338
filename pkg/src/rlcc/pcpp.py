"""A concrete, correctable canonical proof system for plane languages.

The languages are the augmented bivariate codes: a plane word followed
by repetitions of its value at a point, or of its restriction to the
anchor line.  The canonical proof for a member is R identical copies of
the graded-lex coefficient vector of the unique underlying polynomial;
the verifier spot-checks copy consistency and word/polynomial agreement,
and the local corrector repairs a proof symbol by majority over the
other copies.

This replaces the black-box proof systems the construction is usually
composed with.  Its query complexity grows with d^2 instead of being
constant; every report carries the measured counts next to the
idealized ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .rm import (
    AugmentedWord,
    LINE_KIND,
    POINT_KIND,
    RmParams,
    evaluate_triangle,
    is_low_degree_on_plane,
)


class _Bottom:
    """Abort sentinel, distinct from every field symbol (rendered '!')."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"


BOT = _Bottom()


@dataclass(frozen=True)
class PcppParams:
    """q_v spot-check rounds over R repeated coefficient blocks."""

    q_v: int
    repetitions: int = 9
    rho_prox: Fraction = Fraction(1, 8)

    def __post_init__(self):
        if self.q_v < 1:
            raise ValueError("q_v must be >= 1")
        if self.repetitions < 3 or self.repetitions % 2 == 0:
            raise ValueError("repetition count must be odd and >= 3")
        if not 0 < self.rho_prox < 1:
            raise ValueError("proximity parameter must lie in (0, 1)")

    def proof_length(self, params2d: RmParams) -> int:
        return self.repetitions * comb(params2d.d + 2, 2)


def canonical_proof(params2d: RmParams, pcpp: PcppParams, member: AugmentedWord):
    """Canonical proof of a language member: R copies of its coefficients.

    Interpolates the base word and verifies membership exactly (every
    base point and every tail coordinate), so feeding a non-member
    raises.  The composed-code oracle builds proofs straight from the
    restriction of its polynomial instead, where membership holds by
    construction.
    """
    n = params2d.ctx.n
    base = [member.read(i) for i in range(n * n)]
    ok, tri = is_low_degree_on_plane(params2d, base, mode="exact")
    if not ok:
        raise ValueError("base word is not a low-degree evaluation")
    for i in range(n * n, 2 * n * n):
        if member.read(i) != base[member.resolve(i)]:
            raise ValueError("tail is inconsistent with the base word")
    return build_proof(params2d, pcpp, tri)


def build_proof(params2d: RmParams, pcpp: PcppParams, tri):
    k = comb(params2d.d + 2, 2)
    if len(tri) != k:
        raise ValueError("coefficient vector has the wrong length")
    return tuple(tri) * pcpp.repetitions


class QueryCounter:
    __slots__ = ("word", "proof")

    def __init__(self):
        self.word = 0
        self.proof = 0


def verify_proximity(
    params2d: RmParams,
    pcpp: PcppParams,
    word_read,
    proof_read,
    kind: str,
    rng,
    selector=(0, 0),
    counter: QueryCounter | None = None,
) -> bool:
    """q_v rounds of copy cross-checks plus base and tail spot checks.

    word_read covers the augmented coordinates [0, 2n^2); proof_read
    covers [0, R*K).  Accepts iff every check in every round passes.
    Canonical pairs pass every possible check, so completeness is exact.
    """
    ctx = params2d.ctx
    n = ctx.n
    k = comb(params2d.d + 2, 2)
    rep = pcpp.repetitions
    view = AugmentedWord(n, lambda i: word_read(i), kind, selector)
    if counter is None:
        counter = QueryCounter()
    for _ in range(pcpp.q_v):
        # (a) one coefficient position across two distinct copies
        pos = rng.randrange(k)
        ca = rng.randrange(rep)
        cb = (ca + 1 + rng.randrange(rep - 1)) % rep
        counter.proof += 2
        if proof_read(ca * k + pos) != proof_read(cb * k + pos):
            return False
        # (b) one base point against one copy's polynomial
        u = rng.randrange(rep)
        copy_u = [proof_read(u * k + i) for i in range(k)]
        counter.proof += k
        j, s = rng.randrange(n), rng.randrange(n)
        counter.word += 1
        if word_read(j * n + s) != evaluate_triangle(params2d, copy_u, j, s):
            return False
        # (c) one tail coordinate against the same copy's implied value
        tail = n * n + rng.randrange(n * n)
        counter.word += 1
        got = word_read(view.resolve(tail))
        if kind == POINT_KIND:
            jx, kx = selector
            want = evaluate_triangle(params2d, copy_u, jx, kx)
        else:
            t = (tail - n * n) % n
            want = evaluate_triangle(params2d, copy_u, t, 0)
        if got != want:
            return False
    return True


def correct_proof_symbol(
    params2d: RmParams,
    pcpp: PcppParams,
    word_read,
    proof_read,
    offset: int,
    kind: str,
    rng,
    selector=(0, 0),
    counter: QueryCounter | None = None,
):
    """Repair one proof symbol: majority over the other copies, gated
    by one verifier run.  Returns the symbol or BOT."""
    k = comb(params2d.d + 2, 2)
    rep = pcpp.repetitions
    if not 0 <= offset < rep * k:
        raise ValueError("proof offset out of range")
    own = offset // k
    pos = offset % k
    votes = {}
    if counter is None:
        counter = QueryCounter()
    for c in range(rep):
        if c == own:
            continue
        v = proof_read(c * k + pos)
        counter.proof += 1
        votes[v] = votes.get(v, 0) + 1
    best_val, best_cnt = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))
    strict = sum(votes.values()) - best_cnt < best_cnt
    ok = verify_proximity(
        params2d, pcpp, word_read, proof_read, kind, rng, selector, counter
    )
    if ok and strict:
        return best_val
    return BOT


def query_budget(params2d: RmParams, pcpp: PcppParams):
    """Worst-case (word, proof) reads of one verifier call."""
    k = comb(params2d.d + 2, 2)
    return 2 * pcpp.q_v, pcpp.q_v * (2 + k)
