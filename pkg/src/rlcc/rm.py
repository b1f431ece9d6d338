"""The code RM_F(dim, d): evaluations of total-degree-<=d polynomials.

Codewords are evaluation tables over F^dim in canonical point order.
Coefficient vectors are ordered by graded-lexicographic monomial order
on exponent tuples (degree first, then plain tuple comparison), and the
message-to-coefficient map is the identity.  Distances are exact
rationals throughout; thresholds like rho/8 are compared exactly.

Interpolation always uses the first d+1 field elements in code order as
nodes, one fixed inverse operator per (field, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb

import numpy as np

from .gf import Field
from .geometry import PlaneRep, plane_point_at

ENUM_BUDGET = 10**7


@lru_cache(maxsize=None)
def monomial_basis(dim: int, d: int):
    """Exponent tuples of total degree <= d in graded-lex order."""
    if dim < 1 or d < 0:
        raise ValueError("need dim >= 1 and d >= 0")
    tuples = [t for t in product(range(d + 1), repeat=dim) if sum(t) <= d]
    tuples.sort(key=lambda t: (sum(t), t))
    return tuple(tuples)


@dataclass(frozen=True)
class RmParams:
    """Parameters of RM_F(dim, d); dim is 2 for plane-local languages."""

    ctx: Field
    dim: int
    d: int

    def __post_init__(self):
        if not 0 <= self.d < self.ctx.n:
            raise ValueError("degree must satisfy 0 <= d < |F|")

    @property
    def k(self) -> int:
        return comb(self.d + self.dim, self.dim)

    @property
    def rho(self) -> Fraction:
        return 1 - Fraction(self.d, self.ctx.n)

    @property
    def basis(self):
        return monomial_basis(self.dim, self.d)

    def bivariate(self) -> "RmParams":
        return RmParams(self.ctx, 2, self.d)

    @property
    def length(self) -> int:
        return self.ctx.n**self.dim


def encode(params: RmParams, message):
    """Message -> coefficient vector (identity onto graded-lex coefficients)."""
    if len(message) != params.k:
        raise ValueError(f"message length must be {params.k}")
    if any(not 0 <= c < params.ctx.n for c in message):
        raise ValueError("message symbol out of range")
    return tuple(message)


def evaluate(params: RmParams, coeffs, point) -> int:
    ctx = params.ctx
    acc = 0
    for c, exps in zip(coeffs, params.basis):
        if c == 0:
            continue
        term = c
        for x, e in zip(point, exps):
            if e:
                term = ctx.mul(term, ctx.pow(x, e))
                if term == 0:
                    break
        acc = ctx.add(acc, term)
    return acc


@lru_cache(maxsize=64)
def _exponent_matrix(dim: int, d: int):
    return np.array(monomial_basis(dim, d), dtype=np.int64)


def evaluate_many(params: RmParams, coeffs, coords) -> np.ndarray:
    """Evaluate at many points at once; coords is a dim x NP code array.

    Log-domain fast path: each monomial value is exp[(E @ logs) mod n-1]
    with zero coordinates masked out, then terms are summed digit-wise
    mod p.  Cross-checked against the scalar path in the tests.
    """
    ctx = params.ctx
    _, log_t, _, _ = ctx.tables
    coords = np.asarray(coords, dtype=np.int64)
    npts = coords.shape[1]
    E = _exponent_matrix(params.dim, params.d)
    cvec = np.asarray(coeffs, dtype=np.int64)
    live = np.flatnonzero(cvec)
    if live.size == 0:
        return np.zeros(npts, dtype=np.int64)
    El = E[live]
    logs = log_t[coords]
    sums = El @ logs + log_t[cvec[live]][:, None]
    vals = ctx.exp_extended(params.dim * params.d * (ctx.n - 2) + ctx.n)[sums]
    zcols = np.flatnonzero((coords == 0).any(axis=0))
    if zcols.size:
        # a zero coordinate kills every monomial with a positive exponent there
        killed = (El > 0) @ (coords[:, zcols] == 0)
        vals[np.ix_(np.arange(live.size), zcols)] *= ~killed
    return ctx.sum_elements(vals, axis=0)


def eval_table(params: RmParams, coeffs):
    """Full evaluation table in canonical point order (guarded by budget)."""
    if params.length > ENUM_BUDGET:
        raise ValueError("evaluation table exceeds the enumeration budget")
    n = params.ctx.n
    grids = np.meshgrid(
        *[np.arange(n, dtype=np.int64)] * params.dim, indexing="ij"
    )
    # canonical point code is sum(coord_i * n**i): coordinate 0 varies fastest
    coords = np.stack([g.reshape(-1) for g in grids])
    order = sum(coords[i] * n**i for i in range(params.dim))
    out = np.empty(params.length, dtype=np.int64)
    out[order] = evaluate_many(params, coeffs, coords)
    return out


def grid_table(params2d: RmParams, coeffs):
    """Bivariate evaluation in plane-grid order: index j*n + k holds Q(j, k).

    Note this differs from eval_table's point-code order, where the
    first coordinate varies fastest.
    """
    n = params2d.ctx.n
    idx = np.arange(n * n, dtype=np.int64)
    return evaluate_many(params2d, coeffs, np.stack([idx // n, idx % n]))


# ---------------------------------------------------------------------------
# Interpolation on the fixed (d+1)-node axis grid


@lru_cache(maxsize=None)
def _inverse_vandermonde(ctx: Field, d: int):
    """Inverse of V[i][j] = node_i^j over the first d+1 elements."""
    if d + 1 > ctx.n:
        raise ValueError("not enough interpolation nodes: d + 1 > |F|")
    size = d + 1
    a = [[ctx.pow(i, j) for j in range(size)] for i in range(size)]
    inv = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        s = ctx.inv(a[col][col])
        a[col] = [ctx.mul(s, v) for v in a[col]]
        inv[col] = [ctx.mul(s, v) for v in inv[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [ctx.sub(v, ctx.mul(f, w)) for v, w in zip(a[r], a[col])]
                inv[r] = [
                    ctx.sub(v, ctx.mul(f, w)) for v, w in zip(inv[r], inv[col])
                ]
    return np.array(inv, dtype=np.int64)


def _fmatmul(ctx: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over F for small integer-code matrices."""
    exp_t, log_t, digits, weights = ctx.tables
    prod = exp_t[(log_t[a][:, :, None] + log_t[b][None, :, :]) % (ctx.n - 1)]
    prod[(a[:, :, None] == 0) | (b[None, :, :] == 0)] = 0
    return (digits[prod].sum(axis=1) % ctx.p) @ weights


def interpolate_grid(params2d: RmParams, grid: np.ndarray) -> np.ndarray:
    """(d+1)x(d+1) subgrid values -> full coefficient grid c[a][b].

    c[a][b] multiplies t^a s^b where t indexes rows (dir1 axis).
    """
    ctx = params2d.ctx
    minv = _inverse_vandermonde(ctx, params2d.d)
    return _fmatmul(ctx, minv, _fmatmul(ctx, grid, minv.T))


def coeff_grid_to_triangle(params2d: RmParams, cgrid: np.ndarray):
    """Extract the graded-lex triangle vector; None if off-triangle mass."""
    d = params2d.d
    for a in range(d + 1):
        for b in range(d + 1):
            if a + b > d and cgrid[a][b] != 0:
                return None
    return tuple(int(cgrid[a][b]) for a, b in params2d.basis)


def evaluate_triangle(params2d: RmParams, tri, t: int, s: int) -> int:
    """Evaluate a bivariate triangle vector at plane-local (t, s)."""
    ctx = params2d.ctx
    d = params2d.d
    if d >= 8:  # the table-driven bulk path wins for large triangles
        coords = np.array([[t], [s]], dtype=np.int64)
        return int(evaluate_many(params2d, tri, coords)[0])
    pt = [1] * (d + 1)
    ps = [1] * (d + 1)
    for e in range(1, d + 1):
        pt[e] = ctx.mul(pt[e - 1], t)
        ps[e] = ctx.mul(ps[e - 1], s)
    acc = 0
    for c, (a, b) in zip(tri, params2d.basis):
        if c:
            acc = ctx.add(acc, ctx.mul(c, ctx.mul(pt[a], ps[b])))
    return acc


def restrict_to_plane(params: RmParams, coeffs, plane: PlaneRep):
    """Bivariate triangle vector of the restriction to a rank-2 plane.

    Evaluates on the (d+1)x(d+1) plane-local subgrid, then applies the
    precomputed inverse interpolation along both axes.
    """
    ctx = params.ctx
    d = params.d
    if d + 1 > ctx.n:
        raise ValueError("not enough interpolation nodes: d + 1 > |F|")
    size = d + 1
    coords = np.empty((params.dim, size * size), dtype=np.int64)
    idx = 0
    for j in range(size):
        row = plane_point_at(ctx, plane, j, 0)
        for k in range(size):
            pt = plane_point_at(ctx, plane, 0, k)
            for i in range(params.dim):
                coords[i, idx] = ctx.add(row[i], ctx.sub(pt[i], plane.anchor[i]))
            idx += 1
    vals = evaluate_many(params, coeffs, coords).reshape(size, size)
    tri = coeff_grid_to_triangle(params.bivariate(), interpolate_grid(params.bivariate(), vals))
    assert tri is not None, "restriction of a low-degree polynomial must be low-degree"
    return tri


def is_low_degree_on_plane(params2d: RmParams, values, mode="exact", rng=None):
    """Membership of an n^2 plane word in the bivariate code.

    Exact mode fits the subgrid, rejects off-triangle coefficients, and
    verifies all n^2 points.  Sampled mode ("sampled", q) verifies q
    uniform points instead: one-sided, may wrongly accept.
    Returns (ok, triangle-or-None).
    """
    ctx = params2d.ctx
    n, d = ctx.n, params2d.d
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (n * n,):
        raise ValueError("plane word must have n^2 symbols in grid order")
    grid = values.reshape(n, n)[: d + 1, : d + 1]
    tri = coeff_grid_to_triangle(params2d, interpolate_grid(params2d, grid))
    if tri is None:
        return False, None
    if mode == "exact":
        jj, kk = np.divmod(np.arange(n * n, dtype=np.int64), n)
        expect = evaluate_many(params2d, tri, np.stack([jj, kk]))
        ok = bool(np.array_equal(expect, values))
    else:
        tag, q = mode
        if tag != "sampled":
            raise ValueError(f"unknown mode {mode!r}")
        ok = True
        for _ in range(q):
            j, k = rng.randrange(n), rng.randrange(n)
            if evaluate_triangle(params2d, tri, j, k) != values[j * n + k]:
                ok = False
                break
    return (ok, tri if ok else None)


# ---------------------------------------------------------------------------
# Distances


def dist_plain(x, y) -> Fraction:
    if len(x) != len(y):
        raise ValueError("words must have equal length")
    diff = sum(1 for a, b in zip(x, y) if a != b)
    return Fraction(diff, len(x))


def dist_weighted(x, y, a_set) -> Fraction:
    """Half the disagreement rate inside A plus half the global rate."""
    if len(x) != len(y):
        raise ValueError("words must have equal length")
    idx = sorted(set(a_set))
    if not idx:
        raise ValueError("weighted distance needs a nonempty index set")
    in_a = sum(1 for i in idx if x[i] != y[i])
    total = sum(1 for a, b in zip(x, y) if a != b)
    return Fraction(in_a, 2 * len(idx)) + Fraction(total, 2 * len(x))


# ---------------------------------------------------------------------------
# Augmented words: plane word followed by n^2 repeated symbols


POINT_KIND = "point"
LINE_KIND = "line"


class AugmentedWord:
    """Virtual view w|P followed by repetitions of w(x) or of w on a line.

    Base positions [0, n^2) are the plane grid; tail positions resolve
    to base positions, so no symbols are copied.  Point kind repeats the
    value at grid position (jx, kx); line kind repeats the anchor-line
    column (t, 0), n copies of n values.
    """

    def __init__(self, n: int, base_read, kind: str, selector=(0, 0)):
        if kind not in (POINT_KIND, LINE_KIND):
            raise ValueError(f"unknown augmentation kind {kind!r}")
        self.n = n
        self.kind = kind
        self._read = base_read
        if kind == POINT_KIND:
            jx, kx = selector
            if not (0 <= jx < n and 0 <= kx < n):
                raise ValueError("selector point outside the plane grid")
            self.selector = (jx, kx)
        else:
            self.selector = None

    @property
    def length(self) -> int:
        return 2 * self.n * self.n

    def resolve(self, i: int) -> int:
        """Map any coordinate to the base-grid coordinate that backs it."""
        nn = self.n * self.n
        if not 0 <= i < 2 * nn:
            raise IndexError("augmented coordinate out of range")
        if i < nn:
            return i
        if self.kind == POINT_KIND:
            jx, kx = self.selector
            return jx * self.n + kx
        t = (i - nn) % self.n
        return t * self.n + 0

    def read(self, i: int) -> int:
        return self._read(self.resolve(i))

    def materialize(self):
        return [self.read(i) for i in range(self.length)]


def augment(ctx: Field, values, kind: str, selector=(0, 0)) -> AugmentedWord:
    """Wrap an n^2 plane word (sequence) into its augmented view."""
    n = ctx.n
    if len(values) != n * n:
        raise ValueError("plane word must have n^2 symbols")
    return AugmentedWord(n, lambda i: values[i], kind, selector)


# ---------------------------------------------------------------------------
# Brute-force oracles (independent of the interpolation path)


def enumerate_codewords(params2d: RmParams):
    """Yield (coeffs, table) over every bivariate codeword; budget-guarded."""
    count = params2d.ctx.n**params2d.k
    if count > ENUM_BUDGET or count * params2d.length > 10 * ENUM_BUDGET:
        raise ValueError("codeword enumeration exceeds the budget")
    for coeffs in product(range(params2d.ctx.n), repeat=params2d.k):
        yield coeffs, eval_table(params2d, coeffs)


def nearest_codeword_bruteforce(params2d: RmParams, values, a_set=None):
    """Exact nearest bivariate codeword under plain or dist_A metric.

    Returns (coeffs, distance).  The minimizer with the smallest
    coefficient tuple breaks ties, which keeps the result deterministic.
    """
    best = None
    values = list(values)
    for coeffs, table in enumerate_codewords(params2d):
        dist = (
            dist_plain(values, table)
            if a_set is None
            else dist_weighted(values, table, a_set)
        )
        if best is None or dist < best[1]:
            best = (coeffs, dist)
    return best


def nearest_augmented_bruteforce(params2d: RmParams, aug: AugmentedWord):
    """Exact plain-metric distance to the augmented language RM^(sel)."""
    word = aug.materialize()
    best = None
    for coeffs, table in enumerate_codewords(params2d):
        cand = AugmentedWord(
            params2d.ctx.n, lambda i, t=table: t[i], aug.kind,
            aug.selector if aug.kind == POINT_KIND else (0, 0),
        )
        dist = dist_plain(word, cand.materialize())
        if best is None or dist < best[1]:
            best = (coeffs, dist)
    return best


def min_nonzero_weight(params: RmParams) -> int:
    """Exhaustive minimum Hamming weight over all nonzero codewords."""
    total = params.ctx.n**params.k
    if total > ENUM_BUDGET:
        raise ValueError("weight enumeration exceeds the budget")
    n = params.ctx.n
    grids = np.meshgrid(*[np.arange(n, dtype=np.int64)] * params.dim, indexing="ij")
    coords = np.stack([g.reshape(-1) for g in grids])
    best = None
    for coeffs in product(range(n), repeat=params.k):
        if all(c == 0 for c in coeffs):
            continue
        w = int(np.count_nonzero(evaluate_many(params, coeffs, coords)))
        if best is None or w < best:
            best = w
    return best
