"""Exact DoF-region polytopes and the exponent-space converse optimizer.

Everything here is exact rational arithmetic (fractions.Fraction); the
Monte-Carlo modules use floats.  The region of interest lives in the
first quadrant of the (d1, d2) plane and always contains the origin.

The converse optimizer maximizes a piecewise-linear weighted-sum-DoF
objective over exponent profiles (eta_bar_1, eta_1T, eta_bar_2, eta_2T)
in [0,1]^4 by enumerating the vertices of the kink-hyperplane
arrangement; a float grid search serves as an independent oracle.
"""

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import InvalidParam, RegimeWarning

F = Fraction


# ---------------------------------------------------------------------------
# Rational 2-D polytopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DofRegion:
    """Convex region {a1*d1 + a2*d2 <= b} ∩ first quadrant.

    halfspaces: tuple of (a1, a2, b) Fractions.
    vertices: tuple of (d1, d2) Fraction pairs, counterclockwise from (0,0).
    """

    halfspaces: tuple
    vertices: tuple


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points):
    """Monotone-chain hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _start_at_origin(hull):
    origin = (F(0), F(0))
    if origin in hull:
        i = hull.index(origin)
        return hull[i:] + hull[:i]
    return hull


def _vertices_from_halfspaces(halfspaces):
    """All feasible pairwise boundary intersections, hulled CCW."""
    lines = [(a1, a2, b) for (a1, a2, b) in halfspaces]
    lines.append((F(1), F(0), F(0)))  # d1 = 0
    lines.append((F(0), F(1), F(0)))  # d2 = 0
    cand = []
    for (a1, a2, b), (c1, c2, d) in combinations(lines, 2):
        det = a1 * c2 - a2 * c1
        if det == 0:
            continue
        d1 = (b * c2 - a2 * d) / det
        d2 = (a1 * d - b * c1) / det
        cand.append((d1, d2))
    feas = [
        p
        for p in cand
        if p[0] >= 0 and p[1] >= 0 and all(a1 * p[0] + a2 * p[1] <= b for a1, a2, b in halfspaces)
    ]
    if not feas:
        feas = [(F(0), F(0))]
    return tuple(_start_at_origin(_convex_hull(feas)))


def outer_region(T, N):
    """Converse polytope: single sum constraint when T <= 2 or N = 1,
    otherwise the two skewed constraints through (1-1/T, 0) and
    (1-2/T, 1-2/T)."""
    if T < 1 or N < 1:
        raise InvalidParam("T and N must be >= 1")
    pre = F(1) - F(1, T)
    if T <= 2 or N == 1:
        hs = ((F(1), F(1), pre),)
    else:
        hs = (
            (F(1, T - 2), F(1), pre),
            (F(1), F(1, T - 2), pre),
        )
    # duplicate halfspaces collapse (T = 3 makes the two constraints equal)
    hs = tuple(dict.fromkeys(hs))
    return DofRegion(halfspaces=hs, vertices=_vertices_from_halfspaces(hs))


def dof_corner_points(T, N):
    """Extreme achievable pairs of the training-based schemes (exact)."""
    if T < 1 or N < 1:
        raise InvalidParam("T and N must be >= 1")
    if T == 1:
        return [(F(0), F(0))]
    single = F(1) - F(1, T)
    pts = [(single, F(0)), (F(0), single)]
    if T >= 3 and N > 1:
        both = F(1) - F(2, T)
        pts.append((both, both))
    return pts


def inner_region(T, N):
    """Convex hull (with time sharing) of the achievable corner points."""
    pts = dof_corner_points(T, N) + [(F(0), F(0))]
    hull = _start_at_origin(_convex_hull(pts))
    hs = []
    if len(hull) >= 3:
        for p, q in zip(hull, hull[1:] + hull[:1]):
            # edge from p to q; inward side is the left of the direction
            a1 = q[1] - p[1]
            a2 = p[0] - q[0]
            b = a1 * p[0] + a2 * p[1]
            if a1 <= 0 and a2 <= 0:
                continue  # nonnegativity edge, implied
            hs.append((a1, a2, b))
    elif len(hull) == 2:
        p, q = hull
        s = q[0] + q[1]  # segment from origin: d1 + d2 <= level along it
        hs.append((F(1), F(1), s if s > 0 else F(0)))
    else:
        hs.append((F(1), F(1), F(0)))
    hs = tuple(dict.fromkeys(hs))
    return DofRegion(halfspaces=hs, vertices=tuple(hull))


def regions_equal(ra, rb):
    """Exact equality of vertex sets, order-insensitive."""
    return set(ra.vertices) == set(rb.vertices)


def membership(region, d1, d2):
    d1, d2 = F(d1), F(d2)
    if d1 < 0 or d2 < 0:
        return False
    return all(a1 * d1 + a2 * d2 <= b for a1, a2, b in region.halfspaces)


def polygon_export(region):
    """CSV rows 'p/q,p/q', counterclockwise, first row the origin."""
    verts = _start_at_origin(list(region.vertices))

    def frac(x):
        return f"{x.numerator}/{x.denominator}"

    return "\n".join(f"{frac(d1)},{frac(d2)}" for d1, d2 in verts) + "\n"


def max_weighted_dof(region, lambda1, lambda2):
    """max lambda . d over the polytope, by vertex enumeration."""
    l1, l2 = F(lambda1), F(lambda2)
    return max(l1 * d1 + l2 * d2 for d1, d2 in region.vertices)


# ---------------------------------------------------------------------------
# Exponent-space objectives
# ---------------------------------------------------------------------------
# An input with squared magnitude P^a contributes log2(1 + P^a) ~ max(a,0)
# * log2 P, so every term below is the exponent (pre-log) of the
# corresponding finite-SNR penalty term.  Values outside [0,1] are allowed
# (used by the clamping property check).


def _pos(a):
    return a if a > 0 else a * 0


def _user_bracket_f(eb, eT, eta_other, T, N):
    """Per-user f-penalty exponent (times T)."""
    s = _pos(eta_other)  # exponent of 1 + ||x_other||^2
    term1 = (N + T - 2) * _pos(eb)
    term2 = _pos(eb - s)
    term3 = N * _pos(eT - max(_pos(eb), s))
    term4 = -N * max(_pos(eb), eT - s, 0 * eb)
    return term1 + term2 + term3 + term4


def _user_bracket_g(eb, eT, eta_other, T, N):
    """Per-user g-penalty exponent (times T); three cases, ties resolve
    to the first case."""
    s = _pos(eta_other)
    one = eb * 0 + 1
    if eT - s > _pos(eb):
        return (T - 1) * _pos(eT - s)
    if eT - s < _pos(eb) and eT > max(_pos(eb), s):
        return (T - 2) * _pos(eb) + N * (max(s, eT, 0 * eb) - max(s, one)) + _pos(one - s)
    return (T - 2) * _pos(eb) + _pos(eb - s)


def exponent_objective(profile, lambda1, lambda2, T, N, objective):
    """Weighted-sum-DoF upper bound at one exponent profile
    (eta_bar_1, eta_1T, eta_bar_2, eta_2T).  Works on Fractions or floats."""
    eb1, e1t, eb2, e2t = profile
    eta1 = max(eb1, e1t)
    eta2 = max(eb2, e2t)
    if objective == "f_exponent":
        b1 = _user_bracket_f(eb1, e1t, eta2, T, N)
        b2 = _user_bracket_f(eb2, e2t, eta1, T, N)
    elif objective == "g_exponent":
        b1 = _user_bracket_g(eb1, e1t, eta2, T, N)
        b2 = _user_bracket_g(eb2, e2t, eta1, T, N)
    else:
        raise InvalidParam(f"unknown objective {objective!r}")
    return (lambda1 * b1 + lambda2 * b2) / T


def regime_objective(T, N):
    """The objective that is tight for the given (T, N)."""
    return "f_exponent" if T >= N + 1 else "g_exponent"


# ---------------------------------------------------------------------------
# Breakpoint enumeration
# ---------------------------------------------------------------------------

def _kink_hyperplanes():
    """All hyperplanes where either objective can kink, as (coeffs, rhs).

    Variables ordered (eb1, e1t, eb2, e2t).  Box facets, pairwise
    equalities, and the sum relations eT = eb + eta_other.
    """
    planes = []
    for i in range(4):
        for r in (0, 1):
            c = [F(0)] * 4
            c[i] = F(1)
            planes.append((tuple(c), F(r)))
    for i, j in combinations(range(4), 2):
        c = [F(0)] * 4
        c[i], c[j] = F(1), F(-1)
        planes.append((tuple(c), F(0)))
    # e1t = eb1 + {eb2 | e2t};  e2t = eb2 + {eb1 | e1t}
    for lhs, base, others in ((1, 0, (2, 3)), (3, 2, (0, 1))):
        for o in others:
            c = [F(0)] * 4
            c[lhs], c[base], c[o] = F(1), F(-1), F(-1)
            planes.append((tuple(c), F(0)))
    return planes


def _solve4(rows):
    """Exact solve of a 4x4 rational system; None if singular."""
    m = [list(c) + [r] for c, r in rows]
    n = 4
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                fac = m[r][col]
                m[r] = [v - fac * w for v, w in zip(m[r], m[col])]
    return tuple(m[r][4] for r in range(n))


_CANDIDATES_CACHE = None


def _candidate_profiles():
    """Vertices of the kink arrangement restricted to [0,1]^4 (cached;
    the hyperplane set does not depend on T, N or the weights)."""
    global _CANDIDATES_CACHE
    if _CANDIDATES_CACHE is not None:
        return _CANDIDATES_CACHE
    planes = _kink_hyperplanes()
    seen = set()
    for combo in combinations(planes, 4):
        sol = _solve4(combo)
        if sol is None:
            continue
        if all(F(0) <= v <= F(1) for v in sol):
            seen.add(sol)
    _CANDIDATES_CACHE = sorted(seen)
    return _CANDIDATES_CACHE


def weighted_sum_dof_sup(lambda1, lambda2, T, N, objective):
    """Exact supremum of the exponent-space objective over [0,1]^4.

    Returns (sup, argmax_profile) with Fractions.  Warns (RegimeWarning)
    when the objective is known not to be tight for the given regime but
    computes the value anyway.
    """
    l1, l2 = F(lambda1), F(lambda2)
    if l1 < 0 or l2 < 0 or (l1 == 0 and l2 == 0):
        raise InvalidParam("weights must be nonnegative and not both zero")
    if objective not in ("f_exponent", "g_exponent"):
        raise InvalidParam(f"unknown objective {objective!r}")
    if objective != regime_objective(T, N) and T >= 3 and N >= 2:
        warnings.warn(
            f"objective {objective} is not tight for T={T}, N={N}",
            RegimeWarning,
            stacklevel=2,
        )
    best, best_x = None, None
    for x in _candidate_profiles():
        val = exponent_objective(x, l1, l2, T, N, objective)
        if best is None or val > best:
            best, best_x = val, x
    return best, best_x


# ---------------------------------------------------------------------------
# Grid oracle (float)
# ---------------------------------------------------------------------------

def _objective_grid(grids, lambda1, lambda2, T, N, objective):
    """Vectorized float evaluation on a meshgrid of the four exponents."""
    eb1, e1t, eb2, e2t = np.meshgrid(*grids, indexing="ij", sparse=True)
    eta1 = np.maximum(eb1, e1t)
    eta2 = np.maximum(eb2, e2t)

    def pos(a):
        return np.maximum(a, 0.0)

    def bracket_f(eb, et, other):
        pb = pos(eb)
        return (
            (N + T - 2) * pb
            + pos(eb - pos(other))
            + N * pos(et - np.maximum(pb, pos(other)))
            - N * np.maximum(np.maximum(pb, et - pos(other)), 0.0)
        )

    def bracket_g(eb, et, other):
        s = pos(other)
        pb = pos(eb)
        case_c = et - s > pb
        case_b = (et - s < pb) & (et > np.maximum(pb, s))
        val_c = (T - 1) * pos(et - s)
        val_b = (T - 2) * pb + N * (np.maximum(np.maximum(s, et), 0.0) - np.maximum(s, 1.0)) + pos(1.0 - s)
        val_a = (T - 2) * pb + pos(eb - s)
        return np.where(case_c, val_c, np.where(case_b, val_b, val_a))

    bracket = bracket_f if objective == "f_exponent" else bracket_g
    return (lambda1 * bracket(eb1, e1t, eta2) + lambda2 * bracket(eb2, e2t, eta1)) / T


def grid_oracle_sup(lambda1, lambda2, T, N, objective, coarse_step=64, fine_step=512):
    """Two-stage brute-force grid maximum: full 1/coarse_step grid, then a
    1/fine_step refinement around the coarse argmax.  Returns (value,
    argmax tuple) as floats."""
    l1, l2 = float(lambda1), float(lambda2)
    axis = np.linspace(0.0, 1.0, coarse_step + 1)
    vals = _objective_grid([axis] * 4, l1, l2, T, N, objective)
    idx = np.unravel_index(np.argmax(vals), vals.shape)
    best = float(vals[idx])
    center = [axis[i] for i in idx]
    fine_axes = []
    for c in center:
        lo = max(0.0, c - 1.0 / coarse_step)
        hi = min(1.0, c + 1.0 / coarse_step)
        n_pts = int(round((hi - lo) * fine_step)) + 1
        fine_axes.append(np.linspace(lo, hi, n_pts))
    fvals = _objective_grid(fine_axes, l1, l2, T, N, objective)
    fidx = np.unravel_index(np.argmax(fvals), fvals.shape)
    fbest = float(fvals[fidx])
    if fbest >= best:
        best = fbest
        center = [fine_axes[k][fidx[k]] for k in range(4)]
    return best, tuple(center)


def objective_lipschitz_bound(T, N):
    """Per-coordinate Lipschitz constant bound for either objective."""
    return 2.0 * (N + T) / T
