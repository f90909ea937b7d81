"""Point enumeration and the counts behind the multi-height theorems.

Regions are multiplicative with rational data, so every membership test is a
comparison of exact rationals and every count is a reproducible integer.  The
enumerator walks coordinate magnitudes in lexicographic order with per-cone
pruning; each surviving magnitude tuple is counted with multiplicity
2^(n - rho), the number of canonical sign patterns on it.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import gcd, lcm

import numpy as np

from . import linalg
from .cones import dual_cone, effective_decomposition
from .errors import BudgetError, DegenerateInputError
from .heights import _evaluator

DEFAULT_BUDGET = 10 ** 10

_INT64_SAFE = 1 << 62


class ExactLog:
    """Sum of e_j*log(b_j) with rational e_j and positive rational b_j.

    Supports exact comparison and floor(exp(.)), which is all the polytope
    vertex arithmetic needs: every bound of the form log(gamma) + s*log(B)
    stays in this class under rational linear combinations.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        out = {}
        if terms:
            for b, e in terms.items():
                b = Fraction(b)
                e = Fraction(e)
                if b <= 0:
                    raise DegenerateInputError("log of a nonpositive rational")
                if b != 1 and e != 0:
                    out[b] = out.get(b, Fraction(0)) + e
        self.terms = {b: e for b, e in out.items() if e != 0}

    @classmethod
    def zero(cls):
        return cls()

    def combine(self, other, scale=Fraction(1)):
        """self + scale*other."""
        out = dict(self.terms)
        for b, e in other.terms.items():
            out[b] = out.get(b, Fraction(0)) + scale * e
        return ExactLog(out)

    def scaled(self, c):
        c = Fraction(c)
        return ExactLog({b: c * e for b, e in self.terms.items()})

    def _power(self):
        """(X, Q) with self == (1/Q) * log(X), X an exact Fraction."""
        q = 1
        for e in self.terms.values():
            q = lcm(q, e.denominator)
        x = Fraction(1)
        for b, e in self.terms.items():
            x *= b ** int(e * q)
        return x, q

    def sign(self):
        x, _ = self._power()
        return (x > 1) - (x < 1)

    def cmp(self, other):
        return self.combine(other, Fraction(-1)).sign()

    def exp_floor(self):
        """floor(exp(self)) as an exact integer."""
        x, q = self._power()
        return linalg.floor_rational_power(x, 1, q)


@dataclass(frozen=True)
class Constraint:
    """Multiplicative bound prod_i H_{e_i}^{cls_i} <= gamma * B^s."""

    cls: tuple
    gamma: Fraction
    s: Fraction


class Region:
    """Intersection of multiplicative constraints, optionally cone-restricted.

    The cone restriction is membership of h in a rational cone of the dual
    Picard space, stored through its facet functionals: h is inside when
    prod_i H_{e_i}^{f_i} >= 1 for every facet vector f.
    """

    def __init__(self, constraints, facets=(), cone_generators=None):
        cons = []
        for c in constraints:
            if isinstance(c, Constraint):
                cons.append(c)
            else:
                q, gamma, s = c
                cons.append(Constraint(tuple(Fraction(x) for x in q),
                                       Fraction(gamma), Fraction(s)))
        for c in cons:
            if c.gamma <= 0:
                raise DegenerateInputError("constraint scale must be positive")
        self.constraints = tuple(cons)
        facets = [tuple(int(x) for x in f) for f in facets]
        if cone_generators is not None:
            gens = [list(g) for g in cone_generators]
            if gens:
                dim = len(gens[0])
                facets += [tuple(f) for f in dual_cone(gens, dim)]
        seen, uniq = set(), []
        for f in facets:
            if f not in seen:
                seen.add(f)
                uniq.append(f)
        self.facets = tuple(uniq)

    def contains(self, hvals, B):
        """Exact membership of a vector of basis heights at parameter B.

        Reference implementation used by tests and dumps; rational exponents
        are cleared to integers per constraint.
        """
        B = Fraction(B)
        for con in self.constraints:
            den = con.s.denominator
            for x in con.cls:
                den = lcm(den, Fraction(x).denominator)
            v = Fraction(1)
            for h, e in zip(hvals, con.cls):
                e = int(Fraction(e) * den)
                if e:
                    v *= Fraction(h) ** e
            if v > con.gamma ** den * B ** int(con.s * den):
                return False
        for f in self.facets:
            v = Fraction(1)
            for h, e in zip(hvals, f):
                if e:
                    v *= Fraction(h) ** e
            if v < 1:
                return False
        return True


def region_from_json(obj):
    """Region from the CLI JSON shape.

    {"constraints": [{"class": [...], "gamma": "p/q", "s": "p/q"}, ...],
     "cone": {"generators": [[...], ...]}}   (or "facets": [[...], ...])
    """
    def frac(x):
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        raise DegenerateInputError(f"not a rational: {x!r}")

    if not isinstance(obj, dict) or "constraints" not in obj:
        raise DegenerateInputError("region JSON needs a 'constraints' list")
    cons = []
    for c in obj["constraints"]:
        cons.append((tuple(frac(x) for x in c["class"]),
                     frac(c.get("gamma", 1)), frac(c.get("s", 0))))
    facets = obj.get("facets", ())
    gens = None
    if "cone" in obj:
        gens = obj["cone"].get("generators")
    return Region(cons, facets=facets, cone_generators=gens)


def anticanonical_region(lattice, facets=(), cone_generators=None):
    """H_{omega^{-1}} <= B as a Region."""
    return Region([(lattice.anticanonical, 1, 1)], facets=facets,
                  cone_generators=cone_generators)


# -- coordinate bounds -----------------------------------------------------

def _region_rows(lattice, region, B):
    rows = []
    for con in region.constraints:
        rhs = ExactLog({con.gamma: Fraction(1)})
        if con.s:
            rhs = rhs.combine(ExactLog({Fraction(B): Fraction(1)}), con.s)
        rows.append(([Fraction(x) for x in con.cls], rhs))
    zero = ExactLog.zero()
    seen = set()
    for cls in lattice.classes:
        if cls not in seen:
            seen.add(cls)
            rows.append(([Fraction(-x) for x in cls], zero))
    for f in region.facets:
        rows.append(([Fraction(-x) for x in f], zero))
    return rows


def coordinate_bounds(lattice, region, B):
    """Per-ray integer bounds M_lam with |y_lam| <= M_lam on the region.

    M_lam = floor exp sup{<[D_lam], a> : a in region and effective-dual}, the
    sup taken over the exact vertices of the rational polytope.  Raises for
    an unbounded region; an empty region yields all zeros.
    """
    B = Fraction(B)
    if B <= 0:
        raise DegenerateInputError("B must be a positive rational")
    rho = lattice.rank
    rows = _region_rows(lattice, region, B)

    rec_gens = [[-x for x in q] for q, _ in rows]
    if dual_cone(rec_gens, rho):
        raise DegenerateInputError(
            "region is unbounded over the dual effective cone")

    verts = []
    for idx in combinations(range(len(rows)), rho):
        mat = [list(rows[i][0]) for i in idx]
        if linalg.rank(mat) < rho:
            continue
        inv = linalg.inverse(mat)
        vert = []
        for j in range(rho):
            acc = ExactLog.zero()
            for k, i in enumerate(idx):
                if inv[j][k]:
                    acc = acc.combine(rows[i][1], inv[j][k])
            vert.append(acc)
        ok = True
        for q, rhs in rows:
            val = ExactLog.zero()
            for j in range(rho):
                if q[j]:
                    val = val.combine(vert[j], q[j])
            if val.cmp(rhs) > 0:
                ok = False
                break
        if ok:
            verts.append(vert)
    if not verts:
        return [0] * lattice.fan.n_rays

    bounds = []
    for cls in lattice.classes:
        best = None
        for vert in verts:
            val = ExactLog.zero()
            for j in range(rho):
                if cls[j]:
                    val = val.combine(vert[j], cls[j])
            if best is None or val.cmp(best) > 0:
                best = val
        bounds.append(max(0, best.exp_floor()))
    return bounds


# -- enumeration -----------------------------------------------------------

@dataclass
class EnumerationResult:
    count: int
    visited: int
    bounds: list
    wall_events: int = 0


def _compile_constraints(lattice, region, B):
    """Integerized constraints: (E ints, bound Fraction, nef per-cone reps)."""
    B = Fraction(B)
    out = []
    for con in region.constraints:
        den = 1
        for x in con.cls:
            den = lcm(den, Fraction(x).denominator)
        den = lcm(den, con.s.denominator)
        e = [int(Fraction(x) * den) for x in con.cls]
        bound = con.gamma ** den * B ** int(con.s * den)
        reps = [lattice.class_representative(s, e)
                for s in range(len(lattice.fan.max_cones))]
        nef = all(all(x >= 0 for x in w) for w in reps)
        out.append((e, bound, reps if nef else None))
    return out


def _canonical_masks(ev):
    pivots = set(ev._sign_pivots)
    free = [lam for lam in range(ev.n) if lam not in pivots]
    masks = [0]
    for lam in free:
        masks += [m | (1 << lam) for m in masks]
    return sorted(masks)


def enumerate_region(lattice, region, B, callback=None, tuple_callback=None,
                     budget=DEFAULT_BUDGET, first_range=None):
    """Count canonical torsor points with multi-height in the region.

    Deterministic lexicographic walk over coordinate magnitudes; exact
    membership; streams every canonical point to `callback(coords, hvals)`
    when given, or every surviving magnitude tuple to
    `tuple_callback(mags, hvals, weight)` (2^(n-rho) cheaper than per-point).
    hvals are plain integers when every basis class is nef, exact Fractions
    otherwise.  `first_range=(lo, hi)` restricts the first coordinate for
    data-parallel partitioning.  Raises BudgetError past `budget` candidates.
    """
    ev = _evaluator(lattice)
    fan = lattice.fan
    n, rho = fan.n_rays, lattice.rank
    bounds = coordinate_bounds(lattice, region, B)
    if any(m == 0 for m in bounds):
        return EnumerationResult(count=0, visited=0, bounds=bounds)

    B = Fraction(B)
    cons = _compile_constraints(lattice, region, B)
    facets = region.facets

    table_mode = all(
        lattice.is_nef([1 if j == i else 0 for j in range(rho)])
        for i in range(rho))
    if table_mode:
        # heights are integers, so single-sign bounds round to integer
        # thresholds; this keeps numerators small (wall values carry huge
        # denominators) without changing the point set
        rounded = []
        for e, bound, reps in cons:
            if all(x >= 0 for x in e):
                bound = Fraction(bound.numerator // bound.denominator)
            elif all(x <= 0 for x in e):
                inv = 1 / bound
                t = -((-inv.numerator) // inv.denominator)
                bound = Fraction(1, t)
            rounded.append((e, bound, reps))
        cons = rounded
    cones = [set(c) for c in fan.max_cones]
    ncones = len(cones)
    comp_has = [[lam not in cones[s] for lam in range(n)]
                for s in range(ncones)]
    weight = 1 << (n - rho)
    masks = _canonical_masks(ev) if callback is not None else None
    w_basis = ev.w_tables  # [cone][basis][ray], valid for nef classes

    if not any(c[2] is not None for c in cons):
        vol = 1
        for m in bounds:
            vol *= 2 * m
        if vol > budget:
            raise BudgetError(
                f"candidate box of size {vol} exceeds the budget {budget} "
                "and the region offers no usable pruning")

    wall0 = ev.wall_events
    visited = 0
    count = 0

    # per-cone running complement products and per-constraint nef partials
    comp_prod = [[1] * ncones]
    con_part = [[[1] * ncones for _ in cons]]

    def heights_of(mags):
        if table_mode:
            vals = []
            for i in range(rho):
                best = 0
                for s in range(ncones):
                    v = 1
                    for m, w in zip(mags, w_basis[s][i]):
                        if w:
                            v *= m ** w
                    if v > best:
                        best = v
                vals.append(best)
            return tuple(vals)
        return ev.multi_height(tuple(mags)).values

    def leaf_cap(depth, parts):
        cap = bounds[depth]
        for (e, bound, reps), part in zip(cons, parts):
            if reps is None:
                continue
            bn, bd = bound.numerator, bound.denominator
            for s in range(ncones):
                w = reps[s][depth]
                if part[s] * bd > bn:
                    return 0
                if w > 0:
                    q = bn // (bd * part[s])
                    c = linalg.iroot(q, w) if q > 0 else 0
                    if c < cap:
                        cap = c
        return cap

    mags = [0] * n

    def check_leaf_value(mvals):
        nonlocal count
        hvals = heights_of(mvals)
        hnum = [Fraction(h).numerator for h in hvals]
        hden = [Fraction(h).denominator for h in hvals]
        for e, bound, _ in cons:
            lhs, rhs = bound.denominator, bound.numerator
            for k, ei in enumerate(e):
                if ei > 0:
                    lhs *= hnum[k] ** ei
                    rhs *= hden[k] ** ei
                elif ei < 0:
                    lhs *= hden[k] ** (-ei)
                    rhs *= hnum[k] ** (-ei)
            if lhs > rhs:
                return
        for f in facets:
            lhs = rhs = 1
            for k, ei in enumerate(f):
                if ei > 0:
                    lhs *= hnum[k] ** ei
                    rhs *= hden[k] ** ei
                elif ei < 0:
                    lhs *= hden[k] ** (-ei)
                    rhs *= hnum[k] ** (-ei)
            if lhs < rhs:
                return
        count += weight
        if tuple_callback is not None:
            tuple_callback(tuple(mvals), hvals, weight)
        if callback is not None:
            for mask in masks:
                coords = tuple(-m if mask >> lam & 1 else m
                               for lam, m in enumerate(mvals))
                callback(coords, hvals)

    def descend(depth):
        nonlocal visited, count
        parts = con_part[-1]
        cap = leaf_cap(depth, parts)
        lo, hi = 1, cap
        if depth == 0 and first_range is not None:
            lo = max(lo, first_range[0])
            hi = min(hi, first_range[1])
        if hi < lo:
            return
        if depth == n - 1:
            visited += hi - lo + 1
            if visited > budget:
                raise BudgetError(
                    f"enumeration visited more than {budget} candidates")
            done = _leaf_numpy(lo, hi, depth, comp_prod[-1])
            if done is not None:
                count += done * weight
                return
            base = comp_prod[-1]
            for m in range(lo, hi + 1):
                g = 0
                for s in range(ncones):
                    g = gcd(g, base[s] * m if comp_has[s][depth] else base[s])
                    if g == 1:
                        break
                if g != 1:
                    continue
                mags[depth] = m
                check_leaf_value(mags)
            return
        visited += 1
        if visited > budget:
            raise BudgetError(
                f"enumeration visited more than {budget} candidates")
        base = comp_prod[-1]
        for m in range(lo, hi + 1):
            newcomp = [base[s] * m if comp_has[s][depth] else base[s]
                       for s in range(ncones)]
            g = 0
            for v in newcomp:
                g = gcd(g, v)
                if g == 1:
                    break
            if g != 1:
                continue
            newparts = []
            ok = True
            for (e, bound, reps), part in zip(cons, parts):
                if reps is None:
                    newparts.append(part)
                    continue
                np_ = [part[s] * m ** reps[s][depth] if reps[s][depth]
                       else part[s] for s in range(ncones)]
                bn, bd = bound.numerator, bound.denominator
                if any(v * bd > bn for v in np_):
                    ok = False
                    break
                newparts.append(np_)
            if not ok:
                continue
            mags[depth] = m
            comp_prod.append(newcomp)
            con_part.append(newparts)
            descend(depth + 1)
            comp_prod.pop()
            con_part.pop()

    def _leaf_numpy(lo, hi, depth, base):
        """Vectorized last coordinate; returns surviving tuple count or None."""
        if (callback is not None or tuple_callback is not None
                or not table_mode or hi - lo < 32):
            return None
        capm = hi
        hmax = []
        for i in range(rho):
            best = 0
            for s in range(ncones):
                v = 1
                for lam in range(depth):
                    w = w_basis[s][i][lam]
                    if w:
                        v *= mags[lam] ** w
                w = w_basis[s][i][depth]
                v *= capm ** w
                best = max(best, v)
            if best > _INT64_SAFE:
                return None
            hmax.append(best)
        for e, bound, _ in cons:
            lhs, rhs = bound.denominator, bound.numerator
            for hm, ei in zip(hmax, e):
                if ei > 0:
                    lhs *= hm ** ei
                elif ei < 0:
                    rhs *= hm ** (-ei)
            if lhs > _INT64_SAFE or rhs > _INT64_SAFE:
                return None
        for f in facets:
            lhs = rhs = 1
            for hm, ei in zip(hmax, f):
                if ei > 0:
                    lhs *= hm ** ei
                elif ei < 0:
                    rhs *= hm ** (-ei)
            if lhs > _INT64_SAFE or rhs > _INT64_SAFE:
                return None
        if any(b * capm > _INT64_SAFE for b in base):
            return None

        m = np.arange(lo, hi + 1, dtype=np.int64)
        comp = np.empty((ncones, m.size), dtype=np.int64)
        for s in range(ncones):
            comp[s] = base[s] * m if comp_has[s][depth] else base[s]
        mask = np.gcd.reduce(comp, axis=0) == 1
        if not mask.any():
            return 0

        hcols = []
        for i in range(rho):
            acc = None
            for s in range(ncones):
                pref = 1
                for lam in range(depth):
                    w = w_basis[s][i][lam]
                    if w:
                        pref *= mags[lam] ** w
                w = w_basis[s][i][depth]
                col = pref * m ** w if w else np.full(m.size, pref,
                                                      dtype=np.int64)
                acc = col if acc is None else np.maximum(acc, col)
            hcols.append(acc)
        for e, bound, _ in cons:
            lhs = np.full(m.size, bound.denominator, dtype=np.int64)
            rhs = np.full(m.size, bound.numerator, dtype=np.int64)
            for col, ei in zip(hcols, e):
                if ei > 0:
                    lhs = lhs * col ** ei
                elif ei < 0:
                    rhs = rhs * col ** (-ei)
            mask &= lhs <= rhs
        for f in facets:
            lhs = np.ones(m.size, dtype=np.int64)
            rhs = np.ones(m.size, dtype=np.int64)
            for col, ei in zip(hcols, f):
                if ei > 0:
                    lhs = lhs * col ** ei
                elif ei < 0:
                    rhs = rhs * col ** (-ei)
            mask &= lhs >= rhs
        return int(mask.sum())

    descend(0)
    return EnumerationResult(count=count, visited=visited, bounds=bounds,
                             wall_events=ev.wall_events - wall0)


def partition_first_coordinate(lattice, region, B, parts):
    """Split the first coordinate range into contiguous worker ranges."""
    bounds = coordinate_bounds(lattice, region, B)
    m0 = bounds[0] if bounds else 0
    parts = max(1, int(parts))
    if m0 == 0:
        return [(1, 0)]
    step = (m0 + parts - 1) // parts
    return [(lo, min(m0, lo + step - 1)) for lo in range(1, m0 + 1, step)]


# -- dual-basis data for box machinery --------------------------------------

def _dual_basis_data(lattice, l_rows):
    """(c, det, gens): c_i = <omega, L_i^*>, |det L|, dual basis generators."""
    rho = lattice.rank
    a = [[Fraction(x) for x in row] for row in l_rows]
    if len(a) != rho or any(len(r) != rho for r in a):
        raise DegenerateInputError("need rho basis classes L_i")
    d = linalg.det(a)
    if d == 0:
        raise DegenerateInputError("L_i do not form a basis")
    at = [[a[i][j] for i in range(rho)] for j in range(rho)]
    c = linalg.solve_exact(at, [Fraction(x) for x in lattice.anticanonical])
    inv = linalg.inverse(a)
    gens = [[inv[j][i] for j in range(rho)] for i in range(rho)]
    return c, abs(d), gens


def _check_subcone(lattice, gens):
    """Every dual-basis generator must pair >= 0 with every ray class."""
    for g in gens:
        for cls in lattice.classes:
            if sum(Fraction(x) * y for x, y in zip(cls, g)) < 0:
                raise DegenerateInputError(
                    "cone is not contained in the dual effective cone")


def nu_neg_cone(lattice, l_rows):
    """nu(-Lambda) = 1/(|det L| * prod <omega, L_i^*>), exact."""
    c, d, _ = _dual_basis_data(lattice, l_rows)
    if any(x <= 0 for x in c):
        raise DegenerateInputError(
            "anticanonical class is not interior to the cone spanned by L_i")
    out = Fraction(1, 1) / d
    for x in c:
        out /= x
    return out


# -- translated polyhedra and boxes -----------------------------------------

def count_translated_polyhedron(lattice, boxes, u, B, tau=None,
                                budget=DEFAULT_BUDGET):
    """Count points with multi-height in D_1 + log(B)u, D_1 a union of
    basis-aligned multiplicative boxes (pairwise interior-disjoint).

    boxes: list of per-basis (lo_i, hi_i) positive rationals at B = 1.
    u: rational pairings <e_i, u>; must be interior to the dual effective
    cone.  Returns count, exact nu(D_1), the growth exponent <omega, u>, and
    the prediction nu*tau*B^expo when tau is given.
    """
    rho = lattice.rank
    u = [Fraction(x) for x in u]
    for cls in lattice.classes:
        if sum(Fraction(c) * x for c, x in zip(cls, u)) <= 0:
            raise DegenerateInputError(
                "translation direction is not interior to the dual "
                "effective cone")
    omega = [Fraction(x) for x in lattice.anticanonical]
    total = 0
    nu1 = Fraction(0)
    for box in boxes:
        cons = []
        for i, (lo, hi) in enumerate(box):
            lo, hi = Fraction(lo), Fraction(hi)
            if not 0 < lo <= hi:
                raise DegenerateInputError("invalid box bounds")
            e_up = [1 if j == i else 0 for j in range(rho)]
            e_dn = [-1 if j == i else 0 for j in range(rho)]
            cons.append((e_up, hi, u[i]))
            cons.append((e_dn, 1 / lo, -u[i]))
        res = enumerate_region(lattice, Region(cons), B, budget=budget)
        total += res.count
        term = Fraction(1)
        for (lo, hi), w in zip(box, omega):
            lo, hi = Fraction(lo), Fraction(hi)
            if w == 0:
                raise DegenerateInputError(
                    "anticanonical class vanishes on a basis direction")
            term *= (hi ** int(w) - lo ** int(w)) / w
        nu1 += term
    expo = sum(w * x for w, x in zip(omega, u))
    out = {"count": total, "nu": nu1, "exponent": expo, "B": Fraction(B)}
    if tau is not None:
        pred = float(nu1) * tau * float(Fraction(B)) ** float(expo)
        out["prediction"] = pred
        out["ratio"] = total / pred if pred else float("nan")
    return out


def count_box(lattice, l_rows, lows, highs, b_vec, tau=None,
              budget=DEFAULT_BUDGET):
    """Count {e^{a_i} B_i <= H_{L_i} <= e^{b_i} B_i} exactly, with the
    product-form prediction nu(D(a,b)) tau prod B_i^{<omega, L_i^*>}.

    lows/highs are the multiplicative bounds e^{a_i} < e^{b_i} (rationals).
    """
    c, d, _ = _dual_basis_data(lattice, l_rows)
    lows = [Fraction(x) for x in lows]
    highs = [Fraction(x) for x in highs]
    b_vec = [Fraction(x) for x in b_vec]
    if any(lo >= hi for lo, hi in zip(lows, highs)):
        raise DegenerateInputError("box needs a_i < b_i")
    if any(b < 1 for b in b_vec):
        raise DegenerateInputError("box scale parameters must be >= 1")
    cons = []
    for row, lo, hi, b in zip(l_rows, lows, highs, b_vec):
        cons.append((list(row), hi * b, 0))
        cons.append(([-x for x in row], 1 / (lo * b), 0))
    res = enumerate_region(lattice, Region(cons), 1, budget=budget)

    nu = Fraction(1, 1) / d
    exact = True
    nu_f = 1.0 / float(d)
    for ci, lo, hi in zip(c, lows, highs):
        if ci <= 0:
            raise DegenerateInputError(
                "anticanonical class is not interior to the cone of the L_i")
        if ci.denominator == 1:
            nu *= (hi ** int(ci) - lo ** int(ci)) / ci
            nu_f *= float((hi ** int(ci) - lo ** int(ci)) / ci)
        else:
            exact = False
            nu_f *= (float(hi) ** float(ci) - float(lo) ** float(ci)) / float(ci)
    nu_out = nu if exact else nu_f
    out = {"count": res.count, "nu": nu_out, "exponents": c,
           "B": b_vec, "visited": res.visited}
    if tau is not None:
        pred = float(nu_out) * tau
        for ci, b in zip(c, b_vec):
            pred *= float(b) ** float(ci)
        out["prediction"] = pred
        out["ratio"] = res.count / pred if pred else float("nan")
    return out


# -- box decompositions ------------------------------------------------------

class WallCollisionError(Exception):
    """A point's height landed exactly on an internal box wall."""


@dataclass(frozen=True)
class BoxDecomposition:
    """Geometric box walls: box n_i holds H_{L_i} in [B r^{-n_i}, B r^{-(n_i-1)}).

    The wall ratios r_i = e^{beta_i} are random large-denominator rationals
    greater than 1, so wall values stay rational and a height sitting exactly
    on a wall is detectable by exact comparison.  Walls are half-open with
    the outermost (value B_i, box 1) closed.  The decomposition itself does
    not depend on the B_i.
    """

    l_rows: tuple
    ratios: tuple

    def kept(self, b_vec):
        """Largest box index per axis not excluded by the emptiness bound:
        boxes with r^{n-1} > B have their upper wall below every height."""
        out = []
        for b, r in zip(b_vec, self.ratios):
            b = Fraction(b)
            n, x = 1, Fraction(1)
            while x * r <= b:
                x *= r
                n += 1
            out.append(n)
        return tuple(out)

    def walls(self, b, i, n_max):
        """Wall values B r_i^{-k} for k = 0..n_max."""
        out = [Fraction(b)]
        for _ in range(n_max):
            out.append(out[-1] / self.ratios[i])
        return out

    def locate(self, h_l, b_vec):
        """Box index of a height vector; raises on an internal wall hit."""
        idx = []
        for h, b, r in zip(h_l, b_vec, self.ratios):
            x = Fraction(h)
            b = Fraction(b)
            if x > b or x <= 0:
                raise DegenerateInputError(f"height {h} outside (0, {b}]")
            n = 0
            while x <= b:
                if x == b and n > 0:
                    raise WallCollisionError(str(h))
                n += 1
                x *= r
            idx.append(n)
        return tuple(idx)


def build_box_decomposition(lattice, l_rows, seed=0, ratios=None):
    """Seeded wall ratios r_i > 1 with ~2^28 denominators.

    `ratios` overrides the draw (for collision-injection tests).  The L_i
    must be a basis with the anticanonical class interior to their span's
    positive orthant, the standing assumption of the box machinery.
    """
    c, _, _ = _dual_basis_data(lattice, l_rows)
    if any(x <= 0 for x in c):
        raise DegenerateInputError(
            "anticanonical class is not interior to the cone of the L_i")
    if ratios is None:
        import random as _random
        rng = _random.Random(seed)
        ratios = []
        for _ in l_rows:
            den = rng.randrange(1 << 28, 1 << 29)
            num = den + rng.randrange(den // 2, 2 * den)
            ratios.append(Fraction(num, den))
    else:
        ratios = [Fraction(r) for r in ratios]
        if any(r <= 1 for r in ratios):
            raise DegenerateInputError("wall ratios must exceed 1")
    return BoxDecomposition(l_rows=tuple(tuple(row) for row in l_rows),
                            ratios=tuple(ratios))


def _box_region(decomp, b_vec, n_vec, extra=()):
    """Closed region for box D_{n,B}: B r^{-n_i} <= H_{L_i} <= B r^{-(n_i-1)}."""
    cons = []
    for row, b, r, n in zip(decomp.l_rows, b_vec, decomp.ratios, n_vec):
        upper = Fraction(b) * r ** (-(n - 1))
        lower = Fraction(b) * r ** (-n)
        cons.append((list(row), upper, 0))
        cons.append(([-x for x in row], 1 / lower, 0))
    cons.extend(extra)
    return Region(cons)


def count_cone_box(lattice, l_rows, b_vec, seed=0, tau=None,
                   budget=DEFAULT_BUDGET, max_redraws=20, histogram=True,
                   decomposition=None):
    """Count {h in Lambda, H_{L_i} <= B_i} with per-box histogram, emptiness
    verification, and the nu-tail inequality report.

    Lambda is the cone dual to cone(L_1..L_rho); it must sit inside the dual
    effective cone.  The histogram comes from one closed enumeration per box;
    a point sitting exactly on an internal wall is then counted twice, so a
    histogram total exceeding the region count is an exact wall-collision
    detector and triggers a redraw of the walls.
    """
    c, d, gens = _dual_basis_data(lattice, l_rows)
    if any(x <= 0 for x in c):
        raise DegenerateInputError(
            "anticanonical class is not interior to the cone of the L_i")
    _check_subcone(lattice, gens)
    b_vec = tuple(Fraction(x) for x in b_vec)
    cons = []
    for row, b in zip(l_rows, b_vec):
        cons.append((list(row), b, 0))
        cons.append(([-x for x in row], 1, 0))
    region = Region(cons)
    nu_neg = nu_neg_cone(lattice, l_rows)

    if any(b < 1 for b in b_vec):
        return {"count": 0, "histogram": {}, "nu_neg": nu_neg,
                "exponents": c, "redraws": 0, "empty_boxes_ok": True}

    res = enumerate_region(lattice, region, 1, budget=budget)
    out = {
        "count": res.count,
        "nu_neg": nu_neg,
        "exponents": c,
        "visited": res.visited,
    }
    if tau is not None:
        pred = float(nu_neg) * tau
        for ci, b in zip(c, b_vec):
            pred *= float(b) ** float(ci)
        out["prediction"] = pred
        out["ratio"] = res.count / pred if pred else float("nan")
    if not histogram:
        return out

    attempt = 0
    while True:
        if decomposition is not None and attempt == 0:
            decomp = decomposition
        else:
            decomp = build_box_decomposition(lattice, l_rows,
                                             seed=seed + attempt)
        kept = decomp.kept(b_vec)
        hist = {}
        beyond = []
        total = 0
        for n_vec in product(*(range(1, k + 2) for k in kept)):
            cnt = enumerate_region(lattice, _box_region(decomp, b_vec, n_vec),
                                   1, budget=budget).count
            if any(n > k for n, k in zip(n_vec, kept)):
                beyond.append((n_vec, cnt))
            else:
                if cnt:
                    hist[n_vec] = cnt
                total += cnt
        beyond_ok = all(cnt == 0 for _, cnt in beyond)
        if total == res.count and beyond_ok:
            break
        # a height sat exactly on an internal wall (double count) or leaked
        # past the emptiness bound; both demand fresh walls
        attempt += 1
        if attempt >= max_redraws:
            raise DegenerateInputError(
                "box walls kept colliding with point heights")

    # exact tail sum of nu over the dropped boxes, against the proof bound
    g = [float(r) ** -float(ci) for r, ci in zip(decomp.ratios, c)]
    kept_frac = 1.0
    for gi, cap in zip(g, kept):
        kept_frac *= 1.0 - gi ** cap
    tail = float(nu_neg) * (1.0 - kept_frac)
    dexp = float(min(c))
    minb = float(min(b_vec))
    cbound = len(c) * float(nu_neg)
    tail_bound = cbound / minb ** dexp if minb > 0 else float("inf")

    out.update({
        "histogram": hist,
        "ratios": decomp.ratios,
        "kept": kept,
        "redraws": attempt,
        "empty_boxes_ok": beyond_ok,
        "histogram_total": total,
        "tail": {"sum": tail, "bound_c": cbound, "d": dexp,
                 "min_B": minb, "ok": tail <= tail_bound},
        "decomposition": decomp,
    })
    return out


def count_bad_slab(lattice, decomp, b_vec, k, n_vec, budget=DEFAULT_BUDGET):
    """Count points of box D_{n,B} whose pairing with L_k is <= 0, with the
    proof-shaped bound prod_{i != k} (B_i r_i^{-n_i})^{<omega, L_i^*>}."""
    c, _, _ = _dual_basis_data(lattice, decomp.l_rows)
    region = _box_region(decomp, b_vec, n_vec,
                         extra=[(list(decomp.l_rows[k]), 1, 0)])
    res = enumerate_region(lattice, region, 1, budget=budget)
    shape = 1.0
    for i, (b, r, ci) in enumerate(zip(b_vec, decomp.ratios, c)):
        if i == k:
            continue
        shape *= (float(b) * float(r) ** -n_vec[i]) ** float(ci)
    fitted = res.count / shape if shape else float("nan")
    return {"count": res.count, "bound_shape": shape, "fitted_C": fitted,
            "k": k, "n": tuple(n_vec)}


# -- f tables and hyperbola sums ---------------------------------------------

@dataclass
class FTable:
    """Counts of points by rounded height fingerprint y = round(H_{L_i})."""

    variant: str           # "floor" or "ceil"
    l_rows: tuple
    caps: tuple            # table covers y_i <= caps_i
    data: dict             # tuple y -> count

    def mass(self, b_vec):
        b = [int(x) for x in b_vec]
        if any(x > cap for x, cap in zip(b, self.caps)):
            raise DegenerateInputError("table does not cover the requested box")
        return sum(cnt for y, cnt in self.data.items()
                   if all(yi <= bi for yi, bi in zip(y, b)))


def tabulate_f(lattice, l_rows, b_max, extra_constraints=(),
               budget=DEFAULT_BUDGET, table_limit=20_000_000):
    """One enumeration pass filling both rounded-height tables over
    {h in Lambda, H_{L_i} <= Bmax_i}.

    extra_constraints (Region constraint triples) restrict the tabulated
    domain further, e.g. to an anticanonical sublevel set; the caller must
    keep the restriction floor-complete for the cells it will query.
    """
    b_max = [int(x) for x in b_max]
    cons = []
    for row, b in zip(l_rows, b_max):
        cons.append((list(row), b, 0))
        cons.append(([-x for x in row], 1, 0))
    cons.extend(extra_constraints)
    floor_data, ceil_data = {}, {}
    rows_int = [[int(x) for x in row] for row in l_rows]

    def cb(mags, hvals, weight):
        yf, yc = [], []
        for row in rows_int:
            v = Fraction(1)
            for h, e in zip(hvals, row):
                if e:
                    v *= Fraction(h) ** e
            yf.append(v.numerator // v.denominator)
            yc.append(-((-v.numerator) // v.denominator))
        kf, kc = tuple(yf), tuple(yc)
        floor_data[kf] = floor_data.get(kf, 0) + weight
        ceil_data[kc] = ceil_data.get(kc, 0) + weight
        if len(floor_data) > table_limit:
            raise DegenerateInputError("f table exceeds the memory guard")

    enumerate_region(lattice, Region(cons), 1, tuple_callback=cb,
                     budget=budget)
    l_t = tuple(tuple(r) for r in l_rows)
    return (FTable("floor", l_t, tuple(b_max), floor_data),
            FTable("ceil", l_t, tuple(b_max), ceil_data))


def hyperbola_sum(table, alphas, B):
    """Exact sum of table values over {y : prod y_i^{alpha_{i,k}} <= B}."""
    B = Fraction(B)
    rho = len(table.caps)
    rows = [[Fraction(a) for a in row] for row in alphas]
    if any(len(r) != rho for r in rows):
        raise DegenerateInputError("alpha rows must match the table rank")
    if any(a < 0 for r in rows for a in r):
        raise DegenerateInputError("hyperbola exponents must be nonnegative")
    for i in range(rho):
        pos = [r[i] for r in rows if r[i] > 0]
        if not pos:
            raise DegenerateInputError(
                "hyperbola domain is unbounded in a coordinate")
        if B >= 1:
            cap = min(linalg.floor_rational_power(B, a.denominator,
                                                  a.numerator) for a in pos)
            if cap > table.caps[i]:
                raise DegenerateInputError(
                    f"table covers y_{i} <= {table.caps[i]} but the domain "
                    f"reaches {cap}")
    comps = []
    for r in rows:
        den = 1
        for a in r:
            den = lcm(den, a.denominator)
        e = [int(a * den) for a in r]
        comps.append((e, B ** den))
    total = 0
    for y, cnt in table.data.items():
        ok = True
        for e, bound in comps:
            v = Fraction(1)
            for yi, ei in zip(y, e):
                if ei:
                    v *= Fraction(yi) ** ei
            if v > bound:
                ok = False
                break
        if ok:
            total += cnt
    return total


# -- anticanonical counts ----------------------------------------------------

def count_anticanonical(lattice, B, mode="direct", decomposition=None,
                        budget=DEFAULT_BUDGET):
    """#{h(omega^{-1}) <= log B}, directly or by inclusion-exclusion over a
    simplicial decomposition of the dual effective cone; the two modes agree
    exactly.  Returns a report dict."""
    if mode == "direct":
        res = enumerate_region(lattice, anticanonical_region(lattice), B,
                               budget=budget)
        return {"count": res.count, "mode": mode, "visited": res.visited}
    if mode != "inclusion_exclusion":
        raise DegenerateInputError(f"unknown mode {mode!r}")
    if decomposition is None:
        decomposition = effective_decomposition(
            [list(c) for c in lattice.classes],
            list(lattice.anticanonical))
    rho = lattice.rank
    facet_lists = [dual_cone([list(g) for g in cone], rho)
                   for cone in decomposition.cones]
    total = 0
    terms = []
    idx = range(len(facet_lists))
    for k in range(1, len(facet_lists) + 1):
        for sub in combinations(idx, k):
            facets = []
            for j in sub:
                facets.extend(facet_lists[j])
            region = anticanonical_region(lattice, facets=facets)
            cnt = enumerate_region(lattice, region, B, budget=budget).count
            total += cnt if k % 2 == 1 else -cnt
            terms.append({"cones": sub, "count": cnt})
    return {"count": total, "mode": mode, "terms": terms,
            "pieces": len(facet_lists)}
