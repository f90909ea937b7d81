"""Exact integer and rational linear algebra helpers.

Everything here works on plain Python ints and fractions.Fraction so results
stay exact at any size.  Matrices are lists of lists (row major).  Sizes in
this package are tiny (ambient dimension at most 8), so clarity wins over
asymptotics.
"""

from fractions import Fraction
from math import gcd


def mat_copy(a):
    return [row[:] for row in a]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for t in range(k):
            x = ai[t]
            if x:
                bt = b[t]
                oi = out[i]
                for j in range(m):
                    oi[j] += x * bt[j]
    return out


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def vec_dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def vec_sub(u, v):
    return [x - y for x, y in zip(u, v)]


def vec_add(u, v):
    return [x + y for x, y in zip(u, v)]


def vec_scale(u, c):
    return [c * x for x in u]


def vec_gcd(v):
    g = 0
    for x in v:
        g = gcd(g, abs(int(x)))
    return g


def primitive_vector(v):
    """Scale a nonzero rational vector to a primitive integer vector.

    Keeps orientation (multiplies by a positive rational only).
    """
    fracs = [Fraction(x) for x in v]
    den = 1
    for f in fracs:
        den = den * f.denominator // gcd(den, f.denominator)
    ints = [int(f * den) for f in fracs]
    g = vec_gcd(ints)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return [x // g for x in ints]


def _exgcd(a, b):
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def smith_normal_form(a):
    """Smith normal form over the integers.

    Returns (s, d, t, s_inv, t_inv) with  d = s_inv * a * t_inv  diagonal,
    s, t unimodular (so a = s * d * t), positive diagonal entries first and
    each dividing the next.  All five are plain integer matrices.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    d = mat_copy(a)
    s = identity(n)
    s_inv = identity(n)
    t = identity(m)
    t_inv = identity(m)

    def swap_rows(i, j):
        if i == j:
            return
        d[i], d[j] = d[j], d[i]
        s_inv[i], s_inv[j] = s_inv[j], s_inv[i]
        for r in range(n):
            s[r][i], s[r][j] = s[r][j], s[r][i]

    def swap_cols(i, j):
        if i == j:
            return
        for r in range(n):
            d[r][i], d[r][j] = d[r][j], d[r][i]
        for r in range(m):
            t_inv[r][i], t_inv[r][j] = t_inv[r][j], t_inv[r][i]
        t[i], t[j] = t[j], t[i]

    def negate_row(i):
        d[i] = [-x for x in d[i]]
        s_inv[i] = [-x for x in s_inv[i]]
        for r in range(n):
            s[r][i] = -s[r][i]

    def add_row(dst, src, c):
        # row dst += c * row src
        if not c:
            return
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        s_inv[dst] = [x + c * y for x, y in zip(s_inv[dst], s_inv[src])]
        for r in range(n):
            s[r][src] -= c * s[r][dst]

    def add_col(dst, src, c):
        if not c:
            return
        for r in range(n):
            d[r][dst] += c * d[r][src]
        for r in range(m):
            t_inv[r][dst] += c * t_inv[r][src]
        t[src] = [x - c * y for x, y in zip(t[src], t[dst])]

    def bezout_rows(k, i):
        # mix rows k, i so d[k][k] = gcd and d[i][k] = 0 (det 1 block)
        ak, ai = d[k][k], d[i][k]
        g, x, y = _exgcd(ak, ai)
        p, q = -(ai // g), ak // g
        for col in range(m):
            dk, di = d[k][col], d[i][col]
            d[k][col] = x * dk + y * di
            d[i][col] = p * dk + q * di
        for col in range(n):
            vk, vi = s_inv[k][col], s_inv[i][col]
            s_inv[k][col] = x * vk + y * vi
            s_inv[i][col] = p * vk + q * vi
            wk, wi = s[col][k], s[col][i]
            s[col][k] = q * wk - p * wi
            s[col][i] = -y * wk + x * wi

    def bezout_cols(k, j):
        ak, aj = d[k][k], d[k][j]
        g, x, y = _exgcd(ak, aj)
        p, q = -(aj // g), ak // g
        for row in range(n):
            dk, dj = d[row][k], d[row][j]
            d[row][k] = x * dk + y * dj
            d[row][j] = p * dk + q * dj
        for row in range(m):
            vk, vj = t_inv[row][k], t_inv[row][j]
            t_inv[row][k] = x * vk + y * vj
            t_inv[row][j] = p * vk + q * vj
            wk, wj = t[k][row], t[j][row]
            t[k][row] = q * wk - p * wj
            t[j][row] = -y * wk + x * wj

    def clear_at(k):
        # zero column k below and row k right of the pivot; terminates
        # because bezout ops strictly shrink |d[k][k]| and plain
        # subtractions (used whenever the pivot divides) cause no fill-in
        if d[k][k] < 0:
            negate_row(k)
        while True:
            dirty = False
            for i in range(k + 1, n):
                if d[i][k]:
                    if d[i][k] % d[k][k] == 0:
                        add_row(i, k, -(d[i][k] // d[k][k]))
                    else:
                        bezout_rows(k, i)
                        dirty = True
                        if d[k][k] < 0:
                            negate_row(k)
            for j in range(k + 1, m):
                if d[k][j]:
                    if d[k][j] % d[k][k] == 0:
                        add_col(j, k, -(d[k][j] // d[k][k]))
                    else:
                        bezout_cols(k, j)
                        dirty = True
                        if d[k][k] < 0:
                            negate_row(k)
            if not dirty:
                return

    rank_limit = min(n, m)
    nd = 0
    for k in range(rank_limit):
        pivot = None
        for i in range(k, n):
            for j in range(k, m):
                if d[i][j]:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        swap_rows(k, pivot[0])
        swap_cols(k, pivot[1])
        clear_at(k)
        nd = k + 1

    # enforce the divisibility chain d[0][0] | d[1][1] | ...
    changed = True
    while changed:
        changed = False
        for k in range(nd - 1):
            if d[k + 1][k + 1] % d[k][k] != 0:
                add_col(k, k + 1, 1)
                clear_at(k)
                changed = True
    return s, d, t, s_inv, t_inv


def left_kernel_basis(a):
    """Basis (rows) of {w integer : w * a = 0} for an integer matrix a.

    Also returns the elementary divisors (absolute values of the nonzero
    diagonal of the Smith form), which callers use to detect torsion.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    s, d, t, s_inv, t_inv = smith_normal_form(a)
    divisors = []
    for k in range(min(n, m)):
        if d[k][k]:
            divisors.append(abs(d[k][k]))
    r = len(divisors)
    basis = [s_inv[i][:] for i in range(r, n)]
    return basis, divisors


def hermite_row_form(a):
    """Row Hermite normal form with transform.

    Returns (h, u, u_inv) with h = u * a, u unimodular.  Pivots are positive,
    entries above a pivot are reduced into [0, pivot).  Rows of zeros sink to
    the bottom.  Canonical for a fixed row span.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    h = mat_copy(a)
    u = identity(n)
    u_inv = identity(n)

    def swap(i, j):
        h[i], h[j] = h[j], h[i]
        u[i], u[j] = u[j], u[i]
        for row in range(n):
            u_inv[row][i], u_inv[row][j] = u_inv[row][j], u_inv[row][i]

    def addrow(dst, src, c):
        # row dst += c * row src ; inverse transform column update
        if not c:
            return
        h[dst] = [x + c * y for x, y in zip(h[dst], h[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]
        for row in range(n):
            u_inv[row][src] -= c * u_inv[row][dst]

    def negate(i):
        h[i] = [-x for x in h[i]]
        u[i] = [-x for x in u[i]]
        for row in range(n):
            u_inv[row][i] = -u_inv[row][i]

    pivot_row = 0
    for col in range(m):
        # gcd the column below pivot_row into one row
        rows = [i for i in range(pivot_row, n) if h[i][col]]
        if not rows:
            continue
        while len(rows) > 1:
            rows.sort(key=lambda i: abs(h[i][col]))
            i0 = rows[0]
            for i in rows[1:]:
                q = h[i][col] // h[i0][col]
                addrow(i, i0, -q)
            rows = [i for i in range(pivot_row, n) if h[i][col]]
        i0 = rows[0]
        if i0 != pivot_row:
            swap(i0, pivot_row)
        if h[pivot_row][col] < 0:
            negate(pivot_row)
        p = h[pivot_row][col]
        for i in range(pivot_row):
            q = h[i][col] // p  # floor division: reduce into [0, p)
            addrow(i, pivot_row, -q)
        pivot_row += 1
        if pivot_row == n:
            break
    return h, u, u_inv


def frac_matrix(a):
    return [[Fraction(x) for x in row] for row in a]


def rank(a):
    """Rank of a rational matrix (exact Gaussian elimination)."""
    m = frac_matrix(a)
    n = len(m)
    cols = len(m[0]) if n else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, n) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(n):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == n:
            break
    return r


def solve_exact(a, b):
    """Solve a x = b over Fraction.  Returns None if inconsistent.

    a is n x m (n equations), b length n.  For underdetermined systems an
    arbitrary solution (free variables set to zero) is returned.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if aug[i][m]:
            return None
    x = [Fraction(0)] * m
    for i, c in enumerate(pivots):
        x[c] = aug[i][m]
    return x


def det(a):
    """Exact determinant of a square rational matrix."""
    m = frac_matrix(a)
    n = len(m)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        result *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * result


def inverse(a):
    """Exact inverse of a square rational matrix."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


def integer_inverse(a):
    """Inverse of a unimodular integer matrix, as integers."""
    inv = inverse(a)
    out = []
    for row in inv:
        irow = []
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            irow.append(int(x))
        out.append(irow)
    return out


def nullspace(a):
    """Basis of the rational right nullspace {x : a x = 0}."""
    n = len(a)
    m = len(a[0]) if n else 0
    mat = frac_matrix(a)
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * m
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][fc]
        basis.append(v)
    return basis


def iroot(x, k):
    """Floor of the k-th root of a nonnegative integer, exactly.

    Integer Newton iteration from an overestimate; converges monotonically.
    """
    if x < 0:
        raise ValueError("negative radicand")
    if x in (0, 1) or k == 1:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)  # 2^ceil(bits/k) >= x^(1/k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def floor_rational_power(base, num, den):
    """floor(base ** (num/den)) for a positive rational base, exact.

    base is a Fraction, num/den integers with den > 0.  Used to turn exact
    sup values exp(sup) = base^(num/den) into integer coordinate bounds.
    """
    if num < 0:
        base = 1 / base
        num = -num
    p = base.numerator ** num
    q = base.denominator ** num
    # floor((p/q)^(1/den)): integer m with m^den * q <= p < (m+1)^den * q
    m = iroot(p // q, den)
    while (m + 1) ** den * q <= p:
        m += 1
    while m ** den * q > p:
        m -= 1
    return m
