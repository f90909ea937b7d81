"""Multi-heights of a single torus point, place by place.

Every rational point of the dense torus lifts to primitive integer Cox
coordinates, unique up to a finite sign group.  The script canonicalizes
one point of the Hirzebruch surface F1, evaluates its height at each
place, and checks the product formula against the global multi-height.
"""

from fractions import Fraction

from toricount import builtin_fan, canonicalize, class_lattice, multi_height
from toricount.heights import INF_PLACE, local_height


def support_primes(coords):
    ps, n = set(), 1
    for y in coords:
        n *= abs(y)
    p = 2
    while p * p <= n:
        if n % p == 0:
            ps.add(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        ps.add(n)
    return sorted(ps)


def main():
    lat = class_lattice(builtin_fan("F1"))
    pt = canonicalize(lat, (3, -5, 2, 7))
    print(f"canonical Cox coordinates: {pt.coords}")

    mh = multi_height(lat, pt)
    print(f"multi-height on the Picard basis: {tuple(mh.values)}")
    print(f"anticanonical height: {mh.of_class(lat.anticanonical)}")

    # product formula, one divisor class at a time
    for lam, cls in enumerate(lat.classes):
        a = [1 if j == lam else 0 for j in range(len(lat.classes))]
        places = [INF_PLACE] + support_primes(pt.coords)
        prod = Fraction(1)
        parts = []
        for v in places:
            h = local_height(lat, pt, v, a)
            prod *= h
            parts.append(f"H_{v}={h}")
        print(f"  [D_{lam}] = {tuple(cls)}: " + ", ".join(parts)
              + f"  ->  product {prod} == global {mh.of_class(cls)}")
        assert prod == mh.of_class(cls)

    print("product over places matches the global height for every class")


if __name__ == "__main__":
    main()
