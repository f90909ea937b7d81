"""Tour of the builtin fans: rays, maximal cones, and the Picard data
derived from them.

Run: python3 demos/01_fan_tour.py
"""

from toricount import (anticanonical_region, builtin_fan, class_lattice,
                       coordinate_bounds)


def describe(name):
    fan = builtin_fan(name)
    lat = class_lattice(fan)
    print(f"== {name} ==")
    print(f"  dim {fan.dim}, {len(fan.rays)} rays, "
          f"{len(fan.max_cones)} maximal cones, Picard rank {lat.rank}")
    print(f"  rays: {list(fan.rays)}")
    print(f"  maximal cones (ray index sets): {list(fan.max_cones)}")
    print(f"  divisor classes [D_lam]: {list(lat.classes)}")
    print(f"  anticanonical class: {tuple(lat.anticanonical)}")
    basis = [[1 if j == i else 0 for j in range(lat.rank)]
             for i in range(lat.rank)]
    nef = [tuple(b) for b in basis if lat.is_nef(b)]
    print(f"  nef basis vectors: {nef}")
    # height of the anticanonical sublevel set, per torsor coordinate
    caps = coordinate_bounds(lat, anticanonical_region(lat), 1000)
    print(f"  |y_lam| caps at H <= 1000: {caps}")
    print()


if __name__ == "__main__":
    for name in ("P1", "P2", "P3", "P1xP1", "F1"):
        describe(name)
