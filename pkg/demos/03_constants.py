"""The expected counting constants, one fan at a time.

alpha is an exact rational from the dual effective cone, c_P an exact
rational from the hyperbola polytope, and tau = 2^-rho * omega_inf *
prod_p omega_p combines an Euler product with a Monte Carlo volume.
"""

from toricount import (alpha_constant, builtin_fan, c_p_constant,
                       class_lattice, hyperbola_polytope, tamagawa)


def main():
    print(f"{'fan':6} {'alpha':>6} {'c_P':>4} {'euler':>9} {'omega_inf':>10} "
          f"{'tau':>8} {'alpha*tau':>9}")
    for name in ("P1", "P2", "P1xP1", "F1"):
        lat = class_lattice(builtin_fan(name))
        classes = [list(c) for c in lat.classes]
        omega = list(lat.anticanonical)

        alpha = alpha_constant(classes, omega)
        # triangulation order must not matter
        assert alpha == alpha_constant(classes, omega, order="revlex")

        poly = hyperbola_polytope([[1] * lat.rank], [1] * lat.rank)
        cp = c_p_constant(poly)["exact"]

        rep = tamagawa(lat, p_max=2000, samples=200000, seed=0)
        tau = rep["tau"]["value"]
        print(f"{name:6} {str(alpha):>6} {str(cp):>4} "
              f"{rep['euler']['value']:9.5f} "
              f"{rep['omega_inf']['value']:10.4f} {tau:8.4f} "
              f"{float(alpha) * tau:9.4f}")

    # the c_P section profile: volumes of the delta-cuts extrapolate to c_P
    poly = hyperbola_polytope([[1, 0], [0, 1], [1, 1]], [1, 1])
    cp = c_p_constant(poly)
    print(f"\nsection volumes for a rank-2 polytope: "
          f"{[(str(d), str(v)) for d, v in cp['sections']]}")
    print(f"extrapolated {cp['extrapolated']} vs exact {cp['exact']}")


if __name__ == "__main__":
    main()
