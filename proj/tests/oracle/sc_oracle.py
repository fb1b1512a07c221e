#!/usr/bin/env python3
"""High-precision Schwarz-Christoffel oracle.

Solves the half-plane parameter problem for the unit square and the
square-with-spur domains with mpmath, composes the two maps, and prints
reference values that get frozen into the C++ test suite. Run from the repo
root, e.g.:

    python3 tests/oracle/sc_oracle.py --square
    python3 tests/oracle/sc_oracle.py --spur 2 --dps 60
    python3 tests/oracle/sc_oracle.py --spur 4 2 --dps 60   # spur top = 2
    python3 tests/oracle/sc_oracle.py --kappa0

Normalization (same as the library): the three fixed boundary points
(0,0) -> 0, (1,0) -> 1, (1,1) -> infinity. The remaining prevertices lie on
the negative real axis, ordered, parameterized by log-gaps going left from 0.
"""

import argparse
import sys

import mpmath as mp


def sc_integrand(xs_finite, betas_finite):
    def f(t):
        acc = mp.mpc(1)
        for x, b in zip(xs_finite, betas_finite):
            d = mp.mpc(t) - x
            if d == 0:
                return mp.mpc(0)  # exact endpoint hit; negligible ts weight
            acc *= mp.power(d, b)
        return acc
    return f


class Polygon:
    """Vertices ccw starting (0,0), (1,0), (1,1); vertex 2 maps to infinity."""

    def __init__(self, vertices, angle_fracs):
        self.vertices = vertices
        self.angle_fracs = angle_fracs
        self.betas = [a - 1 for a in angle_fracs]
        self.n = len(vertices)

    def finite_indices(self):
        return [k for k in range(self.n) if k != 2]

    def side_length(self, k):
        return abs(self.vertices[(k + 1) % self.n] - self.vertices[k])


def prevertices(gaps):
    """[0, 1, INF marker, x4, x5, ...] with x_{k+1} built leftward from 0."""
    xs = [mp.mpf(0), mp.mpf(1), mp.inf]
    left = []
    acc = mp.mpf(0)
    for g in gaps:
        acc -= mp.e**g
        left.append(acc)
    return xs + list(reversed(left))


def side_integral(poly, xs, k, maxdegree=8):
    """|integral| of the SC integrand over the prevertex arc of side k.

    Side k joins vertex k to k+1. Arcs: [0,1], [1,+inf), (-inf,x4],
    [x4,x5], ..., [x_last, 0].
    """
    fin = poly.finite_indices()
    xf = [xs[i] for i in fin]
    bf = [poly.betas[i] for i in fin]
    f = sc_integrand(xf, bf)
    n = poly.n
    if k == 0:
        pts = [xs[0], mp.mpf("0.5"), xs[1]]
    elif k == 1:
        pts = [xs[1], mp.mpf(3), mp.inf]
    elif k == 2:
        pts = [-mp.inf, xs[3] - 3, xs[3]]
    elif k == n - 1:
        pts = [xs[n - 1], xs[n - 1] / 2, xs[0]]
    else:
        a, b = xs[k], xs[k + 1]
        pts = [a, (a + b) / 2, b]
    return mp.quad(f, pts, maxdegree=maxdegree)


def newton_lsq(residual, x, verbose=False):
    """Damped Gauss-Newton on a (possibly overdetermined) residual list."""
    m = len(x)
    h = mp.mpf(10) ** (-mp.mp.dps // 3)
    tol = mp.mpf(10) ** (-mp.mp.dps + 12)
    r = mp.matrix(residual(*x))
    for _ in range(120):
        norm = max(abs(v) for v in r)
        if norm < tol:
            break
        jac = mp.zeros(r.rows, m)
        for j in range(m):
            xp = list(x)
            xp[j] += h
            rp = mp.matrix(residual(*xp))
            for i in range(r.rows):
                jac[i, j] = (rp[i] - r[i]) / h
        jtj = jac.T * jac
        jtr = jac.T * r
        step = mp.lu_solve(jtj, jtr)
        scale = mp.mpf(1)
        for _ in range(50):
            xn = [x[j] - scale * step[j] for j in range(m)]
            rn = mp.matrix(residual(*xn))
            if max(abs(v) for v in rn) < norm:
                x, r = xn, rn
                break
            scale /= 2
        else:
            break
        if verbose:
            print("  newton residual:", mp.nstr(max(abs(v) for v in r), 5))
    return x


def solve_polygon(poly, init_gaps, verbose=False):
    cond_sides = list(range(1, 1 + len(init_gaps)))  # match sides 1..m vs side 0

    def residual(*gaps):
        xs = prevertices(list(gaps))
        i0 = abs(side_integral(poly, xs, 0))
        out = []
        for k in cond_sides:
            out.append(abs(side_integral(poly, xs, k)) / i0 -
                       poly.side_length(k) / poly.side_length(0))
        return out

    gaps = newton_lsq(residual, [mp.mpf(g) for g in init_gaps], verbose)
    xs = prevertices(gaps)
    # Closure self-check on the first side not used as a condition.
    k_check = cond_sides[-1] + 1
    if k_check < poly.n:
        i0 = abs(side_integral(poly, xs, 0))
        err = abs(side_integral(poly, xs, k_check)) / i0 - \
            poly.side_length(k_check) / poly.side_length(0)
        if verbose:
            print(f"  closure check side {k_check}: rel error {mp.nstr(err, 5)}")
        assert abs(err) < mp.mpf(10) ** (-min(mp.mp.dps // 4, 25)), f"closure failed: {err}"
    c = (poly.vertices[1] - poly.vertices[0]) / side_integral(poly, xs, 0)
    return xs, c


class HalfPlaneMap:
    def __init__(self, poly, xs, c):
        self.poly = poly
        self.xs = xs
        self.c = c
        fin = poly.finite_indices()
        self.f = sc_integrand([xs[i] for i in fin], [poly.betas[i] for i in fin])
        self.anchor = mp.mpf("0.5")
        self.f_anchor = poly.vertices[0] + c * mp.quad(self.f, [xs[0], self.anchor])

    def map(self, zeta):
        return self.f_anchor + self.c * mp.quad(self.f, [self.anchor, zeta])

    def dmap(self, zeta):
        return self.c * self.f(zeta)

    def inverse(self, w, guess=mp.mpc(0.5, 1.0)):
        z = mp.mpc(guess)
        fz = self.map(z) - w
        tol = mp.mpf(10) ** (-mp.mp.dps + 8)
        for _ in range(200):
            if abs(fz) < tol:
                break
            dz = fz / self.dmap(z)
            scale = mp.mpf(1)
            while True:
                zn = z - scale * dz
                if zn.imag > 0:
                    fn = self.map(zn) - w
                    if abs(fn) < abs(fz):
                        z, fz = zn, fn
                        break
                scale /= 2
                if scale < mp.mpf(10) ** -30:
                    raise RuntimeError("inverse stalled")
        return z


def square_polygon():
    verts = [mp.mpc(0, 0), mp.mpc(1, 0), mp.mpc(1, 1), mp.mpc(0, 1)]
    return Polygon(verts, [mp.mpf("0.5")] * 4)


def spur_polygon(n, top=None):
    n = mp.mpf(n)
    top = mp.mpf(top if top is not None else n)
    w = 1 / n
    verts = [mp.mpc(0, 0), mp.mpc(1, 0), mp.mpc(1, 1), mp.mpc(w, 1),
             mp.mpc(w, top), mp.mpc(0, top)]
    return Polygon(verts, [mp.mpf("0.5"), mp.mpf("0.5"), mp.mpf("0.5"),
                           mp.mpf("1.5"), mp.mpf("0.5"), mp.mpf("0.5")])


def report_square(verbose=True):
    poly = square_polygon()
    xs, c = solve_polygon(poly, [mp.mpf(0)], verbose)
    s1 = HalfPlaneMap(poly, xs, c)
    print("square: x_D =", mp.nstr(xs[3], 25))
    print("square: C   =", mp.nstr(c, 25))
    print("square: f(i) =", mp.nstr(s1.map(mp.mpc(0, 1)), 25))
    print("square: f(0.5+0.5i) =", mp.nstr(s1.map(mp.mpc("0.5", "0.5")), 25))
    return s1


def report_spur(n, top=None, verbose=True):
    poly_s = square_polygon()
    xs_s, c_s = solve_polygon(poly_s, [mp.mpf(0)])
    s1 = HalfPlaneMap(poly_s, xs_s, c_s)

    poly = spur_polygon(n, top)
    modulus = float((mp.mpf(top if top is not None else n) - 1) * mp.mpf(n))
    # Initial gaps g6, g5, g4 (leftward from 0): left wall gap, cluster gap,
    # reflex gap.
    init = [mp.mpf("0.0"), mp.mpf(-mp.pi * modulus), mp.mpf("0.0")]
    xs, c = solve_polygon(poly, init, verbose)
    s2 = HalfPlaneMap(poly, xs, c)
    x4, x5, x6 = xs[3], xs[4], xs[5]
    lam = (x6 - x5) / 2
    ctr = (x6 + x5) / 2
    print(f"spur n={n} top={top or n}:")
    print("  x4 (reflex) =", mp.nstr(x4, 25))
    print("  x5          =", mp.nstr(x5, 25))
    print("  x6          =", mp.nstr(x6, 25))
    print("  center      =", mp.nstr(ctr, 25))
    print("  log lambda  =", mp.nstr(mp.log(lam), 25))
    print("  C           =", mp.nstr(c, 25))

    for z in [mp.mpc("0.5", "0.5"), mp.mpc("0.25", "0.75"), mp.mpc("0.9", "0.1")]:
        zeta = s1.inverse(z)
        fn = s2.map(zeta)
        fpn = s2.dmap(zeta) / s1.dmap(zeta)
        print(f"  zeta({mp.nstr(z, 5)}) =", mp.nstr(zeta, 20))
        print(f"  f({mp.nstr(z, 5)})  =", mp.nstr(fn, 20))
        print(f"  f'({mp.nstr(z, 5)}) =", mp.nstr(fpn, 20))

    sup = mp.mpf(0)
    guess = mp.mpc("0.35", "0.35")  # zeta over z=(0.1,0.1) ballpark; walk the grid
    for i in range(5):
        row_guess = None
        for j in range(5):
            z = mp.mpc("0.1", "0.1") + mp.mpf("0.2") * i + mp.mpc(0, 1) * mp.mpf("0.2") * j
            zeta = s1.inverse(z, row_guess if row_guess is not None else guess)
            if j == 0:
                guess = zeta
            row_guess = zeta
            sup = max(sup, abs(s2.map(zeta) - z))
    print("  sup_{5x5 grid} |f - id| =", mp.nstr(sup, 12))


def report_kappa0():
    """kappa0 = lim_{S->inf} [ int_{H, |s|<S} |s^2-1|^{-1} dA - pi log S ]."""
    def radial(r):
        return mp.quad(lambda th: r / abs(mp.mpc(r * mp.cos(th), r * mp.sin(th)) ** 2 - 1),
                       [0, mp.pi / 2, mp.pi])

    S = mp.mpf(40000)
    val = mp.quad(radial, [0, mp.mpf("0.5"), mp.mpf("0.99"), 1, mp.mpf("1.01"), 2, 100, S])
    kappa0 = val - mp.pi * mp.log(S)
    print("kappa0 =", mp.nstr(kappa0, 20))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dps", type=int, default=50)
    ap.add_argument("--square", action="store_true")
    ap.add_argument("--spur", nargs="+", type=float, default=None)
    ap.add_argument("--kappa0", action="store_true")
    args = ap.parse_args()
    mp.mp.dps = args.dps

    if args.square:
        report_square()
    if args.spur:
        n = args.spur[0]
        top = args.spur[1] if len(args.spur) > 1 else None
        report_spur(n, top)
    if args.kappa0:
        report_kappa0()
    if not (args.square or args.spur or args.kappa0):
        report_square()


if __name__ == "__main__":
    sys.exit(main())
