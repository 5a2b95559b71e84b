"""Generate the committed table of the first 100 positive zeros of xi.

Uses the zeta-route reference evaluation (not the density quadrature), so
the table is independent of the transform machinery it later checks.
Ordinates are found by sign-scanning xi(1/2 + i x) on a half-unit grid and
refining each bracket by bisection plus a secant polish.

Run from the repository root:

    python3 scripts/generate_zero_table.py > tests/data/xi_zeros_100.txt
"""

import sys

import mpmath
from mpmath import mp, mpf

sys.path.insert(0, "src")

from dbnlab.numerics import eval_xi_reference
from dbnlab.precision import PrecisionContext

COUNT = 100
X_START = mpf(10)
STEP = mpf("0.5")
TOL = mpf("1e-13")


def xi_real(x, ctx):
    return eval_xi_reference(x, ctx).real


def refine(lo, hi, flo, ctx):
    for _ in range(12):
        mid = (lo + hi) / 2
        fm = xi_real(mid, ctx)
        if fm == 0:
            return mid
        if mpmath.sign(fm) == mpmath.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    # secant polish from the bisected bracket
    a, b = lo, hi
    fa, fb = flo, xi_real(b, ctx)
    for _ in range(30):
        if fb == fa:
            break
        c = b - fb * (b - a) / (fb - fa)
        if not lo <= c <= hi:
            c = (a + b) / 2
        fc = xi_real(c, ctx)
        a, fa, b, fb = b, fb, c, fc
        if abs(b - a) < TOL:
            break
    return b


def main():
    ctx = PrecisionContext(working_digits=30, target_abs_tol=mpf("1e-20"))
    with ctx.workdps(0):
        print("# first %d positive real zeros of xi(z), s = 1/2 + iz" % COUNT)
        print("# found by sign-scan + bisection on the zeta-route evaluation")
        print("# (see scripts/generate_zero_table.py)")
        found = 0
        x = X_START
        fx = xi_real(x, ctx)
        while found < COUNT:
            x2 = x + STEP
            fx2 = xi_real(x2, ctx)
            if fx2 == 0:
                x2 += TOL  # nudge off the exact node
                fx2 = xi_real(x2, ctx)
            if mpmath.sign(fx) != mpmath.sign(fx2):
                root = refine(x, x2, fx, ctx)
                print(mpmath.nstr(root, 18))
                found += 1
                sys.stderr.write("\r%3d / %d" % (found, COUNT))
                sys.stderr.flush()
            x, fx = x2, fx2
        sys.stderr.write("\n")


if __name__ == "__main__":
    main()
