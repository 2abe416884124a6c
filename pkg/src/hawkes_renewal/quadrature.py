"""Adaptive quadrature used by the deterministic envelope functions.

Adaptive Simpson with an absolute floor of 1e-12 and a relative target of
1e-8.  Semi-infinite integrals are summed over doubling segments until the
segment contribution is negligible, then a geometric tail estimate is added.
"""

import math

from .errors import IntegrabilityError

REL_TOL = 1e-8
ABS_FLOOR = 1e-12


def _simpson(fn, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = fn(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(fn, a, fa, b, fb, whole, m, fm, tol, depth):
    lm, flm, left = _simpson(fn, a, fa, m, fm)
    rm, frm, right = _simpson(fn, m, fm, b, fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _adaptive(fn, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1) + _adaptive(
        fn, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1
    )


def integrate(fn, a, b, rel_tol=REL_TOL, abs_floor=ABS_FLOOR, points=(), max_depth=40):
    """Integrate ``fn`` on the finite interval [a, b].

    ``points`` lists interior breakpoints (kinks/discontinuities) the
    integrator should split at.
    """
    if b <= a:
        return 0.0
    knots = [a] + sorted(p for p in points if a < p < b) + [b]
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        flo, fhi = fn(lo), fn(hi)
        if not (math.isfinite(flo) and math.isfinite(fhi)):
            raise IntegrabilityError(f"integrand not finite on [{lo}, {hi}]")
        m, fm, whole = _simpson(fn, lo, flo, hi, fhi)
        tol = max(abs_floor, rel_tol * abs(whole))
        total += _adaptive(fn, lo, flo, hi, fhi, whole, m, fm, tol, max_depth)
    if not math.isfinite(total):
        raise IntegrabilityError("finite-interval quadrature diverged")
    return total


def integrate_to_inf(fn, a, rel_tol=REL_TOL, abs_floor=ABS_FLOOR, points=(),
                     first_width=1.0, max_segments=200, factor=""):
    """Integrate ``fn`` on [a, infinity).

    Sums segments of doubling width until two consecutive segments fall
    below the tolerance, then adds a geometric tail estimate from the
    observed decay ratio.  Raises :class:`IntegrabilityError` when the
    segments do not decay.
    """
    total = 0.0
    lo = a
    width = first_width
    prev_seg = None
    small_streak = 0
    for _ in range(max_segments):
        hi = lo + width
        seg = integrate(fn, lo, hi, rel_tol, abs_floor, points=points)
        total += seg
        thresh = max(abs_floor, rel_tol * abs(total))
        if abs(seg) <= thresh:
            small_streak += 1
            if small_streak >= 2:
                if prev_seg is not None and abs(prev_seg) > 0:
                    r = abs(seg) / abs(prev_seg)
                    if r < 1.0:
                        total += seg * r / (1.0 - r)
                return total
        else:
            small_streak = 0
        prev_seg = seg
        lo = hi
        width *= 2.0
    raise IntegrabilityError(
        f"semi-infinite quadrature did not converge past t={lo:g}", factor=factor
    )
