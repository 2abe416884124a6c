"""Weight kernels, rate specifications, schedules and envelope functions.

The deterministic ingredients of the renewal construction: the weight
function ``h`` with its decreasing majorant, the rate function ``psi`` with
its Lipschitz/sublinearity constants, the increasing schedule ``gamma``
with its generalized inverse, and the envelope pair ``f``/``F`` whose
integrals drive every regeneration probability downstream.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ConfigError, IntegrabilityError
from .quadrature import integrate, integrate_to_inf

INF = math.inf


def ceil_int(x, tol=1e-9):
    """Integer ceiling with a snap tolerance against float noise."""
    return int(math.ceil(x - tol))


# ---------------------------------------------------------------------------
# Weight kernels
# ---------------------------------------------------------------------------

class Kernel:
    """Base weight function h on [0, inf), possibly signed.

    ``majorant`` is the decreasing function t -> sup_{s>=t} |h(s)|; every
    subclass guarantees majorant(t) >= |value(t)| and monotone decay, which
    is what keeps the envelope inequalities conservative.
    """

    sign_allowed = True

    def value(self, t):
        raise NotImplementedError

    def majorant(self, t):
        raise NotImplementedError

    @property
    def pos_l1(self):
        """Integral of the positive part h_+ over [0, inf)."""
        raise NotImplementedError

    @property
    def majorant_l1(self):
        raise NotImplementedError

    def majorant_tail_l1(self, t):
        """Integral of the majorant over [t, inf)."""
        raise NotImplementedError

    def majorant_decay_time(self, eps):
        """Smallest t with majorant(t) <= eps (inf if never)."""
        raise NotImplementedError

    def sample_displacement(self, rng, size=None):
        """Draw from the normalized positive part h_+ / ||h_+||."""
        raise NotImplementedError

    def displacement_mgf(self, theta):
        """E exp(theta X) for X ~ h_+/||h_+||, or inf when divergent."""
        raise NotImplementedError

    def displacement_moment(self, q):
        """E X^q for X ~ h_+/||h_+||."""
        dens = lambda x: (max(self.value(x), 0.0) / self.pos_l1) * x**q
        return integrate_to_inf(dens, 0.0, factor="displacement moment")


class ExponentialKernel(Kernel):
    """h(t) = amplitude * exp(-rate * t)."""

    def __init__(self, rate, amplitude):
        if rate <= 0:
            raise ConfigError("exponential kernel needs rate > 0")
        self.rate = float(rate)
        self.amplitude = float(amplitude)

    def value(self, t):
        return self.amplitude * np.exp(-self.rate * np.asarray(t, dtype=float))

    def majorant(self, t):
        return abs(self.amplitude) * np.exp(-self.rate * np.asarray(t, dtype=float))

    @property
    def pos_l1(self):
        return max(self.amplitude, 0.0) / self.rate

    @property
    def majorant_l1(self):
        return abs(self.amplitude) / self.rate

    def majorant_tail_l1(self, t):
        return abs(self.amplitude) / self.rate * math.exp(-self.rate * t)

    def majorant_decay_time(self, eps):
        a = abs(self.amplitude)
        if a <= eps:
            return 0.0
        return math.log(a / eps) / self.rate

    def sample_displacement(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def displacement_mgf(self, theta):
        if theta >= self.rate:
            return INF
        return self.rate / (self.rate - theta)

    def __repr__(self):
        return f"ExponentialKernel(rate={self.rate}, amplitude={self.amplitude})"


class PowerLawKernel(Kernel):
    """h(t) = amplitude * (1 + t)^(-exponent)."""

    def __init__(self, amplitude, exponent):
        if exponent <= 1:
            raise ConfigError("power-law kernel needs exponent > 1 for integrability")
        self.amplitude = float(amplitude)
        self.exponent = float(exponent)

    def value(self, t):
        return self.amplitude * (1.0 + np.asarray(t, dtype=float)) ** (-self.exponent)

    def majorant(self, t):
        return abs(self.amplitude) * (1.0 + np.asarray(t, dtype=float)) ** (-self.exponent)

    @property
    def pos_l1(self):
        return max(self.amplitude, 0.0) / (self.exponent - 1.0)

    @property
    def majorant_l1(self):
        return abs(self.amplitude) / (self.exponent - 1.0)

    def majorant_tail_l1(self, t):
        return abs(self.amplitude) * (1.0 + t) ** (1.0 - self.exponent) / (self.exponent - 1.0)

    def majorant_decay_time(self, eps):
        a = abs(self.amplitude)
        if a <= eps:
            return 0.0
        return (a / eps) ** (1.0 / self.exponent) - 1.0

    def sample_displacement(self, rng, size=None):
        u = rng.random(size)
        return (1.0 - u) ** (-1.0 / (self.exponent - 1.0)) - 1.0

    def displacement_mgf(self, theta):
        return INF if theta > 0 else 1.0

    def __repr__(self):
        return f"PowerLawKernel(amplitude={self.amplitude}, exponent={self.exponent})"


class TableKernel(Kernel):
    """Piecewise-linear h from (time, value) knots; zero beyond the last knot.

    The majorant is a right-to-left running maximum over the knot grid,
    held constant on each inter-knot interval at the larger endpoint, so it
    is conservative for non-monotone tables.
    """

    def __init__(self, knots):
        knots = sorted((float(t), float(v)) for t, v in knots)
        if not knots or knots[0][0] != 0.0:
            raise ConfigError("table kernel needs a knot at t=0")
        ts = np.array([k[0] for k in knots])
        if np.any(np.diff(ts) <= 0):
            raise ConfigError("table kernel knots must have strictly increasing times")
        self.ts = ts
        self.vs = np.array([k[1] for k in knots])
        absv = np.abs(self.vs)
        run = np.maximum.accumulate(absv[::-1])[::-1]
        # step value on [t_k, t_{k+1}) is max of the running maxima at both ends
        self._maj_steps = np.maximum(run, np.append(run[1:], 0.0))

    def value(self, t):
        return np.interp(np.asarray(t, dtype=float), self.ts, self.vs, right=0.0)

    def majorant(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.ts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.ts) - 1)
        out = self._maj_steps[idx]
        return np.where(t >= self.ts[-1], 0.0, out)

    @property
    def support_end(self):
        return float(self.ts[-1])

    def _pos_segments(self):
        """Exact integral of h_+ per segment, splitting at zero crossings."""
        segs = []
        for (t0, v0), (t1, v1) in zip(zip(self.ts[:-1], self.vs[:-1]),
                                      zip(self.ts[1:], self.vs[1:])):
            if v0 >= 0 and v1 >= 0:
                segs.append((t0, t1, 0.5 * (v0 + v1) * (t1 - t0)))
            elif v0 <= 0 and v1 <= 0:
                segs.append((t0, t1, 0.0))
            else:
                tc = t0 + (t1 - t0) * v0 / (v0 - v1)
                if v0 > 0:
                    segs.append((t0, t1, 0.5 * v0 * (tc - t0)))
                else:
                    segs.append((t0, t1, 0.5 * v1 * (t1 - tc)))
        return segs

    @property
    def pos_l1(self):
        return sum(a for _, _, a in self._pos_segments())

    @property
    def majorant_l1(self):
        return float(np.sum(self._maj_steps[:-1] * np.diff(self.ts)))

    def majorant_tail_l1(self, t):
        if t >= self.ts[-1]:
            return 0.0
        total = 0.0
        for k in range(len(self.ts) - 1):
            lo, hi = self.ts[k], self.ts[k + 1]
            if hi <= t:
                continue
            total += self._maj_steps[k] * (hi - max(lo, t))
        return total

    def majorant_decay_time(self, eps):
        for k in range(len(self.ts)):
            if self._maj_steps[k] <= eps:
                return float(self.ts[k])
        return float(self.ts[-1])

    def sample_displacement(self, rng, size=None):
        segs = self._pos_segments()
        areas = np.array([a for _, _, a in segs])
        total = areas.sum()
        if total <= 0:
            raise ConfigError("table kernel has no positive mass to sample from")
        scalar = size is None
        n = 1 if scalar else int(size)
        picks = rng.choice(len(segs), size=n, p=areas / total)
        out = np.empty(n)
        for i, s in enumerate(picks):
            t0, t1, _ = segs[s]
            v0 = max(float(self.value(t0)), 0.0)
            v1 = max(float(self.value(t1)), 0.0)
            u = rng.random()
            if abs(v1 - v0) < 1e-14 * (abs(v0) + abs(v1) + 1e-300):
                out[i] = t0 + u * (t1 - t0)
            else:
                # inverse CDF of a linear density on [t0, t1]
                a = 0.5 * (v1 - v0) / (t1 - t0)
                c = -u * (0.5 * (v0 + v1) * (t1 - t0))
                disc = v0 * v0 - 4.0 * a * c
                out[i] = t0 + (-v0 + math.sqrt(max(disc, 0.0))) / (2.0 * a)
        return out[0] if scalar else out

    def displacement_mgf(self, theta):
        val = integrate(lambda x: max(float(self.value(x)), 0.0) * math.exp(theta * x),
                        0.0, self.support_end, points=list(self.ts[1:-1]))
        return val / self.pos_l1

    def __repr__(self):
        return f"TableKernel({len(self.ts)} knots, support=[0,{self.ts[-1]}])"


class ZeroKernel(ExponentialKernel):
    """Convenience h identically zero."""

    def __init__(self):
        super().__init__(rate=1.0, amplitude=0.0)


class PositivePartKernel(Kernel):
    """The positive part h_+ of a signed kernel, sharing its majorant."""

    def __init__(self, base):
        self.base = base

    def value(self, t):
        return np.clip(self.base.value(t), 0.0, None)

    def majorant(self, t):
        return self.base.majorant(t)

    @property
    def pos_l1(self):
        return self.base.pos_l1

    @property
    def majorant_l1(self):
        return self.base.majorant_l1

    def majorant_tail_l1(self, t):
        return self.base.majorant_tail_l1(t)

    def majorant_decay_time(self, eps):
        return self.base.majorant_decay_time(eps)

    def sample_displacement(self, rng, size=None):
        return self.base.sample_displacement(rng, size)

    def displacement_mgf(self, theta):
        return self.base.displacement_mgf(theta)


def pos_part(kernel):
    """The kernel h_+; returns the kernel itself when already nonnegative."""
    if isinstance(kernel, (ExponentialKernel, PowerLawKernel)):
        return kernel if kernel.amplitude >= 0 else PositivePartKernel(kernel)
    if isinstance(kernel, TableKernel):
        return kernel if np.all(kernel.vs >= 0) else PositivePartKernel(kernel)
    return PositivePartKernel(kernel)


def check_subcritical(kernel, L):
    """Setup (O) admissibility: L * ||h_+|| < 1."""
    m = L * kernel.pos_l1
    if m >= 1.0:
        raise ConfigError(f"L*||h_+|| = {m:g} >= 1: not subcritical for an ordinary Hawkes setup")
    return m


# ---------------------------------------------------------------------------
# Rate specifications
# ---------------------------------------------------------------------------

@dataclass
class RateSpec:
    """Rate function psi(x, age) with its structural constants.

    ``psi`` must be increasing in both arguments and satisfy
    psi(y, b) <= c_psi + L*max(y, 0); these are spot-checked on a grid by
    :meth:`validate` rather than proved.
    """

    psi: object
    L: float
    c_psi: float
    g: object
    delta: float = INF
    K: float | None = None
    setup: str = "O"
    g_breaks: tuple = ()
    name: str = "custom"

    @staticmethod
    def linear(c, L):
        """psi(x) = c + L*x_+, age-independent (ordinary Hawkes)."""
        return RateSpec(
            psi=lambda x, a: c + L * max(x, 0.0),
            L=L, c_psi=c, g=lambda t: 0.0, delta=INF, K=None,
            setup="O", name="linear",
        )

    @staticmethod
    def refractory_linear(c, L, delta):
        """psi(x, a) = c + L*x_+ * 1{a > delta}: excitation gated by age."""
        return RateSpec(
            psi=lambda x, a: c + (L * max(x, 0.0) if a > delta else 0.0),
            L=L, c_psi=c, g=lambda t: 1.0 if t <= delta else 0.0,
            delta=delta, K=c, setup="AD", g_breaks=(delta,),
            name="refractory_linear",
        )

    @staticmethod
    def hard_refractory(c, delta, L=1.0):
        """psi(x, a) = c * 1{a > delta}: total silence for ages <= delta."""
        return RateSpec(
            psi=lambda x, a: c if a > delta else 0.0,
            L=L, c_psi=c, g=lambda t: 1.0 if t <= delta else 0.0,
            delta=delta, K=0.0, setup="AD", g_breaks=(delta,),
            name="hard_refractory",
        )

    def validate(self, x_grid=None, a_grid=None):
        """Grid spot-checks of the structural assumptions; returns problems."""
        problems = []
        xs = x_grid if x_grid is not None else np.linspace(-5.0, 10.0, 13)
        delta_cap = 4.0 if not math.isfinite(self.delta) else max(4.0, 3.0 * self.delta)
        ages = a_grid if a_grid is not None else np.linspace(0.0, delta_cap, 17)
        for x in xs:
            for a in ages:
                v = self.psi(float(x), float(a))
                if v < 0:
                    problems.append(f"psi({x:g},{a:g}) < 0")
                if v > self.c_psi + self.L * max(x, 0.0) + 1e-9:
                    problems.append(f"sublinearity fails at ({x:g},{a:g})")
        for lo, hi in [(xs[i], xs[i + 1]) for i in range(len(xs) - 1)]:
            if self.psi(float(hi), 1.0) < self.psi(float(lo), 1.0) - 1e-9:
                problems.append(f"psi not increasing in x near {lo:g}")
        for lo, hi in [(ages[i], ages[i + 1]) for i in range(len(ages) - 1)]:
            if self.psi(1.0, float(hi)) < self.psi(1.0, float(lo)) - 1e-9:
                problems.append(f"psi not increasing in age near {lo:g}")
        gv = [self.g(float(t)) for t in ages]
        if any(v < -1e-12 or v > 1.0 + 1e-12 for v in gv):
            problems.append("g must take values in [0,1]")
        if any(b > a + 1e-12 for a, b in zip(gv[:-1], gv[1:])):
            problems.append("g must be decreasing")
        if self.setup == "AD":
            if self.K is None:
                problems.append("setup AD needs the refractory bound K")
            if not math.isfinite(self.delta) or self.delta <= 0:
                problems.append("setup AD needs a finite refractory length delta > 0")
            else:
                inv = 1.0 / self.delta
                if abs(inv - round(inv)) > 1e-9:
                    problems.append("delta must be the reciprocal of an integer")
                if self.K is not None:
                    for x in xs:
                        for a in np.linspace(0.0, self.delta, 9):
                            if self.psi(float(x), float(a)) > self.K + 1e-9:
                                problems.append(
                                    f"psi({x:g},{a:g}) > K: refractory bound violated")
        elif self.setup != "O":
            problems.append(f"unknown setup {self.setup!r}")
        return sorted(set(problems))


# ---------------------------------------------------------------------------
# Increasing schedules and their generalized inverse
# ---------------------------------------------------------------------------

class GammaSchedule:
    """Increasing right-continuous schedule with generalized inverse.

    The inverse is inf{s >= 0 : gamma(s) >= y}; the pair satisfies
    y <= gamma(t)  <=>  inverse(y) <= t.
    """

    def __init__(self, fn, form="custom", C=None, inverse_fn=None):
        self.fn = fn
        self.form = form
        self.C = C
        self._inverse_fn = inverse_fn

    @staticmethod
    def linear(C=1.0):
        return GammaSchedule(lambda t: C * t, form="linear", C=C,
                             inverse_fn=lambda y: y / C)

    @staticmethod
    def log(C=None, p=None, c_h=None):
        """C * ln_+(t); C defaults to 10% above the ordinary-setup bound."""
        if C is None:
            if p is None or c_h is None or c_h <= 0:
                raise ConfigError("log schedule needs C, or p and c_h > 0 to auto-choose it")
            C = 1.1 * (p + 1.0) / c_h
        def fn(t):
            return C * math.log(t) if t > 1.0 else 0.0
        def inv(y):
            return 0.0 if y <= 0 else math.exp(y / C)
        return GammaSchedule(fn, form="log", C=C, inverse_fn=inv)

    def value(self, t):
        return float(self.fn(float(t)))

    def inverse(self, y):
        """Generalized inverse; +inf when y is above sup gamma."""
        y = float(y)
        if y <= self.value(0.0):
            return 0.0
        if self._inverse_fn is not None:
            return float(self._inverse_fn(y))
        hi = 1.0
        for _ in range(210):
            if self.value(hi) >= y:
                break
            hi *= 2.0
        else:
            return INF
        lo = 0.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if self.value(mid) >= y:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        return hi

    def ceil_inverse(self, y):
        """Smallest integer m >= 0 with gamma(m) >= y (None if unbounded)."""
        inv = self.inverse(y)
        if math.isinf(inv):
            return None
        m = max(0, ceil_int(inv))
        while m > 0 and self.value(m - 1) >= y:
            m -= 1
        guard = 0
        while self.value(m) < y:
            m += 1
            guard += 1
            if guard > 10**6:
                raise ConfigError("ceil_inverse failed to bracket; schedule irregular?")
        return m

    def int_shifted(self, T):
        """Integral of gamma(s+1) over [0, T]."""
        if T <= 0:
            return 0.0
        if self.form == "linear":
            return self.C * (0.5 * T * T + T)
        if self.form == "log":
            return self.C * ((1.0 + T) * math.log(1.0 + T) - T)
        return integrate(lambda s: self.value(s + 1.0), 0.0, T)

    def check_assumption(self, setup, assumption, p=None, c_h=None):
        """Far-grid validation of the growth conditions; returns problems."""
        problems = []
        grid = np.geomspace(1e3, 1e9, 13)
        if assumption == "B":
            ratios = [self.value(t) / t for t in grid]
            if min(ratios) <= 1e-12:
                problems.append("gamma(t)/t not bounded below on far grid (assumption B)")
        elif assumption == "A":
            if p is None:
                problems.append("assumption A needs the moment order p")
                return problems
            if setup == "O":
                if c_h is None or c_h <= 0:
                    problems.append("setup O assumption A needs c_h > 0")
                    return problems
                ratios = [self.value(t) / ((p + 1.0) * math.log(t) / c_h) for t in grid]
                if min(ratios) <= 1.0:
                    problems.append(
                        "gamma(t) must exceed (p+1)ln(t)/c_h on the far grid (setup O)")
            else:
                ratios = [self.value(t) / math.log(t) for t in grid]
                if min(ratios) <= 1e-12:
                    problems.append("gamma(t)/ln(t) not bounded below on far grid (setup AD)")
        else:
            problems.append(f"unknown assumption {assumption!r}")
        return problems


def gamma_inverse(sched, y):
    """Module-level generalized inverse, +inf sentinel above sup gamma."""
    if y < 0:
        raise ConfigError("gamma_inverse needs y >= 0")
    return sched.inverse(y)


# ---------------------------------------------------------------------------
# Envelope functions
# ---------------------------------------------------------------------------

class EnvelopeFns:
    """The envelope pair f and F with cached integrals.

    f(t1, t2) = (gamma(0) + 1 + 1/delta) * (hbar(t1) + int_0^t2 gamma(s+1) hbar(t1+s) ds)
                + r(t1),
    with the convention 1/delta = 0 for the ordinary setup.  F is the band
    width: (c_psi + L f) on [0, D], then 2 L f + c_psi g.
    """

    def __init__(self, kernel, rate, sched, r=None, D=0.0):
        self.kernel = kernel
        self.rate = rate
        self.sched = sched
        self.r = r if r is not None else (lambda t: 0.0)
        self.D = float(D)
        self.delta_inv = 0.0 if not math.isfinite(rate.delta) else 1.0 / rate.delta
        self.prefactor = sched.value(0.0) + 1.0 + self.delta_inv
        self._J_cache = {}
        self._F_l1 = None
        self._cum = None
        self._cum_end = None

    # -- inner integral ----------------------------------------------------

    def _inner(self, t1, t2):
        """int_0^t2 gamma(s+1) hbar(t1+s) ds, exact factorization when possible."""
        k = self.kernel
        if isinstance(k, ExponentialKernel):
            # hbar(t1+s) = hbar(t1) exp(-rate*s): the schedule factor is shared
            key = t2
            J = self._J_cache.get(key)
            if J is None:
                a = k.rate
                fn = lambda s: self.sched.value(s + 1.0) * math.exp(-a * s)
                if math.isinf(t2):
                    J = integrate_to_inf(fn, 0.0, factor="gamma * majorant tail")
                else:
                    J = integrate(fn, 0.0, t2)
                self._J_cache[key] = J
            return float(k.majorant(t1)) * J
        if isinstance(k, TableKernel):
            hi = max(0.0, k.support_end - t1)
            if not math.isinf(t2):
                hi = min(hi, t2)
            if hi <= 0:
                return 0.0
            breaks = [t - t1 for t in k.ts if 0.0 < t - t1 < hi]
            return integrate(lambda s: self.sched.value(s + 1.0) * float(k.majorant(t1 + s)),
                             0.0, hi, points=breaks)
        fn = lambda s: self.sched.value(s + 1.0) * float(k.majorant(t1 + s))
        if math.isinf(t2):
            return integrate_to_inf(fn, 0.0, factor="gamma * majorant tail")
        return integrate(fn, 0.0, t2)

    # -- public evaluations --------------------------------------------------

    def f(self, t1, t2=INF):
        if t1 < 0:
            raise ConfigError("f is defined for t1 >= 0")
        val = self.prefactor * (float(self.kernel.majorant(t1)) + self._inner(t1, t2)) \
            + float(self.r(t1))
        if not math.isfinite(val):
            raise IntegrabilityError("f evaluated non-finite", factor="majorant or r")
        return val

    def F_pre(self, t):
        return 2.0 * self.rate.L * self.f(t) + self.rate.c_psi * float(self.rate.g(t))

    def F(self, t):
        if self.D > 0 and t <= self.D:
            return self.rate.c_psi + self.rate.L * self.f(t)
        return self.F_pre(t)

    def F_sup(self, lo, hi):
        """sup of F on [lo, hi]; F is decreasing on each side of the delay D,
        where it may jump either way."""
        if hi <= lo:
            return self.F(lo)
        out = self.F(lo)
        if lo <= self.D < hi:
            out = max(out, self.F_pre(self.D))
        return out

    # -- integrals -----------------------------------------------------------

    @property
    def F_l1(self):
        if self._F_l1 is None:
            breaks = [b for b in self.rate.g_breaks if b > 0]
            head = integrate(self.F, 0.0, self.D, points=breaks) if self.D > 0 else 0.0
            tail = integrate_to_inf(self.F_pre, self.D,
                                    points=breaks, factor="F tail")
            self._F_l1 = head + tail
        return self._F_l1

    def _build_cum(self):
        total = self.F_l1
        if total <= 0:
            self._cum_end = max(self.D, 1.0)
            self._cum = lambda t: 0.0
            return
        # find an endpoint where the remaining band mass is negligible
        T = max(self.D + 1.0, 1.0)
        for _ in range(120):
            tail = integrate_to_inf(self.F_pre, max(T, self.D), factor="F tail")
            if tail <= 1e-13 * total:
                break
            T *= 1.6
        knots = np.unique(np.concatenate([
            np.linspace(0.0, min(T, max(self.D * 2.0, 4.0)), 257),
            np.geomspace(max(1e-3, min(4.0, T / 2.0)), T, 257),
            np.array([self.D, T] + [b for b in self.rate.g_breaks if 0 < b < T]),
        ]))
        knots = knots[(knots >= 0) & (knots <= T)]
        cum = np.zeros(len(knots))
        for i in range(1, len(knots)):
            cum[i] = cum[i - 1] + integrate(self.F, knots[i - 1], knots[i])
        interp = PchipInterpolator(knots, np.maximum.accumulate(cum), extrapolate=False)
        end_val = float(cum[-1])
        def cum_fn(t):
            if t <= 0:
                return 0.0
            if t >= knots[-1]:
                return end_val
            return float(interp(t))
        self._cum = cum_fn
        self._cum_end = float(knots[-1])

    def cum_F(self, t):
        """int_0^t F(s) ds via a validated monotone interpolant."""
        if self._cum is None:
            self._build_cum()
        return self._cum(t)

    def tail_mass(self, t):
        return max(self.F_l1 - self.cum_F(t), 0.0)

    def t_cut(self, frac):
        """Smallest t with tail mass <= frac * ||F||_1."""
        if self._cum is None:
            self._build_cum()
        total = self.F_l1
        if total <= 0:
            return 0.0
        target = total * (1.0 - frac)
        if self.cum_F(self._cum_end) <= target:
            return self._cum_end
        return brentq(lambda t: self.cum_F(t) - target, 0.0, self._cum_end, xtol=1e-10)

    def inv_cum(self, mass):
        """Smallest t with cum_F(t) >= mass (requires mass < ||F||_1)."""
        if self._cum is None:
            self._build_cum()
        if mass <= 0:
            return 0.0
        end = self.cum_F(self._cum_end)
        if mass >= end:
            return self._cum_end
        return brentq(lambda t: self.cum_F(t) - mass, 0.0, self._cum_end, xtol=1e-12)

    def validate(self, assumption="A", p=0.0):
        """Moment checks from the integrability assumptions; returns problems."""
        problems = []
        try:
            if assumption == "A":
                for name, fn in [("t^p f", lambda t: t**p * self.f(t)),
                                 ("t^p F", lambda t: t**p * self.F(t))]:
                    v = integrate_to_inf(fn, 0.0, factor=name)
                    if not math.isfinite(v):
                        problems.append(f"{name} not integrable")
            else:
                c = 0.05
                v = integrate_to_inf(lambda t: math.exp(c * t) * self.F(t),
                                     0.0, factor="exp(ct) F")
                if not math.isfinite(v):
                    problems.append("F lacks an exponential moment (assumption B)")
        except IntegrabilityError as exc:
            problems.append(str(exc))
        return problems


def eval_f(env, t1, t2=INF):
    """Two-argument envelope f; see :class:`EnvelopeFns`."""
    return env.f(t1, t2)


def eval_F(env, t):
    """Band width F at lag t; see :class:`EnvelopeFns`."""
    return env.F(t)
