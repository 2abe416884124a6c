"""Simulation of ordinary, linear and age-dependent Hawkes processes.

Events are obtained by exact thinning of a lazy PRM: between events the
intensity is dominated by a bound built from the decreasing kernel
majorant, every PRM point below the bound is inspected, and a point (s, z)
becomes an event iff z <= intensity(s).  No discretization is involved.
"""

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .errors import DominationError
from .kernels import ExponentialKernel

_SLACK = 1e-9


@dataclass
class Path:
    """A simple point-process realization: sorted event times on (origin, horizon]."""

    times: np.ndarray
    horizon: float
    origin: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("event times must be strictly increasing")

    @property
    def n(self):
        return len(self.times)

    def count(self, a, b):
        """Number of events in (a, b]."""
        return int(np.searchsorted(self.times, b, side="right")
                   - np.searchsorted(self.times, a, side="right"))

    def last_before(self, t):
        """Largest event time strictly below t, or None."""
        i = np.searchsorted(self.times, t, side="left")
        return float(self.times[i - 1]) if i else None


class KernelMemory:
    """Incremental evaluation of sum_j h(t - u_j) over recorded jumps u_j < t.

    Exponential kernels use an anchored prefix recursion (O(1) extension,
    O(log n) random access, numerically stable); other kernels fall back to
    direct summation.  ``majorant_sum`` gives the same sum under hbar, which
    dominates any future value of the true sum.
    """

    def __init__(self, kernel):
        self.kernel = kernel
        self.jumps = []
        self._exp = isinstance(kernel, ExponentialKernel)
        if self._exp:
            self._S = []  # S_k = sum_j exp(-rate (u_k - u_j)), anchored at u_k

    def add(self, u):
        if self.jumps and u <= self.jumps[-1]:
            raise ValueError("jumps must be added in strictly increasing order")
        if self._exp:
            if self.jumps:
                decay = math.exp(-self.kernel.rate * (u - self.jumps[-1]))
                self._S.append(1.0 + decay * self._S[-1])
            else:
                self._S.append(1.0)
        self.jumps.append(u)

    def _weighted(self, t, idx, amp):
        if idx == 0:
            return 0.0
        if self._exp:
            u = self.jumps[idx - 1]
            return amp * math.exp(-self.kernel.rate * (t - u)) * self._S[idx - 1]
        us = np.array(self.jumps[:idx])
        if amp >= 0:
            return float(np.sum(self.kernel.value(t - us)))
        return float(np.sum(self.kernel.majorant(t - us)))

    def value_at(self, t):
        """sum h(t - u) over jumps u < t."""
        idx = bisect.bisect_left(self.jumps, t)
        if self._exp:
            return self._weighted(t, idx, self.kernel.amplitude)
        us = np.array(self.jumps[:idx])
        return float(np.sum(self.kernel.value(t - us))) if idx else 0.0

    def majorant_sum(self, t):
        """sum hbar(t - u) over jumps u <= t.

        Inclusive on the right so that a bound computed at a jump time
        still dominates the memory just after the jump; decreasing in t
        until the next jump is added.
        """
        idx = bisect.bisect_right(self.jumps, t)
        if idx == 0:
            return 0.0
        if self._exp:
            u = self.jumps[idx - 1]
            return abs(self.kernel.amplitude) * math.exp(
                -self.kernel.rate * (t - u)) * self._S[idx - 1]
        us = np.array(self.jumps[:idx])
        return float(np.sum(self.kernel.majorant(t - us)))


class ProcessState:
    """One thinned process: kernel memory, signal, age and delay handling.

    ``signal`` is evaluated in absolute time; ``signal_upper`` must be a
    decreasing upper envelope of the signal (not of its absolute value) so
    that the domination bound stays valid between events.
    """

    def __init__(self, kernel, rate, signal=None, signal_upper=None,
                 age0=0.0, delay=0.0, origin=0.0):
        self.memory = KernelMemory(kernel)
        self.rate = rate
        self.signal = signal if signal is not None else (lambda t: 0.0)
        self.signal_upper = signal_upper
        self.age0 = float(age0)
        self.delay = float(delay)
        self.origin = float(origin)

    @property
    def jumps(self):
        return self.memory.jumps

    def age_at(self, t):
        i = bisect.bisect_left(self.memory.jumps, t)
        if i:
            return t - self.memory.jumps[i - 1]
        return self.age0 + (t - self.origin)

    def memory_at(self, t):
        return self.memory.value_at(t) + float(self.signal(t))

    def lambda_at(self, t):
        if t <= self.origin + self.delay:
            return 0.0
        return float(self.rate.psi(self.memory_at(t), self.age_at(t)))

    def bound_from(self, t):
        """Dominating intensity bound valid on [t, next jump)."""
        env = self.memory.majorant_sum(t)
        if self.signal_upper is not None:
            env += max(float(self.signal_upper(t)), 0.0)
        else:
            s = float(self.signal(t))
            if s > 0:
                raise DominationError(
                    "positive signal needs a decreasing upper envelope", at_time=t)
        b = self.rate.c_psi + self.rate.L * max(env, 0.0)
        if not math.isfinite(b):
            raise DominationError("dominating bound is not finite", at_time=t)
        return b

    def add_jump(self, t):
        self.memory.add(t)


def simulate_adhp(pi, kernel, rate, signal=None, signal_upper=None, age0=0.0,
                  delay=0.0, horizon=100.0, origin=0.0, stream_reader=None):
    """Exact thinning simulation of a (D-delayed) age-dependent Hawkes process.

    Parameters
    ----------
    pi : PrmStream
        Driving PRM.  ``stream_reader`` may override how candidate points
        are fetched (same signature as ``pi.sample``), which the renewal
        construction uses to present split measures as drivers.
    kernel, rate : weight function and rate specification.
    signal, signal_upper : initial signal R(t) in absolute time, and a
        decreasing upper envelope of it (required when R can be positive).
    age0, delay : initial age and the delay D during which the intensity
        is suppressed.
    horizon : simulate on (origin, horizon].

    Returns the realized :class:`Path`.
    """
    if not math.isfinite(horizon):
        raise DominationError("horizon must be finite")
    state = ProcessState(kernel, rate, signal, signal_upper, age0, delay, origin)
    read = stream_reader if stream_reader is not None else pi.sample
    _sweep(state, read, origin, horizon)
    return Path(np.array(state.jumps), horizon=horizon, origin=origin)


def _sweep(state, read, t_from, t_to, window=1.0):
    """Drive one process from t_from to t_to by windowed exact thinning."""
    frontier = t_from
    while frontier < t_to - 1e-15:
        w_end = min(math.floor(frontier / window) * window + window, t_to)
        if w_end <= frontier:
            w_end = min(frontier + window, t_to)
        bound = state.bound_from(frontier) * (1.0 + _SLACK) + 1e-12
        pts = read(frontier, w_end, bound)
        moved = False
        for s, z in pts:
            lam = state.lambda_at(s)
            if lam > bound * (1.0 + _SLACK) + 1e-9:
                raise DominationError("intensity exceeded its bound", at_time=s)
            if z <= lam:
                state.add_jump(s)
                frontier = s
                moved = True
                break
        if not moved:
            frontier = w_end


def memory_at(path, kernel, signal, t):
    """Exact memory sum_{u < t} h(t - u) + R(t) for a realized path."""
    us = path.times[path.times < t]
    base = float(np.sum(kernel.value(t - us))) if len(us) else 0.0
    return base + (float(signal(t)) if signal is not None else 0.0)


def age_at(path, age0, t):
    """Age at t with the left-limit convention: last jump strictly before t."""
    u = path.last_before(t)
    return (t - u) if u is not None else age0 + (t - path.origin)


def path_to_csv(path, fh):
    """One event time per line, header ``t``, 12 significant digits."""
    fh.write("t\n")
    for t in path.times:
        fh.write(f"{t:.12g}\n")
