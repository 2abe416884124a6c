"""Regeneration-block statistics.

Coupling-time experiments, time-average and functional central limit
estimation over blocks, a weak iterated-logarithm diagnostic, and the
windowed functionals of sliding-window type.  The invariant mean is always
estimated by the renewal-reward ratio of sums over blocks, which is exact
for regeneration blocks.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import ConfigError
from .prm import PrmStream, derive_key, spawn_rng
from .renewal import ZStart, iterate_regenerations, run_system


@dataclass
class TestReport:
    """One statistical check: statistic, p-value and verdict."""

    __test__ = False  # not a pytest case despite the name

    name: str
    statistic: float
    p_value: float
    n: int
    passed: bool
    alpha: float = 0.01
    gating: bool = True
    detail: str = ""


def write_reports(reports, fh):
    fh.write("test,statistic,p_value,n,pass\n")
    for r in reports:
        stat = "inf" if math.isinf(r.statistic) else f"{r.statistic:.12g}"
        pv = "" if r.p_value is None or math.isnan(r.p_value) else f"{r.p_value:.12g}"
        fh.write(f"{r.name},{stat},{pv},{r.n},{int(bool(r.passed))}\n")


def summarize(reports):
    lines = []
    for r in reports:
        tag = "PASS" if r.passed else ("info" if not r.gating else "FAIL")
        pv = "-" if r.p_value is None or math.isnan(r.p_value) else f"{r.p_value:.4g}"
        lines.append(f"[{tag}] {r.name}: stat={r.statistic:.4g} p={pv} n={r.n} {r.detail}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Small test helpers
# ---------------------------------------------------------------------------

def ad_normality(x, alpha=0.01, name="anderson-darling"):
    """Anderson-Darling normality check with the D'Agostino p approximation."""
    x = np.asarray(x, dtype=float)
    res = scipy.stats.anderson(x, "norm")
    stat = float(res.statistic)
    crit = float(res.critical_values[-1])  # the 1% level
    n = len(x)
    a2 = stat * (1.0 + 0.75 / n + 2.25 / n**2)
    if a2 < 0.2:
        p = 1.0 - math.exp(-13.436 + 101.14 * a2 - 223.73 * a2 * a2)
    elif a2 < 0.34:
        p = 1.0 - math.exp(-8.318 + 42.796 * a2 - 59.938 * a2 * a2)
    elif a2 < 0.6:
        p = math.exp(0.9177 - 4.279 * a2 - 1.38 * a2 * a2)
    else:
        p = math.exp(1.2937 - 5.709 * a2 + 0.0186 * a2 * a2)
    p = min(max(p, 0.0), 1.0)
    return TestReport(name=name, statistic=stat, p_value=p, n=n,
                      passed=stat < crit, alpha=alpha,
                      detail=f"crit(1%)={crit:.3f}")


def chi2_gof(observed, probs, alpha=0.01, min_expected=5.0, ddof=0,
             name="chi-square"):
    """Chi-square goodness of fit with right-tail pooling of sparse bins."""
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(probs, dtype=float) * obs.sum()
    o_pool, e_pool = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            o_pool.append(o_acc)
            e_pool.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 and e_pool:
        o_pool[-1] += o_acc
        e_pool[-1] += e_acc
    o_pool = np.array(o_pool)
    e_pool = np.array(e_pool) * (o_pool.sum() / max(np.sum(e_pool), 1e-300))
    stat, p = scipy.stats.chisquare(o_pool, e_pool, ddof=ddof)
    return TestReport(name=name, statistic=float(stat), p_value=float(p),
                      n=int(obs.sum()), passed=p >= alpha, alpha=alpha,
                      detail=f"{len(o_pool)} pooled bins")


def ks_against(samples, cdf, alpha=0.01, name="kolmogorov-smirnov"):
    stat, p = scipy.stats.kstest(samples, cdf)
    return TestReport(name=name, statistic=float(stat), p_value=float(p),
                      n=len(samples), passed=p >= alpha, alpha=alpha)


def poisson_dispersion(counts, alpha=0.01, name="poisson-dispersion"):
    """Two-sided index-of-dispersion test: (n-1) s^2 / mean ~ chi2(n-1)."""
    c = np.asarray(counts, dtype=float)
    n = len(c)
    stat = (n - 1) * c.var(ddof=1) / max(c.mean(), 1e-300)
    lo = scipy.stats.chi2.cdf(stat, n - 1)
    p = 2.0 * min(lo, 1.0 - lo)
    return TestReport(name=name, statistic=float(stat), p_value=float(p),
                      n=n, passed=p >= alpha, alpha=alpha)


def se_bound_report(name, value, target, se, k=3.0, n=0, detail=""):
    """|value - target| <= k * se, reported with a two-sided normal p."""
    z = abs(value - target) / se if se > 0 else math.inf
    p = 2.0 * scipy.stats.norm.sf(z)
    return TestReport(name=name, statistic=float(z), p_value=float(p), n=n,
                      passed=z <= k, alpha=scipy.stats.norm.sf(k) * 2,
                      detail=detail or f"value={value:.5g} target={target:.5g} se={se:.3g}")


# ---------------------------------------------------------------------------
# Block statistics
# ---------------------------------------------------------------------------

@dataclass
class BlockStat:
    """Per-block sums of a centered functional and the variance estimate."""

    s_values: np.ndarray
    lengths: np.ndarray
    counts: np.ndarray
    p_tilde: float
    mean_length: float
    sigma2: float
    sigma2_se: float


def block_stat_from_blocks(blocks):
    """Event-count functional: S_i = N_i - m * rho_i with the renewal-reward
    mean m = sum N / sum rho."""
    counts = np.array([b.n_events for b in blocks], dtype=float)
    lengths = np.array([b.rho for b in blocks], dtype=float)
    m_hat = counts.sum() / lengths.sum()
    s = counts - m_hat * lengths
    mu = lengths.mean()
    n = len(blocks)
    sigma2 = float(np.mean(s**2)) / mu
    sigma2_se = float(np.std(s**2, ddof=1)) / math.sqrt(n) / mu
    return BlockStat(s_values=s, lengths=lengths, counts=counts, p_tilde=m_hat,
                     mean_length=mu, sigma2=sigma2, sigma2_se=sigma2_se)


def unit_counts(blocks):
    """Concatenated per-unit event counts across blocks (integer lengths)."""
    out = []
    for b in blocks:
        k = int(round(b.rho))
        if abs(b.rho - k) > 1e-9:
            raise ConfigError("unit-window statistics need integer block lengths "
                              "(integer D and unit-integer alphas)")
        hist, _ = np.histogram(b.path.times, bins=np.arange(0.0, k + 1.0))
        out.append(hist)
    return np.concatenate(out) if out else np.empty(0)


def batch_means_sigma2(counts, batch=64):
    """Batch-means variance-rate estimate from a long unit-count series."""
    k = len(counts) // batch
    if k < 8:
        raise ConfigError("too few batches for a batch-means estimate")
    c = counts[: k * batch].astype(float)
    c -= c.mean()
    sums = c.reshape(k, batch).sum(axis=1)
    s2 = float(np.mean(sums**2)) / batch
    return s2, s2 * math.sqrt(2.0 / k)


def clt_time_average(cfg, n_blocks=32000, rep_blocks=32, seed=0, n_jobs=1,
                     alpha=0.01):
    """Time-average CLT over regeneration blocks for the event-count
    functional; returns (BlockStat, reports).

    Standardized sums over groups of ``rep_blocks`` consecutive blocks are
    tested for normality, and the block variance estimate is cross-checked
    against batch means on the concatenated run.
    """
    blocks = iterate_regenerations(cfg, n_blocks, seed=seed, n_jobs=n_jobs)
    stat = block_stat_from_blocks(blocks)
    reports = []
    if stat.sigma2 <= 1e-10 * max(1.0, stat.p_tilde):
        warnings.warn("block functional is degenerate: sigma^2 is ~ 0")
        reports.append(TestReport(name="clt-degenerate", statistic=stat.sigma2,
                                  p_value=float("nan"), n=n_blocks, passed=False,
                                  gating=False, detail="sigma^2 ~ 0"))
        return stat, reports
    n_rep = len(blocks) // rep_blocks
    s = stat.s_values[: n_rep * rep_blocks].reshape(n_rep, rep_blocks).sum(axis=1)
    ell = stat.lengths[: n_rep * rep_blocks].reshape(n_rep, rep_blocks).sum(axis=1)
    z = s / np.sqrt(ell * stat.sigma2)
    reports.append(ad_normality(z, alpha=alpha, name="clt-normality"))
    counts = unit_counts(blocks)
    bm, bm_se = batch_means_sigma2(counts)
    reports.append(se_bound_report(
        "clt-sigma2-cross", stat.sigma2, bm,
        math.hypot(stat.sigma2_se, bm_se), n=len(blocks),
        detail=f"blocks={stat.sigma2:.5g} batch-means={bm:.5g}"))
    return stat, reports


def functional_clt_paths(cfg, n=200, n_paths=400, seed=0, n_jobs=1, alpha=0.01,
                         t_grid=(0.25, 0.5, 1.0)):
    """Rescaled partial-sum paths B_t = S_{nt} / sqrt(n sigma^2) with linear
    interpolation; tests Brownian marginal variances and increment
    independence.  Returns (t_grid, paths, reports)."""
    all_blocks = []
    per_path = []
    for pth in range(n_paths):
        path_seed = derive_key(seed, 0xFC17, pth) & 0x7FFFFFFF
        blocks = []
        total = 0.0
        idx = 0
        while total < n:
            want = max(4, int((n - total) / 4.0) + 1)
            got = iterate_regenerations(cfg, want, seed=path_seed + 1000 * idx)
            for b in got:
                blocks.append(b)
                total += b.rho
            idx += 1
        per_path.append(blocks)
        all_blocks.extend(blocks)
    pooled = block_stat_from_blocks(all_blocks)
    m_hat, sigma2 = pooled.p_tilde, pooled.sigma2
    paths = np.empty((n_paths, len(t_grid)))
    for i, blocks in enumerate(per_path):
        counts = unit_counts(blocks)[: n + 1]
        s = np.concatenate([[0.0], np.cumsum(counts - m_hat)])
        for j, t in enumerate(t_grid):
            x = n * t
            paths[i, j] = np.interp(x, np.arange(len(s)), s) / math.sqrt(n * sigma2)
    reports = []
    i_end = len(t_grid) - 1
    var_end = paths[:, i_end].var(ddof=1) / t_grid[i_end]
    for j, t in enumerate(t_grid[:-1]):
        ratios = _jackknife_ratio(paths[:, j], paths[:, i_end])
        reports.append(se_bound_report(
            f"fclt-variance-ratio-t{t:g}", ratios[0], t / t_grid[i_end],
            ratios[1], n=n_paths))
    b_half = paths[:, t_grid.index(0.5)] if 0.5 in t_grid else paths[:, 0]
    b_end = paths[:, i_end]
    corr = float(np.corrcoef(b_half, b_end - b_half)[0, 1])
    thresh = 3.0 / math.sqrt(n_paths)
    reports.append(TestReport(
        name="fclt-increment-corr", statistic=corr,
        p_value=2.0 * scipy.stats.norm.sf(abs(corr) * math.sqrt(n_paths)),
        n=n_paths, passed=abs(corr) < thresh,
        detail=f"|corr| < {thresh:.4f}; var(B_1)/1 = {var_end:.3f}"))
    return np.array(t_grid), paths, reports


def _jackknife_ratio(x, y):
    """Jackknife mean and SE of var(x)/var(y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    full = x.var(ddof=1) / y.var(ddof=1)
    sx2, sy2 = x.var(ddof=1), y.var(ddof=1)
    mx, my = x.mean(), y.mean()
    loo = np.empty(n)
    for i in range(n):
        vx = (sx2 * (n - 1) - (x[i] - mx) ** 2 * n / (n - 1)) / (n - 2)
        vy = (sy2 * (n - 1) - (y[i] - my) ** 2 * n / (n - 1)) / (n - 2)
        loo[i] = vx / vy
    se = math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return full, se


# ---------------------------------------------------------------------------
# Coupling
# ---------------------------------------------------------------------------

def coupling_experiment(cfg, starts=None, n_runs=1000, extend_after=20.0,
                        seed=0, p=None):
    """Couple two differently-initialized processes on shared streams.

    Both initializations share the certified alpha0 = 0 (each must satisfy
    the start inequality for the configured envelope).  After the
    regeneration time the two paths must agree event for event; any
    disagreement is a hard failure.  Returns (reports, data dict).
    """
    if starts is None:
        env = cfg.env
        flipped = ZStart(signal=lambda t: env.f(t), signal_upper=lambda t: env.f(t),
                         signal_abs=lambda t: env.f(t), age0=0.0, alpha0=0.0)
        starts = (ZStart.atom(env), flipped)
    if starts[0].alpha0 != starts[1].alpha0:
        raise ConfigError("coupling requires a shared certified alpha0")
    p = p if p is not None else cfg.p
    t_vals = np.empty(n_runs)
    rho_vals = np.empty(n_runs)
    exact = 0
    for r in range(n_runs):
        pi = PrmStream(seed, stream=100_000 + 5 * r)
        pibar = PrmStream(seed, stream=100_000 + 5 * r + 1)
        tau_rng = spawn_rng(seed, r, 0xC0)
        out = run_system(cfg, pi, pibar, start=starts[0],
                         extra_starts=[starts[1]], tau_rng=tau_rng,
                         extend_after=extend_after)
        a, b = out.track_paths[0].times, out.track_paths[1].times
        post_a = a[a > out.rho]
        post_b = b[b > out.rho]
        if len(post_a) == len(post_b) and np.array_equal(post_a, post_b):
            exact += 1
        diff = np.setxor1d(a, b)
        t_vals[r] = diff.max() if len(diff) else 0.0
        rho_vals[r] = out.rho
    frac = exact / n_runs
    reports = [TestReport(
        name="coupling-exact-after-rho", statistic=frac, p_value=float("nan"),
        n=n_runs, passed=frac == 1.0,
        detail=f"{exact}/{n_runs} exact; max T = {t_vals.max():.4g}")]
    t_plus = np.maximum(t_vals - starts[0].alpha0, 0.0)
    bound_ok = bool(np.all(t_vals <= rho_vals + 1e-9))
    reports.append(TestReport(
        name="coupling-T-below-rho", statistic=float(np.max(t_vals - rho_vals)),
        p_value=float("nan"), n=n_runs, passed=bound_ok))
    h1 = float(np.mean(t_plus[: n_runs // 2] ** p))
    h2 = float(np.mean(t_plus ** p))
    rel = abs(h1 - h2) / max(h2, 1e-12)
    reports.append(TestReport(
        name="coupling-moment-stability", statistic=rel, p_value=float("nan"),
        n=n_runs, passed=rel <= 0.2,
        detail=f"p={p:g}: half={h1:.5g} full={h2:.5g}"))
    return reports, {"T": t_vals, "rho": rho_vals}


# ---------------------------------------------------------------------------
# Iterated-logarithm diagnostic (never a gate)
# ---------------------------------------------------------------------------

def lil_envelope(cfg, n_max=10**5, seed=0, n_jobs=1, eps=0.5):
    """Weak envelope diagnostic for the law of the iterated logarithm.

    Reports whether the running normalized sum stays within [-1-eps, 1+eps]
    and shows genuine excursions; informational only.
    """
    blocks = []
    total = 0.0
    idx = 0
    while total < n_max:
        got = iterate_regenerations(cfg, 2000, seed=derive_key(seed, 0x1117, idx) & 0x7FFFFFFF,
                                    n_jobs=n_jobs)
        for b in got:
            blocks.append(b)
            total += b.rho
        idx += 1
    stat = block_stat_from_blocks(blocks)
    counts = unit_counts(blocks)[: n_max]
    s = np.cumsum(counts - stat.p_tilde)
    n = np.arange(1, len(s) + 1, dtype=float)
    valid = n >= 8
    denom = np.sqrt(2.0 * stat.sigma2 * n[valid] * np.log(np.log(n[valid])))
    ratio = s[valid] / denom
    inside = bool(np.max(np.abs(ratio)) <= 1.0 + eps)
    excursion = bool(np.max(ratio) > 0.2) and bool(np.min(ratio) < -0.2)
    return [TestReport(
        name="lil-envelope", statistic=float(np.max(np.abs(ratio))),
        p_value=float("nan"), n=int(n_max), passed=inside and excursion,
        gating=False,
        detail=f"max|r|={np.max(np.abs(ratio)):.3f}, "
               f"range=({np.min(ratio):.3f},{np.max(ratio):.3f})")]


# ---------------------------------------------------------------------------
# Windowed functionals
# ---------------------------------------------------------------------------

def _warn_on_growth(t_fn, setup, growth):
    """Probe |T| against the variance growth condition; warn only."""
    msg = ("windowed functional grows faster than the setup's variance "
           "condition allows; sigma^2 may be infinite")
    cs = np.arange(1, 31)
    try:
        vals = np.abs([float(t_fn(int(c))) for c in cs])
    except OverflowError:
        warnings.warn(msg)
        return
    c_g = growth if growth is not None else 1.0
    if setup == "AD":
        ref = np.exp(c_g * cs)
    else:
        ref = (cs / (1.0 + np.log(cs))) ** c_g
    # calibrate the constant on small counts, then probe the tail
    scale = max(float(np.max(vals[:10] / ref[:10])), 1e-12)
    if np.any(vals[10:] > scale * ref[10:] * (1.0 + 1e-9)):
        warnings.warn(msg)


def windowed_functional(times, t_fn, m, n_units, setup=None, growth=None):
    """Exact unit integrals of s -> T(count of events in (s-m, s]).

    The integrand is piecewise constant between window entry/exit times, so
    each unit integral is a finite exact sum.  ``t_fn`` maps the window
    count to a real value.

    When ``setup``/``growth`` are given, the functional is probed against
    the growth condition that keeps the block variance finite (exponential
    in the count for the age-dependent setup, the stated power form
    otherwise); a violation only warns.
    """
    if setup is not None:
        _warn_on_growth(t_fn, setup, growth)
    times = np.asarray(times, dtype=float)
    out = np.empty(n_units)
    for k in range(1, n_units + 1):
        lo, hi = float(k - 1), float(k)
        cuts = {lo, hi}
        for u in times[(times > lo) & (times < hi)]:
            cuts.add(float(u))
        for u in times[(times + m > lo) & (times + m < hi)]:
            cuts.add(float(u + m))
        cuts = sorted(cuts)
        val = 0.0
        for b0, b1 in zip(cuts[:-1], cuts[1:]):
            s = 0.5 * (b0 + b1)
            cnt = int(np.searchsorted(times, s, side="right")
                      - np.searchsorted(times, s - m, side="right"))
            val += t_fn(cnt) * (b1 - b0)
        out[k - 1] = val
    return out
