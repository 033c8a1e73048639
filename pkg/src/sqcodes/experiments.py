"""Exact and Monte-Carlo experiments on squares of random codes.

Every Monte-Carlo trial draws from its own ``random.Random`` stream seeded
by a hash of (seed, trial index), so results do not depend on how trials are
split across workers.  Reports fold per-trial outcomes in index order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import partial
from itertools import product
from math import comb, sqrt
from typing import Callable

from . import __version__
from .codes import (
    LinearCode,
    SamplerModel,
    code_from_native,
    dual,
    ev_kernel_dim_native,
    min_distance,
    sample_generator,
    schur_product,
    square_dim_native,
    _native_rank,
)
from .errors import BudgetExceeded, DomainError, InputError
from .fq import field_new
from .quadforms import (
    QuadraticForm,
    coeff_index,
    n_monomials,
    zero_count_brute,
    zero_count_closed,
)

EXPECTATION_BUDGET = 1 << 22
DUAL_BUDGET = 1 << 20
SIGMAS = 4.0


# --- reports ----------------------------------------------------------------

@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    estimates: dict[str, tuple[float, float]] = field(default_factory=dict)
    tallies: dict[str, int] = field(default_factory=dict)
    bounds: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    elapsed: float = 0.0

    def to_dict(self, include_elapsed: bool = False) -> dict:
        d = {
            "experiment": self.experiment,
            "params": self.params,
            "estimates": {k: {"value": v, "se": se} for k, (v, se) in self.estimates.items()},
            "tallies": self.tallies,
            "bounds": self.bounds,
            "checks": self.checks,
            "version": __version__,
        }
        if include_elapsed:
            d["elapsed_s"] = round(self.elapsed, 3)
        return d

    def to_json(self, include_elapsed: bool = False) -> str:
        return json.dumps(self.to_dict(include_elapsed), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["kind,name,value,se"]
        for k in sorted(self.params):
            lines.append(f"param,{k},{self.params[k]},")
        for k in sorted(self.estimates):
            v, se = self.estimates[k]
            lines.append(f"estimate,{k},{v!r},{se!r}")
        for k in sorted(self.tallies):
            lines.append(f"tally,{k},{self.tallies[k]},")
        for k in sorted(self.bounds):
            lines.append(f"bound,{k},{self.bounds[k]!r},")
        for k in sorted(self.checks):
            lines.append(f"check,{k},{str(self.checks[k]).lower()},")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = [f"{self.experiment}: " + ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))]
        for k in sorted(self.estimates):
            v, se = self.estimates[k]
            out.append(f"  {k} = {v:.6g} +/- {se:.3g}")
        for k in sorted(self.bounds):
            out.append(f"  bound {k} = {self.bounds[k]:.6g}")
        for k in sorted(self.tallies, key=_tally_order):
            out.append(f"  [{k}] {self.tallies[k]}")
        for k in sorted(self.checks):
            out.append(f"  check {k}: {'pass' if self.checks[k] else 'FAIL'}")
        return "\n".join(out) + "\n"


def _tally_order(key: str):
    name, _, val = key.partition("=")
    return (name, 0, int(val), "") if val.lstrip("-").isdigit() else (name, 1, 0, val)


def bernoulli(hits: int, trials: int) -> tuple[float, float]:
    p = hits / trials
    return p, sqrt(p * (1 - p) / trials)


def mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mu = math.fsum(values) / n
    if n < 2:
        return mu, 0.0
    var = math.fsum((v - mu) ** 2 for v in values) / (n - 1)
    return mu, sqrt(var / n)


# --- trial plumbing -----------------------------------------------------------

def trial_seed(seed, index: int) -> int:
    h = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(h[:16], "big")


def worker_count() -> int:
    raw = os.environ.get("SQCODES_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise InputError(f"SQCODES_THREADS must be a positive integer, got {raw!r}") from None
    if w < 1:
        raise InputError(f"SQCODES_THREADS must be a positive integer, got {raw!r}")
    return w


def _run_chunk(fn: Callable, seed, lo: int, hi: int) -> list:
    import random

    return [fn(random.Random(trial_seed(seed, i))) for i in range(lo, hi)]


def run_trials(fn: Callable, trials: int, seed, workers: int | None = None) -> list:
    """fn(rng) for every trial index, results in index order.

    ``fn`` must be picklable when more than one worker is used.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    workers = worker_count() if workers is None else workers
    if workers <= 1 or trials < 2 * workers:
        return _run_chunk(fn, seed, 0, trials)
    bounds = [trials * w // workers for w in range(workers + 1)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_run_chunk, fn, seed, lo, hi) for lo, hi in zip(bounds, bounds[1:])]
        out = []
        for f in futs:
            out.extend(f.result())
    return out


def _check_params(q: int, k: int, n: int) -> None:
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if n < k:
        raise InputError(f"need n >= k, got n={n}, k={k}")
    field_new(q)


# --- exact expectation --------------------------------------------------------

@dataclass(frozen=True)
class ExactExpectation:
    q: int
    k: int
    m: int
    value: Fraction

    def decimal(self, digits: int = 30) -> str:
        with localcontext() as c:
            c.prec = digits
            d = Decimal(self.value.numerator) / Decimal(self.value.denominator)
        return format(d.normalize(), "f")

    def as_dict(self) -> dict:
        return {
            "q": self.q, "k": self.k, "m": self.m,
            "numerator": str(self.value.numerator), "denominator": str(self.value.denominator),
            "decimal": self.decimal(),
        }


def zero_diagonal_forms(q: int, k: int):
    """All forms with Q(e_i) = 0 for every i, i.e. a_ii = 0."""
    ctx = field_new(q)
    off = [coeff_index(i, j, k) for i in range(k) for j in range(i + 1, k)]
    m = n_monomials(k)
    for vals in product(range(q), repeat=len(off)):
        c = [0] * m
        for t, v in zip(off, vals):
            c[t] = v
        yield QuadraticForm(ctx, k, tuple(c))


def exact_expectation(q: int, k: int, zero_counter: str = "closed", max_enum: int = EXPECTATION_BUDGET) -> ExactExpectation:
    """E[X(m, k)] at n = m = k(k+1)/2 as an exact rational, by enumerating zero-diagonal forms."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    field_new(q)
    size = q ** (k * (k - 1) // 2)
    if size > max_enum:
        raise BudgetExceeded(f"{size} zero-diagonal forms exceed enumeration budget {max_enum}")
    count = {"closed": zero_count_closed, "brute": zero_count_brute}[zero_counter]
    m = n_monomials(k)
    hist = Counter(count(Q) for Q in zero_diagonal_forms(q, k))
    qk = q**k
    value = sum((Fraction(z, qk) ** (m - k) * c for z, c in hist.items()), Fraction(0))
    return ExactExpectation(q, k, m, value)


# --- per-trial kernels (module level so they pickle) ------------------------

def _kernel_trial(q: int, k: int, n: int, model: str, rng) -> int:
    ctx = field_new(q)
    rows = sample_generator(ctx, n, k, SamplerModel(model), rng)
    return ev_kernel_dim_native(ctx, rows, n)


def _square_trial(q: int, k: int, n: int, model: str, rng) -> tuple[int, int, int]:
    """(dim C, dim C^{*2}, dim ker ev_C) for one sampled generator."""
    ctx = field_new(q)
    rows = sample_generator(ctx, n, k, SamplerModel(model), rng)
    return _native_rank(ctx, rows, n), square_dim_native(ctx, rows, n), ev_kernel_dim_native(ctx, rows, n)


def _dual_trial(q: int, k: int, n: int, model: str, max_enum: int, rng) -> tuple[int, int | None]:
    ctx = field_new(q)
    rows = sample_generator(ctx, n, k, SamplerModel(model), rng)
    C = code_from_native(ctx, rows, n)
    S = schur_product(C, C)
    if S.k == n:
        return S.k, None
    return S.k, min_distance(dual(S), max_enum=max_enum)


def _square_checks(results: list[tuple[int, int, int]], k: int, n: int) -> dict[str, bool]:
    m = n_monomials(k)
    return {
        "square_dim_le_min_n_m": all(s <= min(n, m) for _, s, _ in results),
        "ev_kernel_consistent": all(s == m - e for _, s, e in results),
    }


# --- Monte-Carlo experiments ------------------------------------------------

def mc_kernel_size(q: int, k: int, n: int, model: str = "systematic", trials: int = 1000, seed: int = 0,
                   exact_budget: int = 1 << 16) -> ExperimentReport:
    """Sample |ker ev_C| = q^{dim ker}; at n = k(k+1)/2 compare against the exact expectation."""
    _check_params(q, k, n)
    model = SamplerModel(model).value
    t0 = time.perf_counter()
    dims = run_trials(partial(_kernel_trial, q, k, n, model), trials, seed)
    sizes = [float(q**d) for d in dims]
    rep = ExperimentReport(
        "mc-kernel",
        {"q": q, "k": k, "n": n, "model": model, "trials": trials, "seed": seed},
        estimates={"mean_X": mean_se(sizes), "mean_kernel_dim": mean_se([float(d) for d in dims])},
        tallies={f"kernel_dim={d}": c for d, c in sorted(Counter(dims).items())},
    )
    if n == n_monomials(k) and q ** (k * (k - 1) // 2) <= exact_budget:
        E = exact_expectation(q, k)
        mu, se = rep.estimates["mean_X"]
        rep.bounds["exact_expectation"] = float(E.value)
        rep.checks["mean_within_4sigma"] = abs(mu - float(E.value)) <= SIGMAS * se + 1e-12
    rep.elapsed = time.perf_counter() - t0
    return rep


def mc_square_full(q: int, k: int, n: int, model: str = "systematic", trials: int = 1000, seed: int = 0) -> ExperimentReport:
    """Fraction of trials whose square is all of F_q^n, with the full codimension histogram."""
    _check_params(q, k, n)
    model = SamplerModel(model).value
    t0 = time.perf_counter()
    res = run_trials(partial(_square_trial, q, k, n, model), trials, seed)
    codims = [n - s for _, s, _ in res]
    hist = Counter(codims)
    est = {"p0": bernoulli(hist.get(0, 0), trials), "mean_codim": mean_se([float(c) for c in codims])}
    for l in (1, 2):
        est[f"p{l}"] = bernoulli(sum(c for d, c in hist.items() if d <= l), trials)
    rep = ExperimentReport(
        "mc-square",
        {"q": q, "k": k, "n": n, "model": model, "trials": trials, "seed": seed},
        estimates=est,
        tallies={f"codim={d}": c for d, c in sorted(hist.items())},
        checks=_square_checks(res, k, n),
    )
    rep.elapsed = time.perf_counter() - t0
    return rep


def square_full_bound(q: int, s: int, expectation: float) -> float:
    """1 - ((2q-1)/q^2)^s (E - 1): lower bound on Pr(dim C^{*2} = k(k+1)/2) at n = k(k+1)/2 + s."""
    return 1.0 - ((2 * q - 1) / q**2) ** s * (expectation - 1.0)


def mc_dim_at_large_n(q: int, k: int, s: int, trials: int = 1000, seed: int = 0, model: str = "systematic",
                      max_enum: int = 1 << 16) -> ExperimentReport:
    """Pr(dim C^{*2} = k(k+1)/2) at n = k(k+1)/2 + s against the analytic lower bound.

    E[X] is exact when the zero-diagonal forms fit in ``max_enum``; otherwise
    a Monte-Carlo kernel mean plus 4 standard errors stands in for it.
    """
    if s < 0:
        raise InputError(f"s must be >= 0, got {s}")
    m = n_monomials(k)
    n = m + s
    _check_params(q, k, n)
    model = SamplerModel(model).value
    t0 = time.perf_counter()
    res = run_trials(partial(_square_trial, q, k, n, model), trials, seed)
    hits = sum(1 for _, d, _ in res if d == m)
    p, se = bernoulli(hits, trials)
    params = {"q": q, "k": k, "s": s, "n": n, "model": model, "trials": trials, "seed": seed}
    if q ** (k * (k - 1) // 2) <= max_enum:
        E = float(exact_expectation(q, k, max_enum=max_enum).value)
        params["expectation_source"] = "exact"
    else:
        kern = mc_kernel_size(q, k, m, model, trials, f"{seed}/kernel")
        mu, kse = kern.estimates["mean_X"]
        E = mu + SIGMAS * kse
        params["expectation_source"] = "monte_carlo"
    bound = square_full_bound(q, s, E)
    rep = ExperimentReport(
        "mc-dim-large-n",
        params,
        estimates={"p_full": (p, se)},
        tallies={f"dim={d}": c for d, c in sorted(Counter(d for _, d, _ in res).items())},
        bounds={"expectation": E, "analytic_lower_bound": bound},
        checks={"p_full_ge_bound_4sigma": p >= bound - SIGMAS * se, **_square_checks(res, k, n)},
    )
    rep.elapsed = time.perf_counter() - t0
    return rep


def mc_dual_distance(q: int, k: int, trials: int = 200, seed: int = 0, n: int | None = None, delta: float = 0.1,
                     model: str = "systematic", max_enum: int = DUAL_BUDGET) -> ExperimentReport:
    """Distribution of d_min of the dual of C^{*2}; "inf" marks a trivial dual."""
    n = n_monomials(k) if n is None else n
    _check_params(q, k, n)
    if not 0 < delta < 1:
        raise InputError(f"delta must lie in (0, 1), got {delta}")
    model = SamplerModel(model).value
    t0 = time.perf_counter()
    res = run_trials(partial(_dual_trial, q, k, n, model, max_enum), trials, seed)
    ds = [d for _, d in res]
    finite = [d for d in ds if d is not None]
    cut = math.floor(delta * n)
    est = {
        "frac_trivial_dual": bernoulli(len(ds) - len(finite), trials),
        "frac_d_le_2": bernoulli(sum(1 for d in finite if d <= 2), trials),
        "frac_d_le_delta_n": bernoulli(sum(1 for d in finite if d <= cut), trials),
    }
    if finite:
        est["mean_finite_d"] = mean_se([float(d) for d in finite])
    rep = ExperimentReport(
        "mc-dual",
        {"q": q, "k": k, "n": n, "model": model, "trials": trials, "seed": seed, "delta": delta},
        estimates=est,
        tallies={f"d={'inf' if d is None else d}": c for d, c in Counter(ds).items()},
        bounds={"delta_n": float(cut)},
    )
    rep.tallies = dict(sorted(rep.tallies.items(), key=lambda kv: _tally_order(kv[0])))
    rep.elapsed = time.perf_counter() - t0
    return rep


def mc_model_compare(q: int, k: int, n: int, trials: int = 1000, seed: int = 0) -> ExperimentReport:
    """p0 under the systematic, raw-matrix and uniform models, plus the rank-deficiency bound."""
    _check_params(q, k, n)
    t0 = time.perf_counter()
    runs = {}
    for model in SamplerModel:
        runs[model.value] = run_trials(partial(_square_trial, q, k, n, model.value), trials, f"{seed}/{model.value}")
    est, tallies = {}, {}
    for name, res in runs.items():
        est[f"p0_{name}"] = bernoulli(sum(1 for _, s, _ in res if s == n), trials)
        tallies.update({f"{name}_dim_code={d}": c for d, c in sorted(Counter(r for r, _, _ in res).items())})
    A = runs[SamplerModel.MatrixA.value]
    deficient = [r < k for r, _, _ in A]
    p_def, se_def = bernoulli(sum(deficient), trials)
    est["p_rank_deficient_matrix"] = (p_def, se_def)
    # gap = p0_U - (p0_A - Pr_A(dim < k)); per-trial Y = 1[P] - 1[dim < k] keeps the A-side covariance
    Y = [float(s == n) - float(d) for (_, s, _), d in zip(A, deficient)]
    y_mu, y_se = mean_se(Y)
    pU, seU = est[f"p0_{SamplerModel.UniformU.value}"]
    gap_se = sqrt(seU**2 + y_se**2)
    est["model_gap"] = (pU - y_mu, gap_se)
    rank_bound = float(q) ** -(n - k)
    checks = {
        "rank_deficiency_bound_4sigma": p_def <= rank_bound + SIGMAS * se_def,
        "model_inequality_4sigma": pU - y_mu >= -SIGMAS * gap_se,
        "systematic_full_rank": all(r == k for r, _, _ in runs[SamplerModel.SystematicC.value]),
    }
    for res in runs.values():
        for key, ok in _square_checks(res, k, n).items():
            checks[key] = checks.get(key, True) and ok
    rep = ExperimentReport(
        "mc-models",
        {"q": q, "k": k, "n": n, "trials": trials, "seed": seed},
        estimates=est,
        tallies=tallies,
        bounds={"rank_deficiency_bound": rank_bound},
        checks=checks,
    )
    rep.elapsed = time.perf_counter() - t0
    return rep


def mc_distinguish_random(q: int, n: int, k: int, trials: int = 200, seed: int = 0, threshold: int = 1,
                          model: str = "systematic") -> ExperimentReport:
    """Run the square-dimension distinguisher on random codes; reports the fraction flagged typical."""
    _check_params(q, k, n)
    model = SamplerModel(model).value
    t0 = time.perf_counter()
    res = run_trials(partial(_square_trial, q, k, n, model), trials, seed)
    expected = min(n, n_monomials(k))
    defs = [expected - s for _, s, _ in res]
    rep = ExperimentReport(
        "mc-distinguish",
        {"q": q, "k": k, "n": n, "model": model, "trials": trials, "seed": seed, "threshold": threshold},
        estimates={"frac_typical": bernoulli(sum(1 for d in defs if d < threshold), trials)},
        tallies={f"deficiency={d}": c for d, c in sorted(Counter(defs).items())},
        checks=_square_checks(res, k, n),
    )
    rep.elapsed = time.perf_counter() - t0
    return rep


# --- entropy and volumes ------------------------------------------------------

def entropy_hq(q: int, x: float) -> float:
    """q-ary entropy H_q(x) for 0 < x <= 1 - 1/q."""
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    if not 0 < x <= 1 - 1 / q:
        raise DomainError(f"x = {x} outside (0, 1 - 1/q]")
    lq = math.log(q)
    h = x * math.log(q - 1) - x * math.log(x)
    if x < 1:
        h -= (1 - x) * math.log(1 - x)
    return h / lq


def hamming_ball_volume(n: int, r: int, q: int) -> int:
    """Exact number of words of F_q^n within Hamming distance r of a fixed word."""
    return sum(comb(n, i) * (q - 1) ** i for i in range(min(r, n) + 1))
