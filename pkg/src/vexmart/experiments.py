"""Empirical verification harness: inequality ratio estimation on random
instances, the two quantitative counterexamples, and seeded generators.

All randomness flows through ``random.Random`` seeded with strings, which
hashes platform-independently, so identical configs reproduce identical
instances everywhere.  Per-trial seeds are derived from (master seed, trial
index), making trials order-independent.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericalError, ResourceError, ValidationError
from .bmo import bmo_norm, candidate_matrix
from .martingale import (
    Martingale,
    martingale_from_terminal,
    maximal,
    stopped_terminal_diffs,
)
from .space import (
    Exponent,
    FilteredSpace,
    as_leaf_values,
    build_dyadic_space,
    build_mary_space,
    condition_k,
    constant_exponent,
    validate_filtration,
)
from .varlp import luxemburg_norm, modular, norm_batch

ASSERT_SLACK = 1e-9
EXPONENT_LAWS = ("constant", "two-block", "iid-uniform", "block-structured")
MARTINGALE_LAWS = ("normal", "uniform", "two-point")


def _rng(*parts) -> random.Random:
    return random.Random("vexmart:" + ":".join(str(x) for x in parts))


@dataclass(frozen=True)
class TrialConfig:
    space: FilteredSpace
    seed: int = 0
    trials: int = 100
    p_range: tuple[float, float] = (1.1, 3.0)
    exponent_law: str = "iid-uniform"
    martingale_law: str = "normal"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        lo, hi = self.p_range
        if not (0 < lo <= hi):
            raise ValidationError(f"invalid exponent range {self.p_range}")
        if self.exponent_law not in EXPONENT_LAWS:
            raise ValidationError(f"unknown exponent law {self.exponent_law!r}")
        if self.martingale_law not in MARTINGALE_LAWS:
            raise ValidationError(
                f"unknown martingale law {self.martingale_law!r}"
            )


@dataclass(frozen=True)
class ConstantReport:
    name: str
    ratios: tuple[float, ...]
    max_ratio: float
    mean_ratio: float
    quantiles: dict[str, float]
    witness: dict | None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ratios": list(self.ratios),
            "max": self.max_ratio,
            "mean": self.mean_ratio,
            "quantiles": dict(self.quantiles),
            "witness": self.witness,
            "details": self.details,
        }


def _report(
    name: str,
    ratios: Sequence[float],
    witness: dict | None,
    details: dict | None = None,
) -> ConstantReport:
    r = [float(x) for x in ratios]
    if r:
        arr = np.array(r)
        quantiles = {
            "q50": float(np.quantile(arr, 0.5)),
            "q90": float(np.quantile(arr, 0.9)),
            "q100": float(arr.max()),
        }
        mx, mean = float(arr.max()), float(arr.mean())
    else:
        quantiles, mx, mean = {}, 0.0, 0.0
    return ConstantReport(
        name, tuple(r), mx, mean, quantiles, witness, details or {}
    )


def generate_exponent(
    space: FilteredSpace,
    law: str,
    p_range: tuple[float, float],
    seed: int = 0,
) -> Exponent:
    lo, hi = p_range
    rng = _rng("exponent", law, lo, hi, seed)
    n = space.n_leaves
    if law == "constant":
        vals = [0.5 * (lo + hi)] * n
    elif law == "two-block":
        half = max(1, n // 2)
        vals = [lo] * half + [hi] * (n - half)
    elif law == "iid-uniform":
        vals = [rng.uniform(lo, hi) for _ in range(n)]
    elif law == "block-structured":
        level = min(1, space.depth)
        vals = [0.0] * n
        for block in space.levels[level]:
            v = rng.uniform(lo, hi)
            for leaf in block:
                vals[leaf] = v
    else:
        raise DomainError(f"unknown exponent law {law!r}")
    return Exponent(tuple(vals))


def generate_martingale(config: TrialConfig, index: int = 0) -> Martingale:
    """Terminal values drawn per the config law, then centered on each F_0
    block so f_0 = 0."""
    space = config.space
    rng = _rng("martingale", config.martingale_law, config.seed, index)
    if config.martingale_law == "normal":
        v = np.array([rng.gauss(0.0, 1.0) for _ in range(space.n_leaves)])
    elif config.martingale_law == "uniform":
        v = np.array([rng.uniform(-1.0, 1.0) for _ in range(space.n_leaves)])
    else:
        v = np.array([rng.choice((-1.0, 1.0)) for _ in range(space.n_leaves)])
    v = v - space.block_average(v, 0)
    return martingale_from_terminal(space, v)


def default_lambda_grid(f: Martingale) -> tuple[float, ...]:
    """Distinct positive values of Mf (the only levels where the weak-type
    ratio changes) plus midpoints, plus half the smallest."""
    vals = np.unique(maximal(f))
    vals = vals[vals > 0]
    if vals.size == 0:
        return ()
    grid = [0.5 * float(vals[0])]
    for i, v in enumerate(vals):
        grid.append(float(v))
        if i + 1 < vals.size:
            grid.append(0.5 * float(v + vals[i + 1]))
    return tuple(grid)


def weak_type_check(
    f: Martingale,
    p: Exponent,
    lambda_grid: Sequence[float] | None = None,
) -> ConstantReport:
    """Per lambda: P(Mf > lambda) / rho(f_N / lambda) against the
    proof-chain constant p_+(A)/p_-(A), A = {Mf > lambda}.

    The constant is proved through Young's inequality, which needs p >= 1
    on A; the bound is asserted exactly there and only reported elsewhere.
    """
    space = f.space
    grid = default_lambda_grid(f) if lambda_grid is None else tuple(lambda_grid)
    for lam in grid:
        if lam <= 0:
            raise DomainError("lambda grid must be positive")
    mf = maximal(f)
    ratios, bounds, asserted = [], [], []
    witness = None
    best = -1.0
    for lam in grid:
        a_mask = mf > lam
        pa = float(space.probs[a_mask].sum())
        if pa == 0.0:
            ratios.append(0.0)
            bounds.append(1.0)
            asserted.append(False)
            continue
        rho = modular(space, f.terminal, p, lam)
        ratio = pa / rho
        idx = np.nonzero(a_mask)[0]
        bound = p.p_plus(idx) / p.p_minus(idx)
        check = p.p_minus(idx) >= 1.0
        if check and ratio > bound + ASSERT_SLACK:
            raise NumericalError(
                f"weak-type ratio {ratio} exceeds proof-chain constant "
                f"{bound} at lambda={lam}"
            )
        ratios.append(ratio)
        bounds.append(bound)
        asserted.append(check)
        if ratio > best:
            best = ratio
            witness = {
                "lambda": lam,
                "ratio": ratio,
                "bound": bound,
                "terminal": [float(x) for x in f.terminal],
                "exponent": list(p.values),
            }
    return _report(
        "weak-type proof-chain constant",
        ratios,
        witness,
        {"lambda_grid": list(grid), "bounds": bounds, "asserted": asserted},
    )


def doob_strong_check(config: TrialConfig, p: Exponent) -> ConstantReport:
    """Per trial: ||Mf||_{p(.)} / ||f_N||_{p(.)}, with a per-ratio scale
    invariance check (f -> 10f agrees to 1e-6 relative)."""
    if p.p_minus() <= 1.0:
        raise DomainError("maximal-norm ratio requires p_- > 1")
    space = config.space
    ratios = []
    witness = None
    best = -1.0
    skips = 0
    for i in range(config.trials):
        f = generate_martingale(config, i)
        den = luxemburg_norm(space, f.terminal, p).norm
        if den == 0.0:
            skips += 1
            continue
        num = luxemburg_norm(space, maximal(f), p).norm
        ratio = num / den
        g = f.scaled(10.0)
        den10 = luxemburg_norm(space, g.terminal, p).norm
        ratio10 = luxemburg_norm(space, maximal(g), p).norm / den10
        if abs(ratio10 - ratio) > 1e-6 * ratio:
            raise NumericalError(
                f"maximal-norm ratio not scale invariant: {ratio} vs {ratio10}"
            )
        ratios.append(ratio)
        if ratio > best:
            best = ratio
            witness = {
                "trial": i,
                "ratio": ratio,
                "terminal": [float(x) for x in f.terminal],
                "exponent": list(p.values),
            }
    k = condition_k(space, p)
    return _report(
        "maximal-norm ratio envelope",
        ratios,
        witness,
        {"skips": skips, "condition_k": k.k},
    )


def lemma34_check(
    f: Sequence[float], p: Exponent, space: FilteredSpace
) -> ConstantReport:
    """Pointwise block-average inequality with K = condition_k:
    (avg_B |f|)^{p(x)/p_-} <= K * (avg_B |f|^{p(x)/p_-} + 1) for every
    filtration block B and leaf x in B, after rescaling to ||f|| <= 1/2."""
    fv = np.abs(as_leaf_values(space, f))
    norm = luxemburg_norm(space, fv, p).norm
    scale = 1.0
    if norm > 0.5:
        scale = 0.5 / norm
        fv = fv * scale
    k = condition_k(space, p).k
    e = p.vals / p.p_minus()
    probs = space.probs
    ratios = []
    witness = None
    best = -1.0
    for n in range(space.depth + 1):
        av = space.block_average(fv, n)
        lhs = av**e
        # avg over the block of x of |f|^{e_x}: the exponent tracks the
        # evaluation point, not the integration variable
        powers = fv[None, :] ** e[:, None]
        weighted = powers * probs[None, :]
        bo = space.block_of[n]
        for x in range(space.n_leaves):
            block = space.levels[n][bo[x]]
            avg_x = float(weighted[x, list(block)].sum()) / float(
                space.block_probs[n][bo[x]]
            )
            rhs = k * (avg_x + 1.0)
            ratio = lhs[x] / rhs
            ratios.append(ratio)
            if ratio > best:
                best = ratio
                witness = {"level": n, "leaf": x, "ratio": ratio}
    if best > 1.0 + ASSERT_SLACK:
        raise NumericalError(
            f"pointwise block-average inequality violated: max ratio {best}"
        )
    return _report(
        "block-average pointwise inequality",
        ratios,
        witness,
        {"condition_k": k, "rescale": scale},
    )


def jn_equivalence(config: TrialConfig, p: Exponent) -> ConstantReport:
    """Two-sided envelope of bmo_norm(f, p) / bmo_norm(f, 1) over random
    martingales, both norms taken exhaustively."""
    if p.p_minus() < 1.0:
        raise DomainError("BMO norm equivalence requires p_- >= 1")
    space = config.space
    one = constant_exponent(space, 1.0)
    ratios = []
    witness = None
    best = -1.0
    skips = 0
    for i in range(config.trials):
        f = generate_martingale(config, i)
        b1 = bmo_norm(f, one, mode="exhaustive").value
        bp = bmo_norm(f, p, mode="exhaustive").value
        if b1 == 0.0 or bp == 0.0:
            skips += 1
            continue
        ratio = bp / b1
        ratios.append(ratio)
        if ratio > best:
            best = ratio
            witness = {
                "trial": i,
                "ratio": ratio,
                "terminal": [float(x) for x in f.terminal],
                "exponent": list(p.values),
            }
    arr = np.array(ratios) if ratios else np.array([])
    details = {
        "skips": skips,
        "upper_envelope": float(arr.max()) if arr.size else 0.0,
        "lower_envelope": float((1.0 / arr).max()) if arr.size else 0.0,
    }
    return _report("BMO norm equivalence ratio", ratios, witness, details)


def _t_grid_from_diffs(diffs: np.ndarray, max_points: int = 64) -> tuple[float, ...]:
    vals = np.unique(diffs[diffs > 0])
    if vals.size == 0:
        return (0.0,)
    grid = [0.0]
    for i, v in enumerate(vals):
        grid.append(float(v))
        if i + 1 < vals.size:
            grid.append(0.5 * float(v + vals[i + 1]))
    grid.append(1.25 * float(vals[-1]))
    if len(grid) > max_points:
        idx = np.linspace(0, len(grid) - 1, max_points).astype(int)
        grid = [grid[j] for j in np.unique(idx)]
    return tuple(grid)


def exp_jn_curve(
    f: Martingale,
    p: Exponent,
    t_grid: Sequence[float] | None = None,
    cap: int | None = None,
) -> ConstantReport:
    """Exponential decay of ||chi_{tau<inf, f - f_{tau-1} >= t}||_{p(.)} /
    ||chi_{tau<inf}||_{p(.)} in t, over the exhaustively enumerated stopping
    times.

    Asserts the envelope curve is nonincreasing, fits (C1, C2) by log-linear
    regression with C2 > 0, and checks the explicit construction C1 = 4,
    C2 = ln2 / (2*C_hat) pointwise, where C_hat is the measured constant of
    the moment chain sup_r ||f||_{BMO_{r p(.)}} / ||f||_{BMO_1} over the r
    values the construction actually uses (a fixed point, since r depends on
    C_hat through r = t / (2 * C_hat * ||f||_{BMO_1}))."""
    space = f.space
    one = constant_exponent(space, 1.0)
    b1 = bmo_norm(f, one, mode="exhaustive").value
    if b1 == 0.0:
        raise DomainError("exponential decay curve requires a nonzero BMO_1 norm")
    kwargs = {} if cap is None else {"cap": cap}
    taus, _ = candidate_matrix(space, "exhaustive", **kwargs)
    finite = np.isfinite(taus)
    keep = finite.any(axis=1)
    taus, finite = taus[keep], finite[keep]
    diffs = stopped_terminal_diffs(f, taus, shift="minus-one")
    probs = space.probs
    dens = norm_batch(probs, p.vals, finite.astype(float))

    grid = (
        _t_grid_from_diffs(np.where(finite, diffs, -np.inf))
        if t_grid is None
        else tuple(float(t) for t in t_grid)
    )

    cache: dict[float, float] = {}

    def moment_ratio(r: float) -> float:
        if r not in cache:
            pv = p.vals * r
            nums = norm_batch(probs, pv, np.where(finite, np.abs(diffs), 0.0))
            dn = norm_batch(probs, pv, finite.astype(float))
            cache[r] = float(np.max(nums / dn)) / b1
        return cache[r]

    # fixed point for C_hat: the r values used depend on C_hat and vice
    # versa; the iteration is monotone nondecreasing and verified after
    c_hat = max(moment_ratio(1.0), 1e-12)
    for _ in range(60):
        c0 = c_hat * b1
        rs = [t / (2.0 * c0) for t in grid if t >= 2.0 * c0]
        new = max((moment_ratio(r) for r in rs), default=c_hat)
        if new <= c_hat * (1.0 + 1e-12):
            break
        c_hat = new
    c0 = c_hat * b1
    for t in grid:
        if t >= 2.0 * c0:
            r = t / (2.0 * c0)
            if moment_ratio(r) > c_hat * (1.0 + ASSERT_SLACK):
                raise NumericalError(
                    "moment-chain constant fixed point failed to stabilize"
                )
    c2 = math.log(2.0) / (2.0 * c_hat)

    envelope = []
    for t in grid:
        mask = finite & (diffs >= t)
        lhs = norm_batch(probs, p.vals, mask.astype(float))
        bound = 4.0 * math.exp(-c2 * t / b1) * dens
        bad = lhs > bound + ASSERT_SLACK * max(1.0, float(dens.max()))
        if np.any(bad):
            j = int(np.argmax(lhs - bound))
            raise NumericalError(
                f"decay bound violated at t={t}: level norm {lhs[j]} > "
                f"bound {bound[j]}"
            )
        envelope.append(float(np.max(lhs / dens)))

    for a, b in zip(envelope, envelope[1:]):
        if b > a + 1e-12:
            raise NumericalError("decay curve is not nonincreasing")

    pos = [(t, y) for t, y in zip(grid, envelope) if y > 0 and t > 0]
    fit = None
    if len(pos) >= 2 and len({y for _, y in pos}) >= 2:
        xs = np.array([t / b1 for t, _ in pos])
        ys = np.log(np.array([y for _, y in pos]))
        slope, intercept = np.polyfit(xs, ys, 1)
        fit = {"C1": float(math.exp(intercept)), "C2": float(-slope)}
        # a curve flat up to round-off fits an arbitrarily-signed tiny
        # slope; only a genuine decay pins the sign
        if ys.max() - ys.min() > 1e-9 and fit["C2"] <= 0:
            raise NumericalError(
                f"fitted decay rate is not positive: {fit['C2']}"
            )
    witness = {
        "t_max_positive": pos[-1][0] if pos else 0.0,
        "ratio": envelope[0] if envelope else 0.0,
        "bmo1": b1,
    }
    return _report(
        "exponential decay envelope",
        envelope,
        witness,
        {
            "curve": [[t, y] for t, y in zip(grid, envelope)],
            "fit": fit,
            "proof_constants": {"C1": 4.0, "C2": c2, "C_hat": c_hat},
            "bmo1": b1,
            "stopping_times": int(taus.shape[0]),
        },
    )


NS_DEPTH_CAP = 1 << 20


def _ns_h(depth: int) -> np.ndarray:
    """h_m for m = 1..depth on the dyadic counterexample: partial sums of
    1/ln(2^n e) minus the next term."""
    n = np.arange(1, depth + 1)
    inv = 1.0 / (n * math.log(2.0) + 1.0)
    next_inv = 1.0 / ((n + 1) * math.log(2.0) + 1.0)
    return np.cumsum(inv) - next_inv


def nakai_sadasue(max_n: int) -> ConstantReport:
    """The dyadic counterexample exponent g = sin(h): verifies
    P(B_N)^{g_-(B_N) - g_+(B_N)} >= 2^{N/2} for N = 1..max_n and the
    increment bounds 0 < h_{m+1} - h_m <= 2/((m+1) ln2).

    B_m is the leftmost dyadic interval of measure 2^-m; g is constant
    sin(h_m) on the ring B_m \\ B_{m+1}, so the computation runs on the ring
    index m directly and never materializes 2^D leaves.  The depth D is
    grown adaptively until every N <= max_n has sine-window witnesses
    (some ring with sin >= 1/2 and one with sin <= 0); rings inside the
    unresolved tail B_D are excluded, so every reported spread is a
    certified lower bound."""
    if max_n < 1:
        raise ValidationError("max_n must be >= 1")
    if max_n > 30:
        raise DomainError("max_n is capped at 30")

    depth = 4 * max_n + 64
    while True:
        h = _ns_h(depth)
        sines = np.sin(h)
        window = sines[max_n - 1 :]
        if window.max() >= 0.5 and window.min() <= 0.0:
            break
        if depth >= NS_DEPTH_CAP:
            raise ResourceError(
                f"no sine-window witnesses for N={max_n} up to ring depth "
                f"{depth}; partial spread {window.max() - window.min():.6f}"
            )
        depth *= 2

    inc = np.diff(h)
    m = np.arange(1, depth)
    inc_bound = 2.0 / ((m + 1) * math.log(2.0))
    if not (np.all(inc > 0) and np.all(inc <= inc_bound)):
        raise NumericalError("h increment bounds violated")

    # suffix extrema of sin(h_m) over rings m >= N give g_+/g_- on B_N
    suf_max = np.maximum.accumulate(sines[::-1])[::-1]
    suf_min = np.minimum.accumulate(sines[::-1])[::-1]
    ratios = []
    witness = None
    for big_n in range(1, max_n + 1):
        spread = float(suf_max[big_n - 1] - suf_min[big_n - 1])
        ratio = 2.0 ** (big_n * (spread - 0.5))
        if spread < 0.5:
            raise NumericalError(
                f"resolved spread {spread} at N={big_n} below 1/2"
            )
        ratios.append(ratio)
        if big_n == max_n:
            witness = {
                "N": big_n,
                "spread": spread,
                "ratio_vs_2_pow_half_N": ratio,
                "y_ring": int(big_n - 1 + np.argmax(sines[big_n - 1 :]) + 1),
                "z_ring": int(big_n - 1 + np.argmin(sines[big_n - 1 :]) + 1),
            }
    return _report(
        "dyadic counterexample margin",
        ratios,
        witness,
        {
            "depth": depth,
            "h1": float(h[0]),
            "excluded_tail_measure": 2.0**-depth,
            "max_increment_bound": float(inc_bound[0]),
        },
    )


def _jensen_ratio(
    space: FilteredSpace, f: Sequence[float], p: Exponent
) -> tuple[float, dict]:
    """max over levels n and leaves w of |E(f|F_n)(w)|^{p(w)} /
    E(|f|^{p(.)}|F_n)(w)."""
    fv = as_leaf_values(space, f)
    best, info = 0.0, {}
    for n in range(space.depth + 1):
        num = np.abs(space.block_average(fv, n)) ** p.vals
        den = space.block_average(np.abs(fv) ** p.vals, n)
        ok = den > 0
        if not np.any(ok):
            continue
        ratio = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
        j = int(np.argmax(ratio))
        if ratio[j] > best:
            best = float(ratio[j])
            info = {"level": n, "leaf": j}
    return best, info


def violation_33_search(config: TrialConfig) -> ConstantReport:
    """Maximum pointwise Jensen-gap ratio over random instances plus the
    deterministic scaling family f_c = (c, 0) on the uniform 2-leaf space
    with p = (1, 2), whose ratio is exactly c/2 — no uniform constant can
    bound the variable-exponent conditional Jensen inequality."""
    two = validate_filtration([[[0, 1]], [[0], [1]]], [0.5, 0.5])
    p12 = Exponent((1.0, 2.0))
    ratios = []
    family = []
    witness = None
    best = -1.0
    for c in (8.0, 100.0, 1e4):
        ratio, info = _jensen_ratio(two, (c, 0.0), p12)
        ratios.append(ratio)
        family.append({"c": c, "ratio": ratio})
        if ratio > best:
            best = ratio
            witness = {"kind": "deterministic", "c": c, "ratio": ratio, **info}
    space = config.space
    for i in range(config.trials):
        rng = _rng("violation", config.seed, i)
        fv = [rng.gauss(0.0, 1.0) for _ in range(space.n_leaves)]
        p = generate_exponent(
            space, config.exponent_law, config.p_range, seed=config.seed * 7919 + i
        )
        ratio, info = _jensen_ratio(space, fv, p)
        ratios.append(ratio)
        if ratio > best:
            best = ratio
            witness = {
                "kind": "random",
                "trial": i,
                "ratio": ratio,
                "f": [float(x) for x in fv],
                "exponent": list(p.values),
                **info,
            }
    return _report(
        "conditional Jensen gap",
        ratios,
        witness,
        {"deterministic_family": family},
    )


def default_test_matrix(seed: int = 0):
    """(label, space, exponent) triples covering dyadic depths 1-6, one
    3-ary space, and the constant / two-block / iid-uniform exponent
    families."""
    spaces = [(f"dyadic-{d}", build_dyadic_space(d)) for d in range(1, 7)]
    spaces.append(("3ary-2", build_mary_space(3, 2)))
    out = []
    for name, space in spaces:
        for law in ("constant", "two-block", "iid-uniform"):
            p = generate_exponent(space, law, (1.1, 3.0), seed=seed)
            out.append((f"{name}/{law}", space, p))
    return out
