"""BMO and Lipschitz norms as suprema over stopping times.

Both norms scan a family of stopping times: the full (exhaustively
enumerated) family when its size fits under the cap, otherwise a seeded
sample that always contains tau = 0, tau = infinity and every constant-level
tau = n.  Sampled values are lower bounds of the true supremum and the mode
is reported so callers can pin exhaustive results only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .martingale import (
    INF,
    ENUMERATION_CAP,
    Martingale,
    StoppingTime,
    count_stopping_times,
    enumerate_stopping_matrix,
    martingale_from_terminal,
    sample_stopping_times,
    stopped_terminal_diffs,
)
from .space import Exponent, FilteredSpace, as_leaf_values
from .varlp import luxemburg_norm, norm_batch
from .hardy import hs_norm


@dataclass(frozen=True)
class SupNormResult:
    value: float
    argmax_tau: StoppingTime | None
    mode: str  # "exhaustive" | "sampled"
    candidates: int


def candidate_matrix(
    space: FilteredSpace,
    mode: str = "auto",
    cap: int = ENUMERATION_CAP,
    seed: int = 0,
    samples: int = 256,
) -> tuple[np.ndarray, str]:
    """Stopping times to scan, as a stop-level matrix, plus the achieved
    mode."""
    if mode not in ("auto", "exhaustive", "sampled"):
        raise DomainError(f"unknown supremum mode {mode!r}")
    count = count_stopping_times(space)
    if mode in ("auto", "exhaustive") and count <= cap:
        return enumerate_stopping_matrix(space, cap), "exhaustive"
    if mode == "exhaustive":
        raise ResourceError(
            f"{count} stopping times exceed cap {cap}; exhaustive mode refused"
        )
    sampled = sample_stopping_times(space, samples, seed)
    rows = [t.vals for t in sampled]
    rows.extend(
        np.full(space.n_leaves, float(n)) for n in range(space.depth + 1)
    )
    return np.unique(np.vstack(rows), axis=0), "sampled"


def _indicator_norms(
    space: FilteredSpace, masks: np.ndarray, norm_of: Callable[[np.ndarray], float]
) -> np.ndarray:
    """Norms of indicator rows with caching over distinct sets."""
    cache: dict[bytes, float] = {}
    out = np.empty(masks.shape[0])
    for i, row in enumerate(masks):
        key = row.tobytes()
        if key not in cache:
            cache[key] = norm_of(row.astype(float))
        out[i] = cache[key]
    return out


def _sup_result(
    taus: np.ndarray, ratios: np.ndarray, mode: str
) -> SupNormResult:
    if ratios.size == 0 or not np.any(np.isfinite(ratios)):
        return SupNormResult(0.0, None, mode, taus.shape[0])
    i = int(np.argmax(ratios))
    return SupNormResult(
        float(ratios[i]), StoppingTime(tuple(taus[i])), mode, taus.shape[0]
    )


def bmo_norm(
    f: Martingale,
    p: Exponent,
    mode: str = "auto",
    cap: int = ENUMERATION_CAP,
    seed: int = 0,
    samples: int = 256,
) -> SupNormResult:
    """sup over tau of ||f - f^{tau-1}||_{p(.)} / ||chi_{tau<inf}||_{p(.)},
    with the terminal-level difference and f_{-1} = 0; stopping times that
    are never finite contribute nothing."""
    space = f.space
    if float(np.abs(f.arrays[0]).max()) > 1e-12 * max(
        1.0, float(np.abs(f.terminal).max())
    ):
        raise DomainError("bmo_norm requires f_0 = 0")
    taus, achieved = candidate_matrix(space, mode, cap, seed, samples)
    finite = np.isfinite(taus)
    keep = finite.any(axis=1)
    taus = taus[keep]
    finite = finite[keep]
    diffs = stopped_terminal_diffs(f, taus, shift="minus-one")
    nums = norm_batch(space.probs, p.vals, np.abs(diffs))
    dens = _indicator_norms(
        space, finite, lambda chi: luxemburg_norm(space, chi, p).norm
    )
    return _sup_result(taus, nums / dens, achieved)


def lipschitz_norm(
    f: Martingale,
    q: float,
    alpha: Exponent | Sequence[float],
    mode: str = "auto",
    cap: int = ENUMERATION_CAP,
    seed: int = 0,
    samples: int = 256,
) -> SupNormResult:
    """sup over tau of ||chi||_{1/alpha(.)}^{-1} ||chi||_q^{-1}
    ||f - f^tau||_q, where alpha(.) >= 0 and 1/alpha uses the mixed modular
    (1/0 read as infinity)."""
    if q < 1:
        raise DomainError("lipschitz_norm requires q >= 1")
    space = f.space
    avals = alpha.vals if isinstance(alpha, Exponent) else as_leaf_values(space, alpha)
    if np.any(avals < 0):
        raise DomainError("alpha must be nonnegative")
    with np.errstate(divide="ignore"):
        inv = np.where(avals > 0, 1.0 / np.where(avals > 0, avals, 1.0), math.inf)
    inv_alpha = Exponent(tuple(inv), allow_infinite=True)

    taus, achieved = candidate_matrix(space, mode, cap, seed, samples)
    finite = np.isfinite(taus)
    keep = finite.any(axis=1)
    taus = taus[keep]
    finite = finite[keep]
    diffs = np.abs(stopped_terminal_diffs(f, taus, shift="none"))
    nums = (diffs**q @ space.probs) ** (1.0 / q)
    pq = finite @ space.probs
    dens_q = pq ** (1.0 / q)
    dens_alpha = _indicator_norms(
        space,
        finite,
        lambda chi: luxemburg_norm(space, chi, inv_alpha, mixed=True).norm,
    )
    return _sup_result(taus, nums / (dens_q * dens_alpha), achieved)


def duality_pairing_ratio(
    f: Martingale,
    phi: Sequence[float],
    p: Exponent,
    mode: str = "auto",
) -> float:
    """|E(f_N phi)| / (||f||_{H^s_{p(.)}} * ||phi||_{Lambda_2(1/p - 1)}),
    the finite pairing whose boundedness the duality theorem asserts."""
    space = f.space
    if p.p_plus() > 1.0:
        raise DomainError("duality pairing requires p_+ <= 1")
    if float(np.abs(f.arrays[0]).max()) > 1e-12 * max(
        1.0, float(np.abs(f.terminal).max())
    ):
        raise DomainError("duality pairing requires f_0 = 0")
    phi_v = as_leaf_values(space, phi)
    pairing = abs(float(np.sum(space.probs * f.terminal * phi_v)))
    # remove the F_0 projection: it pairs to zero against f and makes the
    # Lipschitz norm's f_0 = 0 convention applicable
    centered = phi_v - space.block_average(phi_v, 0)
    phi_mart = martingale_from_terminal(space, centered)
    alpha = tuple(1.0 / p.vals - 1.0)
    hs = hs_norm(f, p)
    lip = lipschitz_norm(phi_mart, 2.0, alpha, mode=mode).value
    if pairing <= 1e-15 * max(1.0, float(np.abs(phi_v).max())) * max(
        1.0, float(np.abs(f.terminal).max())
    ):
        return 0.0
    if hs == 0.0 or lip == 0.0:
        raise DomainError("zero denominator in duality pairing ratio")
    return pairing / (hs * lip)
