"""Bradley-Terry leaderboards from preference logs.

Pipeline: filtered win/tie counts -> maximum-likelihood BT strengths via the
minorization-maximization update -> Elo-scale ratings anchored at mean 1000
-> percentile bootstrap confidence intervals -> significance-aware ranks.

Ties ("BothGood"/"BothBad") count as half a win for each side, which keeps
the leaderboard invariant under A/B orientation swaps. All stochastic steps
take an explicit seed; per-replicate streams are derived by counter, so
results are bit-identical regardless of execution order.
"""

from __future__ import annotations

import math
import secrets
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import AXES, Choice, Subset
from .errors import (
    ConvergenceError,
    DegenerateBootstrapError,
    EmptyFilterError,
    NonIdentifiableError,
)
from .storage import BenchmarkManifest, PreferenceLog

_OUTCOME_A, _OUTCOME_B, _OUTCOME_TIE = 0, 1, 2


@dataclass(frozen=True)
class SubgroupFilter:
    """Restriction of a log to a slice; the empty filter is the full dataset.

    ``systems`` keeps only records whose two systems are both in the set.
    """

    language: str | None = None
    domain: str | None = None
    subset: Subset | str | None = None
    systems: frozenset[str] | None = None

    def describe(self) -> dict:
        return {
            "language": self.language,
            "domain": self.domain,
            "subset": self.subset.value if isinstance(self.subset, Subset) else self.subset,
            "systems": sorted(self.systems) if self.systems is not None else None,
        }


class LogArrays:
    """Columnar view of a preference log for fast filtering and counting."""

    def __init__(self, log: PreferenceLog):
        manifest = log.manifest
        self.system_ids = tuple(s.id for s in manifest.systems)
        sys_index = {sid: i for i, sid in enumerate(self.system_ids)}
        n = len(log.records)
        self.n_records = n
        self.a_idx = np.empty(n, dtype=np.int32)
        self.b_idx = np.empty(n, dtype=np.int32)
        self.outcome = np.empty(n, dtype=np.int8)
        self.axis_outcome = np.empty((n, len(AXES)), dtype=np.int8)

        raters: dict[str, int] = {}
        sentences: dict[str, int] = {}
        self.rater_code = np.empty(n, dtype=np.int32)
        self.sentence_code = np.empty(n, dtype=np.int32)
        self.language = np.empty(n, dtype=object)
        self.domain = np.empty(n, dtype=object)
        self.subset = np.empty(n, dtype=object)

        for k, rec in enumerate(log.records):
            self.a_idx[k] = sys_index[rec.system_a]
            self.b_idx[k] = sys_index[rec.system_b]
            self.outcome[k] = _outcome_code(rec.overall)
            for ax, axis in enumerate(AXES):
                self.axis_outcome[k, ax] = _outcome_code(rec.axes[axis])
            self.rater_code[k] = raters.setdefault(rec.rater_id, len(raters))
            self.sentence_code[k] = sentences.setdefault(
                rec.sentence_id, len(sentences)
            )
            self.language[k] = rec.language
            self.domain[k] = rec.domain
            self.subset[k] = rec.subset.value

        self.rater_ids = tuple(raters)
        self.sentence_ids = tuple(sentences)

    def mask(self, subgroup: SubgroupFilter | None) -> np.ndarray:
        m = np.ones(self.n_records, dtype=bool)
        if subgroup is None:
            return m
        if subgroup.language is not None:
            m &= self.language == subgroup.language
        if subgroup.domain is not None:
            m &= self.domain == subgroup.domain
        if subgroup.subset is not None:
            subset = subgroup.subset
            value = subset.value if isinstance(subset, Subset) else subset
            m &= self.subset == value
        if subgroup.systems is not None:
            allowed = np.zeros(len(self.system_ids), dtype=bool)
            for sid in subgroup.systems:
                if sid in self.system_ids:
                    allowed[self.system_ids.index(sid)] = True
            m &= allowed[self.a_idx] & allowed[self.b_idx]
        return m


def _outcome_code(choice: Choice) -> int:
    if choice is Choice.A:
        return _OUTCOME_A
    if choice is Choice.B:
        return _OUTCOME_B
    return _OUTCOME_TIE


def log_arrays(log: PreferenceLog) -> LogArrays:
    """Columnar view of ``log``, cached on the log instance."""
    cached = getattr(log, "_arrays", None)
    if cached is None:
        cached = LogArrays(log)
        log._arrays = cached  # type: ignore[attr-defined]
    return cached


@dataclass(frozen=True)
class WinMatrix:
    """Pairwise effective-win and comparison-count matrices.

    ``c[i, j]`` is the effective number of wins of system i over j (ties
    contribute 0.5 to each side); ``n = c + c.T`` is the symmetric count of
    comparisons. Orientation (A/B slot position) is already erased.
    """

    systems: tuple[str, ...]
    c: np.ndarray
    n: np.ndarray


def _win_matrix_from_codes(
    a_idx: np.ndarray,
    b_idx: np.ndarray,
    outcome: np.ndarray,
    n_systems: int,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    wa = np.where(outcome == _OUTCOME_A, 1.0, np.where(outcome == _OUTCOME_TIE, 0.5, 0.0))
    wb = np.where(outcome == _OUTCOME_B, 1.0, np.where(outcome == _OUTCOME_TIE, 0.5, 0.0))
    if weights is not None:
        wa = wa * weights
        wb = wb * weights
    flat_ab = a_idx * n_systems + b_idx
    flat_ba = b_idx * n_systems + a_idx
    size = n_systems * n_systems
    c = np.bincount(flat_ab, weights=wa, minlength=size)
    c += np.bincount(flat_ba, weights=wb, minlength=size)
    return c.reshape(n_systems, n_systems)


def compute_win_matrix(
    log: PreferenceLog, subgroup: SubgroupFilter | None = None
) -> WinMatrix:
    """Aggregate the filtered log into a WinMatrix.

    Systems appear in manifest order, restricted to systems with at least
    one filtered record. Raises EmptyFilterError when nothing matches.
    """
    arrays = log_arrays(log)
    mask = arrays.mask(subgroup)
    if not mask.any():
        raise EmptyFilterError("empty filtered log")
    a, b, out = arrays.a_idx[mask], arrays.b_idx[mask], arrays.outcome[mask]
    present = np.zeros(len(arrays.system_ids), dtype=bool)
    present[a] = True
    present[b] = True
    global_to_local = np.cumsum(present) - 1
    systems = tuple(
        sid for i, sid in enumerate(arrays.system_ids) if present[i]
    )
    c = _win_matrix_from_codes(
        global_to_local[a], global_to_local[b], out, len(systems)
    )
    return WinMatrix(systems=systems, c=c, n=c + c.T)


@dataclass(frozen=True)
class BtStrengths:
    """Latent BT strengths, geometric-mean normalized to 1."""

    systems: tuple[str, ...]
    p: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool


def _check_identifiable(c: np.ndarray) -> None:
    s = c.shape[0]
    wins = c.sum(axis=1)
    losses = c.sum(axis=0)
    if np.any(wins <= 0) or np.any(losses <= 0):
        bad = [int(i) for i in np.where((wins <= 0) | (losses <= 0))[0]]
        raise NonIdentifiableError(
            "non-identifiable: systems without both wins and losses",
            details={"systems": bad},
        )
    adj = (c + c.T) > 0
    reached = np.zeros(s, dtype=bool)
    frontier = [0]
    reached[0] = True
    while frontier:
        i = frontier.pop()
        for j in np.where(adj[i])[0]:
            if not reached[j]:
                reached[j] = True
                frontier.append(int(j))
    if not reached.all():
        raise NonIdentifiableError(
            "non-identifiable: comparison graph is disconnected",
            details={"unreached": [int(i) for i in np.where(~reached)[0]]},
        )


def bt_log_likelihood(c: np.ndarray, p: np.ndarray) -> float:
    """Sum over ordered pairs of c[i,j] * log(p_i / (p_i + p_j))."""
    s = c.shape[0]
    logp = np.log(p)
    pair_sum = np.log(p[:, None] + p[None, :])
    mask = ~np.eye(s, dtype=bool)
    return float(np.sum(c[mask] * (logp[:, None] - pair_sum)[mask]))


def _apply_pseudo_count(c: np.ndarray, pseudo_count: float) -> np.ndarray:
    """Add pseudo_count to every off-diagonal entry (2D or stacked 3D)."""
    if pseudo_count == 0:
        return c
    c = c + pseudo_count
    s = c.shape[-1]
    idx = np.arange(s)
    c[..., idx, idx] = 0.0
    return c


def _fit_logp(
    c: np.ndarray,
    tol: float,
    max_iter: int,
    likelihood_trace: list[float] | None = None,
) -> tuple[np.ndarray, int]:
    """MM iterations on a pseudo-counted, identifiable matrix; returns
    (geometric-mean-normalized log strengths, iterations)."""
    n = c + c.T  # zero diagonal, so n/pair needs no diagonal correction
    s = c.shape[0]
    wins = c.sum(axis=1)
    logp = np.zeros(s)
    if likelihood_trace is not None:
        likelihood_trace.append(bt_log_likelihood(c, np.exp(logp)))
    iterations = 0
    delta = math.inf
    for iterations in range(1, max_iter + 1):
        p = np.exp(logp)
        pair = p[:, None] + p[None, :]
        denom = (n / pair).sum(axis=1)
        new_logp = np.log(wins / denom)
        new_logp -= new_logp.mean()
        delta = float(np.max(np.abs(new_logp - logp)))
        logp = new_logp
        if likelihood_trace is not None:
            likelihood_trace.append(bt_log_likelihood(c, np.exp(logp)))
        if delta < tol:
            return logp, iterations
    raise ConvergenceError(
        f"not converged after {max_iter} iterations (delta {delta:.3e})"
    )


def fit_bt_mm(
    w: WinMatrix,
    pseudo_count: float = 0.0,
    tol: float = 1e-10,
    max_iter: int = 10000,
    likelihood_trace: list[float] | None = None,
) -> BtStrengths:
    """Maximum-likelihood BT strengths via minorization-maximization.

    Update rule: p_i <- sum_j c[i,j] / sum_j n[i,j] / (p_i + p_j), followed
    by geometric-mean renormalization each sweep; stops when the largest
    |delta log p_i| falls below ``tol``. The likelihood is non-decreasing
    across sweeps (append per-sweep values to ``likelihood_trace`` to
    observe it).
    """
    c = _apply_pseudo_count(np.asarray(w.c, dtype=float), pseudo_count)
    _check_identifiable(c)
    logp, iterations = _fit_logp(c, tol, max_iter, likelihood_trace)
    p = np.exp(logp)
    return BtStrengths(
        systems=w.systems,
        p=p,
        log_likelihood=bt_log_likelihood(c, p),
        iterations=iterations,
        converged=True,
    )


def _batch_identifiable(c: np.ndarray) -> np.ndarray:
    """Vectorized identifiability test over a (R, S, S) count stack."""
    wins_ok = (c.sum(axis=2) > 0).all(axis=1)
    losses_ok = (c.sum(axis=1) > 0).all(axis=1)
    ok = wins_ok & losses_ok
    s = c.shape[1]
    adj = ((c + c.transpose(0, 2, 1)) > 0) | np.eye(s, dtype=bool)
    reach = adj.astype(np.float64)
    steps = max(math.ceil(math.log2(max(s - 1, 1))), 1)
    for _ in range(steps):
        reach = (reach @ reach) > 0
        reach = reach.astype(np.float64)
    connected = (reach > 0).all(axis=(1, 2))
    return ok & connected


def _fit_bt_mm_batch(
    c: np.ndarray, tol: float = 1e-10, max_iter: int = 10000
) -> np.ndarray:
    """MM fit of a stack of identifiable (S, S) win matrices; returns log p.

    Same update and stopping rule as :func:`fit_bt_mm`, run simultaneously
    on every replicate.
    """
    r, s, _ = c.shape
    n = c + c.transpose(0, 2, 1)
    wins = c.sum(axis=2)
    logp = np.zeros((r, s))
    for _ in range(max_iter):
        p = np.exp(logp)
        pair = p[:, :, None] + p[:, None, :]
        denom = (n / pair).sum(axis=2)
        new_logp = np.log(wins / denom)
        new_logp -= new_logp.mean(axis=1, keepdims=True)
        delta = np.max(np.abs(new_logp - logp))
        logp = new_logp
        if delta < tol:
            return logp
    raise ConvergenceError(f"bootstrap fit not converged after {max_iter} iterations")


def map_to_elo(strengths: BtStrengths) -> np.ndarray:
    """Elo-scale ratings: 1000 + 400 * log10(p), arithmetic mean 1000.

    The 400/base-10 scale preserves BT win odds: a 400-point gap means
    10:1 odds. Because strengths are geometric-mean normalized, the mean
    rating is 1000; an explicit recenter removes residual float drift.
    """
    ratings = 1000.0 + 400.0 * np.log10(strengths.p)
    return ratings + (1000.0 - ratings.mean())


def _elo_from_logp(logp: np.ndarray) -> np.ndarray:
    ratings = 1000.0 + (400.0 / math.log(10.0)) * logp
    return ratings + (1000.0 - ratings.mean(axis=-1, keepdims=True))


def _as_seed_tuple(seed: int | Sequence[int] | None) -> tuple[int, ...]:
    if seed is None:
        return (secrets.randbits(63),)
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(x) for x in seed)


@dataclass(frozen=True)
class BootstrapResult:
    systems: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    replicates: int
    level: float
    seed: tuple[int, ...]
    redraws: int
    resample_unit: str

    def intervals(self) -> dict[str, tuple[float, float]]:
        return {
            sid: (float(lo), float(hi))
            for sid, lo, hi in zip(self.systems, self.lower, self.upper)
        }

    def mean_width(self) -> float:
        return float(np.mean(self.upper - self.lower))


def _resample_multiplicities(
    rng: np.random.Generator,
    unit: str,
    n_records: int,
    rater_code: np.ndarray,
    sentence_code: np.ndarray,
) -> np.ndarray:
    if unit == "record":
        idx = rng.integers(0, n_records, n_records)
        return np.bincount(idx, minlength=n_records).astype(float)
    if unit == "rater":
        n_units = int(rater_code.max()) + 1
        draw = rng.integers(0, n_units, n_units)
        unit_mult = np.bincount(draw, minlength=n_units).astype(float)
        return unit_mult[rater_code]
    if unit == "sentence":
        n_units = int(sentence_code.max()) + 1
        draw = rng.integers(0, n_units, n_units)
        unit_mult = np.bincount(draw, minlength=n_units).astype(float)
        return unit_mult[sentence_code]
    raise ValueError(f"unknown resample unit {unit!r}")


def _bootstrap_core(
    a: np.ndarray,
    b: np.ndarray,
    out: np.ndarray,
    rater: np.ndarray,
    sentence: np.ndarray,
    n_systems: int,
    replicates: int,
    level: float,
    seed: tuple[int, ...],
    pseudo_count: float,
    resample_unit: str,
    fit_tol: float,
    fit_max_iter: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Percentile bootstrap over local-coded comparison arrays.

    Returns (lower, upper, redraws). Attempt k draws from a generator
    seeded with (*seed, k); non-identifiable resamples are skipped and
    redrawn, capped at 10x replicates total attempts.
    """
    n_records = len(a)
    accepted: list[np.ndarray] = []
    attempts = 0
    cap = 10 * replicates
    chunk = max(replicates, 16)
    while len(accepted) < replicates:
        if attempts >= cap:
            raise DegenerateBootstrapError(
                f"redraw cap exceeded: {attempts} attempts for {replicates} replicates"
            )
        todo = min(chunk, replicates - len(accepted), cap - attempts)
        stack = np.empty((todo, n_systems, n_systems))
        for i in range(todo):
            rng = np.random.default_rng([*seed, attempts + i])
            mult = _resample_multiplicities(
                rng, resample_unit, n_records, rater, sentence
            )
            stack[i] = _win_matrix_from_codes(a, b, out, n_systems, weights=mult)
        attempts += todo
        stack = _apply_pseudo_count(stack, pseudo_count) if pseudo_count else stack
        ok = _batch_identifiable(stack)
        for i in np.where(ok)[0]:
            if len(accepted) < replicates:
                accepted.append(stack[i])

    logp = _fit_bt_mm_batch(np.stack(accepted), tol=fit_tol, max_iter=fit_max_iter)
    ratings = _elo_from_logp(logp)
    alpha = (1.0 - level) / 2.0
    lower = np.quantile(ratings, alpha, axis=0)
    upper = np.quantile(ratings, 1.0 - alpha, axis=0)
    return lower, upper, attempts - replicates


def _local_codes(
    arrays: LogArrays, mask: np.ndarray, systems: tuple[str, ...]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Reindex a filtered slice to a local system list and dense cluster ids."""
    local = {sid: i for i, sid in enumerate(systems)}
    global_to_local = np.full(len(arrays.system_ids), -1, dtype=np.int64)
    for g, sid in enumerate(arrays.system_ids):
        if sid in local:
            global_to_local[g] = local[sid]
    a = global_to_local[arrays.a_idx[mask]]
    b = global_to_local[arrays.b_idx[mask]]
    out = arrays.outcome[mask]
    _, rater = np.unique(arrays.rater_code[mask], return_inverse=True)
    _, sentence = np.unique(arrays.sentence_code[mask], return_inverse=True)
    return a, b, out, rater, sentence


def bootstrap_cis(
    log: PreferenceLog,
    subgroup: SubgroupFilter | None = None,
    replicates: int = 500,
    level: float = 0.95,
    seed: int | Sequence[int] | None = None,
    pseudo_count: float = 0.0,
    resample_unit: str = "record",
    fit_tol: float = 1e-10,
    fit_max_iter: int = 10000,
) -> BootstrapResult:
    """Percentile bootstrap CIs of Elo ratings.

    Resamples comparison records with replacement (default unit: individual
    record; "rater"/"sentence" cluster units available for sensitivity
    studies), refits on every replicate, and takes the percentile interval
    at (1-level)/2 and 1-(1-level)/2. Deterministic given ``seed``: the
    resample for attempt k comes from a generator seeded with (seed, k), so
    replicates are independent of execution order. Non-identifiable
    resamples are redrawn, counted, and capped at 10x ``replicates``.
    """
    seed_tuple = _as_seed_tuple(seed)
    arrays = log_arrays(log)
    mask = arrays.mask(subgroup)
    if not mask.any():
        raise EmptyFilterError("empty filtered log")
    full = compute_win_matrix(log, subgroup)
    a, b, out, rater, sentence = _local_codes(arrays, mask, full.systems)
    lower, upper, redraws = _bootstrap_core(
        a, b, out, rater, sentence,
        n_systems=len(full.systems),
        replicates=replicates,
        level=level,
        seed=seed_tuple,
        pseudo_count=pseudo_count,
        resample_unit=resample_unit,
        fit_tol=fit_tol,
        fit_max_iter=fit_max_iter,
    )
    return BootstrapResult(
        systems=full.systems,
        lower=lower,
        upper=upper,
        replicates=replicates,
        level=level,
        seed=seed_tuple,
        redraws=redraws,
        resample_unit=resample_unit,
    )


def significance_ranks(
    lower: Sequence[float] | np.ndarray, upper: Sequence[float] | np.ndarray
) -> list[int]:
    """Conservative ranks: j beats i only when j's CI lies entirely above i's.

    rank_i = 1 + #{j : lower_j > upper_i}; ties share a rank and the next
    occupied rank reflects the dominance count (1,2,2,4 is representable,
    1,2,2,3 is never produced).
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    return [int(1 + np.sum(lo > hi[i])) for i in range(len(lo))]


def win_rates(
    log: PreferenceLog, subgroup: SubgroupFilter | None = None
) -> dict[str, float]:
    """Percentage of comparisons each system wins, ties counted as half.

    Systems with zero filtered comparisons are absent from the result.
    """
    arrays = log_arrays(log)
    mask = arrays.mask(subgroup)
    if not mask.any():
        raise EmptyFilterError("empty filtered log")
    a, b, out = arrays.a_idx[mask], arrays.b_idx[mask], arrays.outcome[mask]
    return _rates_from_codes(a, b, out, arrays.system_ids)


def _rates_from_codes(a, b, out, system_ids) -> dict[str, float]:
    n_sys = len(system_ids)
    wa = np.where(out == _OUTCOME_A, 1.0, np.where(out == _OUTCOME_TIE, 0.5, 0.0))
    score = np.bincount(a, weights=wa, minlength=n_sys) + np.bincount(
        b, weights=1.0 - wa, minlength=n_sys
    )
    involved = np.bincount(a, minlength=n_sys) + np.bincount(b, minlength=n_sys)
    return {
        system_ids[i]: float(100.0 * score[i] / involved[i])
        for i in range(n_sys)
        if involved[i] > 0
    }


def axis_win_rates(
    log: PreferenceLog, subgroup: SubgroupFilter | None = None
) -> dict[str, dict[str, float]]:
    """Per-axis win rates: {system_id: {axis: pct}}, ties as half wins."""
    arrays = log_arrays(log)
    mask = arrays.mask(subgroup)
    if not mask.any():
        raise EmptyFilterError("empty filtered log")
    a, b = arrays.a_idx[mask], arrays.b_idx[mask]
    result: dict[str, dict[str, float]] = {}
    for ax, axis in enumerate(AXES):
        rates = _rates_from_codes(a, b, arrays.axis_outcome[mask, ax], arrays.system_ids)
        for sid, pct in rates.items():
            result.setdefault(sid, {})[axis.value] = pct
    return result


@dataclass(frozen=True)
class LeaderboardEntry:
    system_id: str
    rating: float
    ci_lower: float
    ci_upper: float
    ci_halfwidth: float
    rank: int
    win_rate_pct: float
    n_comparisons: int


@dataclass(frozen=True)
class LeaderboardConfig:
    replicates: int = 500
    level: float = 0.95
    seed: int | tuple[int, ...] | None = None
    pseudo_count: float = 0.0
    resample_unit: str = "record"
    fit_tol: float = 1e-10
    fit_max_iter: int = 10000


def build_leaderboard(
    log: PreferenceLog,
    subgroup: SubgroupFilter | None = None,
    config: LeaderboardConfig | None = None,
) -> list[LeaderboardEntry]:
    """Full leaderboard for a (possibly filtered) log, sorted by rating.

    Composes win-matrix aggregation, the MM fit, Elo mapping, bootstrap
    CIs and significance ranks; intervals are widened (rarely) to contain
    the point estimate so ci_lower <= rating <= ci_upper always holds.
    """
    config = config or LeaderboardConfig()
    w = compute_win_matrix(log, subgroup)
    strengths = fit_bt_mm(
        w,
        pseudo_count=config.pseudo_count,
        tol=config.fit_tol,
        max_iter=config.fit_max_iter,
    )
    ratings = map_to_elo(strengths)
    boot = bootstrap_cis(
        log,
        subgroup,
        replicates=config.replicates,
        level=config.level,
        seed=config.seed,
        pseudo_count=config.pseudo_count,
        resample_unit=config.resample_unit,
        fit_tol=config.fit_tol,
        fit_max_iter=config.fit_max_iter,
    )
    lower = np.minimum(boot.lower, ratings)
    upper = np.maximum(boot.upper, ratings)
    ranks = significance_ranks(lower, upper)
    rates = win_rates(log, subgroup)
    counts = dict(zip(w.systems, w.n.sum(axis=1).astype(int)))
    entries = [
        LeaderboardEntry(
            system_id=sid,
            rating=float(ratings[i]),
            ci_lower=float(lower[i]),
            ci_upper=float(upper[i]),
            ci_halfwidth=float((upper[i] - lower[i]) / 2.0),
            rank=ranks[i],
            win_rate_pct=rates[sid],
            n_comparisons=int(counts[sid]),
        )
        for i, sid in enumerate(w.systems)
    ]
    entries.sort(key=lambda e: e.rating, reverse=True)
    return entries


def leaderboard_to_dicts(entries: Sequence[LeaderboardEntry]) -> list[dict]:
    return [
        {
            "rank": e.rank,
            "system_id": e.system_id,
            "rating": e.rating,
            "ci_lower": e.ci_lower,
            "ci_upper": e.ci_upper,
            "ci_halfwidth": e.ci_halfwidth,
            "win_rate_pct": e.win_rate_pct,
            "n_comparisons": e.n_comparisons,
        }
        for e in entries
    ]


def format_leaderboard_table(
    entries: Sequence[LeaderboardEntry], manifest: BenchmarkManifest | None = None
) -> str:
    """Aligned text table with the standard leaderboard columns:
    Rank, Model, Score +/- 95% CI, # comp, Win Rate, # lang.
    """
    names: dict[str, str] = {}
    n_langs: dict[str, int] = {}
    if manifest is not None:
        for s in manifest.systems:
            names[s.id] = s.display_name
            n_langs[s.id] = len(s.supported_languages)
    rows = [["Rank", "Model", "Score ± 95% CI", "# comp", "Win Rate", "# lang"]]
    for e in entries:
        rows.append(
            [
                str(e.rank),
                names.get(e.system_id, e.system_id),
                f"{e.rating:.2f} ± {round(e.ci_halfwidth)}",
                f"{e.n_comparisons:,}",
                f"{e.win_rate_pct:.0f}",
                str(n_langs.get(e.system_id, "-")),
            ]
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)
