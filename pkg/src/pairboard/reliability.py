"""Leaderboard stability versus evaluation scale.

Subsamples raters (or sentences at a fixed rater count) from a preference
log, refits the BT leaderboard per subsample, and summarizes rank
consistency (Spearman's rho against the reference leaderboard) and score
uncertainty (mean 95% bootstrap CI width) per grid point.

Raters are sampled uniformly without language balancing. Seed derivation
is fixed and documented: the sampling generator for attempt k of grid
index g is seeded with (seed, TAG, g, k) and the matching bootstrap with
(seed, TAG+1, g, k), so identical inputs give identical curves.
"""

from __future__ import annotations

import csv
import io
import secrets
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateBootstrapError,
    NonIdentifiableError,
    PairboardError,
    UndefinedCorrelationError,
)
from .ranking import (
    SubgroupFilter,
    _apply_pseudo_count,
    _bootstrap_core,
    _check_identifiable,
    _elo_from_logp,
    _fit_logp,
    _local_codes,
    _win_matrix_from_codes,
    log_arrays,
)
from .storage import PreferenceLog

_RATER_SAMPLE_TAG = 101
_RATER_CI_TAG = 102
_SENTENCE_RATERS_TAG = 201
_SENTENCE_SAMPLE_TAG = 202
_SENTENCE_CI_TAG = 203


def fractional_ranks(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Tie-averaged (fractional) ranks, 1-based, highest value need not be 1
    — ranking is ascending like scipy's rankdata."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=float)
    ranks[order] = np.arange(1, len(x) + 1, dtype=float)
    # average ranks within tie groups
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(rank_a: Sequence[float], rank_b: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of tie-averaged fractional ranks.

    Symmetric, and invariant under any common strictly monotone transform
    of the underlying scores. Raises on length mismatch or zero variance.
    """
    a = np.asarray(rank_a, dtype=float)
    b = np.asarray(rank_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise PairboardError("rank vectors must be 1-D and of equal length")
    if len(a) < 2:
        raise PairboardError("rank vectors must have length >= 2")
    ra = fractional_ranks(a)
    rb = fractional_ranks(b)
    da = ra - ra.mean()
    db = rb - rb.mean()
    var_a = float(np.dot(da, da))
    var_b = float(np.dot(db, db))
    if var_a == 0.0 or var_b == 0.0:
        raise UndefinedCorrelationError(
            "undefined correlation: a rank vector has zero variance"
        )
    return float(np.dot(da, db) / np.sqrt(var_a * var_b))


@dataclass(frozen=True)
class ReliabilityPoint:
    axis_value: int
    n_systems: int
    mean_rho: float
    mean_ci_width: float
    trials: int
    rho_std: float
    bootstrap_replicates: int


@dataclass
class ReliabilityCurve:
    mode: str  # "raters" | "sentences"
    grid: list[ReliabilityPoint]
    reference_leaderboard: dict[str, float]
    fixed_raters: int | None = None
    seed: int | None = None

    def to_dicts(self) -> list[dict]:
        return [
            {
                "axis_value": p.axis_value,
                "n_systems": p.n_systems,
                "mean_rho": p.mean_rho,
                "rho_std": p.rho_std,
                "mean_ci_width": p.mean_ci_width,
                "trials": p.trials,
                "bootstrap_replicates": p.bootstrap_replicates,
            }
            for p in self.grid
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf,
            fieldnames=[
                "axis_value", "n_systems", "mean_rho", "rho_std",
                "mean_ci_width", "trials", "bootstrap_replicates",
            ],
        )
        writer.writeheader()
        for row in self.to_dicts():
            writer.writerow(row)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "fixed_raters": self.fixed_raters,
            "seed": self.seed,
            "reference_leaderboard": self.reference_leaderboard,
            "grid": self.to_dicts(),
        }


@dataclass(frozen=True)
class ThresholdResult:
    axis_value: int
    mean_rho: float
    mean_ci_width: float


def find_threshold(
    curve: ReliabilityCurve, target_rho: float = 0.95
) -> ThresholdResult | None:
    """Smallest grid point whose mean rho meets the target, with the CI
    width observed there; None when the curve never reaches the target."""
    if not curve.grid:
        raise PairboardError("curve is empty")
    for point in curve.grid:
        if point.mean_rho >= target_rho:
            return ThresholdResult(
                axis_value=point.axis_value,
                mean_rho=point.mean_rho,
                mean_ci_width=point.mean_ci_width,
            )
    return None


def _ratings_for_mask(arrays, mask, systems, pseudo_count, tol, max_iter):
    """Fit ratings over a fixed system list from a masked slice; raises
    NonIdentifiableError when a system is missing or the graph splits."""
    a, b, out, rater, sentence = _local_codes(arrays, mask, systems)
    if len(a) == 0:
        raise NonIdentifiableError("no records in subsample")
    if (a < 0).any() or (b < 0).any():
        raise NonIdentifiableError("subsample contains out-of-subset systems")
    c = _win_matrix_from_codes(a, b, out, len(systems))
    c = _apply_pseudo_count(c, pseudo_count)
    _check_identifiable(c)
    logp, _ = _fit_logp(c, tol, max_iter)
    return _elo_from_logp(logp), (a, b, out, rater, sentence)


def _subset_mask(arrays, system_subset):
    base = SubgroupFilter(systems=frozenset(system_subset)) if system_subset else None
    return arrays.mask(base)


def _resolve_systems(arrays, system_subset) -> tuple[str, ...]:
    if system_subset:
        wanted = set(system_subset)
        return tuple(sid for sid in arrays.system_ids if sid in wanted)
    return arrays.system_ids


def rater_subsample_curve(
    log: PreferenceLog,
    system_subset: Sequence[str] | None = None,
    grid: Sequence[int] = (25, 50, 100, 200),
    trials: int = 20,
    bootstrap_replicates: int = 100,
    seed: int | None = None,
    pseudo_count: float = 0.0,
    fit_tol: float = 1e-10,
    fit_max_iter: int = 10000,
) -> ReliabilityCurve:
    """Rank consistency and CI width as the number of raters grows.

    Per grid value n and trial: sample n raters uniformly without
    replacement, keep all their records, refit, and compare to the
    full-data leaderboard over the system subset. Non-identifiable
    subsamples are redrawn (counted, capped at 10x trials per grid point).
    """
    if seed is None:
        seed = secrets.randbits(31)
    grid = sorted(set(int(g) for g in grid))
    arrays = log_arrays(log)
    systems = _resolve_systems(arrays, system_subset)
    if len(systems) < 2:
        raise PairboardError("system subset must contain at least two systems")
    mask = _subset_mask(arrays, system_subset)
    ref_ratings, _ = _ratings_for_mask(
        arrays, mask, systems, pseudo_count, fit_tol, fit_max_iter
    )
    rater_codes = np.unique(arrays.rater_code[mask])
    n_total = len(rater_codes)
    if grid[-1] > n_total:
        raise PairboardError(
            f"grid value {grid[-1]} exceeds {n_total} distinct raters"
        )

    points = []
    for gi, n in enumerate(grid):
        rhos, widths = [], []
        attempts = 0
        cap = 10 * trials
        while len(rhos) < trials:
            if attempts >= cap:
                raise DegenerateBootstrapError(
                    f"redraw cap exceeded at grid value {n}"
                )
            rng = np.random.default_rng([seed, _RATER_SAMPLE_TAG, gi, attempts])
            chosen = rng.choice(rater_codes, size=n, replace=False)
            sub_mask = mask & np.isin(arrays.rater_code, chosen)
            try:
                ratings, codes = _ratings_for_mask(
                    arrays, sub_mask, systems, pseudo_count, fit_tol, fit_max_iter
                )
                a, b, out, rater, sentence = codes
                lower, upper, _ = _bootstrap_core(
                    a, b, out, rater, sentence,
                    n_systems=len(systems),
                    replicates=bootstrap_replicates,
                    level=0.95,
                    seed=(seed, _RATER_CI_TAG, gi, attempts),
                    pseudo_count=pseudo_count,
                    resample_unit="record",
                    fit_tol=fit_tol,
                    fit_max_iter=fit_max_iter,
                )
            except (NonIdentifiableError, DegenerateBootstrapError):
                attempts += 1
                continue
            attempts += 1
            rhos.append(spearman_rho(ratings, ref_ratings))
            widths.append(float(np.mean(upper - lower)))
        points.append(
            ReliabilityPoint(
                axis_value=n,
                n_systems=len(systems),
                mean_rho=float(np.mean(rhos)),
                mean_ci_width=float(np.mean(widths)),
                trials=trials,
                rho_std=float(np.std(rhos)),
                bootstrap_replicates=bootstrap_replicates,
            )
        )
    return ReliabilityCurve(
        mode="raters",
        grid=points,
        reference_leaderboard={
            sid: float(r) for sid, r in zip(systems, ref_ratings)
        },
        seed=seed,
    )


def stratified_sentence_sample(
    rng: np.random.Generator,
    sentences_by_language: dict[str, np.ndarray],
    total: int,
) -> np.ndarray:
    """Sample ``total`` sentence codes with equal per-language quotas.

    The remainder after integer division is spread round-robin over
    languages in an order shuffled by ``rng``. Languages with fewer
    sentences than their quota contribute everything they have.
    """
    languages = sorted(sentences_by_language)
    quota, rem = divmod(total, len(languages))
    shuffled = list(languages)
    rng.shuffle(shuffled)
    counts = {lang: quota for lang in languages}
    for lang in shuffled[:rem]:
        counts[lang] += 1
    chosen = []
    for lang in languages:
        pool = sentences_by_language[lang]
        k = min(counts[lang], len(pool))
        if k > 0:
            chosen.append(rng.choice(pool, size=k, replace=False))
    return np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)


def sentence_subsample_curve(
    log: PreferenceLog,
    system_subset: Sequence[str] | None = None,
    grid: Sequence[int] = (100, 250, 500, 1000),
    fixed_raters: int = 200,
    trials: int = 20,
    bootstrap_replicates: int = 100,
    seed: int | None = None,
    pseudo_count: float = 0.0,
    fit_tol: float = 1e-10,
    fit_max_iter: int = 10000,
) -> ReliabilityCurve:
    """Rank consistency and CI width as sentence coverage grows, with the
    rater count pinned.

    Per trial, a random set of ``fixed_raters`` raters is fixed (shared
    across grid values), sentences are sampled stratified per language,
    and the refit is compared against that trial's fixed-rater
    all-sentences leaderboard.
    """
    if seed is None:
        seed = secrets.randbits(31)
    grid = sorted(set(int(g) for g in grid))
    arrays = log_arrays(log)
    systems = _resolve_systems(arrays, system_subset)
    if len(systems) < 2:
        raise PairboardError("system subset must contain at least two systems")
    mask = _subset_mask(arrays, system_subset)
    full_ref, _ = _ratings_for_mask(
        arrays, mask, systems, pseudo_count, fit_tol, fit_max_iter
    )
    rater_codes = np.unique(arrays.rater_code[mask])
    if fixed_raters > len(rater_codes):
        raise PairboardError(
            f"fixed_raters {fixed_raters} exceeds {len(rater_codes)} distinct raters"
        )
    sentence_codes = np.unique(arrays.sentence_code[mask])
    if grid[-1] > len(sentence_codes):
        raise PairboardError(
            f"grid value {grid[-1]} exceeds {len(sentence_codes)} distinct sentences"
        )

    # fixed rater sets and their all-sentence reference fits, per trial
    trial_masks, trial_refs = [], []
    for t in range(trials):
        rng = np.random.default_rng([seed, _SENTENCE_RATERS_TAG, t])
        chosen = rng.choice(rater_codes, size=fixed_raters, replace=False)
        t_mask = mask & np.isin(arrays.rater_code, chosen)
        ref, _ = _ratings_for_mask(
            arrays, t_mask, systems, pseudo_count, fit_tol, fit_max_iter
        )
        trial_masks.append(t_mask)
        trial_refs.append(ref)

    # language -> sentence codes present in the filtered log
    lang_of_sentence: dict[int, str] = {}
    sub_sent = arrays.sentence_code[mask]
    sub_lang = arrays.language[mask]
    for code, lang in zip(sub_sent, sub_lang):
        lang_of_sentence[int(code)] = lang
    by_lang: dict[str, list[int]] = {}
    for code, lang in lang_of_sentence.items():
        by_lang.setdefault(lang, []).append(code)
    sentences_by_language = {
        lang: np.asarray(sorted(codes)) for lang, codes in by_lang.items()
    }

    points = []
    for gi, n in enumerate(grid):
        rhos, widths = [], []
        for t in range(trials):
            attempts = 0
            cap = 10
            while True:
                if attempts >= cap:
                    raise DegenerateBootstrapError(
                        f"redraw cap exceeded at grid value {n}, trial {t}"
                    )
                rng = np.random.default_rng(
                    [seed, _SENTENCE_SAMPLE_TAG, gi, t, attempts]
                )
                chosen = stratified_sentence_sample(rng, sentences_by_language, n)
                sub_mask = trial_masks[t] & np.isin(arrays.sentence_code, chosen)
                try:
                    ratings, codes = _ratings_for_mask(
                        arrays, sub_mask, systems, pseudo_count, fit_tol, fit_max_iter
                    )
                    a, b, out, rater, sentence = codes
                    lower, upper, _ = _bootstrap_core(
                        a, b, out, rater, sentence,
                        n_systems=len(systems),
                        replicates=bootstrap_replicates,
                        level=0.95,
                        seed=(seed, _SENTENCE_CI_TAG, gi, t, attempts),
                        pseudo_count=pseudo_count,
                        resample_unit="record",
                        fit_tol=fit_tol,
                        fit_max_iter=fit_max_iter,
                    )
                except (NonIdentifiableError, DegenerateBootstrapError):
                    attempts += 1
                    continue
                rhos.append(spearman_rho(ratings, trial_refs[t]))
                widths.append(float(np.mean(upper - lower)))
                break
        points.append(
            ReliabilityPoint(
                axis_value=n,
                n_systems=len(systems),
                mean_rho=float(np.mean(rhos)),
                mean_ci_width=float(np.mean(widths)),
                trials=trials,
                rho_std=float(np.std(rhos)),
                bootstrap_replicates=bootstrap_replicates,
            )
        )
    return ReliabilityCurve(
        mode="sentences",
        grid=points,
        reference_leaderboard={sid: float(r) for sid, r in zip(systems, full_ref)},
        fixed_raters=fixed_raters,
        seed=seed,
    )
