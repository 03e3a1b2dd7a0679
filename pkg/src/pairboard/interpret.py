"""Reconstructing overall preference from axis judgments, with exact
Shapley attribution of the predictions to the six perceptual axes.

The feature space is tiny (64 possible 6-bit vectors), so everything here
is exact: the classifier trains on aggregated cell counts, the value
function takes full interventional expectations over the background set,
and Shapley values enumerate all coalitions — no sampling approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression

from .domain import AXES, Choice
from .errors import LanguageLeakageError, PairboardError, SingleClassError
from .storage import PreferenceLog

N_AXES = len(AXES)
N_PATTERNS = 1 << N_AXES

#: All 64 possible feature vectors, row index == bitmask value.
ALL_PATTERNS = np.array(
    [[(m >> k) & 1 for k in range(N_AXES)] for m in range(N_PATTERNS)],
    dtype=np.int8,
)


@dataclass(frozen=True)
class FeatureRow:
    """6-bit axis features plus binary overall label for one comparison.

    Bit k is 1 iff the axis choice was A or BothGood (A at least as good);
    the label is 1 iff the overall preference was A.
    """

    features: tuple[int, ...]
    label: int
    language: str
    comparison_id: str

    def bitmask(self) -> int:
        return sum(bit << k for k, bit in enumerate(self.features))


def _encode_axes(axes, a_perspective: bool = True) -> tuple[int, ...]:
    good = (Choice.A, Choice.BOTH_GOOD) if a_perspective else (Choice.B, Choice.BOTH_GOOD)
    return tuple(1 if axes[axis] in good else 0 for axis in AXES)


def build_feature_dataset(
    log: PreferenceLog,
    include_overall_ties: bool = False,
    orientation_augment: bool = False,
) -> list[FeatureRow]:
    """One row per record with a strict overall preference.

    With ``include_overall_ties``, tie records are kept and labeled 0 (the
    "0 otherwise" ablation). ``orientation_augment`` adds each row mirrored
    into the B perspective with flipped label.
    """
    rows: list[FeatureRow] = []
    for rec in log.records:
        if rec.overall.is_tie() and not include_overall_ties:
            continue
        label = 1 if rec.overall is Choice.A else 0
        rows.append(
            FeatureRow(
                features=_encode_axes(rec.axes),
                label=label,
                language=rec.language,
                comparison_id=rec.id,
            )
        )
        if orientation_augment:
            rows.append(
                FeatureRow(
                    features=_encode_axes(rec.axes, a_perspective=False),
                    label=1 - label,
                    language=rec.language,
                    comparison_id=rec.id + "/mirror",
                )
            )
    return rows


@dataclass
class PreferenceModel:
    """A calibrated predictor P(label=1) over the 64-point input space."""

    predictor: Callable[[np.ndarray], np.ndarray]
    training_languages: frozenset[str]
    hyperparameters: dict

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=float))
        p = np.asarray(self.predictor(x), dtype=float)
        if p.ndim != 1 or len(p) != len(x):
            raise PairboardError("predictor must return one probability per row")
        if not np.all(np.isfinite(p)) or p.min() < 0 or p.max() > 1:
            raise PairboardError("predictor returned probabilities outside [0, 1]")
        return p

    def prob_table(self) -> np.ndarray:
        """Predictions for all 64 patterns, indexed by bitmask."""
        return self.predict_proba(ALL_PATTERNS)


def _aggregate_cells(
    rows: Sequence[FeatureRow], sample_weights: Sequence[float] | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse rows into the 64x2 contingency table of (pattern, label)."""
    weights = np.ones(len(rows)) if sample_weights is None else np.asarray(
        sample_weights, dtype=float
    )
    counts = np.zeros((N_PATTERNS, 2))
    for row, w in zip(rows, weights):
        counts[row.bitmask(), row.label] += w
    occupied = counts.sum(axis=1) > 0
    x = np.repeat(ALL_PATTERNS[occupied], 2, axis=0)
    y = np.tile([0, 1], int(occupied.sum()))
    w = counts[occupied].reshape(-1)
    keep = w > 0
    return x[keep], y[keep], w[keep]


def train_preference_classifier(
    rows: Sequence[FeatureRow],
    training_languages: Iterable[str],
    hyperparameters: dict | None = None,
    seed: int = 0,
    sample_weights: Sequence[float] | None = None,
) -> PreferenceModel:
    """Fit the preference predictor on rows from the training languages.

    Default model: L2-regularized logistic regression on the six bits
    (additive in features, which is the Bayes family when axes are
    conditionally independent given the winner). ``model="gbdt"`` switches
    to a gradient-boosted ensemble for interaction effects. Duplicate rows
    and weighted deduplicated rows produce identical models because
    training always collapses to the 64-cell contingency table first.
    """
    hp = {"model": "logistic", "c": 1.0}
    hp.update(hyperparameters or {})
    training_languages = frozenset(training_languages)
    train_rows = [r for r in rows if r.language in training_languages]
    if sample_weights is not None:
        if len(sample_weights) != len(rows):
            raise PairboardError("sample_weights must align with rows")
        weights = [w for r, w in zip(rows, sample_weights) if r.language in training_languages]
    else:
        weights = None
    if not train_rows:
        raise PairboardError("no training rows in the requested languages")
    labels = {r.label for r in train_rows}
    if len(labels) < 2:
        raise SingleClassError("training set contains a single class")

    x, y, w = _aggregate_cells(train_rows, weights)
    if hp["model"] == "logistic":
        clf = LogisticRegression(
            C=float(hp["c"]), solver="lbfgs", tol=1e-10, max_iter=5000
        )
        clf.fit(x, y, sample_weight=w)
        coef = clf.coef_[0].copy()
        intercept = float(clf.intercept_[0])
        hp["coef"] = coef.tolist()
        hp["intercept"] = intercept

        def predictor(features: np.ndarray) -> np.ndarray:
            z = features @ coef + intercept
            return 1.0 / (1.0 + np.exp(-z))

    elif hp["model"] == "gbdt":
        from sklearn.ensemble import HistGradientBoostingClassifier

        # training rows are the weighted 64-cell aggregate, so leaves must
        # be allowed to isolate single cells
        clf = HistGradientBoostingClassifier(
            random_state=seed,
            max_depth=int(hp.get("max_depth", 3)),
            learning_rate=float(hp.get("learning_rate", 0.1)),
            min_samples_leaf=1,
        )
        clf.fit(x, y, sample_weight=w)

        def predictor(features: np.ndarray) -> np.ndarray:
            return clf.predict_proba(features)[:, 1]

    else:
        raise PairboardError(f"unknown model kind {hp['model']!r}")

    return PreferenceModel(
        predictor=predictor,
        training_languages=training_languages,
        hyperparameters=hp,
    )


def model_from_coefficients(
    coef: Sequence[float], intercept: float, training_languages: Iterable[str]
) -> PreferenceModel:
    """Rebuild a logistic PreferenceModel from stored coefficients."""
    coef_arr = np.asarray(coef, dtype=float)

    def predictor(features: np.ndarray) -> np.ndarray:
        z = features @ coef_arr + intercept
        return 1.0 / (1.0 + np.exp(-z))

    return PreferenceModel(
        predictor=predictor,
        training_languages=frozenset(training_languages),
        hyperparameters={
            "model": "logistic",
            "coef": list(map(float, coef)),
            "intercept": float(intercept),
        },
    )


@dataclass(frozen=True)
class CrossLingualReport:
    pooled_accuracy: float
    per_language: dict[str, float]
    n_rows: int


def evaluate_cross_lingual(
    model: PreferenceModel,
    rows: Sequence[FeatureRow],
    holdout_languages: Iterable[str],
) -> CrossLingualReport:
    """Accuracy of (predictor >= 0.5) on held-out languages, pooled and
    per language. Holdout languages must be disjoint from training."""
    holdout = frozenset(holdout_languages)
    leaked = holdout & model.training_languages
    if leaked:
        raise LanguageLeakageError(
            f"language leakage: {sorted(leaked)} appear in the training set"
        )
    eval_rows = [r for r in rows if r.language in holdout]
    if not eval_rows:
        raise PairboardError("empty holdout")
    x = np.array([r.features for r in eval_rows], dtype=float)
    y = np.array([r.label for r in eval_rows])
    pred = (model.predict_proba(x) >= 0.5).astype(int)
    correct = pred == y
    per_language: dict[str, float] = {}
    for lang in sorted(holdout):
        idx = [i for i, r in enumerate(eval_rows) if r.language == lang]
        if idx:
            per_language[lang] = float(correct[idx].mean())
    return CrossLingualReport(
        pooled_accuracy=float(correct.mean()),
        per_language=per_language,
        n_rows=len(eval_rows),
    )


def _background_counts(background: Sequence[Sequence[int]] | np.ndarray) -> np.ndarray:
    bg = np.atleast_2d(np.asarray(background, dtype=np.int64))
    if bg.shape[0] == 0:
        raise PairboardError("background must be non-empty")
    masks = (bg * (1 << np.arange(N_AXES))).sum(axis=1)
    return np.bincount(masks, minlength=N_PATTERNS).astype(float)


_SUBSET_WEIGHT = np.array(
    [
        math.factorial(s) * math.factorial(N_AXES - s - 1) / math.factorial(N_AXES)
        for s in range(N_AXES)
    ]
)

_POPCOUNT = np.array([bin(m).count("1") for m in range(N_PATTERNS)])


def coalition_values(
    model: PreferenceModel,
    instance: Sequence[int] | np.ndarray,
    background: Sequence[Sequence[int]] | np.ndarray,
) -> np.ndarray:
    """Interventional value v(S) for every coalition bitmask S.

    v(S) = mean over background b of f(instance on S, b off S).
    """
    inst_mask = int(sum((1 << k) * int(b) for k, b in enumerate(np.asarray(instance))))
    f = model.prob_table()
    counts = _background_counts(background)
    total = counts.sum()
    bg_masks = np.arange(N_PATTERNS)
    v = np.empty(N_PATTERNS)
    for s_mask in range(N_PATTERNS):
        composed = (inst_mask & s_mask) | (bg_masks & ~s_mask)
        v[s_mask] = np.dot(counts, f[composed]) / total
    return v


def exact_shapley(
    model: PreferenceModel,
    instance: Sequence[int] | np.ndarray,
    background: Sequence[Sequence[int]] | np.ndarray,
) -> tuple[np.ndarray, float]:
    """Exact Shapley attribution of f(instance) across the six axes.

    phi_k = sum over S not containing k of
    |S|!(6-|S|-1)!/6! * (v(S u {k}) - v(S)), enumerated over all 64
    coalitions; returns (phi, baseline) with baseline = v(empty set).
    Efficiency holds exactly: sum(phi) = f(instance) - baseline.
    """
    v = coalition_values(model, instance, background)
    phi = np.zeros(N_AXES)
    for k in range(N_AXES):
        bit = 1 << k
        without = np.array([m for m in range(N_PATTERNS) if not m & bit])
        weights = _SUBSET_WEIGHT[_POPCOUNT[without]]
        phi[k] = np.dot(weights, v[without | bit] - v[without])
    return phi, float(v[0])


@dataclass
class ShapleyReport:
    """Mean |phi| per axis over an evaluation set, plus per-instance values."""

    mean_abs: dict[str, float]
    per_instance: np.ndarray  # (n_rows, 6)
    baseline: float
    axes_by_importance: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "mean_abs_shap": self.mean_abs,
            "baseline": self.baseline,
            "axes_by_importance": list(self.axes_by_importance),
        }


def mean_abs_shapley_report(
    model: PreferenceModel,
    rows: Sequence[FeatureRow],
    background: Sequence[Sequence[int]] | np.ndarray,
) -> ShapleyReport:
    """Per-axis mean absolute Shapley value over ``rows``.

    Rows sharing a feature pattern share phi, so the 64 distinct patterns
    are attributed once and weighted by multiplicity.
    """
    if not rows:
        raise PairboardError("rows must be non-empty")
    masks = np.array([r.bitmask() for r in rows])
    phi_by_pattern = np.zeros((N_PATTERNS, N_AXES))
    baseline = 0.0
    for mask in np.unique(masks):
        phi, baseline = exact_shapley(model, ALL_PATTERNS[mask], background)
        phi_by_pattern[mask] = phi
    per_instance = phi_by_pattern[masks]
    mean_abs_arr = np.abs(per_instance).mean(axis=0)
    mean_abs = {axis.value: float(mean_abs_arr[k]) for k, axis in enumerate(AXES)}
    order = tuple(
        AXES[k].value for k in np.argsort(-mean_abs_arr, kind="stable")
    )
    return ShapleyReport(
        mean_abs=mean_abs,
        per_instance=per_instance,
        baseline=baseline,
        axes_by_importance=order,
    )


def format_shapley_table(report: ShapleyReport) -> str:
    rows = [["Axis", "Mean |SHAP|"]]
    for axis in report.axes_by_importance:
        rows.append([axis, f"{report.mean_abs[axis]:.4f}"])
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{r[0].ljust(width)}  {r[1]}" for r in rows)
