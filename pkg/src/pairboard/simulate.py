"""Synthetic evaluation worlds with known ground truth.

Generates benchmarks, raters and preference logs whose statistics follow
the same Bradley-Terry generative model the ranking engine fits, so every
statistical claim (rating recovery, CI coverage, classifier accuracy,
Shapley orderings, reliability thresholds) can be tested against truth.

Generative model (artifact-internal; the axis model in particular is this
package's own construction):

* overall choice: a tie with probability ``tie_rate`` (BothGood/BothBad
  equally likely); otherwise side A wins with probability
  ``1 / (1 + 10**((R_B - R_A + eps) / 400))`` where ``eps`` is Gaussian
  rater noise on the Elo scale.
* axis choices: per axis k, the probability that A is favored is a logistic
  function of the per-system axis-quality difference, tilted toward the
  drawn overall winner with gain proportional to ``axis_weights[k]``; the
  favored side then lands on a strict win or the matching Both* option.
  Jointly, the overall preference is a noisy weighted function of the axis
  differences, making ``axis_weights`` recoverable ground truth.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .domain import (
    AXES,
    AgeBand,
    Axis,
    BENCHMARK_LANGUAGES,
    Choice,
    ComparisonRecord,
    Gender,
    LengthClass,
    RaterEntry,
    RaterState,
    SentenceEntry,
    Subset,
    SystemEntry,
    VoiceEntry,
    validate_record,
)
from .errors import NoAdmissiblePairError, PairboardError
from .scheduling import PairPlan, Scheduler
from .storage import BenchmarkManifest, PreferenceLog, SUBSETS, validate_manifest

#: Sixteen deployment-flavored domains, including the stress categories.
DEFAULT_DOMAINS: tuple[str, ...] = (
    "news", "education", "healthcare", "finance", "sports", "weather",
    "navigation", "entertainment", "ecommerce", "agriculture", "government",
    "travel", "telecom", "stem", "tongue_twisters", "stress_test",
)

#: Logistic gain on axis-quality differences.
QUALITY_GAIN = 6.0
#: Logistic gain coupling axis choices to the overall winner, per unit weight.
TILT_GAIN = 12.0

_SIM_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)


@dataclass
class WorldSpec:
    """Parameters of a synthetic evaluation world."""

    n_systems: int = 3
    true_ratings: tuple[float, ...] | None = None
    axis_quality: np.ndarray | None = None  # (n_systems, 6) in [0, 1]
    axis_weights: tuple[float, ...] = (1 / 6,) * 6
    rater_noise: float = 0.0
    tie_rate: float = 0.0
    n_raters: int = 50
    n_sentences: int = 30  # per language
    languages: tuple[str, ...] = BENCHMARK_LANGUAGES
    domains: tuple[str, ...] = DEFAULT_DOMAINS
    rater_quota: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.true_ratings is None:
            gap = 50.0
            offset = gap * (self.n_systems - 1) / 2.0
            self.true_ratings = tuple(
                1000.0 + offset - gap * i for i in range(self.n_systems)
            )
        self.true_ratings = tuple(float(r) for r in self.true_ratings)
        if len(self.true_ratings) != self.n_systems:
            raise PairboardError("true_ratings length must equal n_systems")
        if abs(sum(self.true_ratings) / self.n_systems - 1000.0) > 1e-6:
            raise PairboardError("true_ratings must have mean 1000")
        if self.axis_quality is None:
            self.axis_quality = np.full((self.n_systems, len(AXES)), 0.5)
        self.axis_quality = np.asarray(self.axis_quality, dtype=float)
        if self.axis_quality.shape != (self.n_systems, len(AXES)):
            raise PairboardError("axis_quality must be (n_systems, 6)")
        w = np.asarray(self.axis_weights, dtype=float)
        if w.shape != (len(AXES),) or np.any(w < 0) or not math.isclose(
            w.sum(), 1.0, abs_tol=1e-9
        ):
            raise PairboardError("axis_weights must be six nonnegative reals summing to 1")
        self.axis_weights = tuple(float(x) for x in w)
        if not 0.0 <= self.tie_rate <= 1.0:
            raise PairboardError("tie_rate must be in [0, 1]")
        if self.rater_noise < 0:
            raise PairboardError("rater_noise must be >= 0")

    def to_dict(self) -> dict:
        return {
            "n_systems": self.n_systems,
            "true_ratings": list(self.true_ratings),
            "axis_quality": np.asarray(self.axis_quality).tolist(),
            "axis_weights": list(self.axis_weights),
            "rater_noise": self.rater_noise,
            "tie_rate": self.tie_rate,
            "n_raters": self.n_raters,
            "n_sentences": self.n_sentences,
            "languages": list(self.languages),
            "domains": list(self.domains),
            "rater_quota": self.rater_quota,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WorldSpec":
        kwargs = dict(doc)
        for key in ("languages", "domains", "true_ratings", "axis_weights"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        if kwargs.get("axis_quality") is not None:
            kwargs["axis_quality"] = np.asarray(kwargs["axis_quality"], dtype=float)
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "WorldSpec":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")


@dataclass
class SimulatedWorld:
    spec: WorldSpec
    manifest: BenchmarkManifest
    log: PreferenceLog
    true_ratings: dict[str, float]
    axis_weights: tuple[float, ...]
    raters: list[RaterEntry] = field(default_factory=list)

    def system_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.manifest.systems)


class SimClock:
    """Deterministic clock: fixed epoch, one second per reading."""

    def __init__(self, start: datetime = _SIM_EPOCH):
        self._now = start

    def __call__(self) -> datetime:
        now = self._now
        self._now = now + timedelta(seconds=1)
        return now


def generate_world(spec: WorldSpec) -> SimulatedWorld:
    """Deterministic manifest for a spec: systems with one voice per gender
    supporting every language, sentences split evenly across subsets."""
    systems = []
    for i in range(spec.n_systems):
        sid = f"sys{i + 1:02d}"
        langs = frozenset(spec.languages)
        systems.append(
            SystemEntry(
                id=sid,
                display_name=f"System {i + 1:02d}",
                supported_languages=langs,
                voices=(
                    VoiceEntry(f"{sid}-f", sid, Gender.FEMALE, langs),
                    VoiceEntry(f"{sid}-m", sid, Gender.MALE, langs),
                ),
            )
        )
    sentences = []
    subsets = tuple(Subset)
    lengths = tuple(LengthClass)
    for lang in spec.languages:
        for i in range(spec.n_sentences):
            domain = spec.domains[i % len(spec.domains)]
            sentences.append(
                SentenceEntry(
                    id=f"{lang}-s{i:05d}",
                    language=lang,
                    domain=domain,
                    subset=subsets[i % len(subsets)],
                    length_class=lengths[i % len(lengths)],
                    text=f"[{lang}] synthetic sentence {i:05d} ({domain})",
                )
            )
    manifest = BenchmarkManifest(
        languages=tuple(spec.languages),
        domains=tuple(spec.domains),
        subsets=SUBSETS,
        sentences=tuple(sentences),
        systems=tuple(systems),
    )
    validate_manifest(manifest)
    truth = {s.id: r for s, r in zip(systems, spec.true_ratings)}
    return SimulatedWorld(
        spec=spec,
        manifest=manifest,
        log=PreferenceLog(records=(), manifest=manifest),
        true_ratings=truth,
        axis_weights=spec.axis_weights,
    )


def make_raters(spec: WorldSpec) -> list[RaterEntry]:
    """Active raters, one native language each, assigned round-robin."""
    genders = tuple(Gender)
    bands = tuple(AgeBand)
    return [
        RaterEntry(
            id=f"r{i + 1:04d}",
            state=RaterState.ACTIVE,
            gender=genders[i % 2],
            age_band=bands[i % 3],
            region="sim",
            languages=frozenset({spec.languages[i % len(spec.languages)]}),
            quota_total=spec.rater_quota,
        )
        for i in range(spec.n_raters)
    ]


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def bt_win_probability(rating_a: float, rating_b: float) -> float:
    """Closed-form BT probability that A beats B on the Elo scale."""
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / 400.0))


def draw_judgment(
    spec: WorldSpec,
    rng: np.random.Generator,
    sys_a_index: int,
    sys_b_index: int,
) -> tuple[Choice, dict[Axis, Choice]]:
    """Draw (overall, axes) for a comparison of system indices a vs b."""
    r_a = spec.true_ratings[sys_a_index]
    r_b = spec.true_ratings[sys_b_index]
    if spec.tie_rate > 0 and rng.random() < spec.tie_rate:
        overall = Choice.BOTH_GOOD if rng.random() < 0.5 else Choice.BOTH_BAD
        tilt_dir = 0.0
    else:
        eps = rng.normal(0.0, spec.rater_noise) if spec.rater_noise > 0 else 0.0
        p_a = bt_win_probability(r_a, r_b - eps)
        overall = Choice.A if rng.random() < p_a else Choice.B
        tilt_dir = 1.0 if overall is Choice.A else -1.0

    axes: dict[Axis, Choice] = {}
    q = spec.axis_quality
    for k, axis in enumerate(AXES):
        base = QUALITY_GAIN * (q[sys_a_index, k] - q[sys_b_index, k])
        tilt = TILT_GAIN * spec.axis_weights[k] * tilt_dir
        favors_a = rng.random() < _sigmoid(base + tilt)
        if spec.tie_rate > 0 and rng.random() < spec.tie_rate:
            axes[axis] = Choice.BOTH_GOOD if favors_a else Choice.BOTH_BAD
        else:
            axes[axis] = Choice.A if favors_a else Choice.B
    return overall, axes


def simulate_comparison(
    world: SimulatedWorld,
    rater_id: str,
    sentence_id: str,
    pair: tuple[tuple[str, str], tuple[str, str]],
    seed: int,
) -> ComparisonRecord:
    """One standalone simulated record for ((system_a, voice_a), (system_b,
    voice_b)); the pair must be admissible under scheduler rules."""
    registry = world.manifest.registry()
    (sys_a, voice_a), (sys_b, voice_b) = pair
    sentence = registry.sentences[sentence_id]
    rng = np.random.default_rng(seed)
    ids = world.system_ids()
    overall, axes = draw_judgment(
        world.spec, rng, ids.index(sys_a), ids.index(sys_b)
    )
    t1 = _SIM_EPOCH + timedelta(seconds=int(seed) % 86400)
    record = ComparisonRecord(
        id=f"sim-{rater_id}-{sentence_id}-{sys_a}-{sys_b}-{seed}",
        sentence_id=sentence_id,
        language=sentence.language,
        domain=sentence.domain,
        subset=sentence.subset,
        system_a=sys_a,
        system_b=sys_b,
        voice_a=voice_a,
        voice_b=voice_b,
        rater_id=rater_id,
        overall=overall,
        axes=axes,
        t_phase1=t1,
        t_phase2=t1 + timedelta(seconds=1),
    )
    return validate_record(record, registry)


def run_simulation(spec: WorldSpec) -> SimulatedWorld:
    """Drive the scheduler with simulated raters until quotas exhaust.

    Deterministic: identical specs produce identical manifests and logs.
    """
    world = generate_world(spec)
    registry = world.manifest.registry()
    raters = make_raters(spec)
    plan = PairPlan.balanced(registry, raters)
    scheduler = Scheduler(
        registry,
        plan,
        raters,
        seed=spec.seed,
        clock=SimClock(),
    )
    sys_index = {sid: i for i, sid in enumerate(world.system_ids())}
    counter = 0
    pending = {r.id for r in raters}
    while pending:
        for rater in raters:
            if rater.id not in pending:
                continue
            try:
                task = scheduler.next_task(rater.id)
            except NoAdmissiblePairError:
                pending.discard(rater.id)
                continue
            if task is None:
                pending.discard(rater.id)
                continue
            rng = np.random.default_rng([spec.seed, 1, counter])
            counter += 1
            # judgments are drawn in the rater's left/right frame
            overall, axes = draw_judgment(
                spec,
                rng,
                sys_index[task.left.system_id],
                sys_index[task.right.system_id],
            )
            scheduler.submit_overall(task.id, overall, playback_proof=True)
            scheduler.submit_axes(task.id, axes)
    world.log = PreferenceLog(
        records=tuple(scheduler.records), manifest=world.manifest
    )
    world.raters = raters
    return world
