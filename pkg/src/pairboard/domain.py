"""Core domain types for pairwise preference evaluation.

All types here are plain values: safe to copy, hash (where frozen) and
share between threads. Serialization lives in :mod:`pairboard.storage`.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    GenderMismatchError,
    IncompleteAxesError,
    SelfComparisonError,
    TimestampOrderError,
    UnknownReferenceError,
    UnsupportedLanguageError,
)

#: ISO-639-2 codes of the ten benchmark languages.
BENCHMARK_LANGUAGES: tuple[str, ...] = (
    "ben", "guj", "hin", "kan", "mal", "mar", "ori", "tam", "tel", "urd",
)


class Choice(str, Enum):
    """The four-way outcome of one pairwise judgment."""

    A = "A"
    B = "B"
    BOTH_GOOD = "BothGood"
    BOTH_BAD = "BothBad"

    def is_tie(self) -> bool:
        return self in (Choice.BOTH_GOOD, Choice.BOTH_BAD)

    def swapped(self) -> "Choice":
        """The same judgment seen with the two systems exchanged."""
        if self is Choice.A:
            return Choice.B
        if self is Choice.B:
            return Choice.A
        return self


class Axis(str, Enum):
    """The six perceptual axes, in the fixed order used for feature vectors."""

    INTELLIGIBILITY = "intelligibility"
    EXPRESSIVENESS = "expressiveness"
    VOICE_QUALITY = "voice_quality"
    LIVELINESS = "liveliness"
    HALLUCINATIONS = "hallucinations"
    NOISE = "noise"


#: Fixed axis order; index k of a feature vector refers to AXES[k].
AXES: tuple[Axis, ...] = tuple(Axis)


class Subset(str, Enum):
    NORMALIZED = "normalized"
    SYMBOLIC = "symbolic"
    CODEMIXED = "codemixed"


class LengthClass(str, Enum):
    SHORT = "short"
    MEDIUM = "medium"
    LONG = "long"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"


class RaterState(str, Enum):
    REGISTERED = "registered"
    SCREENING_PASSED = "screening_passed"
    JUSTIFICATION_PASSED = "justification_passed"
    TRAINED = "trained"
    ACTIVE = "active"
    REJECTED = "rejected"


class AgeBand(str, Enum):
    A18_25 = "18-25"
    A25_40 = "25-40"
    A40_65 = "40-65"


@dataclass(frozen=True)
class SentenceEntry:
    id: str
    language: str
    domain: str
    subset: Subset
    length_class: LengthClass
    text: str


@dataclass(frozen=True)
class VoiceEntry:
    id: str
    system_id: str
    gender: Gender
    languages: frozenset[str]


@dataclass(frozen=True)
class SystemEntry:
    id: str
    display_name: str
    supported_languages: frozenset[str]
    voices: tuple[VoiceEntry, ...]


@dataclass
class RaterEntry:
    """A rater moving through the qualification pipeline.

    ``quota_total`` caps the number of comparisons the rater may complete.
    """

    id: str
    state: RaterState = RaterState.REGISTERED
    gender: Gender = Gender.FEMALE
    age_band: AgeBand = AgeBand.A25_40
    region: str = ""
    languages: frozenset[str] = frozenset()
    quota_total: int = 150
    quota_completed: int = 0

    def quota_remaining(self) -> int:
        return self.quota_total - self.quota_completed


@dataclass(frozen=True)
class ComparisonRecord:
    """One rater's completed two-phase judgment of an (A, B) audio pair.

    ``system_a``/``system_b`` are in canonical registry order; the left/right
    slot randomization shown to the rater is erased before a record exists.
    """

    id: str
    sentence_id: str
    language: str
    domain: str
    subset: Subset
    system_a: str
    system_b: str
    voice_a: str
    voice_b: str
    rater_id: str
    overall: Choice
    axes: Mapping[Axis, Choice]
    t_phase1: datetime
    t_phase2: datetime


class Registry:
    """Resolved lookup tables for one benchmark manifest."""

    def __init__(
        self,
        sentences: Iterable[SentenceEntry],
        systems: Iterable[SystemEntry],
        languages: Iterable[str] = (),
    ):
        self.sentences: dict[str, SentenceEntry] = {s.id: s for s in sentences}
        self.systems: dict[str, SystemEntry] = {s.id: s for s in systems}
        self.voices: dict[str, VoiceEntry] = {
            v.id: v for s in self.systems.values() for v in s.voices
        }
        self.languages: tuple[str, ...] = tuple(languages)
        self.system_order: dict[str, int] = {
            sid: i for i, sid in enumerate(self.systems)
        }

    def system_index(self, system_id: str) -> int:
        return self.system_order[system_id]


def utcnow_ms() -> datetime:
    """Current UTC time truncated to millisecond precision."""
    now = datetime.now(timezone.utc)
    return now.replace(microsecond=(now.microsecond // 1000) * 1000)


def format_timestamp(dt: datetime) -> str:
    """ISO-8601 UTC with exactly millisecond precision and a Z suffix."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_timestamp(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def validate_record(record: ComparisonRecord, registry: Registry) -> ComparisonRecord:
    """Check every ComparisonRecord invariant against the registry.

    Returns the record unchanged iff all invariants hold; raises a distinct
    error per violated invariant. Idempotent by construction.
    """
    if record.sentence_id not in registry.sentences:
        raise UnknownReferenceError(
            f"unknown sentence {record.sentence_id!r}",
            details={"field": "sentence_id", "value": record.sentence_id},
        )
    for fld, sys_id in (("system_a", record.system_a), ("system_b", record.system_b)):
        if sys_id not in registry.systems:
            raise UnknownReferenceError(
                f"unknown system {sys_id!r}", details={"field": fld, "value": sys_id}
            )
    for fld, voice_id, sys_id in (
        ("voice_a", record.voice_a, record.system_a),
        ("voice_b", record.voice_b, record.system_b),
    ):
        voice = registry.voices.get(voice_id)
        if voice is None or voice.system_id != sys_id:
            raise UnknownReferenceError(
                f"voice {voice_id!r} is not a voice of system {sys_id!r}",
                details={"field": fld, "value": voice_id},
            )
    if record.system_a == record.system_b:
        raise SelfComparisonError(
            f"record {record.id!r} compares system {record.system_a!r} to itself"
        )
    gender_a = registry.voices[record.voice_a].gender
    gender_b = registry.voices[record.voice_b].gender
    if gender_a != gender_b:
        raise GenderMismatchError(
            f"voice genders differ: {gender_a.value} vs {gender_b.value}"
        )
    for sys_id in (record.system_a, record.system_b):
        if record.language not in registry.systems[sys_id].supported_languages:
            raise UnsupportedLanguageError(
                f"system {sys_id!r} does not support language {record.language!r}"
            )
    if set(record.axes) != set(AXES):
        raise IncompleteAxesError(
            f"axes map has {len(record.axes)} entries, expected all six"
        )
    if record.t_phase2 < record.t_phase1:
        raise TimestampOrderError(
            f"t_phase2 {record.t_phase2} precedes t_phase1 {record.t_phase1}"
        )
    return record
