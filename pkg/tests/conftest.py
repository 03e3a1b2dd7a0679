from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from pairboard.domain import (
    AXES,
    Axis,
    Choice,
    ComparisonRecord,
    Gender,
    LengthClass,
    SentenceEntry,
    Subset,
    SystemEntry,
    VoiceEntry,
)
from pairboard.storage import BenchmarkManifest, PreferenceLog, SUBSETS

T0 = datetime(2025, 6, 1, 12, 0, 0, tzinfo=timezone.utc)

DOMAINS = ("news", "education", "finance", "sports")


def make_system(sid: str, languages=("hin", "tam")) -> SystemEntry:
    langs = frozenset(languages)
    return SystemEntry(
        id=sid,
        display_name=sid.upper(),
        supported_languages=langs,
        voices=(
            VoiceEntry(f"{sid}-f", sid, Gender.FEMALE, langs),
            VoiceEntry(f"{sid}-m", sid, Gender.MALE, langs),
        ),
    )


def make_manifest(n_systems=3, languages=("hin", "tam"), n_sentences=6) -> BenchmarkManifest:
    systems = tuple(make_system(f"sys{i+1:02d}", languages) for i in range(n_systems))
    subsets = tuple(Subset)
    lengths = tuple(LengthClass)
    sentences = tuple(
        SentenceEntry(
            id=f"{lang}-{i:03d}",
            language=lang,
            domain=DOMAINS[i % len(DOMAINS)],
            subset=subsets[i % 3],
            length_class=lengths[i % 3],
            text=f"sample {lang} sentence {i}",
        )
        for lang in languages
        for i in range(n_sentences)
    )
    return BenchmarkManifest(
        languages=tuple(languages),
        domains=DOMAINS,
        subsets=SUBSETS,
        sentences=sentences,
        systems=systems,
    )


def make_record(
    manifest: BenchmarkManifest,
    rec_id: str = "c1",
    sentence_idx: int = 0,
    system_a: str = "sys01",
    system_b: str = "sys02",
    gender: Gender = Gender.FEMALE,
    rater_id: str = "r01",
    overall: Choice = Choice.A,
    axes: dict | None = None,
    t1: datetime | None = None,
    t2: datetime | None = None,
) -> ComparisonRecord:
    sentence = manifest.sentences[sentence_idx]
    suffix = "f" if gender == Gender.FEMALE else "m"
    if axes is None:
        axes = {axis: overall for axis in AXES}
    t1 = t1 or T0
    return ComparisonRecord(
        id=rec_id,
        sentence_id=sentence.id,
        language=sentence.language,
        domain=sentence.domain,
        subset=sentence.subset,
        system_a=system_a,
        system_b=system_b,
        voice_a=f"{system_a}-{suffix}",
        voice_b=f"{system_b}-{suffix}",
        rater_id=rater_id,
        overall=overall,
        axes=dict(axes),
        t_phase1=t1,
        t_phase2=t2 or (t1 + timedelta(seconds=30)),
    )


def make_log(manifest: BenchmarkManifest, records) -> PreferenceLog:
    return PreferenceLog(records=tuple(records), manifest=manifest)


@pytest.fixture
def manifest() -> BenchmarkManifest:
    return make_manifest()


@pytest.fixture
def registry(manifest):
    return manifest.registry()
