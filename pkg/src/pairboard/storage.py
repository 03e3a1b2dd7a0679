"""Durable persistence: benchmark manifests and append-only preference logs.

The canonical formats are a single ``manifest.json`` document and a
``preferences.jsonl`` file with one ComparisonRecord per line, stable field
order, UTF-8, timestamps in ISO-8601 UTC with millisecond precision.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .domain import (
    AXES,
    AgeBand,
    Axis,
    Choice,
    ComparisonRecord,
    Gender,
    LengthClass,
    RaterEntry,
    RaterState,
    Registry,
    SentenceEntry,
    Subset,
    SystemEntry,
    VoiceEntry,
    format_timestamp,
    parse_timestamp,
    validate_record,
)
from .errors import DuplicateIdError, LogParseError, ManifestError, PairboardError

SUBSETS: tuple[str, ...] = tuple(s.value for s in Subset)


@dataclass
class BenchmarkManifest:
    languages: tuple[str, ...]
    domains: tuple[str, ...]
    subsets: tuple[str, ...]
    sentences: tuple[SentenceEntry, ...]
    systems: tuple[SystemEntry, ...]

    def registry(self) -> Registry:
        return Registry(self.sentences, self.systems, self.languages)


@dataclass
class PreferenceLog:
    """An append-only, validated sequence of comparison records."""

    records: tuple[ComparisonRecord, ...]
    manifest: BenchmarkManifest


def validate_manifest(manifest: BenchmarkManifest) -> BenchmarkManifest:
    """Check manifest-level invariants and cross-references."""
    seen_sent: set[str] = set()
    for s in manifest.sentences:
        if s.id in seen_sent:
            raise ManifestError(f"duplicate sentence id {s.id!r}")
        seen_sent.add(s.id)
        if s.language not in manifest.languages:
            raise ManifestError(
                f"sentence {s.id!r} has undeclared language {s.language!r}"
            )
        if s.domain not in manifest.domains:
            raise ManifestError(f"sentence {s.id!r} has undeclared domain {s.domain!r}")
        if not s.text:
            raise ManifestError(f"sentence {s.id!r} has empty text")
    per_lang = {lang: 0 for lang in manifest.languages}
    for s in manifest.sentences:
        per_lang[s.language] += 1
    missing = [lang for lang, n in per_lang.items() if n == 0]
    if missing:
        raise ManifestError(f"declared languages without sentences: {missing}")

    seen_sys: set[str] = set()
    seen_voice: set[str] = set()
    for sys in manifest.systems:
        if sys.id in seen_sys:
            raise ManifestError(f"duplicate system id {sys.id!r}")
        seen_sys.add(sys.id)
        if not sys.voices:
            raise ManifestError(f"system without voices: {sys.id!r}")
        for v in sys.voices:
            if v.id in seen_voice:
                raise ManifestError(f"duplicate voice id {v.id!r}")
            seen_voice.add(v.id)
            if v.system_id != sys.id:
                raise ManifestError(
                    f"voice {v.id!r} references system {v.system_id!r}, "
                    f"declared under {sys.id!r}"
                )
            if not v.languages <= sys.supported_languages:
                raise ManifestError(
                    f"voice {v.id!r} supports languages outside its system's set"
                )
    return manifest


def _sentence_to_dict(s: SentenceEntry) -> dict:
    return {
        "id": s.id,
        "language": s.language,
        "domain": s.domain,
        "subset": s.subset.value,
        "length_class": s.length_class.value,
        "text": s.text,
    }


def _voice_to_dict(v: VoiceEntry) -> dict:
    return {
        "id": v.id,
        "system_id": v.system_id,
        "gender": v.gender.value,
        "languages": sorted(v.languages),
    }


def _system_to_dict(s: SystemEntry) -> dict:
    return {
        "id": s.id,
        "display_name": s.display_name,
        "supported_languages": sorted(s.supported_languages),
        "voices": [_voice_to_dict(v) for v in s.voices],
    }


def manifest_to_dict(manifest: BenchmarkManifest) -> dict:
    return {
        "languages": list(manifest.languages),
        "domains": list(manifest.domains),
        "subsets": list(manifest.subsets),
        "sentences": [_sentence_to_dict(s) for s in manifest.sentences],
        "systems": [_system_to_dict(s) for s in manifest.systems],
    }


def save_manifest(manifest: BenchmarkManifest, path: str | os.PathLike) -> None:
    validate_manifest(manifest)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest_to_dict(manifest), f, ensure_ascii=False, indent=2)
        f.write("\n")


def manifest_from_dict(doc: dict) -> BenchmarkManifest:
    try:
        sentences = tuple(
            SentenceEntry(
                id=s["id"],
                language=s["language"],
                domain=s["domain"],
                subset=Subset(s["subset"]),
                length_class=LengthClass(s["length_class"]),
                text=s["text"],
            )
            for s in doc["sentences"]
        )
        systems = tuple(
            SystemEntry(
                id=s["id"],
                display_name=s["display_name"],
                supported_languages=frozenset(s["supported_languages"]),
                voices=tuple(
                    VoiceEntry(
                        id=v["id"],
                        system_id=v["system_id"],
                        gender=Gender(v["gender"]),
                        languages=frozenset(v["languages"]),
                    )
                    for v in s["voices"]
                ),
            )
            for s in doc["systems"]
        )
        manifest = BenchmarkManifest(
            languages=tuple(doc["languages"]),
            domains=tuple(doc["domains"]),
            subsets=tuple(doc.get("subsets", SUBSETS)),
            sentences=sentences,
            systems=systems,
        )
    except KeyError as exc:
        raise ManifestError(f"manifest missing field {exc}") from exc
    except ValueError as exc:
        raise ManifestError(f"manifest enum value invalid: {exc}") from exc
    return validate_manifest(manifest)


def load_manifest(path: str | os.PathLike) -> BenchmarkManifest:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return manifest_from_dict(doc)


#: Stable serialization order for ComparisonRecord fields.
_RECORD_FIELDS = (
    "id", "sentence_id", "language", "domain", "subset",
    "system_a", "system_b", "voice_a", "voice_b", "rater_id",
    "overall", "axes", "t_phase1", "t_phase2",
)


def record_to_dict(record: ComparisonRecord) -> dict:
    return {
        "id": record.id,
        "sentence_id": record.sentence_id,
        "language": record.language,
        "domain": record.domain,
        "subset": record.subset.value,
        "system_a": record.system_a,
        "system_b": record.system_b,
        "voice_a": record.voice_a,
        "voice_b": record.voice_b,
        "rater_id": record.rater_id,
        "overall": record.overall.value,
        "axes": {axis.value: record.axes[axis].value for axis in AXES},
        "t_phase1": format_timestamp(record.t_phase1),
        "t_phase2": format_timestamp(record.t_phase2),
    }


def record_to_line(record: ComparisonRecord) -> str:
    return json.dumps(record_to_dict(record), ensure_ascii=False)


def _parse_choice(doc: dict, fld: str, line_no: int) -> Choice:
    raw = doc.get(fld)
    try:
        return Choice(raw)
    except ValueError:
        raise LogParseError(
            f"line {line_no}: field {fld!r} has out-of-vocabulary value {raw!r}",
            line_no=line_no,
            field=fld,
        ) from None


def record_from_dict(doc: dict, line_no: int = 0) -> ComparisonRecord:
    missing = [f for f in _RECORD_FIELDS if f not in doc]
    if missing:
        raise LogParseError(
            f"line {line_no}: missing fields {missing}",
            line_no=line_no,
            field=missing[0],
        )
    try:
        subset = Subset(doc["subset"])
    except ValueError:
        raise LogParseError(
            f"line {line_no}: field 'subset' has out-of-vocabulary value "
            f"{doc['subset']!r}",
            line_no=line_no,
            field="subset",
        ) from None
    overall = _parse_choice(doc, "overall", line_no)
    axes_doc = doc["axes"]
    if not isinstance(axes_doc, dict):
        raise LogParseError(
            f"line {line_no}: field 'axes' must be an object",
            line_no=line_no,
            field="axes",
        )
    axes: dict[Axis, Choice] = {}
    for key, value in axes_doc.items():
        try:
            axis = Axis(key)
        except ValueError:
            raise LogParseError(
                f"line {line_no}: unknown axis {key!r}", line_no=line_no, field="axes"
            ) from None
        try:
            axes[axis] = Choice(value)
        except ValueError:
            raise LogParseError(
                f"line {line_no}: axis {key!r} has out-of-vocabulary value {value!r}",
                line_no=line_no,
                field=f"axes.{key}",
            ) from None
    try:
        t1 = parse_timestamp(doc["t_phase1"])
        t2 = parse_timestamp(doc["t_phase2"])
    except ValueError as exc:
        raise LogParseError(
            f"line {line_no}: bad timestamp ({exc})", line_no=line_no, field="t_phase1"
        ) from None
    return ComparisonRecord(
        id=doc["id"],
        sentence_id=doc["sentence_id"],
        language=doc["language"],
        domain=doc["domain"],
        subset=subset,
        system_a=doc["system_a"],
        system_b=doc["system_b"],
        voice_a=doc["voice_a"],
        voice_b=doc["voice_b"],
        rater_id=doc["rater_id"],
        overall=overall,
        axes=axes,
        t_phase1=t1,
        t_phase2=t2,
    )


class LogWriter:
    """Single-writer append handle for a preference log file.

    Each record becomes exactly one line, written with a single ``write``
    call and flushed before return, so a crash never leaves a torn record.
    Record ids are unique across the existing file plus everything appended.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = os.fspath(path)
        self._seen: set[str] = set()
        if os.path.exists(self.path):
            for _, doc in _iter_lines(self.path):
                rid = doc.get("id")
                if rid is not None:
                    self._seen.add(rid)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: ComparisonRecord) -> None:
        if record.id in self._seen:
            raise DuplicateIdError(f"duplicate id {record.id!r}")
        self._fh.write(record_to_line(record) + "\n")
        self._fh.flush()
        self._seen.add(record.id)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_log(records: Sequence[ComparisonRecord], path: str | os.PathLike) -> None:
    """Append validated records to a JSON Lines file, one per line."""
    with LogWriter(path) as writer:
        for record in records:
            writer.append(record)


def _iter_lines(path: str | os.PathLike) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogParseError(
                    f"line {line_no}: malformed JSON ({exc.msg})", line_no=line_no
                ) from None
            if not isinstance(doc, dict):
                raise LogParseError(
                    f"line {line_no}: expected a JSON object", line_no=line_no
                )
            yield line_no, doc


def read_log(path: str | os.PathLike, manifest: BenchmarkManifest) -> PreferenceLog:
    """Parse and validate a preference log, reporting 1-based line numbers.

    Order-preserving; every record passes :func:`validate_record` against
    the manifest and ids are unique.
    """
    registry = manifest.registry()
    records: list[ComparisonRecord] = []
    seen: set[str] = set()
    for line_no, doc in _iter_lines(path):
        record = record_from_dict(doc, line_no)
        if record.id in seen:
            raise LogParseError(
                f"line {line_no}: duplicate id {record.id!r}",
                line_no=line_no,
                field="id",
            )
        try:
            validate_record(record, registry)
        except PairboardError as exc:
            raise LogParseError(
                f"line {line_no}: {exc}", line_no=line_no
            ) from exc
        seen.add(record.id)
        records.append(record)
    return PreferenceLog(records=tuple(records), manifest=manifest)


def rater_to_dict(r: RaterEntry) -> dict:
    return {
        "id": r.id,
        "state": r.state.value,
        "gender": r.gender.value,
        "age_band": r.age_band.value,
        "region": r.region,
        "languages": sorted(r.languages),
        "quota_total": r.quota_total,
        "quota_completed": r.quota_completed,
    }


def rater_from_dict(doc: dict) -> RaterEntry:
    return RaterEntry(
        id=doc["id"],
        state=RaterState(doc["state"]),
        gender=Gender(doc["gender"]),
        age_band=AgeBand(doc["age_band"]),
        region=doc.get("region", ""),
        languages=frozenset(doc["languages"]),
        quota_total=int(doc.get("quota_total", 150)),
        quota_completed=int(doc.get("quota_completed", 0)),
    )


def save_raters(raters: Iterable[RaterEntry], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump([rater_to_dict(r) for r in raters], f, ensure_ascii=False, indent=2)
        f.write("\n")


def load_raters(path: str | os.PathLike) -> list[RaterEntry]:
    with open(path, "r", encoding="utf-8") as f:
        docs = json.load(f)
    return [rater_from_dict(d) for d in docs]
