"""Rater qualification, controlled pair sampling, and the two-phase lock.

A task walks assigned -> phase1_locked -> complete; the overall choice is
permanently locked after phase 1 and the six-axis panel is phase 2. Slot
randomization (which system plays left/right) is erased when the finished
task is emitted as a ComparisonRecord in canonical registry order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np

from .domain import (
    AXES,
    Axis,
    Choice,
    ComparisonRecord,
    Gender,
    RaterEntry,
    RaterState,
    Registry,
    SentenceEntry,
    utcnow_ms,
    validate_record,
)
from .errors import (
    AlreadyLockedError,
    IncompleteAxesError,
    IncompleteListeningError,
    NoAdmissiblePairError,
    NotLockedError,
    OutOfOrderStageError,
    RaterNotActiveError,
    TaskExpiredError,
    UnknownTaskError,
)


class QualificationStage(str, Enum):
    SCREENING = "screening"
    JUSTIFICATION = "justification"
    TRAINING = "training"


# Expected stage and pass-target per pipeline state. The training stage is
# submitted twice: guideline training completion, then the final platform
# check that makes the rater schedulable.
_PIPELINE: dict[RaterState, tuple[QualificationStage, RaterState]] = {
    RaterState.REGISTERED: (QualificationStage.SCREENING, RaterState.SCREENING_PASSED),
    RaterState.SCREENING_PASSED: (
        QualificationStage.JUSTIFICATION,
        RaterState.JUSTIFICATION_PASSED,
    ),
    RaterState.JUSTIFICATION_PASSED: (QualificationStage.TRAINING, RaterState.TRAINED),
    RaterState.TRAINED: (QualificationStage.TRAINING, RaterState.ACTIVE),
}


def advance_qualification(
    rater: RaterEntry, stage: QualificationStage, passed: bool
) -> RaterEntry:
    """Advance a rater one qualification step; failing any step rejects."""
    step = _PIPELINE.get(rater.state)
    if step is None:
        raise OutOfOrderStageError(
            f"rater {rater.id!r} in state {rater.state.value!r} has no pending stage"
        )
    expected, target = step
    if stage != expected:
        raise OutOfOrderStageError(
            f"out of order: rater {rater.id!r} expects {expected.value!r}, "
            f"got {stage.value!r}"
        )
    rater.state = target if passed else RaterState.REJECTED
    return rater


class TaskState(str, Enum):
    ASSIGNED = "assigned"
    PHASE1_LOCKED = "phase1_locked"
    COMPLETE = "complete"
    EXPIRED = "expired"


@dataclass(frozen=True)
class SlotAssignment:
    system_id: str
    voice_id: str
    audio_uri: str


@dataclass
class Task:
    id: str
    rater_id: str
    sentence_id: str
    left: SlotAssignment
    right: SlotAssignment
    state: TaskState = TaskState.ASSIGNED
    overall: Choice | None = None
    axes: dict[Axis, Choice] | None = None
    created_at: datetime | None = None
    locked_at: datetime | None = None
    completed_at: datetime | None = None
    record_id: str | None = None


PairKey = tuple[str, str]  # system ids in canonical registry order


def canonical_pair(registry: Registry, sys_x: str, sys_y: str) -> PairKey:
    if registry.system_index(sys_x) <= registry.system_index(sys_y):
        return (sys_x, sys_y)
    return (sys_y, sys_x)


@dataclass
class PairPlan:
    """Remaining comparison targets per (language, canonical system pair)."""

    targets: dict[tuple[str, PairKey], int] = field(default_factory=dict)

    @classmethod
    def uniform(
        cls, registry: Registry, per_cell_target: int, languages: Iterable[str] | None = None
    ) -> "PairPlan":
        """Equal targets for every language x admissible same-gender pair."""
        langs = tuple(languages) if languages is not None else registry.languages
        targets: dict[tuple[str, PairKey], int] = {}
        systems = list(registry.systems.values())
        for lang in langs:
            for i, sa in enumerate(systems):
                for sb in systems[i + 1 :]:
                    if lang not in sa.supported_languages:
                        continue
                    if lang not in sb.supported_languages:
                        continue
                    if not _gender_options(sa, sb, lang):
                        continue
                    targets[(lang, (sa.id, sb.id))] = per_cell_target
        return cls(targets=targets)

    @classmethod
    def balanced(
        cls, registry: Registry, raters: Iterable[RaterEntry]
    ) -> "PairPlan":
        """Targets sized so rater quotas, not the plan, are the binding limit."""
        demand: dict[str, int] = {}
        for r in raters:
            for lang in r.languages:
                demand[lang] = demand.get(lang, 0) + r.quota_remaining()
        plan = cls.uniform(registry, 0)
        per_lang_pairs: dict[str, int] = {}
        for lang, _ in plan.targets:
            per_lang_pairs[lang] = per_lang_pairs.get(lang, 0) + 1
        for (lang, pair) in plan.targets:
            need = demand.get(lang, 0)
            pairs = per_lang_pairs[lang]
            plan.targets[(lang, pair)] = math.ceil(need / pairs) if need else 0
        return plan

    def remaining(self, lang: str, pair: PairKey) -> int:
        return self.targets.get((lang, pair), 0)


def _gender_options(sys_a, sys_b, lang: str) -> list[Gender]:
    """Genders for which both systems offer a voice supporting ``lang``."""
    out = []
    for gender in Gender:
        if any(v.gender == gender and lang in v.languages for v in sys_a.voices) and any(
            v.gender == gender and lang in v.languages for v in sys_b.voices
        ):
            out.append(gender)
    return out


def default_audio_resolver(system_id: str, voice_id: str, sentence_id: str) -> str:
    return f"audio://{system_id}/{voice_id}/{sentence_id}"


class Scheduler:
    """Task issuance and the two-phase locked annotation state machine.

    Single-threaded core; the service layer serializes access per process.
    Completed tasks emit validated ComparisonRecords to ``sink``.
    """

    def __init__(
        self,
        registry: Registry,
        plan: PairPlan,
        raters: Iterable[RaterEntry],
        seed: int | None = None,
        sink: Callable[[ComparisonRecord], None] | None = None,
        task_ttl: timedelta = timedelta(hours=24),
        clock: Callable[[], datetime] | None = None,
        audio_resolver: Callable[[str, str, str], str] = default_audio_resolver,
    ):
        self.registry = registry
        self.plan = plan
        self.raters: dict[str, RaterEntry] = {r.id: r for r in raters}
        self.tasks: dict[str, Task] = {}
        self.records: list[ComparisonRecord] = []
        self._sink = sink
        self._ttl = task_ttl
        self._clock = clock or utcnow_ms
        self._audio = audio_resolver
        self._rng = np.random.default_rng(seed)
        # per (rater, language, pair): pre-shuffled sentence order + cursor;
        # sentences before the cursor are burned for good ("never issued twice")
        self._queues: dict[tuple[str, str, PairKey], list[SentenceEntry]] = {}
        self._cursors: dict[tuple[str, str, PairKey], int] = {}
        self._open_count: dict[str, int] = {}
        self._task_seq = 0
        self._record_seq = 0
        self._sentences_by_lang: dict[str, list[SentenceEntry]] = {}
        for s in registry.sentences.values():
            self._sentences_by_lang.setdefault(s.language, []).append(s)

    # -- qualification ----------------------------------------------------

    def advance_qualification(
        self, rater_id: str, stage: QualificationStage, passed: bool
    ) -> RaterEntry:
        rater = self.raters.get(rater_id)
        if rater is None:
            raise UnknownTaskError(f"unknown rater {rater_id!r}")
        return advance_qualification(rater, stage, passed)

    # -- task issuance -----------------------------------------------------

    def next_task(self, rater_id: str) -> Task | None:
        """Issue a new task, or None when the rater's quota is exhausted.

        Selection is least-served-first over (language, pair) cells: among
        cells with the largest remaining target, one admissible
        (sentence, pair, voice pair) combination is drawn uniformly. The
        same (rater, sentence, pair) is never issued twice. A/B slot order
        is randomized. Raises NoAdmissiblePairError when no combination
        remains.
        """
        rater = self.raters.get(rater_id)
        if rater is None:
            raise UnknownTaskError(f"unknown rater {rater_id!r}")
        if rater.state != RaterState.ACTIVE:
            raise RaterNotActiveError(
                f"rater {rater_id!r} is {rater.state.value}, not active"
            )
        open_tasks = self._open_count.get(rater_id, 0)
        if rater.quota_completed + open_tasks >= rater.quota_total:
            return None

        langs = [
            lang
            for lang in rater.languages
            if lang in self.registry.languages and self._sentences_by_lang.get(lang)
        ]
        cells = [
            (lang, pair)
            for (lang, pair), remaining in self.plan.targets.items()
            if lang in langs and remaining > 0
        ]
        # least-served-first: consider only cells with the largest remaining target
        while cells:
            top = max(self.plan.targets[cell] for cell in cells)
            top_cells = [cell for cell in cells if self.plan.targets[cell] == top]
            weights = np.array(
                [self._available_count(rater_id, lang, pair) for lang, pair in top_cells],
                dtype=float,
            )
            total = weights.sum()
            if total == 0:
                cells = [c for c in cells if self.plan.targets[c] < top]
                continue
            cell = top_cells[self._rng.choice(len(top_cells), p=weights / total)]
            return self._issue(rater, cell[0], cell[1])
        raise NoAdmissiblePairError(
            f"no admissible (sentence, pair) combination for rater {rater_id!r}"
        )

    def _available_count(self, rater_id: str, lang: str, pair: PairKey) -> int:
        n_sent = len(self._sentences_by_lang.get(lang, ()))
        return n_sent - self._cursors.get((rater_id, lang, pair), 0)

    def _issue(self, rater: RaterEntry, lang: str, pair: PairKey) -> Task:
        key = (rater.id, lang, pair)
        queue = self._queues.get(key)
        if queue is None:
            queue = list(self._sentences_by_lang[lang])
            self._rng.shuffle(queue)
            self._queues[key] = queue
            self._cursors[key] = 0
        cursor = self._cursors[key]
        sentence = queue[cursor]
        self._cursors[key] = cursor + 1
        sys_a = self.registry.systems[pair[0]]
        sys_b = self.registry.systems[pair[1]]
        genders = _gender_options(sys_a, sys_b, lang)
        gender = genders[self._rng.integers(len(genders))]
        voice_a = self._pick_voice(sys_a, gender, lang)
        voice_b = self._pick_voice(sys_b, gender, lang)

        slot_first = (pair[0], voice_a)
        slot_second = (pair[1], voice_b)
        if self._rng.integers(2) == 1:
            slot_first, slot_second = slot_second, slot_first
        self._task_seq += 1
        task = Task(
            id=f"t{self._task_seq:06d}",
            rater_id=rater.id,
            sentence_id=sentence.id,
            left=SlotAssignment(
                slot_first[0],
                slot_first[1],
                self._audio(slot_first[0], slot_first[1], sentence.id),
            ),
            right=SlotAssignment(
                slot_second[0],
                slot_second[1],
                self._audio(slot_second[0], slot_second[1], sentence.id),
            ),
            created_at=self._clock(),
        )
        self.tasks[task.id] = task
        self._open_count[rater.id] = self._open_count.get(rater.id, 0) + 1
        self.plan.targets[(lang, pair)] -= 1
        return task

    def _pick_voice(self, system, gender: Gender, lang: str) -> str:
        voices = [
            v.id for v in system.voices if v.gender == gender and lang in v.languages
        ]
        return voices[self._rng.integers(len(voices))]

    # -- two-phase submission ----------------------------------------------

    def _get_task(self, task_id: str) -> Task:
        task = self.tasks.get(task_id)
        if task is None:
            raise UnknownTaskError(f"unknown task {task_id!r}")
        return task

    def submit_overall(self, task_id: str, choice: Choice, playback_proof: bool) -> Task:
        """Phase 1: record and permanently lock the holistic preference.

        Identical resubmission returns the already-locked task unchanged
        (idempotent retry); a conflicting choice raises AlreadyLockedError.
        """
        task = self._get_task(task_id)
        if task.state == TaskState.EXPIRED:
            raise TaskExpiredError(f"task {task_id!r} expired")
        if task.state in (TaskState.PHASE1_LOCKED, TaskState.COMPLETE):
            if task.overall == choice and playback_proof:
                return task
            # conflict responses carry the authoritative state so clients
            # can resynchronize without a task-read endpoint
            raise AlreadyLockedError(
                f"task {task_id!r} already locked",
                details={"state": task.state.value, "overall": task.overall.value},
            )
        if not playback_proof:
            raise IncompleteListeningError(
                "incomplete listening: both samples must be played to completion"
            )
        task.overall = choice
        task.state = TaskState.PHASE1_LOCKED
        task.locked_at = self._clock()
        return task

    def submit_axes(self, task_id: str, axes: Mapping[Axis, Choice]) -> ComparisonRecord:
        """Phase 2: record the six-axis judgments and emit the record.

        The emitted ComparisonRecord is in canonical registry order with
        slot randomization erased; identical resubmission returns the same
        record without appending a duplicate.
        """
        task = self._get_task(task_id)
        if task.state == TaskState.EXPIRED:
            raise TaskExpiredError(f"task {task_id!r} expired")
        if task.state == TaskState.ASSIGNED:
            raise NotLockedError(
                f"task {task_id!r} not locked: submit the overall choice first"
            )
        axes = dict(axes)
        if set(axes) != set(AXES):
            raise IncompleteAxesError(
                f"incomplete axes: got {len(axes)} of {len(AXES)} entries"
            )
        if task.state == TaskState.COMPLETE:
            if axes == task.axes:
                return next(r for r in self.records if r.id == task.record_id)
            raise AlreadyLockedError(
                f"task {task_id!r} already submitted",
                details={"state": task.state.value, "overall": task.overall.value},
            )

        task.axes = axes
        task.completed_at = self._clock()
        task.state = TaskState.COMPLETE
        record = self._emit(task)
        rater = self.raters[task.rater_id]
        rater.quota_completed += 1
        self._open_count[task.rater_id] -= 1
        return record

    def _emit(self, task: Task) -> ComparisonRecord:
        sentence = self.registry.sentences[task.sentence_id]
        left, right = task.left, task.right
        pair = canonical_pair(self.registry, left.system_id, right.system_id)
        left_is_first = left.system_id == pair[0]
        first, second = (left, right) if left_is_first else (right, left)

        def reorient(choice: Choice) -> Choice:
            return choice if left_is_first else choice.swapped()

        self._record_seq += 1
        record = ComparisonRecord(
            id=f"c{self._record_seq:06d}",
            sentence_id=sentence.id,
            language=sentence.language,
            domain=sentence.domain,
            subset=sentence.subset,
            system_a=first.system_id,
            system_b=second.system_id,
            voice_a=first.voice_id,
            voice_b=second.voice_id,
            rater_id=task.rater_id,
            overall=reorient(task.overall),
            axes={axis: reorient(task.axes[axis]) for axis in AXES},
            t_phase1=task.locked_at,
            t_phase2=task.completed_at,
        )
        validate_record(record, self.registry)
        task.record_id = record.id
        self.records.append(record)
        if self._sink is not None:
            self._sink(record)
        return record

    # -- expiry --------------------------------------------------------------

    def expire_idle(self, now: datetime | None = None) -> list[Task]:
        """Expire open tasks idle past the TTL; their plan targets return.

        Expired tasks never emit records, and their (rater, sentence, pair)
        combination stays burned.
        """
        now = now or self._clock()
        expired = []
        for task in self.tasks.values():
            if task.state not in (TaskState.ASSIGNED, TaskState.PHASE1_LOCKED):
                continue
            last_activity = task.locked_at or task.created_at
            if now - last_activity >= self._ttl:
                task.state = TaskState.EXPIRED
                sentence = self.registry.sentences[task.sentence_id]
                pair = canonical_pair(
                    self.registry, task.left.system_id, task.right.system_id
                )
                self.plan.targets[(sentence.language, pair)] += 1
                self._open_count[task.rater_id] -= 1
                expired.append(task)
        return expired
