"""Event-sourced annotation workflow.

Every state change is a JSON line appended to a single log file; in-memory
state is a pure fold over those events, so reopening the log reconstructs
the store exactly. Public operations validate under one lock, append the
events they imply, and fold each event through the same transition function
the replay path uses.

Task lifecycle: unassigned -> assigned -> labeled, with an Undecided label
sending a primary task to escalated and spawning three expert subtasks whose
majority resolves it.
"""
from __future__ import annotations

import json
import os
import threading
import time

import numpy as np

from ..corpus import Corpus, Sample
from ..errors import ArgumentError, AuthorizationError, ConflictError, ValidationError
from .agreement import (
    FINAL_LABELS,
    LABEL_NOT_SARCASM,
    LABEL_SARCASM,
    LABEL_UNDECIDED,
    WIRE_LABELS,
    KappaReport,
    cohen_kappa,
    grade_onboarding,
)

TASK_KINDS = ("primary", "onboarding", "double_check", "expert")
TASK_STATES = ("unassigned", "assigned", "labeled", "escalated", "resolved")
ROLES = ("worker", "expert")
EXPERT_VOTES = 3

LABEL_TO_INT = {LABEL_SARCASM: 1, LABEL_NOT_SARCASM: 0}
INT_TO_LABEL = {1: LABEL_SARCASM, 0: LABEL_NOT_SARCASM}


class Task:
    __slots__ = ("task_id", "sample_id", "kind", "state", "assigned_to", "label", "parent_id", "final_label")

    def __init__(self, task_id, sample_id, kind, parent_id=None):
        self.task_id = task_id
        self.sample_id = sample_id
        self.kind = kind
        self.state = "unassigned"
        self.assigned_to = None
        self.label = None
        self.parent_id = parent_id
        self.final_label = None

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "sample_id": self.sample_id,
            "kind": self.kind,
            "state": self.state,
            "assigned_to": self.assigned_to,
            "label": self.label,
            "parent_id": self.parent_id,
            "final_label": self.final_label,
        }


class Annotator:
    __slots__ = ("annotator_id", "role", "onboarding_passed", "onboarding_score")

    def __init__(self, annotator_id, role):
        self.annotator_id = annotator_id
        self.role = role
        self.onboarding_passed = False
        self.onboarding_score = None

    def to_dict(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "role": self.role,
            "onboarding_passed": self.onboarding_passed,
            "onboarding_score": self.onboarding_score,
        }


class AnnotationStore:
    def __init__(self, log_path, clock=time.time):
        self.log_path = log_path
        self._clock = clock
        self._lock = threading.Lock()
        self._tasks = {}
        self._task_order = []
        self._annotators = {}
        self._events = 0
        # assignment indexes, maintained by _apply so replay rebuilds them too
        self._unassigned = {kind: {} for kind in TASK_KINDS}  # ordered id sets
        self._children = {}  # parent task id -> [subtask ids]
        if os.path.exists(log_path):
            self._replay()
        self._log_fh = open(log_path, "a", encoding="utf-8")

    def close(self):
        self._log_fh.close()

    # event plumbing -------------------------------------------------------
    def _replay(self):
        with open(self.log_path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"corrupt event log at line {lineno}: {exc}") from exc
                self._apply(event)

    def _append(self, event):
        event = dict(event)
        event.setdefault("timestamp", self._clock())
        self._log_fh.write(json.dumps(event, sort_keys=True) + "\n")
        self._log_fh.flush()
        self._apply(event)
        return event

    def _apply(self, event):
        """Pure state fold; no validation and no new events originate here."""
        kind = event["kind"]
        if kind == "annotator":
            profile = Annotator(event["annotator_id"], event["role"])
            self._annotators[profile.annotator_id] = profile
        elif kind == "onboarding":
            profile = self._annotators[event["annotator_id"]]
            profile.onboarding_score = event["score"]
            profile.onboarding_passed = event["passed"]
        elif kind == "task":
            task = Task(
                event["task_id"], event["sample_id"], event["task_kind"],
                parent_id=event.get("parent_id"),
            )
            if event.get("assigned_to"):
                task.state = "assigned"
                task.assigned_to = event["assigned_to"]
            else:
                self._unassigned[task.kind][task.task_id] = None
            self._tasks[task.task_id] = task
            self._task_order.append(task.task_id)
            if task.parent_id is not None:
                self._children.setdefault(task.parent_id, []).append(task.task_id)
        elif kind == "assign":
            task = self._tasks[event["task_id"]]
            task.state = "assigned"
            task.assigned_to = event["annotator_id"]
            self._unassigned[task.kind].pop(task.task_id, None)
        elif kind == "label":
            task = self._tasks[event["task_id"]]
            task.label = event["label"]
            if task.kind == "primary" and event["label"] == LABEL_UNDECIDED:
                task.state = "escalated"
            else:
                task.state = "labeled"
                if task.kind == "primary":
                    task.final_label = event["label"]
        elif kind == "resolve":
            task = self._tasks[event["task_id"]]
            task.state = "resolved"
            task.final_label = event["final_label"]
        else:
            raise ValidationError(f"unknown event kind {kind!r}")
        self._events += 1

    # annotators -----------------------------------------------------------
    def register_annotator(self, annotator_id: str, role: str = "worker"):
        if role not in ROLES:
            raise ArgumentError(f"role must be one of {ROLES}")
        if not annotator_id:
            raise ArgumentError("annotator id must be nonempty")
        with self._lock:
            if annotator_id in self._annotators:
                raise ConflictError(f"annotator {annotator_id!r} already registered")
            self._append({"kind": "annotator", "annotator_id": annotator_id, "role": role})
            return self._annotators[annotator_id].to_dict()

    def complete_onboarding(self, annotator_id: str, answers, gold):
        """Grade a worker's onboarding answers and record the outcome."""
        with self._lock:
            if annotator_id not in self._annotators:
                raise ValidationError(f"unknown annotator {annotator_id!r}")
            score, passed = grade_onboarding(answers, gold)
            self._append({
                "kind": "onboarding", "annotator_id": annotator_id,
                "score": score, "passed": passed,
            })
            return score, passed

    def annotator(self, annotator_id: str):
        with self._lock:
            if annotator_id not in self._annotators:
                raise ValidationError(f"unknown annotator {annotator_id!r}")
            return self._annotators[annotator_id].to_dict()

    # task creation --------------------------------------------------------
    def select_candidates(self, corpus: Corpus):
        """Create one primary task per negative-labeled sample; positives are
        kept as-is. Already-created tasks are not duplicated."""
        created = []
        with self._lock:
            existing = {t.sample_id for t in self._tasks.values() if t.kind == "primary"}
            for sample in corpus.samples:
                if sample.label == 0 and sample.id not in existing:
                    task_id = f"primary-{sample.id}"
                    self._append({
                        "kind": "task", "task_id": task_id,
                        "sample_id": sample.id, "task_kind": "primary",
                    })
                    created.append(self._tasks[task_id].to_dict())
        return created

    # assignment -----------------------------------------------------------
    def _sibling_ids(self, parent_id):
        return self._children.get(parent_id, [])

    def _eligible(self, task: Task, annotator: Annotator) -> bool:
        if annotator.role == "worker":
            return task.kind == "primary"
        if task.kind != "expert":
            return False
        # one vote per expert per escalated task
        for sib_id in self._sibling_ids(task.parent_id):
            if self._tasks[sib_id].assigned_to == annotator.annotator_id:
                return False
        return True

    def next_task(self, annotator_id: str):
        """Atomically hand the caller the oldest eligible unassigned task."""
        with self._lock:
            annotator = self._annotators.get(annotator_id)
            if annotator is None:
                raise ValidationError(f"unknown annotator {annotator_id!r}")
            if annotator.role == "worker" and not annotator.onboarding_passed:
                raise AuthorizationError(
                    f"annotator {annotator_id!r} has not passed onboarding"
                )
            kinds = ("primary",) if annotator.role == "worker" else ("expert",)
            chosen = None
            for kind in kinds:
                for task_id in self._unassigned[kind]:
                    if self._eligible(self._tasks[task_id], annotator):
                        chosen = task_id
                        break
                if chosen is not None:
                    break
            if chosen is None:
                return None
            self._append({
                "kind": "assign", "task_id": chosen, "annotator_id": annotator_id,
            })
            return self._tasks[chosen].to_dict()

    # labeling -------------------------------------------------------------
    def submit_label(self, annotator_id: str, task_id: str, label: str):
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise ValidationError(f"unknown task {task_id!r}")
            if task.state != "assigned" or task.assigned_to != annotator_id:
                if task.assigned_to == annotator_id and task.state in ("labeled", "escalated", "resolved"):
                    raise ConflictError(f"task {task_id!r} was already labeled")
                raise ConflictError(f"task {task_id!r} is not assigned to {annotator_id!r}")
            if label not in WIRE_LABELS:
                raise ArgumentError(f"label must be one of {WIRE_LABELS}")
            if task.kind == "expert" and label == LABEL_UNDECIDED:
                raise ArgumentError("expert review must decide: Undecided is not allowed")
            event = self._append({
                "kind": "label", "task_id": task_id,
                "annotator_id": annotator_id, "label": label,
            })
            if task.kind == "primary" and label == LABEL_UNDECIDED:
                self._spawn_expert_subtasks(task)
            elif task.kind == "expert":
                self._maybe_resolve_parent(task.parent_id)
            return event

    def _spawn_expert_subtasks(self, parent: Task):
        for k in range(1, EXPERT_VOTES + 1):
            self._append({
                "kind": "task", "task_id": f"{parent.task_id}.e{k}",
                "sample_id": parent.sample_id, "task_kind": "expert",
                "parent_id": parent.task_id,
            })

    def _maybe_resolve_parent(self, parent_id):
        votes = []
        for sib_id in self._sibling_ids(parent_id):
            sib = self._tasks[sib_id]
            if sib.state != "labeled":
                return
            votes.append(sib.label)
        if len(votes) == EXPERT_VOTES:
            final = LABEL_SARCASM if votes.count(LABEL_SARCASM) >= 2 else LABEL_NOT_SARCASM
            self._append({
                "kind": "resolve", "task_id": parent_id,
                "final_label": final, "votes": votes,
            })

    def resolve_escalated(self, task_id: str, expert_labels, expert_ids=None):
        """Apply three expert votes to an escalated task in one call.

        The default reviewer panel is the first three registered experts.
        Majority of the votes becomes the final label.
        """
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise ValidationError(f"unknown task {task_id!r}")
            if task.state != "escalated":
                raise ConflictError(f"task {task_id!r} is not escalated")
            labels = list(expert_labels)
            if len(labels) != EXPERT_VOTES:
                raise ArgumentError(f"exactly {EXPERT_VOTES} expert labels required")
            for label in labels:
                if label not in FINAL_LABELS:
                    raise ArgumentError(
                        "expert labels must be Sarcasm or NotSarcasm"
                    )
            if expert_ids is None:
                expert_ids = sorted(
                    a.annotator_id for a in self._annotators.values() if a.role == "expert"
                )[:EXPERT_VOTES]
            expert_ids = list(expert_ids)
            if len(set(expert_ids)) != EXPERT_VOTES:
                raise ArgumentError(f"{EXPERT_VOTES} distinct expert annotators required")
            for eid in expert_ids:
                profile = self._annotators.get(eid)
                if profile is None or profile.role != "expert":
                    raise ValidationError(f"{eid!r} is not a registered expert")
            subtask_ids = self._sibling_ids(task_id)
            if any(self._tasks[sid].state != "unassigned" for sid in subtask_ids):
                raise ConflictError(
                    f"expert review of {task_id!r} already started via polling"
                )
            for sid, eid, label in zip(subtask_ids, expert_ids, labels):
                self._append({"kind": "assign", "task_id": sid, "annotator_id": eid})
                self._append({
                    "kind": "label", "task_id": sid, "annotator_id": eid, "label": label,
                })
            self._maybe_resolve_parent(task_id)
            return self._tasks[task_id].final_label

    # review and export ----------------------------------------------------
    def _final_primary_labels(self):
        out = {}
        for task_id in self._task_order:
            task = self._tasks[task_id]
            if task.kind == "primary" and task.final_label in FINAL_LABELS:
                out[task.sample_id] = task.final_label
        return out

    def sample_double_check(self, n: int = 1000, seed: int = 0, annotator_id: str = "double-check"):
        """Draw a seeded uniform sample of finished primary annotations and
        queue them, pre-assigned, for an independent re-annotation pass."""
        with self._lock:
            finished = sorted(self._final_primary_labels().keys())
            if n < 0:
                raise ArgumentError("sample size must be nonnegative")
            if n > len(finished):
                raise ArgumentError(
                    f"requested {n} double-check items but only {len(finished)} are finished"
                )
            if annotator_id not in self._annotators:
                self._append({"kind": "annotator", "annotator_id": annotator_id, "role": "worker"})
                self._append({
                    "kind": "onboarding", "annotator_id": annotator_id,
                    "score": 1.0, "passed": True,
                })
            rng = np.random.Generator(np.random.PCG64(seed))
            chosen = sorted(rng.choice(len(finished), size=n, replace=False).tolist())
            created = []
            for idx in chosen:
                sample_id = finished[idx]
                task_id = f"dc-{sample_id}"
                if task_id in self._tasks:
                    continue
                self._append({
                    "kind": "task", "task_id": task_id, "sample_id": sample_id,
                    "task_kind": "double_check", "assigned_to": annotator_id,
                })
                created.append(task_id)
            return created

    def kappa_report(self) -> KappaReport:
        """Agreement between the original pass and the double-check pass,
        over items where both passes produced a decided label."""
        with self._lock:
            finals = self._final_primary_labels()
            first = []
            second = []
            for task_id in self._task_order:
                task = self._tasks[task_id]
                if task.kind != "double_check" or task.state != "labeled":
                    continue
                if task.label not in FINAL_LABELS:
                    continue
                original = finals.get(task.sample_id)
                if original is None:
                    continue
                first.append(original)
                second.append(task.label)
            return cohen_kappa(first, second)

    def export_corrected(self, corpus: Corpus) -> Corpus:
        """Rewrite former negatives with their reviewed labels; everything
        else passes through unchanged. All primary tasks must be finished."""
        with self._lock:
            pending = [
                t.task_id
                for tid in self._task_order
                if (t := self._tasks[tid]).kind == "primary" and t.final_label is None
            ]
            if pending:
                shown = ", ".join(pending[:10])
                raise ValidationError(
                    f"{len(pending)} primary tasks still unresolved: {shown}"
                )
            finals = self._final_primary_labels()
        samples = []
        for s in corpus.samples:
            label = s.label
            if s.id in finals:
                label = LABEL_TO_INT[finals[s.id]]
            samples.append(Sample(id=s.id, text=s.text, image_ref=s.image_ref,
                                  label=label, split=s.split))
        return Corpus(samples)

    # reporting ------------------------------------------------------------
    def progress(self) -> dict:
        with self._lock:
            by_kind = {}
            for task in self._tasks.values():
                slot = by_kind.setdefault(task.kind, {s: 0 for s in TASK_STATES})
                slot[task.state] += 1
            primary = by_kind.get("primary", {s: 0 for s in TASK_STATES})
            done = primary["labeled"] + primary["resolved"]
            total = sum(primary.values())
            return {
                "tasks_by_kind": by_kind,
                "primary_total": total,
                "primary_finished": done,
                "primary_remaining": total - done,
                "annotators": len(self._annotators),
                "events": self._events,
            }

    def tasks_snapshot(self) -> dict:
        with self._lock:
            return {tid: self._tasks[tid].to_dict() for tid in self._task_order}

    def write_snapshot(self, path):
        snapshot = {
            "tasks": self.tasks_snapshot(),
            "annotators": {a: p.to_dict() for a, p in self._annotators.items()},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(snapshot, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return snapshot
