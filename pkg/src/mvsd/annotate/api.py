"""HTTP annotation service.

Thin JSON layer over AnnotationStore: registration, onboarding, task
assignment, labeling, progress, agreement, and corrected-corpus export.
Images resolve against a local directory; the onboarding batch never leaks
its gold labels.
"""
from __future__ import annotations

import os
from urllib.parse import quote

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..corpus import Corpus, load_corpus, save_corpus
from ..errors import MvsdError
from .agreement import ONBOARDING_THRESHOLD
from .store import INT_TO_LABEL, AnnotationStore

STATUS_BY_CODE = {
    "parse": 400,
    "argument": 400,
    "validation": 400,
    "dimension": 400,
    "configuration": 400,
    "authorization": 403,
    "conflict": 409,
    "numeric": 500,
}


class RegisterRequest(BaseModel):
    annotator_id: str = Field(min_length=1)
    role: str = "worker"


class OnboardingAnswers(BaseModel):
    annotator_id: str
    answers: list[str]


class LabelRequest(BaseModel):
    annotator_id: str
    label: str


class DoubleCheckRequest(BaseModel):
    n: int = 1000
    seed: int = 0
    annotator_id: str = "double-check"


class ExportRequest(BaseModel):
    output_path: str


def load_gold(path) -> list:
    """Onboarding gold file: ordinary corpus JSONL, every sample labeled."""
    corpus = load_corpus(path)
    items = []
    for s in corpus.samples:
        if s.label is None:
            raise MvsdError(f"onboarding gold sample {s.id!r} has no label")
        items.append({
            "sample_id": s.id,
            "text": s.text,
            "image_ref": s.image_ref,
            "label": INT_TO_LABEL[s.label],
        })
    return items


def _image_url(image_ref: str) -> str:
    return "/images/" + quote(image_ref)


def create_app(
    store: AnnotationStore,
    corpus: Corpus,
    gold_items: list,
    images_dir=None,
    ui_dir=None,
) -> FastAPI:
    app = FastAPI(title="annotation service")
    samples = {s.id: s for s in corpus.samples}

    @app.exception_handler(MvsdError)
    async def _mvsd_error(_req: Request, exc: MvsdError):
        status = STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"error": exc.code, "message": str(exc)},
        )

    def _task_payload(task):
        if task is None:
            return {"task": None}
        sample = samples.get(task["sample_id"])
        return {
            "task": {
                "task_id": task["task_id"],
                "sample_id": task["sample_id"],
                "kind": task["kind"],
                "text": sample.text if sample else None,
                "image_ref": sample.image_ref if sample else None,
                "image_url": _image_url(sample.image_ref) if sample else None,
            }
        }

    @app.post("/api/annotators", status_code=201)
    def register(req: RegisterRequest):
        return store.register_annotator(req.annotator_id, req.role)

    @app.get("/api/onboarding/batch")
    def onboarding_batch():
        items = [
            {
                "sample_id": item["sample_id"],
                "text": item["text"],
                "image_ref": item["image_ref"],
                "image_url": _image_url(item["image_ref"]),
            }
            for item in gold_items
        ]
        return {"items": items, "threshold": ONBOARDING_THRESHOLD}

    @app.post("/api/onboarding/answers")
    def onboarding_answers(req: OnboardingAnswers):
        gold = [item["label"] for item in gold_items]
        score, passed = store.complete_onboarding(req.annotator_id, req.answers, gold)
        return {"annotator_id": req.annotator_id, "score": score, "passed": passed}

    @app.get("/api/tasks/next")
    def tasks_next(annotator_id: str):
        return _task_payload(store.next_task(annotator_id))

    @app.post("/api/tasks/{task_id}/label")
    def tasks_label(task_id: str, req: LabelRequest):
        event = store.submit_label(req.annotator_id, task_id, req.label)
        return {"event": event}

    @app.get("/api/progress")
    def progress():
        return store.progress()

    @app.get("/api/kappa")
    def kappa():
        return store.kappa_report().to_dict()

    @app.post("/api/double-check")
    def double_check(req: DoubleCheckRequest):
        task_ids = store.sample_double_check(
            n=req.n, seed=req.seed, annotator_id=req.annotator_id
        )
        return {"task_ids": task_ids, "count": len(task_ids)}

    @app.post("/api/export")
    def export(req: ExportRequest):
        corrected = store.export_corrected(corpus)
        save_corpus(corrected, req.output_path)
        positives = sum(1 for s in corrected.samples if s.label == 1)
        negatives = sum(1 for s in corrected.samples if s.label == 0)
        return {
            "output_path": req.output_path,
            "samples": len(corrected.samples),
            "positives": positives,
            "negatives": negatives,
        }

    @app.get("/images/{image_ref:path}")
    def image(image_ref: str):
        if images_dir is None:
            return JSONResponse(status_code=404, content={"error": "no image directory"})
        base = os.path.realpath(images_dir)
        target = os.path.realpath(os.path.join(base, image_ref))
        if not target.startswith(base + os.sep):
            return JSONResponse(status_code=400, content={"error": "invalid image path"})
        if not os.path.isfile(target):
            return JSONResponse(status_code=404, content={"error": "image not found"})
        return FileResponse(target)

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
