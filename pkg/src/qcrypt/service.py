"""HTTP front end over the experiment runner."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import experiments as E
from .errors import DomainError
from .models import ExperimentRequest

app = FastAPI(title="qcrypt experiments")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/experiments")
def list_experiments() -> dict:
    return {name: {"defaults": exp.defaults, "choices": exp.choices, "help": exp.help,
                   "threshold_note": exp.note}
            for name, exp in E.EXPERIMENTS.items()}


@app.post("/experiments/{name}")
def run_experiment(name: str, req: ExperimentRequest) -> dict:
    if name not in E.EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"unknown experiment {name!r}")
    try:
        report = E.run(name, req.params, req.seed, req.trials, req.jobs)
    except DomainError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return report.to_dict(timing=True)
