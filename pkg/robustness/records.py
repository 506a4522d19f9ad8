from __future__ import annotations

import logging
from datetime import datetime

from django.db import transaction
from packaging.version import Version

from mxrob import __version__

from .experiments import SweepResult
from .models import ExperimentRun, ResultPoint


logger = logging.getLogger(__name__)


def record_run(
    result: SweepResult,
    *,
    started_at: datetime,
    finished_at: datetime,
    wall_time_seconds: float,
    output_dir: str,
) -> ExperimentRun:
    """Store a finished run and its points in output order."""
    config = result.config
    with transaction.atomic():
        run = ExperimentRun.objects.create(
            command=result.command.value,
            preset=config.preset or "",
            config=config.snapshot(),
            master_seed=config.seed,
            tool_version=__version__,
            started_at=started_at,
            finished_at=finished_at,
            wall_time_seconds=wall_time_seconds,
            output_dir=output_dir,
        )
        ResultPoint.objects.bulk_create([
            ResultPoint(run=run, ordinal=i, **payload)
            for i, payload in enumerate(result.points())
        ])
    logger.info("recorded run %s (%d points)", run.pk, run.points.count())
    return run


def version_drift(run: ExperimentRun) -> str | None:
    """A warning text when the run was recorded by a different major version."""
    recorded, current = Version(run.tool_version), Version(__version__)
    if recorded.major != current.major:
        return f"run {run.pk} was recorded with version {recorded}, this is {current}"
    return None
