import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from django.utils import timezone

from mxrob import __version__
from robustness.exceptions import RobustnessError
from robustness.experiments import (
    PRESET_NOTES,
    PRESETS,
    Command as Sweep,
    ExperimentConfig,
    apply_settings,
    compute,
    network_metadata,
    preset_settings,
    replay_mismatches,
    write_outputs,
)
from robustness.fileio import parse_config_file, write_sidecar
from robustness.models import ExperimentRun
from robustness.records import record_run, version_drift


logger = logging.getLogger(__name__)


def _add_experiment_flags(parser):
    """Every flag has a config-file twin with the same name (dashes -> underscores)."""
    parser.add_argument("--config", type=str, default=None, help="Flat key=value config file; flags override it")
    parser.add_argument("--n", type=int, default=None, help="Number of multiplex nodes N")
    parser.add_argument("--z1", type=float, default=None, help="Mean degree of layer 1")
    parser.add_argument("--z2", type=float, default=None, help="Mean degree of layer 2")
    parser.add_argument("--topology", type=str, default=None, help="er or ba (or 'er,ba' per layer)")
    parser.add_argument(
        "--attack",
        choices=["layer-random", "layer-targeted", "multiplex-random", "multiplex-targeted"],
        default=None,
    )
    parser.add_argument("--phi1", type=float, default=None)
    parser.add_argument("--phi2", type=float, default=None)
    parser.add_argument("--phi", type=float, default=None, help="Removal fraction for multiplex attacks")
    parser.add_argument("--grid-step", type=float, default=None)
    parser.add_argument("--grid-min", type=float, default=None)
    parser.add_argument("--grid-max", type=float, default=None)
    parser.add_argument("--fine", action="store_const", const=True, default=None, help="Use the fine grid step")
    parser.add_argument("--phi1-values", type=str, default=None, help="Comma list of fixed phi1 values for slices")
    parser.add_argument("--z-values", type=str, default=None, help="Comma list of mean degrees for threshold tables")
    parser.add_argument("--runs", type=int, default=None, help="Ensemble size per point")
    parser.add_argument("--seed", type=int, default=None, help="Master seed in [0, 2^63)")
    parser.add_argument("--theory", choices=["analytic", "empirical"], default=None)
    parser.add_argument("--empirical-instances", type=int, default=None)
    parser.add_argument(
        "--histogram", type=str, default=None,
        help="Joint degree histogram CSV (k1,k2,p) to use as the theory law",
    )
    parser.add_argument("--workers", type=int, default=None, help="Worker processes for grid points")
    parser.add_argument(
        "--no-regenerate", dest="regenerate", action="store_const", const=False, default=None,
        help="Attack one fixed network instead of a fresh one per run",
    )
    parser.add_argument("--out", type=str, default=None, help="Output directory")


FLAG_KEYS = (
    "n", "z1", "z2", "topology", "attack", "phi1", "phi2", "phi", "grid_step", "grid_min",
    "grid_max", "fine", "phi1_values", "z_values", "runs", "seed", "theory",
    "empirical_instances", "histogram", "workers", "regenerate", "out",
)


class Command(BaseCommand):
    help = "Multiplex robustness experiments: generate | phase | slice | threshold | preset | replay"

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest="subcommand", required=True)

        for name, text in [
            ("generate", "Write one multiplex realization as edge lists + histogram"),
            ("phase", "Phase diagram over (phi1, phi2) with the threshold curve"),
            ("slice", "R as a function of phi2 for fixed phi1 values"),
            ("threshold", "Critical thresholds vs mean degree, multiplex vs layer attacks"),
        ]:
            _add_experiment_flags(sub.add_parser(name, help=text))

        preset = sub.add_parser("preset", help="Run a figure preset")
        preset.add_argument("name", choices=sorted(PRESETS))
        _add_experiment_flags(preset)

        replay = sub.add_parser("replay", help="Re-run a recorded run and compare its simulation columns")
        replay.add_argument("run_id", type=int)

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        try:
            if subcommand == "replay":
                self._replay(options)
                return
            command, config = self._resolve(subcommand, options)
            self._execute(command, config, options)
        except (RobustnessError, OSError) as exc:
            raise CommandError(str(exc)) from exc

    # -----------------------------------------------------------------

    def _resolve(self, subcommand, options):
        defaults = settings.MXROB
        preset_name = options.get("name") if subcommand == "preset" else None
        config = ExperimentConfig(
            runs=defaults["DEFAULT_RUNS"],
            grid_step=defaults["GRID_STEP"],
            workers=defaults["WORKERS"],
            empirical_instances=defaults["EMPIRICAL_INSTANCES"],
            out=str(Path(defaults["OUTPUT_DIR"]) / (preset_name or subcommand)),
        )
        fine_step = defaults["FINE_GRID_STEP"]

        if preset_name:
            command, values = preset_settings(preset_name)
            config = replace(apply_settings(config, values, fine_step), preset=preset_name)
        else:
            command = Sweep(subcommand)

        if options.get("config"):
            config = apply_settings(config, parse_config_file(Path(options["config"])), fine_step)

        flags = {key: options.get(key) for key in FLAG_KEYS}
        return command, apply_settings(config, flags, fine_step)

    def _execute(self, command, config, options):
        out_dir = Path(config.out)
        progress = options["verbosity"] >= 1 and sys.stderr.isatty()

        started_at = timezone.now()
        t0 = time.perf_counter()
        result = compute(command, config, progress=progress)
        files = write_outputs(result, out_dir)
        wall = time.perf_counter() - t0
        finished_at = timezone.now()

        run = None
        if settings.MXROB["PERSIST_RUNS"]:
            try:
                run = record_run(
                    result,
                    started_at=started_at,
                    finished_at=finished_at,
                    wall_time_seconds=wall,
                    output_dir=str(out_dir),
                )
            except DatabaseError as exc:
                self.stderr.write(self.style.WARNING(f"Run not recorded ({exc}); did you run 'migrate'?"))

        sidecar = write_sidecar(out_dir / f"{command.value}.json", {
            "command": command.value,
            "preset": config.preset,
            "config": config.snapshot(),
            "seed": config.seed,
            "version": __version__,
            "started_at": started_at.isoformat(),
            "finished_at": finished_at.isoformat(),
            "wall_time_seconds": wall,
            "run_id": run.pk if run else None,
            "notes": PRESET_NOTES,
            "network": network_metadata(result),
            "files": [str(f) for f in files],
        })

        for f in files:
            self.stdout.write(f"  {f}")
        self.stdout.write(self.style.SUCCESS(
            f"{command.value} done in {wall:.1f}s. Files: {len(files)}, metadata: {sidecar}"
            + (f", run id: {run.pk}" if run else "")
        ))

    def _replay(self, options):
        run = ExperimentRun.objects.filter(pk=options["run_id"]).first()
        if run is None:
            raise CommandError(f"No recorded run with id {options['run_id']}")
        if run.command == Sweep.GENERATE.value:
            raise CommandError("generate runs carry no result points to replay")

        drift = version_drift(run)
        if drift:
            self.stderr.write(self.style.WARNING(drift))

        config = ExperimentConfig.from_snapshot(run.config)
        result = compute(Sweep(run.command), config)
        problems = replay_mismatches(run.stored_points(), result.points())
        if problems:
            for line in problems[:20]:
                logger.warning("replay of run %s: %s", run.pk, line)
            raise CommandError(f"Replay of run {run.pk} differs in {len(problems)} place(s)")

        self.stdout.write(self.style.SUCCESS(
            f"Replay of run {run.pk} matches: {len(result.points())} points identical"
        ))
