import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from robustness.fileio import read_edge_list, read_rows_csv
from robustness.models import ExperimentRun, ResultPoint


class MxrobCommandTestBase(TestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)
        overrides = override_settings(MXROB={**settings.MXROB, "OUTPUT_DIR": str(self.tmp / "output")})
        overrides.enable()
        self.addCleanup(overrides.disable)

    def mxrob(self, *args):
        out, err = StringIO(), StringIO()
        call_command("mxrob", *args, stdout=out, stderr=err)
        return out.getvalue(), err.getvalue()


class GenerateCommandTests(MxrobCommandTestBase):
    def test_er_layers(self):
        out_dir = self.tmp / "er"
        stdout, _ = self.mxrob("generate", "--n=5000", "--z1=1", "--z2=1", "--seed=3", f"--out={out_dir}")
        self.assertIn("generate done", stdout)
        for i in (1, 2):
            layer, n, edges = read_edge_list(out_dir / f"layer{i}.edges")
            self.assertEqual((layer, n, len(edges)), (i, 5000, 2500))
        meta = json.loads((out_dir / "generate.json").read_text())
        self.assertEqual(meta["seed"], 3)
        self.assertEqual(meta["network"]["edges_per_layer"], [2500, 2500])
        self.assertIn("wall_time_seconds", meta)
        self.assertIn("version", meta)
        self.assertEqual(meta["config"]["n_nodes"], 5000)

    def test_ba_layers(self):
        out_dir = self.tmp / "ba"
        self.mxrob("generate", "--n=100", "--topology=ba", "--z1=2", "--z2=2", f"--out={out_dir}")
        for i in (1, 2):
            self.assertEqual(len(read_edge_list(out_dir / f"layer{i}.edges")[2]), 99)
        rows = read_rows_csv(out_dir / "histogram.csv")
        self.assertEqual(list(rows[0]), ["k1", "k2", "p"])

    def test_invalid_degree(self):
        with self.assertRaises(CommandError):
            self.mxrob("generate", "--n=100", "--z1=-1", f"--out={self.tmp / 'bad'}")

    def test_odd_ba_degree(self):
        with self.assertRaisesMessage(CommandError, "z/2"):
            self.mxrob("generate", "--n=100", "--topology=ba", "--z1=3", "--z2=2", f"--out={self.tmp / 'bad'}")


class SweepCommandTests(MxrobCommandTestBase):
    def test_phase_writes_csvs_and_records_run(self):
        out_dir = self.tmp / "phase"
        self.mxrob(
            "phase", "--n=150", "--z1=2", "--z2=3", "--runs=2", "--grid-step=0.5",
            "--seed=4", f"--out={out_dir}",
        )
        phase = read_rows_csv(out_dir / "phase.csv")
        self.assertEqual(list(phase[0]), ["phi1", "phi2", "r_sim_mean", "r_sim_std", "r_theory", "lambda"])
        self.assertEqual(len(phase), 9)
        curve = read_rows_csv(out_dir / "threshold.csv")
        self.assertEqual(list(curve[0]), ["phi1", "phi2_c", "flag"])
        self.assertEqual(len(curve), 3)

        run = ExperimentRun.objects.get()
        self.assertEqual((run.command, run.master_seed, run.preset), ("phase", 4, ""))
        self.assertEqual(run.points.filter(kind="grid").count(), 9)
        self.assertEqual(run.points.filter(kind="curve").count(), 3)
        self.assertEqual(json.loads((out_dir / "phase.json").read_text())["run_id"], run.pk)

    def test_slice(self):
        out_dir = self.tmp / "slice"
        self.mxrob(
            "slice", "--n=150", "--z1=2", "--z2=3", "--runs=2", "--grid-step=0.25",
            "--phi1-values=0,0.5", "--attack=layer-targeted", f"--out={out_dir}",
        )
        rows = read_rows_csv(out_dir / "slice.csv")
        self.assertEqual(list(rows[0]), ["phi1", "phi2", "r_sim_mean", "r_sim_std", "r_theory"])
        self.assertEqual(len(rows), 10)

    def test_threshold(self):
        out_dir = self.tmp / "threshold"
        self.mxrob("threshold", "--z-values=1,2,3", f"--out={out_dir}")
        rows = read_rows_csv(out_dir / "threshold_vs_degree.csv")
        self.assertEqual(list(rows[0]), ["z", "phi_c_multiplex", "phi_c_layer", "attack_kind", "topology"])
        self.assertEqual(len(rows), 3)
        self.assertAlmostEqual(float(rows[1]["phi_c_multiplex"]), 0.75, delta=1e-6)
        self.assertAlmostEqual(float(rows[1]["phi_c_layer"]), 0.6340, delta=1e-4)

    def test_phase_with_histogram_from_generate(self):
        gen_dir = self.tmp / "gen"
        self.mxrob("generate", "--n=150", "--topology=ba", "--z1=2", "--z2=2", f"--out={gen_dir}")
        out_dir = self.tmp / "from-file"
        self.mxrob(
            "phase", "--n=150", "--topology=ba", "--z1=2", "--z2=2", "--runs=2", "--grid-step=0.5",
            f"--histogram={gen_dir / 'histogram.csv'}", f"--out={out_dir}",
        )
        self.assertEqual(len(read_rows_csv(out_dir / "phase.csv")), 9)
        run = ExperimentRun.objects.get(command="phase")
        self.assertEqual(run.config["histogram"], str(gen_dir / "histogram.csv"))

    def test_phase_rejects_multiplex_attack(self):
        with self.assertRaises(CommandError):
            self.mxrob("phase", "--n=100", "--attack=multiplex-random", f"--out={self.tmp / 'x'}")

    def test_preset_with_overrides(self):
        self.mxrob("preset", "fig3b", "--n=120", "--runs=2", "--grid-step=0.5")
        out_dir = self.tmp / "output" / "fig3b"
        self.assertEqual(len(read_rows_csv(out_dir / "phase.csv")), 9)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.preset, "fig3b")
        self.assertEqual(run.config["z"], [2.0, 3.0])
        meta = json.loads((out_dir / "phase.json").read_text())
        self.assertEqual(meta["preset"], "fig3b")
        self.assertTrue(meta["notes"])

    def test_config_file_and_cli_precedence(self):
        config = self.tmp / "run.conf"
        config.write_text(
            "# small phase diagram\n"
            "n = 120\n"
            "z1 = 2\n"
            "z2 = 3   # second layer\n"
            "runs = 3\n"
            "seed = 5\n"
            "grid-step = 0.5\n"
        )
        self.mxrob("phase", f"--config={config}", "--seed=9", f"--out={self.tmp / 'conf'}")
        run = ExperimentRun.objects.get()
        self.assertEqual(run.master_seed, 9)
        self.assertEqual(run.config["runs"], 3)
        self.assertEqual(run.config["n_nodes"], 120)

    def test_bad_config_file(self):
        config = self.tmp / "bad.conf"
        config.write_text("runs 3\n")
        with self.assertRaises(CommandError):
            self.mxrob("phase", f"--config={config}")
        with self.assertRaises(CommandError):
            self.mxrob("phase", f"--config={self.tmp / 'missing.conf'}")

    def test_persistence_can_be_disabled(self):
        with override_settings(MXROB={**settings.MXROB, "PERSIST_RUNS": False}):
            self.mxrob("threshold", "--z-values=2", f"--out={self.tmp / 'np'}")
        self.assertFalse(ExperimentRun.objects.exists())


class ReplayCommandTests(MxrobCommandTestBase):
    def run_phase(self):
        self.mxrob(
            "phase", "--n=120", "--z1=2", "--z2=3", "--runs=2", "--grid-step=0.5",
            "--attack=layer-targeted", "--seed=21", f"--out={self.tmp / 'replay'}",
        )
        return ExperimentRun.objects.get()

    def test_replay_matches(self):
        run = self.run_phase()
        stdout, _ = self.mxrob("replay", str(run.pk))
        self.assertIn("matches", stdout)

    def test_replay_detects_changed_results(self):
        run = self.run_phase()
        point = run.points.filter(kind="grid").first()
        point.r_sim_mean = 0.123
        point.save()
        with self.assertRaisesMessage(CommandError, "differs in 1 place"):
            self.mxrob("replay", str(run.pk))

    def test_replay_threshold_run(self):
        self.mxrob("threshold", "--z-values=2,4", f"--out={self.tmp / 'thr'}")
        run = ExperimentRun.objects.get()
        self.assertEqual(ResultPoint.objects.filter(run=run, kind="degree").count(), 2)
        stdout, _ = self.mxrob("replay", str(run.pk))
        self.assertIn("2 points identical", stdout)

    def test_replay_unknown_run(self):
        with self.assertRaises(CommandError):
            self.mxrob("replay", "999")

    def test_replay_generate_refused(self):
        self.mxrob("generate", "--n=50", f"--out={self.tmp / 'gen'}")
        run = ExperimentRun.objects.get()
        with self.assertRaises(CommandError):
            self.mxrob("replay", str(run.pk))

    def test_major_version_drift_warns(self):
        run = self.run_phase()
        ExperimentRun.objects.filter(pk=run.pk).update(tool_version="99.0.0")
        _, stderr = self.mxrob("replay", str(run.pk))
        self.assertIn("99.0.0", stderr)
