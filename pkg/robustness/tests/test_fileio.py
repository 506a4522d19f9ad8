import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from robustness.core import RngContract, joint_degree_histogram, product_poisson_histogram
from robustness.exceptions import ConfigError, EdgeListFormatError
from robustness.fileio import (
    parse_config_file,
    read_edge_list,
    read_histogram_csv,
    write_histogram_csv,
)
from robustness.netgen import GeneratorSpec


class FileTestCase(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path


class HistogramCsvTests(FileTestCase):
    def test_written_histogram_reads_back(self):
        for hist in (
            product_poisson_histogram((2, 3)),
            joint_degree_histogram(GeneratorSpec(("ba", "er"), 300, (2, 3)).generate(RngContract(4), 0)),
        ):
            path = write_histogram_csv(self.tmp / "hist.csv", hist)
            loaded = read_histogram_csv(path)
            self.assertEqual(loaded.entries, hist.entries)
            for a, b in zip(loaded.z, hist.z):
                self.assertAlmostEqual(a, b, places=12)

    def test_bad_cells_name_the_line(self):
        path = self.write("hist.csv", "k1,k2,p\n0,0,0.5\n1,x,0.5\n")
        with self.assertRaisesMessage(ConfigError, "hist.csv:3"):
            read_histogram_csv(path)

    def test_missing_columns_and_file(self):
        with self.assertRaises(ConfigError):
            read_histogram_csv(self.write("hist.csv", "k1,k2\n0,0\n"))
        with self.assertRaises(ConfigError):
            read_histogram_csv(self.tmp / "missing.csv")


class ConfigFileTests(FileTestCase):
    def test_comments_quotes_and_dashes(self):
        path = self.write("run.conf", (
            "# phase diagram\n"
            "\n"
            "N = 120\n"
            "z2 = 3   # second layer\n"
            "grid-step=0.5\n"
            'out = "my dir"\n'
        ))
        self.assertEqual(parse_config_file(path), {"n": "120", "z2": "3", "grid_step": "0.5", "out": "my dir"})

    def test_malformed_lines(self):
        with self.assertRaises(ConfigError):
            parse_config_file(self.write("a.conf", "runs = 3\nruns 4\n"))
        with self.assertRaises(ConfigError):
            parse_config_file(self.write("b.conf", "runs\n"))
        with self.assertRaises(ConfigError):
            parse_config_file(self.tmp / "missing.conf")


class EdgeListTests(FileTestCase):
    def test_header_and_rows(self):
        layer, n, edges = read_edge_list(self.write("l.edges", "# layer 2 n=4\n0 1\n\n2 3\n"))
        self.assertEqual((layer, n), (2, 4))
        self.assertEqual(edges.tolist(), [[0, 1], [2, 3]])
        with self.assertRaises(EdgeListFormatError):
            read_edge_list(self.write("bad.edges", "# layer 1 n=4\n0 one\n"))
