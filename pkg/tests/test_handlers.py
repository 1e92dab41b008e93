"""
Тесты для отчётов и командной строки.
"""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
from numpy.testing import assert_allclose

from config import DEFAULT_TOLERANCES, MODELS_DIR
from handlers import (
    CRITERIA, adjoint_report, friedrichs_report, pairing_report, phase_mutation, render, run_suite,
    selfadjoint_report, spectrum_report, three_routes,
)
from handlers.report_utils import ROUTE_CLOSED, ROUTE_CONTOUR, ROUTE_XSPACE, round_real, to_plain
from main import main
from spectral.errors import SUITE_FAILURE_EXIT, ModelFormatError, NotPositive
from spectral.extension_calculus import DomainSubspace
from spectral.model_io import load_model


def model_path(name):
    return os.path.join(MODELS_DIR, f"{name}.json")


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class TestReportUtils(unittest.TestCase):
    """Тесты для сериализации отчётов."""

    def test_rounding(self):
        self.assertEqual(round_real(-0.0), 0.0)
        self.assertEqual(round_real(0.1 + 0.2), 0.3)

    def test_plain_values(self):
        plain = to_plain({"z": 1j, "m": np.eye(2), "flag": np.bool_(True), 3: (1, 2)})
        self.assertEqual(plain["z"], [0.0, 1.0])
        self.assertEqual(plain["m"], [[1.0, 0.0], [0.0, 1.0]])
        self.assertIs(plain["flag"], True)
        self.assertEqual(plain["3"], [1, 2])

    def test_render_modes(self):
        report = {"command": "x", "value": 1, "tables": {"Таблица": (["a", "b"], [[1, 2]])}}
        self.assertNotIn("tables", json.loads(render(report, "json")))
        text = render(report, "text")
        self.assertIn("Таблица", text)
        self.assertIn("value: 1", text)


class TestReports(unittest.TestCase):
    """Тесты для отчётов подкоманд на комплектных моделях."""

    tol = DEFAULT_TOLERANCES

    def test_empty_spectrum(self):
        report = spectrum_report(load_model(model_path("shifted")), self.tol)
        self.assertEqual(report["dim_E"], 0)
        self.assertEqual(report["note"], "D_min = D_max")

    def test_pairing_in_dictionary_coordinates(self):
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = os.path.join(tmp, "gram.csv")
            report = pairing_report(load_model(model_path("cex1_a2")), self.tol, 1, csv_path=csv_path)
            self.assertTrue(os.path.exists(csv_path))
        self.assertTrue(report["nondegenerate"])
        assert_allclose(report["gram_dictionary"]["G"], [[0, 1j], [1j, 0]], atol=1e-9)

    def test_friedrichs_is_cutoff(self):
        """D_F для σ² порождается ω."""
        report = friedrichs_report(load_model(model_path("cex1_a2")), self.tol, 1)
        self.assertTrue(report["selfadjoint"])
        self.assertTrue(report["saturated"])
        self.assertEqual(report["domain"]["dim"], 1)
        assert_allclose(report["domain_dictionary"]["coords"], [[1], [0]], atol=1e-9)

    def test_friedrichs_requires_positivity(self):
        with self.assertRaises(NotPositive):
            friedrichs_report(load_model(model_path("beta_minus_b05")), self.tol, 1)

    def test_family_member(self):
        report = selfadjoint_report(load_model(model_path("beta_minus_b05")), self.tol, 1, theta=0.7)
        self.assertTrue(report["selfadjoint"])
        self.assertEqual(report["theta"], 0.7)

    def test_selfadjoint_needs_domain(self):
        with self.assertRaises(ModelFormatError):
            selfadjoint_report(load_model(model_path("cex1_a2")), self.tol, 1)

    def test_adjoint_of_full_space(self):
        model = load_model(model_path("cex1_a06"))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "full.json")
            labels = [(0j, 1, n) for n in range(4)]
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(DomainSubspace.full(labels).to_json(), fh)
            report = adjoint_report(model, self.tol, 1, path)
        self.assertEqual(report["adjoint_domain"]["dim"], 0)

    def test_domain_dimension_mismatch(self):
        model = load_model(model_path("cex1_a2"))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "small.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(DomainSubspace.full([(0j, 1, 0)]).to_json(), fh)
            with self.assertRaisesRegex(ModelFormatError, "dim E"):
                adjoint_report(model, self.tol, 1, path)


class TestSuite(unittest.TestCase):
    """Тесты для набора воспроизводимых проверок."""

    tol = DEFAULT_TOLERANCES

    def test_selected_criteria_pass(self):
        report = run_suite(self.tol, 1, only=["cex1-gram", "beta-minus", "index"])
        self.assertEqual([r["criterion"] for r in report["results"]], ["cex1-gram", "beta-minus", "index"])
        self.assertTrue(report["passed"])

    def test_full_suite_passes(self):
        report = run_suite(self.tol, 1)
        self.assertEqual(len(report["results"]), len(CRITERIA))
        for result in report["results"]:
            with self.subTest(criterion=result["criterion"]):
                self.assertEqual(result["status"], "PASS", result["details"])
        self.assertTrue(report["passed"])

    def test_multiplicity_criteria_pass(self):
        only = ["adjoint-multiplicities", "even-multiplicities", "friedrichs-below-axis"]
        report = run_suite(self.tol, 1, only=only)
        self.assertEqual([r["criterion"] for r in report["results"]], only)
        self.assertTrue(report["passed"])

    def test_three_routes_without_real_points(self):
        """σ² + 0.25: [ω x^{∓1/2}, ω x^{∓1/2}] = [[0, −1], [1, 0]] всеми маршрутами."""
        values = three_routes(load_model(model_path("beta_plus")), self.tol, 1)
        closed = values[ROUTE_CLOSED]
        assert_allclose(closed, [[0, -1], [1, 0]], atol=1e-9)
        assert_allclose(values[ROUTE_CONTOUR], closed, atol=1e-8)
        assert_allclose(values[ROUTE_XSPACE], closed, atol=1e-6)

    def test_phase_mutation_is_caught(self):
        with phase_mutation():
            report = run_suite(self.tol, 1, only=["cex1-gram"])
        self.assertFalse(report["passed"])
        self.assertEqual(report["results"][0]["status"], "FAIL")


class TestCommandLine(unittest.TestCase):
    """Тесты для кодов завершения и вывода main."""

    def test_spectrum_json(self):
        code, out, _ = run_cli(["spectrum", model_path("cex1_a06"), "--json"])
        self.assertEqual(code, 0)
        doc = json.loads(out)
        self.assertEqual(doc["command"], "spectrum")
        self.assertEqual(doc["dim_E"], 4)
        self.assertEqual(len(doc["points"]), 3)

    def test_tolerance_flag_reaches_report(self):
        code, out, _ = run_cli(["chains", model_path("cex1_a2"), "--output", "json", "--tol-rank", "1e-7"])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["config"]["tol_rank"], 1e-7)

    def test_missing_model_exit_code(self):
        code, out, err = run_cli(["spectrum", model_path("absent")])
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("ошибка", err)

    def test_domain_error_exit_code(self):
        code, _, err = run_cli(["friedrichs", model_path("beta_minus_b05")])
        self.assertEqual(code, NotPositive.exit_code)
        self.assertIn("NotPositive", err)

    def test_suite_failure_exit_code(self):
        with phase_mutation():
            code, out, _ = run_cli(["reproduce-paper", "--only", "cex1-gram"])
        self.assertEqual(code, SUITE_FAILURE_EXIT)
        self.assertIn("FAIL", out)

    def test_pairing_text_output(self):
        code, out, _ = run_cli(["pairing", model_path("cex1_a2")])
        self.assertEqual(code, 0)
        self.assertIn("Матрица Грама", out)
        self.assertIn("iω log x", out)


if __name__ == "__main__":
    unittest.main()
