import json
import math

import numpy as np
import pytest

from polyan import cli, codecs, config
from polyan.tools import harmonic, rado, sampling
from polyan.tools.polycore import PolyAnalytic


@pytest.fixture
def quotient_json(tmp_path, unimodular_quotient):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(codecs.polyanalytic_to_json(unimodular_quotient)))
    return str(path)


@pytest.fixture
def zzbar():
    return PolyAnalytic.z() * PolyAnalytic.zbar()


@pytest.fixture
def patch_csv(tmp_path):
    path = tmp_path / "patch.csv"
    codecs.write_gridfield(rado.sample_patch(harmonic.disc(1.9, 1 / 32)), path)
    return str(path)


def _report(path):
    return json.loads(path.read_text())


def test_modulus_of_unimodular_quotient(tmp_path, quotient_json):
    out = tmp_path / "report.json"
    assert cli.run(["modulus", "--in", quotient_json, "--out", str(out)]) == 0
    report = _report(out)
    assert report["command"] == "modulus"
    assert report["constant_modulus"]
    assert report["C"] == pytest.approx(1.0, abs=1e-10)


def test_eval_at_a_regular_point(tmp_path, quotient_json):
    out = tmp_path / "value.json"
    assert cli.run(["eval", "--in", quotient_json, "--at", "0.5i", "--out", str(out)]) == 0
    re, im = _report(out)["value"]
    assert re**2 + im**2 == pytest.approx(1.0, abs=1e-12)


def test_eval_with_garbage_point_is_a_usage_error(quotient_json):
    assert cli.run(["eval", "--in", quotient_json, "--at", "nonsense"]) == 2


def test_eval_at_the_pole_is_a_usage_error(quotient_json):
    assert cli.run(["eval", "--in", quotient_json, "--at", "1"]) == 2


def test_missing_input_file(tmp_path):
    assert cli.run(["order", "--in", str(tmp_path / "absent.json")]) == 2


def test_unknown_command_and_missing_command():
    assert cli.run(["frobnicate"]) == 2
    assert cli.run([]) == 2


def test_rado_on_the_patch_is_a_negative_verdict(tmp_path, patch_csv):
    out = tmp_path / "rado.json"
    assert cli.run(["rado", "--in", patch_csv, "--q", "2", "--out", str(out)]) == 1
    assert _report(out)["verdict"] == "fails"


def test_reports_are_deterministic(tmp_path, quotient_json):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert cli.run(["order", "--in", quotient_json, "--q", "2", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert _report(first)["exact_order"] == [2]


def test_defaults_table(tmp_path):
    out = tmp_path / "defaults.json"
    assert cli.run(["--defaults", "--out", str(out)]) == 0
    table = _report(out)
    assert table["symbolic_zero"] == config.Tolerances().symbolic_zero
    assert table["polydisc_nodes"] == 16


def test_tolerance_overrides_are_validated(quotient_json):
    assert cli.run(["modulus", "--in", quotient_json, "--set", "no_such_field=1"]) == 2
    assert cli.run(["modulus", "--in", quotient_json, "--set", "modulus_tol=-1"]) == 2
    assert cli.run(["hartogs", "--in", quotient_json, "--tol", "1e-3"]) == 2


def test_overrides_do_not_leak(quotient_json):
    before = config.DEFAULTS
    cli.run(["modulus", "--in", quotient_json, "--tol", "1e-6"])
    assert config.DEFAULTS is before


def test_levi_of_a_builtin(tmp_path):
    source = tmp_path / "sphere.json"
    source.write_text(json.dumps({"builtin": "sphere"}))
    out = tmp_path / "levi.json"
    assert cli.run(["levi", "--in", str(source), "--out", str(out)]) == 0
    assert _report(out)["eigenvalues"] == [1.0]
    source.write_text(json.dumps({"builtin": "negative"}))
    assert cli.run(["levi", "--in", str(source), "--out", str(out)]) == 1


# --- point sets --------------------------------------------------------------------------


def _pointset_csv(tmp_path, name, angles, f):
    E = sampling.lines_through(0j, angles)
    path = tmp_path / name
    codecs.write_pointset(E.with_values(f.eval(E.points)), path)
    return path


def test_fit_recovers_zzbar_on_two_lines(tmp_path, zzbar):
    source = _pointset_csv(tmp_path, "E.csv", [0.0, math.pi / 2], zzbar)
    out = tmp_path / "fit.json"
    assert cli.run(["fit", "--in", str(source), "--q", "2", "--degree", "1", "--out", str(out)]) == 0
    report = _report(out)
    assert report["residual"] < 1e-10
    f = codecs.polyanalytic_from_json(report["f"])
    assert f.coefficient((1,)).num.coefficient((1,)) == pytest.approx(1.0, abs=1e-10)


def test_fit_on_one_line_is_a_negative_verdict(tmp_path, zzbar):
    source = _pointset_csv(tmp_path, "E.csv", [0.4], zzbar)
    out = tmp_path / "fit.json"
    assert cli.run(["fit", "--in", str(source), "--q", "2", "--degree", "1", "--out", str(out)]) == 1
    report = _report(out)
    assert report["verdict"] == "negative"
    assert report["error"] == "RankDeficient"


def test_fit_rejects_an_empty_value_cell(tmp_path, zzbar):
    source = _pointset_csv(tmp_path, "E.csv", [0.0, math.pi / 2], zzbar)
    lines = source.read_text().splitlines()
    head = lines[0].split(",")
    cells = lines[3].split(",")
    cells[head.index("f_re")] = ""
    lines[3] = ",".join(cells)
    source.write_text("\n".join(lines) + "\n")
    assert cli.run(["fit", "--in", str(source), "--q", "2"]) == 2


def test_directions_against_a_claimed_order(tmp_path, zzbar):
    source = _pointset_csv(tmp_path, "E.csv", [0.0, math.pi / 2], zzbar)
    out = tmp_path / "directions.json"
    assert cli.run(["directions", "--in", str(source), "--q", "2", "--out", str(out)]) == 0
    report = _report(out)
    assert report["order"] == 2
    assert report["condensation_order_at_least_q"]
    assert cli.run(["directions", "--in", str(source), "--q", "3", "--out", str(out)]) == 1
    assert not _report(out)["condensation_order_at_least_q"]


# --- lattice commands --------------------------------------------------------------------


def test_dirichlet_on_the_disc(tmp_path):
    domain = tmp_path / "disc.json"
    domain.write_text(json.dumps({"h": 1 / 16, "radius": 1.0}))
    data = tmp_path / "z.json"
    data.write_text(json.dumps(codecs.polyanalytic_to_json(PolyAnalytic.z())))
    out = tmp_path / "dirichlet.json"
    assert cli.run(["dirichlet", "--in", str(domain), "--in", str(data), "--out", str(out)]) == 0
    report = _report(out)
    assert report["max_abs"] == pytest.approx(1.0, abs=0.1)
    assert report["conjugate"]["cauchy_riemann_residual"] < 1e-2


def test_dirichlet_needs_boundary_data(tmp_path):
    domain = tmp_path / "disc.json"
    domain.write_text(json.dumps({"h": 1 / 16, "radius": 1.0}))
    assert cli.run(["dirichlet", "--in", str(domain)]) == 2


def test_rado_on_a_symbolic_input(tmp_path):
    zzbar = tmp_path / "zzbar.json"
    zzbar.write_text(json.dumps(codecs.polyanalytic_to_json(PolyAnalytic.z() * PolyAnalytic.zbar())))
    out = tmp_path / "rado.json"
    assert cli.run(["rado", "--in", str(zzbar), "--q", "2", "--h", "0.0625", "--out", str(out)]) == 0
    report = _report(out)
    assert report["verdict"] == "extends"
    assert report["dbar_residual"] <= report["scheme_bound"]


@pytest.fixture
def polydisc_csv(tmp_path):
    S = rado.sample_polydisc(lambda p: np.conj(p[:, 0]) * p[:, 1] + np.conj(p[:, 1]) ** 2, 2)
    path = tmp_path / "polydisc.csv"
    codecs.write_polydisc(S, path)
    return str(path)


def test_hartogs_verdicts(tmp_path, polydisc_csv):
    out = tmp_path / "hartogs.json"
    assert cli.run(["hartogs", "--in", polydisc_csv, "--alpha", "2,3", "--out", str(out)]) == 0
    assert _report(out)["verdict"] == "jointly-polyanalytic"
    assert cli.run(["hartogs", "--in", polydisc_csv, "--alpha", "1,3", "--out", str(out)]) == 1
    report = _report(out)
    assert report["verdict"] == "slice-violation"
    assert report["variable"] == 1


def test_hartogs_needs_alpha(polydisc_csv):
    assert cli.run(["hartogs", "--in", polydisc_csv]) == 2
    assert cli.run(["hartogs", "--in", polydisc_csv, "--alpha", "2,x"]) == 2


# --- hypersurfaces -----------------------------------------------------------------------


@pytest.fixture
def sphere_json(tmp_path):
    path = tmp_path / "sphere.json"
    path.write_text(json.dumps({"builtin": "sphere"}))
    return str(path)


def _witness_json(tmp_path, doc):
    path = tmp_path / f"{doc['kind']}.json"
    path.write_text(json.dumps(doc))
    return str(path)


_BALK = {
    "kind": "balk_quotient",
    "n": 2,
    "lambda": [0, 2],
    "Q": [{"pow": [1, 0], "re": 1}, {"pow": [0, 0], "re": -3}],
}
_SQUARED = {"kind": "squared_modulus", "n": 2, "P": [{"pow": [1, 0], "re": 1}]}


def test_discs_with_and_without_a_witness(tmp_path, sphere_json):
    out = tmp_path / "discs.json"
    assert cli.run(["discs", "--in", sphere_json, "--out", str(out)]) == 0
    assert _report(out)["family"]["discs"] > 50
    witness = _witness_json(tmp_path, _BALK)
    assert cli.run(["discs", "--in", sphere_json, "--in", witness, "--out", str(out)]) == 0
    assert _report(out)["bmmp"]["holds"]


def test_discs_with_a_pole_on_a_disc(tmp_path, sphere_json):
    pole = dict(_BALK, Q=[{"pow": [1, 0], "re": 1}])
    assert cli.run(["discs", "--in", sphere_json, "--in", _witness_json(tmp_path, pole)]) == 2


def test_trace_verdicts(tmp_path, sphere_json):
    out = tmp_path / "trace.json"
    balk = _witness_json(tmp_path, _BALK)
    assert cli.run(["trace", "--in", sphere_json, "--in", balk, "--out", str(out)]) == 0
    assert _report(out)["verdict"] == "constant_trace"
    squared = _witness_json(tmp_path, _SQUARED)
    assert cli.run(["trace", "--in", sphere_json, "--in", squared, "--out", str(out)]) == 1
    assert _report(out)["verdict"] == "non_constant_trace"


def test_trace_needs_a_witness(sphere_json):
    assert cli.run(["trace", "--in", sphere_json]) == 2
