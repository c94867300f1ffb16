import csv
import io
import json

import numpy as np
import pytest

from fraclap import special
from fraclap.cli import main
from fraclap.core import closed_form_M0
from fraclap.io import fmt_float, spectrum_to_csv
from fraclap.results import SpectrumEntry, SpectrumResult, merge_entries
from fraclap.errors import ValidationError


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_fmt_float_round_trip():
    for x in (np.pi, 1e-300, -2.0 / 3.0, 123456789.123456789):
        assert float(fmt_float(x)) == x


def test_spectrum_result_ordering():
    with pytest.raises(ValidationError):
        SpectrumResult([SpectrumEntry(2.0, 1, "pencil"), SpectrumEntry(1.0, 1, "pencil")], (0, 3))
    res = SpectrumResult([SpectrumEntry(-1.0, 1, "weyl_root"), SpectrumEntry(0.0, 2, "weyl_root")], (-5, 5))
    assert res.values == [-1.0, 0.0, 0.0] and res.num_nonpositive() == 3


def test_merge_prefers_coincidence():
    merged = merge_entries([SpectrumEntry(1.0, 1, "weyl_root"), SpectrumEntry(1.0 + 1e-9, 2, "dirichlet_coincidence")])
    assert len(merged) == 1 and merged[0].method == "dirichlet_coincidence" and merged[0].multiplicity == 2


def test_csv_locale_free():
    res = SpectrumResult([SpectrumEntry(0.5, 1, "pencil")], (0, 1))
    text = spectrum_to_csv(res, {"tool": "fraclap"})
    assert "0.5,1,pencil" in text and text.startswith("# tool=")


def test_spectrum_neumann_json(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, _, _ = run(
        ["spectrum", "--interval", "-1", "1", "--order", "0.75", "--bc", "neumann",
         "--lambda-max", "50", "--out", "json", "--output", str(out)],
        capsys,
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert sum(e["lambda"] < 0 for e in doc["eigenvalues"]) == 1
    meta = doc["metadata"]
    assert meta["N"] == 120 and meta["a"] == 0.75 and meta["interval"] == [-1.0, 1.0]
    assert "tolerances" in meta and "version" in meta


def test_spectrum_dirichlet_matches_dump(tmp_path, capsys):
    s, m = tmp_path / "s.json", tmp_path / "m.json"
    code, _, _ = run(["spectrum", "--bc", "dirichlet", "--lambda-max", "40", "--output", str(s), "--dump-model", str(m)], capsys)
    assert code == 0
    vals = [e["lambda"] for e in json.loads(s.read_text())["eigenvalues"]]
    ref = json.loads(m.read_text())["eigvals"]
    assert np.allclose(vals, ref[: len(vals)], rtol=1e-12)


def test_spectrum_kvn_csv(capsys):
    code, out, _ = run(["spectrum", "--bc", "kvn", "--lambda-max", "10", "--out", "csv"], capsys)
    assert code == 0
    first = csv_rows(out)[0]
    assert abs(float(first["lambda"])) < 1e-8 and first["multiplicity"] == "2"


def test_spectrum_classical_mode(capsys):
    code, out, _ = run(["spectrum", "--order", "1", "--interval", "0", "1", "--bc", "dirichlet", "--lambda-max", "100", "--out", "csv"], capsys)
    assert code == 0
    assert "mode=\"classical\"" in out
    vals = [float(r["lambda"]) for r in csv_rows(out)]
    assert np.allclose(vals, [np.pi**2, 4 * np.pi**2, 9 * np.pi**2], rtol=1e-12)


def test_spectrum_pencil_method(capsys):
    code, out, _ = run(["spectrum", "--bc", "neumann", "--method", "pencil", "--count", "3", "--out", "csv"], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 3 and float(rows[0]["lambda"]) < 0 and rows[0]["method"] == "pencil"


def test_output_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"o{i}.csv" for i in range(2)]
    for p in paths:
        assert run(["spectrum", "--bc", "neumann", "--lambda-max", "20", "--out", "csv", "--output", str(p)], capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_weyl_zero_row(capsys):
    code, out, _ = run(["weyl", "--interval", "0", "2.5", "--order", "0.6", "--lambdas", "0", "--out", "csv"], capsys)
    assert code == 0
    row = csv_rows(out)[0]
    M0 = closed_form_M0(0.6, 2.5)
    assert float(row["M11_re"]) == pytest.approx(M0[0, 0], abs=1e-12)
    assert float(row["M12_re"]) == pytest.approx(M0[0, 1], abs=1e-12)


def test_weyl_pole_marker_and_decay(capsys):
    code, out, err = run(["weyl", "--order", "1", "--interval", "0", "1", "--lambdas", f"{np.pi**2!r},-1,-100,-10000", "--out", "csv"], capsys)
    assert code == 0 and "pole" in err
    rows = csv_rows(out)
    assert rows[0]["status"] == "pole" and rows[0]["M11_re"] == ""
    inv = [float(r["inv_norm"]) for r in rows[1:]]
    assert inv[0] > inv[1] > inv[2]


def test_weyl_json_complex(capsys):
    code, out, _ = run(["weyl", "--lambdas", "1.0", "--out", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["rows"][0]["M"][0][0]) == 2


def test_weyl_grid(capsys):
    code, out, _ = run(["weyl", "--grid", "-10", "-1", "4", "--out", "csv"], capsys)
    assert code == 0 and len(csv_rows(out)) == 4


def test_validate_presets(capsys):
    code, out, _ = run(["validate", "--bc", "neumann", "--classify"], capsys)
    assert code == 0 and "nonnegative: false" in out and "sigma_min" in out
    code, out, _ = run(["validate", "--bc", "kvn", "--classify"], capsys)
    assert code == 0 and "nonnegative: true" in out


def test_validate_classical_classify(capsys):
    code, out, _ = run(["validate", "--order", "1", "--interval", "0", "1", "--bc", "neumann", "--classify"], capsys)
    assert code == 0 and "nonnegative: true" in out and "num_nonpositive: 1" in out


def test_validate_rank_one(tmp_path, capsys):
    p = tmp_path / "bc.json"
    p.write_text(json.dumps({"A": [[1, 0], [0, 0]], "B": [[0, 0], [0, 0]]}))
    code, out, _ = run(["validate", "--bc", str(p)], capsys)
    assert code == 2 and "valid: false" in out


def test_bc_file_complex(tmp_path, capsys):
    p = tmp_path / "bc.json"
    p.write_text(json.dumps({"A": [[1, 0], [0, 1]], "B": [[[1, 0], [0, 1]], [[0, -1], [2, 0]]]}))
    code, out, _ = run(["validate", "--bc", str(p)], capsys)
    assert code == 0 and "valid: true" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--order", "0.4"],
        ["spectrum", "--interval", "1", "0"],
        ["spectrum", "--bc", "no-such-preset"],
        ["weyl", "--lambdas", "a,b"],
    ],
)
def test_validation_exit_code(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_numerical_exit_code(capsys):
    code, _, err = run(["spectrum", "--basis", "20", "--bc", "neumann", "--lambda-max", "1e5"], capsys)
    assert code == 3 and "numerical failure" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"order": 0.6, "bc": "neumann", "out": "csv", "lambda_max": 5.0}))
    code, out, _ = run(["spectrum", "--config", str(cfg), "--order", "0.9"], capsys)
    assert code == 0 and "# a=0.9" in out and 'bc_label="neumann"' in out
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["spectrum", "--config", str(cfg)], capsys)[0] == 2


def test_selftest_filter_classical(capsys):
    code, out, _ = run(["selftest", "--filter", "classical"], capsys)
    assert code == 0 and "3/3 passed" in out


def test_selftest_fault_injection(capsys):
    code, out, _ = run(["selftest", "--filter", "classical", "--inject-fault", "gamma"], capsys)
    assert code == 1 and "FAIL" in out
    assert special._LOG_GAMMA_FAULT == 0.0
