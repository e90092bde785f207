import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from compound_wiretap import cli, serialize
from compound_wiretap.errors import InputFormatError, ValidationError

DIAG21 = {"rows": 2, "cols": 2, "entries": [[[2, 0], [0, 0]], [[0, 0], [1, 0]]]}
BSC_FAMILY = {"states": [{"legit": [[0.9, 0.1], [0.1, 0.9]], "eaves": [[0.8, 0.2], [0.2, 0.8]]}]}


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return write


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def error_of(err):
    return json.loads(err)["error"]


# ---------------------------------------------------------------- channel files


def test_parse_canonical_matrix(files):
    kind, W = serialize.parse_channel_file(files("w.json", DIAG21))
    assert kind == "gram"
    np.testing.assert_array_equal(W, np.diag([2.0, 1.0]))
    kind, H = serialize.parse_channel_file(files("h.json", dict(DIAG21, kind="channel")))
    assert kind == "channel"


def test_parse_complex_entries(files):
    obj = {"rows": 2, "cols": 2, "entries": [[[2, 0], [0, 1]], [[0, -1], [1, 0]]]}
    kind, W = serialize.parse_channel_file(files("c.json", obj))
    assert W[0, 1] == 1j and W[1, 0] == -1j


def test_parse_eigen_format(files):
    obj = {"eigenvalues": [2, 1], "eigenvectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
    kind, W = serialize.parse_channel_file(files("e.json", obj))
    assert kind == "gram"
    np.testing.assert_allclose(W, np.diag([2.0, 1.0]))


def test_parse_rejects_non_hermitian_with_entry(files):
    obj = {"rows": 2, "cols": 2, "entries": [[[2, 0], [1, 0]], [[0, 0], [1, 0]]]}
    with pytest.raises(ValidationError, match=r"A\[0,1\]"):
        serialize.parse_channel_file(files("nh.json", obj))


def test_parse_rejects_malformed(files):
    with pytest.raises(InputFormatError, match="malformed JSON"):
        serialize.parse_channel_file(files("bad.json", "{not json"))
    with pytest.raises(InputFormatError, match="missing key"):
        serialize.parse_channel_file(files("m.json", {"rows": 2, "cols": 2}))
    with pytest.raises(InputFormatError, match="row 1"):
        serialize.parse_channel_file(files("r.json", {"rows": 2, "cols": 2, "entries": [[1, 0], [0]]}))
    with pytest.raises(InputFormatError, match="cannot read"):
        serialize.parse_channel_file("/nonexistent/file.json")


def test_parse_family_and_row_sum_rejection(files):
    kind, fam = serialize.parse_channel_file(files("f.json", BSC_FAMILY))
    assert kind == "family" and fam.sizes == (2, 2, 2)
    bad = {"states": [{"legit": [[0.9, 0.1], [0.1, 0.88]], "eaves": [[0.8, 0.2], [0.2, 0.8]]}]}
    with pytest.raises(ValidationError, match="state 0 legit: channel row 1"):
        serialize.parse_channel_file(files("b.json", bad))
    mism = {"states": [BSC_FAMILY["states"][0], {"legit": [[1, 0, 0], [0, 1, 0]], "eaves": [[0.5, 0.5], [0.5, 0.5]]}]}
    with pytest.raises(ValidationError, match="state 1"):
        serialize.parse_channel_file(files("mm.json", mism))


# ---------------------------------------------------------------- serialization


def test_report_round_trip_is_bit_exact():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50)
    rep = {"x": vals, "inf": math.inf, "ninf": -math.inf, "m": rng.standard_normal((2, 2)) + 0j}
    back = serialize.loads_report(serialize.dumps_report(rep))
    assert [float(v) for v in back["x"]] == [float(v) for v in vals]
    assert back["inf"] == math.inf and back["ninf"] == -math.inf
    entries = back["m"]["entries"]
    assert entries[1][0][0] == rep["m"][1, 0].real


def test_format_float_round_trip():
    for x in (0.1, 1 / 3, 2.0794415416798357, 5e-324, 1.7976931348623157e308):
        assert float(serialize.format_float(x)) == x


# ---------------------------------------------------------------- commands


def test_capacity_command(files):
    code, out, _ = run(["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--power", "1"])
    assert code == 0
    rep = json.loads(out)
    assert rep["capacity"] == pytest.approx(0.70663163291771, abs=1e-12)
    assert rep["active_modes"] == 2
    assert rep["beamforming_optimal"] is False
    assert rep["high_snr_asymptote"] == pytest.approx(math.log(8.0))
    assert rep["worst_case"]["eaves_gram"]["entries"][0][0] == [0.5, 0.0]


def test_capacity_bits_and_voltage(files):
    path = files("w.json", DIAG21)
    code, out, _ = run(["capacity", "--channel", path, "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--power", "1", "--bits"])
    assert json.loads(out)["capacity"] == pytest.approx(0.70663163291771 / math.log(2.0), abs=1e-12)
    code, out, _ = run(["capacity", "--channel", path, "--eaves-bound", str(math.sqrt(0.5)),
                        "--eaves-bound-kind", "voltage", "--power", "1"])
    assert json.loads(out)["parameters"]["eps_power"] == pytest.approx(0.5, abs=1e-15)


def test_double_sided_and_double_rank_commands(files):
    code, out, _ = run(["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--legit-bound", "0.2", "--power", "1"])
    rep = json.loads(out)
    assert rep["parameters"]["scenario"] == "double_sided"
    assert rep["capacity"] == pytest.approx(math.log((1 + (math.sqrt(2) - 0.2) ** 2) / 1.5), abs=1e-12)
    h = {"rows": 2, "cols": 2, "kind": "channel", "entries": [[math.sqrt(2), 0], [0, 0]]}
    code, out, _ = run(["worst-case", "--channel", files("h.json", h), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "voltage", "--legit-bound", "0.2", "--rank-bound", "1",
                        "--power", "1", "--seed", "3"])
    rep = json.loads(out)
    assert code == 0
    assert rep["capacity"] == pytest.approx(0.6828198669782247, abs=1e-12)
    assert set(rep["worst_case"]) == {"eaves_gram", "eaves_channel", "legit_gram", "legit_channel"}


def test_rank_violation_exit_3(files):
    code, out, err = run(["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.5",
                          "--eaves-bound-kind", "power", "--power", "1", "--rank-bound", "1"])
    assert code == 3 and out == ""
    e = error_of(err)
    assert e["exit_code"] == 3 and "r1=2" in e["message"]


@pytest.mark.parametrize(
    "argv",
    [
        ["capacity", "--eaves-bound", "0.5", "--eaves-bound-kind", "power", "--power", "1"],
        ["capacity", "--channel", "X", "--eaves-bound", "0.5", "--power", "1"],
        ["capacity", "--channel", "X", "--eaves-bound", "0.5", "--eaves-bound-kind", "power"],
        ["capacity", "--channel", "X", "--eaves-bound", "abc", "--eaves-bound-kind", "power", "--power", "1"],
        ["verify-saddle", "--channel", "X", "--eaves-bound", "0.5", "--eaves-bound-kind", "power", "--power", "1"],
        ["sweep", "--channel", "X", "--eaves-bound", "0.5", "--eaves-bound-kind", "power", "--power-range", "1:2"],
        ["bogus"],
        ["capacity", "--power", "1", "--power-range", "1:2:3"],
    ],
)
def test_parse_errors_exit_2(argv):
    code, _, err = run(argv)
    assert code == 2
    assert error_of(err)["type"] == "parse"


def test_negative_parameter_exit_3(files):
    code, _, err = run(["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "-0.5",
                        "--eaves-bound-kind", "power", "--power", "1"])
    assert code == 3


def test_malformed_channel_file_exit_2(files):
    code, _, err = run(["capacity", "--channel", files("b.json", "[1, 2"), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--power", "1"])
    assert code == 2 and "malformed" in error_of(err)["message"]


def test_convergence_error_exit_4(files, monkeypatch):
    from compound_wiretap import secrecy
    from compound_wiretap.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("bisection stalled")

    monkeypatch.setattr(secrecy, "capacity_isotropic", boom)
    code, _, err = run(["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--power", "1"])
    assert code == 4 and error_of(err)["type"] == "convergence"


def test_verify_saddle_command(files):
    path = files("w.json", DIAG21)
    base = ["verify-saddle", "--channel", path, "--eaves-bound", "0.5", "--eaves-bound-kind", "power", "--power", "1"]
    code, out, _ = run(base + ["--samples", "0", "--seed", "1"])
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["max_left_violation"] == "-inf"
    code, out1, _ = run(base + ["--samples", "300", "--seed", "7"])
    code2, out2, _ = run(base + ["--samples", "300", "--seed", "7"])
    assert code == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["max_right_violation"] <= 1e-9


def test_sweep_command(files, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "--channel", files("w.json", DIAG21), "--eaves-bound", "1,0,0.3",
                      "--eaves-bound-kind", "power", "--power-range", "0.1:1e4:12", "--out", str(out_path)])
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert list(rows[0]) == ["p_total", "epsilon", "capacity_nats", "active_modes", "water_level"]
    assert len(rows) == 36
    eps = [float(r["epsilon"]) for r in rows]
    assert eps == sorted(eps)
    assert float(rows[0]["p_total"]) == 0.1 and float(rows[11]["p_total"]) == 1e4
    for e in (0.0, 0.3, 1.0):
        col = [float(r["capacity_nats"]) for r in rows if float(r["epsilon"]) == e]
        assert all(b >= a for a, b in zip(col, col[1:]))


def test_sweep_bits_header(files):
    code, out, _ = run(["sweep", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.5",
                        "--eaves-bound-kind", "power", "--power", "1", "--bits"])
    assert out.splitlines()[0] == "p_total,epsilon,capacity_bits,active_modes,water_level"


def test_dmc_commands(files):
    fam = files("f.json", BSC_FAMILY)
    code, out, _ = run(["dmc-rate", "--channel", fam])
    assert code == 0
    assert json.loads(out)["rate"] == pytest.approx(0.17531945014673966, abs=1e-12)
    code, out, _ = run(["dmc-order", "--channel", fam, "--seed", "2", "--samples", "100"])
    st = json.loads(out)["states"][0]
    assert st["degraded"]["holds"] and st["less_capable"]["holds"] and st["less_capable"]["sampled"]
    code, out, _ = run(["dmc-quantize", "--channel", fam, "--levels", "1000", "--seed", "2", "--samples", "20"])
    rep = json.loads(out)
    assert code == 0 and rep["states"][0]["all_hold"]
    assert rep["quantized"]["states"][0]["legit"] == [[0.9, 0.1], [0.1, 0.9]]


def test_dmc_command_rejects_mimo_file(files):
    code, _, err = run(["dmc-rate", "--channel", files("w.json", DIAG21)])
    assert code == 3


def test_report_is_deterministic(files):
    args = ["capacity", "--channel", files("w.json", DIAG21), "--eaves-bound", "0.3",
            "--eaves-bound-kind", "power", "--power", "2.5"]
    assert run(args)[1] == run(args)[1]


def test_console_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "compound_wiretap", "capacity", "--channel", files("w.json", DIAG21),
         "--eaves-bound", "0", "--eaves-bound-kind", "power", "--power", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["capacity"] == pytest.approx(math.log(2.5) + math.log(1.25), abs=1e-12)
