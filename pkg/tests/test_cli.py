import json
import subprocess
import sys
from pathlib import Path

import pytest

from lbfds.cli import derive_payload, main, parse_derive_output
from lbfds.derive import closed_from_lbs, fds_equal, fds_from_lbs
from lbfds.scheme import load_scheme

SCHEMES = Path(__file__).resolve().parent.parent / "schemes"


def scheme(name):
    return str(SCHEMES / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_derive_round_trip(capsys):
    code, out, _ = run(capsys, "derive", scheme("d1q3_embed_a"))
    assert code == 0
    fds, closed = parse_derive_output(out)
    spec = load_scheme(scheme("d1q3_embed_a"))
    assert fds_equal(fds, fds_from_lbs(spec))[0]
    assert fds_equal(closed, closed_from_lbs(spec))[0]
    _, again, _ = run(capsys, "derive", scheme("d1q3_embed_a"))
    assert again == out


def test_derive_fingerprint_stable_across_processes():
    cmd = [sys.executable, "-m", "lbfds", "derive", scheme("d1q2_reference")]
    outs = [subprocess.run(cmd, capture_output=True, text=True, check=True).stdout for _ in range(2)]
    assert json.loads(outs[0])["fingerprint"] == json.loads(outs[1])["fingerprint"]


def test_derive_tampered_output_rejected(capsys):
    _, out, _ = run(capsys, "derive", scheme("d1q2_reference"))
    data = json.loads(out)
    data["fds"]["gamma"][0] = "5*T[0]"
    with pytest.raises(ValueError):
        parse_derive_output(json.dumps(data))


def test_derive_bad_moment(capsys):
    code, _, err = run(capsys, "derive", scheme("d1q2_reference"), "--moment", "2")
    assert code == 2 and "moment" in err


def test_family_member_files_share_closed_fingerprint():
    a = derive_payload(load_scheme(scheme("d1q2_reference")))
    b = derive_payload(load_scheme(scheme("d1q2_family")))
    assert a["closed_fingerprint"] == b["closed_fingerprint"]
    assert a["fingerprint"] != b["fingerprint"]


@pytest.mark.parametrize("mode", ["trivial", "nontrivial", "direct"])
def test_equiv_embedded_pair(capsys, mode):
    suffix = "_unit" if mode == "trivial" else ""
    code, out, _ = run(capsys, "equiv", scheme("d1q3_embed_a" + suffix), scheme("d1q3_embed_b" + suffix),
                       "--mode", mode, "--json")
    assert code == 0
    assert json.loads(out)["equivalent"] is True


def test_equiv_inequivalent(capsys):
    code, out, _ = run(capsys, "equiv", scheme("d1q3_embed_a"), scheme("d1q3_other"), "--mode", "nontrivial")
    assert code == 1
    assert "NOT EQUIVALENT" in out


def test_equiv_mode_needs_d1q3(capsys):
    code, _, _ = run(capsys, "equiv", scheme("d1q2_reference"), scheme("d1q2_family"), "--mode", "nontrivial")
    assert code == 2


def test_family_command(capsys):
    code, out, _ = run(capsys, "family", "--m12", "2", "--m21", "1", "--m22=-1", "--eps", "1/2", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["M_tilde"] == [["6/5", "2"], ["1", "-1"]]
    assert data["symbol_max_deviation"] <= 1e-10


def test_family_sweep_table(capsys):
    code, out, _ = run(capsys, "family", "--m12", "2", "--m21", "1", "--m22=-1", "--eps", "1/2", "--sweep-s")
    assert code == 0
    assert out.count("True") >= 16
    assert "7/4" in out


def test_family_degenerate(capsys):
    code, _, err = run(capsys, "family", "--m12", "1", "--m21", "5", "--m22", "2", "--eps", "1/2")
    assert code == 3 and "degenerate" in err


def test_family_rejects_floats(capsys):
    code, _, _ = run(capsys, "family", "--m12", "0.5", "--m21", "1", "--m22", "2", "--eps", "1/2")
    assert code == 2


def test_simulate(capsys, tmp_path):
    csv_path = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "simulate", scheme("d1q3_embed_b"), "--L", "8", "--steps", "6",
                       "--csv", str(csv_path), "--json")
    assert code == 0
    data = json.loads(out)
    assert data["residual"] == {"1": "0"}
    assert data["conserved_totals_exact"]
    assert csv_path.read_text().startswith("level,node,moment,value\n")


def test_simulate_from_rest_still_exact(capsys):
    code, out, err = run(capsys, "simulate", scheme("d1q2_family"), "--L", "6", "--steps", "5", "--start", "rest")
    assert code == 0
    assert "residual m1: 0" in err
    assert out.startswith("level,node,moment,value")


def test_simulate_init_file(capsys, tmp_path):
    init = tmp_path / "init.json"
    init.write_text(json.dumps(["1", "-1/2", "0", "3"]))
    code, _, _ = run(capsys, "simulate", scheme("d1q2_reference"), "--L", "4", "--steps", "4",
                     "--init", "file", "--init-file", str(init))
    assert code == 0
    init.write_text(json.dumps(["1", "2"]))
    code, _, _ = run(capsys, "simulate", scheme("d1q2_reference"), "--L", "4", "--init", "file",
                     "--init-file", str(init))
    assert code == 2


def test_parse_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "derive", str(bad))[0] == 2
    bad.write_text(json.dumps({"q": 2}))
    assert run(capsys, "derive", str(bad))[0] == 2
    assert run(capsys, "derive", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "bogus")[0] == 2
