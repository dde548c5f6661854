import csv
import io
import json
import math

import pytest

from orbilab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def load_csv(text):
    return list(csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))


def test_signature_237(capsys):
    code, out, _ = run(capsys, "signature", "--g", "0", "--cones", "2,3,7", "--format", "json")
    res = json.loads(out)["result"]
    assert code == 0 and res["vol_over_pi"] == "1/21"
    assert res["volume"] == pytest.approx(math.pi / 21)


def test_gamma0_scan_header_and_rows(capsys):
    code, out, _ = run(capsys, "gamma0-scan", "--nmin", "11", "--nmax", "11")
    lines = out.splitlines()
    assert lines[0] == "# schema: orbilab.gamma0-scan/1"
    cfg = json.loads(lines[2].split(":", 1)[1])
    assert cfg["nmin"] == 11 and "output" not in cfg
    row = load_csv(out)[0]
    assert (row["index"], row["nu2"], row["nu3"], row["cusps"], row["genus"]) == ("12", "0", "0", "2", "1")
    assert float(row["ratio"]) == pytest.approx(1.0, abs=1e-15)


def test_deterministic_output(tmp_path):
    paths = [tmp_path / f"o{i}.json" for i in range(2)]
    for p in paths:
        assert main(["orbit-lemma", "--samples", "8", "--seed", "3", "--format", "json", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    for p in paths:
        main(["trace", "--scale", "30", "--t", "2", "--degree", "1", "--format", "json", "-o", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_json_keys_sorted(capsys):
    _, out, _ = run(capsys, "trace", "--scale", "5", "--t", "1", "--format", "json")
    doc = json.loads(out)
    assert out == json.dumps(doc, sort_keys=True, indent=2) + "\n"
    assert doc["schema"] == "orbilab.trace/1"


def test_config_file_overrides_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scan\nnmin = 5\nnmax = 7\nkind = gamma\n")
    code, out, _ = run(capsys, "gamma0-scan", "--config", str(cfg), "--nmax", "6")
    rows = load_csv(out)
    assert code == 0 and [r["N"] for r in rows] == ["5", "6"]  # command line wins


@pytest.mark.parametrize("text, field", [("nmax = lots\n", "nmax"), ("bogus = 1\n", "bogus"),
                                         ("kind = gamma1\n", "kind")])
def test_config_errors_name_the_field(tmp_path, capsys, text, field):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["gamma0-scan", "--config", str(cfg)]) == 2
    assert f"'{field}'" in capsys.readouterr().err


def test_invalid_eps_is_reported(capsys):
    assert main(["bs-check", "--eps", "-1"]) == 2
    assert "field 'eps'" in capsys.readouterr().err


def test_oracle_verify_300(capsys):
    code, out, err = run(capsys, "oracle-verify", "--nmax", "300")
    assert code == 0
    assert all(r["match"] == "True" for r in load_csv(out))


def test_gamma0_primes_ratio(capsys):
    code, out, _ = run(capsys, "gamma0-scan", "--primes", "--nmin", "5000", "--nmax", "20000")
    rows = load_csv(out)
    assert code == 0 and len(rows) > 1000
    assert max(abs(float(r["ratio"]) - 1) for r in rows) <= 0.02


def test_bs_check_exit_codes(capsys):
    code, out, _ = run(capsys, "bs-check", "--primes", "--nmin", "1000", "--nmax", "3000", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["status"] == "pass"
    code, out, _ = run(capsys, "bs-check", "--nmin", "100", "--nmax", "110", "--format", "json")
    assert code == 1 and json.loads(out)["result"]["status"] == "fail"


def test_b1_bound_flags_upper_bounds(capsys):
    code, out, _ = run(capsys, "b1-bound", "--scale", "100", "--t-grid", "1,10", "--format", "json")
    res = json.loads(out)["result"]
    assert code == 0
    rows = res if isinstance(res, list) else res["rows"]
    assert all(r["upper_bound"] for r in rows)


def test_orbit_lemma_verified(capsys):
    code, out, err = run(capsys, "orbit-lemma", "--samples", "20", "--a-cap", "3", "--conjugate")
    assert code == 0 and '"verified": true' in err + out


def test_quaternion_check(capsys):
    code, out, _ = run(capsys, "quaternion-check", "--places=-+,++", "--degree", "2", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["split"] == [True, False]
