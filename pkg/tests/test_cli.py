import json
import math

import numpy as np
import pytest

from jitterless.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, file_digest, main
from jitterless.formats import read_csv, read_latent_json, write_csv, write_flo
from jitterless.metrics import roughness
from jitterless.synth import synth_flow

STANDARD_DIGESTS = {
    "clean": "9665f22e57ac66dfee7813d6f25fc8659b751201ae4327ab914a5d8f34ac8140",
    "noisy": "3484200b2f31441675ce80aa3aa6ea92d979dd19e5b724992b4c647038bb60bf",
    "manifest": "2833bf194b8a5fb87940952f9782ee93fdacb675df348cc58e9fb18f42d9cb7e",
}


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    report = json.loads(out.out) if code == EXIT_OK else None
    return code, report, out.err


def test_stabilize_constant(tmp_path, capsys):
    src, dst = tmp_path / "in.csv", tmp_path / "out.csv"
    write_csv(src, np.tile([1.5, -2.0], (12, 1)))
    code, report, _ = run(["stabilize", "--input", src, "--output", dst, "-m", 3], capsys)
    assert code == EXIT_OK
    np.testing.assert_array_equal(read_csv(dst), read_csv(src))
    assert report["metrics"]["roughness_before"] == report["metrics"]["roughness_after"] == 0


def test_stabilize_benchmark_reduces_roughness(tmp_path, capsys):
    d = tmp_path
    assert run(["synth", "--preset", "standard", "--clean", d / "c.csv", "--noisy",
                d / "n.csv"], capsys)[0] == EXIT_OK
    code, report, _ = run(["stabilize", d / "n.csv", "--output", d / "s.csv", "-m", 3,
                           "--report", d / "r.json"], capsys)
    assert code == EXIT_OK
    assert report["metrics"]["roughness_after"] < report["metrics"]["roughness_before"]
    assert roughness(read_csv(d / "s.csv")) == report["metrics"]["roughness_after"]
    saved = json.loads((d / "r.json").read_text())
    assert saved["metrics"] == report["metrics"]
    assert list(saved) == sorted(saved)


def test_stabilize_m_too_large(tmp_path, capsys):
    src, dst = tmp_path / "in.csv", tmp_path / "out.csv"
    write_csv(src, np.zeros((10, 2)))
    code, _, err = run(["stabilize", "--input", src, "--output", dst, "-m", 6], capsys)
    assert code == EXIT_CONFIG
    assert not dst.exists()
    assert "configuration" in err


def test_stabilize_parse_error(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("t,c0\n0,1\n1,oops\n")
    code, _, err = run(["stabilize", "--input", src, "--output", tmp_path / "o.csv"], capsys)
    assert code == EXIT_INPUT
    assert "line 3" in err and "column 2" in err


def test_stabilize_missing_file(tmp_path, capsys):
    code, _, _ = run(["stabilize", "--input", tmp_path / "nope.csv", "--output",
                      tmp_path / "o.csv"], capsys)
    assert code == EXIT_INPUT


def test_reports_deterministic_except_wall_time(tmp_path, capsys):
    src = tmp_path / "in.csv"
    write_csv(src, np.sin(np.arange(30.0) / 4)[:, None])
    reports = []
    for _ in range(2):
        code, report, _ = run(["stabilize", src, "--output", tmp_path / "o.csv"], capsys)
        report.pop("wall_time_ms")
        reports.append(report)
    assert reports[0] == reports[1]


def test_metrics_flv_directory(tmp_path, capsys):
    for kind, kw, expected in [("zero", {}, 0.0), ("constant", dict(u=3, v=4), 5.0)]:
        d = tmp_path / kind
        d.mkdir()
        for i, f in enumerate(synth_flow(kind, 8, 6, 45, **kw)):
            write_flo(d / f"{i:03d}.flo", f)
        code, report, _ = run(["metrics", "flv", d], capsys)
        assert code == EXIT_OK
        assert report["metrics"]["flv"] == expected
        assert report["metrics"]["flows_used"] == 39


def test_metrics_flv_window_and_files(tmp_path, capsys):
    paths = []
    for i, s in enumerate([1.0, 3.0, 100.0]):
        p = tmp_path / f"f{i}.flo"
        write_flo(p, synth_flow("constant", 2, 2, u=s)[0])
        paths.append(p)
    code, report, _ = run(["metrics", "flv", *paths, "--frames", 3], capsys)
    assert report["metrics"]["flv"] == 2.0


def test_metrics_flv_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.flo"
    bad.write_bytes(b"PIEH" + b"\0" * 4)
    code, _, err = run(["metrics", "flv", bad], capsys)
    assert code == EXIT_INPUT
    assert "bad.flo" in err


def test_metrics_rmse_and_roughness(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, np.zeros((4, 2)))
    write_csv(b, np.full((4, 2), 2.0))
    assert run(["metrics", "rmse", a, b], capsys)[1]["metrics"]["rmse"] == 2.0
    c = tmp_path / "c.csv"
    write_csv(c, np.array([[0.0], [1.0], [0.0], [1.0]]))
    assert run(["metrics", "roughness", c], capsys)[1]["metrics"]["roughness"] == 4.0


def test_synth_standard_digests(tmp_path, capsys):
    d = tmp_path
    code, report, _ = run(["synth", "--preset", "standard", "--clean", d / "c.csv",
                           "--noisy", d / "n.csv", "--manifest", d / "m.json"], capsys)
    assert code == EXIT_OK
    assert file_digest(d / "c.csv") == STANDARD_DIGESTS["clean"]
    assert file_digest(d / "n.csv") == STANDARD_DIGESTS["noisy"]
    assert file_digest(d / "m.json") == STANDARD_DIGESTS["manifest"]


def test_synth_noise_free_files_equal(tmp_path, capsys):
    d = tmp_path
    code, _, _ = run(["synth", "--n", 30, "--dims", 3, "--noise-sigma", 0, "--outlier-rate", 0,
                      "--clean", d / "c.csv", "--noisy", d / "n.csv"], capsys)
    assert code == EXIT_OK
    assert file_digest(d / "c.csv") == file_digest(d / "n.csv")


def test_synth_output_dir(tmp_path, capsys):
    code, _, _ = run(["synth", "--n", 20, "--dims", 2, "--seed", 3, "--output", tmp_path / "o"],
                     capsys)
    assert code == EXIT_OK
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["clean.csv", "manifest.json",
                                                                "noisy.csv"]


@pytest.mark.parametrize(
    "argv",
    [
        ["synth"],
        ["synth", "--noisy", "n.csv"],
        ["synth", "--flow-kind", "zero"],
        ["synth", "--n", 4, "--clean", "c.csv", "--noisy", "n.csv"],
        ["synth", "--preset", "huge", "--clean", "c.csv", "--noisy", "n.csv"],
    ],
)
def test_synth_config_errors(argv, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv, capsys)[0] == EXIT_CONFIG


def test_synth_flow_files(tmp_path, capsys):
    code, report, _ = run(["synth", "--flow-kind", "radial", "--width", 3, "--height", 3,
                           "--count", 2, "--output", tmp_path / "f"], capsys)
    assert code == EXIT_OK
    assert abs(report["metrics"]["flv"] - (4 + 4 * math.sqrt(2)) / 9) < 1e-12
    assert len(list((tmp_path / "f").glob("*.flo"))) == 2


def _frames_doc(frames, d_k=1, L=1, C=1):
    return json.dumps({"d_k": d_k, "L": L, "C": C, "frames": frames})


def test_aggregate_scalar_fixture(tmp_path, capsys):
    src = tmp_path / "frames.json"
    src.write_text(_frames_doc([
        {"q": [1.0], "k": [0.0], "w": [[4.0]]},
        {"q": [1.0], "k": [math.log(3)], "w": [[8.0]]},
    ]))
    code, report, _ = run(["aggregate", "--input", src, "--output", tmp_path / "w.json"], capsys)
    assert code == EXIT_OK
    assert abs(read_latent_json(tmp_path / "w.json")[0, 0] - 7.0) < 1e-14
    np.testing.assert_allclose(report["metrics"]["weights"], [[0.25, 0.75]], atol=1e-15)


def test_aggregate_identities(tmp_path, capsys):
    w = [[0.1, 0.2, 0.3, 0.4]]
    single = tmp_path / "one.json"
    single.write_text(_frames_doc([{"q": [1, 2], "k": [3, 4], "w": w}], d_k=2, C=4))
    same = tmp_path / "same.json"
    same.write_text(_frames_doc(
        [{"q": [i, 1], "k": [1, -i], "w": w} for i in range(5)], d_k=2, C=4))
    for src in (single, same):
        out = tmp_path / (src.stem + "_w.json")
        assert run(["aggregate", "--input", src, "--heads", 2, "--output", out], capsys)[0] == 0
        np.testing.assert_array_equal(read_latent_json(out), w)


def test_aggregate_shape_error(tmp_path, capsys):
    src = tmp_path / "frames.json"
    src.write_text(_frames_doc([{"q": [1.0], "k": [0.0], "w": [[4.0]]},
                                {"q": [1.0, 2.0], "k": [0.0, 1.0], "w": [[4.0]]}]))
    code, _, _ = run(["aggregate", "--input", src, "--output", tmp_path / "w.json"], capsys)
    assert code == EXIT_INPUT
    assert not (tmp_path / "w.json").exists()


def test_aggregate_bad_heads(tmp_path, capsys):
    src = tmp_path / "frames.json"
    src.write_text(_frames_doc([{"q": [1.0], "k": [0.0], "w": [[4.0]]}]))
    code, _, _ = run(["aggregate", "--input", src, "--heads", 2, "--output",
                      tmp_path / "w.json"], capsys)
    assert code == EXIT_CONFIG
