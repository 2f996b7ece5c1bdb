import json

import pytest

from hetnet.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_presets_listing(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == EXIT_OK
    for key in ("gh", "ks-a", "ks-b", "ks-c", "ks-d", "rpssl-a", "rpssl-b", "rpssl-c", "rpssl-d"):
        assert f"\n{key} " in "\n" + out
    ks_d = out.split("ks-d", 1)[1].split("\n")[1]
    assert "rho_124=1.0000" in ks_d
    rpssl_c = out.split("rpssl-c", 1)[1].split("\n")[1]
    assert "AABBB" in rpssl_c


def test_indices(capsys, tmp_path):
    code, out, _ = run(capsys, "indices", "--preset", "ks-b", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "nu_1234 = -" in out and "negative" in out
    assert "switching 3->4" in out
    rep = json.loads((tmp_path / "indices.json").read_text())
    assert rep["nu"]["1234"] < 0
    code, out, _ = run(capsys, "indices", "--preset", "gh")
    assert "rho_123 = 1.3333" in out and "asymptotically stable (restricted orthant)" in out


def test_indices_all_ones(capsys):
    params = ",".join(f"{k}=1" for k in
                      "e12 c13 c14 c21 e23 e24 e31 c32 t34 e41 c42 t43".split())
    code, out, _ = run(capsys, "indices", "--params", params)
    assert code == EXIT_OK
    assert out.count("(resonance)") == 2
    assert out.count("= +1.000000") == 6


def test_usage_errors(capsys):
    assert run(capsys, "indices", "--preset", "nope")[0] == EXIT_USAGE
    assert run(capsys, "simulate")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == EXIT_USAGE


def test_simulate_gh(capsys, tmp_path):
    out = tmp_path / "gh"
    code, text, _ = run(capsys, "simulate", "--preset", "gh", "--out", str(out), "--tmax", "200")
    assert code == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "itinerary.csv", "report.json"}
    rep = json.loads((out / "report.json").read_text())
    seq = rep["runs"][0]["itinerary"][-6:]
    assert seq in (["xi1", "xi2", "xi3"] * 2, ["xi2", "xi3", "xi1"] * 2, ["xi3", "xi1", "xi2"] * 2)


def test_simulate_is_byte_identical(capsys, tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run(capsys, "simulate", "--preset", "rpssl-c", "--out", str(out), "--tmax", "300")[0] == 0
        paths.append(out)
    for name in ("trajectory.csv", "itinerary.csv", "pentacle.csv", "report.json"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes()


def test_malformed_scenario_names_field(capsys, tmp_path):
    sc = tmp_path / "bad.yaml"
    sc.write_text("initial:\n  x0: [1, 2, 3]\nanalysis: {}\n")
    code, _, err = run(capsys, "simulate", "--scenario", str(sc), "--out", str(tmp_path / "o"))
    assert code == EXIT_USAGE
    assert "model" in err
    assert not (tmp_path / "o").exists()


def test_failed_run_leaves_no_partial_outputs(capsys, tmp_path):
    sc = tmp_path / "neg.yaml"
    sc.write_text("model: {preset: gh}\ninitial: {x0: [-0.5, 0.1, 0.1]}\nanalysis: {}\n")
    out = tmp_path / "o"
    code, _, err = run(capsys, "simulate", "--scenario", str(sc), "--out", str(out))
    assert code == EXIT_NUMERIC
    assert "integration" in err
    assert not out.exists()
    assert not any(p.name.startswith(".hetnet-") for p in tmp_path.iterdir())


def test_plot_renders_svg_with_provenance(capsys, tmp_path):
    sim = tmp_path / "sim"
    assert run(capsys, "simulate", "--preset", "rpssl-a", "--out", str(sim), "--tmax", "200")[0] == 0
    plots = tmp_path / "plots"
    code, _, _ = run(capsys, "plot", "--trajectory", str(sim / "trajectory.csv"),
                     "--pentacle", str(sim / "pentacle.csv"), "--out", str(plots), "--linear",
                     "--seed", "3")
    assert code == EXIT_OK
    svg = (plots / "timeseries_linear.svg").read_text()
    assert svg.startswith("<?xml") and "sha256=" in svg and "seed=3" in svg
    assert (plots / "pentacle.svg").exists()


def test_plot_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "plot", "--trajectory", str(tmp_path / "nope.csv"))
    assert code == EXIT_USAGE
    assert "nope.csv" in err


def test_classify_small(capsys, tmp_path):
    out = tmp_path / "cls"
    code, text, _ = run(capsys, "classify", "--preset", "gh", "--target", "123", "--samples", "3",
                        "--delta", "1e-3,1e-4", "--tmax", "1200", "--out", str(out), "--seed", "5")
    assert code == EXIT_OK
    assert text.startswith("123: ")
    rep = json.loads((out / "verdict.json").read_text())
    v = rep["verdicts"][0]
    assert v["seed"] == 5 and len(v["trajectories"]) == 6
    assert "empirical" in v["note"]
