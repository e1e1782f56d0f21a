import json

import numpy as np
import pytest

from spinbias import InitStrategy, NetworkSpec, rabi_probability
from spinbias.archive import load_archive, verify_archive
from spinbias.cli import main
from spinbias import experiments


def test_optimize_archive_roundtrip(tmp_path):
    out = experiments.optimize_transfer(
        NetworkSpec("ring", 7), 1, 3,
        InitStrategy(kind="random", seed=9, time_range=(1.0, 20.0)),
        restarts=6, out_dir=tmp_path,
    )
    loaded = load_archive(tmp_path / "optimize.json")
    assert loaded == json.loads(json.dumps(out))
    assert loaded["format_version"] == 1
    assert loaded["software_version"]
    assert verify_archive(loaded) == []
    # CSV files exist with documented headers
    runs = (tmp_path / "runs.csv").read_text().splitlines()
    assert runs[0] == "run,infidelity,time,iterations,converged"
    assert len(runs) == 7
    hist = (tmp_path / "log_infidelity_histogram.csv").read_text().splitlines()
    assert hist[0] == "log10_lo,log10_hi,count"
    series = (tmp_path / "best_series.csv").read_text().splitlines()
    assert series[0] == "t,p_optimized,p_natural"


def test_archives_are_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        experiments.optimize_transfer(
            NetworkSpec("ring", 7), 1, 3,
            InitStrategy(kind="random", seed=4, time_range=(1.0, 20.0)),
            restarts=5, out_dir=d,
        )
    for name in ("optimize.json", "runs.csv", "best_series.csv", "log_infidelity_histogram.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_archive_catches_tampering(tmp_path):
    out = experiments.optimize_transfer(
        NetworkSpec("ring", 6), 1, 3,
        InitStrategy(kind="random", seed=1, time_range=(1.0, 10.0)),
        restarts=3, out_dir=tmp_path,
    )
    out["verification"][0]["infidelity"] += 1e-6
    assert verify_archive(out) != []


def test_natural_series_matches_zero_bias(tmp_path):
    from spinbias import build_reduced_hamiltonian, eigendecompose, probability_series

    experiments.optimize_transfer(
        NetworkSpec("ring", 6), 1, 3,
        InitStrategy(kind="random", seed=2, time_range=(1.0, 10.0)),
        restarts=3, out_dir=tmp_path,
    )
    rows = np.loadtxt(tmp_path / "best_series.csv", delimiter=",", skiprows=1)
    eig = eigendecompose(build_reduced_hamiltonian(NetworkSpec("ring", 6), np.zeros(6)))
    t_max = rows[-1, 0]
    series = probability_series(eig, 1, 3, t_max, rows[1, 0] - rows[0, 0])
    assert np.allclose(rows[: len(series.values), 2], series.values[: len(rows)], atol=1e-12)


def test_scan_times_archive(tmp_path):
    out = experiments.scan_times(
        NetworkSpec("ring", 5), 1, 2, t_from=np.pi / 2, t_to=np.pi / 2, t_step=1.0,
        repeats=4, seed=3, out_dir=tmp_path,
    )
    assert len(out["results"]["points"]) == 1
    assert out["results"]["points"][0]["min_infidelity"] < 0.05
    assert verify_archive(out) == []
    lines = (tmp_path / "scan_runs.csv").read_text().splitlines()
    assert lines[0] == "t,run,infidelity,iterations,converged"
    assert len(lines) == 5
    env = (tmp_path / "scan_envelope.csv").read_text().splitlines()
    assert env[0] == "t,min_infidelity"


def test_compare_quench_against_rabi(tmp_path):
    # Strong quench of the ring onto the direct two-site link: the trace must
    # approach the zero-detuning Rabi oscillation sin^2(t); at bias 1000 a
    # dense oracle puts the worst deviation below 1e-5.
    out = experiments.compare_quench(13, [2], bias_value=1000.0, t_max=10.0, out_dir=tmp_path)
    rows = np.loadtxt(tmp_path / "quench_k2.csv", delimiter=",", skiprows=1)
    rabi = np.array([rabi_probability(0.0, 0.0, t) for t in rows[:, 0]])
    assert np.max(np.abs(rows[:, 1] - rabi)) < 5e-5
    assert np.allclose(rows[:, 2], rabi, atol=1e-12)
    [comp] = out["results"]["comparisons"]
    assert comp["max_peak_offset"] < 0.05


def test_shortest_times_small(tmp_path):
    out = experiments.shortest_times(
        [9], k_list=[2], threshold=0.99, restarts=12, seed=0, out_dir=tmp_path
    )
    [entry] = out["results"]["entries"]
    assert entry["time"] == pytest.approx(np.pi / 2, rel=0.05)
    assert entry["infidelity"] < 0.01
    assert verify_archive(out) == []
    lines = (tmp_path / "shortest_times.csv").read_text().splitlines()
    assert lines[0] == "n,k,time,infidelity"


def test_box_constrained_headline(tmp_path):
    # Amplitude-limited variant of the fast 13-ring transfer: every decoded
    # bias stays inside [0, 100] and the fast solution time is preserved.
    out = experiments.optimize_transfer(
        NetworkSpec("ring", 13), 1, 5,
        InitStrategy(kind="symmetric-chain-peaks", seed=0),
        restarts=60, constraint="symmetric-box", box=(0.0, 100.0), out_dir=tmp_path,
    )
    runs = out["results"]["ensemble"]["runs"]
    assert all(0.0 <= v <= 100.0 for r in runs for v in r["bias"])
    fastest = out["results"]["fastest_above_0.99"]
    assert fastest is not None
    assert fastest["time"] <= 5.5
    assert verify_archive(out) == []


def test_verify_fullspace_report():
    report = experiments.verify_fullspace(n_max=6, trials=8, seed=0)
    assert report["ok"]
    assert report["residuals"]["commutator"] <= 1e-12
    assert report["residuals"]["probability"] <= 1e-10


# -- CLI surface -------------------------------------------------------------


def test_cli_scan_times_and_exit_codes(tmp_path, capsys):
    code = main([
        "scan-times", "--ring", "5", "--to", "2",
        "--t-from", "1.5707963267948966", "--t-to", "1.5707963267948966",
        "--t-step", "1.0", "--repeats", "3", "--seed", "1", "--out", str(tmp_path),
    ])
    assert code == 0
    assert "lowest envelope infidelity" in capsys.readouterr().out
    with pytest.raises(SystemExit) as err:
        main(["scan-times", "--ring", "5", "--to", "2", "--repeats", "0", "--out", str(tmp_path)])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["scan-times", "--ring", "5", "--to", "2", "--t-step", "-1", "--out", str(tmp_path)])
    assert err.value.code == 2


def test_cli_optimize_and_eigenreport(tmp_path, capsys):
    code = main([
        "optimize", "--ring", "7", "--to", "3", "--strategy", "chain-peaks", "--symmetric",
        "--restarts", "5", "--seed", "2", "--time-range", "1", "20", "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "strategy symmetric-chain-peaks" in out
    assert (tmp_path / "optimize.json").exists()

    code = main(["eigenreport", str(tmp_path / "optimize.json"), "--solution", "best"])
    assert code == 0
    out = capsys.readouterr().out
    assert "sqrt(ITF)" in out

    code = main([
        "eigenreport", "--chain", "3", "--to", "3", "--bias", "0,0,0",
        "--time", str(np.pi / np.sqrt(2.0)),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "fidelity p(t)        : 1.0000" in out

    with pytest.raises(SystemExit) as err:
        main(["eigenreport", str(tmp_path / "optimize.json"), "--solution", "99"])
    assert err.value.code == 2


def test_cli_eigenreport_rejects_tampered_archive(tmp_path, capsys):
    main([
        "optimize", "--ring", "6", "--to", "3", "--restarts", "3", "--seed", "5",
        "--time-range", "1", "10", "--out", str(tmp_path),
    ])
    capsys.readouterr()
    path = tmp_path / "optimize.json"
    doc = json.loads(path.read_text())
    doc["verification"][0]["infidelity"] += 1e-3
    path.write_text(json.dumps(doc))
    code = main(["eigenreport", str(path)])
    assert code == 3


def test_cli_optimize_box_and_bounded_time(tmp_path, capsys):
    code = main([
        "optimize", "--ring", "6", "--to", "3", "--restarts", "4", "--seed", "7",
        "--box", "0", "50", "--tmax", "15", "--time-range", "1", "14",
        "--out", str(tmp_path),
    ])
    assert code == 0
    doc = json.loads((tmp_path / "optimize.json").read_text())
    assert doc["config"]["problem"]["constraint"] == "box"
    assert doc["config"]["problem"]["max_time"] == 15
    for run in doc["results"]["ensemble"]["runs"]:
        assert all(0.0 <= v <= 50.0 for v in run["bias"])
        assert 0.0 < run["time"] <= 15.0


def test_cli_compare_quench(tmp_path, capsys):
    code = main([
        "compare-quench", "--ring", "13", "--k", "5", "--bias", "10",
        "--t-max", "10", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "quench_k5.csv").exists()


def test_cli_verify_fullspace(capsys):
    code = main(["verify-fullspace", "--n-max", "5", "--trials", "5"])
    assert code == 0
    assert "OK" in capsys.readouterr().out
    with pytest.raises(SystemExit) as err:
        main(["verify-fullspace", "--n-max", "11"])
    assert err.value.code == 2


def test_cli_verify_fullspace_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(
        experiments, "verify_fullspace",
        lambda **kw: {"trials": 1, "n_max": 5, "seed": 0,
                      "residuals": {"commutator": 1.0}, "ok": False},
    )
    code = main(["verify-fullspace", "--n-max", "5", "--trials", "1"])
    assert code == 3


def test_cli_shortest_times(tmp_path, capsys):
    code = main([
        "shortest-times", "--n-list", "5", "--k-list", "2", "--restarts", "4",
        "--seed", "1", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "shortest-times.json").exists()
    with pytest.raises(SystemExit) as err:
        main(["shortest-times", "--threshold", "1.5"])
    assert err.value.code == 2


def test_cli_usage_errors():
    with pytest.raises(SystemExit) as err:
        main(["optimize", "--ring", "9", "--to", "3", "--fixed-time", "2", "--tmax", "5"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["optimize", "--to", "3"])  # no network
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 2
