import numpy as np
import pytest

from laguerre_intertwine.cli import ExperimentConfig, ConfigError, main


def run(argv):
    return main(argv)


def test_kernels_check_passes_and_writes_csv(tmp_path):
    rc = run(["kernels-check", "--out", str(tmp_path), "--n", "1"])
    assert rc == 0
    rows = (tmp_path / "kernels_check.csv").read_text().splitlines()
    assert rows[0].startswith("check,kernel,alpha,N,anchor,integral,error,tol,pass")
    assert len(rows) > 5
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == "experiment,detail,statistic,threshold,seed,pass"


def test_kernels_check_unsupported_dimension(tmp_path):
    assert run(["kernels-check", "--out", str(tmp_path), "--n", "4"]) == 2


def test_kernels_check_corrupted_density_hook(tmp_path):
    rc = run(["kernels-check", "--out", str(tmp_path), "--n", "1", "--corrupt", "1.01"])
    assert rc == 1


def test_intertwine_single_combo(tmp_path):
    rc = run([
        "intertwine", "--out", str(tmp_path), "--n", "1", "--alpha", "0.5", "--t", "0.25",
    ])
    assert rc == 0
    rows = (tmp_path / "intertwine.csv").read_text().splitlines()
    assert len(rows) == 1 + 9  # three identities, three test functions each


def test_intertwine_t_zero_trivial(tmp_path):
    rc = run(["intertwine", "--out", str(tmp_path), "--n", "1", "--alpha", "0.0", "--t", "0.0"])
    assert rc == 0
    body = (tmp_path / "intertwine.csv").read_text().splitlines()[1:]
    rels = [float(line.split(",")[7]) for line in body]
    assert max(rels) == 0.0


def test_intertwine_bad_dimension(tmp_path):
    assert run(["intertwine", "--out", str(tmp_path), "--n", "3"]) == 2


def test_truncation_small(tmp_path):
    rc = run([
        "truncation", "--out", str(tmp_path), "--n", "1", "--alpha", "0",
        "--n-samples", "2000", "--seed", "11",
    ])
    assert rc == 0
    assert (tmp_path / "truncation.csv").exists()


def test_truncation_rejects_fractional_alpha(tmp_path):
    assert run(["truncation", "--out", str(tmp_path), "--alpha", "0.5"]) == 2


def test_invariance_small(tmp_path):
    rc = run([
        "invariance", "--out", str(tmp_path), "--n", "1", "--alpha", "0",
        "--n-samples", "3000", "--seed", "12",
    ])
    assert rc == 0


def test_sde_vs_exact_small(tmp_path):
    rc = run(["sde-vs-exact", "--out", str(tmp_path), "--n-samples", "4000", "--seed", "13"])
    assert rc == 0
    body = (tmp_path / "sde_vs_exact.csv").read_text().splitlines()
    checks = [line.split(",")[0] for line in body[1:]]
    assert "dt_trend" in checks  # refining dt must not worsen agreement


def test_experiment_csv_reproducible(tmp_path):
    args = ["truncation", "--n", "1", "--alpha", "0", "--n-samples", "500", "--seed", "21"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "truncation.csv").read_bytes()
    b = (tmp_path / "b" / "truncation.csv").read_bytes()
    assert a == b


def test_sample_deterministic_output(tmp_path):
    args = [
        "sample", "--sampler", "alpha_corner", "--x", "1,2", "--alpha", "0",
        "--n-samples", "10", "--seed", "99",
    ]
    rc = run(args + ["--out", str(tmp_path / "a")])
    assert rc == 0
    rc = run(args + ["--out", str(tmp_path / "b")])
    assert rc == 0
    a = (tmp_path / "a" / "samples.csv").read_bytes()
    b = (tmp_path / "b" / "samples.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == "# sampler=alpha_corner"
    assert any(line.startswith("# seed=99") for line in lines)
    header_idx = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    assert lines[header_idx] == "y1"
    assert len(lines) == header_idx + 1 + 10


def test_sample_column_count_matches_dimension(tmp_path):
    rc = run([
        "sample", "--sampler", "laguerre_ensemble", "--n", "3", "--alpha", "0.5",
        "--n-samples", "5", "--seed", "1", "--out", str(tmp_path),
    ])
    assert rc == 0
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    header = next(line for line in lines if not line.startswith("#"))
    assert header == "y1,y2,y3"


def test_sample_unknown_sampler(tmp_path):
    assert run(["sample", "--sampler", "nope", "--out", str(tmp_path)]) == 2


def test_config_file_roundtrip(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("seed = 31\nn_samples = 7\nx = 1,2\nsampler = corner\n")
    rc = run(["sample", "--config", str(cfg_file), "--out", str(tmp_path)])
    assert rc == 0
    text = (tmp_path / "samples.csv").read_text()
    assert "# seed=31" in text
    # command line overrides the file
    rc = run(["sample", "--config", str(cfg_file), "--seed", "32", "--out", str(tmp_path)])
    assert "# seed=32" in (tmp_path / "samples.csv").read_text()


def test_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("nonsense = 1\n")
    assert run(["sample", "--config", str(cfg_file), "--sampler", "corner"]) == 2


def test_experiment_config_parsing():
    cfg = ExperimentConfig().with_option("x", "1,2,4")
    assert cfg.x == (1.0, 2.0, 4.0)
    assert ExperimentConfig().with_option("alpha", "0.5").alpha == 0.5
    with pytest.raises(ConfigError):
        ExperimentConfig().with_option("bogus", "1")


def test_floats_are_17_digits(tmp_path):
    rc = run([
        "sample", "--sampler", "corner", "--x", "0,2", "--n-samples", "3", "--seed", "5",
        "--out", str(tmp_path),
    ])
    assert rc == 0
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    data = [line for line in lines if not line.startswith("#")][1:]
    val = data[0]
    assert np.isclose(float(val), float(f"{float(val):.17g}"))
    assert len(val.split(".")[-1]) >= 10  # full precision survives the round trip
