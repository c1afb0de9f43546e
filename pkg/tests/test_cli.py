import numpy as np
import pytest

from polarbench import cli
from polarbench.encoding import polar_encode_euclidean, read_encoded
from polarbench.selftest import run_checks

CSV = """height,colour,class
1.5,red,a
?,blue,b
2.0,,a
1.7,red,b
1.6,green,a
1.9,blue,b
"""


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text(CSV)
    return path


def synthetic_csv(path, n, seed):
    rng = np.random.default_rng(seed)
    lines = ["a,b,c,class"]
    for _ in range(n):
        y = int(rng.integers(0, 2))
        a = "?" if rng.random() < 0.3 * (1 + y) else f"{rng.normal(y, 1):.4f}"
        b = "?" if rng.random() < 0.2 else f"{rng.random():.4f}"
        c = "?" if rng.random() < 0.1 else rng.choice(["x", "y", "z"])
        lines.append(f"{a},{b},{c},{'pos' if y else 'neg'}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_encode_writes_expected_columns(data_file, tmp_path, capsys):
    out = tmp_path / "enc"
    code = cli.main(["encode", "--data", str(data_file), "--encoding", "polar-boscovich",
                     "--encoding", "impute-indicator", "--out", str(out)])
    assert code == 0
    polar, labels = read_encoded(out / "toy.polar.csv")
    assert polar.column_names == ["height.pos", "height.neg", "colour=red", "colour=blue", "colour=green"]
    assert labels == ["a", "b", "a", "b", "a", "b"]
    assert polar.values[1, :2].tolist() == [0, 0]
    assert polar.values[2, 2:].tolist() == [0, 0, 0]
    base, _ = read_encoded(out / "toy.impute-indicator.csv")
    assert base.shape == (6, 1 + 1 + 3 + 1)
    assert "wrote" in capsys.readouterr().out


def test_encode_defaults_to_input_directory(data_file, monkeypatch):
    monkeypatch.delenv(cli.OUT_ENV, raising=False)
    assert cli.main(["encode", "--data", str(data_file)]) == 0
    assert (data_file.parent / "toy.polar.csv").exists()


def test_env_var_output_directory(data_file, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env-out"))
    assert cli.main(["encode", "--data", str(data_file)]) == 0
    assert (tmp_path / "env-out" / "toy.polar.csv").exists()


def test_exit_codes(data_file, tmp_path, capsys):
    assert cli.main(["encode", "--data", str(data_file), "--encoding", "bogus"]) == 2
    assert "polar-boscovich" in capsys.readouterr().err
    assert cli.main(["encode", "--data", str(tmp_path / "absent.csv")]) == 1
    assert cli.main(["bench", "--data", str(data_file), "--p", "3", "--out", str(tmp_path)]) == 2
    assert cli.main(["bench", "--data", str(data_file), "--classifier", "svm", "--out", str(tmp_path)]) == 2
    assert cli.main(["bench", "--data", str(data_file), "--folds", "x", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,class\n1,x\n2\n")
    assert cli.main(["encode", "--data", str(bad)]) == 2
    assert "schema error" in capsys.readouterr().err


def test_config_file_and_flag_precedence(data_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# toy run\ndata = {data_file}\nencoding = impute\nout = {tmp_path / 'cfg-out'}\n")
    assert cli.main(["encode", "--config", str(cfg)]) == 0
    assert (tmp_path / "cfg-out" / "toy.impute.csv").exists()
    assert cli.main(["encode", "--config", str(cfg), "--encoding", "polar-euclidean"]) == 0
    assert (tmp_path / "cfg-out" / "toy.polar-euclidean.csv").exists()
    broken = tmp_path / "broken.cfg"
    broken.write_text("no equals sign\n")
    assert cli.main(["encode", "--config", str(broken)]) == 2


def test_missing_markers_option(tmp_path):
    path = tmp_path / "na.csv"
    path.write_text("h,class\nNA,a\n0.5,b\n1.0,a\n")
    assert cli.main(["encode", "--data", str(path), "--missing-markers", "NA", "--out", str(tmp_path)]) == 0
    m, _ = read_encoded(tmp_path / "na.polar.csv")
    assert m.values[0].tolist() == [0, 0]


def test_bench_outputs(tmp_path):
    data = synthetic_csv(tmp_path / "syn.csv", 80, seed=1)
    out = tmp_path / "bench"
    code = cli.main(["bench", "--data", str(data), "--classifier", "nn", "--classifier", "cart",
                     "--p", "1", "--p", "2", "--folds", "3", "--repeats", "2", "--out", str(out)])
    assert code == 0
    rows = (out / "syn.folds.csv").read_text().splitlines()
    # 2 encodings x (nn at two p values + cart)
    assert len(rows) == 1 + 2 * 3
    assert (out / "summary.md").read_text().startswith("# Mean AUROC")
    assert (out / "wilcoxon.csv").exists()


def test_bench_continues_after_a_failing_dataset(tmp_path):
    good = synthetic_csv(tmp_path / "good.csv", 40, seed=2)
    empty = tmp_path / "empty.csv"
    empty.write_text("a,class\n")
    code = cli.main(["bench", "--data", str(empty), "--data", str(good), "--folds", "2",
                     "--repeats", "1", "--out", str(tmp_path / "o")])
    assert code == 1
    assert (tmp_path / "o" / "good.folds.csv").exists()


def test_bench_is_deterministic(tmp_path):
    data = synthetic_csv(tmp_path / "syn.csv", 60, seed=3)
    base = ["bench", "--data", str(data), "--classifier", "frnn", "--folds", "3", "--repeats", "2", "--seed", "5"]
    outputs = []
    for i, threads in enumerate(["1", "3", "1"]):
        out = tmp_path / f"run{i}"
        assert cli.main(base + ["--threads", threads, "--out", str(out)]) == 0
        outputs.append([(out / f).read_bytes() for f in ("syn.folds.csv", "summary.md", "wilcoxon.csv")])
    assert outputs[0] == outputs[1] == outputs[2]
    assert cli.main(base[:-1] + ["6", "--out", str(tmp_path / "run3")]) == 0
    assert (tmp_path / "run3" / "syn.folds.csv").read_bytes() != outputs[0][0]


def test_selftest_passes(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "6/6 checks passed" in out


def test_selftest_detects_broken_geometry(capsys):
    def skewed(x):
        v = polar_encode_euclidean(x)
        return v * 1.001 if v.any() else v

    assert cli.cmd_selftest({}, run_checks(euclidean_map=skewed, mia_trials=10)) == 3
    out = capsys.readouterr().out
    assert "FAIL missing value at distance 1" in out
