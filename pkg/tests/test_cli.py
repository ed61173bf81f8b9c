import shutil

import pytest

from cryptoeff import cli

from conftest import FIXTURES, GOLDEN

UNIVERSE = str(FIXTURES / "universe")

# command line -> artifacts compared against tests/golden/<name>
GOLDEN_RUNS = {
    "backtest": (["backtest", "--universe", UNIVERSE, "--n", "50", "--r", "20", "--seed", "42"],
                 {"sma_better.tsv": "sma_better.tsv", "per_asset.tsv": "sma_better_per_asset.tsv"}),
    "randombetter": (["randombetter", "--universe", UNIVERSE, "--n-iter", "20", "--k", "3", "--seed", "42"],
                     {"random_better.tsv": "random_better.tsv"}),
    "adf": (["adf", "--universe", UNIVERSE], {"adf.tsv": "adf.tsv"}),
    "arima": (["arima", "--input", str(FIXTURES / "arima_btc.csv"), "--p", "4", "--forecast", "5"],
              {"arima.txt": "arima_report.txt", "forecast.csv": "arima_forecast.csv"}),
    "sentiment": (["sentiment", "replay", "--events", str(FIXTURES / "events.csv")],
                  {"output.txt": "ledger.txt"}),
}


def run(argv, out):
    return cli.main(argv + ["--out", str(out)])


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_outputs(name, tmp_path, capsys):
    argv, files = GOLDEN_RUNS[name]
    assert run(argv, tmp_path) == 0
    for produced, golden in files.items():
        assert (tmp_path / produced).read_text(encoding="utf-8") == \
            (GOLDEN / golden).read_text(encoding="utf-8"), produced
    manifest = (tmp_path / "manifest.txt").read_text(encoding="utf-8")
    assert manifest.startswith(f"command={argv[0]}\n")
    assert "version=" in manifest


def test_table_headers(tmp_path, capsys):
    run(GOLDEN_RUNS["randombetter"][0], tmp_path)
    header = (tmp_path / "random_better.tsv").read_text().splitlines()[0].split("\t")
    assert header == ["Test No.", "|Ω|", "mean R_Ω", "n", "k", "% ω better than Ω", "Result"]
    out = capsys.readouterr().out
    assert "% ω better than Ω" in out


COMMANDS = [
    ["ingest", "--universe", UNIVERSE],
    GOLDEN_RUNS["backtest"][0] + ["--mode", "causal"],
    GOLDEN_RUNS["randombetter"][0],
    ["adf", "--universe", UNIVERSE, "--log"],
    ["correlate", str(FIXTURES / "universe" / "ALPHA.csv"), str(FIXTURES / "universe" / "BRAVO.csv")],
    ["dist", str(FIXTURES / "universe" / "CHARLIE.csv"), "--bins", "20"],
    GOLDEN_RUNS["arima"][0],
    ["simulate", "gbm", "--steps", "30", "--paths", "3", "--seed", "5"],
    ["simulate", "heston", "--steps", "30", "--paths", "3", "--seed", "5"],
    ["price", "bs", "--s", "100", "--k", "100", "--r", "0.05", "--t", "1", "--sigma", "0.2"],
    ["price", "gordon", "--d1", "5", "--k", "0.1", "--g", "0.05"],
    ["qtm", "--m", "1", "--v", "1", "--y", "1"],
    GOLDEN_RUNS["sentiment"][0],
    ["sentiment", "score", "--corpus", str(FIXTURES / "corpus")],
    ["report", "--universe", UNIVERSE, "--n-iter", "10", "--k", "3"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]) if a[0] in ("simulate", "price", "sentiment") else a[0])
def test_double_run_byte_identical(argv, tmp_path, capsys):
    assert run(argv, tmp_path / "a") == 0
    first = capsys.readouterr().out
    assert run(argv, tmp_path / "b") == 0
    assert capsys.readouterr().out == first
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a == b and "manifest.txt" in a and len(a) >= 2


def test_classify_double_run_and_dump(tmp_path, capsys):
    uni = tmp_path / "uni"
    uni.mkdir()
    shutil.copy(FIXTURES / "cycle.csv", uni)
    argv = ["classify", "--universe", str(uni), "--n", "5", "--dump-features", "features.csv"]
    assert run(argv, tmp_path / "a") == 0
    assert run(argv, tmp_path / "b") == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "b")
    acc = (tmp_path / "a" / "accuracy.tsv").read_text()
    assert acc.splitlines()[-1] == "# average accuracy: 100%"
    assert (tmp_path / "a" / "confusion" / "cycle.csv").exists()
    header = (tmp_path / "a" / "features.csv").read_text().splitlines()[0]
    assert header.startswith("date,Open,RSI,SMA,Corr,SAR,ADX,ATR,PH,PL,PC,O-0,O-C,r1")


def test_arima_date_bounds(tmp_path, capsys):
    argv = ["arima", "--input", str(FIXTURES / "arima_btc.csv"), "--p", "2"]
    assert run(argv + ["--start", "2021-06-01", "--end", "2021-12-31"], tmp_path / "a") == 0
    assert run(argv, tmp_path / "b") == 0
    a = (tmp_path / "a" / "arima.txt").read_text()
    assert a != (tmp_path / "b" / "arima.txt").read_text()
    # 141 bars from 1 June give 140 differences, the first dated 2 June
    assert "Sample:                     2021-06-02" in a
    assert "No. Observations:                 140" in a


def test_sentiment_stdout_matches_file(tmp_path, capsys):
    run(GOLDEN_RUNS["sentiment"][0], tmp_path)
    assert capsys.readouterr().out == (tmp_path / "output.txt").read_text()


def test_manifest_records_inputs_and_rejections(tmp_path, capsys):
    run(["ingest", "--universe", UNIVERSE], tmp_path)
    m = (tmp_path / "manifest.txt").read_text().splitlines()
    assert any(line.startswith("input.") and line.endswith(tuple("0123456789abcdef")) for line in m)
    assert "rejected.GOLF=TooShort(120, 360)" in m and "rejected.HOTEL=ZeroClose(2021-07-20)" in m
    assert not any(line.startswith("arg.out=") for line in m)


def test_exit_codes(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run(["backtest", "--universe", str(empty)], tmp_path / "o1") == 1
    assert "EmptyUniverse" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run(["backtest", "--bogus"], tmp_path / "o2")
    assert exc.value.code == 2
    assert "--bogus" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["nosuchcommand"])
    assert exc.value.code == 2
    assert run(["classify", "--universe", UNIVERSE], tmp_path / "o3") == 2
    assert "--n" in capsys.readouterr().err
    assert run(["qtm", "--m", "1"], tmp_path / "o4") == 2
    assert run(["price", "gordon", "--d1", "1", "--k", "0.05", "--g", "0.1"], tmp_path / "o5") == 1
    assert run(["correlate", UNIVERSE + "/ALPHA.csv"], tmp_path / "o6") == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# flat defaults\nn-iter = 20\nk = 3\nseed = 42\nuniverse = " + UNIVERSE + "\n")
    assert cli.main(["randombetter", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a" / "random_better.tsv").read_text() == (GOLDEN / "random_better.tsv").read_text()
    assert cli.main(["randombetter", "--config", str(cfg), "--k", "2", "--out", str(tmp_path / "b")]) == 0
    assert "\t2\t" in (tmp_path / "b" / "random_better.tsv").read_text()
    m = (tmp_path / "b" / "manifest.txt").read_text()
    assert "arg.k=2\n" in m and "arg.n_iter=20\n" in m
    bad = tmp_path / "bad.cfg"
    bad.write_text("wobble = 1\n")
    assert cli.main(["randombetter", "--config", str(bad), "--out", str(tmp_path / "c")]) == 2
    assert "wobble" in capsys.readouterr().err
