import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from rphc.bench import BenchReport, RunConfig, bench
from rphc.cli import EXIT_INCOMPLETE, main
from rphc.data import CsvFormatError, GenerationError, generate_synthetic, ingest_csv, parse_csv, read_merges
from rphc.evaluate import cut, preservation
from rphc.oracle import brute_slc
from rphc.slc import rp_slc_parameter_free


def test_parse_plain_and_header():
    ds = parse_csv("0,0\n3,4\n")
    assert (ds.n, ds.d) == (2, 2)
    ds = parse_csv("x,y\n1,2\n3,4\n5,6\n")
    assert ds.n == 3 and ds.coords[0].tolist() == [1.0, 2.0]


@pytest.mark.parametrize("text,row,col", [
    ("1,2\n3\n", 2, None),
    ("1,2\n3,abc\n", 2, 2),
    ("a,b\n1,2\n4,nan\n", 3, 2),
])
def test_parse_errors_locate_cell(text, row, col):
    with pytest.raises(CsvFormatError) as err:
        parse_csv(text)
    assert (err.value.row, err.value.col) == (row, col)
    assert f"row {row}" in str(err.value)


def test_parse_empty():
    with pytest.raises(CsvFormatError):
        parse_csv("")
    with pytest.raises(CsvFormatError):
        parse_csv("x,y\n")


def test_ingest_file(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("a,b,c\n1,2,3\n4,5,6\n")
    ds = ingest_csv(p)
    assert (ds.n, ds.d) == (2, 3)


def test_synthetic_single_point_cloud():
    ds, labels = generate_synthetic(1, 10, 3, 0.0, 1.0, seed=0)
    assert np.all(ds.coords == ds.coords[0]) and np.all(labels == 0)


def test_synthetic_blobs_recovered():
    ds, labels = generate_synthetic(3, 40, 8, 1.0, 25.0, seed=4)
    assert ds.n == 120
    assert adjusted_rand_score(labels, cut(brute_slc(ds), 3).labels) == 1.0


def test_synthetic_separation_and_errors():
    ds, labels = generate_synthetic(6, 1, 2, 0.0, 5.0, seed=1)
    D = np.linalg.norm(ds.coords[:, None] - ds.coords[None], axis=-1)
    assert D[np.triu_indices(6, 1)].min() >= 5.0
    with pytest.raises(GenerationError):
        generate_synthetic(200, 1, 1, 0.0, 1.0, seed=0, max_tries=1)
    with pytest.raises(ValueError):
        generate_synthetic(0, 1, 1, 1.0, 1.0, seed=0)


def test_merges_round_trip(tmp_path):
    ds, _ = generate_synthetic(3, 20, 4, 1.0, 10.0, seed=2)
    hc = rp_slc_parameter_free(ds)
    path = tmp_path / "m.csv"
    path.write_text(hc.to_csv())
    back = read_merges(path, ds.n)
    assert preservation(hc, back).average == 1.0
    assert np.array_equal(back.distance, hc.distance)
    assert back.to_csv() == hc.to_csv()


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(linkage="ward")
    with pytest.raises(ValueError):
        RunConfig(output_format="labels:0")
    assert RunConfig(mode="fixed").min_pts == 14
    assert RunConfig(output_format="labels:4").label_k == 4


def write_blobs(tmp_path, n_clusters=3, per=25, d=4, seed=0):
    ds, _ = generate_synthetic(n_clusters, per, d, 1.0, 10.0, seed=seed)
    p = tmp_path / "in.csv"
    p.write_text("\n".join(",".join(f"{v:.17g}" for v in row) for row in ds.coords) + "\n")
    return p


def test_cli_oracle_two_points(tmp_path, capsys):
    p = tmp_path / "two.csv"
    p.write_text("0,0\n3,4\n")
    assert main(["--input", str(p), "--mode", "oracle"]) == 0
    assert capsys.readouterr().out == "0,0,1,5,2\n"


def test_cli_fixed_incomplete(tmp_path, capsys):
    p = write_blobs(tmp_path, seed=3)
    code = main(["--input", str(p), "--mode", "fixed", "--min-pts", "2", "--rounds-factor", "0.1"])
    err = capsys.readouterr().err
    assert code == EXIT_INCOMPLETE
    assert "incomplete" in err and "min-pts" in err


def test_cli_summary_with_oracle(tmp_path, capsys):
    p = write_blobs(tmp_path)
    assert main(["--input", str(p), "--linkage", "alc", "--format", "summary", "--compare-oracle"]) == 0
    summary = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    assert summary["complete"] == "true"
    assert float(summary["preservation"]) == 1.0
    assert int(summary["doublings"]) >= 0 and int(summary["final_min_pts"]) >= 4


def test_cli_labels(tmp_path):
    p = write_blobs(tmp_path)
    out = tmp_path / "labels.csv"
    assert main(["--input", str(p), "--format", "labels:3", "--output", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert len(rows) == 75 and len({r[1] for r in rows}) == 3


def test_cli_merges_deterministic(tmp_path):
    p = write_blobs(tmp_path, seed=7)
    outs = []
    for run in range(2):
        out = tmp_path / f"m{run}.csv"
        assert main(["--input", str(p), "--seed", "11", "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_newick(tmp_path):
    p = write_blobs(tmp_path, per=3)
    tree = tmp_path / "t.nwk"
    assert main(["--input", str(p), "--mode", "oracle", "--output", str(tmp_path / "m"), "--newick", str(tree)]) == 0
    assert tree.read_text().strip().endswith(";")


def test_cli_bad_input(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,x\n")
    assert main(["--input", str(p)]) != 0
    assert "row 2, column 2" in capsys.readouterr().err


def test_bench_empty_suite(tmp_path, capsys):
    suite = tmp_path / "empty.toml"
    suite.write_text("[suite]\nn = []\n")
    assert main(["--bench", str(suite)]) == 0
    assert capsys.readouterr().out.strip() == BenchReport().to_csv().strip()


def test_bench_small_suite():
    report = bench({"n": [120], "d": [8], "seeds": [0, 1, 2],
                    "algorithms": ["slc:parameter-free", "alc:parameter-free"]}, workers=2)
    rp = [r for r in report.rows if "oracle" not in r["algorithm"]]
    oracle = [r for r in report.rows if "oracle" in r["algorithm"]]
    assert len(rp) == 6 and len(oracle) == 6
    assert all(r["preservation"] >= 0.999 for r in rp)
    assert all(r["preservation"] is None for r in oracle)
    assert report.to_csv().count("\n") == 13
