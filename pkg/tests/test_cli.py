"""CLI subcommands end to end, including exit codes."""

import numpy as np
import pytest

from bitextmine.cli import main
from bitextmine.corpus import EmbeddingMatrix, load_corpus, read_embeddings, write_embeddings
from bitextmine.mining import read_pairs_tsv
from bitextmine.selftrain import load_head


def _run(argv):
    return main(argv)


@pytest.fixture
def bench(tmp_path):
    """Small planted benchmark written via the synth subcommand."""
    out_dir = tmp_path / "bench"
    code = _run(
        [
            "synth",
            "--n-src", "200", "--n-tgt", "200", "--n-parallel", "50",
            "--dim", "12", "--sigma", "0.1", "--seed", "7",
            "--rotation", "0.4",
            "--out-dir", str(out_dir),
        ]
    )
    assert code == 0
    return out_dir


class TestSynth:
    def test_writes_all_files(self, bench):
        for name in ("src.txt", "tgt.txt", "src.emb", "tgt.emb", "gold.tsv"):
            assert (bench / name).exists()
        matrix = read_embeddings(bench / "src.emb")
        assert matrix.rows.shape == (200, 12)
        assert len(load_corpus(bench / "src.txt")) == 200

    def test_deterministic(self, bench, tmp_path):
        again = tmp_path / "again"
        _run(
            [
                "synth",
                "--n-src", "200", "--n-tgt", "200", "--n-parallel", "50",
                "--dim", "12", "--sigma", "0.1", "--seed", "7",
                "--rotation", "0.4",
                "--out-dir", str(again),
            ]
        )
        assert (bench / "src.emb").read_bytes() == (again / "src.emb").read_bytes()


class TestClean(object):
    def test_clean_and_idmap(self, tmp_path, capsys):
        src = tmp_path / "raw.txt"
        src.write_text("keep me\nbad www link\nalso keep\n", encoding="utf-8")
        out = tmp_path / "clean.txt"
        idmap = tmp_path / "ids.tsv"
        assert _run(["clean", "--in", str(src), "--out", str(out), "--idmap", str(idmap)]) == 0
        assert load_corpus(out).sentences == ["keep me", "also keep"]
        assert idmap.read_text() == "0\t0\n2\t1\n"
        assert "kept=2" in capsys.readouterr().err


class TestKnn:
    def test_dump(self, bench, tmp_path):
        out = tmp_path / "nn.tsv"
        code = _run(
            [
                "knn",
                "--queries", str(bench / "src.emb"),
                "--index", str(bench / "tgt.emb"),
                "--k", "3", "--shard-size", "64",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 200 * 3
        first = lines[0].split("\t")
        assert first[0] == "0" and first[1] == "1"
        assert len(first[3].split(".")[1]) == 12

    def test_bad_magic_exits_2(self, tmp_path):
        bogus = tmp_path / "bogus.emb"
        bogus.write_bytes(b"NOTMAGIC" + b"\x00" * 12)
        code = _run(
            ["knn", "--queries", str(bogus), "--index", str(bogus), "--out", str(tmp_path / "o")]
        )
        assert code == 2


class TestMine:
    def test_end_to_end(self, bench, tmp_path, capsys):
        out = tmp_path / "pairs.tsv"
        code = _run(
            [
                "mine",
                "--src-emb", str(bench / "src.emb"),
                "--tgt-emb", str(bench / "tgt.emb"),
                "--src-txt", str(bench / "src.txt"),
                "--tgt-txt", str(bench / "tgt.txt"),
                "--prior", "0.25", "--k", "4", "--shard-size", "64",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert "kept=" in capsys.readouterr().err
        pairs = read_pairs_tsv(out)
        assert pairs
        margins = [p.margin for p in pairs]
        assert margins == sorted(margins, reverse=True)

    def test_prior_and_budget_conflict_is_usage_error(self, bench, tmp_path):
        code = _run(
            [
                "mine",
                "--src-emb", str(bench / "src.emb"),
                "--tgt-emb", str(bench / "tgt.emb"),
                "--src-txt", str(bench / "src.txt"),
                "--tgt-txt", str(bench / "tgt.txt"),
                "--prior", "0.1", "--budget", "5",
                "--out", str(tmp_path / "o.tsv"),
            ]
        )
        assert code == 1

    def test_selector_required(self, bench, tmp_path):
        code = _run(
            [
                "mine",
                "--src-emb", str(bench / "src.emb"),
                "--tgt-emb", str(bench / "tgt.emb"),
                "--src-txt", str(bench / "src.txt"),
                "--tgt-txt", str(bench / "tgt.txt"),
                "--out", str(tmp_path / "o.tsv"),
            ]
        )
        assert code == 1


class TestSelfTrain:
    def test_produces_head_and_log(self, bench, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        assert 0 == _run(
            [
                "mine",
                "--src-emb", str(bench / "src.emb"),
                "--tgt-emb", str(bench / "tgt.emb"),
                "--src-txt", str(bench / "src.txt"),
                "--tgt-txt", str(bench / "tgt.txt"),
                "--prior", "0.25",
                "--out", str(pairs),
            ]
        )
        head_out = tmp_path / "head.bin"
        code = _run(
            [
                "self-train",
                "--pairs", str(pairs),
                "--src-emb", str(bench / "src.emb"),
                "--tgt-emb", str(bench / "tgt.emb"),
                "--neg-mode", "hard",
                "--batch", "50", "--lr", "0.003", "--epochs", "2",
                "--pos-frac", "0.5", "--seed", "3",
                "--head-out", str(head_out),
            ]
        )
        assert code == 0
        head = load_head(head_out)
        assert head.dim == 12
        assert not np.array_equal(head.W, np.eye(12))  # training moved it
        log = head_out.with_suffix(".train.csv")
        assert log.read_text().startswith("epoch,step,mean_loss")


class TestPipelineCommand:
    def test_config_run(self, bench, tmp_path, capsys):
        out = tmp_path / "pipe" / "final.tsv"
        config = tmp_path / "run.cfg"
        config.write_text(
            f"src_txt = {bench / 'src.txt'}\n"
            f"tgt_txt = {bench / 'tgt.txt'}\n"
            f"src_emb = {bench / 'src.emb'}\n"
            f"tgt_emb = {bench / 'tgt.emb'}\n"
            f"gold = {bench / 'gold.tsv'}\n"
            "prior = 0.25\nshard_size = 64\nseed = 1\n"
        )
        code = _run(
            ["pipeline", "--config", str(config), "--rounds", "1", "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
        assert (out.parent / "final_metrics.csv").exists()
        assert (out.parent / "final_margins.png").exists()
        assert (out.parent / "final_metrics.png").exists()
        assert "wrote" in capsys.readouterr().out

    def test_missing_config_exits_2(self, tmp_path):
        code = _run(
            ["pipeline", "--config", str(tmp_path / "nope.cfg"), "--out", "x.tsv"]
        )
        assert code == 2


class TestEval:
    def test_output_line(self, tmp_path, capsys):
        pred = tmp_path / "pred.tsv"
        gold = tmp_path / "gold.tsv"
        pred.write_text("0\t1\n5\t5\n")
        gold.write_text("0\t1\n2\t3\n")
        assert _run(["eval", "--pred", str(pred), "--gold", str(gold)]) == 0
        out = capsys.readouterr().out.strip().split()
        assert out == ["0.500000", "0.500000", "0.500000", "1", "2", "2"]

    def test_missing_file_exits_2(self, tmp_path):
        assert _run(["eval", "--pred", str(tmp_path / "a"), "--gold", str(tmp_path / "b")]) == 2


class TestUsageErrors:
    def test_unknown_subcommand(self):
        assert _run(["frobnicate"]) == 1

    def test_missing_required_flag(self):
        assert _run(["knn", "--queries", "q.emb"]) == 1

    def test_bad_flag_value(self):
        assert _run(["synth", "--n-src", "abc"]) == 1
