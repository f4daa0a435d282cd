"""Bridge CLI subcommands and exit codes."""

from encoder_bridge.cli import main
from encoder_bridge.formats import write_corpus_lines

import bitextmine

from conftest import TINY_HIDDEN, TINY_LAYERS


class TestExportCommand:
    def test_export(self, tiny_model_dir, tmp_path, capsys):
        corpus = tmp_path / "c.txt"
        write_corpus_lines(["ab cd", "xyz 9"], corpus)
        out = tmp_path / "c.emb"
        code = main(
            [
                "export",
                "--model", str(tiny_model_dir),
                "--layer", str(TINY_LAYERS),
                "--in", str(corpus),
                "--out", str(out),
                "--batch", "2",
            ]
        )
        assert code == 0
        assert "wrote" in capsys.readouterr().err
        matrix = bitextmine.read_embeddings(out)
        assert matrix.rows.shape == (2, TINY_HIDDEN)
        assert (tmp_path / "c.emb.meta").exists()

    def test_bad_model_exits_2(self, tmp_path):
        corpus = tmp_path / "c.txt"
        write_corpus_lines(["ab"], corpus)
        code = main(
            [
                "export",
                "--model", str(tmp_path / "missing"),
                "--in", str(corpus),
                "--out", str(tmp_path / "c.emb"),
            ]
        )
        assert code == 2

    def test_missing_flag_exits_1(self):
        assert main(["export", "--model", "x"]) == 1


class TestConvertBuccCommand:
    def test_convert(self, tmp_path, capsys):
        src = tmp_path / "de.txt"
        tgt = tmp_path / "en.txt"
        gold = tmp_path / "gold.txt"
        src.write_text("de-1\tein satz\n", encoding="utf-8")
        tgt.write_text("en-1\ta sentence\n", encoding="utf-8")
        gold.write_text("de-1\ten-1\n", encoding="utf-8")
        code = main(
            [
                "convert-bucc",
                "--src", str(src),
                "--tgt", str(tgt),
                "--gold", str(gold),
                "--out-dir", str(tmp_path / "out"),
            ]
        )
        assert code == 0
        assert "1 gold pairs" in capsys.readouterr().err
        assert (tmp_path / "out" / "gold.tsv").read_text() == "0\t0\n"

    def test_malformed_exits_2(self, tmp_path):
        src = tmp_path / "de.txt"
        src.write_text("no tab here\n", encoding="utf-8")
        code = main(
            [
                "convert-bucc",
                "--src", str(src),
                "--tgt", str(src),
                "--gold", str(src),
                "--out-dir", str(tmp_path / "out"),
            ]
        )
        assert code == 2
