"""Corpus loading/cleaning and embedding file IO."""

import numpy as np
import pytest

from bitextmine.corpus import (
    Corpus,
    EmbeddingMatrix,
    clean_wiki_corpus,
    is_wiki_noise,
    load_corpus,
    read_embeddings,
    read_id_map,
    save_corpus,
    shard_matrix,
    wiki_clean_id_map,
    write_embeddings,
    write_id_map,
)
from bitextmine.errors import DataFormatError


class TestLoadCorpus:
    def test_identity_load(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("a\nb\n", encoding="utf-8")
        assert load_corpus(path).sentences == ["a", "b"]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"")
        assert load_corpus(path).sentences == []

    def test_single_blank_line(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"\n")
        assert load_corpus(path).sentences == [""]

    def test_crlf_endings_stripped(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"one\r\ntwo\r\nthree\r\n")
        corpus = load_corpus(path)
        assert len(corpus) == 3
        assert corpus.sentences == ["one", "two", "three"]
        assert not any("\r" in s for s in corpus.sentences)

    def test_missing_trailing_newline(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"a\nb")
        assert load_corpus(path).sentences == ["a", "b"]

    def test_blank_lines_kept(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("a\n\nb\n", encoding="utf-8")
        assert load_corpus(path).sentences == ["a", "", "b"]

    def test_invalid_utf8_names_offset(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"ok\n\xff\n")
        with pytest.raises(DataFormatError, match="byte offset 3"):
            load_corpus(path)

    def test_save_round_trip(self, tmp_path):
        corpus = Corpus(["héllo", "", "世界", "last"], "xx")
        path = tmp_path / "c.txt"
        save_corpus(corpus, path)
        assert load_corpus(path, "xx").sentences == corpus.sentences

    def test_save_rejects_line_breaks(self, tmp_path):
        with pytest.raises(ValueError, match="line break"):
            save_corpus(Corpus(["a\nb"]), tmp_path / "c.txt")


class TestCleanWiki:
    def test_www_removed(self):
        assert is_wiki_noise("See www.example.com")

    def test_time_pattern_removed(self):
        assert is_wiki_noise("The train left at 12:34.")

    def test_clean_sentence_kept(self):
        sentence = (
            "Both elements of the American dream have now lost "
            "something of their appeal."
        )
        assert not is_wiki_noise(sentence)

    @pytest.mark.parametrize("literal", ["*", "=", "//", "::", "#", "www", "(talk)"])
    def test_each_literal_removed(self, literal):
        assert is_wiki_noise(f"padding {literal} padding")

    def test_single_digit_colon_kept(self):
        assert not is_wiki_noise("A ratio of 1:2 is fine.")

    def test_time_pattern_matches_anywhere(self):
        assert is_wiki_noise("score was 123:45 at the end")

    def test_case_sensitive_literals(self):
        assert not is_wiki_noise("WWW is the consortium acronym")

    def test_blank_dropped(self):
        assert is_wiki_noise("")
        assert is_wiki_noise("   \t ")

    def test_clean_produces_dense_ids(self):
        raw = Corpus(["keep one", "drop 12:34", "keep two", " ", "has www inside"])
        cleaned = clean_wiki_corpus(raw)
        assert cleaned.sentences == ["keep one", "keep two"]
        assert wiki_clean_id_map(raw) == [(0, 0), (2, 1)]

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        pool = ["plain text", "x = y", "a // b", "time 09:15", "ok line", "", "w3"]
        raw = Corpus([pool[i] for i in rng.integers(0, len(pool), size=200)])
        once = clean_wiki_corpus(raw)
        twice = clean_wiki_corpus(once)
        assert once.sentences == twice.sentences


class TestIdMap:
    def test_round_trip(self, tmp_path):
        pairs = [(0, 0), (3, 1), (9, 2)]
        path = tmp_path / "map.tsv"
        write_id_map(pairs, path)
        assert read_id_map(path) == pairs
        assert path.read_text() == "0\t0\n3\t1\n9\t2\n"

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("1\t2\t3\n")
        with pytest.raises(DataFormatError, match=":1"):
            read_id_map(path)


class TestEmbeddingIO:
    def test_round_trip_2x3(self, tmp_path):
        values = np.array([[1.0, -2.5, 3.25], [0.5, 0.0, -1.0]])
        path = tmp_path / "m.emb"
        write_embeddings(EmbeddingMatrix(values), path)
        back = read_embeddings(path)
        assert back.rows.shape == (2, 3)
        assert np.array_equal(back.rows, values)

    def test_round_trip_random_f32(self, tmp_path):
        rng = np.random.default_rng(3)
        for n_rows, dim in [(0, 1), (1, 1), (7, 5), (64, 3)]:
            values = rng.standard_normal((n_rows, dim)).astype(np.float32)
            matrix = EmbeddingMatrix(values.astype(np.float64))
            path = tmp_path / f"m_{n_rows}_{dim}.emb"
            write_embeddings(matrix, path)
            back = read_embeddings(path)
            assert np.array_equal(back.rows, matrix.rows)

    def test_empty_matrix(self, tmp_path):
        path = tmp_path / "m.emb"
        write_embeddings(EmbeddingMatrix(np.empty((0, 4))), path)
        back = read_embeddings(path)
        assert len(back) == 0 and back.dim == 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.emb"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 12)
        with pytest.raises(DataFormatError, match="bad magic"):
            read_embeddings(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "m.emb"
        path.write_bytes(b"EMBMAT01\x02")
        with pytest.raises(DataFormatError, match="truncated"):
            read_embeddings(path)

    def test_truncated_body(self, tmp_path):
        values = np.ones((3, 2))
        path = tmp_path / "m.emb"
        write_embeddings(EmbeddingMatrix(values), path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataFormatError, match="size mismatch"):
            read_embeddings(path)

    def test_zero_dim_write_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_embeddings(EmbeddingMatrix(np.empty((2, 0))), tmp_path / "m.emb")

    def test_normalize(self):
        matrix = EmbeddingMatrix(np.array([[3.0, 4.0], [0.0, 2.0]]))
        unit = matrix.normalize()
        np.testing.assert_allclose(np.linalg.norm(unit.rows, axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(unit.rows[0], [0.6, 0.8])

    def test_normalize_rejects_zero_row(self):
        matrix = EmbeddingMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="row 1"):
            matrix.normalize()


class TestShardMatrix:
    def test_sizes_and_offsets(self):
        matrix = EmbeddingMatrix(np.arange(20.0).reshape(10, 2))
        shards = shard_matrix(matrix, 4)
        assert [len(s.rows) for s in shards] == [4, 4, 2]
        assert [s.start_id for s in shards] == [0, 4, 8]

    def test_default_size_one_shard(self):
        matrix = EmbeddingMatrix(np.ones((5, 3)))
        shards = shard_matrix(matrix, 32768)
        assert len(shards) == 1 and shards[0].start_id == 0

    def test_empty_matrix(self):
        assert shard_matrix(EmbeddingMatrix(np.empty((0, 3))), 4) == []

    def test_zero_shard_size_rejected(self):
        with pytest.raises(ValueError):
            shard_matrix(EmbeddingMatrix(np.ones((2, 2))), 0)

    def test_partition_property(self):
        rng = np.random.default_rng(11)
        matrix = EmbeddingMatrix(rng.standard_normal((17, 3)))
        for shard_size in range(1, 20):
            shards = shard_matrix(matrix, shard_size)
            rebuilt = np.concatenate([s.rows for s in shards], axis=0)
            assert np.array_equal(rebuilt, matrix.rows)
