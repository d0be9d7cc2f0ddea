"""Exporter contract tests.

The file contract is verified end to end: everything the exporter
writes must load through the consumer's ``load_embeddings``.  A
deterministic fake encoder stands in for the pretrained model so the
suite runs offline; an optional test exercises the real checkpoint when
it is available locally.
"""

import struct

import numpy as np
import pytest

from embed_exporter import ExportError, ExportJob, export
from topicforge import load_embeddings


class FakeEncoder:
    """Deterministic per-text vectors: identical texts embed identically."""

    def __init__(self, dim=16):
        self.dim = dim
        self.calls = 0

    def encode(self, texts):
        self.calls += 1
        rows = []
        for text in texts:
            seed = sum((i + 1) * ord(c) for i, c in enumerate(text)) % (2**32)
            rows.append(np.random.default_rng(seed).normal(size=self.dim))
        return np.asarray(rows, dtype=np.float32)


def _job(tmp_path, texts, **kwargs):
    input_path = tmp_path / "texts.txt"
    input_path.write_text("\n".join(texts) + ("\n" if texts else ""), encoding="utf-8")
    return ExportJob(
        input_path=str(input_path),
        output_path=str(tmp_path / "out.tfemb"),
        **kwargs,
    )


def _cosine(u, v):
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


class TestExportContract:
    def test_output_loads_with_matching_rows(self, tmp_path):
        texts = [f"documento {i}" for i in range(7)]
        job = _job(tmp_path, texts, batch_size=3)
        summary = export(job, encoder=FakeEncoder())
        matrix = load_embeddings(job.output_path)
        assert summary.rows == len(texts)
        assert matrix.shape == (len(texts), summary.dim)

    def test_header_fields_are_rows_and_dim(self, tmp_path):
        job = _job(tmp_path, ["uno", "dos", "tres"])
        summary = export(job, encoder=FakeEncoder(dim=12))
        raw = open(job.output_path, "rb").read()
        assert raw[:8] == b"TFEMB1\x00\x00"
        assert struct.unpack("<II", raw[8:16]) == (summary.rows, summary.dim)
        assert len(raw) == 16 + summary.rows * summary.dim * 4

    def test_duplicate_lines_embed_identically(self, tmp_path):
        texts = ["la misma frase", "otra frase", "la misma frase"]
        job = _job(tmp_path, texts)
        export(job, encoder=FakeEncoder())
        matrix = load_embeddings(job.output_path)
        assert _cosine(matrix[0], matrix[2]) >= 0.999
        assert _cosine(matrix[0], matrix[1]) < 0.999

    def test_row_order_matches_input_under_any_batch_size(self, tmp_path):
        texts = [f"texto numero {i}" for i in range(10)]
        reference = None
        for batch_size in (1, 3, 10, 64):
            job = _job(tmp_path, texts, batch_size=batch_size)
            export(job, encoder=FakeEncoder())
            matrix = load_embeddings(job.output_path)
            if reference is None:
                reference = matrix
            else:
                assert np.array_equal(matrix, reference)

    def test_csv_input(self, tmp_path):
        path = tmp_path / "docs.csv"
        path.write_text("id,text\n1,hola\n2,adios\n", encoding="utf-8")
        job = ExportJob(
            input_path=str(path),
            output_path=str(tmp_path / "out.tfemb"),
            text_format="csv",
        )
        summary = export(job, encoder=FakeEncoder())
        assert summary.rows == 2

    def test_empty_input_rejected(self, tmp_path):
        job = _job(tmp_path, [])
        with pytest.raises(ExportError, match="no input texts"):
            export(job, encoder=FakeEncoder())

    def test_bad_batch_size_rejected(self, tmp_path):
        job = _job(tmp_path, ["a"], batch_size=0)
        with pytest.raises(ExportError, match="batch size"):
            export(job, encoder=FakeEncoder())

    def test_unwritable_output(self, tmp_path):
        job = _job(tmp_path, ["a"])
        job.output_path = str(tmp_path)  # a directory is not writable as a file
        with pytest.raises((ExportError, OSError)):
            export(job, encoder=FakeEncoder())

    def test_dimension_change_across_batches_rejected(self, tmp_path):
        class ShiftyEncoder:
            def __init__(self):
                self.dims = iter((8, 6))

            def encode(self, texts):
                return np.zeros((len(texts), next(self.dims)), dtype=np.float32)

        job = _job(tmp_path, ["a", "b", "c"], batch_size=2)
        with pytest.raises(ExportError, match="dimension changed"):
            export(job, encoder=ShiftyEncoder())

    def test_non_finite_vectors_rejected(self, tmp_path):
        class NanEncoder:
            def encode(self, texts):
                return np.full((len(texts), 4), np.nan, dtype=np.float32)

        job = _job(tmp_path, ["a"])
        with pytest.raises(ExportError, match="non-finite"):
            export(job, encoder=NanEncoder())


class TestCli:
    def test_cli_end_to_end_with_fake_encoder(self, tmp_path, monkeypatch, capsys):
        from embed_exporter import cli, exporter

        monkeypatch.setattr(exporter, "load_encoder", lambda model: FakeEncoder())
        input_path = tmp_path / "texts.txt"
        input_path.write_text("uno\ndos\n", encoding="utf-8")
        output_path = tmp_path / "out.tfemb"
        code = cli.main(
            ["--input", str(input_path), "--output", str(output_path), "--batch-size", "1"]
        )
        assert code == 0
        assert "2 rows" in capsys.readouterr().out
        assert load_embeddings(output_path).shape[0] == 2

    def test_cli_reports_errors(self, tmp_path, capsys):
        from embed_exporter import cli

        code = cli.main(
            ["--input", str(tmp_path / "missing.txt"), "--output", str(tmp_path / "o.tfemb")]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err


@pytest.mark.slow
def test_real_multilingual_model(tmp_path):
    """Runs only when the pretrained checkpoint is available locally."""
    sentence_transformers = pytest.importorskip("sentence_transformers")
    from embed_exporter import DEFAULT_MODEL, load_encoder

    try:
        encoder = load_encoder(DEFAULT_MODEL)
    except ExportError as exc:
        pytest.skip(f"model unavailable: {exc}")
    texts = ["El mercado creció", "The market grew", "El mercado creció"]
    input_path = tmp_path / "texts.txt"
    input_path.write_text("\n".join(texts) + "\n", encoding="utf-8")
    job = ExportJob(input_path=str(input_path), output_path=str(tmp_path / "o.tfemb"))
    summary = export(job, encoder=encoder)
    matrix = load_embeddings(job.output_path)
    assert summary.dim == 768
    assert _cosine(matrix[0], matrix[2]) >= 0.999
