"""``export_embeddings`` command line entry point."""

from __future__ import annotations

import argparse
import sys

from .exporter import DEFAULT_MODEL, ExportError, ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="export_embeddings",
        description="Embed a text file with a pretrained sentence encoder "
        "and write a TFEMB1 binary embedding file.",
    )
    parser.add_argument("--input", required=True, help="input text file")
    parser.add_argument("--output", required=True, help="output .tfemb file")
    parser.add_argument(
        "--model", default=DEFAULT_MODEL,
        help=f"sentence-transformers checkpoint (default: {DEFAULT_MODEL})",
    )
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument(
        "--format", choices=("lines", "csv"), default="lines",
        help="input layout: one document per line, or CSV",
    )
    parser.add_argument(
        "--text-column", default="text", help="CSV column holding the text"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        input_path=args.input,
        output_path=args.output,
        model=args.model,
        batch_size=args.batch_size,
        text_format=args.format,
        text_column=args.text_column,
    )
    try:
        summary = export(job)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{summary.rows} rows x {summary.dim} dims in {summary.elapsed:.1f}s -> {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
