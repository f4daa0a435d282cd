"""Bridge CLI: export embeddings from a pretrained encoder, convert BUCC data.

Exit codes: 0 success, 1 usage error, 2 data/format error.
"""

from __future__ import annotations

import argparse
import sys

from .bucc import convert_bucc
from .export import ExportConfig, export_embeddings
from .formats import BridgeFormatError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="encoder-bridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("export", help="mean-pooled sentence embeddings to EMBMAT01")
    p.add_argument("--model", required=True)
    p.add_argument("--layer", type=int, default=12)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--max-length", type=int, default=256)
    p.add_argument("--device", default="cpu")
    p.add_argument(
        "--exclude-special", action="store_true",
        help="drop boundary/special tokens from the pooling mean",
    )

    p = sub.add_parser("convert-bucc", help="BUCC corpora + gold to engine formats")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out-dir", required=True)

    return parser


def _cmd_export(args) -> int:
    cfg = ExportConfig(
        model=args.model,
        layer=args.layer,
        batch_size=args.batch,
        max_length=args.max_length,
        device=args.device,
        include_special_tokens=not args.exclude_special,
    )
    out = export_embeddings(args.in_path, args.out, cfg)
    print(f"export: wrote {out} (meta at {out}.meta)", file=sys.stderr)
    return 0


def _cmd_convert_bucc(args) -> int:
    result = convert_bucc(args.src, args.tgt, args.gold, args.out_dir)
    print(
        f"convert-bucc: {result.n_src} source / {result.n_tgt} target sentences, "
        f"{result.n_gold} gold pairs -> {args.out_dir}",
        file=sys.stderr,
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "export":
            return _cmd_export(args)
        return _cmd_convert_bucc(args)
    except (BridgeFormatError, ValueError, OSError, RuntimeError) as exc:
        print(f"encoder-bridge: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
