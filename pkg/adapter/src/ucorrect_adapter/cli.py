"""Adapter CLI: serve a masked-LM scorer, or fine-tune one on plain text."""

from __future__ import annotations

import argparse
import sys

from .backends import load_backend
from .finetune import finetune_tiny
from .protocol import serve_stream, serve_tcp


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucorrect-adapter",
        description="Masked-LM scorer process speaking the ucorrect wire protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="answer scorer requests on stdio or TCP")
    p_serve.add_argument(
        "--model", required=True,
        help="backend identifier: uniform:VOCAB.txt, tiny:DIR, or hf:NAME",
    )
    p_serve.add_argument("--device", default="cpu")
    p_serve.add_argument("--max-batch", type=int, default=16,
                         help="max pending requests scored per batch")
    p_serve.add_argument("--tcp", type=int, metavar="PORT",
                         help="serve on 127.0.0.1:PORT instead of stdio")
    p_serve.set_defaults(func=cmd_serve)

    p_ft = sub.add_parser("finetune", help="masked-LM training on ground-truth text")
    p_ft.add_argument("--corpus", required=True, help="plain text, one sentence per line")
    p_ft.add_argument("--out", required=True, help="output model directory")
    p_ft.add_argument("--base", help="existing tiny:DIR model to continue from")
    p_ft.add_argument("--mask-ratio", type=float, default=0.20)
    p_ft.add_argument("--seed", type=int, default=0)
    p_ft.add_argument("--epochs", type=int, default=30)
    p_ft.add_argument("--lr", type=float, default=5e-3)
    p_ft.add_argument("--device", default="cpu")
    p_ft.set_defaults(func=cmd_finetune)

    return parser


def cmd_serve(args) -> int:
    try:
        backend = load_backend(args.model, device=args.device)
    except Exception as exc:
        print(f"ucorrect-adapter: cannot load model: {exc}", file=sys.stderr)
        return 1
    if args.tcp:
        serve_tcp(backend, args.tcp, max_batch=args.max_batch)
    else:
        serve_stream(backend, sys.stdin, sys.stdout, max_batch=args.max_batch)
    return 0


def cmd_finetune(args) -> int:
    base = args.base
    if base is not None:
        if not base.startswith("tiny:"):
            print("ucorrect-adapter: --base must be a tiny:DIR identifier",
                  file=sys.stderr)
            return 1
        base = base[len("tiny:"):]
    try:
        finetune_tiny(
            args.corpus,
            args.out,
            base_dir=base,
            mask_ratio=args.mask_ratio,
            seed=args.seed,
            epochs=args.epochs,
            lr=args.lr,
            device=args.device,
        )
    except Exception as exc:
        print(f"ucorrect-adapter: fine-tuning failed: {exc}", file=sys.stderr)
        return 1
    print(f"saved model to {args.out}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
