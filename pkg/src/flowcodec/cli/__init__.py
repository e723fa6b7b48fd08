"""
flowcodec CLI - train, compress, render and analyse flow-layer video models.

Heavy modules are imported per command, after ``--threads`` has been applied,
so the BLAS thread variables take effect.
"""

import os
import sys
from importlib import import_module
from textwrap import dedent
from typing import List, Optional

from ._style import BOLD, CYAN, DIM, RED, RESET, YELLOW

COMMANDS = {
    "encode": "Train on a video and write a .cfv bitstream",
    "decode": "Render frames from a bitstream or model file",
    "eval": "PSNR of a model against a reference video",
    "upsample": "Render on a denser grid / interpolate frames",
    "segment": "Per-pixel layer maps (indexed PNG + weights.npy)",
    "inpaint": "Render one layer alone",
    "stabilize": "Smooth per-layer motion and re-render",
    "info": "Header, parameter accounting, section sizes",
}

_BLAS_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def print_help():
    """Print CLI help."""
    listing = "\n".join(f"            {CYAN}{name:<10}{RESET} {text}" for name, text in COMMANDS.items())
    print(dedent(f"""
        {BOLD}flowcodec{RESET} - Layered flow-network video codec

        {BOLD}Usage:{RESET}
            flowcodec <command> [options]

        {BOLD}Commands:{RESET}
{listing}

        {BOLD}Global options:{RESET}
            --threads N   worker cap for frame-parallel work (1 = bit-reproducible)

        {BOLD}Examples:{RESET}
            {DIM}# Compress a frame directory with the tiny preset{RESET}
            flowcodec encode frames/ -o clip.cfv --preset tiny --epochs 53
            flowcodec info clip.cfv
            flowcodec decode clip.cfv -o decoded/ --scale 2
            flowcodec stabilize clip.cfv -o steady/ --window 9

        {BOLD}Environment Variables:{RESET}
            {YELLOW}FLOWCODEC_THREADS{RESET}     Default worker cap
            {YELLOW}FLOWCODEC_LOG_LEVEL{RESET}   debug | info | warn | error | fatal
            {YELLOW}FLOWCODEC_PROGRESS{RESET}    Show progress bars (true/false)

        Use '{CYAN}flowcodec <command> --help{RESET}' for more information.
    """).strip())


def _strip_threads(argv: List[str]) -> tuple:
    """Remove ``--threads N`` / ``--threads=N`` from argv; returns (argv, N or None)."""
    out, threads, i = [], None, 0
    while i < len(argv):
        a = argv[i]
        if a == "--threads" and i + 1 < len(argv):
            threads, i = argv[i + 1], i + 2
            continue
        if a.startswith("--threads="):
            threads = a.split("=", 1)[1]
        else:
            out.append(a)
        i += 1
    return out, threads


def _apply_threads(value: str) -> Optional[str]:
    try:
        n = int(value)
    except ValueError:
        return f"--threads must be an integer, got {value!r}"
    if n < 1:
        return f"--threads must be >= 1, got {n}"
    for var in _BLAS_VARS:
        os.environ[var] = str(n)
    from .. import config

    config.Runtime.threads = n
    return None


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = list(sys.argv[1:] if argv is None else argv)

    # before any numpy-heavy import
    args, threads = _strip_threads(args)
    if threads is not None:
        problem = _apply_threads(threads)
        if problem:
            print(f"{RED}error:{RESET} {problem}", file=sys.stderr)
            return 1

    if not args:
        print_help()
        return 1

    command = args[0]
    if command in ("-h", "--help", "help"):
        print_help()
        return 0

    if command not in COMMANDS:
        print(f"{RED}Unknown command:{RESET} {command}", file=sys.stderr)
        print_help()
        return 1

    module = import_module(f".commands.{command}", __name__)
    return module.main(args[1:])
