"""``python -m flowcodec.cli`` entry point."""

import sys

from flowcodec.cli import main

if __name__ == "__main__":
    sys.exit(main())
