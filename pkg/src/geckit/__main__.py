"""Module entry point so `python -m geckit` behaves like the geckit script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
