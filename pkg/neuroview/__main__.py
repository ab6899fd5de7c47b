"""Permite ejecutar la CLI con `python -m neuroview`."""

import sys

from neuroview.cli import main

if __name__ == "__main__":
    sys.exit(main())
