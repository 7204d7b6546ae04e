"""Allows ``python -m bugs_regression``."""

import sys

from .cli import main

sys.exit(main())
