"""Allow ``python -m subplanck``."""

import sys

from subplanck.cli import main

sys.exit(main())
