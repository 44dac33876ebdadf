"""Allow running as python -m lib.cli"""

import sys

from lib.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
