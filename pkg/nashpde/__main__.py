import sys

from nashpde.cli import main

sys.exit(main())
