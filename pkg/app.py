import sys

from nashpde.cli import main

# --------------------------------------------------------------------------------------
# python app.py solve|verify|oracle <config> [flags]
# --------------------------------------------------------------------------------------
if __name__ == "__main__":
    sys.exit(main())
