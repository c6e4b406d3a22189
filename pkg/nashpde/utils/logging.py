import sys

_QUIET = False


def set_quiet(flag: bool) -> None:
    global _QUIET
    _QUIET = bool(flag)


def log(*args):
    if _QUIET:
        return
    print("[nashpde]", *args, file=sys.stderr)
