# nashpde/formatting.py
from __future__ import annotations

from typing import Any, Iterable, Sequence

_BULLET = "•"


def fmt_num(x: Any, digits: int = 3) -> str:
    """Compact scientific notation for floats, str() for everything else."""
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.{digits}e}"
    return str(x)


def table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    cells = [[str(h) for h in header]] + [[fmt_num(c) for c in row] for row in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]

    def line(row: Sequence[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(cells[0]), rule] + [line(r) for r in cells[1:]])


def bulletize(items: Iterable[str]) -> str:
    return "\n".join(f"{_BULLET} {s}" for s in items if s)


def solve_summary(report) -> str:
    rows = [
        ("mode", report.mode),
        ("solver", report.solver),
        ("iterations", report.iterations),
        ("relative residual", report.residual),
        ("ellipticity probe", report.ellipticity_probe),
        ("min eig. of sym. part", report.ellipticity_min),
    ]
    rows += [(f"J_{i + 1}", J) for i, J in enumerate(report.J_values)]
    out = table(("quantity", "value"), rows)
    if report.notes:
        out += "\n\n" + bulletize(report.notes)
    return out


def equivalence_table(reports) -> str:
    return table(
        ("functional", "constant", "predicted", "max deviation", "argmin distance"),
        [
            (r.label + (" (literal)" if r.literal else ""), r.mean, r.predicted_constant, r.relative_deviation, r.argmin_distance)
            for r in reports
        ],
    )


def checks_table(checks: Sequence[dict]) -> str:
    return table(
        ("check", "value", "limit", "passed"),
        [(c["name"], c.get("value"), c.get("limit"), c["passed"]) for c in checks],
    )
