"""CSV emission shared by every report: a quantity line, a header, LF endings."""

import csv
import io
from typing import Iterable, Sequence


def csv_table(quantity: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", quantity])
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def fmt(x: float) -> str:
    """Fixed formatting so equal runs give byte-identical files."""
    return f"{x:.6e}"
