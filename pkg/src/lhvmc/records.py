"""CSV and JSON serialization of sweep points."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, TextIO

from .estimators import SweepPoint
from .terms import ALL_TERMS, CHI_TERMS, S_TERMS

TERM_COLUMNS = [t.label for t in ALL_TERMS]
STDERR_COLUMNS = [f"stderr_{label}" for label in TERM_COLUMNS]
COLUMNS = (
    ["s", "chi", "S", "omega", "eta", "epsilon"]
    + TERM_COLUMNS
    + STDERR_COLUMNS
    + ["n_trials", "seed", "undefined_terms"]
)
_FLOAT_COLUMNS = ["s", "chi", "S", "omega", "eta", "epsilon"] + TERM_COLUMNS + STDERR_COLUMNS


class RecordError(ValueError):
    """Raised for unreadable sweep files; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(RecordError):
    pass


def format_number(v: float | None) -> str:
    if v is None:
        return "nan"
    return f"{v:.9g}"


def _rounded(v: float | None) -> float | None:
    return None if v is None else float(format_number(v))


def point_fields(p: SweepPoint) -> dict:
    """Column name -> value; floats rounded to 9 significant digits, ``None`` if undefined."""
    values = {
        "s": p.s,
        "chi": p.chi,
        "S": p.S,
        "omega": p.omega,
        "eta": p.eta,
        "epsilon": p.epsilon,
    }
    values.update(zip(TERM_COLUMNS, p.chi_terms + p.S_terms))
    values.update(zip(STDERR_COLUMNS, p.chi_stderr + p.S_stderr))
    out = {k: _rounded(v) for k, v in values.items()}
    out["n_trials"] = p.n_trials
    out["seed"] = p.seed
    out["undefined_terms"] = list(p.undefined_terms)
    return {c: out[c] for c in COLUMNS}


def write_csv(points: Iterable[SweepPoint], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for p in points:
        f = point_fields(p)
        row = [format_number(f[c]) for c in _FLOAT_COLUMNS]
        row += [str(f["n_trials"]), str(f["seed"]), ";".join(f["undefined_terms"])]
        w.writerow(row)


def write_json(points: Iterable[SweepPoint], fh: TextIO, single: bool = False) -> None:
    records = [point_fields(p) for p in points]
    json.dump(records[0] if single else records, fh, indent=2, allow_nan=False)
    fh.write("\n")


def to_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    write_csv(points, buf)
    return buf.getvalue()


def read_csv(fh: TextIO, required: Iterable[str] = COLUMNS) -> list[dict]:
    """Parse a sweep CSV into dicts with floats (``nan`` for undefined) and ints."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("file is empty, expected a header row", line=1) from None
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"missing columns: {', '.join(missing)}", line=1)
    rows = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise RecordError(f"expected {len(header)} fields, found {len(row)}", line=line)
        rec = {}
        for name, text in zip(header, row):
            try:
                if name in ("n_trials", "seed"):
                    rec[name] = int(text)
                elif name == "undefined_terms":
                    rec[name] = [t for t in text.split(";") if t]
                else:
                    rec[name] = float(text)
            except ValueError:
                raise RecordError(f"bad value {text!r} in column {name}", line=line) from None
        rows.append(rec)
    return rows


def chi_s_consistent(rec: dict, atol: float = 1e-6) -> bool:
    """Check the signed-sum relations between totals and terms of a parsed row."""
    chi = sum(t.sign * rec[t.label] for t in CHI_TERMS)
    s = sum(t.sign * rec[t.label] for t in S_TERMS)
    pairs = [(chi, rec["chi"]), (s, rec["S"]), (rec["chi"] + rec["S"], rec["omega"])]
    for computed, stored in pairs:
        if math.isnan(computed) or math.isnan(stored):
            if not (math.isnan(computed) and math.isnan(stored)):
                return False
        elif abs(computed - stored) > atol:
            return False
    return True
