"""
Text format for user-supplied codes (see README for the grammar):

    # comment
    name: my_code
    lt: 2
    t_total: 2
    k: 2
    round_lengths: 1,1
    C 1
    1.0,0.0;0.0,0.0
    0.0,0.0;0.0,0.0
    D 1
    ...

A C block and a D block follow for every symbol k = 1..K; each block has L_t rows and each row
holds T entries written as "re,im" and separated by ";".
"""
import os
from typing import Iterator

import numpy as np

from ..logger import Logger
from ..utils import InvalidArgument
from .code import LdcCode

logger = Logger().get_logger(__name__)

_HEADER_KEYS = ("name", "lt", "t_total", "k", "round_lengths")


class CodeFormatError(InvalidArgument):
    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")


def _lines(text: str) -> Iterator[tuple]:
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def _parse_row(path: str, line_no: int, line: str, t_total: int) -> list:
    entries = [e.strip() for e in line.split(";")]
    if len(entries) != t_total:
        raise CodeFormatError(path, line_no, f"expected {t_total} entries, got {len(entries)}")
    row = []
    for entry in entries:
        parts = entry.split(",")
        if len(parts) != 2:
            raise CodeFormatError(path, line_no, f"entry '{entry}' is not a re,im pair")
        try:
            row.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise CodeFormatError(path, line_no, f"entry '{entry}' is not numeric")
    return row


def parse_code(text: str, path: str = "<string>") -> LdcCode:
    lines = list(_lines(text))
    header = {}
    pos = 0
    while pos < len(lines) and ":" in lines[pos][1] and len(header) < len(_HEADER_KEYS):
        line_no, line = lines[pos]
        key, value = (p.strip() for p in line.split(":", 1))
        if key not in _HEADER_KEYS:
            raise CodeFormatError(path, line_no, f"unknown header key '{key}'")
        header[key] = value
        pos += 1

    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise CodeFormatError(path, lines[pos][0] if pos < len(lines) else 0,
                              f"missing header keys: {', '.join(missing)}")

    try:
        lt = int(header["lt"])
        t_total = int(header["t_total"])
        k = int(header["k"])
        round_lengths = tuple(int(t) for t in header["round_lengths"].split(","))
    except ValueError as e:
        raise CodeFormatError(path, 0, f"bad header value ({e})")

    mats = {"C": np.zeros((k, lt, t_total), dtype=complex),
            "D": np.zeros((k, lt, t_total), dtype=complex)}
    seen = set()
    while pos < len(lines):
        line_no, line = lines[pos]
        parts = line.split()
        if len(parts) != 2 or parts[0] not in mats:
            raise CodeFormatError(path, line_no, f"expected 'C <k>' or 'D <k>', got '{line}'")
        try:
            idx = int(parts[1])
        except ValueError:
            raise CodeFormatError(path, line_no, f"bad symbol index '{parts[1]}'")
        if not 1 <= idx <= k or (parts[0], idx) in seen:
            raise CodeFormatError(path, line_no, f"symbol index {idx} out of range or repeated")
        seen.add((parts[0], idx))

        if pos + lt >= len(lines):
            raise CodeFormatError(path, line_no, f"block needs {lt} rows")
        for row in range(lt):
            row_no, row_line = lines[pos + 1 + row]
            mats[parts[0]][idx - 1, row] = _parse_row(path, row_no, row_line, t_total)
        pos += lt + 1

    absent = [f"{m} {i}" for m in ("C", "D") for i in range(1, k + 1) if (m, i) not in seen]
    if absent:
        raise CodeFormatError(path, 0, f"missing blocks: {', '.join(absent)}")

    return LdcCode(header["name"], lt, t_total, k, round_lengths, mats["C"], mats["D"])


def load_code(path: str) -> LdcCode:
    if not os.path.exists(path):
        raise InvalidArgument(f"code file {path} not found")
    with open(path) as f:
        code = parse_code(f.read(), path)
    logger.info("loaded code: %s", {"path": path, "code": repr(code)})
    return code


def _fmt(x: float) -> str:
    return repr(float(x))


def format_code(code: LdcCode) -> str:
    out = [
        f"name: {code.name}",
        f"lt: {code.lt}",
        f"t_total: {code.t_total}",
        f"k: {code.k}",
        "round_lengths: " + ",".join(str(t) for t in code.round_lengths),
    ]
    for idx in range(code.k):
        for label, mats in (("C", code.c_mats), ("D", code.d_mats)):
            out.append(f"{label} {idx + 1}")
            for row in mats[idx]:
                out.append(";".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row))
    return "\n".join(out) + "\n"


def save_code(code: LdcCode, path: str):
    with open(path, "w") as f:
        f.write(format_code(code))
