"""Deterministic plain-text serialization for results and manifests.

Every float is printed with 17 significant digits (%.17g), which round-trips
binary64 exactly, so identical configurations produce byte-identical files.
The structured format is JSON written by a small formatter here because the
stdlib encoder cannot be told how to print floats.
"""

import os


def fmt_float(x):
    """%.17g — shortest text that still round-trips any double exactly."""
    return "%.17g" % x


def fmt_cell(value):
    if isinstance(value, bool):
        raise TypeError("ambiguous bool in table cell")
    if isinstance(value, float):
        return fmt_float(value)
    if isinstance(value, (int, str)):
        return str(value)
    # numpy scalars land here
    if hasattr(value, "item"):
        return fmt_cell(value.item())
    raise TypeError(f"cannot format table cell of type {type(value)!r}")


def table_text(header, rows):
    """Comma-separated table with newline-terminated rows."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def density_matrix_rows(rho):
    """Row-major (n, m, re, im) quadruples of a density matrix."""
    rows = []
    for n in range(rho.shape[0]):
        for m in range(rho.shape[1]):
            v = complex(rho[n, m])
            rows.append((n, m, v.real, v.imag))
    return rows


def json_text(obj, indent=0):
    """Deterministic JSON: dict insertion order kept, floats via %.17g."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}{_json_str(k)}: {json_text(v, indent + 1)}' for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_json_scalar(v) for v in obj) + "]"
        items = ",\n".join(f"{inner}{json_text(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    return _json_scalar(obj)


def _json_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return _json_str(v)
    if hasattr(v, "item"):
        return _json_scalar(v.item())
    raise TypeError(f"cannot serialize {type(v)!r}")


def _json_str(s):
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{out}"'


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def read_csv(path):
    """(header, rows-of-strings) of a comma-separated table written here."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]
