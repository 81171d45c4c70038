"""Render report entries as canonical json, csv or an aligned text table."""
from __future__ import annotations

import csv
import io
import json

FORMATS = ("json", "csv", "human")
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def exit_code(entries):
    return EXIT_FAIL if any(_get(e, "verdict") == "fail" for e in entries) else EXIT_PASS


def _get(e, key):
    return e[key] if isinstance(e, dict) else getattr(e, key)


def _as_dict(e, timings, points):
    return dict(e) if isinstance(e, dict) else e.to_dict(timings=timings, points=points)


def _num(x):
    return "" if x is None else f"{x:.3e}"


def to_json(entries, coverage=None, timings=False, points=False):
    rows = [_as_dict(e, timings, points) for e in entries]
    summary = {"total": len(rows)}
    for verdict in ("pass", "fail", "skipped"):
        summary[verdict] = sum(r["verdict"] == verdict for r in rows)
    doc = {"entries": rows, "summary": summary}
    if coverage is not None:
        doc["coverage"] = list(coverage)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def to_csv(entries, points=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not points:
        w.writerow(["scenario", "check", "target", "verdict", "reason", "residual", "tolerance",
                    "samples", "skipped_samples"])
        for e in entries:
            d = _as_dict(e, False, False)
            w.writerow([d["scenario"], d["check"], d["target"], d["verdict"], d["reason"] or "",
                        _num(d["residual"]), f"{d['tolerance']:g}", d["samples"], d["skipped_samples"]])
        return buf.getvalue()
    # one row per sample; the coordinate columns are s or (u, v)
    columns = []
    dicts = [_as_dict(e, False, True) for e in entries]
    for d in dicts:
        for row in d.get("points", []):
            for k in row:
                if k not in columns:
                    columns.append(k)
    coords = [c for c in ("s", "u", "v") if c in columns]
    rest = [c for c in columns if c not in coords]
    w.writerow(["scenario", "check", "target", "verdict"] + coords + rest)
    for d in dicts:
        for row in d.get("points", []):
            w.writerow([d["scenario"], d["check"], d["target"], d["verdict"]]
                       + [_cell(row.get(c)) for c in coords + rest])
    return buf.getvalue()


def _cell(x):
    return "" if x is None else repr(float(x))


def to_human(entries):
    dicts = [_as_dict(e, False, False) for e in entries]
    if not dicts:
        return "no entries\n"
    rows = []
    for d in dicts:
        verdict = d["verdict"].upper()
        if d["reason"]:
            verdict += f"({d['reason']})"
        rows.append((verdict, d["scenario"], d["check"], d["target"],
                     _num(d["residual"]) or "-", f"{d['tolerance']:g}", str(d["samples"])))
    head = ("VERDICT", "SCENARIO", "CHECK", "TARGET", "RESIDUAL", "TOL", "N")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head] + rows]
    n_fail = sum(d["verdict"] == "fail" for d in dicts)
    n_skip = sum(d["verdict"] == "skipped" for d in dicts)
    lines.append(f"{len(dicts) - n_fail - n_skip} passed, {n_fail} failed, {n_skip} skipped")
    return "\n".join(lines) + "\n"


def emit_report(entries, fmt="json", out=None, coverage=None, timings=False, points=False):
    """Render ``entries``; write to the path ``out`` if given.  Returns (text, exit code)."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    if fmt == "json":
        text = to_json(entries, coverage, timings, points)
    elif fmt == "csv":
        text = to_csv(entries, points)
    else:
        text = to_human(entries)
    if out is not None:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"unwritable-output: {out}: {exc.strerror}") from exc
    return text, exit_code(entries)


def load_report(text):
    """Entries of a saved json report, as dicts."""
    return json.loads(text)["entries"]
