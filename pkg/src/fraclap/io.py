"""JSON and CSV writers with a metadata header.

CSV output is locale independent (``.`` decimal, ``,`` separator) and prints
floats with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Mapping

import numpy as np

from fraclap import __version__
from fraclap.results import SpectrumResult

__all__ = [
    "fmt_float",
    "metadata",
    "model_to_dict",
    "spectrum_to_csv",
    "spectrum_to_json",
    "weyl_rows_to_csv",
    "weyl_rows_to_json",
]


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def metadata(**fields: Any) -> dict[str, Any]:
    meta = {"tool": "fraclap", "version": __version__}
    meta.update(fields)
    return meta


def _csv_header(meta: Mapping[str, Any]) -> str:
    return "".join(f"# {k}={json.dumps(v, sort_keys=True)}\n" for k, v in meta.items())


def spectrum_to_json(result: SpectrumResult, meta: Mapping[str, Any]) -> str:
    doc = {"metadata": dict(meta)}
    doc.update(result.to_dict())
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def spectrum_to_csv(result: SpectrumResult, meta: Mapping[str, Any]) -> str:
    buf = io.StringIO()
    buf.write(_csv_header(meta))
    buf.write(f"# search_window={fmt_float(result.search_window[0])},{fmt_float(result.search_window[1])}\n")
    for w in result.warnings:
        buf.write(f"# warning={w}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "multiplicity", "method"])
    for e in result.eigenvalues:
        writer.writerow([fmt_float(e.lam), e.multiplicity, e.method])
    return buf.getvalue()


def weyl_rows_to_csv(rows: Iterable[Mapping[str, Any]], meta: Mapping[str, Any]) -> str:
    """One row per lambda; pole rows carry the marker ``pole`` instead of values."""
    buf = io.StringIO()
    buf.write(_csv_header(meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "M11_re", "M12_re", "M22_re", "pole_distance", "inv_norm", "status"])
    for r in rows:
        lam = fmt_float(np.real(r["lambda"]))
        if r.get("status") == "pole":
            writer.writerow([lam, "", "", "", fmt_float(r["pole_distance"]), "", "pole"])
            continue
        M = np.asarray(r["M"])
        writer.writerow(
            [
                lam,
                fmt_float(M[0, 0].real),
                fmt_float(M[0, 1].real),
                fmt_float(M[1, 1].real),
                fmt_float(r["pole_distance"]),
                fmt_float(r["inv_norm"]) if r.get("inv_norm") is not None else "",
                "ok",
            ]
        )
    return buf.getvalue()


def _cplx(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def weyl_rows_to_json(rows: Iterable[Mapping[str, Any]], meta: Mapping[str, Any]) -> str:
    out = []
    for r in rows:
        item: dict[str, Any] = {
            "lambda": _cplx(r["lambda"]),
            "pole_distance": float(r["pole_distance"]),
            "status": r.get("status", "ok"),
        }
        if item["status"] != "pole":
            M = np.asarray(r["M"])
            item["M"] = [[_cplx(M[i, j]) for j in range(2)] for i in range(2)]
            if r.get("inv_norm") is not None:
                item["inv_norm"] = float(r["inv_norm"])
        out.append(item)
    return json.dumps({"metadata": dict(meta), "rows": out}, indent=2, sort_keys=True) + "\n"


def model_to_dict(model) -> dict[str, Any]:
    """Eigenvalues and metadata of a Dirichlet model (flat arrays)."""
    return {
        "metadata": metadata(**model.metadata()),
        "eigvals": [float(x) for x in model.eigvals],
        "stiffness_diag": [float(x) for x in model.stiffness_diag],
    }
