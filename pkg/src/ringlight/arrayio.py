"""Raw-array artifact container: little-endian float64 + JSON sidecar.

Every array artifact is a pair ``<name>.f64`` (raw LE float64, C order)
and ``<name>.json`` describing dims, axes, quantity and provenance.
Complex arrays are stored with a trailing interleaved (re, im) axis and
flagged in the sidecar.  The format is deliberately trivial so any
consumer (including the figure renderer) can read it bit-exactly.
"""

import json
import os

import numpy as np

SIDECAR_KEYS_REQUIRED = ("dtype", "shape", "order", "byteorder")


def write_array(path_base, array, meta=None):
    """Write ``array`` to ``path_base``.f64 with a JSON sidecar.

    ``meta`` entries are merged into the sidecar; keys colliding with the
    structural fields are rejected.
    """
    array = np.asarray(array)
    is_complex = np.iscomplexobj(array)
    if is_complex:
        flat = np.empty(array.shape + (2,), dtype="<f8")
        flat[..., 0] = array.real
        flat[..., 1] = array.imag
    else:
        flat = np.ascontiguousarray(array, dtype="<f8")
    header = {
        "dtype": "float64",
        "shape": list(flat.shape),
        "order": "C",
        "byteorder": "little",
        "complex": bool(is_complex),
    }
    meta = dict(meta or {})
    clash = set(meta) & set(header)
    if clash:
        raise ValueError(f"meta keys clash with structural fields: {sorted(clash)}")
    header.update(meta)

    os.makedirs(os.path.dirname(os.path.abspath(str(path_base))) or ".", exist_ok=True)
    with open(str(path_base) + ".f64", "wb") as fh:
        fh.write(flat.tobytes(order="C"))
    with open(str(path_base) + ".json", "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return str(path_base) + ".f64"


def read_array(path_base):
    """Read an artifact written by :func:`write_array`.

    Returns (array, sidecar_dict); complex flattening is undone.
    """
    base = str(path_base)
    if base.endswith(".f64") or base.endswith(".json"):
        base = base.rsplit(".", 1)[0]
    with open(base + ".json", "r", encoding="utf-8") as fh:
        header = json.load(fh)
    for key in SIDECAR_KEYS_REQUIRED:
        if key not in header:
            raise ValueError(f"sidecar missing required key {key!r}")
    if header["dtype"] != "float64" or header["byteorder"] != "little":
        raise ValueError("unsupported array encoding")
    raw = np.fromfile(base + ".f64", dtype="<f8")
    arr = raw.reshape(header["shape"])
    if header.get("complex"):
        arr = arr[..., 0] + 1j * arr[..., 1]
    return arr, header
