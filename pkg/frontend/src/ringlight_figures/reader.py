"""Reader for the raw-float64 + JSON-sidecar artifact container.

Implemented against the container contract (little-endian float64, C
order, sidecar with dims/axes/quantity/scenario hash), independent of
the simulator package.
"""

import json
import os

import numpy as np


class ArtifactError(RuntimeError):
    """Missing or malformed artifact pair."""


class ProvenanceError(RuntimeError):
    """Scenario hashes disagree between panels of one figure."""


def load(path_base):
    """Load (array, sidecar) from ``path_base``(.f64/.json)."""
    base = str(path_base)
    if base.endswith(".f64") or base.endswith(".json"):
        base = base.rsplit(".", 1)[0]
    json_path = base + ".json"
    raw_path = base + ".f64"
    if not os.path.exists(json_path) or not os.path.exists(raw_path):
        raise ArtifactError(f"artifact pair missing for {base!r}")
    with open(json_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("dtype") != "float64" or meta.get("byteorder") != "little":
        raise ArtifactError(f"unsupported encoding in {json_path!r}")
    data = np.fromfile(raw_path, dtype="<f8")
    expected = int(np.prod(meta["shape"]))
    if data.size != expected:
        raise ArtifactError(
            f"size mismatch for {raw_path!r}: {data.size} != {expected}")
    arr = data.reshape(meta["shape"])
    if meta.get("complex"):
        arr = arr[..., 0] + 1j * arr[..., 1]
    return arr, meta


def spectrogram_axes(meta):
    """(times_ps, freqs_thz) grids from a spectrogram sidecar."""
    n_freq = int(meta["n_freq"])
    omega_max = float(meta["omega_max_radps"])
    omegas = np.linspace(omega_max / n_freq, omega_max, n_freq)
    nt = None  # caller knows the row count from the array itself
    t0 = float(meta["t0_ps"])
    dt = float(meta["dt_ps"])
    return (t0, dt), omegas / (2.0 * np.pi)


def check_hash_group(metas):
    """All sidecars in one group must carry the same scenario hash."""
    hashes = {m.get("scenario_hash") for m in metas}
    if len(hashes) != 1 or None in hashes:
        raise ProvenanceError(
            f"scenario hashes disagree within a panel group: {sorted(map(str, hashes))}")
    return hashes.pop()
