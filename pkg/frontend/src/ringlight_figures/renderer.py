"""Paper-style figure rendering from simulator artifacts.

Figures are pure functions of the artifact bytes and the request:
deterministic Agg rasterization at fixed dpi, panel annotations carrying
the detection window and scenario hash, and hash-consistency enforced
across the panels of each scenario group.
"""

from dataclasses import dataclass, field
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .reader import ArtifactError, ProvenanceError, check_hash_group, load

DPI = 150


@dataclass
class FigureRequest:
    """One figure: artifact panels, layout and normalization."""

    panels: list                       # [(title, path_base, group), ...]
    output: str
    layout: tuple = None               # (rows, cols); default single row
    freq_range_thz: tuple = (0.0, 3.0)
    time_range_ps: tuple = None
    log_scale: bool = False
    log_floor: float = 1e-6            # of the global max, log mode only
    cmap: str = "viridis"
    normalize: str = "global"          # "global" or "panel"

    def __post_init__(self):
        if not self.panels:
            raise ValueError("figure needs at least one panel")
        if self.freq_range_thz is not None \
                and self.freq_range_thz[1] <= self.freq_range_thz[0]:
            raise ValueError("empty frequency range")


def _load_panels(request):
    loaded = []
    groups = {}
    for title, base, group in request.panels:
        arr, meta = load(base)
        loaded.append((title, arr, meta, group))
        groups.setdefault(group, []).append(meta)
    hashes = {g: check_hash_group(metas) for g, metas in groups.items()}
    return loaded, hashes


def render_spectrogram_figure(request: FigureRequest):
    """Time-frequency heatmap panels (S0 or Stokes ratios).

    Returns the output path.  With ``normalize='global'`` every panel is
    scaled by the maximum over all panels, matching the shared-colorbar
    presentation of multi-ring figures.
    """
    loaded, hashes = _load_panels(request)
    n = len(loaded)
    rows, cols = request.layout or (1, n)
    fig, axes = plt.subplots(rows, cols, figsize=(3.4 * cols, 2.9 * rows),
                             squeeze=False, sharex=True, sharey=True)
    global_max = max(float(arr.max()) for _, arr, _, _ in loaded)
    if global_max <= 0:
        global_max = 1.0

    for k, (title, arr, meta, group) in enumerate(loaded):
        ax = axes[k // cols][k % cols]
        t0 = float(meta["t0_ps"])
        dt = float(meta["dt_ps"])
        n_freq = int(meta["n_freq"])
        omega_max = float(meta["omega_max_radps"])
        freqs = np.linspace(omega_max / n_freq, omega_max, n_freq) / (2 * np.pi)
        times = t0 + dt * np.arange(arr.shape[0])
        scale = global_max if request.normalize == "global" \
            else max(float(arr.max()), 1e-300)
        img = arr.T / scale
        if request.log_scale:
            img = np.log10(np.maximum(img, request.log_floor))
            vmin, vmax = np.log10(request.log_floor), 0.0
        else:
            vmin, vmax = 0.0, 1.0
        mesh = ax.imshow(img, origin="lower", aspect="auto",
                         extent=(times[0], times[-1], freqs[0], freqs[-1]),
                         cmap=request.cmap, vmin=vmin, vmax=vmax,
                         interpolation="nearest")
        ax.set_title(title, fontsize=9)
        if request.freq_range_thz:
            ax.set_ylim(*request.freq_range_thz)
        if request.time_range_ps:
            ax.set_xlim(*request.time_range_ps)
        if k // cols == rows - 1:
            ax.set_xlabel("time (ps)")
        if k % cols == 0:
            ax.set_ylabel(r"$\omega/2\pi$ (THz)")
        note = f"$\\Delta T$={meta.get('window_ps', '?')} ps  " \
               f"{str(meta.get('scenario_hash', ''))[:8]}"
        ax.text(0.02, 0.97, note, transform=ax.transAxes, fontsize=6,
                va="top", color="white")

    for k in range(n, rows * cols):
        axes[k // cols][k % cols].axis("off")
    fig.colorbar(mesh, ax=[a for row in axes for a in row], shrink=0.85,
                 label="log$_{10}$ S$_0$/max" if request.log_scale
                 else "S$_0$/max")
    _save(fig, request.output)
    return request.output


def render_density_figure(request: FigureRequest):
    """Real-space density snapshot panels."""
    loaded, hashes = _load_panels(request)
    n = len(loaded)
    rows, cols = request.layout or (1, n)
    fig, axes = plt.subplots(rows, cols, figsize=(3.3 * cols, 3.0 * rows),
                             squeeze=False)
    for k, (title, arr, meta, group) in enumerate(loaded):
        ax = axes[k // cols][k % cols]
        ext = float(meta.get("extent_nm", 1.0))
        ax.imshow(arr, origin="lower", cmap="inferno",
                  extent=(-ext, ext, -ext, ext), interpolation="nearest")
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("x (nm)")
        if k % cols == 0:
            ax.set_ylabel("y (nm)")
        ax.text(0.02, 0.97, str(meta.get("scenario_hash", ""))[:8],
                transform=ax.transAxes, fontsize=6, va="top", color="white")
    _save(fig, request.output)
    return request.output


def render_scan_figure(csv_path, output):
    """Winding-number x intensity scan surface from the scan table."""
    rows = np.genfromtxt(csv_path, delimiter=",", names=True)
    m_values = np.unique(rows["m_oam"])
    factors = np.unique(rows["intensity_factor"])
    grid = np.full((len(m_values), len(factors)), np.nan)
    for row in rows:
        i = np.searchsorted(m_values, row["m_oam"])
        j = np.searchsorted(factors, row["intensity_factor"])
        grid[i, j] = row["signal"]
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    mesh = ax.pcolormesh(factors, m_values, grid, cmap="magma",
                         shading="nearest")
    ax.set_xlabel("intensity factor")
    ax.set_ylabel(r"winding number $m$")
    fig.colorbar(mesh, ax=ax, label="band signal")
    _save(fig, output)
    return output


def _save(fig, output):
    os.makedirs(os.path.dirname(os.path.abspath(output)), exist_ok=True)
    fig.savefig(output, dpi=DPI)
    plt.close(fig)


def build_named_figure(name, artifacts_dir, output=None, comparison_dir=None):
    """Assemble the bundled figure layouts by name.

    ``fig2a``/``fig2b``/``fig2c``/``fig6``: single S0 heatmap;
    ``fig1``: density snapshot panels; ``fig4``: the five-panel layout
    (three rings + total + the photon-matched Gaussian comparison from
    ``comparison_dir``); ``fig5b``: scan surface from a scan CSV.
    """
    out = output or os.path.join(artifacts_dir, f"{name}.png")
    if name in ("fig2a", "fig2b", "fig2c", "fig5a", "fig6"):
        req = FigureRequest(
            panels=[("S$_0$ (total)",
                     os.path.join(artifacts_dir, "spectro_s0_total"), "main")],
            output=out)
        return render_spectrogram_figure(req)
    if name == "fig1":
        import glob
        paths = sorted(glob.glob(os.path.join(artifacts_dir, "density_t*.json")))
        if not paths:
            raise ArtifactError("no density snapshots in the artifact dir")
        panels = [(os.path.basename(p)[:-5].replace("density_t", "t = ")
                   .replace("p", "."), p[:-5], "main") for p in paths]
        req = FigureRequest(panels=panels, output=out, freq_range_thz=None)
        return render_density_figure(req)
    if name == "fig4":
        comparison_dir = comparison_dir or os.path.join(
            os.path.dirname(artifacts_dir.rstrip("/")), "fig4e")
        panels = [
            ("(a) ring 1", os.path.join(artifacts_dir, "spectro_s0_ring1"), "vortex"),
            ("(b) ring 2", os.path.join(artifacts_dir, "spectro_s0_ring2"), "vortex"),
            ("(c) ring 3", os.path.join(artifacts_dir, "spectro_s0_ring3"), "vortex"),
            ("(d) total", os.path.join(artifacts_dir, "spectro_s0_total"), "vortex"),
            ("(e) Gaussian comparison",
             os.path.join(comparison_dir, "spectro_s0_total"), "gaussian"),
        ]
        req = FigureRequest(panels=panels, output=out, layout=(2, 3),
                            log_scale=True, log_floor=1e-5)
        return render_spectrogram_figure(req)
    if name == "fig5b":
        csv_path = os.path.join(artifacts_dir, "scan.csv")
        if not os.path.exists(csv_path):
            candidates = [p for p in os.listdir(artifacts_dir)
                          if p.endswith("-scan.csv")]
            if not candidates:
                raise ArtifactError("no scan table found for fig5b")
            csv_path = os.path.join(artifacts_dir, sorted(candidates)[0])
        return render_scan_figure(csv_path, out)
    raise ValueError(f"unknown figure {name!r}")
