"""Scenario configuration, deterministic pipeline runs and artifacts.

A scenario is a YAML document (bundled ones live under
``ringlight/scenarios``) fully describing material, ring stack, pulse,
grid and analysis settings.  ``run_pipeline`` sequences eigensolve ->
occupy -> propagate+relax -> dipoles -> spectrograms -> reports, writing
every array artifact in the raw-float64 + JSON-sidecar container with
the scenario hash embedded.  No randomness exists anywhere in the
pipeline: identical scenarios produce identical bytes.
"""

import csv
import hashlib
import importlib.resources
import json
import math
import os
import time

import numpy as np
import yaml

from . import emission as emission_mod
from . import propagator as prop_mod
from . import selection_oracle
from .arrayio import write_array
from .constants import HBAR
from .ring_model import (GeometryError, Material, RingStack, occupy,
                         orbital_manifest_rows, ring_from_geometry,
                         solve_stationary)
from .vortex_field import KINDS, POLARIZATIONS, PulseSpec, photon_number_match

PACKAGE_VERSION = "0.1.0"


class ValidationError(ValueError):
    """Scenario document is syntactically or semantically invalid."""


_MATERIAL_KEYS = {"effective_mass", "fermi_energy_mev", "temperature_k",
                  "relaxation_time_ps"}
_RING_KEYS = {"radius_nm", "width_nm", "oscillator_energy_mev"}
_STACK_KEYS = {"rings", "barrier_width_nm", "barrier_height_mev",
               "blend_width_nm"}
_PULSE_KEYS = {"kind", "m_oam", "p", "photon_energy_mev", "waist_nm",
               "spot_radius_nm", "peak_intensity_w_cm2", "n_cycles",
               "polarization", "cep", "field_scale",
               "match_photon_number_to"}
_GRID_KEYS = {"nx", "ny", "extent_nm", "dt_fs", "n_steps",
              "absorber_width_nm", "absorber_on", "absorber_strength"}
_SOLVER_KEYS = {"m0_min", "m0_max", "n_per_m", "radial_points",
                "occupation_cutoff", "lanczos_tol"}
_ANALYSIS_KEYS = {"window_ps", "freq_max_thz", "n_freq", "time_step_ps",
                  "sample_every_ps", "snapshot_times_ps", "wavelet",
                  "wavelet_cycles", "oracle_report", "track_autocorr"}
_TOP_KEYS = {"name", "material", "stack", "pulse", "grid", "solver",
             "analysis", "ci_scale"}


def _check_keys(section, allowed, where):
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(
            f"unknown key(s) {sorted(unknown)} in {where}")


def _require(section, key, where):
    if key not in section:
        raise ValidationError(f"missing required key {key!r} in {where}")
    return section[key]


class Scenario:
    """Validated, fully resolved scenario (deterministic, hashable)."""

    def __init__(self, doc):
        if not isinstance(doc, dict) or not doc:
            raise ValidationError(
                "empty scenario document; required sections: name, "
                "material, stack, pulse, grid")
        _check_keys(doc, _TOP_KEYS, "scenario")
        self.name = str(_require(doc, "name", "scenario"))

        mat = dict(_require(doc, "material", "scenario"))
        _check_keys(mat, _MATERIAL_KEYS, "material")
        try:
            self.material = Material(
                effective_mass=float(mat.get("effective_mass", 0.067)),
                fermi_energy=float(mat.get("fermi_energy_mev", 3.3)),
                temperature=float(mat.get("temperature_k", 4.2)),
                relaxation_time=float(mat.get("relaxation_time_ps", 25.0)))
        except ValueError as err:
            raise ValidationError(f"material: {err}") from err

        stack = dict(_require(doc, "stack", "scenario"))
        _check_keys(stack, _STACK_KEYS, "stack")
        rings = []
        for i, ring_doc in enumerate(_require(stack, "rings", "stack")):
            ring_doc = dict(ring_doc)
            _check_keys(ring_doc, _RING_KEYS, f"stack.rings[{i}]")
            rings.append(ring_from_geometry(
                float(_require(ring_doc, "radius_nm", f"rings[{i}]")),
                float(_require(ring_doc, "oscillator_energy_mev", f"rings[{i}]")),
                float(_require(ring_doc, "width_nm", f"rings[{i}]")),
                self.material))
        try:
            self.stack = RingStack(
                rings=tuple(rings),
                barrier_width=float(stack.get("barrier_width_nm", 10.0)),
                barrier_height=float(stack.get("barrier_height_mev", 9.0)),
                blend_width=float(stack.get("blend_width_nm", 2.0)))
        except GeometryError:
            raise
        except ValueError as err:
            raise ValidationError(f"stack: {err}") from err

        pulse = dict(_require(doc, "pulse", "scenario"))
        _check_keys(pulse, _PULSE_KEYS, "pulse")
        kind = _require(pulse, "kind", "pulse")
        if kind not in KINDS:
            raise ValidationError(f"pulse.kind must be one of {KINDS}")
        pol = pulse.get("polarization", "linear_x")
        if pol not in POLARIZATIONS:
            raise ValidationError(
                f"pulse.polarization must be one of {sorted(POLARIZATIONS)}")
        self.match_photon_number_to = pulse.get("match_photon_number_to")
        try:
            self.pulse = PulseSpec(
                kind=kind,
                m_oam=int(pulse.get("m_oam", 0)),
                p=int(pulse.get("p", 0)),
                photon_energy=float(_require(pulse, "photon_energy_mev", "pulse")),
                waist=float(_require(pulse, "waist_nm", "pulse")),
                spot_radius=(None if pulse.get("spot_radius_nm") is None
                             else float(pulse["spot_radius_nm"])),
                peak_intensity=float(_require(pulse, "peak_intensity_w_cm2", "pulse")),
                n_cycles=float(pulse.get("n_cycles", 2.0)),
                polarization=pol,
                cep=float(pulse.get("cep", 0.0)),
                field_scale=float(pulse.get("field_scale", 1.0)))
        except ValueError as err:
            raise ValidationError(f"pulse: {err}") from err
        if self.match_photon_number_to is not None:
            ref_doc = dict(self.match_photon_number_to)
            _check_keys(ref_doc, _PULSE_KEYS - {"match_photon_number_to"},
                        "pulse.match_photon_number_to")
            ref = PulseSpec(
                kind=_require(ref_doc, "kind", "match_photon_number_to"),
                m_oam=int(ref_doc.get("m_oam", 0)),
                p=int(ref_doc.get("p", 0)),
                photon_energy=float(ref_doc.get(
                    "photon_energy_mev", self.pulse.photon_energy)),
                waist=float(_require(ref_doc, "waist_nm", "match_photon_number_to")),
                spot_radius=(None if ref_doc.get("spot_radius_nm") is None
                             else float(ref_doc["spot_radius_nm"])),
                peak_intensity=float(_require(
                    ref_doc, "peak_intensity_w_cm2", "match_photon_number_to")),
                n_cycles=float(ref_doc.get("n_cycles", self.pulse.n_cycles)),
                polarization=ref_doc.get("polarization", pol),
                cep=float(ref_doc.get("cep", 0.0)),
                field_scale=float(ref_doc.get("field_scale",
                                              self.pulse.field_scale)))
            self.pulse = photon_number_match(ref, self.pulse)

        grid = dict(_require(doc, "grid", "scenario"))
        _check_keys(grid, _GRID_KEYS, "grid")
        try:
            self.grid = prop_mod.GridSpec(
                nx=int(grid.get("nx", 256)),
                ny=int(grid.get("ny", 256)),
                extent=float(grid.get("extent_nm", 250.0)),
                dt=float(grid.get("dt_fs", 0.5)),
                n_steps=int(_require(grid, "n_steps", "grid")),
                absorber_width=float(grid.get("absorber_width_nm", 25.0)),
                absorber_on=bool(grid.get("absorber_on", False)),
                absorber_strength=float(grid.get("absorber_strength", 5.0)))
        except ValueError as err:
            raise ValidationError(f"grid: {err}") from err

        solver = dict(doc.get("solver", {}))
        _check_keys(solver, _SOLVER_KEYS, "solver")
        self.m0_min = int(solver.get("m0_min", -14))
        self.m0_max = int(solver.get("m0_max", 14))
        self.n_per_m = int(solver.get("n_per_m", 3))
        self.radial_points = int(solver.get("radial_points", 4000))
        self.occupation_cutoff = float(solver.get("occupation_cutoff", 1e-4))
        self.lanczos_tol = float(solver.get("lanczos_tol", 1e-8))
        if self.m0_min > self.m0_max:
            raise ValidationError("solver: m0_min must not exceed m0_max")

        analysis = dict(doc.get("analysis", {}))
        _check_keys(analysis, _ANALYSIS_KEYS, "analysis")
        self.window = float(analysis.get("window_ps", 1.5))
        self.freq_max_thz = float(analysis.get("freq_max_thz", 5.0))
        self.n_freq = int(analysis.get("n_freq", 512))
        self.spec_time_step = float(analysis.get("time_step_ps", 0.25))
        self.sample_every = float(analysis.get("sample_every_ps", 0.1))
        self.snapshot_times = [float(t) for t in
                               analysis.get("snapshot_times_ps", [])]
        self.wavelet = bool(analysis.get("wavelet", False))
        self.wavelet_cycles = float(analysis.get("wavelet_cycles", 6.0))
        self.oracle_report = bool(analysis.get("oracle_report", True))
        self.track_autocorr = bool(analysis.get("track_autocorr", False))
        if self.window <= 0 or self.freq_max_thz <= 0 or self.n_freq < 2:
            raise ValidationError("analysis: invalid spectrogram settings")

        self.resolved = self._resolve_doc()

    def _resolve_doc(self):
        """Canonical fully resolved document (used for hashing/echo)."""
        return {
            "name": self.name,
            "material": {
                "effective_mass": self.material.effective_mass,
                "fermi_energy_mev": self.material.fermi_energy,
                "temperature_k": self.material.temperature,
                "relaxation_time_ps": self.material.relaxation_time,
            },
            "stack": {
                "barrier_width_nm": self.stack.barrier_width,
                "barrier_height_mev": self.stack.barrier_height,
                "blend_width_nm": self.stack.blend_width,
                "rings": [
                    {"a1": r.a1, "a2": r.a2, "width_nm": r.width}
                    for r in self.stack.rings],
            },
            "pulse": {
                "kind": self.pulse.kind,
                "m_oam": self.pulse.m_oam,
                "p": self.pulse.p,
                "photon_energy_mev": self.pulse.photon_energy,
                "waist_nm": self.pulse.waist,
                "spot_radius_nm": self.pulse.spot_radius,
                "peak_intensity_w_cm2": self.pulse.peak_intensity,
                "n_cycles": self.pulse.n_cycles,
                "polarization": self.pulse.polarization,
                "cep": self.pulse.cep,
                "field_scale": self.pulse.field_scale,
            },
            "grid": {
                "nx": self.grid.nx, "ny": self.grid.ny,
                "extent_nm": self.grid.extent, "dt_fs": self.grid.dt,
                "n_steps": self.grid.n_steps,
                "absorber_width_nm": self.grid.absorber_width,
                "absorber_on": self.grid.absorber_on,
                "absorber_strength": self.grid.absorber_strength,
            },
            "solver": {
                "m0_min": self.m0_min, "m0_max": self.m0_max,
                "n_per_m": self.n_per_m,
                "radial_points": self.radial_points,
                "occupation_cutoff": self.occupation_cutoff,
                "lanczos_tol": self.lanczos_tol,
            },
            "analysis": {
                "window_ps": self.window,
                "freq_max_thz": self.freq_max_thz,
                "n_freq": self.n_freq,
                "time_step_ps": self.spec_time_step,
                "sample_every_ps": self.sample_every,
                "snapshot_times_ps": self.snapshot_times,
                "wavelet": self.wavelet,
                "wavelet_cycles": self.wavelet_cycles,
                "oracle_report": self.oracle_report,
                "track_autocorr": self.track_autocorr,
            },
        }

    @property
    def hash(self):
        blob = json.dumps(self.resolved, sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def duration_ps(self):
        return self.grid.n_steps * self.grid.dt_ps


def _apply_override(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], (dict, list)):
            raise ValidationError(f"override path {dotted!r} not found")
        node = node[key]
    leaf = keys[-1]
    try:
        node[leaf] = yaml.safe_load(value)
    except yaml.YAMLError as err:
        raise ValidationError(f"cannot parse override value {value!r}") from err
    return doc


def parse_scenario(text, overrides=(), ci_scale=False):
    """Parse and validate a scenario YAML document.

    ``overrides`` are dotted key=value strings applied before validation;
    ``ci_scale`` merges the document's ``ci_scale`` section (reduced grid
    and duration for acceptance-speed runs) over the base settings.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ValidationError(f"invalid YAML: {err}") from err
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a mapping")
    if ci_scale:
        patch = doc.pop("ci_scale", None)
        if patch:
            doc = _deep_merge(doc, patch)
    else:
        doc.pop("ci_scale", None)
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        doc = _apply_override(doc, key, value)
    return Scenario(doc)


def _deep_merge(base, patch):
    out = dict(base)
    for key, val in patch.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = val
    return out


def bundled_scenario_names():
    root = importlib.resources.files("ringlight") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir()
                  if p.name.endswith(".yaml"))


def load_scenario(name_or_path, overrides=(), ci_scale=False):
    """Load a bundled scenario by name or any YAML file by path."""
    if os.path.exists(name_or_path):
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return parse_scenario(fh.read(), overrides, ci_scale)
    res = importlib.resources.files("ringlight") / "scenarios" / f"{name_or_path}.yaml"
    if not res.is_file():
        raise ValidationError(
            f"unknown scenario {name_or_path!r}; bundled: "
            f"{', '.join(bundled_scenario_names())}")
    return parse_scenario(res.read_text(encoding="utf-8"), overrides, ci_scale)


def default_output_root():
    return os.environ.get("RINGLIGHT_OUT", "ringlight-out")


class RunManifest:
    """Provenance record written before and finalized after a run."""

    def __init__(self, scenario: Scenario, out_dir):
        self.scenario = scenario
        self.out_dir = out_dir
        self.path = os.path.join(out_dir, "manifest.json")
        self.artifacts = []
        self.data = {
            "scenario_name": scenario.name,
            "scenario_hash": scenario.hash,
            "code_version": PACKAGE_VERSION,
            "resolved_scenario": scenario.resolved,
            "tolerances": {
                "lanczos_tol": scenario.lanczos_tol,
                "occupation_cutoff": scenario.occupation_cutoff,
            },
            "status": "running",
            "artifacts": self.artifacts,
        }

    def write(self):
        os.makedirs(self.out_dir, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def add(self, path):
        self.artifacts.append(os.path.relpath(path, self.out_dir))

    def finalize(self, wall_seconds):
        self.data["status"] = "complete"
        self.data["wall_seconds"] = round(wall_seconds, 3)
        self.write()


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def solve_scenario_orbitals(scn: Scenario):
    """Eigensolve + occupy for a scenario (shared by pipeline stages)."""
    orbitals = solve_stationary(
        scn.stack, scn.material, range(scn.m0_min, scn.m0_max + 1),
        n_per_m=scn.n_per_m, rho_max=scn.grid.extent,
        n_rho=scn.radial_points)
    return occupy(orbitals, scn.material)


def run_pipeline(scn: Scenario, out_root=None, progress=None):
    """Execute the full scenario pipeline; returns the RunManifest.

    Artifacts: orbital manifest (CSV + radial profiles), dipole/D_zz
    traces, per-region Stokes spectrograms, density snapshots, optional
    wavelet cross-check, and the selection-oracle line report.
    """
    t_start = time.time()
    out_root = out_root or default_output_root()
    out_dir = os.path.join(out_root, scn.name)
    manifest = RunManifest(scn, out_dir)
    manifest.write()
    meta = {"scenario_hash": scn.hash, "scenario_name": scn.name}

    orbitals = solve_scenario_orbitals(scn)
    manifest.add(_write_csv(
        os.path.join(out_dir, "orbitals.csv"),
        ("n0", "m0", "energy_mev", "occupation"),
        orbital_manifest_rows(orbitals)))
    kept = [o for o in orbitals if o.occupation >= scn.occupation_cutoff]
    profiles = np.array([o.radial_profile for o in kept])
    manifest.add(write_array(
        os.path.join(out_dir, "radial_profiles"), profiles,
        dict(meta, quantity="radial_profiles", units="nm^-1",
             rho_max_nm=scn.grid.extent,
             labels=[list(o.label) for o in kept])))

    if scn.oracle_report:
        lines = selection_oracle.predict_lines(
            orbitals, scn.pulse, scn.material,
            occupation_cutoff=scn.occupation_cutoff, max_lines=200)
        manifest.add(_write_csv(
            os.path.join(out_dir, "predicted_lines.csv"),
            ("n0", "m0", "n0_final", "m0_final", "delta_e_mev",
             "freq_thz", "weight"),
            selection_oracle.lines_to_csv_rows(lines)))

    state = prop_mod.initialize(orbitals, scn.grid, scn.occupation_cutoff)
    engine = prop_mod.Engine(scn.grid, scn.stack, scn.material, scn.pulse,
                             lanczos_tol=scn.lanczos_tol)
    state, trace = prop_mod.run_evolution(
        state, scn.stack, scn.material, scn.pulse,
        sample_every=scn.sample_every,
        snapshot_times=scn.snapshot_times,
        track_autocorr=scn.track_autocorr,
        engine=engine, progress=progress)

    axes_meta = {"t0_ps": float(trace.times[0]),
                 "dt_ps": float(trace.times[1] - trace.times[0]),
                 "regions": trace.region_names}
    manifest.add(write_array(
        os.path.join(out_dir, "dipole_trace"),
        np.stack([trace.mu_x, trace.mu_y]),
        dict(meta, quantity="dipole_moment", units="e*nm",
             layout="(component, time, region)", **axes_meta)))
    manifest.add(write_array(
        os.path.join(out_dir, "norms"), trace.norms,
        dict(meta, quantity="orbital_norms", layout="(time, orbital)",
             **axes_meta)))
    manifest.add(write_array(
        os.path.join(out_dir, "occupations"), trace.occupations,
        dict(meta, quantity="occupations", layout="(time, orbital)",
             **axes_meta)))
    manifest.add(write_array(
        os.path.join(out_dir, "quadrupole_dzz"), trace.dzz,
        dict(meta, quantity="quadrupole_dzz", units="e*nm^2",
             diagnostic_stats=emission_mod.quadrupole_trace_stats(
                 trace.dzz, trace.times), **axes_meta)))
    for t_snap, dens in sorted(trace.snapshots.items()):
        manifest.add(write_array(
            os.path.join(out_dir, f"density_t{t_snap:.3f}".replace(".", "p")),
            dens, dict(meta, quantity="ensemble_density", units="nm^-2",
                       time_ps=t_snap, extent_nm=scn.grid.extent)))

    dip = emission_mod.DipoleTrace(
        times=trace.times, region_names=trace.region_names,
        mu_x=trace.mu_x, mu_y=trace.mu_y)
    window = emission_mod.DetectionWindow(scn.window)
    omegas = np.linspace(scn.freq_max_thz / scn.n_freq, scn.freq_max_thz,
                         scn.n_freq) * 2.0 * math.pi
    spec_times = np.arange(trace.times[0], trace.times[-1] + 1e-9,
                           scn.spec_time_step)
    spec_meta = dict(meta, window_ps=scn.window,
                     t0_ps=float(spec_times[0]),
                     dt_ps=scn.spec_time_step,
                     omega_max_radps=float(omegas[-1]),
                     n_freq=scn.n_freq, layout="(time, freq)")
    for region in trace.region_names:
        spec = emission_mod.stokes(dip, window, omegas, spec_times,
                                   region=region)
        for comp in ("s0", "s1", "s2", "s3"):
            manifest.add(write_array(
                os.path.join(out_dir, f"spectro_{comp}_{region}"),
                getattr(spec, comp),
                dict(spec_meta, quantity=f"stokes_{comp}", region=region)))
        manifest.add(write_array(
            os.path.join(out_dir, f"spectro_edge_{region}"),
            spec.edge_flags.astype(float),
            dict(spec_meta, quantity="edge_flags", region=region)))

    if scn.wavelet:
        wav = emission_mod.wavelet_check(
            dip, omegas, spec_times, region="total",
            n_cycles=scn.wavelet_cycles)
        manifest.add(write_array(
            os.path.join(out_dir, "wavelet_s0_total"), wav,
            dict(spec_meta, quantity="wavelet_power", region="total",
                 wavelet_cycles=scn.wavelet_cycles)))

    manifest.finalize(time.time() - t_start)
    return manifest
