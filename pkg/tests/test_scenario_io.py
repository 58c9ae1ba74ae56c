"""Scenario parsing, artifact container, pipeline determinism."""

import hashlib
import json
import os

import numpy as np
import pytest
import yaml

from ringlight.arrayio import read_array, write_array
from ringlight.ring_model import GeometryError
from ringlight.scenario_io import (Scenario, ValidationError,
                                   bundled_scenario_names, load_scenario,
                                   parse_scenario, run_pipeline)

MINIMAL = """
name: tiny
material: {fermi_energy_mev: 3.3, temperature_k: 0.1}
stack:
  rings:
    - {radius_nm: 150.0, width_nm: 40.0, oscillator_energy_mev: 2.2735413735}
pulse:
  kind: laguerre_gauss
  m_oam: 2
  photon_energy_mev: 2.5
  waist_nm: 150.0
  peak_intensity_w_cm2: 1.0e+10
  field_scale: 1.0e-4
grid: {nx: 64, ny: 64, extent_nm: 250.0, dt_fs: 4.0, n_steps: 150}
solver: {m0_min: -4, m0_max: 4, n_per_m: 2, radial_points: 1200}
analysis:
  window_ps: 0.15
  freq_max_thz: 4.0
  n_freq: 48
  time_step_ps: 0.1
  sample_every_ps: 0.02
  snapshot_times_ps: [0.3]
  oracle_report: true
"""


class TestParsing:
    def test_bundled_fig2a_roundtrip(self):
        scn = load_scenario("fig2a")
        assert scn.name == "fig2a"
        assert scn.pulse.m_oam == 2
        assert scn.pulse.photon_energy == 2.5
        assert scn.stack.rings[0].radius == pytest.approx(150.0)
        # resolved echo re-parses to the identical scenario hash
        echo = scn.resolved
        assert Scenario._resolve_doc is not None
        assert json.dumps(echo, sort_keys=True)  # serializable

    def test_bundled_names_cover_paper_figures(self):
        names = bundled_scenario_names()
        for required in ("fig1", "fig2a", "fig2b", "fig2c", "fig4", "fig4e",
                         "fig5a", "fig6"):
            assert required in names

    def test_empty_document_lists_requirements(self):
        with pytest.raises(ValidationError) as err:
            parse_scenario("")
        msg = str(err.value)
        for word in ("name", "material", "stack", "pulse", "grid"):
            assert word in msg

    def test_unknown_keys_rejected(self):
        doc = yaml.safe_load(MINIMAL)
        doc["pulse"]["typo_key"] = 1
        with pytest.raises(ValidationError) as err:
            parse_scenario(yaml.safe_dump(doc))
        assert "typo_key" in str(err.value)

    def test_increasing_radii_geometry_error(self):
        doc = yaml.safe_load(MINIMAL)
        doc["stack"]["rings"] = [
            {"radius_nm": 100.0, "width_nm": 30.0, "oscillator_energy_mev": 3.0},
            {"radius_nm": 150.0, "width_nm": 30.0, "oscillator_energy_mev": 3.0},
        ]
        with pytest.raises(GeometryError):
            parse_scenario(yaml.safe_dump(doc))

    def test_missing_field_named(self):
        doc = yaml.safe_load(MINIMAL)
        del doc["pulse"]["photon_energy_mev"]
        with pytest.raises(ValidationError) as err:
            parse_scenario(yaml.safe_dump(doc))
        assert "photon_energy_mev" in str(err.value)

    def test_overrides(self):
        scn = parse_scenario(MINIMAL, overrides=["pulse.m_oam=4",
                                                 "grid.nx=128"])
        assert scn.pulse.m_oam == 4
        assert scn.grid.nx == 128

    def test_bad_override_path(self):
        with pytest.raises(ValidationError):
            parse_scenario(MINIMAL, overrides=["pulse.nope.deep=1"])

    def test_ci_scale_merges(self):
        scn_full = load_scenario("fig2a")
        scn_ci = load_scenario("fig2a", ci_scale=True)
        assert scn_ci.grid.nx == 256
        assert scn_full.grid.nx == 512
        assert scn_ci.grid.n_steps < scn_full.grid.n_steps

    def test_hash_stability_and_sensitivity(self):
        a = parse_scenario(MINIMAL)
        b = parse_scenario(MINIMAL)
        c = parse_scenario(MINIMAL, overrides=["pulse.m_oam=3"])
        assert a.hash == b.hash
        assert a.hash != c.hash


class TestArrayContainer:
    def test_real_roundtrip(self, tmp_path):
        arr = np.arange(12.0).reshape(3, 4)
        base = str(tmp_path / "x")
        write_array(base, arr, {"quantity": "test", "scenario_hash": "h"})
        out, meta = read_array(base)
        np.testing.assert_array_equal(out, arr)
        assert meta["quantity"] == "test"
        assert meta["shape"] == [3, 4]

    def test_complex_roundtrip(self, tmp_path):
        arr = np.arange(6.0).reshape(2, 3) + 1j
        base = str(tmp_path / "c")
        write_array(base, arr)
        out, meta = read_array(base)
        np.testing.assert_array_equal(out, arr)
        assert meta["complex"] is True

    def test_meta_clash_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_array(str(tmp_path / "y"), np.zeros(3), {"shape": [9]})

    def test_little_endian_bytes(self, tmp_path):
        base = str(tmp_path / "z")
        write_array(base, np.array([1.0]))
        raw = open(base + ".f64", "rb").read()
        assert raw == np.array([1.0], dtype="<f8").tobytes()


@pytest.mark.slow
class TestPipeline:
    def test_tiny_pipeline_and_determinism(self, tmp_path):
        scn = parse_scenario(MINIMAL)
        man1 = run_pipeline(scn, out_root=str(tmp_path / "run1"))
        man2 = run_pipeline(scn, out_root=str(tmp_path / "run2"))
        assert man1.data["status"] == "complete"
        names = sorted(man1.artifacts)
        assert names == sorted(man2.artifacts)
        for name in names:
            if not name.endswith(".f64"):
                continue
            b1 = open(os.path.join(man1.out_dir, name), "rb").read()
            b2 = open(os.path.join(man2.out_dir, name), "rb").read()
            assert hashlib.sha256(b1).hexdigest() == \
                hashlib.sha256(b2).hexdigest(), f"{name} differs"
        # provenance: every sidecar carries the scenario hash
        for name in names:
            if name.endswith(".f64"):
                meta = json.load(open(
                    os.path.join(man1.out_dir, name[:-4] + ".json")))
                assert meta["scenario_hash"] == scn.hash

    def test_manifest_lifecycle(self, tmp_path):
        scn = parse_scenario(MINIMAL)
        man = run_pipeline(scn, out_root=str(tmp_path))
        data = json.load(open(man.path))
        assert data["status"] == "complete"
        assert data["scenario_hash"] == scn.hash
        assert data["wall_seconds"] > 0
        assert len(data["artifacts"]) >= 10
