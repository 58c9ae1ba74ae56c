"""Time-dependent vector potential of the driving beam.

Supports Laguerre-Gaussian vortices, "perfect" vortices (annulus radius
independent of the winding number) and plain Gaussian spots, all with a
sin^2 temporal envelope and a common peak-intensity normalization: the
radial profile f is scaled so max_rho f = 1, and the amplitude A0 is
derived from the quoted peak intensity at that point.

Fields are evaluated in SI (V*s/m); the propagator converts once at its
boundary.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import eval_genlaguerre

from .constants import C_SI, EPS0_SI, HBAR

KINDS = ("laguerre_gauss", "perfect_vortex", "gaussian")
POLARIZATIONS = {
    "linear_x": (1.0, 0.0),
    "linear_y": (0.0, 1.0),
    "circular_plus": (1.0 / math.sqrt(2.0), 1.0j / math.sqrt(2.0)),
    "circular_minus": (1.0 / math.sqrt(2.0), -1.0j / math.sqrt(2.0)),
}


@dataclass(frozen=True)
class PulseSpec:
    """Full description of the driving field.

    Attributes
    ----------
    kind : str
        One of ``laguerre_gauss``, ``perfect_vortex``, ``gaussian``.
    m_oam : int
        Topological charge (forced to 0 for a Gaussian).
    p : int
        Radial node index (Laguerre-Gaussian only).
    photon_energy : float
        hbar*omega_x in meV.
    waist : float
        Spot waist w0 in nm (annular width for a perfect vortex).
    spot_radius : float or None
        Annulus radius rho_r in nm (perfect vortex only).
    peak_intensity : float
        Quoted peak intensity in W/cm^2 at the spatio-temporal maximum.
    n_cycles : float
        Pulse duration in optical cycles; T_dur = n_cycles * 2 pi/omega_x.
    polarization : str
        ``linear_x``, ``linear_y``, ``circular_plus`` or ``circular_minus``.
    cep : float
        Carrier-envelope phase in rad.
    field_scale : float
        Dimensionless rescaling of the converted amplitude (see README);
        scenarios quote nominal intensities and calibrate through this.
    """

    kind: str
    m_oam: int = 0
    p: int = 0
    photon_energy: float = 2.5
    waist: float = 150.0
    spot_radius: float = None
    peak_intensity: float = 1.0e10
    n_cycles: float = 2.0
    polarization: str = "linear_x"
    cep: float = 0.0
    field_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown beam kind {self.kind!r}")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {self.polarization!r}")
        if self.peak_intensity <= 0:
            raise ValueError("peak_intensity must be positive")
        if self.n_cycles <= 0:
            raise ValueError("n_cycles must be positive")
        if self.p < 0:
            raise ValueError("p must be non-negative")
        if self.photon_energy <= 0:
            raise ValueError("photon_energy must be positive")
        if self.waist <= 0:
            raise ValueError("waist must be positive")
        if self.kind == "gaussian" and self.m_oam != 0:
            object.__setattr__(self, "m_oam", 0)
        if self.kind == "perfect_vortex":
            if self.spot_radius is None or self.spot_radius <= 0:
                raise ValueError("perfect_vortex requires spot_radius > 0")

    @property
    def omega(self):
        """Carrier angular frequency in rad/ps."""
        return self.photon_energy / HBAR

    @property
    def duration(self):
        """Pulse duration T_dur in ps."""
        return self.n_cycles * 2.0 * math.pi / self.omega

    @property
    def amplitude(self):
        """Effective A0 in V*s/m, including field_scale."""
        return self.field_scale * amplitude_from_intensity(
            self.peak_intensity, self.photon_energy)

    @property
    def polarization_vector(self):
        return POLARIZATIONS[self.polarization]

    def envelope(self, t):
        """sin^2 envelope, zero outside [0, T_dur]."""
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.duration)
        out = np.zeros_like(t)
        out[inside] = np.sin(math.pi * t[inside] / self.duration) ** 2
        return out if out.ndim else float(out)

    def envelope_derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.duration)
        out = np.zeros_like(t)
        arg = math.pi * t[inside] / self.duration
        out[inside] = (math.pi / self.duration) * np.sin(2.0 * arg)
        return out if out.ndim else float(out)

    def carrier(self, t):
        """Complex scalar Omega(t) e^{i(cep - omega t)} (zero outside support)."""
        return self.envelope(t) * np.exp(1j * (self.cep - self.omega * t))


def amplitude_from_intensity(peak_intensity, photon_energy):
    """A0 = E0/omega with E0 = sqrt(2 I/(c eps0)), in V*s/m.

    ``peak_intensity`` in W/cm^2, ``photon_energy`` in meV.  The
    conversion is anchored at the spatial profile maximum where f = 1.
    """
    if peak_intensity <= 0 or photon_energy <= 0:
        raise ValueError("peak_intensity and photon_energy must be positive")
    e0 = math.sqrt(2.0 * peak_intensity * 1.0e4 / (C_SI * EPS0_SI))  # V/m
    omega_si = photon_energy / HBAR * 1.0e12  # rad/s
    return e0 / omega_si


def _lg_profile_unnormalized(pulse, rho):
    m = abs(pulse.m_oam)
    w0 = pulse.waist
    x = np.sqrt(2.0) * rho / w0
    arg = 2.0 * rho**2 / w0**2
    return x**m * eval_genlaguerre(pulse.p, m, arg) * np.exp(-rho**2 / w0**2)


def _lg_peak(pulse):
    """max_rho |f_unnorm| for the LG profile (analytic for p = 0)."""
    m = abs(pulse.m_oam)
    if pulse.p == 0:
        if m == 0:
            return 1.0
        rho_pk = pulse.waist * math.sqrt(m / 2.0)
        return float(abs(_lg_profile_unnormalized(pulse, np.array([rho_pk]))[0]))
    # p > 0: bracketed scan + local refinement over the oscillatory profile
    rho = np.linspace(0.0, 6.0 * pulse.waist, 4001)[1:]
    vals = np.abs(_lg_profile_unnormalized(pulse, rho))
    k = int(np.argmax(vals))
    lo, hi = rho[max(k - 1, 0)], rho[min(k + 1, len(rho) - 1)]
    res = minimize_scalar(
        lambda r: -abs(_lg_profile_unnormalized(pulse, np.array([r]))[0]),
        bounds=(lo, hi), method="bounded")
    return float(-res.fun)


def radial_profile(pulse: PulseSpec, rho):
    """Normalized radial distribution f(rho), max_rho f = 1."""
    rho = np.asarray(rho, dtype=float)
    if pulse.kind == "laguerre_gauss":
        return _lg_profile_unnormalized(pulse, rho) / _lg_peak(pulse)
    if pulse.kind == "perfect_vortex":
        return np.exp(-((rho - pulse.spot_radius) ** 2) / pulse.waist**2)
    return np.exp(-(rho**2) / pulse.waist**2)


def spatial_pattern(pulse: PulseSpec, x, y):
    """Complex pattern A0*f(rho)*e^{i m phi} in V*s/m on the given points.

    The full field is A(x,y,t) = Re{eps_hat * pattern * carrier(t)}.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho = np.hypot(x, y)
    phi = np.arctan2(y, x)
    return pulse.amplitude * radial_profile(pulse, rho) * np.exp(1j * pulse.m_oam * phi)


@dataclass(frozen=True)
class FieldSample:
    """Vector-potential components at given points and time (SI, V*s/m)."""

    Ax: np.ndarray
    Ay: np.ndarray


def vector_potential(pulse: PulseSpec, x, y, t):
    """Sample A(x, y, t); zero outside the envelope support [0, T_dur]."""
    pattern = spatial_pattern(pulse, x, y)
    c = pulse.carrier(t)
    ex, ey = pulse.polarization_vector
    return FieldSample(Ax=np.real(ex * pattern * c), Ay=np.real(ey * pattern * c))


def electric_field(pulse: PulseSpec, x, y, t):
    """E = -dA/dt evaluated analytically (SI, V/m; lengths nm, times ps)."""
    pattern = spatial_pattern(pulse, x, y)
    dc = ((pulse.envelope_derivative(t) - 1j * pulse.omega * pulse.envelope(t))
          * np.exp(1j * (pulse.cep - pulse.omega * t)))
    ex, ey = pulse.polarization_vector
    # d/dt in ps -> SI seconds
    return (np.real(ex * pattern * dc) * 1.0e12,
            np.real(ey * pattern * dc) * 1.0e12)


def photon_number(pulse: PulseSpec, rho_max, n_rho=2000, steps_per_cycle=256):
    """Space-time integral of |E|^2/(hbar omega_x), numerically.

    Polar quadrature over [0, rho_max] nm and trapezoid in time over the
    pulse window.  Units are (V/m)^2 nm^2 ps / meV: fixed but arbitrary,
    only ratios are used.
    """
    rho = np.linspace(0.0, rho_max, n_rho + 1)[1:]
    f = radial_profile(pulse, rho)
    # angular integral of |Re{eps f e^{i m phi} c}|^2 summed over both
    # components gives pi |f c|^2 for any unit polarization
    radial_integral = 2.0 * math.pi * np.trapezoid(f**2 * rho, rho) / 2.0

    nt = max(int(steps_per_cycle * pulse.n_cycles), 64)
    t = np.linspace(0.0, pulse.duration, nt)
    dc = np.abs(pulse.envelope_derivative(t) - 1j * pulse.omega * pulse.envelope(t))**2
    time_integral = np.trapezoid(dc, t)

    a0 = pulse.amplitude * 1.0e12  # V*s/m * (1/ps -> 1/s) carrier derivative scale
    return a0**2 * radial_integral * time_integral / pulse.photon_energy


def photon_number_match(reference: PulseSpec, target, rho_max=500.0):
    """Rescale ``target``'s intensity to carry the reference's photon number.

    ``target`` may be a PulseSpec template (its geometry is kept) or a
    kind string, in which case a default geometry is derived from the
    reference: a Gaussian comparison beam covers the reference annulus
    (waist = spot_radius or waist), other kinds inherit the reference
    geometry.  If the target kind equals the reference kind and no
    template is given, the reference is returned unchanged.
    """
    if isinstance(target, str):
        if target == reference.kind:
            return reference
        if target == "gaussian":
            waist = reference.spot_radius or reference.waist
            target = replace(reference, kind="gaussian", m_oam=0,
                             spot_radius=None, waist=waist)
        else:
            target = replace(reference, kind=target)

    n_ref = photon_number(reference, rho_max)
    n_tgt = photon_number(target, rho_max)
    if not (np.isfinite(n_ref) and np.isfinite(n_tgt)) or n_tgt <= 0:
        raise RuntimeError("photon-number normalization integral did not converge")
    return replace(target, peak_intensity=target.peak_intensity * n_ref / n_tgt)
