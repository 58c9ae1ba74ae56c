"""Perturbative transition analysis for vortex-driven rings.

Evaluates the angular selection-rule integral, the closed-form envelope
Fourier coefficients of photon absorption/emission, and first-order
transition amplitudes between ring eigenstates.  Serves both as a
physics annotation tool (line predictions) and as an independent
low-intensity oracle for the grid propagator: everything here lives in
the (radial grid x analytic angular) representation, never on the 2D
grid.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import EA_SI_TO_MEV_PS_NM, HBAR
from .ring_model import Material, Orbital
from .vortex_field import PulseSpec, radial_profile


def angular_integral(m0, m0p, m_oam):
    """Closed form of the azimuthal selection integral.

    integral_0^{2pi} e^{-i m0' phi} cos(phi) e^{i m_oam phi} e^{i m0 phi} dphi
    equals pi when m0' = m0 + m_oam +/- 1 and vanishes otherwise.
    """
    if m0p == m0 + m_oam + 1 or m0p == m0 + m_oam - 1:
        return complex(math.pi)
    return 0.0j


def _finite_oscillation_integral(a, t_dur):
    """integral_0^T e^{i a t} dt as T e^{iaT/2} sinc(aT/2pi)."""
    return t_dur * np.exp(0.5j * a * t_dur) * np.sinc(a * t_dur / (2.0 * math.pi))


def envelope_fourier(delta_omega, t_dur):
    """integral_0^T sin^2(pi t/T) e^{i delta_omega t} dt, closed form."""
    w_t = 2.0 * math.pi / t_dur
    return (0.5 * _finite_oscillation_integral(delta_omega, t_dur)
            - 0.25 * _finite_oscillation_integral(delta_omega + w_t, t_dur)
            - 0.25 * _finite_oscillation_integral(delta_omega - w_t, t_dur))


def pulse_fourier_coefficients(pulse: PulseSpec, delta_e):
    """(A_minus, A_plus) envelope Fourier coefficients in ps.

    A_-/+ = integral Omega(t) e^{i (delta_e/hbar -/+ omega_x) t} dt for a
    transition of energy ``delta_e`` (meV); absorption is A_minus.
    """
    d = delta_e / HBAR
    a_minus = envelope_fourier(d - pulse.omega, pulse.duration)
    a_plus = envelope_fourier(d + pulse.omega, pulse.duration)
    return a_minus, a_plus


@dataclass(frozen=True)
class TransitionLine:
    """A dipole-allowed transition and its first-order strength."""

    from_label: tuple
    to_label: tuple
    delta_e: float          # meV
    angular_weight: complex  # pi or 0, from the selection integral
    matrix_element: complex  # <f|h+ or h-|i> in meV (channel-resolved sum)
    population: float        # predicted first-order |c_f|^2 from this initial state
    weight: float            # occupation-weighted population, used for ranking

    @property
    def frequency_thz(self):
        return self.delta_e / (2.0 * math.pi * HBAR)


def _channel_coefficients(pulse: PulseSpec):
    """c_plus, c_minus with eps_x dx + eps_y dy decomposed on e^{+-i phi}."""
    ex, ey = pulse.polarization_vector
    return 0.5 * (ex - 1j * ey), 0.5 * (ex + 1j * ey)


def _radial_matrix_element(orb_i: Orbital, orb_f: Orbital, pulse: PulseSpec,
                           winding, sign):
    """Radial quadrature for the channel m0' = m0 + winding + sign.

    ``winding`` is the azimuthal winding of the coupling pattern
    (+m_oam for the absorption operator, -m_oam for its adjoint).
    """
    rho = orb_i.radial_grid
    f_beam = radial_profile(pulse, rho)
    df_beam = np.gradient(f_beam, rho)
    r_i, r_f = orb_i.radial_profile, orb_f.radial_profile
    dr_i = np.gradient(r_i, rho)
    core = f_beam * (dr_i - sign * orb_i.m0 * r_i / rho)
    div = 0.5 * (df_beam - sign * winding * f_beam / rho) * r_i
    return np.trapezoid(r_f * (core + div) * rho, rho)


def transition_amplitude(orb_i: Orbital, orb_f: Orbital, pulse: PulseSpec,
                         material: Material):
    """First-order amplitude c_f for |i> -> |f> under the pulse.

    Includes both the A_minus (absorption) and A_plus (emission) paths of
    the linear coupling; the quadratic A^2 term is outside first order.
    """
    amp = EA_SI_TO_MEV_PS_NM * pulse.amplitude  # e*A0 in meV*ps/nm
    pref = -1j * HBAR * amp / (2.0 * material.mass)
    c_plus, c_minus = _channel_coefficients(pulse)
    a_minus, a_plus = pulse_fourier_coefficients(
        pulse, orb_f.energy - orb_i.energy)
    dm = orb_f.m0 - orb_i.m0

    c_f = 0.0j
    m = pulse.m_oam
    # h+ carries e^{+i m_oam phi}: final m0 = m0 + m_oam +/- 1
    if dm == m + 1:
        me = pref * c_plus * _radial_matrix_element(orb_i, orb_f, pulse, m, +1)
        c_f += (-1j / HBAR) * me * a_minus * np.exp(1j * pulse.cep)
    if dm == m - 1:
        me = pref * c_minus * _radial_matrix_element(orb_i, orb_f, pulse, m, -1)
        c_f += (-1j / HBAR) * me * a_minus * np.exp(1j * pulse.cep)
    # h- = (h+)^dagger carries e^{-i m_oam phi}: final m0 = m0 - m_oam +/- 1
    if dm == -m + 1:
        me = pref * np.conj(c_minus) * _radial_matrix_element(
            orb_i, orb_f, pulse, -m, +1)
        c_f += (-1j / HBAR) * me * a_plus * np.exp(-1j * pulse.cep)
    if dm == -m - 1:
        me = pref * np.conj(c_plus) * _radial_matrix_element(
            orb_i, orb_f, pulse, -m, -1)
        c_f += (-1j / HBAR) * me * a_plus * np.exp(-1j * pulse.cep)
    return complex(c_f)


def predict_lines(orbitals, pulse: PulseSpec, material: Material,
                  occupation_cutoff=1e-4, max_lines=None):
    """All dipole-allowed first-order lines, strongest first.

    ``orbitals`` must carry equilibrium occupations; initial states below
    the cutoff are skipped, and transitions into occupied states are kept
    (no Pauli blocking in the independent-particle kinetics) but ranked
    by the occupation-weighted predicted population.
    """
    by_label = {o.label: o for o in orbitals}
    lines = []
    for orb_i in orbitals:
        if orb_i.occupation < occupation_cutoff:
            continue
        for dm in {pulse.m_oam + 1, pulse.m_oam - 1,
                   -pulse.m_oam + 1, -pulse.m_oam - 1}:
            for orb_f in orbitals:
                if orb_f.m0 - orb_i.m0 != dm or orb_f.label == orb_i.label:
                    continue
                if orb_f.energy <= orb_i.energy:
                    continue
                c_f = transition_amplitude(orb_i, orb_f, pulse, material)
                pop = abs(c_f) ** 2
                if pop == 0.0:
                    continue
                lines.append(TransitionLine(
                    from_label=orb_i.label, to_label=orb_f.label,
                    delta_e=orb_f.energy - orb_i.energy,
                    angular_weight=angular_integral(orb_i.m0, orb_f.m0, pulse.m_oam),
                    matrix_element=c_f * 1j * HBAR,  # undo the -i/hbar for reporting
                    population=pop,
                    weight=orb_i.occupation * pop))
    del by_label
    lines.sort(key=lambda ln: -ln.weight)
    return lines[:max_lines] if max_lines else lines


def predicted_populations(orbitals, pulse: PulseSpec, material: Material,
                          occupation_cutoff=1e-4):
    """Occupation-weighted first-order population per final state.

    Returns {(n0', m0'): sum_i f0_i |c_{i->f}|^2} over all initial states,
    restricted to final states above the Fermi level.
    """
    pops = {}
    for line in predict_lines(orbitals, pulse, material, occupation_cutoff):
        pops[line.to_label] = pops.get(line.to_label, 0.0) + line.weight
    return pops


def lines_to_csv_rows(lines):
    """Rows (n0, m0, n0', m0', delta_e_mev, thz, weight) for the report."""
    return [(ln.from_label[0], ln.from_label[1], ln.to_label[0],
             ln.to_label[1], ln.delta_e, ln.frequency_thz, ln.weight)
            for ln in lines]
