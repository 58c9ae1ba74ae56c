"""Physical constants and unit conventions.

Internal unit system: energies in meV, lengths in nm, times in ps.
In these units hbar = 0.6582... meV*ps and the free-electron mass is
5.6856e-3 meV*ps^2/nm^2.  Laser fields cross the SI boundary exactly
once: a vector-potential amplitude A0 given in V*s/m is converted to
the canonical-momentum scale e*A0 via ``EA_SI_TO_MEV_PS_NM`` (the
elementary charge cancels against the eV in meV, so the factor is a
clean power of ten).
"""

import math

# hbar in meV*ps (CODATA: 6.582119569e-16 eV*s)
HBAR = 0.6582119569

# free-electron mass in meV*ps^2/nm^2  (m_e c^2 = 510998.95 keV,
# c = 2.99792458e5 nm/ps)
C_NM_PS = 2.99792458e5
M_E = 510998.95000e3 / C_NM_PS**2

# Boltzmann constant in meV/K
K_B = 8.617333262e-2

# SI constants used by the intensity -> field conversion
C_SI = 2.99792458e8          # m/s
EPS0_SI = 8.8541878128e-12   # F/m
E_CHARGE_SI = 1.602176634e-19  # C

# e * (1 V*s/m) = 1e3 meV*s/m = 1e6 meV*ps/nm, exactly
EA_SI_TO_MEV_PS_NM = 1.0e6

# default GaAs conduction-band effective mass (dimensionless multiple of m_e)
GAAS_EFFECTIVE_MASS = 0.067

# emission prefactor 1/(6 pi^2 eps0 c^3) in SI
STOKES_PREFACTOR_SI = 1.0 / (6.0 * math.pi**2 * EPS0_SI * C_SI**3)

# dipole second derivative e*nm/ps^2 -> C*m/s^2
DIPOLE_ACCEL_TO_SI = E_CHARGE_SI * 1.0e-9 / 1.0e-24


def thz_to_mev(nu_thz):
    """Photon energy in meV of an ordinary frequency given in THz."""
    return 2.0 * math.pi * HBAR * nu_thz


def mev_to_thz(e_mev):
    """Ordinary frequency in THz of a photon energy given in meV."""
    return e_mev / (2.0 * math.pi * HBAR)
