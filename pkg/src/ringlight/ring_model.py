"""Confinement landscape, stationary states and equilibrium occupations.

A single ring is the analytically solvable inverse-square-plus-parabolic
well V(rho) = a1/rho^2 + a2*rho^2 - 2*sqrt(a1*a2); intercalated rings are
assembled piecewise from re-centred wells separated by flat tunneling
barriers.  The stationary eigenproblem is solved per angular quantum
number m0 on a radial grid after the symmetrizing substitution
u = sqrt(rho)*R.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .constants import HBAR, K_B, M_E, GAAS_EFFECTIVE_MASS


class GeometryError(ValueError):
    """Raised when a ring-stack geometry is physically inconsistent."""


class AccuracyError(RuntimeError):
    """Raised when a numerical result fails its internal accuracy check."""


@dataclass(frozen=True)
class Material:
    """Host material and thermodynamic parameters.

    Attributes
    ----------
    effective_mass : float
        Conduction-band effective mass as a multiple of the free-electron
        mass (dimensionless).
    fermi_energy : float
        Fermi level in meV, measured from the bottom of the ring wells.
    temperature : float
        Electron temperature in K.
    relaxation_time : float
        Relaxation time of the occupation kinetics in ps.
    """

    effective_mass: float = GAAS_EFFECTIVE_MASS
    fermi_energy: float = 3.3
    temperature: float = 4.2
    relaxation_time: float = 25.0

    def __post_init__(self):
        if self.effective_mass <= 0:
            raise ValueError("effective_mass must be positive")
        if self.relaxation_time <= 0:
            raise ValueError("relaxation_time must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")

    @property
    def mass(self):
        """Effective mass in internal units (meV*ps^2/nm^2)."""
        return self.effective_mass * M_E


@dataclass(frozen=True)
class RingSpec:
    """One ring well: V(rho) = a1/rho^2 + a2*rho^2 - 2*sqrt(a1*a2).

    ``a1`` is in meV*nm^2, ``a2`` in meV/nm^2.  ``width`` (nm) is the
    effective annulus width used for the piecewise stack assembly and for
    ring-resolved dipole domains; it is stored, not derived, because the
    width relation ties it to a Fermi energy the ring does not know.
    """

    a1: float
    a2: float
    width: float

    def __post_init__(self):
        if self.a1 < 0:
            raise ValueError("a1 must be non-negative")
        if self.a2 <= 0:
            raise ValueError("a2 must be positive")
        if self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def radius(self):
        """Mean ring radius rho0 = (a1/a2)^(1/4) in nm (0 for a dot)."""
        return (self.a1 / self.a2) ** 0.25

    @property
    def v0(self):
        """Well-depth offset V0 = 2*sqrt(a1*a2) in meV; V(rho0) = 0."""
        return 2.0 * math.sqrt(self.a1 * self.a2)

    def oscillator_energy(self, material: Material):
        """hbar*omega0 in meV, with omega0 = sqrt(8*a2/m*)."""
        return HBAR * math.sqrt(8.0 * self.a2 / material.mass)

    def classical_width(self, material: Material, fermi_energy=None):
        """Turning-point width sqrt(8*E_F/(m* omega0^2)) in nm."""
        e_f = material.fermi_energy if fermi_energy is None else fermi_energy
        omega0 = math.sqrt(8.0 * self.a2 / material.mass)
        return math.sqrt(8.0 * e_f / (material.mass * omega0**2))

    def potential(self, rho):
        """Evaluate the bare well at radius rho (nm), vectorized."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0.0):
            raise ValueError("potential requires rho > 0")
        return self.a1 / rho**2 + self.a2 * rho**2 - self.v0


def ring_from_geometry(radius, oscillator_energy, width, material: Material):
    """Build a RingSpec from mean radius (nm) and hbar*omega0 (meV).

    a2 follows from omega0 = sqrt(8*a2/m*), and a1 = a2*rho0^4 pins the
    well minimum at ``radius``.
    """
    omega0 = oscillator_energy / HBAR
    a2 = material.mass * omega0**2 / 8.0
    a1 = a2 * radius**4
    return RingSpec(a1=a1, a2=a2, width=width)


def ring_from_width(radius, width, material: Material, fermi_energy=None):
    """Calibrate a ring from its geometry via the width relation.

    Picks a2 such that the classical turning-point width at the Fermi
    energy equals ``width``, then a1 = a2*radius^4.
    """
    e_f = material.fermi_energy if fermi_energy is None else fermi_energy
    if e_f <= 0:
        raise ValueError("fermi_energy must be positive for width calibration")
    # width = sqrt(8 E_F / (m* omega0^2))  =>  omega0 = sqrt(8 E_F/m*)/width
    omega0 = math.sqrt(8.0 * e_f / material.mass) / width
    return ring_from_geometry(radius, HBAR * omega0, width, material)


def ring_tuned_to_transition(radius, width, material: Material, target_energy,
                             n0=0, m0=0, n0_final=1, m0_final=3):
    """Calibrate a ring so a chosen transition lands at ``target_energy``.

    Solves for hbar*omega0 such that E(n0_final, m0_final) - E(n0, m0)
    equals ``target_energy`` (meV) under the closed-form spectrum.
    """

    def detune(hbar_omega0):
        ring = ring_from_geometry(radius, hbar_omega0, width, material)
        gap = (analytic_energy(ring, n0_final, m0_final, material)
               - analytic_energy(ring, n0, m0, material))
        return gap - target_energy

    lo, hi = 1e-3 * target_energy, 4.0 * target_energy
    hbar_omega0 = brentq(detune, lo, hi, xtol=1e-12, rtol=1e-14)
    return ring_from_geometry(radius, hbar_omega0, width, material)


@dataclass(frozen=True)
class RingStack:
    """Ordered collection of ring wells, outermost first.

    Gaps between adjacent wells are flat plateaus at ``barrier_height``
    (meV), joined to the well edges by cubic blends of half-width
    ``blend_width`` (nm) so the assembled potential is C^1.
    """

    rings: tuple
    barrier_width: float = 10.0
    barrier_height: float = 9.0
    blend_width: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "rings", tuple(self.rings))
        if not self.rings:
            raise GeometryError("stack needs at least one ring")
        radii = [r.radius for r in self.rings]
        if any(r2 >= r1 for r1, r2 in zip(radii, radii[1:])):
            raise GeometryError("ring radii must be strictly decreasing "
                                f"(got {radii})")
        for outer, inner in zip(self.rings, self.rings[1:]):
            gap = ((outer.radius - outer.width / 2.0)
                   - (inner.radius + inner.width / 2.0))
            if gap + 1e-9 < self.barrier_width:
                raise GeometryError(
                    "wells overlap: gap between rings at "
                    f"{outer.radius:.1f} and {inner.radius:.1f} nm is "
                    f"{gap:.2f} nm < barrier_width {self.barrier_width} nm")

    @property
    def outer_edge(self):
        return self.rings[0].radius + self.rings[0].width / 2.0

    @property
    def inner_edge(self):
        return self.rings[-1].radius - self.rings[-1].width / 2.0

    def annulus(self, index):
        """(rho_lo, rho_hi) of ring ``index`` (0 = outermost)."""
        ring = self.rings[index]
        return (ring.radius - ring.width / 2.0, ring.radius + ring.width / 2.0)


def _smoothstep(s):
    return s * s * (3.0 - 2.0 * s)


def potential(stack: RingStack, rho):
    """Composite radial confinement potential in meV.

    Inside well i the re-centred ring form applies; between wells the
    potential sits at ``barrier_height`` with cubic blends over
    ``blend_width`` at each junction.  Outside the outermost (innermost)
    well edge the corresponding ring form continues, providing the
    confining walls.
    """
    rho = np.asarray(rho, dtype=float)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    if np.any(rho <= 0.0):
        raise ValueError("potential requires rho > 0")

    rings = stack.rings
    out = rings[0].potential(rho)
    if len(rings) == 1:
        return float(out[0]) if scalar else out

    # walk outermost -> innermost, overwriting regions inward of each well
    for outer, inner in zip(rings, rings[1:]):
        e_hi = outer.radius - outer.width / 2.0   # outer well's inner edge
        e_lo = inner.radius + inner.width / 2.0   # inner well's outer edge
        b = min(stack.blend_width, 0.5 * (e_hi - e_lo))
        h = stack.barrier_height

        sel = rho < e_hi
        out[sel] = h
        # blend plateau -> outer well over [e_hi - b, e_hi]
        sel = (rho >= e_hi - b) & (rho < e_hi)
        if np.any(sel):
            s = (rho[sel] - (e_hi - b)) / b
            out[sel] = h + _smoothstep(s) * (outer.potential(e_hi) - h)
        # blend inner well -> plateau over [e_lo, e_lo + b]
        sel = (rho >= e_lo) & (rho < e_lo + b)
        if np.any(sel):
            s = (rho[sel] - e_lo) / b
            out[sel] = inner.potential(e_lo) + _smoothstep(s) * (h - inner.potential(e_lo))
        sel = rho < e_lo
        out[sel] = inner.potential(rho[sel])

    return float(out[0]) if scalar else out


def analytic_energy(ring: RingSpec, n0, m0, material: Material):
    """Closed-form single-ring level in meV.

    E = (n0 + 1/2 + sqrt(m0^2 + 2 m* a1/hbar^2)/2) hbar*omega0
        - (m*/4) omega0^2 rho0^2
    """
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    mass = material.mass
    omega0 = math.sqrt(8.0 * ring.a2 / mass)
    nu = math.sqrt(m0 * m0 + 2.0 * mass * ring.a1 / HBAR**2)
    return ((n0 + 0.5 + 0.5 * nu) * HBAR * omega0
            - 0.25 * mass * omega0**2 * ring.radius**2)


@dataclass
class Orbital:
    """A stationary state labelled (n0, m0) with its radial profile.

    ``radial_profile`` holds R(rho) on ``radial_grid`` with the 2D-measure
    normalization  integral |R|^2 rho drho = 1;  the full wavefunction is
    R(rho) e^{i m0 phi} / sqrt(2 pi).
    """

    n0: int
    m0: int
    energy: float
    radial_grid: np.ndarray = field(repr=False)
    radial_profile: np.ndarray = field(repr=False)
    occupation: float = 0.0

    @property
    def label(self):
        return (self.n0, self.m0)


def _radial_hamiltonian_bands(v_radial, rho, mass, m0):
    """Symmetrized finite-volume bands of the radial Hamiltonian.

    Discretizes -(1/rho) d/drho (rho dR/drho) conservatively on the
    cell-centred grid and symmetrizes with the sqrt(rho) measure; the
    inward flux at the origin vanishes naturally, so the m0 = 0 channel
    needs no singular boundary term.
    """
    h = rho[1] - rho[0]
    kin = HBAR**2 / (2.0 * mass)
    rho_up = rho + 0.5 * h
    rho_dn = np.maximum(rho - 0.5 * h, 0.0)
    diag = kin * (rho_up + rho_dn) / (h * h * rho) \
        + v_radial + kin * m0 * m0 / rho**2
    off = -kin * rho_up[:-1] / (h * h * np.sqrt(rho[:-1] * rho[1:]))
    return diag, off


def solve_stationary(stack: RingStack, material: Material, m0_range,
                     n_per_m=3, rho_max=250.0, n_rho=3000,
                     check_accuracy=True):
    """Solve the radial eigenproblem for each m0 and return Orbitals.

    Parameters
    ----------
    m0_range : iterable of int
        Angular quantum numbers to solve for.
    n_per_m : int
        Number of lowest radial states per m0.
    rho_max, n_rho : float, int
        Radial grid extent (nm) and point count; the grid starts one
        spacing away from the origin with Dirichlet ends.
    check_accuracy : bool
        Re-solve the lowest level on a coarser grid and flag drift.

    Returns
    -------
    list of Orbital, sorted by energy (m0 ties broken by m0).
    """
    if n_per_m < 1:
        raise ValueError("n_per_m must be at least 1")
    m0_values = sorted(set(int(m) for m in m0_range))
    h = rho_max / n_rho
    rho = (np.arange(n_rho) + 0.5) * h
    v_radial = potential(stack, rho)

    # the radial operator depends on m0 only through m0^2
    cache = {}
    orbitals = []
    for m0 in m0_values:
        key = abs(m0)
        if key not in cache:
            diag, off = _radial_hamiltonian_bands(v_radial, rho, material.mass, key)
            vals, vecs = eigh_tridiagonal(
                diag, off, select="i", select_range=(0, n_per_m - 1))
            # normalize on the flat u-measure: sum(u^2) h = int R^2 rho drho
            vecs = vecs / np.sqrt(h)
            # sign convention: positive mean near the dominant lobe
            for j in range(vecs.shape[1]):
                k = np.argmax(np.abs(vecs[:, j]))
                if vecs[k, j] < 0:
                    vecs[:, j] = -vecs[:, j]
            cache[key] = (vals, vecs)
        vals, vecs = cache[key]
        for n0 in range(n_per_m):
            profile = vecs[:, n0] / np.sqrt(rho)
            orbitals.append(Orbital(n0=n0, m0=m0, energy=float(vals[n0]),
                                    radial_grid=rho, radial_profile=profile))

    if check_accuracy:
        _grid_drift_check(stack, material, m0_values[0], rho_max, n_rho,
                          cache[abs(m0_values[0])][0][0])

    orbitals.sort(key=lambda o: (o.energy, o.m0))
    return orbitals


def _grid_drift_check(stack, material, m0, rho_max, n_rho, e_fine):
    """Compare the lowest eigenvalue against a half-resolution solve.

    Catches catastrophic under-resolution; slow tail convergence (the
    sqrt(rho) cusp of m0 = 0 dots) stays within the absolute floor.
    """
    h = rho_max / (n_rho // 2)
    rho = (np.arange(n_rho // 2) + 0.5) * h
    v_radial = potential(stack, rho)
    diag, off = _radial_hamiltonian_bands(v_radial, rho, material.mass, abs(m0))
    e_coarse = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0][0]
    drift = abs(e_coarse - e_fine)
    if drift > max(1e-3 * abs(e_fine), 0.01):
        raise AccuracyError(
            f"radial grid too coarse: lowest level drifts by "
            f"{drift:.3e} meV between resolutions")


def fermi_dirac(energy, material: Material):
    """Equilibrium occupation 1/(1 + exp((E - E_F)/kT)); step at T = 0."""
    energy = np.asarray(energy, dtype=float)
    e_f = material.fermi_energy
    if material.temperature == 0.0:
        return np.where(energy < e_f, 1.0, np.where(energy == e_f, 0.5, 0.0))
    x = (energy - e_f) / (K_B * material.temperature)
    # clip to keep exp well-behaved; tails are exactly 0/1 at this point
    return 1.0 / (1.0 + np.exp(np.clip(x, -700.0, 700.0)))


def occupy(orbitals, material: Material):
    """Assign Fermi-Dirac equilibrium occupations in place and return them."""
    for orb in orbitals:
        if not math.isfinite(orb.energy):
            raise ValueError(f"non-finite energy on orbital {orb.label}")
        orb.occupation = float(fermi_dirac(orb.energy, material))
    return orbitals


def orbital_manifest_rows(orbitals):
    """Rows (n0, m0, energy_mev, occupation) for the CSV manifest."""
    return [(o.n0, o.m0, o.energy, o.occupation) for o in orbitals]
