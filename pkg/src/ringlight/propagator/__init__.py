"""Minimal-coupling time evolution of the occupied orbitals on a 2D grid.

Each occupied orbital evolves under

    i hbar dpsi/dt = [ p^2/2m* + V(rho) + (P.p + p.P)/2m* + P^2/2m* ] psi

with P = e*A the canonical-momentum field of the beam.  One time step is
the symmetric composition

    T(dt/2) . D(dt/2) . W(dt) . D(dt/2) . T(dt/2)

where T is the kinetic Cayley propagator (exactly norm-preserving; the
x and y factors commute exactly), D the position-diagonal phase from
V + P^2/2m*, and W the Hermitian gradient coupling, exponentiated in a
short Lanczos recurrence (order-controlled, norm-preserving).  Interior
kinetic half-steps merge across steps; the run loop realigns at every
sampling boundary.

Occupations follow the relaxation-time kinetics independently of the
wavefunctions and only weight the observables.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from ..constants import EA_SI_TO_MEV_PS_NM, HBAR
from ..ring_model import GeometryError, Material, RingStack, potential
from ..vortex_field import PulseSpec, spatial_pattern
from . import backend as _backend


class StabilityError(RuntimeError):
    """Raised on norm drift or divergence beyond tolerance."""


@dataclass(frozen=True)
class GridSpec:
    """Cartesian simulation grid and stepping parameters.

    The domain is [-extent, extent]^2 nm with cell-centred points (the
    origin falls between cells), ``dt`` is in fs, and the absorbing mask
    ramps over ``absorber_width`` nm from the domain edge when enabled.
    """

    nx: int = 256
    ny: int = 256
    extent: float = 250.0
    dt: float = 0.5
    n_steps: int = 24000
    absorber_width: float = 25.0
    absorber_on: bool = False
    absorber_strength: float = 5.0

    def __post_init__(self):
        if self.nx < 64 or self.ny < 64:
            raise ValueError("grid needs at least 64 points per axis")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.extent <= 0:
            raise ValueError("extent must be positive")

    @property
    def dt_ps(self):
        return self.dt * 1e-3

    @property
    def dx(self):
        return 2.0 * self.extent / self.nx

    @property
    def dy(self):
        return 2.0 * self.extent / self.ny

    @property
    def x(self):
        return -self.extent + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self):
        return -self.extent + (np.arange(self.ny) + 0.5) * self.dy

    def meshes(self):
        return np.meshgrid(self.x, self.y)

    @property
    def cell_area(self):
        return self.dx * self.dy


@dataclass
class EvolvingState:
    """Stack of orbital fields with their kinetic occupations and clock."""

    psi: np.ndarray                 # (n_orb, ny, nx) complex128
    labels: list                    # [(n0, m0), ...]
    energies: np.ndarray            # eigenenergies, meV
    occupations: np.ndarray         # f(t)
    eq_occupations: np.ndarray      # f0 (Fermi-Dirac)
    t: float                        # ps
    grid: GridSpec

    @property
    def n_orbitals(self):
        return self.psi.shape[0]

    def norms(self):
        """Per-orbital grid norms ||psi||^2 (cell-sum times cell area)."""
        return np.einsum("kij,kij->k", self.psi.real, self.psi.real) \
            * self.grid.cell_area \
            + np.einsum("kij,kij->k", self.psi.imag, self.psi.imag) \
            * self.grid.cell_area

    def copy(self):
        return EvolvingState(psi=self.psi.copy(), labels=list(self.labels),
                             energies=self.energies.copy(),
                             occupations=self.occupations.copy(),
                             eq_occupations=self.eq_occupations.copy(),
                             t=self.t, grid=self.grid)


def initialize(orbitals, grid: GridSpec, occupation_cutoff=1e-4):
    """Embed radial eigenfunctions as psi = R(rho) e^{i m0 phi}/sqrt(2 pi).

    Orbitals with equilibrium occupation below ``occupation_cutoff`` are
    dropped.  Each embedded field is renormalized to exactly unit grid
    norm.  Raises GeometryError when an orbital's radial support leaks
    past the grid extent.
    """
    kept = [o for o in orbitals if o.occupation >= occupation_cutoff]
    if not kept:
        raise ValueError("no orbitals above the occupation cutoff")
    X, Y = grid.meshes()
    rho = np.hypot(X, Y)
    phi = np.arctan2(Y, X)
    psi = np.empty((len(kept), grid.ny, grid.nx), dtype=np.complex128)
    for k, orb in enumerate(kept):
        r_grid = orb.radial_grid
        tail = np.trapezoid(
            (orb.radial_profile**2 * r_grid)[r_grid > grid.extent],
            r_grid[r_grid > grid.extent])
        if tail > 1e-8:
            raise GeometryError(
                f"orbital {orb.label} support exceeds the grid extent "
                f"(tail norm {tail:.2e})")
        spline = CubicSpline(r_grid, orb.radial_profile, extrapolate=False)
        radial = spline(np.clip(rho, r_grid[0], r_grid[-1]))
        radial[rho > r_grid[-1]] = 0.0
        field2d = radial * np.exp(1j * orb.m0 * phi) / math.sqrt(2.0 * math.pi)
        field2d /= math.sqrt(np.sum(np.abs(field2d) ** 2) * grid.cell_area)
        psi[k] = field2d
    return EvolvingState(
        psi=psi,
        labels=[o.label for o in kept],
        energies=np.array([o.energy for o in kept]),
        occupations=np.array([o.occupation for o in kept]),
        eq_occupations=np.array([o.occupation for o in kept]),
        t=0.0,
        grid=grid)


def relax_occupations(state: EvolvingState, material: Material, dt):
    """Exact relaxation-time update f <- f0 + (f - f0) exp(-dt/tau)."""
    decay = math.exp(-dt / material.relaxation_time)
    state.occupations = (state.eq_occupations
                         + (state.occupations - state.eq_occupations) * decay)
    return state


def ensemble_density(state: EvolvingState):
    """Occupation-weighted density sum_k f_k |psi_k|^2 on the grid."""
    dens = np.zeros((state.grid.ny, state.grid.nx))
    for k in range(state.n_orbitals):
        f = state.occupations[k]
        if f == 0.0:
            continue
        dens += f * (state.psi[k].real**2 + state.psi[k].imag**2)
    return dens


def autocorrelations(state: EvolvingState, psi0):
    """Per-orbital overlaps <psi0_k | psi_k(t)> on the grid measure."""
    return np.einsum("kij,kij->k", psi0.conj(), state.psi) * state.grid.cell_area


class Engine:
    """Precomputed stepping context for one (grid, stack, pulse) scenario."""

    def __init__(self, grid: GridSpec, stack: RingStack, material: Material,
                 pulse: PulseSpec, lanczos_tol=1e-8, lanczos_max=14,
                 norm_tol_per_step=1e-8, kernels=None):
        self.grid = grid
        self.stack = stack
        self.material = material
        self.pulse = pulse
        self.lanczos_tol = lanczos_tol
        self.lanczos_max = lanczos_max
        self.norm_tol_per_step = norm_tol_per_step
        self.kernels = kernels or _backend.kernels()

        dt = grid.dt_ps
        mass = material.mass
        X, Y = grid.meshes()
        rho = np.maximum(np.hypot(X, Y), 1e-3)
        self.v2d = potential(stack, rho)
        # static phases exp(-i V dt/(2 hbar)); the merged full-step
        # variant serves field-free steps (D/2 . 1 . D/2 = D)
        self.phase_half = np.exp(-0.5j * dt * self.v2d / HBAR)
        self.phase_full = self.phase_half * self.phase_half

        kinetic_scale = HBAR * HBAR / (2.0 * mass)
        gamma = dt / (2.0 * HBAR)
        kf = self.kernels.CayleyFactor
        self.cay_x_full = kf(grid.nx, grid.dx, gamma, kinetic_scale)
        self.cay_y_full = kf(grid.ny, grid.dy, gamma, kinetic_scale)
        self.cay_x_half = kf(grid.nx, grid.dx, gamma / 2.0, kinetic_scale)
        self.cay_y_half = kf(grid.ny, grid.dy, gamma / 2.0, kinetic_scale)

        # beam pattern in canonical-momentum units (meV ps/nm)
        pat = EA_SI_TO_MEV_PS_NM * spatial_pattern(pulse, X, Y)
        ex, ey = pulse.polarization_vector
        fx, fy = ex * pat, ey * pat
        self.fx_re, self.fx_im = np.ascontiguousarray(fx.real), np.ascontiguousarray(fx.imag)
        self.fy_re, self.fy_im = np.ascontiguousarray(fy.real), np.ascontiguousarray(fy.imag)
        self.pattern_max2 = float(np.max(np.abs(fx)**2 + np.abs(fy)**2))

        # D-phase: theta = (dt/2) * (P^2/2m*) / hbar applied twice a step
        self.phase_coef = dt / (4.0 * mass * HBAR)
        self.coupling_coef = -0.5j * HBAR / mass

        if grid.absorber_on:
            self.absorber = self._build_absorber(X, Y)
        else:
            self.absorber = None

        # Krylov basis workspace for the coupling exponential
        self._krylov = np.empty((lanczos_max + 1, grid.ny, grid.nx),
                                dtype=np.complex128)

    def _build_absorber(self, X, Y):
        grid = self.grid
        w = grid.absorber_width
        dist = np.minimum.reduce([
            grid.extent - np.abs(X), grid.extent - np.abs(Y)])
        ramp = np.clip((w - dist) / w, 0.0, 1.0)
        rate = grid.absorber_strength * np.sin(0.5 * math.pi * ramp) ** 2
        return np.exp(-rate * grid.dt_ps)

    # -- per-step pieces -------------------------------------------------

    def carrier_coeffs(self, t):
        """(a, b) with P(t) = a*Re(F) + b*Im(F), or None outside support."""
        env = self.pulse.envelope(t)
        if env == 0.0:
            return None
        arg = self.pulse.cep - self.pulse.omega * t
        return env * math.cos(arg), -env * math.sin(arg)

    def sample_momentum_field(self, t):
        """Canonical-momentum components (px, py) at time t, or None."""
        ab = self.carrier_coeffs(t)
        if ab is None:
            return None
        a, b = ab
        px = a * self.fx_re + b * self.fx_im
        py = a * self.fy_re + b * self.fy_im
        return px, py

    def apply_phase(self, psi_k, px, py):
        theta_max = 0.0
        if px is not None:
            a2 = self.pattern_max2  # bound via Cauchy-Schwarz on (a, b)
            theta_max = self.phase_coef * a2
        self.kernels.phase_apply(psi_k, self.phase_half, px, py,
                                 self.phase_coef, exact=theta_max > 0.02)

    def apply_kinetic_full(self, psi_k):
        self.kernels.kinetic_apply_x(psi_k, self.cay_x_full)
        self.kernels.kinetic_apply_y(psi_k, self.cay_y_full)

    def apply_kinetic_half(self, psi_k):
        self.kernels.kinetic_apply_x(psi_k, self.cay_x_half)
        self.kernels.kinetic_apply_y(psi_k, self.cay_y_half)

    def apply_coupling_exp(self, psi_k, px, py):
        """Lanczos short-recurrence exponential of the coupling over dt.

        Exactly norm-preserving at any order; the recurrence depth is
        chosen per call from the running Krylov truncation bound.
        """
        grid = self.grid
        dt = grid.dt_ps
        cell = grid.cell_area
        ker = self.kernels
        V = self._krylov

        nrm0 = math.sqrt(abs(ker.vdot(psi_k, psi_k).real) * cell)
        if nrm0 == 0.0:
            return
        ker.scale_copy(V[0], psi_k, 1.0 / nrm0)
        alphas, betas = [], []
        w = V[1]
        alpha = ker.coupling_apply_dot(w, V[0], px, py, grid.dx, grid.dy,
                                       self.coupling_coef) * cell
        alphas.append(alpha)
        wnorm2 = ker.lanczos_update(w, alphas[0], V[0], 0.0, None)
        bound = 1.0
        for k in range(1, self.lanczos_max):
            beta = math.sqrt(abs(wnorm2) * cell)
            bound *= beta * dt / (HBAR * k)
            if beta < 1e-300 or bound < self.lanczos_tol:
                break
            betas.append(beta)
            ker.scale_copy(V[k], w, 1.0 / beta)
            w = V[k + 1]
            alpha = ker.coupling_apply_dot(w, V[k], px, py, grid.dx, grid.dy,
                                           self.coupling_coef) * cell
            alphas.append(alpha)
            wnorm2 = ker.lanczos_update(w, alphas[k], V[k], betas[k - 1],
                                        V[k - 1])
        m = len(alphas)
        if m == 1:
            psi_k *= cmath_exp(-1j * dt * alphas[0] / HBAR)
            return
        evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
        coef = evecs @ (np.exp(-1j * dt * evals / HBAR) * evecs[0, :].conj())
        ker.recombine(psi_k, nrm0 * coef, V[:m])

    def step_core(self, state, t_mid):
        """D(dt/2) W(dt) D(dt/2) at the step midpoint, all orbitals."""
        field = self.sample_momentum_field(t_mid)
        if field is None:
            # field-free: the two half phases merge exactly
            for k in range(state.n_orbitals):
                self.kernels.phase_apply(state.psi[k], self.phase_full,
                                         None, None, 0.0)
            return
        px, py = field
        for k in range(state.n_orbitals):
            self.apply_phase(state.psi[k], px, py)
            self.apply_coupling_exp(state.psi[k], px, py)
            self.apply_phase(state.psi[k], px, py)

    def apply_absorber(self, state):
        if self.absorber is not None:
            state.psi *= self.absorber


def cmath_exp(z):
    return complex(np.exp(z))


def step(state: EvolvingState, pulse: PulseSpec, stack: RingStack,
         material: Material, engine: Engine = None):
    """Advance the state by one dt: T/2 . D/2 . W . D/2 . T/2.

    Builds (or reuses) an Engine; the pipeline run loop uses the merged
    kinetic variant of the same composition instead.
    """
    eng = engine or Engine(state.grid, stack, material, pulse)
    dt = state.grid.dt_ps
    t_mid = state.t + 0.5 * dt
    for k in range(state.n_orbitals):
        eng.apply_kinetic_half(state.psi[k])
    eng.step_core(state, t_mid)
    for k in range(state.n_orbitals):
        eng.apply_kinetic_half(state.psi[k])
    eng.apply_absorber(state)
    state.t += dt
    if not np.all(np.isfinite(state.psi)):
        raise StabilityError("non-finite wavefunction after step")
    return state


@dataclass
class RunTrace:
    """Observables sampled over a propagation run."""

    times: np.ndarray                    # ps
    region_names: list
    mu_x: np.ndarray                     # (n_samples, n_regions), e*nm
    mu_y: np.ndarray
    norms: np.ndarray                    # (n_samples, n_orbitals)
    occupations: np.ndarray              # (n_samples, n_orbitals)
    dzz: np.ndarray                      # (n_samples,), e*nm^2
    snapshots: dict = field(default_factory=dict)   # t -> density array
    autocorr: np.ndarray = None          # (n_samples, n_orbitals) complex

    @property
    def sample_dt(self):
        return self.times[1] - self.times[0] if len(self.times) > 1 else 0.0


def expectation_lz(state: EvolvingState, weighted=True):
    """Occupation-weighted angular momentum <L_z> in units of hbar.

    L_z = -i (x d/dy - y d/dx); derivatives use the same antisymmetric
    FD-4 stencils as the propagation kernels.
    """
    from . import kernels_fallback as kf
    grid = state.grid
    X, Y = grid.meshes()
    total = 0.0
    for k in range(state.n_orbitals):
        psi = state.psi[k]
        dpsi_y = kf.gradient_1d(psi, 0, grid.dy)
        dpsi_x = kf.gradient_1d(psi, 1, grid.dx)
        val = np.vdot(psi, -1j * (X * dpsi_y - Y * dpsi_x)).real \
            * grid.cell_area
        total += (state.occupations[k] if weighted else 1.0) * val
    return total


def angular_harmonics(density, extent, rho_center, rho_halfwidth, k_max=8):
    """Azimuthal harmonic magnitudes of a density on a smooth radial shell.

    Moments |sum dens * w(rho) e^{i k phi}| with a Gaussian shell weight
    (smooth weighting keeps square-lattice sawtooth artifacts of sharp
    annulus masks out of the k = 0 mod 4 channels).  Returns an array of
    k = 0..k_max magnitudes and the complex moments.
    """
    density = np.asarray(density)
    ny, nx = density.shape
    x = -extent + (np.arange(nx) + 0.5) * (2 * extent / nx)
    y = -extent + (np.arange(ny) + 0.5) * (2 * extent / ny)
    X, Y = np.meshgrid(x, y)
    rho = np.hypot(X, Y)
    phi = np.arctan2(Y, X)
    w = np.exp(-(((rho - rho_center) / rho_halfwidth) ** 2))
    weighted = density * w
    moments = np.array([(weighted * np.exp(1j * k * phi)).sum()
                        for k in range(k_max + 1)])
    return np.abs(moments), moments


def count_angular_minima(moments, n_phi=720):
    """Local minima count of the low-pass angular profile.

    Reconstructs sum_k Re{moments_k e^{-i k phi}} over a fine phi grid
    and counts strict local minima (the k = 0 term only offsets).
    """
    moments = np.asarray(moments)
    phi = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    profile = np.real(sum(m * np.exp(-1j * k * phi)
                          for k, m in enumerate(moments)))
    lo = np.roll(profile, 1)
    hi = np.roll(profile, -1)
    return int(np.sum((profile < lo) & (profile < hi)))


def save_checkpoint(state: EvolvingState, path_base, meta=None):
    """Persist orbital fields, occupations and the clock."""
    from ..arrayio import write_array
    grid = state.grid
    write_array(path_base, state.psi, dict(
        meta or {}, quantity="checkpoint_psi", t_ps=state.t,
        labels=[list(l) for l in state.labels],
        energies_mev=list(map(float, state.energies)),
        occupations=list(map(float, state.occupations)),
        eq_occupations=list(map(float, state.eq_occupations)),
        grid={"nx": grid.nx, "ny": grid.ny, "extent_nm": grid.extent,
              "dt_fs": grid.dt, "n_steps": grid.n_steps,
              "absorber_width_nm": grid.absorber_width,
              "absorber_on": grid.absorber_on,
              "absorber_strength": grid.absorber_strength}))
    return str(path_base) + ".f64"


def load_checkpoint(path_base):
    """Restore an EvolvingState written by :func:`save_checkpoint`."""
    from ..arrayio import read_array
    psi, meta = read_array(path_base)
    g = meta["grid"]
    grid = GridSpec(nx=g["nx"], ny=g["ny"], extent=g["extent_nm"],
                    dt=g["dt_fs"], n_steps=g["n_steps"],
                    absorber_width=g["absorber_width_nm"],
                    absorber_on=g["absorber_on"],
                    absorber_strength=g["absorber_strength"])
    return EvolvingState(
        psi=np.ascontiguousarray(psi),
        labels=[tuple(l) for l in meta["labels"]],
        energies=np.array(meta["energies_mev"]),
        occupations=np.array(meta["occupations"]),
        eq_occupations=np.array(meta["eq_occupations"]),
        t=float(meta["t_ps"]), grid=grid)


def dipole_regions(stack: RingStack, grid: GridSpec):
    """(name, rho_lo, rho_hi) integration domains: each ring plus total."""
    regions = []
    for i in range(len(stack.rings)):
        lo, hi = stack.annulus(i)
        regions.append((f"ring{i + 1}", lo, hi))
    regions.append(("total", stack.inner_edge, stack.outer_edge))
    return regions


def run_evolution(state: EvolvingState, stack: RingStack, material: Material,
                  pulse: PulseSpec, n_steps=None, sample_every=0.1,
                  snapshot_times=(), track_autocorr=False,
                  norm_guard=True, engine: Engine = None, progress=None):
    """Propagate with the merged-kinetic loop, collecting observables.

    Parameters
    ----------
    sample_every : float
        Observable sampling interval in ps (rounded to whole steps).
    snapshot_times : iterable of float
        Times (ps) at which the ensemble density is stored (rounded to
        the nearest sampling boundary).
    track_autocorr : bool
        Record per-orbital overlaps with the initial state.
    norm_guard : bool
        Raise StabilityError when the per-step norm drift (absorber off)
        exceeds the engine tolerance.

    Returns the final state and a RunTrace.
    """
    eng = engine or Engine(state.grid, stack, material, pulse)
    grid = state.grid
    dt = grid.dt_ps
    n_steps = grid.n_steps if n_steps is None else n_steps
    stride = max(1, int(round(sample_every / dt)))
    snap_steps = {int(round(t / dt)) for t in snapshot_times}

    regions = dipole_regions(stack, grid)
    X, Y = grid.meshes()
    rho = np.hypot(X, Y)
    cell = grid.cell_area
    masks = [(rho >= lo) & (rho < hi) for _, lo, hi in regions]
    wx = [X[m] * cell for m in masks]
    wy = [Y[m] * cell for m in masks]
    rho2_cell = rho**2 * cell

    psi0 = state.psi.copy() if track_autocorr else None

    times, mux, muy, norms, occs, dzz, acorr = [], [], [], [], [], [], []
    snapshots = {}
    t0 = state.t

    def collect():
        dens = ensemble_density(state)
        times.append(state.t)
        mux.append([np.dot(dens[m], w) for m, w in zip(masks, wx)])
        muy.append([np.dot(dens[m], w) for m, w in zip(masks, wy)])
        norms.append(state.norms())
        occs.append(state.occupations.copy())
        dzz.append(-np.sum(dens * rho2_cell))
        if track_autocorr:
            acorr.append(autocorrelations(state, psi0))
        return dens

    collect()
    prev_norms = norms[0]
    last_sample_t = state.t
    step_index = 0
    for k in range(state.n_orbitals):
        eng.apply_kinetic_half(state.psi[k])

    while step_index < n_steps:
        t_mid = t0 + (step_index + 0.5) * dt
        eng.step_core(state, t_mid)
        step_index += 1
        # realign the merged kinetic halves at sampling boundaries and at
        # the end of the run; collect only on aligned boundaries so the
        # trace stays uniformly sampled
        at_boundary = (step_index % stride == 0) or (step_index == n_steps)
        at_sample = step_index % stride == 0
        for k in range(state.n_orbitals):
            if at_boundary:
                eng.apply_kinetic_half(state.psi[k])
            else:
                eng.apply_kinetic_full(state.psi[k])
        eng.apply_absorber(state)
        state.t = t0 + step_index * dt

        if at_sample:
            relax_occupations(state, material, state.t - last_sample_t)
            last_sample_t = state.t
            dens = collect()
            matched = {s for s in snap_steps if abs(s - step_index) < stride}
            for s in matched:
                snapshots[round(state.t, 9)] = dens.copy()
                snap_steps.discard(s)
            cur = norms[-1]
            if not np.all(np.isfinite(cur)):
                raise StabilityError("non-finite wavefunction (divergence)")
            if norm_guard and eng.absorber is None:
                drift = np.max(np.abs(cur - prev_norms)) / stride
                if drift > eng.norm_tol_per_step:
                    raise StabilityError(
                        f"norm drift {drift:.2e} per step exceeds "
                        f"{eng.norm_tol_per_step:.0e}; reduce dt")
            prev_norms = cur
            if progress is not None:
                progress(step_index, n_steps)
        if at_boundary and step_index < n_steps:
            for k in range(state.n_orbitals):
                eng.apply_kinetic_half(state.psi[k])

    trace = RunTrace(
        times=np.array(times),
        region_names=[r[0] for r in regions],
        mu_x=np.array(mux), mu_y=np.array(muy),
        norms=np.array(norms), occupations=np.array(occs),
        dzz=np.array(dzz),
        snapshots=snapshots,
        autocorr=np.array(acorr) if track_autocorr else None)
    return state, trace
