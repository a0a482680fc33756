"""1D finite-volume scheme and semi-implicit Euler stepping for model 1.

Unknowns per cell K: charge density n0, spin-vector density nvec, energy
W0 = (3/2) n0 T, potential V.  One time step solves, in this order,

  1. Poisson   -(lambda_D/dx) sum_s DV = dx (n0_prev - C)
               (lambda_D stores the squared scaled Debye length)
  2. n0        (dx/dt)(n0 - n0_prev) + sum_s Jc_n = 0
  3. W0        (dx/dt)(W0 - W0_prev) + sum_s Jc_W + Joule = 0
  4. nvec      (dx/dt)(nv - nv_prev) + sum_s Jc_vec
                 + gamma dx (Omega x nv) + (dx/tau_sf) nv = 0
  5. T = (2/3) W0 / n0

where D(u)_{K,s} = u_{K,s} - u_K is the neighbour difference (doubled at
Dirichlet contacts: the contact sits half a cell from the center), and the
basic flux through a face is

  J_u = -(1/dx) ( D(u_new T_prev) + (u_prev_K + u_prev_Ks)/2 * D V_new )

(diffusion semi-implicit in u, drift explicit in the densities).  The
polarized combinations mix scalar and vector fluxes through the
face-averaged magnetization and polarization,

  Jc_n   = D0/eta^2 (J_n   - p Omega . Jvec_n)
  Jc_W   = (5/3) D0/eta^2 (J_W - p Omega . Jvec_W),  Wvec = (3/2) nvec T
  Jc_vec = D0/eta^2 (-p Omega J_n + ((1-eta) Omega(x)Omega + eta I) Jvec_n)

with the Gauss-Seidel couplings: the n0 and W0 equations take the vector
fluxes explicitly, the spin equation takes J_n from the freshly solved n0
and its own diffusion implicitly.  The Joule heating is discretized as
(1/2) sum_s Jc_n D V per cell, with the new-step Jc_n.

The unpolarized variant (`polarized=False`) assembles the plain fluxes
D0 * J with no mixing machinery at all; it is kept as a genuinely separate
path so the p = 0 degeneracy of the polarized scheme can be tested against
it rather than against itself.

Sign convention: the combinations above carry +D0 so that the p = 0 limit
is an ordinary (forward) diffusion; a uniform charge-neutral state at zero
bias is then an exact fixed point of the step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .device import DeviceProfile, GridSample, sample_on_grid
from .entropy import EntropyReport, entropy_H1, entropy_production_1, monotonicity_verdict

__all__ = [
    "Grid1D",
    "SimState",
    "StepFailure",
    "solve_poisson",
    "discrete_flux",
    "Scheme",
    "step",
    "steady_state",
    "entropy_trajectory_run",
    "ConvergenceReport",
    "initial_state",
    "perturbed_state",
]


class StepFailure(RuntimeError):
    """A linear solve failed or produced a nonpositive density/temperature."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of m cells on [0, 1]; faces at i/m, centers at (i+1/2)/m."""

    m: int
    dx: float
    centers: np.ndarray
    faces: np.ndarray

    @classmethod
    def make(cls, m: int) -> "Grid1D":
        if m < 3:
            raise ValueError("need at least 3 cells")
        dx = 1.0 / m
        return cls(m, dx, (np.arange(m) + 0.5) * dx, np.arange(m + 1) * dx)


@dataclass
class SimState:
    """Cell-averaged state at one time level."""

    n0: np.ndarray  # (m,)
    nv: np.ndarray  # (m, 3)
    W0: np.ndarray  # (m,)
    T: np.ndarray  # (m,)
    V: np.ndarray  # (m,)
    step_index: int = 0

    def copy(self) -> "SimState":
        return SimState(
            self.n0.copy(), self.nv.copy(), self.W0.copy(),
            self.T.copy(), self.V.copy(), self.step_index,
        )


@dataclass
class ConvergenceReport:
    converged: bool
    steps: int
    final_residual: float
    threshold: float
    dt: float
    mode: str
    residual_history: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    wall_time_s: float = 0.0


def solve_poisson(
    n0: np.ndarray,
    doping: np.ndarray,
    grid: Grid1D,
    lambda_sq: float,
    bc: tuple[float, float],
) -> np.ndarray:
    """Solve -(lambda_sq/dx) sum_s D(V) = dx (n0 - C) with Dirichlet bc.

    lambda_sq is the squared scaled Debye length (the eps U_T / (q C L^2)
    coefficient multiplying Delta V).  The matrix is symmetric tridiagonal
    with diagonal (3, 2, ..., 2, 3) (the 3 comes from the half-cell contact
    difference 2(V_D - V_K)); a charge-neutral state therefore yields the
    exact linear interpolant of the boundary values.
    """
    if lambda_sq <= 0.0:
        raise ValueError("lambda_sq must be positive")
    m, dx = grid.m, grid.dx
    a = lambda_sq / dx
    ab = np.empty((3, m))
    ab[0] = -a
    ab[2] = -a
    ab[1] = 2.0 * a
    ab[1, 0] = ab[1, -1] = 3.0 * a
    rhs = dx * (n0 - doping)
    rhs[0] += 2.0 * a * bc[0]
    rhs[-1] += 2.0 * a * bc[1]
    return solve_banded((1, 1), ab, rhs)


def discrete_flux(
    u: np.ndarray,
    T: np.ndarray,
    V: np.ndarray,
    face: int,
    dx: float,
    u_bc: tuple[float, float] = (1.0, 1.0),
    T_bc: tuple[float, float] = (1.0, 1.0),
    V_bc: tuple[float, float] = (0.0, 0.0),
) -> float:
    """Basic flux -(1/dx)(D(uT) + (u_K+u_Ks)/2 DV) through one face.

    Reference single-face evaluation (faces are numbered 0..m with 0 and m
    at the contacts; positive direction is +x).  The vectorized assembly in
    :class:`Scheme` must agree with this function.
    """
    m = len(u)
    if face == 0:
        duT = 2.0 * (u[0] * T[0] - u_bc[0] * T_bc[0])
        ubar = 0.5 * (u_bc[0] + u[0])
        dV = 2.0 * (V[0] - V_bc[0])
    elif face == m:
        duT = 2.0 * (u_bc[1] * T_bc[1] - u[m - 1] * T[m - 1])
        ubar = 0.5 * (u[m - 1] + u_bc[1])
        dV = 2.0 * (V_bc[1] - V[m - 1])
    else:
        duT = u[face] * T[face] - u[face - 1] * T[face - 1]
        ubar = 0.5 * (u[face - 1] + u[face])
        dV = V[face] - V[face - 1]
    return -(duT + ubar * dV) / dx


def _cross_matrix(w: np.ndarray) -> np.ndarray:
    """(m,3,3) cross-product matrices: cross(w[i]) @ x = w[i] x x."""
    m = w.shape[0]
    c = np.zeros((m, 3, 3))
    c[:, 0, 1] = -w[:, 2]
    c[:, 0, 2] = w[:, 1]
    c[:, 1, 0] = w[:, 2]
    c[:, 1, 2] = -w[:, 0]
    c[:, 2, 0] = -w[:, 1]
    c[:, 2, 1] = w[:, 0]
    return c


class Scheme:
    """Precomputed face coefficients and the semi-implicit step.

    Immutable per run: grid, material sample, constants and options are
    fixed; step(state) returns the next state.
    """

    def __init__(
        self,
        grid: Grid1D,
        sample: GridSample,
        profile: DeviceProfile,
        dt: float,
        mode: str = "energy_transport",
        polarized: bool = True,
        drift: bool = True,
        zero_flux: bool = False,
        tau_sf: float | None = None,
        D0: float | None = None,
    ):
        if mode not in ("energy_transport", "drift_diffusion"):
            raise ValueError(f"unknown mode {mode!r}")
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.sample = sample
        self.profile = profile
        self.dt = dt
        self.mode = mode
        self.polarized = polarized
        self.drift = drift
        self.zero_flux = zero_flux
        self.tau_sf = profile.tau_sf_scaled if tau_sf is None else tau_sf
        self.D0 = profile.D0 if D0 is None else D0
        self.gamma = profile.gamma
        self.lambda_D = profile.lambda_D
        self.bc_V = (0.0, profile.bias_scaled)
        self.bc_n0 = (1.0, 1.0)
        self.bc_T = (1.0, 1.0)

        m, dx = grid.m, grid.dx
        eta = sample.eta_face
        if polarized:
            if np.any(eta < 1e-6):
                raise ValueError("face polarization too close to 1 (eta < 1e-6)")
            self.c_face = self.D0 / (eta * eta)  # (m+1,)
            self.pcw = (self.c_face * sample.p_face)[:, None] * sample.omega_face
            outer = sample.omega_face[:, :, None] * sample.omega_face[:, None, :]
            self.Bmat = self.c_face[:, None, None] * (
                (1.0 - eta)[:, None, None] * outer + eta[:, None, None] * np.eye(3)
            )
        else:
            self.c_face = np.full(m + 1, self.D0)
            self.pcw = np.zeros((m + 1, 3))
            self.Bmat = np.broadcast_to(self.D0 * np.eye(3), (m + 1, 3, 3)).copy()

        # factor 2 at contact faces (half-cell Dirichlet quotient); 0 for
        # zero-flux runs, where the contact faces carry no flux at all.
        bfac = np.ones(m + 1)
        if zero_flux:
            bfac[0] = bfac[-1] = 0.0
        else:
            bfac[0] = bfac[-1] = 2.0
        self.bfac = bfac
        self.omega_cross_cell = _cross_matrix(sample.omega_cell)
        self._eye3 = np.eye(3)

    # -- face helpers (all arrays of length m+1, rightward orientation) ----

    def _dface(self, u: np.ndarray, bc: tuple[float, float]) -> np.ndarray:
        """Neighbour difference per face: u_right - u_left (x2 at contacts)."""
        d = np.empty(self.grid.m + 1)
        d[1:-1] = u[1:] - u[:-1]
        d[0] = self.bfac[0] * (u[0] - bc[0])
        d[-1] = self.bfac[-1] * (bc[1] - u[-1])
        return d

    def _dface_vec(self, u: np.ndarray) -> np.ndarray:
        """Same for (m,3) cell fields with zero Dirichlet data."""
        d = np.empty((self.grid.m + 1, 3))
        d[1:-1] = u[1:] - u[:-1]
        d[0] = self.bfac[0] * u[0]
        d[-1] = -self.bfac[-1] * u[-1]
        return d

    def _avg(self, u: np.ndarray, bc: tuple[float, float]) -> np.ndarray:
        a = np.empty(self.grid.m + 1)
        a[1:-1] = 0.5 * (u[1:] + u[:-1])
        a[0] = 0.5 * (bc[0] + u[0])
        a[-1] = 0.5 * (u[-1] + bc[1])
        return a

    def _avg_vec(self, u: np.ndarray) -> np.ndarray:
        a = np.empty((self.grid.m + 1, 3))
        a[1:-1] = 0.5 * (u[1:] + u[:-1])
        a[0] = 0.5 * u[0]
        a[-1] = 0.5 * u[-1]
        return a

    # -- tridiagonal helper -------------------------------------------------

    def _solve_scalar(
        self,
        coeff: np.ndarray,
        T_prev: np.ndarray,
        rhs: np.ndarray,
        bc_uT: tuple[float, float],
    ) -> np.ndarray:
        """Solve (dx/dt) u + div[ -(coeff/dx) D(u T_prev) ] = rhs.

        coeff is the per-face prefactor (c_face or (5/3)c_face); bc_uT the
        Dirichlet values of the product u*T at the contacts, whose
        contribution is added to rhs here.
        """
        m, dx, dt = self.grid.m, self.grid.dx, self.dt
        w = coeff / dx
        # bfac is 1 on interior faces, 2 (or 0) at contacts; fold it into
        # the face weights so one expression covers interior and boundary.
        wl = w * self.bfac
        diag = dx / dt + T_prev * (wl[1:] + wl[:-1])
        b = rhs.copy()
        if not self.zero_flux:
            b[0] += wl[0] * bc_uT[0]
            b[-1] += wl[-1] * bc_uT[1]
        ab = np.zeros((3, m))
        ab[0, 1:] = -w[1:-1] * T_prev[1:]  # coeff of u[i+1] in row i
        ab[1] = diag
        ab[2, :-1] = -w[1:-1] * T_prev[:-1]  # coeff of u[i-1] in row i
        return solve_banded((1, 1), ab, b)

    # -- the step -----------------------------------------------------------

    def step(self, state: SimState) -> SimState:
        m, dx, dt = self.grid.m, self.grid.dx, self.dt
        n0p, nvp, W0p, Tp, Vp = state.n0, state.nv, state.W0, state.T, state.V

        # (1) Poisson with the previous charge density
        if self.drift:
            V = solve_poisson(n0p, self.sample.doping, self.grid, self.lambda_D, self.bc_V)
            dV = self._dface(V, self.bc_V)
        else:
            V = Vp
            dV = np.zeros(m + 1)

        c, pcw, B = self.c_face, self.pcw, self.Bmat
        bc_n0, bc_T = self.bc_n0, self.bc_T
        bc_nT = (bc_n0[0] * bc_T[0], bc_n0[1] * bc_T[1])

        # explicit vector flux Jvec_n (previous nv throughout)
        dnvT = self._dface_vec(nvp * Tp[:, None])
        avg_nv = self._avg_vec(nvp)
        Jvec_n_exp = -(dnvT + avg_nv * dV[:, None]) / dx  # (m+1,3)

        # (2) charge solve: explicit parts of Jc_n go to the rhs
        avg_n0 = self._avg(n0p, bc_n0)
        if self.polarized:
            Jn_mix = -np.einsum("fi,fi->f", pcw, Jvec_n_exp)  # -c p Omega . Jvec
        else:
            Jn_mix = np.zeros(m + 1)
        Jn_exp = c * (-(avg_n0 * dV) / dx) + Jn_mix
        rhs = (dx / dt) * n0p - (Jn_exp[1:] - Jn_exp[:-1])
        n0 = self._solve_scalar(c, Tp, rhs, bc_nT)
        if np.any(n0 <= 0.0):
            raise StepFailure("negative charge density after n0 solve")

        # new-step fluxes for the Joule term and the spin mixing
        dn0T = self._dface(n0 * Tp, bc_nT)
        Jn_plain = -(dn0T + avg_n0 * dV) / dx  # unpolarized J_n with new n0
        Jc_n = c * Jn_plain + Jn_mix

        # (3) energy solve (energy-transport mode only)
        if self.mode == "energy_transport":
            bc_W = (1.5 * bc_n0[0] * bc_T[0], 1.5 * bc_n0[1] * bc_T[1])
            bc_WT = (bc_W[0] * bc_T[0], bc_W[1] * bc_T[1])
            avg_W0 = self._avg(W0p, bc_W)
            if self.polarized:
                Wvp = 1.5 * nvp * Tp[:, None]
                dWvT = self._dface_vec(Wvp * Tp[:, None])
                avg_Wv = self._avg_vec(Wvp)
                Jvec_W_exp = -(dWvT + avg_Wv * dV[:, None]) / dx
                JW_mix = -np.einsum("fi,fi->f", pcw, Jvec_W_exp) * (5.0 / 3.0)
            else:
                JW_mix = np.zeros(m + 1)
            JW_exp = (5.0 / 3.0) * c * (-(avg_W0 * dV) / dx) + JW_mix
            joule = 0.5 * (Jc_n[1:] * dV[1:] + Jc_n[:-1] * dV[:-1])
            rhs = (dx / dt) * W0p - (JW_exp[1:] - JW_exp[:-1]) - joule
            W0 = self._solve_scalar((5.0 / 3.0) * c, Tp, rhs, bc_WT)
            if np.any(W0 <= 0.0):
                raise StepFailure("negative energy density after W0 solve")
            T = (2.0 / 3.0) * W0 / n0
        else:
            T = np.ones(m)
            W0 = 1.5 * n0

        # (4) spin block solve with implicit precession and relaxation
        drift_vec = -(avg_nv * dV[:, None]) / dx  # explicit drift of Jvec_n
        if self.polarized:
            Jvec_exp = -pcw * Jn_plain[:, None] + np.einsum("fij,fj->fi", B, drift_vec)
        else:
            Jvec_exp = self.D0 * drift_vec
        rhs_v = (dx / dt) * nvp - (Jvec_exp[1:] - Jvec_exp[:-1])

        if not np.any(rhs_v) and not np.any(nvp):
            nv = np.zeros((m, 3))  # spin-free run stays exactly spin-free
        else:
            nv = self._solve_spin(rhs_v, Tp)

        return SimState(n0, nv, W0, T, V, state.step_index + 1)

    def _solve_spin(self, rhs_v: np.ndarray, T_prev: np.ndarray) -> np.ndarray:
        """Block-tridiagonal solve for nv (3x3 blocks, bandwidth 5)."""
        m, dx, dt = self.grid.m, self.grid.dx, self.dt
        Bw = self.Bmat / dx  # (m+1,3,3)
        wl = Bw * self.bfac[:, None, None]
        diag = (
            (dx / dt + dx / self.tau_sf) * self._eye3
            + self.gamma * dx * self.omega_cross_cell
            + T_prev[:, None, None] * (wl[1:] + wl[:-1])
        )
        upper = -Bw[1:-1] * T_prev[1:, None, None]  # block (i, i+1), i=0..m-2
        lower = -Bw[1:-1] * T_prev[:-1, None, None]  # block (i, i-1), i=1..m-1

        ab = np.zeros((11, 3 * m))
        for a in range(3):
            for b in range(3):
                ab[5 + a - b, b::3] = diag[:, a, b]
                ab[2 + a - b, b + 3 :: 3] = upper[:, a, b]
                ab[8 + a - b, b : 3 * (m - 1) : 3] = lower[:, a, b]
        sol = solve_banded((5, 5), ab, rhs_v.reshape(-1))
        return sol.reshape(m, 3)


def step(state: SimState, scheme: Scheme) -> SimState:
    """One semi-implicit Euler step (see Scheme.step)."""
    return scheme.step(state)


def initial_state(
    grid: Grid1D, sample: GridSample, profile: DeviceProfile, drift: bool = True
) -> SimState:
    """Standard start: n0 = scaled doping, T = 1, nv = 0, V from Poisson."""
    n0 = sample.doping.copy()
    T = np.ones(grid.m)
    if drift:
        V = solve_poisson(n0, sample.doping, grid, profile.lambda_D, (0.0, profile.bias_scaled))
    else:
        V = np.zeros(grid.m)
    return SimState(n0, np.zeros((grid.m, 3)), 1.5 * n0 * T, T, V)


def perturbed_state(m: int, amplitude: float = 0.1, seed: int = 0, modes: int = 4) -> SimState:
    """Randomized smooth low-mode perturbation of the uniform unit state.

    Every field is built from cos(2 pi k x) modes (zero slope at both ends,
    matching zero-flux runs), scaled so n0 and T stay within +-amplitude of
    1 and |nv| stays well inside n0.  Deterministic for a given seed.
    """
    if not 0.0 <= amplitude < 0.5:
        raise ValueError("amplitude must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    x = (np.arange(m) + 0.5) / m

    def smooth(scale: float) -> np.ndarray:
        coeff = rng.uniform(-1.0, 1.0, modes)
        f = np.zeros(m)
        for k, ck in enumerate(coeff, start=1):
            f += ck * np.cos(2.0 * np.pi * k * x)
        peak = float(np.max(np.abs(f)))
        return scale * f / peak if peak > 0.0 else f

    n0 = 1.0 + smooth(amplitude)
    T = 1.0 + smooth(amplitude)
    nv = np.stack([smooth(amplitude / 3.0) for _ in range(3)], axis=1)
    r = np.linalg.norm(nv, axis=1)
    cap = 0.8 * float(np.min(n0))
    rmax = float(np.max(r))
    if rmax > cap:
        nv *= cap / rmax
    return SimState(n0, nv, 1.5 * n0 * T, T, np.zeros(m))


def steady_state(
    profile: DeviceProfile,
    m: int = 334,
    dt: float = 5e-4,
    threshold: float = 1e-8,
    max_steps: int = 2_000_000,
    mode: str = "energy_transport",
    polarized: bool = True,
    residual_stride: int = 1,
) -> tuple[SimState, ConvergenceReport]:
    """Run the scheme to a steady state.

    Stops when the max norm of the difference between two consecutive
    solutions (over n0, nv, T, V; T excluded in drift-diffusion mode) falls
    below `threshold`.  On a step failure the time step is halved (at most
    20 times) and the run continues.
    """
    if not 1e-12 <= threshold <= 1e-4:
        raise ValueError("threshold out of range [1e-12, 1e-4]")
    grid = Grid1D.make(m)
    sample = sample_on_grid(profile, m)
    scheme = Scheme(grid, sample, profile, dt, mode=mode, polarized=polarized)
    state = initial_state(grid, sample, profile)
    history = []
    t0 = time.perf_counter()
    halvings = 0
    k = 0
    res = np.inf
    while k < max_steps:
        try:
            new = scheme.step(state)
        except StepFailure:
            halvings += 1
            if halvings > 20:
                raise
            scheme = Scheme(grid, sample, profile, scheme.dt / 2.0, mode=mode, polarized=polarized)
            continue
        res = max(
            float(np.max(np.abs(new.n0 - state.n0))),
            float(np.max(np.abs(new.nv - state.nv))),
            float(np.max(np.abs(new.V - state.V))),
        )
        if mode == "energy_transport":
            res = max(res, float(np.max(np.abs(new.T - state.T))))
        state = new
        k += 1
        if k % residual_stride == 0 or res < threshold:
            history.append(res)
        if res < threshold:
            break
    report = ConvergenceReport(
        converged=res < threshold,
        steps=k,
        final_residual=res,
        threshold=threshold,
        dt=scheme.dt,
        mode=mode,
        residual_history=np.asarray(history),
        wall_time_s=time.perf_counter() - t0,
    )
    return state, report


def entropy_trajectory_run(
    profile: DeviceProfile,
    initial: SimState,
    steps: int,
    m: int | None = None,
    dt: float = 5e-4,
    tolerance: float = 1e-10,
    tau_sf: float | None = None,
    D0: float | None = None,
) -> tuple[EntropyReport, SimState, np.ndarray]:
    """Drift-free, zero-flux trajectory recording the model-1 entropy.

    The scheme runs with the potential frozen (no Poisson solve, DV = 0)
    and no boundary fluxes, on the unpolarized path; H1 and the discrete
    entropy production are recorded every step, together with the total
    mass sum(n0) dx (conserved up to round-off by the telescoping flux sum).

    Returns (EntropyReport, final state, mass series).
    """
    m = m if m is not None else len(initial.n0)
    grid = Grid1D.make(m)
    sample = sample_on_grid(profile, m)
    scheme = Scheme(
        grid, sample, profile, dt,
        polarized=False, drift=False, zero_flux=True, tau_sf=tau_sf, D0=D0,
    )
    H = np.empty(steps + 1)
    production = np.empty(steps + 1)
    mass = np.empty(steps + 1)
    state = initial
    for k in range(steps + 1):
        H[k] = entropy_H1(state.n0, state.nv, state.T, grid.dx)
        production[k] = entropy_production_1(
            state.n0, state.nv, state.T, grid.dx, scheme.tau_sf
        )
        mass[k] = float(np.sum(state.n0)) * grid.dx
        if k < steps:
            state = scheme.step(state)
    report = monotonicity_verdict(H, tolerance)
    report.production = production
    return report, state, mass
