"""Time-discrete solver for the second model (a_vec = 0) on a 1D interval.

One implicit Euler step of the field-free second model is the nonlinear
elliptic system (h = time step, all Laplacians with Dirichlet data)

  (1/h)(n0 - n0^0) - (2/3) Lap W0            = 0
  (1/h)(W0 - W0^0) -       Lap Z0            = 0
  (1/h)(Wv - Wv^0) -       Lap Zv + Wv/tau_sf = 0

where (Z0, Zv) are the energy-flux potentials of the closure,
Z+- = Z0 +- |Zv| = (5/(9 n0)) (W+^{3/5} + W-^{3/5}) W+-^{7/5}.

The solver works in the transformed variables

  u  = (2/3) W0,
  v0 = Z0,   vv = Zv,

in which the moments become algebraic functions of (u, v0, vv):

  n0 = 5 u^2 (v+^{3/7} + v-^{3/7}) / (v+^{5/7} + v-^{5/7})^2
     = lambda(u/v0, v+, v-) * u,
  W0 = (3/2) u,
  Wv = (3/2) u (v+^{5/7} - v-^{5/7}) / (v+^{5/7} + v-^{5/7}) * vv/|vv|,

The spin energy equation closes as mu(u/v0, v+, v-) v0 vv/|vv| - h Lap vv
= Wv^0 with mu(xi, v+, v-) = (3/2)(1 + h/tau_sf) xi (v+^{5/7} - v-^{5/7}) /
(v+^{5/7} + v-^{5/7}).  Each Picard sweep freezes the ratio
rho = [u/v0]_eps (truncated into [0, 1/eps]), the branch values
nu+- = max(0, v0 +- |vv|) and the scalar relaxation coefficient at the
current iterate and solves three decoupled *linear* Helmholtz problems

  lambda(rho, nu+, nu-) u            - h Lap u  = n0^0
  (3/2) rho v0                       - h Lap v0 = W0^0
  (mu(rho, nu+, nu-) nu0 / |vv|) vv  - h Lap vv = Wv^0

(nu0 = max(v0, 0) frozen).  Keeping the new vv under the frozen scalar
coefficient — exactly how lambda and (3/2)rho sit against the new u and v0
— gives every sweep a nonnegative zeroth-order term; a frozen-source
arrangement (moving mu nu0 vv/|vv| wholesale to the right-hand side) has
the same fixed points but feeds updates through (-h Lap)^{-1}, which
amplifies low-frequency error by about 1/(h pi^2) and diverges for
practical h.  The coefficients obey the a-priori bounds
(5/2) xi <= lambda <= 6 xi and 0 <= mu <= (3/2)(1 + h/tau_sf) xi, which the
property tests sweep.

Iterates are damped, x <- (1-omega) x + omega F(x), with omega halved
whenever the fixed-point residual ||F(x) - x||_inf grows.  Convergence is
certified a posteriori: the returned certificate records the fixed-point
residual, the direct residual of the moment-form system, positivity and
margin bounds, and whether the truncation was actually inactive (in which
case the converged iterate solves the untruncated system exactly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "Model2Vars",
    "Model2Certificate",
    "CertificateViolation",
    "truncation",
    "transform_forward",
    "transform_inverse",
    "lambda_mu",
    "solve_time_step",
]

_SPIN_NORM_FLOOR = 1e-14


@dataclass
class Model2Vars:
    """Transformed iterate (u, v0, vv); admissible when u > 0, v0 > |vv|."""

    u: np.ndarray
    v0: np.ndarray
    vv: np.ndarray

    def __iter__(self):
        return iter((self.u, self.v0, self.vv))

    @property
    def vp(self) -> np.ndarray:
        return np.maximum(0.0, self.v0 + np.linalg.norm(self.vv, axis=-1))

    @property
    def vm(self) -> np.ndarray:
        return np.maximum(0.0, self.v0 - np.linalg.norm(self.vv, axis=-1))

    def copy(self) -> "Model2Vars":
        return Model2Vars(self.u.copy(), self.v0.copy(), self.vv.copy())


@dataclass
class Model2Certificate:
    """A-posteriori record of one solve_time_step run."""

    converged: bool
    iterations: int
    fp_residual: float
    direct_residual: float
    min_n0: float
    min_W0: float
    min_v_margin: float  # min(v0 - |vv|)
    spin_margin: float  # 1 - sup |Wv|/W0
    trunc_activity: float  # max(u/v0) * eps; <= 1 means truncation inactive
    eps: float
    omega_final: float
    residual_trace: np.ndarray = field(repr=False)
    initial_iterate: Model2Vars = field(repr=False)

    @property
    def ok(self) -> bool:
        return (
            self.converged
            and self.min_n0 > 0.0
            and self.min_W0 > 0.0
            and self.min_v_margin > 0.0
            and self.spin_margin > 0.0
            and self.trunc_activity <= 1.0
        )


class CertificateViolation(RuntimeError):
    """Converged iterate failed one of the certified solution bounds."""

    def __init__(self, certificate: Model2Certificate):
        super().__init__(
            "converged iterate violates solution bounds: "
            f"min_n0={certificate.min_n0:.3e}, min_W0={certificate.min_W0:.3e}, "
            f"min_v_margin={certificate.min_v_margin:.3e}, "
            f"spin_margin={certificate.spin_margin:.3e}, "
            f"trunc_activity={certificate.trunc_activity:.3e}"
        )
        self.certificate = certificate


def truncation(f, eps: float):
    """[f]_eps: clamp into [0, 1/eps]."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return np.clip(f, 0.0, 1.0 / eps)


def transform_forward(n0, W0, Wv) -> Model2Vars:
    """Moments (n0, W0, Wv) -> transformed variables (u, v0, vv).

    v+- = (5/(9 n0)) (W+^{3/5} + W-^{3/5}) W+-^{7/5} with W+- = W0 +- |Wv|;
    cells with |Wv| < 1e-14 get vv = 0 exactly.
    """
    n0 = np.asarray(n0, dtype=float)
    W0 = np.asarray(W0, dtype=float)
    Wv = np.asarray(Wv, dtype=float)
    r = np.linalg.norm(Wv, axis=-1)
    if np.any(n0 <= 0.0):
        raise ValueError("inadmissible moments: n0 must be positive")
    if np.any(W0 - r <= 0.0):
        raise ValueError("inadmissible moments: W0 > |Wv| required")
    Wp, Wm = W0 + r, W0 - r
    C = (5.0 / 9.0) / n0 * (Wp**0.6 + Wm**0.6)
    vp = C * Wp**1.4
    vm = C * Wm**1.4
    v0 = 0.5 * (vp + vm)
    vv = np.zeros_like(Wv)
    mask = r >= _SPIN_NORM_FLOOR
    if Wv.ndim == 1:  # single cell
        if mask:
            vv = 0.5 * (vp - vm) * Wv / r
    else:
        vv[mask] = (0.5 * (vp - vm))[mask, None] * Wv[mask] / r[mask, None]
    return Model2Vars(2.0 / 3.0 * W0, v0, vv)


def transform_inverse(u, v0, vv):
    """Transformed variables (u, v0, vv) -> moments (n0, W0, Wv)."""
    u = np.asarray(u, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    vv = np.asarray(vv, dtype=float)
    r = np.linalg.norm(vv, axis=-1)
    if np.any(u <= 0.0):
        raise ValueError("inadmissible variables: u must be positive")
    if np.any(v0 - r <= 0.0):
        raise ValueError("inadmissible variables: v0 > |vv| required")
    vp, vm = v0 + r, v0 - r
    sp = vp ** (5.0 / 7.0) + vm ** (5.0 / 7.0)
    n0 = 5.0 * u * u * (vp ** (3.0 / 7.0) + vm ** (3.0 / 7.0)) / (sp * sp)
    W0 = 1.5 * u
    Wv = np.zeros_like(vv)
    mask = r >= _SPIN_NORM_FLOOR
    amp = 1.5 * u * (vp ** (5.0 / 7.0) - vm ** (5.0 / 7.0)) / sp
    if vv.ndim == 1:
        if mask:
            Wv = amp * vv / r
    else:
        Wv[mask] = amp[mask, None] * vv[mask] / r[mask, None]
    return n0, W0, Wv


def _lambda_mu_arrays(xi, vp, vm, h, tau_sf):
    """Vectorized coefficients; cells with vp = 0 get the symmetric limits."""
    vp = np.asarray(vp, dtype=float)
    vm = np.asarray(vm, dtype=float)
    xi = np.asarray(xi, dtype=float)
    lam = np.full_like(vp, np.nan)
    mu = np.zeros_like(vp)
    pos = vp > 0.0
    p37 = vp[pos] ** (3.0 / 7.0) + vm[pos] ** (3.0 / 7.0)
    s57 = vp[pos] ** (5.0 / 7.0) + vm[pos] ** (5.0 / 7.0)
    d57 = vp[pos] ** (5.0 / 7.0) - vm[pos] ** (5.0 / 7.0)
    lam[pos] = 2.5 * xi[pos] * p37 * (vp[pos] + vm[pos]) / (s57 * s57)
    mu[pos] = 1.5 * (1.0 + h / tau_sf) * xi[pos] * d57 / s57
    lam[~pos] = 2.5 * xi[~pos]
    return lam, mu


def lambda_mu(xi: float, vp: float, vm: float, h: float, tau_sf: float):
    """Frozen-coefficient pair (lambda, mu) of one Picard sweep.

    Bounds: (5/2) xi <= lambda <= 6 xi, 0 <= mu <= (3/2)(1 + h/tau_sf) xi.
    """
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    if vm < 0.0 or vp < vm:
        raise ValueError("need vp >= vm >= 0")
    if vp <= 0.0:
        raise ValueError("need vp > 0")
    lam, mu = _lambda_mu_arrays(
        np.array([xi]), np.array([vp]), np.array([vm]), h, tau_sf
    )
    return float(lam[0]), float(mu[0])


def _helmholtz_solve(diag_coeff, h, dx, rhs, bc_left, bc_right):
    """Solve diag_coeff * x - h Lap x = rhs, 3-point Dirichlet Laplacian.

    rhs may be (m,) or (m, k); bc values are scalars for (m,) and length-k
    vectors for (m, k).
    """
    m = rhs.shape[0]
    w = h / (dx * dx)
    ab = np.zeros((3, m))
    ab[0, 1:] = -w
    ab[1] = diag_coeff + 2.0 * w
    ab[2, :-1] = -w
    b = rhs.copy()
    b[0] += w * np.asarray(bc_left)
    b[-1] += w * np.asarray(bc_right)
    return solve_banded((1, 1), ab, b)


def _laplacian(x, bc_left, bc_right, dx):
    """3-point Laplacian with Dirichlet neighbours; x is (m,) or (m, k)."""
    lap = np.empty_like(x)
    lap[1:-1] = x[2:] - 2.0 * x[1:-1] + x[:-2]
    lap[0] = x[1] - 2.0 * x[0] + np.asarray(bc_left)
    lap[-1] = np.asarray(bc_right) - 2.0 * x[-1] + x[-2]
    return lap / (dx * dx)


def _unit(vv):
    r = np.linalg.norm(vv, axis=-1)
    out = np.zeros_like(vv)
    mask = r >= _SPIN_NORM_FLOOR
    out[mask] = vv[mask] / r[mask, None]
    return out


def _project_moments(x: Model2Vars):
    """Finite diagnostic moments for an iterate outside u > 0, v0 > |vv|.

    Evaluates the inverse-transform formulas on the clipped branch values
    vp, vm = max(0, v0 +- |vv|); only used in the non-converged report.
    """
    vp, vm = x.vp, x.vm
    s57 = np.maximum(vp ** (5.0 / 7.0) + vm ** (5.0 / 7.0), 1e-300)
    n0 = 5.0 * x.u * x.u * (vp ** (3.0 / 7.0) + vm ** (3.0 / 7.0)) / (s57 * s57)
    W0 = 1.5 * x.u
    amp = 1.5 * x.u * (vp ** (5.0 / 7.0) - vm ** (5.0 / 7.0)) / s57
    Wv = amp[:, None] * _unit(x.vv)
    return n0, W0, Wv


def solve_time_step(
    prev,
    h: float,
    tau_sf: float,
    bc,
    dx: float | None = None,
    *,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 400,
    eps_trunc: float | None = None,
):
    """One implicit time step of the second model by damped Picard iteration.

    Parameters
    ----------
    prev : (n0, W0, Wv) arrays, shapes (m,), (m,), (m, 3)
        Previous time level; must satisfy n0 > 0, W0 > |Wv|.
    h, tau_sf : time step and scaled spin-flip time.
    bc : ((n0, W0, Wv), (n0, W0, Wv))
        Dirichlet moment data at the left/right boundary nodes.
    dx : grid spacing; defaults to 1/(m+1) (m interior nodes on (0, 1)).
    eps_trunc : truncation parameter; default
        min(inf(W0^0/n0^0), 1/sup(u^D/v0^D)).

    Returns
    -------
    (n0, W0, Wv, Model2Certificate)

    Raises
    ------
    ValueError for inadmissible inputs; CertificateViolation if the
    iteration converged but a solution bound fails.  Non-convergence is not
    an exception: the certificate reports converged=False and the residual
    trace.
    """
    n0_0 = np.ascontiguousarray(prev[0], dtype=float)
    W0_0 = np.ascontiguousarray(prev[1], dtype=float)
    Wv_0 = np.ascontiguousarray(prev[2], dtype=float)
    m = n0_0.shape[0]
    if h <= 0.0 or tau_sf <= 0.0:
        raise ValueError("h and tau_sf must be positive")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    r0 = np.linalg.norm(Wv_0, axis=-1)
    bad = np.where((n0_0 <= 0.0) | (W0_0 <= 0.0) | (W0_0 - r0 <= 0.0))[0]
    if bad.size:
        raise ValueError(f"inadmissible previous state at cell {bad[0]}")
    for side, (nD, WD, WvD) in zip(("left", "right"), bc):
        if nD <= 0.0 or WD <= np.linalg.norm(WvD):
            raise ValueError(f"inadmissible boundary data ({side})")
    if dx is None:
        dx = 1.0 / (m + 1)

    uD, v0D, vvD = [], [], []
    for nD, WD, WvD in bc:
        tD = transform_forward(np.float64(nD), np.float64(WD), np.asarray(WvD, float))
        uD.append(float(tD.u))
        v0D.append(float(tD.v0))
        vvD.append(np.asarray(tD.vv, dtype=float))
    if eps_trunc is None:
        eps_trunc = min(
            float(np.min(W0_0 / n0_0)),
            1.0 / max(uD[0] / v0D[0], uD[1] / v0D[1]),
        )
    if eps_trunc <= 0.0:
        raise ValueError("eps_trunc must be positive")

    x = transform_forward(n0_0, W0_0, Wv_0)
    x.u = np.maximum(x.u, 1e-30)  # admissible-cone safeguard
    initial = x.copy()

    omega = damping
    trace = []
    prev_res = np.inf
    converged = False
    for it in range(1, max_iter + 1):
        rho = truncation(x.u / x.v0, eps_trunc)
        nu_p, nu_m = x.vp, x.vm
        lam, mu = _lambda_mu_arrays(rho, nu_p, nu_m, h, tau_sf)
        u_new = _helmholtz_solve(lam, h, dx, n0_0, uD[0], uD[1])
        v0_new = _helmholtz_solve(1.5 * rho, h, dx, W0_0, v0D[0], v0D[1])
        nu0 = np.maximum(x.v0, 0.0)
        r_vv = np.linalg.norm(x.vv, axis=-1)
        coeff_v = mu * nu0 / np.maximum(r_vv, _SPIN_NORM_FLOOR)
        vv_new = _helmholtz_solve(coeff_v, h, dx, Wv_0, vvD[0], vvD[1])
        res = max(
            float(np.max(np.abs(u_new - x.u))),
            float(np.max(np.abs(v0_new - x.v0))),
            float(np.max(np.abs(vv_new - x.vv))),
        )
        trace.append(res)
        if res > prev_res:
            omega = max(omega / 2.0, 1.0 / 64.0)
        prev_res = res
        x = Model2Vars(
            (1.0 - omega) * x.u + omega * u_new,
            (1.0 - omega) * x.v0 + omega * v0_new,
            (1.0 - omega) * x.vv + omega * vv_new,
        )
        if res < tol:
            x = Model2Vars(u_new, v0_new, vv_new)  # undamped final iterate
            converged = True
            break

    margin = float(np.min(x.v0 - np.linalg.norm(x.vv, axis=-1)))
    if float(np.min(x.u)) > 0.0 and margin > 0.0:
        n0, W0, Wv = transform_inverse(x.u, x.v0, x.vv)
        # direct residual of the moment-form system (nonlinear, no truncation)
        xt = transform_forward(n0, W0, Wv)
        r1 = (n0 - n0_0) / h - (2.0 / 3.0) * _laplacian(
            W0, bc[0][1], bc[1][1], dx
        )
        r2 = (W0 - W0_0) / h - _laplacian(xt.v0, v0D[0], v0D[1], dx)
        r3 = (
            (Wv - Wv_0) / h
            - _laplacian(xt.vv, vvD[0], vvD[1], dx)
            + Wv / tau_sf
        )
        direct = max(
            float(np.max(np.abs(r1))),
            float(np.max(np.abs(r2))),
            float(np.max(np.abs(r3))),
        )
    else:
        # iterate left the admissible cone; report projected diagnostics
        n0, W0, Wv = _project_moments(x)
        direct = np.inf

    rW = np.linalg.norm(Wv, axis=-1)
    certificate = Model2Certificate(
        converged=converged,
        iterations=len(trace),
        fp_residual=trace[-1] if trace else np.inf,
        direct_residual=direct,
        min_n0=float(np.min(n0)),
        min_W0=float(np.min(W0)),
        min_v_margin=float(np.min(x.v0 - np.linalg.norm(x.vv, axis=-1))),
        spin_margin=float(1.0 - np.max(rW / W0)),
        trunc_activity=float(np.max(x.u / x.v0) * eps_trunc),
        eps=eps_trunc,
        omega_final=omega,
        residual_trace=np.asarray(trace),
        initial_iterate=initial,
    )
    if converged and not certificate.ok:
        raise CertificateViolation(certificate)
    return n0, W0, Wv, certificate
