"""Moment closures for the three explicit spin energy-transport model classes.

The kinetic ancestor of every model here is the spinorial Maxwellian

    M[A, C](k) = exp( A + C |k|^2 / 2 ),

with Hermitian 2x2 Lagrange multipliers A = a0 + av.sigma and
C = c0 + cv.sigma (integrability needs c0 + |cv| < 0).  Its moments

    n  = int M dk,    W = 1/2 int M |k|^2 dk,    Q = 1/6 int M |k|^4 dk

split into scalar/vector Pauli parts (n0, nv), (W0, Wv), (Q0, Qv).  Three
simplifications make the closure n, W -> Q explicit:

  model 1:  cv = 0          (scalar temperature,  T = -1/c0)
  model 2:  av = 0          (spin carried by the temperature tensor)
  model 3:  av = lambda*cv  (aligned multipliers, two-temperature form)

This module provides the closed-form moment maps of each class, the
coefficient functions D(n+,n-), p(n+,n-) and Z0, Zvec used by the model-2
equations, the spin-accumulation right-hand side of model 3, and an
independent adaptive-quadrature evaluation of all moments that serves as
the oracle the closed forms are tested against.

All quantities are in scaled (dimensionless) units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .pauli import PauliVec, pauli_exp

__all__ = [
    "LagrangeParams",
    "MomentSet",
    "maxwellian_pauli",
    "moments_by_quadrature",
    "model1_moments",
    "model2_moments",
    "model3_moments",
    "model3_branch_params",
    "model1_closure",
    "model2_coeffs",
    "model2_Z",
    "model2_lagrange",
    "model3_closure",
    "model3_s_rhs",
]

# |Wv|/W0 below which the differences W+^alpha - W-^alpha in model2_Z are
# replaced by their first-order expansion (cancellation guard).
_WV_EXPANSION_CUTOFF = 1e-8

_TWO_PI_POW32 = (2.0 * np.pi) ** 1.5


@dataclass
class LagrangeParams:
    """Lagrange multipliers (A, C) of the Maxwellian in Pauli coordinates."""

    a0: float
    av: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c0: float = -1.0
    cv: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.a0 = float(self.a0)
        self.c0 = float(self.c0)
        self.av = np.asarray(self.av, dtype=float)
        self.cv = np.asarray(self.cv, dtype=float)

    def integrable(self) -> bool:
        """True iff all moments are finite: c0 + |cv| < 0."""
        return self.c0 + float(np.linalg.norm(self.cv)) < 0.0


@dataclass
class MomentSet:
    """Charge/spin density and energy moments of a spin-resolved state."""

    n0: float
    nv: np.ndarray
    W0: float
    Wv: np.ndarray

    def __post_init__(self):
        self.n0 = float(self.n0)
        self.W0 = float(self.W0)
        self.nv = np.asarray(self.nv, dtype=float)
        self.Wv = np.asarray(self.Wv, dtype=float)


def maxwellian_pauli(params: LagrangeParams, k2: float) -> PauliVec:
    """Pauli components (M0, Mvec) of the Maxwellian at |k|^2 = k2.

    exp(A + C k2/2) with exponent Pauli pair
    (a0 + c0 k2/2, av + cv k2/2), evaluated by the closed-form 2x2
    exponential.
    """
    return pauli_exp(
        PauliVec(params.a0 + 0.5 * params.c0 * k2, params.av + 0.5 * k2 * params.cv)
    )


def _radial_moments(params: LagrangeParams, weight_power: int) -> np.ndarray:
    """(int M0 r^w g dr, int Mvec r^w g dr) over [0, R] by adaptive quadrature.

    The Maxwellian is isotropic in k direction (it depends on k only through
    |k|^2), so each 3-d moment reduces to a 1-d radial integral.  R is chosen
    from the slowest-decaying eigenvalue, exp((c0+|cv|) r^2/2): with
    R^2 = 80 theta_+ the neglected tail is below 1e-16 relative.
    """
    theta_plus = -1.0 / (params.c0 + float(np.linalg.norm(params.cv)))
    r_max = np.sqrt(80.0 * theta_plus)

    out = np.empty(4)
    for i in range(4):

        def component(r, i=i):
            m = maxwellian_pauli(params, r * r)
            val = m.s0 if i == 0 else m.sv[i - 1]
            return val * r**weight_power

        val, _err = quad(component, 0.0, r_max, epsabs=1e-13, epsrel=1e-11, limit=200)
        out[i] = val
    return out


def moments_by_quadrature(
    params: LagrangeParams,
) -> tuple[MomentSet, float, np.ndarray]:
    """All moments (n, W, Q) of M[A, C] by adaptive radial quadrature.

    Independent of the closed forms: integrates the Pauli components of the
    Maxwellian directly.  Relative accuracy target 1e-9 (quad tolerances are
    set two orders tighter).

    Returns
    -------
    (MomentSet, Q0, Qvec) with
        n = 4 pi int M r^2 dr,  W = 2 pi int M r^4 dr,
        Q = (2 pi / 3) int M r^6 dr.
    """
    if not params.integrable():
        raise ValueError("Maxwellian not integrable: need c0 + |cv| < 0")
    m2 = _radial_moments(params, 2)
    m4 = _radial_moments(params, 4)
    m6 = _radial_moments(params, 6)
    n = 4.0 * np.pi * m2
    w = 2.0 * np.pi * m4
    q = (2.0 * np.pi / 3.0) * m6
    return MomentSet(n[0], n[1:], w[0], w[1:]), q[0], q[1:]


# ---------------------------------------------------------------------------
# Closed-form moment maps (one per model class)
# ---------------------------------------------------------------------------


def _unit_or_zero(v: np.ndarray) -> np.ndarray:
    r = float(np.linalg.norm(v))
    return v / r if r > 0.0 else np.zeros(3)


def model1_moments(params: LagrangeParams) -> tuple[MomentSet, float, np.ndarray]:
    """Closed-form moments for cv = 0 (scalar temperature T = -1/c0).

    With kappa_pm = (2 pi T)^{3/2} e^{a0 +/- |av|}:
    n_pm = kappa_pm, W = (3/2) n T, Q = (5/2) n T^2 (scalar and vector).
    """
    if float(np.linalg.norm(params.cv)) != 0.0:
        raise ValueError("model-1 closed form requires cv = 0")
    if params.c0 >= 0.0:
        raise ValueError("need c0 < 0")
    theta = -1.0 / params.c0
    g = (2.0 * np.pi * theta) ** 1.5
    r = float(np.linalg.norm(params.av))
    kp = g * np.exp(params.a0 + r)
    km = g * np.exp(params.a0 - r)
    n0 = 0.5 * (kp + km)
    nv = 0.5 * (kp - km) * _unit_or_zero(params.av)
    return (
        MomentSet(n0, nv, 1.5 * n0 * theta, 1.5 * theta * nv),
        2.5 * n0 * theta * theta,
        2.5 * theta * theta * nv,
    )


def model2_moments(params: LagrangeParams) -> tuple[MomentSet, float, np.ndarray]:
    """Closed-form moments for av = 0 (two temperatures theta_pm = -1/(c0 +/- |cv|)).

    With K = (2 pi)^{3/2} e^{a0}: n_pm = K theta_pm^{3/2},
    W_pm = (3K/2) theta_pm^{5/2}, Q_pm = (5K/2) theta_pm^{7/2}; scalar parts
    are the half-sums, vector parts the half-differences along cv.
    """
    if float(np.linalg.norm(params.av)) != 0.0:
        raise ValueError("model-2 closed form requires av = 0")
    if not params.integrable():
        raise ValueError("need c0 + |cv| < 0")
    cnorm = float(np.linalg.norm(params.cv))
    tp = -1.0 / (params.c0 + cnorm)
    tm = -1.0 / (params.c0 - cnorm)
    K = _TWO_PI_POW32 * np.exp(params.a0)
    chat = _unit_or_zero(params.cv)
    n_p, n_m = K * tp**1.5, K * tm**1.5
    w_p, w_m = 1.5 * K * tp**2.5, 1.5 * K * tm**2.5
    q_p, q_m = 2.5 * K * tp**3.5, 2.5 * K * tm**3.5
    return (
        MomentSet(
            0.5 * (n_p + n_m), 0.5 * (n_p - n_m) * chat,
            0.5 * (w_p + w_m), 0.5 * (w_p - w_m) * chat,
        ),
        0.5 * (q_p + q_m),
        0.5 * (q_p - q_m) * chat,
    )


def model3_moments(params: LagrangeParams) -> tuple[MomentSet, float, np.ndarray]:
    """Closed-form moments for aligned multipliers av = lambda * cv.

    kappa_pm = (2 pi theta_pm)^{3/2} e^{a0 +/- lambda |cv|} with
    theta_pm = -1/(c0 +/- |cv|); branch moments are kappa_pm,
    (3/2) kappa_pm theta_pm, (5/2) kappa_pm theta_pm^2.
    """
    kp, km, tp, tm, chat = _model3_branches(params)
    return (
        MomentSet(
            0.5 * (kp + km), 0.5 * (kp - km) * chat,
            0.75 * (kp * tp + km * tm), 0.75 * (kp * tp - km * tm) * chat,
        ),
        1.25 * (kp * tp * tp + km * tm * tm),
        1.25 * (kp * tp * tp - km * tm * tm) * chat,
    )


def _model3_branches(params: LagrangeParams):
    cnorm = float(np.linalg.norm(params.cv))
    if cnorm == 0.0:
        raise ValueError("aligned-multiplier form requires cv != 0")
    if not params.integrable():
        raise ValueError("need c0 + |cv| < 0")
    lam = float(params.av @ params.cv) / (cnorm * cnorm)
    if not np.allclose(params.av, lam * params.cv, atol=1e-12):
        raise ValueError("av must be parallel to cv")
    tp = -1.0 / (params.c0 + cnorm)
    tm = -1.0 / (params.c0 - cnorm)
    kp = (2.0 * np.pi * tp) ** 1.5 * np.exp(params.a0 + lam * cnorm)
    km = (2.0 * np.pi * tm) ** 1.5 * np.exp(params.a0 - lam * cnorm)
    return kp, km, tp, tm, _unit_or_zero(params.cv)


def model3_branch_params(
    params: LagrangeParams,
) -> tuple[float, float, float, float, np.ndarray]:
    """(n_plus, n_minus, T_plus, T_minus, s) of the aligned-multiplier state.

    Valid as spin-up/down branch values when lambda >= 0 (then
    kappa_+ >= kappa_- and the +/- labels agree with n0 +/- |nv|).
    """
    return _model3_branches(params)


# ---------------------------------------------------------------------------
# Model 1: cv = 0
# ---------------------------------------------------------------------------


def model1_closure(n0: float, nv: np.ndarray, T: float) -> tuple[np.ndarray, float]:
    """Spin-energy and heat-flux closure of the scalar-temperature model.

    Wv = (3/2) nv T,  Q0 = (5/2) n0 T^2.
    """
    nv = np.asarray(nv, dtype=float)
    return 1.5 * nv * T, 2.5 * n0 * T * T


# ---------------------------------------------------------------------------
# Model 2: av = 0
# ---------------------------------------------------------------------------


def model2_coeffs(np_: float, nm: float) -> tuple[float, float]:
    """Diffusion enhancement D and polarization factor p of the av = 0 model.

    D = 2 n0 (n+^{7/3} + n-^{7/3}) / (n+^{5/3} + n-^{5/3})^2, n0 = (n+ + n-)/2
    p = (n+^{5/3} - n-^{5/3}) / (n+^{5/3} + n-^{5/3})

    D stays inside [1, 1.1] over the whole admissible range, so the model-2
    coupling of charge to spin is weak.
    """
    if np_ < nm or np_ <= 0.0 or nm < 0.0:
        raise ValueError("need n+ >= n- >= 0 and n+ > 0")
    n0 = 0.5 * (np_ + nm)
    s53 = np_ ** (5.0 / 3.0) + nm ** (5.0 / 3.0)
    d = 2.0 * n0 * (np_ ** (7.0 / 3.0) + nm ** (7.0 / 3.0)) / (s53 * s53)
    p = (np_ ** (5.0 / 3.0) - nm ** (5.0 / 3.0)) / s53
    return d, p


def model2_Z(
    n0: float, W0: float, Wv: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Heat-flux quantities Z0, Zvec and spin density nv of the av = 0 model.

    With W_pm = W0 +/- |Wv|:

        Z0   = 5/(18 n0) (W+^{3/5} + W-^{3/5}) (W+^{7/5} + W-^{7/5})
        Zvec = 5/(18 n0) (W+^{3/5} + W-^{3/5}) (W+^{7/5} - W-^{7/5}) Wv/|Wv|
        nv   = n0 (W+^{3/5} - W-^{3/5}) / (W+^{3/5} + W-^{3/5}) Wv/|Wv|

    For |Wv|/W0 < 1e-8 the differences are evaluated by their first-order
    expansions to avoid catastrophic cancellation (exact zero at Wv = 0).
    """
    Wv = np.asarray(Wv, dtype=float)
    wnorm = float(np.linalg.norm(Wv))
    if n0 <= 0.0 or W0 <= wnorm:
        raise ValueError("need n0 > 0 and W0 > |Wv|")

    if wnorm < _WV_EXPANSION_CUTOFF * W0:
        # W+^a - W-^a = 2 a W0^{a-1} |Wv| + O(|Wv|^3/W0^3)
        z0 = (5.0 / (18.0 * n0)) * (2.0 * W0**0.6) * (2.0 * W0**1.4)
        zv = (14.0 / 9.0) * (W0 / n0) * Wv
        nv = 0.6 * (n0 / W0) * Wv
        return z0, zv, nv

    wp, wm = W0 + wnorm, W0 - wnorm
    s35 = wp**0.6 + wm**0.6
    what = Wv / wnorm
    z0 = (5.0 / (18.0 * n0)) * s35 * (wp**1.4 + wm**1.4)
    zv = (5.0 / (18.0 * n0)) * s35 * (wp**1.4 - wm**1.4) * what
    nv = n0 * (wp**0.6 - wm**0.6) / s35 * what
    return z0, zv, nv


def model2_lagrange(n0: float, W0: float, Wv: np.ndarray) -> LagrangeParams:
    """Invert the av = 0 moment map: (n0, W0, Wv) -> (a0, c0, cv).

    K = 2 * 3^{3/2} n0^{5/2} (W+^{3/5} + W-^{3/5})^{-5/2},
    theta_pm = W_pm^{2/5} (W+^{3/5} + W-^{3/5}) / (3 n0),
    then c0 +/- |cv| = -1/theta_pm and a0 = log(K / (2 pi)^{3/2}).
    """
    Wv = np.asarray(Wv, dtype=float)
    wnorm = float(np.linalg.norm(Wv))
    if n0 <= 0.0 or W0 <= wnorm:
        raise ValueError("need n0 > 0 and W0 > |Wv|")
    wp, wm = W0 + wnorm, W0 - wnorm
    s35 = wp**0.6 + wm**0.6
    K = 2.0 * 3.0**1.5 * n0**2.5 * s35**-2.5
    tp = wp**0.4 * s35 / (3.0 * n0)
    tm = wm**0.4 * s35 / (3.0 * n0)
    c0 = -0.5 * (1.0 / tp + 1.0 / tm)
    cnorm = 0.5 * (1.0 / tm - 1.0 / tp)
    return LagrangeParams(np.log(K / _TWO_PI_POW32), np.zeros(3), c0, cnorm * _unit_or_zero(Wv))


# ---------------------------------------------------------------------------
# Model 3: av = lambda * cv
# ---------------------------------------------------------------------------


def model3_closure(
    np_: float, nm: float, Tp: float, Tm: float, s: np.ndarray
) -> tuple[float, np.ndarray]:
    """Heat-flux closure of the two-temperature model.

    Q0 = (5/4)(n+ T+^2 + n- T-^2),  Qvec = (5/4)(n+ T+^2 - n- T-^2) s.
    """
    if np_ <= 0.0 or nm <= 0.0 or Tp <= 0.0 or Tm <= 0.0:
        raise ValueError("need n_pm > 0 and T_pm > 0")
    s = np.asarray(s, dtype=float)
    q0 = 1.25 * (np_ * Tp * Tp + nm * Tm * Tm)
    return q0, 1.25 * (np_ * Tp * Tp - nm * Tm * Tm) * s


def model3_s_rhs(
    np_: float,
    nm: float,
    Tp: float,
    Tm: float,
    s: np.ndarray,
    grad_s: np.ndarray,
    lap_s: np.ndarray,
    grad_nT: np.ndarray,
    grad_V: np.ndarray,
    omega_e: np.ndarray,
) -> np.ndarray:
    """Pointwise right-hand side of the spin-accumulation equation.

    d_t s = (n+T+ - n-T-)/(n+ - n-) * s x (lap_s x s)
            + ( 2 grad(n+T+ - n-T-)/(n+ - n-) + grad V ) . grad s
            - omega_e x s

    Conventions: s is a unit vector; grad_s is the Jacobian
    grad_s[i, j] = d s_i / d x_j, whose columns must be orthogonal to s
    (automatic for |s| = 1); the dot in the transport term is the
    directional derivative grad_s @ w.  grad_nT is the gradient of
    n+T+ - n-T-.  Every term is orthogonal to s, so |s| = 1 is formally
    preserved.
    """
    s = np.asarray(s, dtype=float)
    grad_s = np.asarray(grad_s, dtype=float)
    lap_s = np.asarray(lap_s, dtype=float)
    if abs(float(np.linalg.norm(s)) - 1.0) > 1e-9:
        raise ValueError("s must be a unit vector")
    if np_ == nm:
        raise ValueError("n+ = n- : coefficient (n+T+ - n-T-)/(n+ - n-) undefined")
    if np.max(np.abs(s @ grad_s)) > 1e-9:
        raise ValueError("columns of grad_s must be orthogonal to s")

    coeff = (np_ * Tp - nm * Tm) / (np_ - nm)
    exchange = coeff * np.cross(s, np.cross(lap_s, s))
    drift_dir = 2.0 * np.asarray(grad_nT, dtype=float) / (np_ - nm) + np.asarray(
        grad_V, dtype=float
    )
    transport = grad_s @ drift_dir
    precession = -np.cross(np.asarray(omega_e, dtype=float), s)
    return exchange + transport + precession
