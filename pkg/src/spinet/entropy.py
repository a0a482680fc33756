"""Entropy functionals for the three model classes and monotonicity checks.

With n± = n0 ± |nvec| (eigenvalues of the spin density matrix) and
W± = W0 ± |Wvec|, the functionals are

  H1 = sum_K ( n+ log(n+ T^{-3/2}) + n- log(n- T^{-3/2}) ) dx
  H2 = (5/2) sum_K n0 log( n0 / (W+^{3/5} + W-^{3/5}) ) dx
  H3 = sum_K ( n+ log(n+ T+^{-3/2}) + n- log(n- T-^{-3/2}) ) dx

each defined up to an additive multiple of the (conserved) total mass, so
only differences and monotonicity are meaningful quantities.

For the drift-free first model the decay rate of H1 has the closed form

  -dH1/dt = 4 int |grad sqrt(n+ T)|^2 + |grad sqrt(n- T)|^2
          + 20 int n0 |grad sqrt(T)|^2
          + (1/2) int (n+ - n-)(log n+ - log n-)
                      (1/tau_sf + T |grad(nvec/|nvec|)|^2),

a sum of squares and (a-b)(log a - log b) pairings, hence nonnegative.
`entropy_production_1` evaluates it with the same face-centered difference
quotients as the transport scheme; cells where |nvec| < 1e-14 contribute
nothing to the direction-gradient term (its prefactor vanishes there).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EntropyReport",
    "entropy_H1",
    "entropy_production_1",
    "entropy_H2",
    "entropy_H3",
    "monotonicity_verdict",
]

_SPIN_NORM_FLOOR = 1e-14


@dataclass
class EntropyReport:
    """Time series of an entropy functional with a monotonicity verdict."""

    steps: np.ndarray
    H: np.ndarray
    monotone_nonincreasing: bool
    max_violation: float
    tolerance: float
    production: np.ndarray | None = field(default=None, repr=False)


def _check_pm(n_plus: np.ndarray, n_minus: np.ndarray, T: np.ndarray) -> None:
    if np.any(n_minus <= 0.0):
        raise ValueError("inadmissible state: n0 - |nv| must be positive")
    if np.any(T <= 0.0):
        raise ValueError("inadmissible state: T must be positive")


def entropy_H1(n0: np.ndarray, nv: np.ndarray, T: np.ndarray, dx: float) -> float:
    """H1 = sum (n+ log(n+ T^{-3/2}) + n- log(n- T^{-3/2})) dx."""
    n0 = np.asarray(n0, dtype=float)
    nv = np.asarray(nv, dtype=float)
    T = np.asarray(T, dtype=float)
    r = np.linalg.norm(nv, axis=-1)
    np_, nm = n0 + r, n0 - r
    _check_pm(np_, nm, T)
    logT = 1.5 * np.log(T)
    return float(np.sum(np_ * (np.log(np_) - logT) + nm * (np.log(nm) - logT)) * dx)


def entropy_H2(n0: np.ndarray, W0: np.ndarray, Wv: np.ndarray, dx: float) -> float:
    """H2 = (5/2) sum n0 log(n0 / (W+^{3/5} + W-^{3/5})) dx."""
    n0 = np.asarray(n0, dtype=float)
    W0 = np.asarray(W0, dtype=float)
    Wv = np.asarray(Wv, dtype=float)
    r = np.linalg.norm(Wv, axis=-1)
    Wp, Wm = W0 + r, W0 - r
    if np.any(n0 <= 0.0):
        raise ValueError("inadmissible state: n0 must be positive")
    if np.any(Wm <= 0.0):
        raise ValueError("inadmissible state: W0 - |Wv| must be positive")
    return float(2.5 * np.sum(n0 * np.log(n0 / (Wp**0.6 + Wm**0.6))) * dx)


def entropy_H3(
    np_: np.ndarray, nm: np.ndarray, Tp: np.ndarray, Tm: np.ndarray, dx: float
) -> float:
    """H3 = sum (n+ log(n+ T+^{-3/2}) + n- log(n- T-^{-3/2})) dx."""
    np_ = np.asarray(np_, dtype=float)
    nm = np.asarray(nm, dtype=float)
    Tp = np.asarray(Tp, dtype=float)
    Tm = np.asarray(Tm, dtype=float)
    if np.any(np_ <= 0.0) or np.any(nm <= 0.0):
        raise ValueError("inadmissible state: branch densities must be positive")
    if np.any(Tp <= 0.0) or np.any(Tm <= 0.0):
        raise ValueError("inadmissible state: branch temperatures must be positive")
    return float(
        np.sum(np_ * np.log(np_ * Tp**-1.5) + nm * np.log(nm * Tm**-1.5)) * dx
    )


def entropy_production_1(
    n0: np.ndarray, nv: np.ndarray, T: np.ndarray, dx: float, tau_sf: float = 1.0
) -> float:
    """Discrete H1 production for the drift-free first model (nonnegative).

    Gradient terms are squared interior-face difference quotients (the
    contact faces carry no flux on entropy trajectories and contribute
    nothing); the direction-gradient factor per cell averages the two
    adjacent face quotients.
    """
    n0 = np.asarray(n0, dtype=float)
    nv = np.asarray(nv, dtype=float)
    T = np.asarray(T, dtype=float)
    if tau_sf <= 0.0:
        raise ValueError("tau_sf must be positive")
    r = np.linalg.norm(nv, axis=-1)
    np_, nm = n0 + r, n0 - r
    _check_pm(np_, nm, T)

    sp = np.sqrt(np_ * T)
    sm = np.sqrt(nm * T)
    grad2 = lambda u: np.sum((u[1:] - u[:-1]) ** 2) / dx  # sum_f |Du|^2/dx
    total = 4.0 * (grad2(sp) + grad2(sm))

    sqT = np.sqrt(T)
    n0_face = 0.5 * (n0[1:] + n0[:-1])
    total += 20.0 * float(np.sum(n0_face * (sqT[1:] - sqT[:-1]) ** 2)) / dx

    # relaxation / direction-exchange term
    pair = (np_ - nm) * (np.log(np_) - np.log(nm))  # >= 0, exactly 0 at r = 0
    mask = r >= _SPIN_NORM_FLOOR
    shat = np.zeros_like(nv)
    shat[mask] = nv[mask] / r[mask, None]
    q_face = np.sum((shat[1:] - shat[:-1]) ** 2, axis=1) / (dx * dx)
    q_face *= mask[1:] & mask[:-1]
    q_cell = np.zeros(len(n0))
    q_cell[:-1] += 0.5 * q_face
    q_cell[1:] += 0.5 * q_face
    total += 0.5 * float(np.sum(pair * (1.0 / tau_sf + T * q_cell))) * dx
    return float(total)


def monotonicity_verdict(H: np.ndarray, tolerance: float) -> EntropyReport:
    """Check a series for non-increase up to `tolerance` per step."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 1 or len(H) < 2:
        raise ValueError("need a series of at least two H values")
    if tolerance < 0.0:
        raise ValueError("tolerance must be nonnegative")
    upticks = np.diff(H)
    max_violation = float(max(0.0, np.max(upticks)))
    return EntropyReport(
        steps=np.arange(len(H)),
        H=H,
        monotone_nonincreasing=max_violation <= tolerance,
        max_violation=max_violation,
        tolerance=tolerance,
    )
