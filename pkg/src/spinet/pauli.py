"""Exact algebra of Hermitian 2x2 matrices in the Pauli basis.

Every spin-resolved quantity in this package is a Hermitian 2x2 matrix

    A = a0*sigma_0 + av . sigma_vec,

stored as the pair (a0, av) with a0 real and av a real 3-vector.  The
eigenvalues are a0 +/- |av| and the eigenprojections are
P_pm = (sigma_0 +/- av.sigma/|av|)/2, which makes products, exponentials
and general spectral functions available in closed form:

    A*B   = (a0*b0 + av.bv) sigma_0 + (a0*bv + b0*av) . sigma
            + i (av x bv) . sigma
    exp A = e^{a0} ( cosh|av| sigma_0 + sinh|av|/|av| * av . sigma )
    f(A)  = f(a+)P_+ + f(a-)P_-,   a_pm = a0 +/- |av|

The polarization congruence maps a Pauli pair through
P^{-1/2} A P^{-1/2} with P = sigma_0 + p Omega.sigma, the operation that
converts unpolarized fluxes into their spin-polarized counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PauliVec",
    "pauli_mul",
    "pauli_exp",
    "pauli_fn",
    "polarization_congruence",
    "sinhc",
]

# Below this threshold sinh(x)/x switches to its Taylor series: the direct
# quotient loses digits to cancellation as x -> 0.
_SINHC_SERIES_CUTOFF = 1e-4


@dataclass
class PauliVec:
    """Hermitian 2x2 matrix s0*sigma_0 + sv.sigma in Pauli coordinates.

    Attributes
    ----------
    s0 : float
        Scalar (half-trace) part.
    sv : ndarray, shape (3,)
        Vector (spin) part.
    """

    s0: float
    sv: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.s0 = float(self.s0)
        self.sv = np.asarray(self.sv, dtype=float)
        if self.sv.shape != (3,):
            raise ValueError(f"vector part must have shape (3,), got {self.sv.shape}")

    @property
    def eigenvalues(self) -> tuple[float, float]:
        """(s0 + |sv|, s0 - |sv|)."""
        r = float(np.linalg.norm(self.sv))
        return self.s0 + r, self.s0 - r

    def is_positive_definite(self) -> bool:
        return self.s0 > float(np.linalg.norm(self.sv))

    def isclose(self, other: "PauliVec", atol: float = 1e-12) -> bool:
        return (
            abs(self.s0 - other.s0) <= atol
            and bool(np.all(np.abs(self.sv - other.sv) <= atol))
        )


def sinhc(x: float) -> float:
    """sinh(x)/x with the removable singularity at 0 filled in.

    For |x| < 1e-4 the series 1 + x^2/6 + x^4/120 is exact to double
    precision (next term ~ x^6/5040 < 1e-28).
    """
    x = float(x)
    if abs(x) < _SINHC_SERIES_CUTOFF:
        x2 = x * x
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0
    return np.sinh(x) / x


def pauli_mul(a: PauliVec, b: PauliVec) -> tuple[PauliVec, np.ndarray]:
    """Product of two Pauli pairs.

    The full matrix product is hermitian_part + i*(skew_part . sigma);
    the skew part vanishes iff av and bv are parallel.

    Returns
    -------
    (hermitian_part, skew_part)
        hermitian_part = (a0*b0 + av.bv, a0*bv + b0*av),
        skew_part = av x bv (the coefficient of i*sigma).
    """
    herm = PauliVec(a.s0 * b.s0 + float(a.sv @ b.sv), a.s0 * b.sv + b.s0 * a.sv)
    return herm, np.cross(a.sv, b.sv)


def pauli_exp(a: PauliVec) -> PauliVec:
    """Matrix exponential exp(a0*sigma_0 + av.sigma).

    Equals e^{a0}(cosh|av|, sinh|av|/|av| * av); the vector-part ratio is
    evaluated through :func:`sinhc` so av -> 0 is exact.

    Raises
    ------
    OverflowError
        If a0 + |av| exceeds the double-precision exp range.
    """
    r = float(np.linalg.norm(a.sv))
    if a.s0 + r > 709.0:  # log(DBL_MAX) ~ 709.78
        raise OverflowError(f"exp overflow: a0 + |av| = {a.s0 + r:.6g} > 709")
    scale = np.exp(a.s0)
    return PauliVec(scale * np.cosh(r), scale * sinhc(r) * a.sv)


def pauli_fn(f, m: PauliVec) -> PauliVec:
    """Apply a scalar function spectrally: f(M) = f(m+)P_+ + f(m-)P_-.

    In Pauli coordinates this is
    ( (f(m+)+f(m-))/2 , (f(m+)-f(m-))/2 * mv/|mv| ), with the mv = 0 case
    handled by the explicit branch (f(m0), 0) since the projection formula
    is 0/0 there.  `f` must be defined at both eigenvalues m0 +/- |mv|.
    """
    r = float(np.linalg.norm(m.sv))
    if r == 0.0:
        return PauliVec(float(f(m.s0)), np.zeros(3))
    fp = float(f(m.s0 + r))
    fm = float(f(m.s0 - r))
    return PauliVec(0.5 * (fp + fm), (0.5 * (fp - fm) / r) * m.sv)


def _congruence_matrix(omega: np.ndarray, p: float) -> np.ndarray:
    """4x4 Pauli-coordinate matrix of A -> P^{-1/2} A P^{-1/2}.

    eta = sqrt(1-p^2);  block form  eta^{-2} [[1, -p w^T],
                                              [-p w, (1-eta) w w^T + eta I]].
    """
    eta = np.sqrt(1.0 - p * p)
    m = np.empty((4, 4))
    m[0, 0] = 1.0
    m[0, 1:] = -p * omega
    m[1:, 0] = -p * omega
    m[1:, 1:] = (1.0 - eta) * np.outer(omega, omega) + eta * np.eye(3)
    return m / (eta * eta)


def polarization_congruence(
    a: PauliVec, omega: np.ndarray, p: float, direction: str = "forward"
) -> PauliVec:
    """Congruence of a Pauli pair with the polarization matrix.

    With P = sigma_0 + p Omega.sigma and eta = sqrt(1-p^2), the forward map
    sends A to P^{-1/2} A P^{-1/2}; in Pauli coordinates this is the linear
    map eta^{-2}[[1, -p Omega^T], [-p Omega, (1-eta)Omega(x)Omega + eta I]].
    direction="inverse" applies the matrix inverse (i.e. P^{1/2} A P^{1/2}),
    so forward followed by inverse is the identity.  p = 0 is the identity
    map for either direction.

    Parameters
    ----------
    omega : unit 3-vector (|omega| = 1 within 1e-12)
    p : polarization in [0, 1)
    """
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-12:
        raise ValueError("omega must be a unit vector")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"polarization must lie in [0, 1), got {p}")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")

    m = _congruence_matrix(omega, p)
    if direction == "inverse":
        m = np.linalg.inv(m)
    coords = m @ np.concatenate(([a.s0], a.sv))
    return PauliVec(coords[0], coords[1:])
