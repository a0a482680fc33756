"""Device geometry, material profiles, scaling constants, and presets.

A device is a stack of layers on the scaled interval [0, 1]; each layer
carries a doping level, a magnetization direction (zero vector in
nonmagnetic layers) and a scattering polarization p in [0, 1).  Two
multilayer presets are built in:

  three-layer: F | N | F   ferromagnetic source/drain (highly doped,
               parallel magnetizations) around a nonmagnetic lowly doped
               channel -- a diode with ferromagnetic contacts.
  five-layer:  N | F | n | F' | N   two magnetic layers with orthogonal
               magnetizations inside the lowly doped channel, separated by
               a thin nonmagnetic spacer; contacts nonmagnetic and highly
               doped.  Doping geometry identical to the three-layer device,
               so at p = 0 both presets are the same nonmagnetic diode.

Scaling: the transport constants (lambda_D, D0, gamma) are taken as
canonical scaled inputs.  Doping is scaled by its maximum, potentials by
the thermal voltage.  The spin-flip time enters the scheme in units of the
diffusive time scale t0 = D0 * L^2 / D; see scaled_spin_flip_time.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Region",
    "DeviceProfile",
    "GridSample",
    "preset_three_layer",
    "preset_five_layer",
    "sample_on_grid",
    "scaled_spin_flip_time",
    "PRESETS",
]

# Physical parameters behind the built-in presets.
DOPING_HIGH_M3 = 1.0e23  # source/drain doping [1/m^3]
DOPING_LOW_M3 = 4.0e20  # channel doping [1/m^3]
DIFFUSION_M2S = 1.0e-3  # physical diffusion coefficient D [m^2/s]
SPIN_FLIP_S = 1.0e-12  # physical spin-flip time [s]


@dataclass(frozen=True)
class Region:
    """One layer: [x_from, x_to] in scaled coordinates, uniform material."""

    x_from: float
    x_to: float
    doping_m3: float
    magnetization: tuple[float, float, float]
    polarization: float


@dataclass
class DeviceProfile:
    """Geometry plus scaled transport constants of a multilayer device.

    lambda_D is the squared scaled Debye length, i.e. the coefficient
    eps U_T / (q C_max L^2) multiplying Delta V in the scaled Poisson
    equation; for the reference device (C_max = 1e23 m^-3, L = 1.2 um)
    it evaluates to about 1.2e-4, giving junction layers a few cells wide
    on the default grid.
    """

    name: str
    length_um: float
    regions: list[Region]
    lambda_D: float = 1.2e-4
    D0: float = 6.9e-4
    gamma: float = 4.0
    tau_sf_scaled: float = 1.0
    bias_V: float = -1.0
    thermal_voltage_V: float = 0.026

    @property
    def bias_scaled(self) -> float:
        """Applied bias in units of the thermal voltage (Dirichlet V(1))."""
        return self.bias_V / self.thermal_voltage_V

    @property
    def doping_max(self) -> float:
        return max(r.doping_m3 for r in self.regions)

    def validate(self) -> None:
        if not self.regions:
            raise ValueError("profile has no regions")
        xs = 0.0
        for r in self.regions:
            if abs(r.x_from - xs) > 1e-12:
                raise ValueError(f"regions do not tile [0,1]: gap/overlap at {r.x_from}")
            xs = r.x_to
            mag = np.asarray(r.magnetization, dtype=float)
            mnorm = float(np.linalg.norm(mag))
            if mnorm > 0.0 and abs(mnorm - 1.0) > 1e-12:
                raise ValueError("magnetization must be zero or unit length")
            if not 0.0 <= r.polarization < 1.0:
                raise ValueError("polarization must lie in [0, 1)")
        if abs(xs - 1.0) > 1e-12:
            raise ValueError(f"regions end at {xs}, expected 1")
        if self.lambda_D <= 0.0:
            raise ValueError("lambda_D must be positive")

    def with_polarization(self, p: float) -> "DeviceProfile":
        """Copy with every magnetic layer's polarization replaced by p."""
        regs = [
            replace(r, polarization=p if any(r.magnetization) else r.polarization)
            for r in self.regions
        ]
        return replace(self, regions=regs)

    # -- plain-text (INI) serialization ------------------------------------

    def to_config(self) -> str:
        cp = configparser.ConfigParser()
        cp["device"] = {
            "name": self.name,
            "length_um": repr(self.length_um),
            "lambda_D": repr(self.lambda_D),
            "D0": repr(self.D0),
            "gamma": repr(self.gamma),
            "tau_sf_scaled": repr(self.tau_sf_scaled),
            "bias_V": repr(self.bias_V),
            "thermal_voltage_V": repr(self.thermal_voltage_V),
        }
        for i, r in enumerate(self.regions):
            cp[f"region{i}"] = {
                "x_from": repr(r.x_from),
                "x_to": repr(r.x_to),
                "doping_m3": repr(r.doping_m3),
                "magnetization": " ".join(repr(c) for c in r.magnetization),
                "polarization": repr(r.polarization),
            }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_config(cls, text: str) -> "DeviceProfile":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        dev = cp["device"]
        regions = []
        i = 0
        while cp.has_section(f"region{i}"):
            sec = cp[f"region{i}"]
            mag = tuple(float(c) for c in sec["magnetization"].split())
            regions.append(
                Region(
                    float(sec["x_from"]),
                    float(sec["x_to"]),
                    float(sec["doping_m3"]),
                    mag,  # type: ignore[arg-type]
                    float(sec["polarization"]),
                )
            )
            i += 1
        prof = cls(
            name=dev.get("name", "custom"),
            length_um=float(dev["length_um"]),
            regions=regions,
            lambda_D=float(dev.get("lambda_D", "1.2e-4")),
            D0=float(dev.get("D0", "6.9e-4")),
            gamma=float(dev.get("gamma", "4.0")),
            tau_sf_scaled=float(dev.get("tau_sf_scaled", "1.0")),
            bias_V=float(dev.get("bias_V", "-1.0")),
            thermal_voltage_V=float(dev.get("thermal_voltage_V", "0.026")),
        )
        prof.validate()
        return prof


def scaled_spin_flip_time(
    length_um: float = 1.2,
    D0: float = 6.9e-4,
    tau_sf_s: float = SPIN_FLIP_S,
    diffusion_m2s: float = DIFFUSION_M2S,
) -> float:
    """Spin-flip time in units of the diffusive time scale t0 = D0 L^2 / D.

    The scaled equations carry D0 on every flux, which fixes the time unit
    t0 = D0 * L^2 / D once the physical diffusion coefficient D is chosen.
    Defaults (L = 1.2 um, D0 = 6.9e-4, D = 1e-3 m^2/s, tau_sf = 1e-12 s)
    give t0 ~ 9.94e-13 s and a scaled spin-flip time ~ 1.0064.
    """
    L = length_um * 1e-6
    t0 = D0 * L * L / diffusion_m2s
    return tau_sf_s / t0


def preset_three_layer() -> DeviceProfile:
    """F|N|F diode: magnetic highly doped contacts, nonmagnetic channel.

    L = 1.2 um with 0.2 um ferromagnetic layers at both ends
    (Omega = (0,0,1), p = 0.66, doping 1e23 1/m^3) and a nonmagnetic
    channel (p = 0, doping 4e20 1/m^3) in between.
    """
    regions = [
        Region(0.0, 1.0 / 6.0, DOPING_HIGH_M3, (0.0, 0.0, 1.0), 0.66),
        Region(1.0 / 6.0, 5.0 / 6.0, DOPING_LOW_M3, (0.0, 0.0, 0.0), 0.0),
        Region(5.0 / 6.0, 1.0, DOPING_HIGH_M3, (0.0, 0.0, 1.0), 0.66),
    ]
    prof = DeviceProfile(
        name="three-layer",
        length_um=1.2,
        regions=regions,
        tau_sf_scaled=scaled_spin_flip_time(),
    )
    prof.validate()
    return prof


def preset_five_layer() -> DeviceProfile:
    """N|F|n|F'|N stack: orthogonal magnetic layers inside the channel.

    Same length and doping geometry as the three-layer device (highly doped
    outer sixths, lowly doped middle), but the contacts are nonmagnetic and
    two ferromagnetic layers with orthogonal magnetizations (0,0,1) on
    [1/6, 10/21] and (0,1,0) on [11/21, 5/6] sit inside the channel,
    separated by a thin (L/21 ~ 57 nm) nonmagnetic spacer.
    """
    regions = [
        Region(0.0, 1.0 / 6.0, DOPING_HIGH_M3, (0.0, 0.0, 0.0), 0.0),
        Region(1.0 / 6.0, 10.0 / 21.0, DOPING_LOW_M3, (0.0, 0.0, 1.0), 0.66),
        Region(10.0 / 21.0, 11.0 / 21.0, DOPING_LOW_M3, (0.0, 0.0, 0.0), 0.0),
        Region(11.0 / 21.0, 5.0 / 6.0, DOPING_LOW_M3, (0.0, 1.0, 0.0), 0.66),
        Region(5.0 / 6.0, 1.0, DOPING_HIGH_M3, (0.0, 0.0, 0.0), 0.0),
    ]
    prof = DeviceProfile(
        name="five-layer",
        length_um=1.2,
        regions=regions,
        tau_sf_scaled=scaled_spin_flip_time(),
    )
    prof.validate()
    return prof


PRESETS = {
    "three-layer": preset_three_layer,
    "five-layer": preset_five_layer,
}


@dataclass
class GridSample:
    """Cell and face samples of a DeviceProfile on a uniform grid.

    Cell arrays have length m (exact cell averages, doping scaled by its
    maximum); face arrays have length m+1 with entries 0 and m at the
    contacts.  Interior face values are arithmetic means of the two
    adjacent cells; boundary faces copy the single adjacent cell.
    """

    m: int
    doping: np.ndarray  # (m,) scaled by max doping
    omega_cell: np.ndarray  # (m, 3)
    p_cell: np.ndarray  # (m,)
    omega_face: np.ndarray  # (m+1, 3)
    p_face: np.ndarray  # (m+1,)
    eta_face: np.ndarray  # (m+1,)


def _cell_averages(profile: DeviceProfile, m: int) -> tuple[np.ndarray, ...]:
    """Length-weighted averages of (doping, magnetization, p) per cell."""
    edges = np.linspace(0.0, 1.0, m + 1)
    doping = np.zeros(m)
    omega = np.zeros((m, 3))
    p = np.zeros(m)
    for r in profile.regions:
        # overlap of [r.x_from, r.x_to] with each cell
        lo = np.maximum(edges[:-1], r.x_from)
        hi = np.minimum(edges[1:], r.x_to)
        w = np.clip(hi - lo, 0.0, None) * m  # fraction of the cell covered
        doping += w * r.doping_m3
        omega += np.outer(w, np.asarray(r.magnetization, dtype=float))
        p += w * r.polarization
    return doping / profile.doping_max, omega, p


def sample_on_grid(profile: DeviceProfile, m: int) -> GridSample:
    """Sample the piecewise-constant profile onto m equal cells.

    Junction cells (a layer boundary interior to the cell) carry
    length-weighted averages; face values are arithmetic means of the
    adjacent cells, eta = sqrt(1 - p^2).
    """
    if m < 3:
        raise ValueError("need at least 3 cells")
    profile.validate()
    doping, omega_cell, p_cell = _cell_averages(profile, m)

    omega_face = np.empty((m + 1, 3))
    omega_face[1:-1] = 0.5 * (omega_cell[:-1] + omega_cell[1:])
    omega_face[0], omega_face[-1] = omega_cell[0], omega_cell[-1]
    p_face = np.empty(m + 1)
    p_face[1:-1] = 0.5 * (p_cell[:-1] + p_cell[1:])
    p_face[0], p_face[-1] = p_cell[0], p_cell[-1]

    return GridSample(
        m=m,
        doping=doping,
        omega_cell=omega_cell,
        p_cell=p_cell,
        omega_face=omega_face,
        p_face=p_face,
        eta_face=np.sqrt(1.0 - p_face * p_face),
    )
