"""Steady-state scattering of a dipole-coupled drop-filter cavity.

A single cavity mode is evanescently coupled to two parallel waveguides
(energy decay rate ``gamma`` into each) and to a two-level dipole with
coupling strength ``g``.  The cavity additionally leaks into free space at
rate ``kappa`` and the dipole relaxes into non-cavity modes at rate ``tau``.
A monochromatic probe entering one waveguide scatters into four channels:

    through      remains in the input waveguide
    drop         transfers to the second waveguide
    cavity loss  leaves via the kappa reservoir
    dipole loss  leaves via the tau reservoir

With the dipole far detuned or absent, critical coupling routes a resonant
probe entirely into the drop channel.  A resonant dipole with cooperativity
well above one pins the cavity dark and restores transmission instead:
dipole-induced transparency.  All formulas below linearize the dipole in the
weak-excitation limit, so the response per unit input amplitude is closed
form and the four outputs are coherent amplitudes.

Conventions: every rate and detuning is an angular rate in rad/s; values
quoted in THz convert by the plain factor ``THZ`` (1e12, no extra 2*pi).
The probe is given as a detuning ``delta_omega`` from the bare cavity line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

THZ = 1.0e12  # rad/s per THz

# |denominator| below this is treated as numerically singular.  The physical
# denominator has real part >= gamma > 0, so this only guards corrupt input.
_DENOM_FLOOR = 1e-280


class NumericsError(Exception):
    """Base class for numerical-domain failures (degenerate or singular)."""


class DegenerateDipole(NumericsError):
    """Dipole linewidth is zero and the probe sits exactly on its line."""


class SingularDenominator(NumericsError):
    """Scattering denominator collapsed below the numerical floor."""


class SingularSystem(NumericsError):
    """Steady-state linear system is singular within machine precision."""


class UndefinedDiagnostic(NumericsError):
    """A figure of merit is undefined for the given parameters."""


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one cavity-waveguide-dipole node.

    Attributes
    ----------
    gamma : float
        Cavity energy decay rate into each waveguide, rad/s.  Must be > 0.
    g : float
        Dipole-cavity coupling rate, rad/s.  g = 0 models a bare drop filter.
    tau : float
        Dipole energy decay rate into non-cavity modes, rad/s.  tau = 0 is
        allowed, but scattering then diverges if the probe lands exactly on
        the dipole line while g > 0.
    kappa : float, optional
        Intrinsic cavity loss rate, rad/s.  Defaults to 0.1 * gamma.
    delta : float
        Dipole detuning from the cavity resonance, rad/s.
    omega0 : float
        Absolute cavity frequency, rad/s.  Only used for Q bookkeeping; all
        scattering works in the rotating frame of the probe.
    """

    gamma: float
    g: float
    tau: float
    kappa: float | None = None
    delta: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        if self.kappa is None:
            object.__setattr__(self, "kappa", 0.1 * self.gamma)
        problems = []
        for name in ("gamma", "g", "tau", "kappa", "delta", "omega0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                problems.append(f"{name} must be a finite number, got {value!r}")
                continue
            object.__setattr__(self, name, float(value))
        if not problems:
            if self.gamma <= 0.0:
                problems.append(f"gamma must be > 0, got {self.gamma}")
            for name in ("g", "tau", "kappa", "omega0"):
                if getattr(self, name) < 0.0:
                    problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if problems:
            raise ValueError("invalid SystemParams: " + "; ".join(problems))

    @property
    def quality_factor(self) -> float | None:
        """omega0 / kappa, or None when either is zero."""
        if self.omega0 > 0.0 and self.kappa > 0.0:
            return self.omega0 / self.kappa
        return None


@dataclass(frozen=True)
class ProbeDetuning:
    """Probe frequency relative to the bare cavity line, rad/s."""

    delta_omega: float

    def __post_init__(self):
        if not math.isfinite(self.delta_omega):
            raise ValueError(f"delta_omega must be finite, got {self.delta_omega!r}")
        object.__setattr__(self, "delta_omega", float(self.delta_omega))


Probe = Union[ProbeDetuning, float]


def _probe_value(probe: Probe) -> float:
    if isinstance(probe, ProbeDetuning):
        return probe.delta_omega
    value = float(probe)
    if not math.isfinite(value):
        raise ValueError(f"probe detuning must be finite, got {probe!r}")
    return value


@dataclass(frozen=True)
class ScatterCoefficients:
    """Steady-state amplitudes per unit input amplitude in one waveguide.

    ``t_through`` and ``t_drop`` are the waveguide output amplitudes,
    ``b_amp`` the intracavity field and ``sigma_amp`` the dipole coherence.
    The waveguide coefficients are dimensionless; ``b_amp`` and ``sigma_amp``
    carry 1/sqrt(rad/s) so that kappa*|b_amp|^2 and tau*|sigma_amp|^2 are
    dimensionless loss fractions.
    """

    t_through: complex
    t_drop: complex
    b_amp: complex
    sigma_amp: complex


class ScatterArrays(NamedTuple):
    """Vectorized scattering amplitudes over an array of probe detunings."""

    t_through: np.ndarray
    t_drop: np.ndarray
    b_amp: np.ndarray
    sigma_amp: np.ndarray


def scatter_coefficients(params: SystemParams, probe: Probe) -> ScatterCoefficients:
    """Closed-form scattering amplitudes of the driven node.

    Writing dw for the probe detuning, the dipole response enters through
    X = -i(dw - delta) + tau/2 and the cavity denominator is

        D = -i dw + gamma + kappa/2 + g^2 / X.

    Then t_drop = -gamma / D and t_through = 1 + t_drop, so the two-port
    identity t_drop = t_through - 1 holds exactly by construction.

    Raises
    ------
    DegenerateDipole
        If g > 0, tau = 0 and the probe sits exactly on the dipole line.
    SingularDenominator
        If D falls below the numerical floor (unreachable for valid params).
    """
    dw = _probe_value(probe)
    x = complex(-1j * (dw - params.delta) + 0.5 * params.tau)
    if params.g > 0.0 and x == 0.0:
        raise DegenerateDipole(
            "dipole term diverges: g > 0 with tau = 0 and probe exactly on the "
            f"dipole line (delta_omega = delta = {dw!r})"
        )
    coupling = params.g * params.g / x if params.g > 0.0 else 0.0j
    denom = -1j * dw + params.gamma + 0.5 * params.kappa + coupling
    if not np.isfinite(denom) or abs(denom) < _DENOM_FLOOR:
        raise SingularDenominator(f"scattering denominator collapsed: D = {denom!r}")
    t_drop = -params.gamma / denom
    b_amp = -math.sqrt(params.gamma) / denom
    sigma_amp = -1j * params.g * b_amp / x if params.g > 0.0 else 0.0j
    return ScatterCoefficients(
        t_through=complex(1.0 + t_drop),
        t_drop=complex(t_drop),
        b_amp=complex(b_amp),
        sigma_amp=complex(sigma_amp),
    )


def scattering_arrays(params: SystemParams, delta_omega: np.ndarray) -> ScatterArrays:
    """Vectorized :func:`scatter_coefficients` over a detuning array."""
    dw = np.asarray(delta_omega, dtype=float)
    x = -1j * (dw - params.delta) + 0.5 * params.tau
    if params.g > 0.0:
        dead = np.flatnonzero(x == 0.0)
        if dead.size:
            raise DegenerateDipole(
                "dipole term diverges at grid indices "
                f"{dead.tolist()}: probe exactly on a zero-linewidth dipole line"
            )
        coupling = params.g * params.g / x
    else:
        coupling = np.zeros_like(x)
    denom = -1j * dw + params.gamma + 0.5 * params.kappa + coupling
    t_drop = -params.gamma / denom
    b_amp = -math.sqrt(params.gamma) / denom
    sigma = -1j * params.g * b_amp / x if params.g > 0.0 else np.zeros_like(b_amp)
    return ScatterArrays(1.0 + t_drop, t_drop, b_amp, sigma)


def steady_state_oracle(
    params: SystemParams, probe: Probe, drive: str = "a"
) -> ScatterCoefficients:
    """Scattering amplitudes by direct solve of the steady-state equations.

    Assembles the linearized Heisenberg steady state for the cavity field b
    and dipole coherence sigma as a 2x2 complex linear system and solves it
    numerically, then forms the outputs from the input-output relations
    (out = in + sqrt(gamma) * b on each waveguide).  No closed-form
    coefficient expression is reused, so this provides an independent check
    of :func:`scatter_coefficients`.

    Parameters
    ----------
    drive : {"a", "c"}
        Which waveguide carries the unit input.  The node is symmetric under
        swapping the waveguides, so both drives return identical values with
        through/drop roles relabeled.
    """
    if drive not in ("a", "c"):
        raise ValueError(f"drive must be 'a' or 'c', got {drive!r}")
    dw = _probe_value(probe)
    cavity_row = -1j * dw + params.gamma + 0.5 * params.kappa
    root_gamma = math.sqrt(params.gamma)
    if params.g == 0.0:
        # dipole decoupled: sigma row drops out, cavity equation is scalar
        b = -root_gamma / cavity_row
        sigma = 0.0j
    else:
        x = -1j * (dw - params.delta) + 0.5 * params.tau
        matrix = np.array(
            [[cavity_row, 1j * params.g], [1j * params.g, x]], dtype=complex
        )
        rhs = np.array([-root_gamma, 0.0], dtype=complex)
        try:
            b, sigma = np.linalg.solve(matrix, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(f"steady-state system is singular: {exc}") from exc
        if not (np.isfinite(b) and np.isfinite(sigma)):
            raise SingularSystem(
                f"steady-state solve returned non-finite fields (b={b!r})"
            )
    driven_out = 1.0 + root_gamma * b  # input-output on the driven waveguide
    other_out = root_gamma * b
    return ScatterCoefficients(
        t_through=complex(driven_out),
        t_drop=complex(other_out),
        b_amp=complex(b),
        sigma_amp=complex(sigma),
    )


@dataclass(frozen=True)
class FluxBudget:
    """Fractions of the input photon flux leaving by each channel."""

    through: float
    drop: float
    cavity_loss: float
    dipole_loss: float

    @property
    def total(self) -> float:
        return self.through + self.drop + self.cavity_loss + self.dipole_loss


def flux_budget(params: SystemParams, probe: Probe) -> FluxBudget:
    """Steady-state flux fractions; their total is 1 for any valid params."""
    c = scatter_coefficients(params, probe)
    return FluxBudget(
        through=abs(c.t_through) ** 2,
        drop=abs(c.t_drop) ** 2,
        cavity_loss=params.kappa * abs(c.b_amp) ** 2,
        dipole_loss=params.tau * abs(c.sigma_amp) ** 2,
    )


@dataclass(frozen=True)
class DiagnosticNumbers:
    """Cavity-QED figures of merit for one node.

    purcell : dipole emission enhancement into the cavity, 2g^2/((gamma+kappa/2)tau)
    critical_atom : (2 gamma + kappa) tau / g^2; purcell * critical_atom = 4
    critical_photon : (tau / 2g)^2, saturation photon number
    max_safe_flux : input photon flux (photons/s) keeping the dipole linear
    """

    purcell: float
    critical_atom: float
    critical_photon: float
    max_safe_flux: float


def diagnostics(params: SystemParams, eta: float = 0.01) -> DiagnosticNumbers:
    """Figures of merit; requires a coupled, radiating dipole.

    ``max_safe_flux`` is the fraction ``eta`` of the saturation flux scale
    g^2/gamma at which the linearization is still comfortably valid.

    Raises
    ------
    UndefinedDiagnostic
        If g = 0 or tau = 0.
    """
    if params.g == 0.0 or params.tau == 0.0:
        raise UndefinedDiagnostic(
            f"diagnostics need g > 0 and tau > 0 (got g={params.g}, tau={params.tau})"
        )
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    g2 = params.g * params.g
    return DiagnosticNumbers(
        purcell=2.0 * g2 / ((params.gamma + 0.5 * params.kappa) * params.tau),
        critical_atom=(2.0 * params.gamma + params.kappa) * params.tau / g2,
        critical_photon=(params.tau / (2.0 * params.g)) ** 2,
        max_safe_flux=eta * g2 / params.gamma,
    )


@dataclass(frozen=True)
class WeakExcitationReport:
    """Result of the linearization validity estimate."""

    valid: bool
    sigma_occupancy_estimate: float


def weak_excitation_check(params: SystemParams, input_flux: float) -> WeakExcitationReport:
    """Estimate the dipole excited-state occupancy at the transparency point.

    The linearized model assumes <sigma+ sigma-> << 1.  For a continuous
    input of ``input_flux`` photons/s the steady-state occupancy at the
    transparency point (probe on the bare cavity line) is estimated as
    input_flux * |sigma_amp|^2; the report flags valid when it is below 0.1.
    """
    if not math.isfinite(input_flux) or input_flux < 0.0:
        raise ValueError(f"input_flux must be a finite non-negative rate, got {input_flux!r}")
    c = scatter_coefficients(params, 0.0)
    occupancy = input_flux * abs(c.sigma_amp) ** 2
    return WeakExcitationReport(valid=bool(occupancy < 0.1), sigma_occupancy_estimate=occupancy)
