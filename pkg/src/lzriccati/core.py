"""Domain types, picture transformations and phase bookkeeping.

Everything here works in the dimensionless variables of the Landau-Zener
problem

    i da/dtau = -eps*tau*a + b,      i db/dtau = a + eps*tau*b,

started from a(-tau0) = 1, b(-tau0) = 0.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


class Picture(str, enum.Enum):
    SCHROEDINGER = "schroedinger"
    INTERACTION = "interaction"


def _frozen(x, dtype):
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Params:
    """Chirp ratio ``epsilon`` and start-time magnitude ``tau0``.

    The evolution always runs over ``[-tau0, tau0]``.
    """

    epsilon: float
    tau0: float

    def __post_init__(self):
        eps = float(self.epsilon)
        tau0 = float(self.tau0)
        if not (math.isfinite(eps) and eps > 0):
            raise ContractError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not (math.isfinite(tau0) and tau0 > 0):
            raise ContractError(f"tau0 must be positive and finite, got {self.tau0!r}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "tau0", tau0)

    @classmethod
    def from_periods(cls, epsilon: float, periods: int) -> "Params":
        """Start time from an integer number of quadratic-phase periods.

        ``tau0 = sqrt(2*pi*T0/epsilon)`` so that ``epsilon*tau0**2/(2*pi) = T0``.
        """
        if int(periods) != periods or periods <= 0:
            raise ContractError(f"T0 must be a positive integer, got {periods!r}")
        if not epsilon > 0:
            raise ContractError(f"epsilon must be positive, got {epsilon!r}")
        return cls(epsilon, math.sqrt(2.0 * math.pi * int(periods) / epsilon))

    @property
    def periods(self) -> float:
        return self.epsilon * self.tau0 ** 2 / (2.0 * math.pi)

    @property
    def lz_amplitude(self) -> float:
        """Exact asymptotic survival amplitude exp(-pi/(2 eps))."""
        return math.exp(-math.pi / (2.0 * self.epsilon))


@dataclass(frozen=True)
class AmplitudePair:
    tau: float
    a: complex
    b: complex
    picture: Picture = Picture.SCHROEDINGER

    def __post_init__(self):
        object.__setattr__(self, "picture", Picture(self.picture))


@dataclass(frozen=True)
class Trajectory:
    """Sampled amplitudes on a strictly increasing time grid.

    Samples are stored column-wise (``tau``, ``a``, ``b``); iterating yields
    :class:`AmplitudePair` records.
    """

    params: Params
    picture: Picture
    tau: np.ndarray
    a: np.ndarray
    b: np.ndarray
    solver_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        tau = _frozen(self.tau, float)
        a = _frozen(self.a, complex)
        b = _frozen(self.b, complex)
        if tau.ndim != 1 or tau.size == 0 or a.shape != tau.shape or b.shape != tau.shape:
            raise ContractError("tau, a, b must be 1-d arrays of equal nonzero length")
        if np.any(np.diff(tau) <= 0):
            raise ContractError("trajectory times must be strictly increasing")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "picture", Picture(self.picture))
        object.__setattr__(self, "solver_meta", dict(self.solver_meta))

    def __len__(self):
        return self.tau.size

    def __iter__(self):
        for t, a, b in zip(self.tau, self.a, self.b):
            yield AmplitudePair(float(t), complex(a), complex(b), self.picture)

    @property
    def samples(self):
        return list(self)

    @property
    def final(self) -> AmplitudePair:
        return AmplitudePair(float(self.tau[-1]), complex(self.a[-1]), complex(self.b[-1]), self.picture)

    def normalization_defect(self) -> np.ndarray:
        return np.abs(np.abs(self.a) ** 2 + np.abs(self.b) ** 2 - 1.0)


@dataclass(frozen=True)
class PhaseDecomposition:
    """Amplitude/phase split of a Riccati solution, column-wise.

    ``A = exp(-Re H)``, ``varphi`` is the common phase of ``a``, ``phi_eta``
    the unwrapped phase of eta (seeded at pi/2), ``psi = phi_eta - pi/2`` and
    ``gamma = -Im H``.
    """

    tau: np.ndarray
    A: np.ndarray
    varphi: np.ndarray
    phi_eta: np.ndarray
    psi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name in ("tau", "A", "varphi", "phi_eta", "psi", "gamma"):
            object.__setattr__(self, name, _frozen(getattr(self, name), float))


def _interaction_phase(tau, eps):
    return np.exp(-0.5j * eps * tau * tau)


def to_interaction(pair: AmplitudePair, params: Params) -> AmplitudePair:
    """Rotate a Schroedinger-picture pair into the interaction picture."""
    if pair.picture is not Picture.SCHROEDINGER:
        raise ContractError("to_interaction expects a Schroedinger-picture pair")
    ph = complex(_interaction_phase(pair.tau, params.epsilon))
    return AmplitudePair(pair.tau, ph * pair.a, ph.conjugate() * pair.b, Picture.INTERACTION)


def to_schroedinger(pair: AmplitudePair, params: Params) -> AmplitudePair:
    """Inverse of :func:`to_interaction`."""
    if pair.picture is not Picture.INTERACTION:
        raise ContractError("to_schroedinger expects an interaction-picture pair")
    ph = complex(_interaction_phase(pair.tau, params.epsilon))
    return AmplitudePair(pair.tau, ph.conjugate() * pair.a, ph * pair.b, Picture.SCHROEDINGER)


def trajectory_to_interaction(traj: Trajectory) -> Trajectory:
    if traj.picture is not Picture.SCHROEDINGER:
        raise ContractError("trajectory is not in the Schroedinger picture")
    ph = _interaction_phase(traj.tau, traj.params.epsilon)
    return Trajectory(traj.params, Picture.INTERACTION, traj.tau, ph * traj.a,
                      np.conj(ph) * traj.b, traj.solver_meta)


def trajectory_to_schroedinger(traj: Trajectory) -> Trajectory:
    if traj.picture is not Picture.INTERACTION:
        raise ContractError("trajectory is not in the interaction picture")
    ph = _interaction_phase(traj.tau, traj.params.epsilon)
    return Trajectory(traj.params, Picture.SCHROEDINGER, traj.tau, np.conj(ph) * traj.a,
                      ph * traj.b, traj.solver_meta)


def normalization_defect(pair: AmplitudePair) -> float:
    return abs(abs(pair.a) ** 2 + abs(pair.b) ** 2 - 1.0)


def unwrap_phase(samples, initial_phase: float = 0.0, zero_tol: float = 0.0) -> np.ndarray:
    """Continuous phase of a complex sequence.

    Increments between consecutive samples are taken in (-pi, pi]. The first
    sample whose modulus exceeds ``zero_tol`` is placed on the branch nearest
    ``initial_phase``; samples at or below ``zero_tol`` have no phase and carry
    the previous value (``initial_phase`` before the first defined sample).
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size == 0:
        raise ContractError("unwrap_phase needs at least one sample")
    defined = np.abs(z) > zero_tol
    out = np.full(z.size, float(initial_phase))
    idx = np.flatnonzero(defined)
    if idx.size == 0:
        return out
    zd = z[idx]
    p0 = float(np.angle(zd[0]))
    p0 += 2.0 * math.pi * round((initial_phase - p0) / (2.0 * math.pi))
    steps = np.angle(zd[1:] * np.conj(zd[:-1]))
    phases = p0 + np.concatenate(([0.0], np.cumsum(steps)))
    out[idx] = phases
    # carry forward through undefined gaps after the first defined sample
    fill = np.maximum.accumulate(np.where(defined, np.arange(z.size), -1))
    later = fill >= 0
    out[later] = out[fill[later]]
    return out
