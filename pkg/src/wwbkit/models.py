"""Signal models, priors and observation covariance construction."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .geometry import ArrayGeometry, steering_matrix


@dataclass(frozen=True)
class Unconditional:
    """Zero-mean circular Gaussian source with known power.

    Args:
        sigma_s2: Source power per source.
        sigma_n2: White noise power per sensor.
        snapshots: Number of i.i.d. snapshots T.
    """

    sigma_s2: float
    sigma_n2: float = 1.0
    snapshots: int = 1

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma_s2) and self.sigma_s2 > 0):
            raise ValueError("sigma_s2 must be finite and > 0")
        if not (np.isfinite(self.sigma_n2) and self.sigma_n2 > 0):
            raise ValueError("sigma_n2 must be finite and > 0")
        if int(self.snapshots) != self.snapshots or self.snapshots < 1:
            raise ValueError("snapshots must be an integer >= 1")
        object.__setattr__(self, "snapshots", int(self.snapshots))

    kind = "unconditional"

    @property
    def snr(self) -> float:
        return self.sigma_s2 / self.sigma_n2

    def u_snr(self, n_sensors: int) -> float:
        """Scalar SNR functional of the unconditional closed forms."""
        s2, n2 = self.sigma_s2, self.sigma_n2
        return s2 * s2 / (n2 * (n_sensors * s2 + n2))

    def phi(self, n_sensors: int) -> float:
        """Woodbury weight sigma_s2 / (sigma_s2 * M + sigma_n2)."""
        return self.sigma_s2 / (self.sigma_s2 * n_sensors + self.sigma_n2)

    def with_snr_db(self, snr_db: float) -> "Unconditional":
        """Same noise level and T, source power set from ``snr_db``."""
        return replace(self, sigma_s2=self.sigma_n2 * 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class Conditional:
    """Known deterministic waveform in white Gaussian noise.

    Args:
        waveform: ``(T,)`` samples for one source or ``(T, N)`` for N sources.
        sigma_n2: White noise power per sensor.
    """

    waveform: np.ndarray
    sigma_n2: float = 1.0

    def __post_init__(self) -> None:
        w = np.array(self.waveform, dtype=complex, copy=True)
        if w.ndim == 1:
            w = w.reshape(-1, 1)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("waveform must be non-empty with shape (T,) or (T, N)")
        if not np.all(np.isfinite(w)):
            raise ValueError("waveform samples must be finite")
        if not (np.isfinite(self.sigma_n2) and self.sigma_n2 > 0):
            raise ValueError("sigma_n2 must be finite and > 0")
        if np.sum(np.abs(w) ** 2) <= 0:
            raise ValueError("waveform energy must be > 0")
        w.setflags(write=False)
        object.__setattr__(self, "waveform", w)

    kind = "conditional"

    @property
    def snapshots(self) -> int:
        return int(self.waveform.shape[0])

    @property
    def n_sources(self) -> int:
        return int(self.waveform.shape[1])

    @property
    def energy(self) -> float:
        """Total waveform energy summed over snapshots and sources."""
        return float(np.sum(np.abs(self.waveform) ** 2))

    @property
    def snr(self) -> float:
        return self.energy / (self.snapshots * self.sigma_n2)

    def c_snr(self) -> float:
        """Scalar SNR functional of the conditional closed forms."""
        return self.energy / self.sigma_n2

    def with_snr_db(self, snr_db: float) -> "Conditional":
        """Waveform rescaled so that energy / (T sigma_n2) matches ``snr_db``."""
        target = self.snapshots * self.sigma_n2 * 10.0 ** (snr_db / 10.0)
        scale = np.sqrt(target / self.energy)
        return Conditional(self.waveform * scale, self.sigma_n2)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Conditional):
            return NotImplemented
        return self.sigma_n2 == other.sigma_n2 and np.array_equal(self.waveform, other.waveform)

    def __hash__(self) -> int:
        return hash((self.sigma_n2, self.waveform.tobytes()))


SignalModel = Union[Unconditional, Conditional]


def constant_waveform(snapshots: int, amplitude: float = 1.0) -> np.ndarray:
    """Constant waveform used when a scenario only fixes an energy level."""
    if snapshots < 1:
        raise ValueError("snapshots must be >= 1")
    return np.full(snapshots, amplitude, dtype=complex)


@dataclass(frozen=True)
class Uniform:
    """Uniform prior on ``[a, b]``."""

    a: float = -1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"uniform prior needs finite a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return np.where(inside, -np.log(self.length), -np.inf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.a, self.b, size=size)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian prior with mean ``mu`` and variance ``sigma2``."""

    mu: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be finite and > 0")

    @property
    def length(self) -> float:
        return np.inf

    def contains(self, x: float) -> bool:
        return bool(np.isfinite(x))

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -0.5 * (x - self.mu) ** 2 / self.sigma2 - 0.5 * np.log(2 * np.pi * self.sigma2)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mu, np.sqrt(self.sigma2), size=size)


PriorEntry = Union[Uniform, Gaussian]


@dataclass(frozen=True)
class PriorSpec:
    """Independent per-parameter priors; the joint prior is their product."""

    entries: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("prior needs at least one entry")
        for e in entries:
            if not isinstance(e, (Uniform, Gaussian)):
                raise TypeError(f"unsupported prior entry {e!r}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> PriorEntry:
        return self.entries[i]

    @property
    def is_uniform(self) -> bool:
        return all(isinstance(e, Uniform) for e in self.entries)

    def is_unit_uniform(self) -> bool:
        """True when every entry is uniform on [-1, 1]."""
        return all(isinstance(e, Uniform) and e.a == -1.0 and e.b == 1.0 for e in self.entries)

    def logpdf(self, theta: Sequence[float]) -> float:
        th = np.asarray(theta, dtype=float)
        return float(sum(e.logpdf(t) for e, t in zip(self.entries, th)))

    def contains(self, theta: Sequence[float]) -> bool:
        return all(e.contains(float(t)) for e, t in zip(self.entries, theta))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([e.sample(rng) for e in self.entries])

    @classmethod
    def unit_uniform(cls, q: int) -> "PriorSpec":
        return cls(tuple(Uniform(-1.0, 1.0) for _ in range(q)))


def observation_covariance(
    geometry: ArrayGeometry,
    model: Unconditional,
    theta: Sequence[float],
    n_sources: int = 1,
) -> np.ndarray:
    """Covariance ``sigma_s2 A A^H + sigma_n2 I`` of one snapshot.

    Args:
        geometry: Sensor layout.
        model: Unconditional model; sources are uncorrelated with equal power.
        theta: Concatenated source parameters.
        n_sources: Number of sources.

    Returns:
        ``(M, M)`` Hermitian positive definite matrix.
    """
    if not isinstance(model, Unconditional):
        raise TypeError("observation_covariance needs an unconditional model")
    a = steering_matrix(geometry, theta, n_sources)
    cov = model.sigma_s2 * (a @ a.conj().T)
    cov = 0.5 * (cov + cov.conj().T)
    cov[np.diag_indices_from(cov)] += model.sigma_n2
    return cov


def observation_mean(
    geometry: ArrayGeometry,
    model: Conditional,
    theta: Sequence[float],
) -> np.ndarray:
    """Noise-free observation ``A(theta) s(t)`` as an ``(M, T)`` matrix."""
    if not isinstance(model, Conditional):
        raise TypeError("observation_mean needs a conditional model")
    a = steering_matrix(geometry, theta, model.n_sources)
    return a @ model.waveform.T
