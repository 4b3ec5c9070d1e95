"""Sensor array geometries and steering vectors.

Coordinates are stored in units of wavelength, so a sensor at ``(0.5, 0)``
sits half a wavelength along the x axis. The steering vector element for a
sensor at ``(dx, dy)`` and direction cosines ``(u, v)`` is
``exp(j 2 pi (dx u + dy v))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArrayGeometry:
    """Immutable set of sensor positions in wavelengths.

    Args:
        sensors: Sequence of ``(dx, dy)`` pairs, or an ``(M, 2)`` array.
        name: Free-form label.
    """

    sensors: np.ndarray
    name: str = field(default="custom")

    def __post_init__(self) -> None:
        pos = np.asarray(self.sensors, dtype=float)
        if pos.ndim == 1 and pos.size == 2:
            pos = pos.reshape(1, 2)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"sensors must have shape (M, 2), got {pos.shape}")
        if pos.shape[0] < 1:
            raise ValueError("geometry needs at least one sensor")
        if not np.all(np.isfinite(pos)):
            raise ValueError("sensor coordinates must be finite")
        object.__setattr__(self, "sensors", _readonly(pos))

    @property
    def n_sensors(self) -> int:
        return int(self.sensors.shape[0])

    @property
    def dx(self) -> np.ndarray:
        return self.sensors[:, 0]

    @property
    def dy(self) -> np.ndarray:
        return self.sensors[:, 1]

    @property
    def is_linear(self) -> bool:
        """True when every sensor lies on the x axis."""
        return bool(np.all(self.dy == 0.0))

    @property
    def n_params(self) -> int:
        """Direction parameters per source: 1 for linear arrays, 2 otherwise."""
        return 1 if self.is_linear else 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArrayGeometry):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.sensors, other.sensors)

    def __hash__(self) -> int:
        return hash((self.name, self.sensors.tobytes()))


def ula(n_sensors: int, spacing: float = 0.5, name: str | None = None) -> ArrayGeometry:
    """Uniform linear array on the x axis with sensors at ``k * spacing``.

    Args:
        n_sensors: Number of sensors M.
        spacing: Inter-sensor distance in wavelengths.
        name: Optional label.

    Returns:
        Linear geometry with the first sensor at the origin.
    """
    if n_sensors < 1:
        raise ValueError("n_sensors must be >= 1")
    dx = spacing * np.arange(n_sensors, dtype=float)
    pos = np.column_stack([dx, np.zeros(n_sensors)])
    return ArrayGeometry(pos, name or f"ula{n_sensors}")


def uca(n_sensors: int, spacing: float = 0.5, name: str | None = None) -> ArrayGeometry:
    """Uniform circular array centred at the origin.

    The radius is chosen so that neighbouring sensors are ``spacing`` apart.
    When ``n_sensors`` is a multiple of 4 the y coordinates are taken from the
    same cosine table as the x coordinates, so the x and y coordinate
    multisets are bit-for-bit identical.

    Args:
        n_sensors: Number of sensors M (at least 2).
        spacing: Chord length between adjacent sensors in wavelengths.
        name: Optional label.

    Returns:
        Planar geometry.
    """
    if n_sensors < 2:
        raise ValueError("a circular array needs at least 2 sensors")
    radius = spacing / (2.0 * np.sin(np.pi / n_sensors))
    k = np.arange(n_sensors)
    cos_tab = np.cos(2.0 * np.pi * k / n_sensors)
    dx = radius * cos_tab
    if n_sensors % 4 == 0:
        # sin(2 pi k / M) = cos(2 pi (k - M/4) / M)
        dy = radius * cos_tab[(k - n_sensors // 4) % n_sensors]
    else:
        dy = radius * np.sin(2.0 * np.pi * k / n_sensors)
    return ArrayGeometry(np.column_stack([dx, dy]), name or f"uca{n_sensors}")


def v_shaped(
    per_branch: int,
    delta_deg: float,
    spacing: float = 0.5,
    name: str | None = None,
) -> ArrayGeometry:
    """V-shaped array: one sensor at the origin plus two uniform branches.

    The first branch runs along the positive x axis and the second leaves the
    origin at angle ``delta_deg`` from it.

    Args:
        per_branch: Sensors per branch, excluding the shared origin sensor.
        delta_deg: Opening angle between the branches in degrees.
        spacing: Sensor spacing along each branch in wavelengths.
        name: Optional label.

    Returns:
        Planar geometry with ``2 * per_branch + 1`` sensors.
    """
    if per_branch < 1:
        raise ValueError("per_branch must be >= 1")
    if not 0.0 < delta_deg < 180.0:
        raise ValueError("delta_deg must lie in (0, 180)")
    dist = spacing * np.arange(1, per_branch + 1, dtype=float)
    delta = np.deg2rad(delta_deg)
    b1 = np.column_stack([dist, np.zeros(per_branch)])
    b2 = np.column_stack([dist * np.cos(delta), dist * np.sin(delta)])
    pos = np.vstack([np.zeros((1, 2)), b1, b2])
    return ArrayGeometry(pos, name or f"v{per_branch}x2_{delta_deg:g}deg")


def _split_theta(geometry: ArrayGeometry, theta: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return theta as an ``(N, 2)`` array of (u, v) pairs, one row per source."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.ndim != 1:
        raise ValueError("theta must be a vector")
    if th.size == 1:
        if not geometry.is_linear:
            raise ValueError("planar geometry needs theta = [u, v]")
        return np.array([[th[0], 0.0]])
    if th.size == 2:
        return th.reshape(1, 2)
    raise ValueError(f"theta must have 1 or 2 entries for one source, got {th.size}")


def steering_vector(geometry: ArrayGeometry, theta: Sequence[float] | np.ndarray) -> np.ndarray:
    """Array response to a unit far-field source.

    Args:
        geometry: Sensor layout.
        theta: ``[u]`` for a linear array or ``[u, v]`` for a planar one.

    Returns:
        Complex vector of length M with unit-modulus entries.
    """
    uv = _split_theta(geometry, theta)[0]
    phase = 2.0 * np.pi * (geometry.dx * uv[0] + geometry.dy * uv[1])
    return np.exp(1j * phase)


def steering_matrix(
    geometry: ArrayGeometry,
    theta: Sequence[float] | np.ndarray,
    n_sources: int = 1,
) -> np.ndarray:
    """Stack steering vectors for several sources column-wise.

    Args:
        geometry: Sensor layout.
        theta: Concatenated per-source parameter blocks.
        n_sources: Number of sources N; each block has ``len(theta) / N`` entries.

    Returns:
        ``(M, N)`` complex matrix.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if n_sources < 1 or th.size % n_sources:
        raise ValueError("theta length must be a multiple of n_sources")
    p = th.size // n_sources
    cols = [steering_vector(geometry, th[i * p:(i + 1) * p]) for i in range(n_sources)]
    return np.column_stack(cols)
