"""Lorenz-63 trajectories: the ground-truth chaotic data for experiments and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import SeriesFrame


@dataclass(frozen=True)
class LorenzParams:
    """Integration settings for the Lorenz-63 flow.

    dt is the integration step; every `subsample`-th step is recorded, so the
    recorded sampling interval is dt * subsample. The first `transient_skip`
    recorded steps are discarded before recording begins.
    """

    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    subsample: int = 5
    n_record: int = 5000
    x0: tuple[float, float, float] = (1.0, 1.0, 1.0)
    transient_skip: int = 1000

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_record < 1:
            raise ValueError("n_record must be >= 1")
        if self.subsample < 1:
            raise ValueError("subsample must be >= 1")
        if self.transient_skip < 0:
            raise ValueError("transient_skip must be >= 0")


def _derivs(state: np.ndarray, params: LorenzParams) -> np.ndarray:
    x, y, z = state
    return np.array(
        [
            params.sigma * (y - x),
            x * (params.rho - z) - y,
            x * y - params.beta * z,
        ]
    )


def rk4_step(state: np.ndarray, dt: float, params: LorenzParams) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of the Lorenz flow."""
    state = np.asarray(state, dtype=np.float64)
    k1 = _derivs(state, params)
    k2 = _derivs(state + 0.5 * dt * k1, params)
    k3 = _derivs(state + 0.5 * dt * k2, params)
    k4 = _derivs(state + dt * k3, params)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"integration blew up at state {state}")
    return out


def lorenz_trajectory(params: LorenzParams) -> SeriesFrame:
    """Integrate the flow and record n_record states after the transient.

    Deterministic for fixed params: same params give bit-identical frames.
    Timestamps are recorded-step indices 0..n_record-1.
    """
    state = np.asarray(params.x0, dtype=np.float64)
    out = np.empty((params.n_record, 3), dtype=np.float64)
    for i in range(params.transient_skip + params.n_record):
        for _ in range(params.subsample):
            state = rk4_step(state, params.dt, params)
        if i >= params.transient_skip:
            out[i - params.transient_skip] = state
    times = np.arange(params.n_record, dtype=np.int64)
    return SeriesFrame(times, {"x": out[:, 0], "y": out[:, 1], "z": out[:, 2]})
