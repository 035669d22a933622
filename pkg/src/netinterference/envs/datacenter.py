"""Discrete-event server farm.

Units are servers. Jobs arrive by a day-cycle Poisson process, each with a
type that only some servers can handle, and are routed by sampled
join-the-shortest-queue. A treated server works faster. Column ``t`` of the
outcome panel is each server's utilisation over interval ``t``, where the
treatment in effect is column ``t`` of ``W`` (column 0 is a plain warm-up
interval).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import RoutingError
from .base import Environment
from .config import DataCenterConfig


def jsq_assign(queue_lengths, capable_servers, sample_size: int, rng: np.random.Generator) -> int:
    """Sample up to ``sample_size`` capable servers and return one with the shortest queue."""
    capable = np.asarray(capable_servers, dtype=np.int64)
    if capable.size == 0:
        raise RoutingError("no server can process this job type")
    k = min(int(sample_size), capable.size)
    sample = capable if k == capable.size else rng.choice(capable, size=k, replace=False)
    q = np.asarray(queue_lengths)[sample]
    best = sample[q == q.min()]
    if best.size == 1:
        return int(best[0])
    return int(best[rng.integers(best.size)])


@dataclass(frozen=True)
class DataCenterWorld:
    capable: tuple[np.ndarray, ...]   # server ids per job type
    arrivals: np.ndarray              # sorted arrival times
    job_types: np.ndarray
    sizes: np.ndarray                 # work units, Exp(1)
    index: int


def _draw_capabilities(cfg: DataCenterConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    cap = rng.random((n, cfg.n_job_types)) < cfg.capability_prob
    # every server handles at least one type and every type has a server
    for i in np.flatnonzero(~cap.any(axis=1)):
        cap[i, rng.integers(cfg.n_job_types)] = True
    for k in np.flatnonzero(~cap.any(axis=0)):
        cap[rng.integers(n), k] = True
    return cap


class DataCenterEnv(Environment):
    kind = "data_center"

    def _draw_world(self, index: int) -> DataCenterWorld:
        cfg: DataCenterConfig = self.config
        N, T = self.n_units, self.horizon
        rng = self.rng("world", index)
        cap = _draw_capabilities(cfg, N, rng)
        capable = tuple(np.flatnonzero(cap[:, k]) for k in range(cfg.n_job_types))

        arr = self.rng("noise", index)
        mids = (np.arange(T + 1) + 0.5) * cfg.interval
        cycle = 1.0 + cfg.day_amplitude * np.sin(2 * np.pi * mids / cfg.day_period)
        jitter = np.maximum(1.0 + cfg.rate_noise_sd * arr.standard_normal(T + 1), 0.0)
        rate = cfg.load * N * cfg.service_rate * cycle * jitter
        counts = arr.poisson(rate * cfg.interval)
        times = np.concatenate([
            (t + arr.random(c)) * cfg.interval for t, c in enumerate(counts)
        ])
        times.sort()
        job_types = arr.integers(cfg.n_job_types, size=times.size)
        sizes = arr.exponential(1.0, size=times.size)
        return DataCenterWorld(capable, times, job_types, sizes, index)

    def _run(self, world: DataCenterWorld, W: np.ndarray) -> np.ndarray:
        cfg: DataCenterConfig = self.config
        N, T, dt = self.n_units, self.horizon, cfg.interval
        end_time = (T + 1) * dt
        route_rng = self.rng("routing", world.index)
        pending = [deque() for _ in range(N)]   # departure times of jobs still present
        last_departure = np.zeros(N)
        queue = np.zeros(N, dtype=np.int64)
        busy = np.zeros((N, T + 1))

        for arrival, kind, size in zip(world.arrivals, world.job_types, world.sizes):
            for i in world.capable[kind]:
                dq = pending[i]
                while dq and dq[0] <= arrival:
                    dq.popleft()
                queue[i] = len(dq)
            server = jsq_assign(queue, world.capable[kind], cfg.sample_size, route_rng)
            start = max(arrival, last_departure[server])
            col = min(int(start // dt), T)
            rate = cfg.service_rate * (cfg.treatment_multiplier if W[server, col] else 1.0)
            finish = start + size / rate
            last_departure[server] = finish
            pending[server].append(finish)
            _accumulate(busy[server], start, min(finish, end_time), dt)

        return np.clip(busy / dt, 0.0, 1.0)


def _accumulate(row: np.ndarray, start: float, stop: float, dt: float) -> None:
    if stop <= start:
        return
    first = int(start // dt)
    last = min(int(stop // dt), row.size - 1)
    for k in range(first, last + 1):
        lo = max(start, k * dt)
        hi = min(stop, (k + 1) * dt)
        if hi > lo:
            row[k] += hi - lo
