"""Experiment configuration documents (validated on load)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..ccv import CandidateConfig, TimeBlocks, candidate_grid
from ..core import ExperimentDesign
from ..envs import read_config_file
from ..envs.config import Affine, EnvConfig, GaussianConfig

# Full-scale values for the DM sweep; desk defaults below are smaller.
FULL_WORLDS, FULL_RESAMPLES, FULL_NESTED = 100, 200, 400


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DesignSpec(_Model):
    stage_lengths: tuple[int, ...] = (2, 2, 3)
    stage_probs: tuple[float, ...] = (0.1, 0.2, 0.5)
    monotone: bool = False

    @model_validator(mode="after")
    def _valid(self):
        self.build()
        return self

    def build(self) -> ExperimentDesign:
        return ExperimentDesign(self.stage_lengths, self.stage_probs, self.monotone)


class GridSpec(_Model):
    estimators: tuple[Literal["bcmp", "fo_semi", "fo_rec", "ho_rec", "detrend"], ...] = ("fo_semi", "fo_rec")
    lags: tuple[int, ...] = (1,)
    batch_fractions: tuple[Optional[float], ...] = (0.1, 0.3)
    batch_counts: tuple[int, ...] = (100,)
    alphas: tuple[float, ...] = (1e-4, 1e-2, 1.0)

    def build(self) -> list[CandidateConfig]:
        return candidate_grid(self.estimators, self.lags, self.batch_fractions, self.batch_counts, self.alphas)


class CCVSpec(_Model):
    validation_batches: int = Field(2, ge=1)
    n_blocks: int = Field(3, ge=2)
    block_edges: Optional[tuple[int, ...]] = None
    grid: GridSpec = GridSpec()

    def blocks(self, horizon: int) -> TimeBlocks:
        if self.block_edges is not None:
            return TimeBlocks.from_edges(self.block_edges)
        return TimeBlocks.equal(horizon, self.n_blocks)


class BenchmarkConfig(_Model):
    env: EnvConfig
    design: DesignSpec = DesignSpec()
    runs: int = Field(20, ge=1)
    window: int = Field(1, ge=1)
    ccv: CCVSpec = CCVSpec()
    seed: int = Field(0, ge=0)
    raw_runs: bool = True

    @model_validator(mode="after")
    def _check(self):
        if self.window > self.design.stage_lengths[-1]:
            raise ValueError("window must not exceed the last stage length")
        if self.env.horizon != sum(self.design.stage_lengths):
            raise ValueError(f"env horizon {self.env.horizon} must equal the design horizon "
                             f"{sum(self.design.stage_lengths)}")
        return self


class SweepConfig(_Model):
    """DM bias/variance sweep over one interference parameter."""

    sweep: Literal["sigma", "mu"] = "sigma"
    values: tuple[float, ...] = (0.1, 0.2, 0.4, 0.8, 1.6)
    fixed: float = 0.04
    worlds: int = Field(20, ge=1)
    resamples: int = Field(50, ge=1)
    nested: int = Field(200, ge=1)
    n_units: int = Field(500, ge=2)
    horizon: int = Field(8, ge=1)
    noise_sd: float = Field(0.1, ge=0.0)
    g: Affine = Affine(w=1.0)
    h: Affine = Affine(const=1.0, w=-1.2)
    design: DesignSpec = DesignSpec(stage_lengths=(4, 4), stage_probs=(0.25, 0.75))
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if not self.values:
            raise ValueError("values must be nonempty")
        if self.horizon != sum(self.design.stage_lengths):
            raise ValueError("horizon must equal the design horizon")
        if self.sweep == "mu" and self.fixed < 0:
            raise ValueError("fixed sigma must be nonnegative")
        if self.sweep == "sigma" and min(self.values) < 0:
            raise ValueError("sigma values must be nonnegative")
        return self

    def env_config(self, value: float) -> GaussianConfig:
        mu, sigma = (self.fixed, value) if self.sweep == "sigma" else (value, self.fixed)
        return GaussianConfig(n_units=self.n_units, horizon=self.horizon, seed=self.seed, mu=mu, sigma=sigma,
                              noise_sd=self.noise_sd, g=self.g, h=self.h)

    def scale_notes(self) -> dict[str, object]:
        return {"worlds": [self.worlds, FULL_WORLDS], "resamples": [self.resamples, FULL_RESAMPLES],
                "nested": [self.nested, FULL_NESTED]}


def load_benchmark_config(path) -> BenchmarkConfig:
    return BenchmarkConfig.model_validate(read_config_file(path))


def load_sweep_config(path) -> SweepConfig:
    return SweepConfig.model_validate(read_config_file(path))
