"""Environment configuration models.

Each environment kind has its own model; :data:`EnvConfig` is the tagged
union used when reading config files (the ``kind`` field selects the model).
Defaults marked "not from source data" are synthetic stand-ins chosen so the
environments are self-contained and seedable.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GraphSpec(_Model):
    generator: Literal["preferential_attachment", "configuration_model", "k_regular"] = "preferential_attachment"
    mean_degree: float = Field(10.0, ge=1.0)


class Affine(_Model):
    """Coefficients of ``const + y*y_coef + w*w_coef + y*w*yw_coef``."""

    const: float = 0.0
    y: float = 0.0
    w: float = 0.0
    yw: float = 0.0


class _Base(_Model):
    n_units: int = Field(..., ge=1)
    horizon: int = Field(..., ge=1)
    seed: int = Field(0, ge=0)


class GaussianConfig(_Base):
    """Gaussian interference matrix with affine ``g`` and ``h`` parts.

    ``y_{t+1} = (A + A_t) g(y_t, w_{t+1}) + h(y_t, w_{t+1}) + eps_t`` with
    ``A_ij ~ N(mu/N, sigma^2/N)`` fixed per world and
    ``A_t,ij ~ N(0, sigma_t^2/N)`` redrawn each period.
    """

    kind: Literal["gaussian"] = "gaussian"
    mu: float = 0.04
    sigma: float = Field(0.5, ge=0.0)
    sigma_t: float = Field(0.0, ge=0.0)
    noise_sd: float = Field(0.1, ge=0.0)
    g: Affine = Affine(w=1.0)
    h: Affine = Affine(const=1.0, w=-1.2)
    y0_mean: float = 1.0
    y0_sd: float = Field(0.1, ge=0.0)


class BeliefConfig(_Base):
    """Coordination-game opinion cascade on a synthetic social graph."""

    kind: Literal["belief"] = "belief"
    graph: GraphSpec = GraphSpec(mean_degree=10.0)
    beta: float = Field(0.1, ge=0.0)
    payoff_b: float = Field(1.0, gt=0.0)
    payoff_a: float = Field(0.9, gt=0.0)
    age_range: tuple[float, float] = (15.0, 80.0)
    civic_ages: tuple[float, float] = (25.0, 55.0)
    civic_bonus: float = 0.15
    activity_bonus: float = 0.2
    effect_scale: float = Field(0.6, ge=0.0)
    effect_age_center: float = 35.0
    effect_age_width: float = Field(10.0, gt=0.0)
    initial_adoption: float = Field(0.3, ge=0.0, le=1.0)


class LinearInMeansConfig(_Base):
    """Linear-in-means spillovers on top of a seasonal baseline panel."""

    kind: Literal["linear_in_means"] = "linear_in_means"
    graph: GraphSpec = GraphSpec(mean_degree=8.0)
    gamma: float = 0.4
    delta_p: float = 0.2
    delta_u_mean: float = 1.0
    delta_u_sd: float = Field(0.5, ge=0.0)
    level_mean: float = 10.0
    level_sd: float = Field(3.0, ge=0.0)
    season_amplitude: float = 0.3
    season_period: float = Field(4.0, gt=0.0)
    baseline_noise_sd: float = Field(0.5, ge=0.0)


class ExerciseConfig(_Base):
    """Logistic exercise decisions with peer influence and weekly cycles."""

    kind: Literal["exercise"] = "exercise"
    graph: GraphSpec = GraphSpec(mean_degree=20.0)
    c: float = 0.04
    e: float = 0.01
    eta: float = 0.02
    base_mean: float = -0.6
    base_sd: float = Field(0.6, ge=0.0)
    base_weekly: tuple[float, ...] = (0.2, 0.0, 0.0, 0.0, -0.15, 0.4, 0.4)
    effect_mean: float = 0.5
    effect_sd: float = Field(0.25, ge=0.0)
    effect_weekly: tuple[float, ...] = (1.2, 1.0, 0.85, 0.8, 0.9, 1.3, 1.3)
    initial_rate: float = Field(0.4, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _weekly_lengths(self):
        if len(self.base_weekly) == 0 or len(self.effect_weekly) == 0:
            raise ValueError("weekly patterns must be nonempty")
        return self


class DataCenterConfig(_Base):
    """Server farm with join-the-shortest-queue routing.

    ``sample_size`` (JSQ probe count) and ``treatment_multiplier`` (service
    rate boost for treated servers) have no source values; defaults 2 and 1.5.
    """

    kind: Literal["data_center"] = "data_center"
    n_job_types: int = Field(3, ge=1)
    capability_prob: float = Field(0.7, gt=0.0, le=1.0)
    service_rate: float = Field(1.0, gt=0.0)
    treatment_multiplier: float = Field(1.5, gt=1.0)
    sample_size: int = Field(2, ge=1)
    interval: float = Field(1.0, gt=0.0)
    load: float = Field(0.7, gt=0.0)
    day_period: float = Field(24.0, gt=0.0)
    day_amplitude: float = Field(0.5, ge=0.0, lt=1.0)
    rate_noise_sd: float = Field(0.05, ge=0.0)


class AuctionConfig(_Base):
    """Repeated epsilon-auction of ``N`` objects to ``N`` bidders.

    Bidder types are (standard, collector, dealer, investor) with mean and
    spread multipliers on a shared base valuation. ``epsilon`` and
    ``price_memory`` (fraction of last period's price carried into the next
    round's opening price) have no source values.
    """

    kind: Literal["auction"] = "auction"
    tau: float = Field(0.1, ge=0.0)
    epsilon: float = Field(0.5, gt=0.0)
    base_value_mean: float = 100.0
    base_value_sd: float = Field(20.0, ge=0.0)
    valuation_sd: float = Field(10.0, ge=0.0)
    period_noise_sd: float = Field(5.0, ge=0.0)
    type_probs: tuple[float, float, float, float] = (0.4, 0.2, 0.2, 0.2)
    type_mean_mult: tuple[float, float, float, float] = (1.0, 1.2, 0.9, 1.1)
    type_sd_mult: tuple[float, float, float, float] = (1.0, 1.5, 0.5, 1.5)
    price_memory: float = Field(0.5, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _probs(self):
        if abs(sum(self.type_probs) - 1.0) > 1e-9 or min(self.type_probs) < 0:
            raise ValueError("type_probs must be a probability vector")
        return self


EnvConfig = Annotated[
    Union[GaussianConfig, BeliefConfig, LinearInMeansConfig, ExerciseConfig, DataCenterConfig, AuctionConfig],
    Field(discriminator="kind"),
]

_ADAPTER = TypeAdapter(EnvConfig)


def parse_env_config(data: dict) -> GaussianConfig | BeliefConfig | LinearInMeansConfig | ExerciseConfig | DataCenterConfig | AuctionConfig:
    """Validate a mapping into the matching config model (raises pydantic ``ValidationError``)."""
    return _ADAPTER.validate_python(data)
