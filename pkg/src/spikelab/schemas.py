"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .risk import ModelConfig
from .sweep import CSV_COLUMNS, ResultRow


class ConfigIn(BaseModel):
    """Wire form of a model configuration."""

    d: int = Field(ge=1)
    n_trn: int = Field(ge=1)
    n_tst: Optional[int] = Field(default=None, ge=1,
                                 description="defaults to n_trn (so d/n_tst = c)")
    theta_trn: float = 1.0
    theta_tst: float = 1.0
    tau_a_trn: float = 1.0
    tau_a_tst: float = 1.0
    tau_eps_trn: float = 0.0
    mu: float = 0.0
    beta_norm_sq: float = 1.0
    beta_dot_u: float = 0.0

    def to_core(self) -> ModelConfig:
        cfg = ModelConfig(
            d=self.d, n_trn=self.n_trn,
            n_tst=self.n_tst if self.n_tst is not None else self.n_trn,
            theta_trn=self.theta_trn, theta_tst=self.theta_tst,
            tau_a_trn=self.tau_a_trn, tau_a_tst=self.tau_a_tst,
            tau_eps_trn=self.tau_eps_trn, mu=self.mu,
            beta_norm_sq=self.beta_norm_sq, beta_dot_u=self.beta_dot_u)
        cfg.validate()
        return cfg


Target = Literal["so", "spn"]


class TheoryRequest(BaseModel):
    config: ConfigIn
    target: Target = "so"


class BreakdownOut(BaseModel):
    bias: float
    variance_a: float
    variance_a_eps: float
    adjustment: float
    total: float
    regime: str
    warnings: list[str] = []


class SimulateRequest(BaseModel):
    config: ConfigIn
    target: Target = "so"
    mu: Optional[float] = Field(default=None,
                                description="solver ridge; defaults to config.mu")
    trials: int = Field(default=100, ge=2)
    seed: int = 0
    workers: Optional[int] = Field(default=None, ge=1)


class EstimateOut(BaseModel):
    mean: float
    stderr: float
    trials: int
    seed_root: int
    theory_total: Optional[float] = None


class SweepRequest(BaseModel):
    config: ConfigIn
    target: Target = "so"
    variable: Literal["n_trn", "c", "mu", "theta_trn", "tau_a_trn"] = "c"
    grid: list[float]
    trials: int = Field(default=0, ge=0)
    seed: int = 0
    equal_strength: bool = False
    workers: Optional[int] = Field(default=None, ge=1)


class SweepRowOut(BaseModel):
    grid_value: float
    theory_total: float
    theory_bias: float
    theory_var_a: float
    theory_var_a_eps: float
    theory_adjustment: float
    empirical_mean: Optional[float] = None
    empirical_stderr: Optional[float] = None
    correction_term: Optional[float] = None
    asymptotic_no_correction: Optional[float] = None

    @classmethod
    def from_core(cls, row: ResultRow) -> "SweepRowOut":
        return cls(**{name: getattr(row, name) for name in CSV_COLUMNS})

    def to_core(self) -> ResultRow:
        return ResultRow(**{name: getattr(self, name) for name in CSV_COLUMNS})


class SweepOut(BaseModel):
    columns: list[str]
    rows: list[SweepRowOut]


class VerifyRequest(BaseModel):
    level: Literal["quick", "full"] = "quick"
    seed: int = 0
    workers: Optional[int] = Field(default=None, ge=1)


class ProbeOut(BaseModel):
    form: str
    config: str
    sampled_mean: float
    stderr: float
    closed_form: float
    z_score: float
    passed: bool


class IdentityOut(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyOut(BaseModel):
    level: str
    d: int
    trials: int
    seed_root: int
    probes: list[ProbeOut]
    identities: list[IdentityOut]
    passed: bool
