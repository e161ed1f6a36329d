"""Model types and likelihood evaluation for latent-position count autoregressions.

The observation model is a Poisson log-linear VAR(1): conditionally on the
past, counts are Poisson with log-intensity

    log lam[i, t] = alpha_i + sum_j B[i, j] * log(y[j, t-1] + 1)
                    + eta_i * log(y[i, t-lag] + 1) + sum_k delta_k * x[i, k]

The interaction matrix ``B`` carries per-series autoregressive weights on
its diagonal.  In ``latent_projection`` mode each off-diagonal entry is the
dot product of two 2-D latent positions, so the off-diagonal part is exactly
symmetric; ``full_matrix`` mode frees the off-diagonal entries instead,
giving the unconstrained log-linear VAR baseline.

All history transforms use the natural logarithm.  The first modeled time
index is ``panel.t0``: observations before it act as regressors only and
never enter the likelihood sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, DataError, NumericError

ALPHA_MODES = ("shared", "per_node")
BETA_MODES = ("shared", "per_node")
ETA_MODES = ("none", "shared", "per_node")
INTERACTION_MODES = ("latent_projection", "full_matrix")

# exp() of anything above this is not a usable intensity.
_LOG_INTENSITY_MAX = 34.5  # exp(34.5) ~ 1e15


@dataclass
class CountPanel:
    """Observed counts: ``counts[i, t]`` for node ``i`` at time ``t``.

    ``t0`` is the first modeled time index; it must leave enough history
    for the autoregressive terms (``t0 >= 1``, and ``t0 >= seasonal_lag``
    for seasonal models).
    """

    counts: np.ndarray
    node_labels: tuple[str, ...]
    t0: int = 1

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise DataError(f"counts must be 2-D (nodes x time), got shape {counts.shape}")
        if not np.all(np.isfinite(counts)):
            raise DataError("counts contain non-finite entries")
        if np.any(counts < 0):
            raise DataError("counts must be nonnegative")
        if np.any(counts != np.floor(counts)):
            raise DataError("counts must be integer-valued")
        self.counts = counts.astype(np.int64)
        n, t = self.counts.shape
        if n < 1:
            raise DataError("need at least one node")
        if t < 2:
            raise DataError("need at least two time points")
        self.node_labels = tuple(str(s) for s in self.node_labels)
        if len(self.node_labels) != n:
            raise DataError(f"{len(self.node_labels)} labels for {n} nodes")
        if len(set(self.node_labels)) != n:
            raise DataError("node labels must be unique")
        if not 1 <= self.t0 < t:
            raise DataError(f"t0={self.t0} outside [1, {t - 1}]")

    @property
    def n_nodes(self) -> int:
        return self.counts.shape[0]

    @property
    def n_times(self) -> int:
        return self.counts.shape[1]


@dataclass
class CovariateMatrix:
    """Node-level covariates, one column per covariate."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"covariates must be 2-D (nodes x covariates), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("covariates contain non-finite entries")
        self.values = values
        self.names = tuple(str(s) for s in self.names)
        if len(self.names) != values.shape[1]:
            raise DataError(f"{len(self.names)} names for {values.shape[1]} covariates")
        if len(set(self.names)) != len(self.names):
            raise DataError("covariate names must be unique")

    @classmethod
    def standardized(cls, values, names) -> "CovariateMatrix":
        """Build with each column rescaled to zero mean and unit variance."""
        values = np.asarray(values, dtype=float)
        mean = values.mean(axis=0)
        sd = values.std(axis=0)
        if np.any(sd == 0):
            bad = [str(n) for n, s in zip(names, sd) if s == 0]
            raise DataError(f"constant covariate column(s) cannot be standardized: {bad}")
        return cls((values - mean) / sd, tuple(names))

    def select(self, names: tuple[str, ...]) -> np.ndarray:
        """Columns for ``names``, in that order."""
        missing = [n for n in names if n not in self.names]
        if missing:
            raise ConfigurationError(f"unknown covariate(s): {missing}")
        idx = [self.names.index(n) for n in names]
        return self.values[:, idx]


@dataclass(frozen=True)
class ModelConfig:
    """Structural switches selecting one member of the model family."""

    alpha_mode: str = "shared"
    beta_mode: str = "per_node"
    eta_mode: str = "none"
    seasonal_lag: int = 0
    covariate_names: tuple[str, ...] = ()
    interaction_mode: str = "latent_projection"
    latent_dim: int = 2

    def __post_init__(self):
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigurationError(f"alpha_mode must be one of {ALPHA_MODES}")
        if self.beta_mode not in BETA_MODES:
            raise ConfigurationError(f"beta_mode must be one of {BETA_MODES}")
        if self.eta_mode not in ETA_MODES:
            raise ConfigurationError(f"eta_mode must be one of {ETA_MODES}")
        if self.interaction_mode not in INTERACTION_MODES:
            raise ConfigurationError(f"interaction_mode must be one of {INTERACTION_MODES}")
        if (self.seasonal_lag > 0) != (self.eta_mode != "none"):
            raise ConfigurationError("seasonal_lag > 0 exactly when eta_mode is not 'none'")
        if self.seasonal_lag < 0:
            raise ConfigurationError("seasonal_lag must be nonnegative")
        if self.latent_dim != 2:
            raise ConfigurationError("only latent_dim=2 is supported")
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))

    @property
    def min_t0(self) -> int:
        return max(1, self.seasonal_lag)


@dataclass
class ParameterSet:
    """One point in parameter space.

    ``alpha``/``beta``/``eta`` are scalars or length-N vectors depending on
    the config's sharing modes.  Exactly one of ``z`` (N x 2 latent
    positions) and ``full_b`` (free N x N interactions, off-diagonal part
    used) populates the off-diagonal of the interaction matrix.
    """

    alpha: float | np.ndarray
    beta: float | np.ndarray
    z: np.ndarray | None = None
    eta: float | np.ndarray | None = None
    delta: np.ndarray | None = None
    full_b: np.ndarray | None = None

    def __post_init__(self):
        self.alpha = _as_scalar_or_vector(self.alpha, "alpha")
        self.beta = _as_scalar_or_vector(self.beta, "beta")
        if self.z is not None:
            self.z = np.asarray(self.z, dtype=float)
        if self.eta is not None:
            self.eta = _as_scalar_or_vector(self.eta, "eta")
        if self.delta is not None:
            self.delta = np.asarray(self.delta, dtype=float).reshape(-1)
        if self.full_b is not None:
            self.full_b = np.asarray(self.full_b, dtype=float)
        if (self.z is None) == (self.full_b is None):
            raise ConfigurationError("exactly one of z and full_b must be set")


def _as_scalar_or_vector(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    if arr.ndim == 1:
        return arr
    raise ConfigurationError(f"{name} must be a scalar or 1-D vector")


def _mode_vector(value, mode: str, n: int, name: str) -> np.ndarray:
    """Broadcast a shared scalar or check a per-node vector; returns (n,)."""
    if mode == "none":
        if value is not None:
            raise ConfigurationError(f"{name} set but its mode is 'none'")
        return np.zeros(n)
    if mode == "shared":
        if not np.isscalar(value):
            raise ConfigurationError(f"{name} must be a scalar in shared mode")
        return np.full(n, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ConfigurationError(f"{name} must have shape ({n},), got {np.shape(value)}")
    return arr


def validate_params(params: ParameterSet, config: ModelConfig, n_nodes: int,
                    n_covariates: int | None = None) -> None:
    """Raise ConfigurationError unless shapes match the config."""
    _mode_vector(params.alpha, config.alpha_mode, n_nodes, "alpha")
    _mode_vector(params.beta, config.beta_mode, n_nodes, "beta")
    _mode_vector(params.eta, config.eta_mode, n_nodes, "eta")
    if config.interaction_mode == "latent_projection":
        if params.z is None or params.z.shape != (n_nodes, config.latent_dim):
            raise ConfigurationError(
                f"z must have shape ({n_nodes}, {config.latent_dim})")
    else:
        if params.full_b is None or params.full_b.shape != (n_nodes, n_nodes):
            raise ConfigurationError(f"full_b must have shape ({n_nodes}, {n_nodes})")
    k = len(config.covariate_names)
    if n_covariates is not None and k > n_covariates:
        raise ConfigurationError("config selects more covariates than provided")
    if k == 0:
        if params.delta is not None and len(params.delta) != 0:
            raise ConfigurationError("delta set but no covariates configured")
    else:
        if params.delta is None or params.delta.shape != (k,):
            raise ConfigurationError(f"delta must have shape ({k},)")
    for name, value in (("alpha", params.alpha), ("beta", params.beta),
                        ("z", params.z), ("eta", params.eta),
                        ("delta", params.delta), ("full_b", params.full_b)):
        if value is not None and not np.all(np.isfinite(np.asarray(value, dtype=float))):
            raise NumericError(f"non-finite entries in {name}")


def build_interaction_matrix(params: ParameterSet, config: ModelConfig,
                             n_nodes: int | None = None) -> np.ndarray:
    """Interaction matrix B: diagonal beta, off-diagonal latent dot products
    (or the free entries of ``full_b``)."""
    if n_nodes is None:
        source = params.z if config.interaction_mode == "latent_projection" else params.full_b
        if source is None:
            raise ConfigurationError("cannot infer the number of nodes from params")
        n_nodes = source.shape[0]
    validate_params(params, config, n_nodes)
    beta = _mode_vector(params.beta, config.beta_mode, n_nodes, "beta")
    if config.interaction_mode == "latent_projection":
        b = params.z @ params.z.T
    else:
        b = params.full_b.copy()
    np.fill_diagonal(b, beta)
    return b


def _check_panel_config(panel: CountPanel, config: ModelConfig) -> None:
    if panel.t0 < config.min_t0:
        raise ConfigurationError(
            f"panel.t0={panel.t0} is too small for seasonal_lag={config.seasonal_lag}")


def _covariate_effect(params: ParameterSet, config: ModelConfig,
                      covariates: CovariateMatrix | None, n: int) -> np.ndarray:
    """Per-node covariate contribution sum_k delta_k x_ik, shape (n,)."""
    if not config.covariate_names:
        return np.zeros(n)
    if covariates is None:
        raise ConfigurationError("config selects covariates but none were provided")
    x = covariates.select(config.covariate_names)
    if x.shape[0] != n:
        raise ConfigurationError(f"covariates have {x.shape[0]} rows for {n} nodes")
    return x @ params.delta


def log_intensity(params: ParameterSet, config: ModelConfig, panel: CountPanel,
                  covariates: CovariateMatrix | None, t: int) -> np.ndarray:
    """Log-intensities for all nodes at time ``t`` given observed history."""
    n, n_times = panel.counts.shape
    if not config.min_t0 <= t < n_times + 1:
        # t == n_times is the one-step-ahead case: history through t-1 exists.
        raise IndexError(f"t={t} outside [{config.min_t0}, {n_times}]")
    validate_params(params, config, n, None if covariates is None else len(covariates.names))
    alpha = _mode_vector(params.alpha, config.alpha_mode, n, "alpha")
    b = build_interaction_matrix(params, config, n)
    w = np.log1p(panel.counts[:, t - 1].astype(float))
    u = alpha + b @ w + _covariate_effect(params, config, covariates, n)
    if config.eta_mode != "none":
        eta = _mode_vector(params.eta, config.eta_mode, n, "eta")
        u = u + eta * np.log1p(panel.counts[:, t - config.seasonal_lag].astype(float))
    if not np.all(np.isfinite(u)):
        raise NumericError(f"non-finite log-intensity at t={t}")
    return u


def intensity_path(params: ParameterSet, config: ModelConfig, panel: CountPanel,
                   covariates: CovariateMatrix | None = None) -> np.ndarray:
    """Intensities lam[i, t] for every modeled t (columns t0 .. T-1)."""
    _check_panel_config(panel, config)
    n, n_times = panel.counts.shape
    t0 = panel.t0
    validate_params(params, config, n, None if covariates is None else len(covariates.names))
    alpha = _mode_vector(params.alpha, config.alpha_mode, n, "alpha")
    b = build_interaction_matrix(params, config, n)
    w = np.log1p(panel.counts.astype(float))
    u = alpha[:, None] + b @ w[:, t0 - 1:n_times - 1]
    if config.eta_mode != "none":
        eta = _mode_vector(params.eta, config.eta_mode, n, "eta")
        u += eta[:, None] * w[:, t0 - config.seasonal_lag:n_times - config.seasonal_lag]
    u += _covariate_effect(params, config, covariates, n)[:, None]
    if np.any(u > _LOG_INTENSITY_MAX) or not np.all(np.isfinite(u)):
        bad = np.argwhere(~(u <= _LOG_INTENSITY_MAX))[0]
        raise NumericError(
            f"intensity overflow at node {bad[0]}, time {t0 + bad[1]} "
            f"(log-intensity {u[bad[0], bad[1]]:.3g})")
    return np.exp(u)


def log_likelihood(params: ParameterSet, config: ModelConfig, panel: CountPanel,
                   covariates: CovariateMatrix | None = None) -> float:
    """Conditional Poisson log-likelihood over the modeled time range.

    Includes the log-factorial term, so values are absolute deviance-ready.
    """
    lam = intensity_path(params, config, panel, covariates)
    y = panel.counts[:, panel.t0:].astype(float)
    return float(np.sum(y * np.log(lam) - lam - gammaln(y + 1.0)))
