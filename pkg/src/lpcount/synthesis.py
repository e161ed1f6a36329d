"""Ground-truth parameter generation and panel simulation.

The generating process draws a shared intercept from Uniform(0, 3),
per-series autoregressive weights from Uniform(-1, 1), and latent
coordinates i.i.d. Normal(0, sigma0^2) with a small sigma0, then expands
the latent positions by a constant factor until the spectral stationarity
condition rho(B) < 1 would fail, keeping the last stable configuration.
This pushes the interactions toward the stability boundary so the latent
space actually matters.

Draw order (one :class:`~lpcount.rng.CounterRNG` stream per dataset):
alpha, then beta node by node, then latent coordinates row-major; panel
initialization draws Poisson(exp(alpha_i)) node by node for each seed time
step, then the recursion draws Poisson(lam) node by node per time step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError
from .model import (_LOG_INTENSITY_MAX, CountPanel, CovariateMatrix, ModelConfig,
                    ParameterSet, _covariate_effect, _mode_vector,
                    build_interaction_matrix)
from .rng import CounterRNG
from .stability import check_stationarity, spectral_radius

DEFAULT_SIGMA0 = 0.1  # sd of latent coordinates, variance 0.01
DEFAULT_EXPAND_FACTOR = 1.05
MAX_EXPANSIONS = 500


@dataclass
class ExpansionResult:
    params: ParameterSet
    n_expansions: int
    capped: bool  # hit the expansion cap without ever destabilizing
    spectral_radius: float


def draw_parameters(n_nodes: int, seed: int, config: ModelConfig,
                    sigma0: float = DEFAULT_SIGMA0, stream: int = 0) -> ParameterSet:
    """Draw ground-truth parameters for the base latent-projection model.

    alpha ~ Uniform(0, 3) respecting ``alpha_mode``; beta_i ~ Uniform(-1, 1)
    i.i.d.; z_ik ~ Normal(0, sigma0^2) i.i.d.  Seasonal, covariate and
    full-matrix configurations have no defined generator here.
    """
    if n_nodes < 1:
        raise ConfigurationError("n_nodes must be >= 1")
    if config.interaction_mode != "latent_projection":
        raise ConfigurationError("the generator draws latent positions; "
                                 "full_matrix configs are fit, not simulated")
    if config.eta_mode != "none" or config.covariate_names:
        raise ConfigurationError("the generator covers the base model "
                                 "(no seasonality, no covariates)")
    rng = CounterRNG(seed, stream)
    if config.alpha_mode == "shared":
        alpha = rng.uniform(0.0, 3.0)
    else:
        alpha = rng.uniform(0.0, 3.0, size=n_nodes)
    beta = rng.uniform(-1.0, 1.0, size=n_nodes)
    if config.beta_mode == "shared":
        beta = float(beta[0])  # one shared weight, drawn from the same stream
    z = rng.normal(0.0, sigma0, size=2 * n_nodes).reshape(n_nodes, 2)
    return ParameterSet(alpha=alpha, beta=beta, z=z)


def expand_latent_space(params: ParameterSet, factor: float, config: ModelConfig) -> ExpansionResult:
    """Scale latent positions up until rho(B) < 1 would fail, then step back.

    Returns the last stable configuration.  If ``MAX_EXPANSIONS`` scalings
    never destabilize the matrix (e.g. Z = 0), the input is returned
    unchanged with ``capped=True``.
    """
    if factor <= 1.0:
        raise ConfigurationError("expansion factor must be > 1")
    if params.z is None:
        raise ConfigurationError("expansion needs latent positions")
    rho = spectral_radius(build_interaction_matrix(params, config))
    if rho >= 1.0:
        raise ConfigurationError(f"initial parameters already unstable (rho={rho:.4g})")
    z = params.z.copy()
    last_rho = rho
    for step in range(1, MAX_EXPANSIONS + 1):
        candidate = z * factor ** step
        trial = ParameterSet(alpha=params.alpha, beta=params.beta, z=candidate,
                             eta=params.eta, delta=params.delta)
        rho = spectral_radius(build_interaction_matrix(trial, config))
        if rho >= 1.0:
            kept = ParameterSet(alpha=params.alpha, beta=params.beta,
                                z=z * factor ** (step - 1),
                                eta=params.eta, delta=params.delta)
            return ExpansionResult(kept, step - 1, False, last_rho)
        last_rho = rho
    return ExpansionResult(
        ParameterSet(alpha=params.alpha, beta=params.beta, z=z,
                     eta=params.eta, delta=params.delta),
        0, True, last_rho)


def simulate_panel(params: ParameterSet, config: ModelConfig, n_times: int, seed: int,
                   covariates: CovariateMatrix | None = None, stream: int = 0,
                   node_labels: tuple[str, ...] | None = None) -> CountPanel:
    """Simulate a count panel of length ``n_times`` from the model.

    The first ``max(1, seasonal_lag)`` time steps are seeded i.i.d.
    Poisson(exp(alpha_i)); later steps follow the autoregression.
    """
    if n_times < 2:
        raise ConfigurationError("n_times must be >= 2")
    if params.z is not None:
        n = params.z.shape[0]
    elif params.full_b is not None:
        n = params.full_b.shape[0]
    else:
        raise ConfigurationError("cannot infer the number of nodes")
    b = build_interaction_matrix(params, config, n)
    rho = spectral_radius(b)
    if rho >= 1.0:
        warnings.warn(f"simulating from a non-stationary model (rho={rho:.4g})",
                      RuntimeWarning, stacklevel=2)
    t_init = max(1, config.seasonal_lag)
    if n_times <= t_init:
        raise ConfigurationError(f"n_times must exceed the seed length {t_init}")
    rng = CounterRNG(seed, stream)
    alpha = _mode_vector(params.alpha, config.alpha_mode, n, "alpha")
    offset = alpha + _covariate_effect(params, config, covariates, n)
    eta = _mode_vector(params.eta, config.eta_mode, n, "eta") if config.eta_mode != "none" else None
    labels = node_labels or tuple(f"node_{i + 1}" for i in range(n))
    counts = np.zeros((n, n_times), dtype=np.int64)
    base = np.exp(alpha)
    for t in range(t_init):
        for i in range(n):
            counts[i, t] = rng.poisson(base[i])
    for t in range(t_init, n_times):
        u = offset + b @ np.log1p(counts[:, t - 1].astype(float))
        if eta is not None:
            u = u + eta * np.log1p(counts[:, t - config.seasonal_lag].astype(float))
        if np.any(u > _LOG_INTENSITY_MAX) or not np.all(np.isfinite(u)):
            raise NumericError(f"simulation failed at t={t}: intensity overflow")
        lam = np.exp(u)
        for i in range(n):
            counts[i, t] = rng.poisson(lam[i])
    return CountPanel(counts, labels, t0=t_init)


def synthesize_dataset(n_nodes: int, n_times: int, seed: int, config: ModelConfig | None = None,
                       sigma0: float = DEFAULT_SIGMA0, factor: float = DEFAULT_EXPAND_FACTOR):
    """Full generating pipeline: draw, expand, simulate.

    The rare draw whose interaction matrix is unstable before any expansion
    (a large |beta| plus latent noise) is retried on the next substream.
    Returns ``(params, panel, report)``.
    """
    config = config or ModelConfig()
    params = None
    for attempt in range(64):
        candidate = draw_parameters(n_nodes, seed, config, sigma0, stream=attempt)
        if spectral_radius(build_interaction_matrix(candidate, config)) < 1.0:
            params = candidate
            break
    if params is None:
        raise NumericError("could not draw a stable starting configuration")
    expanded = expand_latent_space(params, factor, config)
    panel = simulate_panel(expanded.params, config, n_times, seed, stream=attempt)
    report = check_stationarity(build_interaction_matrix(expanded.params, config))
    return expanded.params, panel, report
