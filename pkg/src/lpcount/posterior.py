"""Log-posterior over a flattened parameter vector, with analytic gradient.

Every scalar parameter (including each latent coordinate) carries an
independent Normal(0, sd=100) prior.  The flat layout is deterministic
given the config and node count, in the block order: alpha, beta,
interactions (latent positions row-major, or the off-diagonal entries of
the free interaction matrix row-major), eta, delta.

:class:`PosteriorTarget` precomputes the lagged design arrays once and is
the hot path used by the optimizer and the sampler; the module-level
functions are thin wrappers over it.  With no panel the target is the
prior alone, which is a convenient exactly-Gaussian test distribution.

Overflowing intensities make the log posterior ``-inf`` (the math value of
the Poisson log-likelihood as an intensity grows without bound); samplers
and optimizers treat such points as arbitrarily bad rather than erroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError
from .model import (CountPanel, CovariateMatrix, ModelConfig, ParameterSet,
                    _mode_vector, validate_params)

PRIOR_SD = 100.0
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class FlatParams:
    """A parameter vector plus the block layout that interprets it."""

    values: np.ndarray
    layout: dict[str, tuple[int, int]]  # block -> (offset, length)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        total = sum(length for _, length in self.layout.values())
        if total != len(self.values):
            raise ConfigurationError(
                f"layout covers {total} values, vector has {len(self.values)}")

    def block(self, name: str) -> np.ndarray:
        off, length = self.layout[name]
        return self.values[off:off + length]


def layout_for(config: ModelConfig, n_nodes: int) -> dict[str, tuple[int, int]]:
    """Block layout (offset, length) for a config at a given node count."""
    sizes = [("alpha", 1 if config.alpha_mode == "shared" else n_nodes),
             ("beta", 1 if config.beta_mode == "shared" else n_nodes)]
    if config.interaction_mode == "latent_projection":
        sizes.append(("z", n_nodes * config.latent_dim))
    else:
        sizes.append(("full_b", n_nodes * (n_nodes - 1)))
    if config.eta_mode == "shared":
        sizes.append(("eta", 1))
    elif config.eta_mode == "per_node":
        sizes.append(("eta", n_nodes))
    if config.covariate_names:
        sizes.append(("delta", len(config.covariate_names)))
    layout = {}
    offset = 0
    for name, length in sizes:
        layout[name] = (offset, length)
        offset += length
    return layout


def _n_nodes_from_layout(layout: dict[str, tuple[int, int]], config: ModelConfig) -> int:
    if "z" in layout:
        return layout["z"][1] // config.latent_dim
    if "full_b" in layout:
        length = layout["full_b"][1]
        n = int(round((1 + math.sqrt(1 + 4 * length)) / 2))
        if n * (n - 1) != length:
            raise ConfigurationError(f"full_b block length {length} is not n*(n-1)")
        return n
    raise ConfigurationError("layout has no interaction block")


def _offdiag_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    return rows, cols


def pack(params: ParameterSet, config: ModelConfig, n_nodes: int | None = None) -> FlatParams:
    """Flatten a ParameterSet; inverse of :func:`unpack`."""
    if n_nodes is None:
        source = params.z if params.z is not None else params.full_b
        n_nodes = source.shape[0]
    validate_params(params, config, n_nodes)
    layout = layout_for(config, n_nodes)
    values = np.empty(sum(length for _, length in layout.values()))
    for name, (off, length) in layout.items():
        if name == "alpha":
            values[off:off + length] = params.alpha
        elif name == "beta":
            values[off:off + length] = params.beta
        elif name == "z":
            values[off:off + length] = params.z.reshape(-1)
        elif name == "full_b":
            rows, cols = _offdiag_indices(n_nodes)
            values[off:off + length] = params.full_b[rows, cols]
        elif name == "eta":
            values[off:off + length] = params.eta
        elif name == "delta":
            values[off:off + length] = params.delta
    return FlatParams(values, layout)


def unpack(flat: FlatParams, config: ModelConfig) -> ParameterSet:
    """Rebuild a ParameterSet from a flat vector."""
    n = _n_nodes_from_layout(flat.layout, config)

    def scalar_or_vec(name, mode):
        block = flat.block(name)
        return float(block[0]) if mode == "shared" else block.copy()

    alpha = scalar_or_vec("alpha", config.alpha_mode)
    beta = scalar_or_vec("beta", config.beta_mode)
    z = full_b = None
    if "z" in flat.layout:
        z = flat.block("z").reshape(n, config.latent_dim).copy()
    else:
        full_b = np.zeros((n, n))
        rows, cols = _offdiag_indices(n)
        full_b[rows, cols] = flat.block("full_b")
        beta_vec = _mode_vector(beta, config.beta_mode, n, "beta")
        full_b[np.arange(n), np.arange(n)] = beta_vec
    eta = scalar_or_vec("eta", config.eta_mode) if "eta" in flat.layout else None
    delta = flat.block("delta").copy() if "delta" in flat.layout else None
    return ParameterSet(alpha=alpha, beta=beta, z=z, eta=eta, delta=delta, full_b=full_b)


def _log_prior_values(values: np.ndarray) -> float:
    p = len(values)
    return float(-0.5 * np.dot(values, values) / PRIOR_SD**2
                 - p * (math.log(PRIOR_SD) + 0.5 * _LOG_2PI))


def log_prior(params: ParameterSet, config: ModelConfig, n_nodes: int | None = None) -> float:
    """Sum of independent Normal(0, sd=100) log-densities over all scalars."""
    return _log_prior_values(pack(params, config, n_nodes).values)


class PosteriorTarget:
    """Fast log-posterior and gradient over the flat parameter space.

    ``panel=None`` gives the prior-only target (``n_nodes`` then required).
    """

    def __init__(self, panel: CountPanel | None, config: ModelConfig,
                 covariates: CovariateMatrix | None = None, n_nodes: int | None = None):
        if panel is None and n_nodes is None:
            raise ConfigurationError("n_nodes is required for a prior-only target")
        self.config = config
        self.n_nodes = panel.n_nodes if panel is not None else n_nodes
        self.layout = layout_for(config, self.n_nodes)
        self.p = sum(length for _, length in self.layout.values())
        self._latent = config.interaction_mode == "latent_projection"
        if not self._latent:
            self._rows, self._cols = _offdiag_indices(self.n_nodes)
        self._has_eta = config.eta_mode != "none"
        self._has_delta = bool(config.covariate_names)
        if panel is None:
            self._y = None
            return
        if panel.t0 < config.min_t0:
            raise ConfigurationError(
                f"panel.t0={panel.t0} is too small for seasonal_lag={config.seasonal_lag}")
        n, n_times, t0 = panel.n_nodes, panel.n_times, panel.t0
        w = np.log1p(panel.counts.astype(float))
        self._y = panel.counts[:, t0:].astype(float)
        self._w_lag = np.ascontiguousarray(w[:, t0 - 1:n_times - 1])
        self._w_seas = (np.ascontiguousarray(w[:, t0 - config.seasonal_lag:n_times - config.seasonal_lag])
                        if self._has_eta else None)
        if self._has_delta:
            if covariates is None:
                raise ConfigurationError("config selects covariates but none were provided")
            self._x = covariates.select(config.covariate_names)
            if self._x.shape[0] != n:
                raise ConfigurationError(f"covariates have {self._x.shape[0]} rows for {n} nodes")
        else:
            self._x = None
        self._lgamma = float(gammaln(self._y + 1.0).sum())

    # -- block access -------------------------------------------------------

    def _blocks(self, values: np.ndarray):
        n = self.n_nodes
        get = lambda name: values[self.layout[name][0]:self.layout[name][0] + self.layout[name][1]]
        alpha = get("alpha")
        alpha = np.full(n, alpha[0]) if len(alpha) == 1 else alpha
        beta = get("beta")
        beta = np.full(n, beta[0]) if len(beta) == 1 else beta
        if self._latent:
            z = get("z").reshape(n, self.config.latent_dim)
            b = z @ z.T
        else:
            z = None
            b = np.zeros((n, n))
            b[self._rows, self._cols] = get("full_b")
        b[np.arange(n), np.arange(n)] = beta
        eta = None
        if self._has_eta:
            eta = get("eta")
            eta = np.full(n, eta[0]) if len(eta) == 1 else eta
        delta = get("delta") if self._has_delta else None
        return alpha, beta, b, z, eta, delta

    def _linpred(self, values: np.ndarray) -> np.ndarray:
        alpha, _, b, _, eta, delta = self._blocks(values)
        u = alpha[:, None] + b @ self._w_lag
        if eta is not None:
            u += eta[:, None] * self._w_seas
        if delta is not None:
            u += (self._x @ delta)[:, None]
        return u

    # -- evaluation ----------------------------------------------------------

    def log_posterior(self, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float)
        if self._y is None:
            return _log_prior_values(values)
        u = self._linpred(values)
        with np.errstate(over="ignore"):
            lam = np.exp(u)
        if not np.all(np.isfinite(lam)):
            return -np.inf
        loglik = float(np.sum(self._y * u) - lam.sum()) - self._lgamma
        return loglik + _log_prior_values(values)

    def log_posterior_and_grad(self, values: np.ndarray) -> tuple[float, np.ndarray]:
        values = np.asarray(values, dtype=float)
        grad = -values / PRIOR_SD**2
        if self._y is None:
            return _log_prior_values(values), grad
        alpha, _, b, z, eta, delta = self._blocks(values)
        u = alpha[:, None] + b @ self._w_lag
        if eta is not None:
            u += eta[:, None] * self._w_seas
        if delta is not None:
            u += (self._x @ delta)[:, None]
        with np.errstate(over="ignore"):
            lam = np.exp(u)
        if not np.all(np.isfinite(lam)):
            return -np.inf, grad
        loglik = float(np.sum(self._y * u) - lam.sum()) - self._lgamma
        resid = self._y - lam
        layout = self.layout
        off, length = layout["alpha"]
        node_sums = resid.sum(axis=1)
        grad[off:off + length] += node_sums.sum() if length == 1 else node_sums
        off, length = layout["beta"]
        diag_terms = np.einsum("it,it->i", resid, self._w_lag)
        grad[off:off + length] += diag_terms.sum() if length == 1 else diag_terms
        m = resid @ self._w_lag.T
        if self._latent:
            np.fill_diagonal(m, 0.0)
            gz = (m + m.T) @ z
            off, length = layout["z"]
            grad[off:off + length] += gz.reshape(-1)
        else:
            off, length = layout["full_b"]
            grad[off:off + length] += m[self._rows, self._cols]
        if eta is not None:
            off, length = layout["eta"]
            seas_terms = np.einsum("it,it->i", resid, self._w_seas)
            grad[off:off + length] += seas_terms.sum() if length == 1 else seas_terms
        if delta is not None:
            off, length = layout["delta"]
            grad[off:off + length] += self._x.T @ node_sums
        return loglik + _log_prior_values(values), grad

    def grad(self, values: np.ndarray) -> np.ndarray:
        return self.log_posterior_and_grad(values)[1]


def log_posterior(flat: FlatParams, panel: CountPanel | None, covariates: CovariateMatrix | None,
                  config: ModelConfig) -> float:
    """Unnormalized log posterior: log likelihood plus log prior."""
    n_nodes = _n_nodes_from_layout(flat.layout, config)
    target = PosteriorTarget(panel, config, covariates, n_nodes=n_nodes)
    return target.log_posterior(flat.values)


def grad_log_posterior(flat: FlatParams, panel: CountPanel | None,
                       covariates: CovariateMatrix | None, config: ModelConfig) -> np.ndarray:
    """Analytic gradient of :func:`log_posterior` in the flat coordinates."""
    n_nodes = _n_nodes_from_layout(flat.layout, config)
    target = PosteriorTarget(panel, config, covariates, n_nodes=n_nodes)
    return target.grad(flat.values)
