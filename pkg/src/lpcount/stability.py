"""Stationarity checks for the interaction matrix.

Three diagnostics are computed: the l1 norm (maximum absolute column sum),
Gershgorin discs with the implied eigenvalue bounds, and the spectral
radius.  The spectral condition rho(B) < 1 is the stationarity verdict used
by the simulation pipeline; the others are reported as diagnostics.

Eigenvalues are computed in-module: a cyclic Jacobi sweep for symmetric
matrices (the latent-projection interaction matrix is always symmetric) and
Householder Hessenberg reduction followed by shifted QR iteration with
deflation for the general case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError


@dataclass
class StabilityReport:
    l1_norm: float
    gershgorin_lower: float
    gershgorin_upper: float
    discs: list[tuple[float, float]]
    spectral_radius: float
    satisfies_l1: bool
    satisfies_spectral: bool
    satisfies_gershgorin_bound: bool

    def summary(self) -> str:
        lines = [
            f"l1 norm (max abs column sum): {self.l1_norm:.6g} "
            f"({'<' if self.satisfies_l1 else '>='} 1)",
            f"spectral radius: {self.spectral_radius:.6g} "
            f"({'<' if self.satisfies_spectral else '>='} 1)",
            f"Gershgorin bounds: ({self.gershgorin_lower:.6g}, {self.gershgorin_upper:.6g})"
            f" {'inside' if self.satisfies_gershgorin_bound else 'outside'} (-1, 1)",
            "discs: " + ", ".join(f"D({c:.4g}, {r:.4g})" for c, r in self.discs),
        ]
        return "\n".join(lines)


def _check_square(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DataError(f"expected a square matrix, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DataError("matrix contains non-finite entries")
    return b


def gershgorin_bounds(b: np.ndarray) -> tuple[float, float, list[tuple[float, float]]]:
    """Row-wise Gershgorin discs and the implied eigenvalue bounds.

    Disc i is centered at b[i, i] with radius equal to the absolute sum of
    the other entries in row i.  Returns (min_i center-radius,
    max_i center+radius, [(center, radius), ...]).
    """
    b = _check_square(b)
    centers = np.diag(b)
    radii = np.abs(b).sum(axis=1) - np.abs(centers)
    lower = float(np.min(centers - radii))
    upper = float(np.max(centers + radii))
    discs = [(float(c), float(r)) for c, r in zip(centers, radii)]
    return lower, upper, discs


def l1_norm(b: np.ndarray) -> float:
    """Maximum absolute column sum."""
    b = _check_square(b)
    return float(np.abs(b).sum(axis=0).max())


def spectral_radius(b: np.ndarray) -> float:
    """Largest eigenvalue modulus, accurate to about 1e-8 relative."""
    b = _check_square(b)
    if b.shape[0] == 1:
        return abs(float(b[0, 0]))
    if np.array_equal(b, b.T):
        eig = _symmetric_eigenvalues_jacobi(b)
        return float(np.max(np.abs(eig)))
    eig = _general_eigenvalues_qr(b)
    return float(np.max(np.abs(eig)))


def check_stationarity(b: np.ndarray) -> StabilityReport:
    """Full stability report for an interaction matrix."""
    b = _check_square(b)
    lower, upper, discs = gershgorin_bounds(b)
    l1 = l1_norm(b)
    rho = spectral_radius(b)
    return StabilityReport(
        l1_norm=l1,
        gershgorin_lower=lower,
        gershgorin_upper=upper,
        discs=discs,
        spectral_radius=rho,
        satisfies_l1=l1 < 1.0,
        satisfies_spectral=rho < 1.0,
        satisfies_gershgorin_bound=(-1.0 < lower) and (upper < 1.0),
    )


# ---------------------------------------------------------------------------
# In-module eigensolvers
# ---------------------------------------------------------------------------

def _symmetric_eigenvalues_jacobi(a: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    a = a.copy()
    n = a.shape[0]
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return np.zeros(n)
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= 1e-14 * n * scale:
            return np.diag(a).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    raise NumericError(f"Jacobi eigenvalue iteration did not converge in {max_sweeps} sweeps")


def _hessenberg(a: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    h = a.astype(float).copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += np.sign(x[0]) * norm_x if x[0] != 0 else norm_x
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
    return h


def _eig2(a, b, c, d) -> tuple[complex, complex]:
    """Eigenvalues of [[a, b], [c, d]]."""
    tr = a + d
    disc = complex((a - d) ** 2 + 4.0 * b * c) ** 0.5
    return (tr + disc) / 2.0, (tr - disc) / 2.0


def _general_eigenvalues_qr(a: np.ndarray, max_iters_per_eig: int = 100) -> np.ndarray:
    """Eigenvalues of a general real matrix.

    Hessenberg reduction, then shifted QR in complex arithmetic (Wilkinson
    shift from the trailing 2x2 block, Givens-based QR step) with deflation.
    """
    n = a.shape[0]
    h = _hessenberg(a).astype(complex)
    eigs: list[complex] = []
    hi = n  # active block is h[:hi, :hi]
    total_iters = 0
    since_deflation = 0
    budget = max_iters_per_eig * n
    while hi > 0:
        for k in range(1, hi):
            if abs(h[k, k - 1]) <= 1e-15 * (abs(h[k - 1, k - 1]) + abs(h[k, k]) + 1e-300):
                h[k, k - 1] = 0.0
        if hi == 1 or h[hi - 1, hi - 2] == 0.0:
            eigs.append(h[hi - 1, hi - 1])
            hi -= 1
            since_deflation = 0
            continue
        if hi == 2 or h[hi - 2, hi - 3] == 0.0:
            e1, e2 = _eig2(h[hi - 2, hi - 2], h[hi - 2, hi - 1],
                           h[hi - 1, hi - 2], h[hi - 1, hi - 1])
            eigs.extend([e1, e2])
            hi -= 2
            since_deflation = 0
            continue
        total_iters += 1
        since_deflation += 1
        if total_iters > budget:
            raise NumericError(
                f"QR eigenvalue iteration did not converge after {total_iters} steps")
        # Wilkinson shift: trailing 2x2 eigenvalue closer to the corner;
        # exceptional shift if the iteration stalls.
        e1, e2 = _eig2(h[hi - 2, hi - 2], h[hi - 2, hi - 1],
                       h[hi - 1, hi - 2], h[hi - 1, hi - 1])
        corner = h[hi - 1, hi - 1]
        mu = e1 if abs(e1 - corner) <= abs(e2 - corner) else e2
        if since_deflation % 30 == 0:
            mu = corner + 1.5 * abs(h[hi - 1, hi - 2])
        # Start of the unreduced block ending at hi.
        lo = hi - 1
        while lo > 0 and h[lo, lo - 1] != 0.0:
            lo -= 1
        # One shifted QR step (A - mu I = QR; A <- RQ + mu I) via Givens.
        m = hi - lo
        hb = h[lo:hi, lo:hi]
        hb[np.arange(m), np.arange(m)] -= mu
        rots = []
        for k in range(m - 1):
            x, y = hb[k, k], hb[k + 1, k]
            r = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                c, s = 1.0 + 0.0j, 0.0 + 0.0j
            else:
                c, s = x / r, y / r
            rots.append((c, s))
            g = np.array([[np.conj(c), np.conj(s)], [-s, c]])
            hb[k:k + 2, k:] = g @ hb[k:k + 2, k:]
        for k, (c, s) in enumerate(rots):
            g_h = np.array([[c, -np.conj(s)], [s, np.conj(c)]])
            hb[:min(k + 3, m), k:k + 2] = hb[:min(k + 3, m), k:k + 2] @ g_h
        hb[np.arange(m), np.arange(m)] += mu
        h[lo:hi, lo:hi] = hb
    return np.array(eigs)
