"""Multinomial logit estimation by Newton-Raphson and Wald tests on its coefficients.

Utilities are linear in alternative-specific coefficients:
``V_ij = x_i . beta_j`` with ``beta_ref = 0``. The free parameters are stacked
alternative by alternative (non-reference alternatives in their original order),
so coefficient ``k`` of the ``a``-th free alternative sits at ``a * K + k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..types import DataError


class EstimationError(DataError):
    """The likelihood cannot be maximised (rank deficiency, separation, divergence)."""


def choice_probabilities(utilities) -> np.ndarray:
    """Row-wise softmax, stable under large utilities."""
    v = np.asarray(utilities, dtype=float)
    v = v - v.max(axis=-1, keepdims=True)
    e = np.exp(v)
    return e / e.sum(axis=-1, keepdims=True)


def _utilities(theta: np.ndarray, X: np.ndarray, n_alt: int, ref: int) -> np.ndarray:
    K = X.shape[1]
    beta = np.zeros((n_alt, K))
    beta[[j for j in range(n_alt) if j != ref]] = theta.reshape(n_alt - 1, K)
    return X @ beta.T


def log_likelihood(theta, X, y, n_alt: int, ref: int = 0) -> float:
    v = _utilities(np.asarray(theta, float), X, n_alt, ref)
    vmax = v.max(axis=1, keepdims=True)
    lse = (vmax[:, 0] + np.log(np.exp(v - vmax).sum(axis=1)))
    return float((v[np.arange(len(y)), y] - lse).sum())


def gradient(theta, X, y, n_alt: int, ref: int = 0) -> np.ndarray:
    """Score vector: ``sum_i x_i (1{y_i = j} - P_ij)`` for each free alternative."""
    P = choice_probabilities(_utilities(np.asarray(theta, float), X, n_alt, ref))
    Y = np.zeros_like(P)
    Y[np.arange(len(y)), y] = 1.0
    free = [j for j in range(n_alt) if j != ref]
    return ((Y - P)[:, free].T @ X).ravel()


def hessian(theta, X, y, n_alt: int, ref: int = 0) -> np.ndarray:
    """Hessian of the log-likelihood (negative definite at a proper interior optimum)."""
    P = choice_probabilities(_utilities(np.asarray(theta, float), X, n_alt, ref))
    free = [j for j in range(n_alt) if j != ref]
    K = X.shape[1]
    H = np.zeros((len(free) * K, len(free) * K))
    for a, j in enumerate(free):
        for b, l in enumerate(free):
            w = P[:, j] * ((j == l) - P[:, l])
            H[a * K:(a + 1) * K, b * K:(b + 1) * K] = -(X * w[:, None]).T @ X
    return H


@dataclass
class MnlModel:
    alternatives: list
    covariates: list
    reference: object
    coef: np.ndarray                     # (J, K); reference row is zero
    cov: np.ndarray                      # (free params, free params)
    loglik: float
    loglik_null: float
    n_obs: int
    iterations: int
    loglik_trace: list = field(default_factory=list)

    @property
    def free_alternatives(self) -> list:
        return [a for a in self.alternatives if a != self.reference]

    @property
    def params(self) -> np.ndarray:
        ref = self.alternatives.index(self.reference)
        return np.delete(self.coef, ref, axis=0).ravel()

    @property
    def std_errors(self) -> np.ndarray:
        """Standard errors shaped like ``coef`` (zero on the reference row)."""
        se = np.zeros_like(self.coef)
        ref = self.alternatives.index(self.reference)
        rows = [j for j in range(len(self.alternatives)) if j != ref]
        se[rows] = np.sqrt(np.diag(self.cov)).reshape(len(rows), -1)
        return se

    @property
    def pseudo_r2(self) -> float:
        return 1.0 - self.loglik / self.loglik_null

    def index(self, alternative, covariate) -> int:
        """Position of one coefficient in the free-parameter vector."""
        a = self.free_alternatives.index(alternative)
        return a * len(self.covariates) + self.covariates.index(covariate)

    def covariate_block(self, covariate) -> list[int]:
        """Indices of ``covariate`` across all non-reference alternatives."""
        return [self.index(a, covariate) for a in self.free_alternatives]

    def predict_proba(self, X) -> np.ndarray:
        return choice_probabilities(np.asarray(X, float) @ self.coef.T)

    def summary(self) -> str:
        se = self.std_errors
        lines = [f"MNL  n={self.n_obs}  logL={self.loglik:.4f}  logL0={self.loglik_null:.4f}  "
                 f"pseudo-R2={self.pseudo_r2:.4f}  iterations={self.iterations}",
                 f"reference alternative: {self.reference}",
                 f"{'alternative':<12} {'covariate':<14} {'coef':>10} {'se':>10} {'z':>8} {'p':>8}"]
        for j, alt in enumerate(self.alternatives):
            if alt == self.reference:
                continue
            for k, cov in enumerate(self.covariates):
                b, s = self.coef[j, k], se[j, k]
                z = b / s if s > 0 else np.nan
                p = 2 * stats.norm.sf(abs(z)) if s > 0 else np.nan
                lines.append(f"{str(alt):<12} {str(cov):<14} {b:10.4f} {s:10.4f} {z:8.3f} {p:8.4f}")
        lines.append("Wald tests by covariate (all alternatives jointly)")
        for cov in self.covariates:
            w = wald_test(self, self.covariate_block(cov))
            lines.append(f"  {str(cov):<14} W={w.statistic:10.4f} df={w.df} p={w.pvalue:.4g}")
        return "\n".join(lines) + "\n"


def _check_design(X: np.ndarray, y: np.ndarray, n_alt: int, names: list) -> None:
    if X.ndim != 2 or len(X) != len(y):
        raise EstimationError("design matrix and choices have mismatched shapes")
    if not np.all(np.isfinite(X)):
        raise EstimationError("design matrix contains non-finite values")
    for k in range(X.shape[1]):
        if np.allclose(X[:, k], 0.0):
            raise EstimationError(f"covariate {names[k]!r} is identically zero")
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        # name the first column that is a combination of the ones before it
        for k in range(X.shape[1]):
            if np.linalg.matrix_rank(X[:, :k + 1]) <= k:
                raise EstimationError(f"design matrix is rank deficient: covariate {names[k]!r} "
                                      "is collinear with earlier columns")
    present = np.bincount(y, minlength=n_alt)
    if np.any(present == 0):
        raise EstimationError(f"alternative index {int(np.argmin(present))} is never chosen")


def mnl_fit(X, y, alternatives=None, covariates=None, reference=None,
            tol: float = 1e-6, max_iter: int = 100) -> MnlModel:
    """Maximum-likelihood MNL with alternative-specific coefficients.

    ``X`` is (n, K) and should include a constant column if intercepts are
    wanted; ``y`` holds chosen alternatives (labels or indices). Newton steps are
    halved until the log-likelihood does not decrease; iteration stops when the
    score's max-norm falls below ``tol``.
    """
    X = np.asarray(X, dtype=float)
    y_raw = np.asarray(y)
    if alternatives is None:
        alternatives = sorted(set(y_raw.tolist()))
    alternatives = list(alternatives)
    if len(alternatives) < 2:
        raise EstimationError("at least two alternatives are required")
    lookup = {a: j for j, a in enumerate(alternatives)}
    try:
        yi = np.array([lookup[v] for v in y_raw.tolist()], dtype=int)
    except KeyError as exc:
        raise EstimationError(f"choice {exc.args[0]!r} is not among the alternatives") from None
    if reference is None:
        reference = alternatives[0]
    if reference not in lookup:
        raise EstimationError(f"reference {reference!r} is not among the alternatives")
    ref = lookup[reference]
    covariates = list(covariates) if covariates is not None else [f"x{k}" for k in range(X.shape[1])]
    _check_design(X, yi, len(alternatives), covariates)

    J, K = len(alternatives), X.shape[1]
    theta = np.zeros((J - 1) * K)
    ll = log_likelihood(theta, X, yi, J, ref)
    ll_null = ll
    trace = [ll]
    steps = 0
    while True:
        g = gradient(theta, X, yi, J, ref)
        if np.max(np.abs(g)) < tol:
            break
        if steps == max_iter:
            raise EstimationError(f"no convergence after {max_iter} iterations")
        H = hessian(theta, X, yi, J, ref)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            raise EstimationError("singular Hessian; check for collinear covariates") from None
        t = 1.0
        while True:
            cand = theta + t * step
            ll_new = log_likelihood(cand, X, yi, J, ref)
            if ll_new >= ll:
                break
            t *= 0.5
            if t < 1e-10:
                # at machine precision the ascent cannot improve further
                if np.max(np.abs(g)) < 1e-4:
                    cand, ll_new = theta, ll
                    break
                raise EstimationError("line search failed to improve the log-likelihood")
        if t < 1e-10:
            break
        theta, ll = cand, ll_new
        steps += 1
        trace.append(ll)
        if np.max(np.abs(theta)) > 50:
            k = int(np.argmax(np.abs(theta))) % K
            raise EstimationError(f"coefficients diverge (possible separation) on covariate {covariates[k]!r}")

    H = hessian(theta, X, yi, J, ref)
    try:
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        raise EstimationError("information matrix is singular") from None
    coef = np.zeros((J, K))
    coef[[j for j in range(J) if j != ref]] = theta.reshape(J - 1, K)
    return MnlModel(alternatives, covariates, reference, coef, cov, ll, ll_null, len(yi), steps, trace)


class WaldResult(tuple):
    """``(statistic, df, pvalue)`` with named access."""

    def __new__(cls, statistic, df, pvalue):
        return super().__new__(cls, (statistic, df, pvalue))

    statistic = property(lambda self: self[0])
    df = property(lambda self: self[1])
    pvalue = property(lambda self: self[2])


def wald_test(model: MnlModel, block) -> WaldResult:
    """Joint test that the coefficients at ``block`` (free-parameter indices) are zero.

    ``block`` may be a single index, a list of indices, or a covariate name (all
    non-reference alternatives for that covariate).
    """
    if isinstance(block, str):
        block = model.covariate_block(block)
    idx = np.atleast_1d(np.asarray(block, dtype=int))
    b = model.params[idx]
    V = model.cov[np.ix_(idx, idx)]
    if not np.any(b):
        return WaldResult(0.0, len(idx), 1.0)
    W = float(b @ np.linalg.solve(V, b))
    return WaldResult(W, len(idx), float(stats.chi2.sf(W, len(idx))))


def simulate_choices(X, coef, rng: np.random.Generator) -> np.ndarray:
    """Draw one choice per row from the logit probabilities implied by ``coef`` (J, K)."""
    P = choice_probabilities(np.asarray(X, float) @ np.asarray(coef, float).T)
    u = rng.random(len(P))[:, None]
    return np.minimum((u > np.cumsum(P, axis=1)).sum(axis=1), P.shape[1] - 1)
