"""Causal-effect estimators: Wald ratio, two-stage IV regression, AIViP.

Only the identity outcome link is implemented. The first stage is linear by
default (a linear probability model for a binary treatment), which keeps the
two-stage estimator with an empty conditioning set algebraically equal to
the Wald ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ancestral_iv import IvRoles, conditioning_set_pag
from .data import Dataset
from .learner import LearnerConfig, learn_pag

WEAK_SLOPE = 1e-8
WEAK_VARIANCE = 1e-10


class EstimationError(ValueError):
    """Estimation cannot proceed on this input."""


class RankError(EstimationError):
    """Design matrix is rank deficient."""


class WeakInstrumentError(EstimationError):
    """Instrument carries (numerically) no information about the treatment."""


@dataclass(frozen=True)
class EstimatorSpec:
    """Second-stage link, interaction columns of f(z), first-stage model."""

    link: str = "identity"
    interactions: tuple[str, ...] = ()
    first_stage: str = "linear"

    def __post_init__(self):
        if self.link != "identity":
            raise ValueError(f"unsupported link {self.link!r}; only 'identity' is implemented")
        if self.first_stage not in ("linear", "logistic"):
            raise ValueError(f"first_stage must be 'linear' or 'logistic', got {self.first_stage!r}")
        object.__setattr__(self, "interactions", tuple(self.interactions))


@dataclass(frozen=True)
class EstimateResult:
    beta_hat: float
    z_used: tuple[str, ...]
    sigma_sw: float
    sigma_sy: float | None
    method: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OlsFit:
    intercept: float
    coef: dict[str, float]
    r2: float


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares with an intercept column prepended; returns (beta, residuals)."""
    n = x.shape[0]
    design = np.column_stack([np.ones(n), x])
    if n <= design.shape[1]:
        raise RankError(f"need more than {design.shape[1]} rows, got {n}")
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankError(f"design matrix has rank {rank} < {design.shape[1]} columns")
    return beta, y - design @ beta


def _r2(y, resid) -> float:
    tss = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - float(resid @ resid) / tss if tss > 0 else 0.0


def ols(data: Dataset, y: str, x: Sequence[str]) -> OlsFit:
    yv = data.column(y)
    beta, resid = _fit(data.select(list(x)), yv)
    return OlsFit(float(beta[0]), dict(zip(x, map(float, beta[1:]))), _r2(yv, resid))


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise WeakInstrumentError("instrument has zero sample variance")
    return float(xc @ (y - y.mean())) / sxx


def wald_estimate(data: Dataset, roles: IvRoles) -> EstimateResult:
    """Ratio of the reduced-form slope (Y on S) to the first-stage slope (W on S)."""
    s = data.column(roles.s)
    sigma_sw = _slope(s, data.column(roles.w))
    if abs(sigma_sw) < WEAK_SLOPE:
        raise WeakInstrumentError(f"first-stage slope {sigma_sw:.3g} is below {WEAK_SLOPE}")
    sigma_sy = _slope(s, data.column(roles.y))
    return EstimateResult(sigma_sy / sigma_sw, (), sigma_sw, sigma_sy, "wald", {"n": data.n})


def _first_stage(data: Dataset, roles: IvRoles, z: tuple[str, ...], spec: EstimatorSpec):
    x = data.select([roles.s, *z])
    w = data.column(roles.w)
    if spec.first_stage == "linear":
        beta, resid = _fit(x, w)
        what = w - resid
        n, p = x.shape[0], x.shape[1] + 1
        sigma2 = float(resid @ resid) / (n - p)
        design = np.column_stack([np.ones(n), x])
        cov = sigma2 * np.linalg.inv(design.T @ design)
        f_stat = float(beta[1] ** 2 / cov[1, 1]) if cov[1, 1] > 0 else float("inf")
        return what, float(beta[1]), {"first_stage_r2": _r2(w, resid), "first_stage_f": f_stat}
    try:
        import statsmodels.api as sm
    except ImportError:
        raise EstimationError("logistic first stage needs statsmodels (pip install statsmodels)") from None
    if not np.all((w == 0) | (w == 1)):
        raise EstimationError("logistic first stage needs a binary treatment")
    design = sm.add_constant(x, has_constant="add")
    fit = sm.Logit(w, design).fit(disp=0)
    return fit.predict(design), float(fit.params[1]), {"first_stage_llf": float(fit.llf)}


def two_stage(data: Dataset, roles: IvRoles, z: Sequence[str] = (), spec: EstimatorSpec = EstimatorSpec(), method: str = "two_stage") -> EstimateResult:
    """Fit W-hat = E(W | S, Z), then regress Y on f(Z) * W-hat and Z.

    ``beta_hat`` is the coefficient of W-hat (the constant term of f); the
    coefficients of any interaction terms are returned in ``diagnostics``.
    """
    z = tuple(z)
    bad = {roles.w, roles.y, roles.s}.intersection(z)
    if bad:
        raise EstimationError(f"conditioning set may not contain {sorted(bad)}")
    for c in (roles.w, roles.y, roles.s, *z):
        data.index(c)
    extra = [c for c in spec.interactions if c not in z]
    if extra:
        raise EstimationError(f"interaction columns {extra} are not in the conditioning set")
    what, sigma_sw, diag = _first_stage(data, roles, z, spec)
    if float(np.var(what)) < WEAK_VARIANCE:
        raise WeakInstrumentError("fitted treatment has (numerically) zero variance")
    if abs(sigma_sw) < WEAK_SLOPE:
        raise WeakInstrumentError(f"first-stage coefficient {sigma_sw:.3g} is below {WEAK_SLOPE}")
    terms = [what] + [what * data.column(c) for c in spec.interactions]
    x2 = np.column_stack(terms + [data.column(c) for c in z])
    beta, _ = _fit(x2, data.column(roles.y))
    diag = dict(diag, n=data.n)
    for k, c in enumerate(spec.interactions, start=2):
        diag[f"interaction_{c}"] = float(beta[k])
    return EstimateResult(float(beta[1]), z, sigma_sw, None, method, diag)


def tsls(data: Dataset, roles: IvRoles, spec: EstimatorSpec = EstimatorSpec()) -> EstimateResult:
    """Plain two-stage least squares with no covariates."""
    return two_stage(data, roles, (), spec, method="tsls")


def tslsciv(data: Dataset, roles: IvRoles, spec: EstimatorSpec = EstimatorSpec()) -> EstimateResult:
    """Two-stage estimation conditioning on every covariate."""
    z = tuple(c for c in data.columns if c not in (roles.w, roles.y, roles.s))
    return two_stage(data, roles, z, spec, method="tslsciv")


def aivip(data: Dataset, roles: IvRoles, config: LearnerConfig = LearnerConfig(), spec: EstimatorSpec = EstimatorSpec(), test=None) -> EstimateResult:
    """Learn a PAG, read off the conditioning set, estimate in two stages.

    ``test`` substitutes a CI backend (e.g. a d-separation oracle) for the
    Fisher-z test on ``data``.
    """
    for c in (roles.w, roles.y, roles.s):
        data.index(c)
    pag = learn_pag(data if test is None else test, config, nodes=data.columns)
    if not _connected(pag, roles.s, roles.w):
        raise WeakInstrumentError(f"{roles.s} is disconnected from {roles.w} in the learned PAG")
    z = conditioning_set_pag(pag, roles)
    res = two_stage(data, roles, z, spec, method="aivip")
    diag = dict(res.diagnostics, pag_edges=pag.num_edges())
    return EstimateResult(res.beta_hat, res.z_used, res.sigma_sw, None, "aivip", diag)


def _connected(g, a, b) -> bool:
    seen = {a}
    stack = [a]
    while stack:
        v = stack.pop()
        if v == b:
            return True
        for u in g.adjacents(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return False


def bias(beta_hat: float, beta_true: float) -> float:
    """Absolute relative error in percent."""
    if beta_true == 0:
        raise ValueError("bias is undefined for a zero true effect")
    return abs((beta_hat - beta_true) / beta_true) * 100.0
