"""Per-factor effectiveness via proportional-odds ordinal regression.

One slope w and five ordered thresholds b0..b4 map a factor value to a
distribution over the six contest levels through P(Y <= j | x) =
sigma(b_{j-1} - w*x). The module fits (w, b) by maximum likelihood with an
analytic gradient, tests slope significance with a Wald test, checks the
proportional-odds assumption with a likelihood-ratio parallel-lines test,
and produces the effectiveness curve and corpus histogram behind the factor
board.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit

from .errors import DegenerateData, EmptyCorpus, InvariantError, SingularInformation
from .factors import ALL_FACTORS, FactorId, FactorVector

log = logging.getLogger(__name__)

CLASS_COUNT = 6
N_THRESHOLDS = CLASS_COUNT - 1
SIGNIFICANCE_LEVEL = 0.05

SCORE_LABELS = ("very-low", "low", "medium", "high", "very-high")
GRAY_LABEL = "gray"


# ---------------------------------------------------------------------------
# model types


@dataclass(frozen=True)
class FactorCoefficients:
    factor: FactorId
    w: float
    b: tuple[float, float, float, float, float]
    p_value: float
    significant: bool
    x_min: float | None = None  # min-max bounds applied before evaluation;
    x_max: float | None = None  # None on both = evaluate raw values
    se_w: float | None = None

    def __post_init__(self):
        if len(self.b) != N_THRESHOLDS:
            raise InvariantError(self.factor.id, f"expected {N_THRESHOLDS} thresholds")
        if not all(a < c for a, c in zip(self.b, self.b[1:])):
            raise InvariantError(self.factor.id, f"thresholds must strictly increase: {self.b}")
        if not 0.0 <= self.p_value <= 1.0:
            raise InvariantError(self.factor.id, f"p-value {self.p_value} outside [0, 1]")
        if self.significant != (self.p_value < SIGNIFICANCE_LEVEL):
            raise InvariantError(self.factor.id, "significance flag must mirror p < 0.05")
        if (self.x_min is None) != (self.x_max is None):
            raise InvariantError(self.factor.id, "normalization bounds must come in pairs")

    def normalize(self, x: float) -> float:
        if self.x_min is None:
            return x
        return (x - self.x_min) / (self.x_max - self.x_min)


@dataclass(frozen=True)
class EffectivenessModel:
    coefficients: Mapping[FactorId, FactorCoefficients]
    unfitted: tuple[FactorId, ...] = ()
    class_count: int = CLASS_COUNT

    def __post_init__(self):
        covered = set(self.coefficients) | set(self.unfitted)
        if covered != set(ALL_FACTORS) or set(self.coefficients) & set(self.unfitted):
            raise InvariantError("model", "coefficients + unfitted must partition the 23 factors")
        if self.class_count != N_THRESHOLDS + 1:
            raise InvariantError("model", "class_count must equal thresholds + 1")

    def score(self, factor: FactorId, x: float) -> "EffectivenessScore | None":
        coeffs = self.coefficients.get(factor)
        if coeffs is None:
            return None
        return evaluate(coeffs, x)

    def significant_factors(self) -> tuple[FactorId, ...]:
        return tuple(f for f in ALL_FACTORS if f in self.coefficients and self.coefficients[f].significant)


@dataclass(frozen=True)
class EffectivenessScore:
    factor: FactorId
    class_probs: tuple[float, ...]
    expected_class: float
    significant: bool

    @property
    def label(self) -> str:
        return score_label(self.expected_class, self.significant)


def score_label(expected_class: float, significant: bool) -> str:
    if not significant:
        return GRAY_LABEL
    idx = min(len(SCORE_LABELS) - 1, max(0, int(expected_class - 1.0)))
    return SCORE_LABELS[idx]


# ---------------------------------------------------------------------------
# evaluation


def evaluate(coeffs: FactorCoefficients, x: float) -> EffectivenessScore:
    """Class distribution and expected contest level for a factor value."""
    if not math.isfinite(x):
        raise InvariantError(coeffs.factor.id, f"factor value {x} is not finite")
    z = coeffs.normalize(float(x))
    cum = expit(np.asarray(coeffs.b) - coeffs.w * z)
    probs = np.diff(np.concatenate(([0.0], cum, [1.0])))
    probs = np.maximum(probs, 0.0)
    expected = float(np.sum(np.arange(1, CLASS_COUNT + 1) * probs))
    return EffectivenessScore(
        factor=coeffs.factor,
        class_probs=tuple(float(p) for p in probs),
        expected_class=expected,
        significant=coeffs.significant,
    )


def effectiveness_curve(coeffs: FactorCoefficients, x_range: tuple[float, float],
                        n_points: int) -> list[tuple[float, float]]:
    """Expected class sampled on a uniform grid over ``x_range``."""
    lo, hi = x_range
    if not (math.isfinite(lo) and math.isfinite(hi)) or n_points < 2:
        raise InvariantError(coeffs.factor.id, "curve needs a finite range and >= 2 points")
    xs = np.linspace(lo, hi, n_points)
    return [(float(x), evaluate(coeffs, float(x)).expected_class) for x in xs]


@dataclass(frozen=True)
class FactorHistogram:
    edges: tuple[float, ...]   # bins + 1 edges, equal width over [min, max]
    counts: tuple[int, ...]
    highlight_bin: int | None  # bin of the analyzed speech's value


def factor_histogram(values: Iterable[float | None], bins: int = 20,
                     highlight: float | None = None) -> FactorHistogram:
    xs = np.asarray([v for v in values if v is not None and math.isfinite(v)], dtype=float)
    if xs.size == 0:
        raise EmptyCorpus("no defined factor values to bin")
    counts, edges = np.histogram(xs, bins=bins)
    hl = None
    if highlight is not None and math.isfinite(highlight):
        hl = int(np.clip(np.searchsorted(edges, highlight, side="right") - 1, 0, bins - 1))
    return FactorHistogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts), hl)


# ---------------------------------------------------------------------------
# likelihood machinery


def po_nll_grad(w: float, b: np.ndarray, x: np.ndarray, y: np.ndarray,
                mean: bool = True) -> tuple[float, float, np.ndarray]:
    """Negative log-likelihood of the proportional-odds model and its gradient
    with respect to (w, b0..b4). ``y`` holds classes 1..6."""
    n = len(x)
    wx = w * x
    iu = y - 1          # threshold index of the upper cumulative term
    il = y - 2          # threshold index of the lower cumulative term
    has_u = iu < N_THRESHOLDS
    has_l = il >= 0
    u = np.where(has_u, b[np.clip(iu, 0, N_THRESHOLDS - 1)] - wx, np.inf)
    l = np.where(has_l, b[np.clip(il, 0, N_THRESHOLDS - 1)] - wx, -np.inf)
    su, sl = expit(u), expit(l)
    p = np.maximum(su - sl, 1e-300)
    nll = -float(np.sum(np.log(p)))
    du = su * (1.0 - su)
    dl = sl * (1.0 - sl)
    inv_p = 1.0 / p
    gw = -float(np.sum(x * (dl - du) * inv_p))
    gb = np.zeros(N_THRESHOLDS)
    np.add.at(gb, np.clip(iu, 0, N_THRESHOLDS - 1), np.where(has_u, -du * inv_p, 0.0))
    np.add.at(gb, np.clip(il, 0, N_THRESHOLDS - 1), np.where(has_l, dl * inv_p, 0.0))
    if mean:
        return nll / n, gw / n, gb / n
    return nll, gw, gb


def _initial_thresholds(y: np.ndarray) -> np.ndarray:
    n = len(y)
    cum = np.array([np.count_nonzero(y <= j) / n for j in range(1, CLASS_COUNT)])
    cum = np.clip(cum, 0.5 / n, 1.0 - 0.5 / n)
    b = logit(cum)
    for j in range(1, N_THRESHOLDS):
        b[j] = max(b[j], b[j - 1] + 1e-3)
    return b


def _pack(w: float, b: np.ndarray) -> np.ndarray:
    # (w, b0, log gaps): keeps thresholds strictly increasing by construction.
    gaps = np.diff(b)
    return np.concatenate(([w, b[0]], np.log(gaps)))


def _unpack(phi: np.ndarray) -> tuple[float, np.ndarray]:
    w, b0 = float(phi[0]), float(phi[1])
    b = b0 + np.concatenate(([0.0], np.cumsum(np.exp(phi[2:]))))
    return w, b


@dataclass(frozen=True)
class OrdinalFit:
    w: float
    b: tuple[float, ...]
    nll: float          # total negative log-likelihood at the optimum
    se_w: float | None
    p_value: float
    n: int


def fit_factor(x, y) -> OrdinalFit:
    """Maximum-likelihood proportional-odds fit of one factor.

    Deterministic: fixed initialization (w = 0, thresholds at empirical logit
    quantiles) and a quasi-Newton minimizer on the log-gap parameterization.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateData("x and y must be equal-length 1-D arrays")
    if np.any((y < 1) | (y > CLASS_COUNT)):
        raise DegenerateData(f"labels must be ordinal classes 1..{CLASS_COUNT}")
    if len(np.unique(y)) < 2:
        raise DegenerateData("a single ordinal level carries no contrast")
    if float(x.max()) - float(x.min()) <= 0:
        raise DegenerateData("factor values carry no variance")

    phi0 = _pack(0.0, _initial_thresholds(y))

    def objective(phi):
        w, b = _unpack(phi)
        nll, gw, gb = po_nll_grad(w, b, x, y, mean=True)
        # chain rule into (w, b0, log-gap) coordinates
        g = np.empty_like(phi)
        g[0] = gw
        g[1] = gb.sum()
        tail = np.cumsum(gb[::-1])[::-1]  # tail[j] = sum_{i >= j} gb_i
        g[2:] = np.exp(phi[2:]) * tail[1:]
        return nll, g

    res = optimize.minimize(objective, phi0, jac=True, method="L-BFGS-B",
                            options={"maxiter": 1000, "ftol": 1e-13, "gtol": 1e-9})
    w, b = _unpack(res.x)
    nll_total = po_nll_grad(w, b, x, y, mean=False)[0]

    try:
        se_w = _wald_se(w, b, x, y)
        p = wald_significance(w, se_w)
    except SingularInformation:
        se_w, p = None, 1.0
    return OrdinalFit(w=float(w), b=tuple(float(v) for v in b), nll=nll_total,
                      se_w=se_w, p_value=p, n=len(x))


def _wald_se(w: float, b: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Slope standard error from the observed information (Hessian of the total
    NLL at the optimum, by central differences of the analytic gradient)."""
    theta = np.concatenate(([w], b))
    m = len(theta)

    def grad(th):
        nll, gw, gb = po_nll_grad(th[0], th[1:], x, y, mean=False)
        return np.concatenate(([gw], gb))

    H = np.empty((m, m))
    for i in range(m):
        h = 1e-5 * max(1.0, abs(theta[i]))
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        H[:, i] = (grad(tp) - grad(tm)) / (2.0 * h)
    H = 0.5 * (H + H.T)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError as e:
        raise SingularInformation(str(e)) from e
    var_w = float(cov[0, 0])
    if not math.isfinite(var_w) or var_w <= 0:
        raise SingularInformation(f"non-positive slope variance {var_w}")
    return math.sqrt(var_w)


def wald_significance(w: float, se_w: float) -> float:
    """Two-sided p-value for H0: w = 0 against the standard normal."""
    if not (se_w and math.isfinite(se_w)) or se_w <= 0:
        raise SingularInformation(f"invalid standard error {se_w}")
    z = abs(w) / se_w
    return float(2.0 * stats.norm.sf(z))


# ---------------------------------------------------------------------------
# parallel-lines (proportional-odds assumption) test


def _npo_nll_grad(ws: np.ndarray, b: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Relaxed cumulative model with one slope per threshold.

    Unlike the proportional-odds form, per-threshold slopes let cumulative
    curves cross, which drives a sample's probability to or below zero. Below
    ``eps`` the log-likelihood continues as a steep linear barrier so the
    objective stays smooth and the optimizer is pushed back into the feasible
    region instead of stalling on a clipped plateau.
    """
    eps = 1e-6
    n = len(x)
    iu = np.clip(y - 1, 0, N_THRESHOLDS - 1)
    il = np.clip(y - 2, 0, N_THRESHOLDS - 1)
    has_u = (y - 1) < N_THRESHOLDS
    has_l = (y - 2) >= 0
    u = np.where(has_u, b[iu] - ws[iu] * x, np.inf)
    l = np.where(has_l, b[il] - ws[il] * x, -np.inf)
    su, sl = expit(u), expit(l)
    p = su - sl
    small = p <= eps
    logp = np.where(small, math.log(eps) + (p - eps) / eps, np.log(np.maximum(p, eps)))
    dlogp = np.where(small, 1.0 / eps, 1.0 / np.maximum(p, eps))
    nll = -float(np.sum(logp))
    du = su * (1.0 - su)
    dl = sl * (1.0 - sl)
    gw = np.zeros(N_THRESHOLDS)
    gb = np.zeros(N_THRESHOLDS)
    np.add.at(gw, iu, np.where(has_u, x * du * dlogp, 0.0))
    np.add.at(gw, il, np.where(has_l, -x * dl * dlogp, 0.0))
    np.add.at(gb, iu, np.where(has_u, -du * dlogp, 0.0))
    np.add.at(gb, il, np.where(has_l, dl * dlogp, 0.0))
    return nll / n, gw / n, gb / n


def parallel_lines_test_xy(x, y) -> tuple[float, float]:
    """Likelihood-ratio test of proportional odds against per-threshold slopes.

    Returns (p_value, statistic); chi-square with thresholds - 1 degrees of
    freedom. The relaxed fit starts at the constrained optimum, so its
    likelihood can only improve.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    po = fit_factor(x, y)

    def objective(theta):
        ws, b = theta[:N_THRESHOLDS], theta[N_THRESHOLDS:]
        nll, gw, gb = _npo_nll_grad(ws, b, x, y)
        return nll, np.concatenate([gw, gb])

    theta0 = np.concatenate([np.full(N_THRESHOLDS, po.w), np.asarray(po.b)])
    res = optimize.minimize(objective, theta0, jac=True, method="L-BFGS-B",
                            options={"maxiter": 1000, "ftol": 1e-13, "gtol": 1e-9})
    n = len(x)
    nll_relaxed = min(res.fun * n, po.nll)
    stat = max(0.0, 2.0 * (po.nll - nll_relaxed))
    p = float(stats.chi2.sf(stat, df=N_THRESHOLDS - 1))
    return p, stat


def parallel_lines_test(corpus: Sequence[tuple[FactorVector, int]], factor: FactorId) -> float:
    x, y = _factor_xy(corpus, factor)
    if len(x) == 0:
        raise DegenerateData(f"factor {factor.id} is undefined across the corpus")
    return parallel_lines_test_xy(x, y)[0]


# ---------------------------------------------------------------------------
# corpus fitting


def _factor_xy(corpus: Sequence[tuple[FactorVector, int]], factor: FactorId):
    xs, ys = [], []
    for fv, level in corpus:
        v = fv.value(factor)
        if v is not None:
            xs.append(v)
            ys.append(level)
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=int)


def fit(corpus: Sequence[tuple[FactorVector, int]], *, normalize: bool = True,
        min_speeches: int = 30, max_workers: int = 8) -> EffectivenessModel:
    """Per-factor maximum-likelihood fit over a labeled corpus.

    Speeches where a factor is undefined are skipped for that factor; factors
    with no variance or no level contrast are left unfitted. Deterministic for
    a given corpus order.
    """
    if len(corpus) < min_speeches:
        log.warning("fitting on %d speeches; at least %d recommended", len(corpus), min_speeches)
    levels = {level for _, level in corpus}
    if any(not 1 <= lv <= CLASS_COUNT for lv in levels):
        raise DegenerateData(f"levels must be ordinal classes 1..{CLASS_COUNT}")
    if len(levels) < 2:
        raise DegenerateData("corpus carries a single contest level")
    if len(levels) < 3:
        log.warning("fitting on %d distinct levels; at least 3 recommended", len(levels))

    def fit_one(factor: FactorId) -> FactorCoefficients | None:
        x, y = _factor_xy(corpus, factor)
        if len(x) < 2:
            return None
        x_min, x_max = float(x.min()), float(x.max())
        if normalize:
            if x_max - x_min <= 0:
                return None
            z = (x - x_min) / (x_max - x_min)
        else:
            z = x
        try:
            r = fit_factor(z, y)
        except DegenerateData:
            return None
        return FactorCoefficients(
            factor=factor, w=r.w, b=r.b, p_value=r.p_value,
            significant=r.p_value < SIGNIFICANCE_LEVEL,
            x_min=x_min if normalize else None,
            x_max=x_max if normalize else None,
            se_w=r.se_w,
        )

    with ThreadPoolExecutor(max_workers=min(max_workers, len(ALL_FACTORS))) as pool:
        fitted = list(pool.map(fit_one, ALL_FACTORS))

    coefficients = {f: c for f, c in zip(ALL_FACTORS, fitted) if c is not None}
    unfitted = tuple(f for f, c in zip(ALL_FACTORS, fitted) if c is None)
    return EffectivenessModel(coefficients=coefficients, unfitted=unfitted)


def aggregate_score(model: EffectivenessModel, fv: FactorVector,
                    selected: Sequence[FactorId] | None = None) -> float | None:
    """Mean expected class over the selected factors (significant factors when
    none are selected), skipping undefined values. None when nothing applies."""
    chosen = tuple(selected) if selected else model.significant_factors()
    scores = []
    for f in chosen:
        v = fv.value(f)
        if v is None:
            continue
        s = model.score(f, v)
        if s is not None:
            scores.append(s.expected_class)
    return float(np.mean(scores)) if scores else None


# ---------------------------------------------------------------------------
# model files


def model_to_doc(model: EffectivenessModel) -> dict:
    factors = {}
    for f in ALL_FACTORS:
        c = model.coefficients.get(f)
        if c is None:
            factors[f.id] = None
        else:
            factors[f.id] = {
                "w": c.w,
                "b": list(c.b),
                "p": c.p_value,
                "significant": c.significant,
                "min": c.x_min,
                "max": c.x_max,
            }
    return {"schema_version": 1, "class_count": CLASS_COUNT, "factors": factors}


def model_from_doc(doc: Mapping) -> EffectivenessModel:
    coefficients = {}
    unfitted = []
    for f in ALL_FACTORS:
        entry = doc["factors"].get(f.id)
        if entry is None:
            unfitted.append(f)
            continue
        coefficients[f] = FactorCoefficients(
            factor=f,
            w=float(entry["w"]),
            b=tuple(float(v) for v in entry["b"]),
            p_value=float(entry["p"]),
            significant=bool(entry["significant"]),
            x_min=None if entry.get("min") is None else float(entry["min"]),
            x_max=None if entry.get("max") is None else float(entry["max"]),
        )
    return EffectivenessModel(coefficients=coefficients, unfitted=tuple(unfitted))


def load_model(path) -> EffectivenessModel:
    with open(path, "rb") as fh:
        return model_from_doc(json.load(fh))


def save_model(model: EffectivenessModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_doc(model), fh, indent=1)
        fh.write("\n")


def builtin_model() -> EffectivenessModel:
    """The reference coefficients shipped with the package (fitted on the
    original contest corpus; evaluates raw factor values)."""
    raw = resources.files("podium.data").joinpath("wcps_model.json").read_text()
    return model_from_doc(json.loads(raw))


def builtin_model_doc() -> dict:
    raw = resources.files("podium.data").joinpath("wcps_model.json").read_text()
    return json.loads(raw)
