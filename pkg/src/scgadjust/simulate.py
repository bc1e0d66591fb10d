"""Linear-Gaussian sampling over full-time templates and OLS adjustment.

Data follow the cohort framing: many independent replicates of a short
multivariate series, each simulated in lag-0 topological order per slice
with Gaussian noise.  The treatment coefficient of an ordinary least squares
regression of the outcome on (treatment, adjustment set) estimates the micro
effect; the experiment harness compares empirical estimator variances across
adjustment sets.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .graph import SCG
from .identify import AdjustmentSet, adjustment_set_to_obj, scg_backdoor_check
from .unroll import (
    FTDagTemplate,
    MicroQuery,
    TemporalVar,
    enumerate_compatible_templates,
)


class EstimationError(ValueError):
    """Regression cannot be run on this data/set combination."""


class InstabilityError(RuntimeError):
    """No stable coefficient draw found within the retry bound."""


@dataclass(frozen=True)
class LinearDTDSCM:
    """Linear mechanisms over one template: coefficient per (edge, lag)."""

    template: FTDagTemplate
    coeff_entries: tuple[tuple[tuple[tuple[str, str], int], float], ...]
    noise_entries: tuple[tuple[str, float], ...]

    @property
    def coefficients(self) -> dict[tuple[tuple[str, str], int], float]:
        return dict(self.coeff_entries)

    @property
    def noise_sd(self) -> dict[str, float]:
        return dict(self.noise_entries)


@dataclass(frozen=True)
class Dataset:
    """Replicate x time x series tensor, no missing values."""

    series: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[2] != len(self.series):
            raise ValueError("values must have shape (replicates, horizon, n_series)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dataset contains non-finite values")

    @property
    def replicates(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EffectEstimate:
    point: float
    set_used: AdjustmentSet
    n: int
    stderr: float


def _reduced_form(model: LinearDTDSCM) -> tuple[np.ndarray, list[np.ndarray]]:
    g = model.template.scg
    d = len(g.nodes)
    idx = {v: i for i, v in enumerate(g.nodes)}
    gmax = model.template.gamma_max
    mats = [np.zeros((d, d)) for _ in range(gmax + 1)]
    for ((u, w), lag), c in model.coeff_entries:
        mats[lag][idx[w], idx[u]] = c
    inv = np.linalg.inv(np.eye(d) - mats[0])
    return inv, [inv @ mats[lag] for lag in range(1, gmax + 1)]


def spectral_radius(model: LinearDTDSCM) -> float:
    """Largest eigenvalue modulus of the reduced-form companion matrix."""
    _, lagged = _reduced_form(model)
    d = lagged[0].shape[0] if lagged else len(model.template.scg.nodes)
    p = len(lagged)
    if p == 0:
        return 0.0
    comp = np.zeros((d * p, d * p))
    for i, mat in enumerate(lagged):
        comp[:d, i * d : (i + 1) * d] = mat
    if p > 1:
        comp[d:, : d * (p - 1)] = np.eye(d * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def sample_linear_model(
    tmpl: FTDagTemplate,
    coef_low: float = 0.1,
    coef_high: float = 0.9,
    seed: int = 0,
    noise_sd: float = 1.0,
    max_tries: int = 100,
    stability_margin: float = 0.95,
) -> LinearDTDSCM:
    """Draw signed coefficients with |c| in [coef_low, coef_high]; redraw until
    the companion spectral radius clears the stability margin."""
    if not (0 < coef_low <= coef_high):
        raise ValueError("coefficient bounds must satisfy 0 < coef_low <= coef_high")
    rng = np.random.default_rng(np.random.SeedSequence([11, seed]))
    pairs = [(edge, lag) for edge, ls in tmpl.lag_entries for lag in ls]
    noises = tuple((v, float(noise_sd)) for v in tmpl.scg.nodes)
    for _ in range(max_tries):
        coeffs = tuple(
            (pair, float(rng.uniform(coef_low, coef_high) * rng.choice((-1.0, 1.0))))
            for pair in pairs
        )
        model = LinearDTDSCM(tmpl, coeffs, noises)
        if spectral_radius(model) < stability_margin:
            return model
    raise InstabilityError(f"no stable draw within {max_tries} tries")


def generate(
    model: LinearDTDSCM, n_replicates: int, horizon: int, burn_in: int, seed: int
) -> Dataset:
    """Simulate replicates independently and drop the burn-in slices."""
    if horizon < 1 or burn_in < 0 or n_replicates < 1:
        raise ValueError("need horizon >= 1, burn_in >= 0, n_replicates >= 1")
    g = model.template.scg
    d = len(g.nodes)
    idx = {v: i for i, v in enumerate(g.nodes)}
    total = burn_in + horizon

    zero_edges = [edge for edge, ls in model.template.lag_entries if 0 in ls]
    order = _zero_lag_topo_order(g, zero_edges)
    by_target: dict[str, list[tuple[int, int, float]]] = {v: [] for v in g.nodes}
    for ((u, w), lag), c in model.coeff_entries:
        by_target[w].append((idx[u], lag, c))

    sds = np.array([model.noise_sd[v] for v in g.nodes])
    rng = np.random.default_rng(np.random.SeedSequence([13, seed]))
    values = rng.normal(size=(n_replicates, total, d)) * sds
    for t in range(total):
        for w in order:
            col = idx[w]
            for (src, lag, c) in by_target[w]:
                if lag == 0:
                    values[:, t, col] += c * values[:, t, src]
                elif t - lag >= 0:
                    values[:, t, col] += c * values[:, t - lag, src]
    return Dataset(g.nodes, values[:, burn_in:, :])


def _zero_lag_topo_order(g: SCG, zero_edges: list[tuple[str, str]]) -> list[str]:
    indegree = {v: 0 for v in g.nodes}
    children: dict[str, list[str]] = {v: [] for v in g.nodes}
    for (u, w) in zero_edges:
        indegree[w] += 1
        children[u].append(w)
    ready = [v for v in g.nodes if indegree[v] == 0]
    order: list[str] = []
    while ready:
        ready.sort(key=g.index)
        v = ready.pop(0)
        order.append(v)
        for w in children[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(w)
    if len(order) != len(g.nodes):
        raise ValueError("lag-0 subgraph is cyclic")
    return order


def true_effect(model: LinearDTDSCM, q: MicroQuery) -> float:
    """Sum over directed paths from treatment@(t-gamma) to outcome@t of the
    coefficient products, by dynamic programming over offsets."""
    g = model.template.scg
    g.check_nodes([q.treatment, q.outcome])
    zero_edges = [edge for edge, ls in model.template.lag_entries if 0 in ls]
    order = _zero_lag_topo_order(g, zero_edges)
    start = TemporalVar(q.treatment, -q.gamma)
    eff: dict[TemporalVar, float] = {start: 1.0}
    for s in range(-q.gamma, 1):
        for w in order:
            tv = TemporalVar(w, s)
            if tv == start:
                continue
            total = 0.0
            for ((u, w2), lag), c in model.coeff_entries:
                if w2 == w:
                    total += c * eff.get(TemporalVar(u, s - lag), 0.0)
            eff[tv] = total
    return eff.get(TemporalVar(q.outcome, 0), 0.0)


def ols_effect(data: Dataset, q: MicroQuery, z: AdjustmentSet) -> EffectEstimate:
    """Treatment coefficient of OLS(outcome ~ treatment + z), pooled over
    replicates and every anchor time with a full covariate window."""
    series_index = {v: i for i, v in enumerate(data.series)}
    for name in (q.treatment, q.outcome):
        if name not in series_index:
            raise EstimationError(f"series {name!r} not in dataset")
    zs = sorted(z, key=lambda tv: (-tv.offset, tv.series))
    for tv in zs:
        if tv.series not in series_index:
            raise EstimationError(f"series {tv.series!r} not in dataset")
        if tv.offset > 0:
            raise EstimationError(f"future adjustment variable {tv.label()}")
    max_back = max([q.gamma] + [-tv.offset for tv in zs])
    t0 = max_back
    if t0 >= data.horizon:
        raise EstimationError("horizon too short for the covariate window")
    anchors = range(t0, data.horizon)
    vals = data.values
    cols = [np.ones((data.replicates, len(anchors)))]
    cols.append(np.stack([vals[:, t - q.gamma, series_index[q.treatment]] for t in anchors], axis=1))
    for tv in zs:
        cols.append(np.stack([vals[:, t + tv.offset, series_index[tv.series]] for t in anchors], axis=1))
    y = np.stack([vals[:, t, series_index[q.outcome]] for t in anchors], axis=1).ravel()
    design = np.column_stack([c.ravel() for c in cols])
    n, p = design.shape
    if n <= len(zs) + 2:
        raise EstimationError(f"too few rows ({n}) for {len(zs)} adjustment variables")
    if np.linalg.matrix_rank(design) < p:
        raise EstimationError("design matrix is rank deficient")
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    dof = max(n - p, 1)
    sigma2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(design.T @ design)
    stderr = float(np.sqrt(sigma2 * xtx_inv[1, 1]))
    return EffectEstimate(point=float(beta[1]), set_used=frozenset(z), n=n, stderr=stderr)


def variance_experiment(
    g: SCG,
    q: MicroQuery,
    sets: dict[str, AdjustmentSet],
    n: int,
    reps: int,
    seed: int,
    blocks: int = 5,
    coef_low: float = 0.1,
    coef_high: float = 0.9,
    burn_in: int = 25,
    template: FTDagTemplate | None = None,
    validate_sets: bool = True,
) -> dict:
    """Monte-Carlo estimator comparison across adjustment sets.

    Each block samples one linear model over a compatible template and
    simulates ``reps // blocks`` independent datasets of ``n`` replicates;
    every named set is estimated on every dataset.  The per-set aggregate
    variance is the mean of within-block variances, so between-model effect
    heterogeneity does not contaminate the comparison.
    """
    if reps % blocks != 0:
        raise ValueError("reps must be divisible by blocks")
    if validate_sets:
        for name, z in sets.items():
            if name in ("a1", "a2"):
                continue
            report = scg_backdoor_check(g, q, z)
            if not report.satisfied:
                raise ValueError(f"set {name!r} fails the criterion: {report.violations}")

    all_offsets = [-q.gamma] + [tv.offset for z in sets.values() for tv in z]
    horizon = max(-min(all_offsets), q.gamma + q.gamma_max) + 1
    templates = [template] if template is not None else enumerate_compatible_templates(
        g, q.gamma_max, cap=10_000
    )
    reps_per_block = reps // blocks
    names = sorted(sets)
    points: dict[str, list[float]] = {name: [] for name in names}
    errors: dict[str, list[float]] = {name: [] for name in names}
    block_vars: dict[str, list[float]] = {name: [] for name in names}
    picker = np.random.default_rng(np.random.SeedSequence([17, seed]))

    for b in range(blocks):
        tmpl = templates[int(picker.integers(len(templates)))]
        model = sample_linear_model(tmpl, coef_low, coef_high, seed=seed * 1000 + b)
        truth = true_effect(model, q)
        block_points: dict[str, list[float]] = {name: [] for name in names}
        for r in range(reps_per_block):
            data_seed = (seed * blocks + b) * reps_per_block + r
            data = generate(model, n, horizon, burn_in, seed=data_seed)
            for name in names:
                est = ols_effect(data, q, sets[name])
                block_points[name].append(est.point)
                errors[name].append(est.point - truth)
        for name in names:
            points[name].extend(block_points[name])
            block_vars[name].append(float(np.var(block_points[name], ddof=1)))

    per_set = {}
    for name in names:
        err = np.array(errors[name])
        per_set[name] = {
            "set": adjustment_set_to_obj(g, sets[name]),
            "mean": float(np.mean(points[name])),
            "bias": float(err.mean()),
            "bias_se": float(err.std(ddof=1) / np.sqrt(len(err))),
            "variance": float(np.mean(block_vars[name])),
            "block_variances": block_vars[name],
        }
    ordering = {}
    if "qopt" in sets:
        for other in names:
            if other != "qopt":
                ordering[f"qopt_le_{other}"] = bool(
                    per_set["qopt"]["variance"] <= per_set[other]["variance"]
                )
    return {
        "n": n,
        "reps": reps,
        "blocks": blocks,
        "seed": seed,
        "per_set": per_set,
        "ordering": ordering,
        "variance_rank": sorted(names, key=lambda name: per_set[name]["variance"]),
    }


def dataset_to_csv(data: Dataset) -> str:
    """Long-format CSV: replicate, time, series, value."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["replicate", "time", "series", "value"])
    for r in range(data.replicates):
        for t in range(data.horizon):
            for j, name in enumerate(data.series):
                writer.writerow([r, t, name, repr(float(data.values[r, t, j]))])
    return buf.getvalue()
