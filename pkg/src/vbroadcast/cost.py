"""Trace-norm minimisation over the constrained family and simulation-cost bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as nm_minimize

from . import config
from .choi import ChoiOperator, is_tp, output_trace
from .constraints import ConstrainedParams
from .matcore import DEFAULT_TOL, dagger, hermitian_eig, is_hermitian, trace_norm, trace_norms


def _family_stack(c1: np.ndarray, c4: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Constrained-family Choi matrices for broadcast arrays of (c1, c4, t)."""
    c1, c4, t = np.broadcast_arrays(np.asarray(c1, float), np.asarray(c4, float), np.asarray(t, float))
    c2 = 0.5 + 1j * t
    c3 = 0.5 - 1j * t
    c5 = c4 - 0.5
    c6 = 2 - c1 - 4 * c4
    m = np.zeros(c1.shape + (8, 8), dtype=complex)
    m[..., 0, 0] = m[..., 7, 7] = c1
    for a, b in ((0, 3), (0, 5), (7, 2), (7, 4)):
        m[..., a, b] = c2
        m[..., b, a] = c3
    m[..., 1, 1] = m[..., 6, 6] = c6
    for a in (2, 3, 4, 5):
        m[..., a, a] = c4 + c5
    for a, b in ((2, 4), (4, 2), (3, 5), (5, 3)):
        m[..., a, b] = c4 - c5
    return m


def objective(q: ConstrainedParams | np.ndarray) -> float:
    """Trace norm of the constrained-family Choi operator at ``q``."""
    x = q.as_array() if isinstance(q, ConstrainedParams) else np.asarray(q, dtype=float)
    return float(trace_norms(_family_stack(x[0], x[1], x[2])))


def objective_grid(c1: np.ndarray, c4: np.ndarray, t: np.ndarray, chunk: int = 20000) -> np.ndarray:
    c1, c4, t = np.broadcast_arrays(c1, c4, t)
    flat = [a.reshape(-1) for a in (c1, c4, t)]
    out = np.empty(flat[0].size)
    for s in range(0, out.size, chunk):
        out[s : s + chunk] = trace_norms(_family_stack(*(a[s : s + chunk] for a in flat)))
    return out.reshape(c1.shape)


@dataclass
class GridCertificate:
    points_per_axis: int
    grid_min: float
    grid_argmin: tuple[float, float, float]
    nearest_node: tuple[float, float, float]
    argmin_is_nearest_node: bool
    no_better_point: bool
    local_minima: int
    distinct_basins: int
    margin: float

    @property
    def passed(self) -> bool:
        return self.no_better_point and self.argmin_is_nearest_node and self.distinct_basins == 1

    def to_dict(self) -> dict:
        return {
            "points_per_axis": self.points_per_axis,
            "grid_min": self.grid_min,
            "grid_argmin": list(self.grid_argmin),
            "nearest_node": list(self.nearest_node),
            "argmin_is_nearest_node": self.argmin_is_nearest_node,
            "no_better_point": self.no_better_point,
            "local_minima": self.local_minima,
            "distinct_basins": self.distinct_basins,
            "margin": self.margin,
            "pass": self.passed,
        }


@dataclass
class MinimizeResult:
    value: float
    argmin: ConstrainedParams
    certificate: GridCertificate | None
    restarts_used: int
    restart_values: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.argmin.to_dict(),
            "grid_certificate": self.certificate.to_dict() if self.certificate else None,
            "restarts_used": self.restarts_used,
        }


def _box(cfg: dict) -> np.ndarray:
    b = cfg["box"]
    return np.array([b["c1"], b["c4"], b["t"]], dtype=float)


def grid_scan(
    value: float, argmin: np.ndarray, points: int, box: np.ndarray, margin: float, cfg: dict | None = None
) -> GridCertificate:
    """Evaluate the objective on a ``points``-per-axis grid over ``box``.

    Discrete local minima of the grid are polished with Nelder-Mead; a
    competing basin is one whose polished limit differs from ``argmin``
    (beyond 1e-4 in any coordinate) or whose value misses ``value`` by more
    than ``margin``. Grid minima sitting on the kinks of the objective
    usually drain into the global basin this way.
    """
    cfg = dict(config.DEFAULTS["minimize"], **(cfg or {}))
    axes = [np.linspace(lo, hi, points) for lo, hi in box]
    g1, g4, gt = np.meshgrid(*axes, indexing="ij")
    vals = objective_grid(g1, g4, gt)
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    near = tuple(int(np.argmin(np.abs(ax - x))) for ax, x in zip(axes, argmin))

    # strict discrete local minima over the 26-neighbourhood; padding with +inf
    padded = np.pad(vals, 1, constant_values=np.inf)
    is_min = np.ones(vals.shape, dtype=bool)
    n = points
    for off in itertools.product((-1, 0, 1), repeat=3):
        if off == (0, 0, 0):
            continue
        sl = tuple(slice(1 + o, 1 + o + n) for o in off)
        is_min &= vals < padded[sl]
    limits = []
    for node in zip(*np.nonzero(is_min)):
        start = np.array([axes[k][node[k]] for k in range(3)])
        limits.append(_local_search(start, cfg))
    basins = []
    for val, x in limits:
        same = abs(val - value) <= margin and np.max(np.abs(x - argmin)) <= 1e-4
        key = "global" if same else tuple(np.round(x, 4))
        if key not in basins:
            basins.append(key)
    return GridCertificate(
        points_per_axis=points,
        grid_min=float(vals[idx]),
        grid_argmin=tuple(float(axes[k][idx[k]]) for k in range(3)),
        nearest_node=tuple(float(axes[k][near[k]]) for k in range(3)),
        argmin_is_nearest_node=tuple(int(i) for i in idx) == near,
        no_better_point=bool(vals[idx] >= value - margin),
        local_minima=int(np.sum(is_min)),
        distinct_basins=len(basins),
        margin=margin,
    )


def _local_search(x0: np.ndarray, cfg: dict):
    res = nm_minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"xatol": cfg["xatol"], "fatol": cfg["fatol"], "maxiter": cfg["maxiter"], "maxfev": 4 * cfg["maxiter"]},
    )
    return float(res.fun), np.asarray(res.x, dtype=float)


def minimize(
    starts: int | None = None,
    seed: int | None = None,
    x0: np.ndarray | None = None,
    grid: bool = True,
    cfg: dict | None = None,
) -> MinimizeResult:
    """Multistart Nelder-Mead over (c1, c4, t), then a coarse grid certificate.

    Starting points are drawn uniformly from the configured box. When ``x0``
    is given it is used as the first start. The winner is chosen by value,
    ties broken by the lexicographically smallest argmin.
    """
    cfg = dict(config.DEFAULTS["minimize"], **(cfg or {}))
    starts = cfg["starts"] if starts is None else starts
    seed = cfg["seed"] if seed is None else seed
    box = _box(cfg)
    rng = np.random.default_rng(seed)
    points = rng.uniform(box[:, 0], box[:, 1], size=(starts, 3))
    if x0 is not None:
        points[0] = np.asarray(x0, dtype=float)

    runs = [_local_search(p, cfg) for p in points]
    best_val, best_x = min(runs, key=lambda r: (r[0], tuple(r[1])))
    cert = grid_scan(best_val, best_x, cfg["grid_points"], box, cfg["grid_margin"], cfg) if grid else None
    return MinimizeResult(
        value=best_val,
        argmin=ConstrainedParams(*(float(v) for v in best_x)),
        certificate=cert,
        restarts_used=starts,
        restart_values=[r[0] for r in runs],
    )


@dataclass
class Decomposition:
    """B = a E+ - b E- with E+ and E- completely positive."""

    a: float
    b: float
    e_plus: ChoiOperator
    e_minus: ChoiOperator | None
    tp_exact: bool

    def reconstruct(self) -> ChoiOperator:
        out = self.a * self.e_plus
        if self.e_minus is not None:
            out = out - self.b * self.e_minus
        return out

    @property
    def cost(self) -> float:
        return self.a + self.b

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "a_plus_b": self.cost,
            "tp_exact": self.tp_exact,
            "e_plus": self.e_plus.to_dict(),
            "e_minus": self.e_minus.to_dict() if self.e_minus is not None else None,
        }


def _psd_parts(c: ChoiOperator, tol: float) -> tuple[np.ndarray, np.ndarray]:
    w, v = hermitian_eig(c.matrix, tol)
    pos = w > -tol  # near-zero eigenvalues go to the positive part
    p = (v[:, pos] * w[pos]) @ dagger(v[:, pos])
    n = -(v[:, ~pos] * w[~pos]) @ dagger(v[:, ~pos])
    return p, n


def pos_neg_split(c: ChoiOperator, tol: float = DEFAULT_TOL) -> Decomposition:
    """Split a Hermitian Choi operator into orthogonal positive and negative parts.

    ``a`` and ``b`` are the traces of the parts divided by the input dimension.
    ``tp_exact`` reports whether both parts have output-trace proportional to
    the identity, i.e. whether E+ and E- are trace preserving.
    """
    if not is_hermitian(c.matrix, tol):
        raise ValueError("pos_neg_split requires a Hermitian Choi operator")
    p, n = _psd_parts(c, tol)
    d = c.dim_in
    a = float(np.trace(p).real) / d
    b = float(np.trace(n).real) / d
    e_plus = c.with_matrix(p / a) if a > 0 else c.with_matrix(p)
    e_minus = c.with_matrix(n / b) if b > tol else None
    tp_exact = is_tp(e_plus, tol) and (e_minus is None or is_tp(e_minus, tol))
    return Decomposition(a, b if e_minus is not None else 0.0, e_plus, e_minus, tp_exact)


@dataclass
class BaseNormBounds:
    lower: float
    upper: float
    tol: float

    @property
    def certified(self) -> bool:
        return self.upper - self.lower <= self.tol

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "certified": self.certified}


def cptni_upper_bound(c: ChoiOperator, tol: float = DEFAULT_TOL) -> float:
    """lambda_max(Tr_out P) + lambda_max(Tr_out N) for the orthogonal split C = P - N.

    Dividing P and N by those largest eigenvalues gives trace-non-increasing CP
    maps, so this is a valid decomposition cost. It equals a + b whenever the
    split parts are exactly trace preserving.
    """
    p, n = _psd_parts(c, tol)
    parts = [ChoiOperator(x, c.dim_in, c.dims_out) for x in (p, n)]
    return float(sum(np.max(np.linalg.eigvalsh(output_trace(x))) for x in parts))


def base_norm_bounds(c: ChoiOperator, tol: float | None = None) -> BaseNormBounds:
    """Sandwich ||C||_1 / d <= ||B||_base <= cost of the orthogonal split."""
    tol = config.get("tolerances", "bracket") if tol is None else tol
    lower = trace_norm(c.matrix) / c.dim_in
    upper = cptni_upper_bound(c)
    return BaseNormBounds(lower, upper, tol)
