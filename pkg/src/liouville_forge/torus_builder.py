"""Partial mapping torus assembly and attractor exploration.

Builds the suspension-with-varying-roof model over a certified contraction,
checks that the rescaled contact form survives the gluing, verifies boundary
transversality after the collar tilt, iterates the map to approximate the
skeleton attractor, and estimates fractal dimension by box counting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import RBFInterpolator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .contact_kernel import (
    ContactModel,
    ModelError,
    OutOfChart,
    model_conformal_factors,
)

__all__ = [
    "GExtension",
    "MappingTorusModel",
    "FundamentalDomainPoint",
    "SkeletonSample",
    "BoxCountResult",
    "SkeletonAnalysis",
    "NonConstantG",
    "DescentViolation",
    "LeftDomain",
    "EmptySection",
    "DegenerateCloud",
    "extend_G",
    "build_mapping_torus",
    "descent_residuals",
    "descent_check",
    "normalize_fundamental",
    "in_tilt_region_P",
    "boundary_transversality_check",
    "iterate_attractor",
    "section_cloud",
    "cross_section",
    "count_clusters",
    "suggested_section_gap",
    "box_counting_dimension",
    "skeleton_analysis",
    "skeleton_dimension",
    "export_cloud_csv",
]


class NonConstantG(Exception):
    """Constant extension requested but the sampled factor varies."""


class DescentViolation(Exception):
    """The rescaled form does not survive the gluing within tolerance."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"descent residual {residual:.6e} >= tol {tol:.1e}")
        self.residual = residual
        self.tol = tol


class LeftDomain(Exception):
    """Fundamental-domain reduction required an unavailable preimage."""


class EmptySection(Exception):
    """No sample points fell inside the requested cross-section slab."""


class DegenerateCloud(Exception):
    """All cloud points coincide; box counting is meaningless."""


@dataclass(frozen=True)
class GExtension:
    """Positive roof function on the map's codomain chart.

    ``constant`` is set when the function is a single value (the usual case
    for the built-in models, whose conformal factor is constant).
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    mode: str
    constant: float | None = None
    meta: dict = field(default_factory=dict)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluate(np.atleast_2d(np.asarray(pts, float))), float)


@dataclass(frozen=True)
class MappingTorusModel:
    """Contraction model plus roof extension plus collar tilt width."""

    base: ContactModel
    G: GExtension
    tilt_eps: float = 0.1

    def __post_init__(self) -> None:
        if self.tilt_eps < 0:
            raise ValueError("tilt_eps must be nonnegative")


class FundamentalDomainPoint(NamedTuple):
    """Representative with 0 <= s < G(x); unpacks as (s, x)."""

    s: float
    x: np.ndarray


@dataclass(frozen=True)
class SkeletonSample:
    """Point cloud approximating the attractor at a given iteration depth."""

    points: np.ndarray
    depth: int
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoxCountResult:
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r2: float

    def to_dict(self) -> dict:
        return {
            "scales": list(self.scales),
            "counts": list(self.counts),
            "slope": self.slope,
            "r2": self.r2,
        }


@dataclass(frozen=True)
class SkeletonAnalysis:
    estimate: float
    route: str
    box: BoxCountResult
    section_clusters: int | None
    depth: int
    seeds: int

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "route": self.route,
            "box_counting": self.box.to_dict(),
            "section_clusters": self.section_clusters,
            "depth": self.depth,
            "seeds": self.seeds,
        }


# -- roof extension -----------------------------------------------------------

def _sampled_g(base: ContactModel, samples: int, rng_seed: int):
    pts = np.vstack(
        [base.chart.sample(samples, rng_seed), base.chart.probe_points(cap=512)]
    )
    f, resid, scale, q = model_conformal_factors(base, pts)
    valid = np.isfinite(f) & (f > 0.0) & (f < 1.0) & (resid <= 1e-6 * scale)
    if not valid.any():
        raise ModelError("no valid conformal factors; is the model a contraction?")
    g = -np.log(f[valid])
    return pts[valid], q[valid], g


def extend_G(
    base: ContactModel,
    mode: str = "auto",
    samples: int = 2048,
    rng_seed: int = 0,
    tilt_eps: float = 0.1,
) -> GExtension:
    """Extend the contraction exponent off the image of the map.

    ``constant`` is exact whenever the conformal factor is constant;
    ``blend`` interpolates sampled values over the image and feathers to
    the mean value outside, clamped to half the minimum; ``model`` uses an
    exact extension supplied by the model itself.
    """
    dom_pts, img_pts, g = _sampled_g(base, samples, rng_seed)
    spread = float(np.ptp(g))
    if mode == "auto":
        if base.g_extension is not None:
            mode = "model"
        elif spread <= 1e-9:
            mode = "constant"
        else:
            mode = "blend"

    if mode == "constant":
        if spread > 1e-9:
            raise NonConstantG(f"sampled exponent varies by {spread:.3e}")
        g0 = float(np.median(g))

        def evaluate_const(pts: np.ndarray) -> np.ndarray:
            return np.full(np.atleast_2d(pts).shape[0], g0)

        return GExtension(evaluate_const, "constant", g0, {"spread": spread})

    codomain = base.codomain
    if mode == "model":
        if base.g_extension is None:
            raise ModelError("model supplies no exact extension")
        ext = base.g_extension

        def evaluate_model(pts: np.ndarray) -> np.ndarray:
            return np.asarray(ext(codomain.reduce(np.atleast_2d(pts))), float)

        check = evaluate_model(codomain.reduce(img_pts))
        resid = float(np.max(np.abs(check - g)))
        if resid > 1e-8:
            raise ModelError(f"model extension fails on the image: {resid:.3e}")
        return GExtension(evaluate_model, "model", None, {"extension_residual": resid})

    if mode != "blend":
        raise ValueError(f"unknown extension mode {mode!r}")

    imgs = codomain.reduce(img_pts)
    emb = codomain.embed_periodic(imgs)
    neighbors = min(128, len(emb) - 1)
    rbf = RBFInterpolator(emb, g, kernel="thin_plate_spline", neighbors=neighbors)
    tree = cKDTree(emb)
    # Dead zone: inside twice the typical sample spacing we trust the
    # interpolant outright; the feather to the mean starts beyond it.
    nn_d, _ = tree.query(emb, k=2)
    dead = 2.0 * float(np.median(nn_d[:, 1]))
    g_bar = float(np.mean(g))
    g_floor = float(np.min(g)) / 2.0

    def evaluate_blend(pts: np.ndarray) -> np.ndarray:
        e = codomain.embed_periodic(codomain.reduce(np.atleast_2d(pts)))
        val = rbf(e)
        dist, _ = tree.query(e)
        t = np.maximum(dist - dead, 0.0) / max(tilt_eps, 1e-9)
        w = np.exp(-(t**2))
        return np.maximum(w * val + (1.0 - w) * g_bar, g_floor)

    holdout = base.chart.sample(256, rng_seed + 101)
    f_h, resid_h, scale_h, q_h = model_conformal_factors(base, holdout)
    ok = np.isfinite(f_h) & (f_h > 0) & (f_h < 1) & (resid_h <= 1e-6 * scale_h)
    resid = float(
        np.max(np.abs(evaluate_blend(q_h[ok]) - (-np.log(f_h[ok]))))
    )
    return GExtension(evaluate_blend, "blend", None, {"extension_residual": resid})


def build_mapping_torus(
    base: ContactModel,
    mode: str = "auto",
    tilt_eps: float = 0.1,
    samples: int = 2048,
    rng_seed: int = 0,
) -> MappingTorusModel:
    return MappingTorusModel(
        base=base,
        G=extend_G(base, mode=mode, samples=samples, rng_seed=rng_seed, tilt_eps=tilt_eps),
        tilt_eps=tilt_eps,
    )


# -- descent of the rescaled form ---------------------------------------------

def descent_residuals(
    model: MappingTorusModel, s: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """Componentwise defect of the glued form at points (s, x).

    Pulls e^s alpha back through the gluing map (s, x) -> (s + G(phi(x)),
    phi(x)) using the full (dim+1)-dimensional Jacobian, including the dG
    row, and compares against e^s alpha itself.
    """
    base = model.base
    if base.phi is None:
        raise ModelError("model has no map")
    x = np.atleast_2d(np.asarray(x, float))
    s = np.asarray(s, float).reshape(-1)
    if s.size != x.shape[0]:
        raise ValueError("s and x must have matching lengths")
    d = x.shape[1]
    codomain = base.codomain

    q_raw = np.atleast_2d(base.phi(x))
    q = codomain.reduce(q_raw)
    g_img = model.G(q)
    a_here = np.atleast_2d(base.alpha(x))
    a_img = np.atleast_2d(base.codomain_alpha(q))
    jac = base.phi.jac(x)

    if model.G.constant is not None:
        grad_g = np.zeros((x.shape[0], d))
    else:
        h = 1e-6
        grad_g = np.empty((x.shape[0], d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            gp = model.G(codomain.reduce(np.atleast_2d(base.phi(x + e))))
            gm = model.G(codomain.reduce(np.atleast_2d(base.phi(x - e))))
            grad_g[:, j] = (gp - gm) / (2.0 * h)

    n = x.shape[0]
    lam_img = np.zeros((n, d + 1))
    lam_img[:, 1:] = np.exp(s + g_img)[:, None] * a_img
    jac_full = np.zeros((n, d + 1, d + 1))
    jac_full[:, 0, 0] = 1.0
    jac_full[:, 0, 1:] = grad_g
    jac_full[:, 1:, 1:] = jac
    pulled = np.einsum("ni,nij->nj", lam_img, jac_full)

    rhs = np.zeros((n, d + 1))
    rhs[:, 1:] = np.exp(s)[:, None] * a_here
    return np.max(np.abs(pulled - rhs), axis=1)


def descent_check(
    model: MappingTorusModel,
    samples: int = 1000,
    tol: float = 1e-9,
    rng_seed: int = 0,
) -> float:
    """Max descent residual over sampled (s, x); raises above tolerance."""
    chart = model.base.chart
    eng = qmc.Halton(d=chart.dim + 1, scramble=True, seed=rng_seed)
    u = eng.random(samples)
    lo, hi = chart.lows(), chart.highs()
    x = lo + u[:, : chart.dim] * (hi - lo)
    if model.G.constant is not None:
        s_ref = model.G.constant
    else:
        s_ref = float(
            np.mean(model.G(model.base.codomain.reduce(np.atleast_2d(model.base.phi(x)))))
        )
    s = u[:, chart.dim] * s_ref
    residual = float(np.max(descent_residuals(model, s, x)))
    if residual >= tol:
        raise DescentViolation(residual, tol)
    return residual


# -- fundamental domain and boundary ------------------------------------------

def normalize_fundamental(
    s: float, x: np.ndarray, model: MappingTorusModel
) -> FundamentalDomainPoint:
    """Reduce (s, x) into the fundamental domain 0 <= s < G(x).

    Climbing past the roof over x steps back through the map's inverse
    (the roof over a point in the image is glued to the floor over its
    preimage); descending below the floor applies the map forward.
    """
    base = model.base
    if not base.is_self_map or base.phi is None:
        raise LeftDomain("reduction needs a self-map on a single chart")
    pt = base.chart.reduce(np.asarray(x, float).reshape(1, -1))[0]
    s = float(s)
    for _ in range(100_000):
        g_here = float(model.G(pt[None, :])[0])
        if 0.0 <= s < g_here:
            return FundamentalDomainPoint(s, pt)
        if s < 0.0:
            nxt = base.chart.reduce(np.atleast_2d(base.phi(pt[None, :])))[0]
            s += float(model.G(nxt[None, :])[0])
            pt = nxt
        else:
            if base.phi.inverse is None:
                raise LeftDomain("no inverse available for upward reduction")
            try:
                prev = np.atleast_2d(base.phi.inverse(pt[None, :]))[0]
            except OutOfChart as exc:
                raise LeftDomain(str(exc)) from exc
            s -= g_here
            pt = base.chart.reduce(prev[None, :])[0]
    raise LeftDomain("reduction failed to terminate")


def in_tilt_region_P(s: float, x: np.ndarray, model: MappingTorusModel) -> bool:
    """Membership in the removed collar wedge -eps*s/G < tau <= 0.

    tau is the normalized sup-radius of the interval factors minus 1, so
    the collar is the shell of width ``tilt_eps`` inside the boundary.
    Points deeper than the collar are trivially outside.
    """
    eps = model.tilt_eps
    pt = np.asarray(x, float).reshape(1, -1)
    tau = float(np.minimum(model.base.chart.normalized_radius(pt), 1.0)[0]) - 1.0
    if tau < -eps:
        return False
    g_here = float(model.G(pt)[0])
    return (tau > -eps * float(s) / g_here) and (tau <= 0.0)


def boundary_transversality_check(
    model: MappingTorusModel, samples: int = 256, rng_seed: int = 0
) -> float:
    """Minimum pairing of the flow direction with outward conormals.

    Tilted collar faces contribute eps/G; roof faces contribute exactly 1
    (the flow component of ds - dG).  A zero tilt gives a tangency and a
    zero margin.
    """
    if model.tilt_eps == 0.0:
        return 0.0
    chart = model.base.chart
    pts = chart.sample(samples, rng_seed)
    # Push the interval coordinates out into the collar shell.
    r = np.maximum(chart.normalized_radius(pts), 1e-12)
    target = 1.0 - model.tilt_eps * np.linspace(0.0, 1.0, len(pts))
    scale = target / r
    collar = pts.copy()
    for i, c in enumerate(chart.coords):
        if c.is_periodic:
            continue
        mid = 0.5 * (c.lo + c.hi)
        collar[:, i] = mid + (collar[:, i] - mid) * scale
    g_vals = model.G(collar)
    tilted = float(np.min(model.tilt_eps / g_vals))
    return min(tilted, 1.0)


# -- attractor iteration ------------------------------------------------------

def _require_self_map(model: ContactModel) -> None:
    if model.phi is None or not model.is_self_map:
        raise ModelError("attractor iteration needs a self-map model")


def _apply_map(model: ContactModel, pts: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1 or len(pts) < 65_536:
        return model.chart.reduce(np.atleast_2d(model.phi(pts)))
    chunks = np.array_split(pts, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        outs = list(
            pool.map(lambda c: model.chart.reduce(np.atleast_2d(model.phi(c))), chunks)
        )
    return np.vstack(outs)


def _dedup(pts: np.ndarray, threshold: float) -> np.ndarray:
    if threshold <= 0 or len(pts) == 0:
        return pts
    keys = np.round(pts / threshold).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(idx)]


def _sample_meta(model: ContactModel, seeds: int, section_theta: float | None) -> dict:
    chart = model.chart
    periodic_idx = [i for i, c in enumerate(chart.coords) if c.is_periodic]
    return {
        "model": model.name,
        "names": list(chart.names),
        "periodic_idx": periodic_idx,
        "interval_idx": [i for i in range(chart.dim) if i not in periodic_idx],
        "periods": [c.period for c in chart.coords if c.is_periodic],
        "seeds": seeds,
        "section_theta": section_theta,
    }


def iterate_attractor(
    model: ContactModel,
    depth: int,
    seeds: int,
    rng_seed: int = 0,
    dedup: float = 1e-9,
    threads: int = 1,
) -> SkeletonSample:
    """Push a quasi-random cloud through the map ``depth`` times.

    The image cloud lies in the depth-fold image of the chart, which
    contains the attractor and converges to it in Hausdorff distance.
    """
    _require_self_map(model)
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    pts = model.chart.sample(seeds, rng_seed)
    for _ in range(depth):
        pts = _apply_map(model, pts, threads)
    pts = _dedup(pts, dedup)
    return SkeletonSample(points=pts, depth=depth, meta=_sample_meta(model, seeds, None))


def section_cloud(
    model: ContactModel,
    depth: int,
    seeds_per_branch: int,
    theta0: float = 0.0,
    rng_seed: int = 0,
    threads: int = 1,
) -> SkeletonSample:
    """Depth-m image cloud restricted exactly to a circle-factor fiber.

    Seeds the angle coordinate at the multiplier^depth preimages of
    ``theta0``, so the iterated cloud is the full cross-section of the
    depth-m image, free of slab-thickness smearing.
    """
    _require_self_map(model)
    chart = model.chart
    periodic_idx = [i for i, c in enumerate(chart.coords) if c.is_periodic]
    if len(periodic_idx) != 1:
        raise ModelError("section seeding needs exactly one circle factor")
    mult = int(model.params.get("angle_multiplier", 0))
    if mult < 1:
        raise ModelError("model does not expose an angle multiplier")
    pi_idx = periodic_idx[0]
    period = chart.coords[pi_idx].period
    branches = mult**depth
    angles = (theta0 + period * np.arange(branches)) / branches

    interval_idx = [i for i in range(chart.dim) if i != pi_idx]
    eng = qmc.Halton(d=len(interval_idx), scramble=True, seed=rng_seed)
    u = eng.random(seeds_per_branch)
    block = np.empty((seeds_per_branch, chart.dim))
    for col, i in enumerate(interval_idx):
        c = chart.coords[i]
        block[:, i] = c.lo + u[:, col] * (c.hi - c.lo)

    pts = np.tile(block, (branches, 1))
    pts[:, pi_idx] = np.repeat(angles, seeds_per_branch)
    for _ in range(depth):
        pts = _apply_map(model, pts, threads)
    return SkeletonSample(
        points=pts,
        depth=depth,
        meta=_sample_meta(model, branches * seeds_per_branch, theta0),
    )


def cross_section(
    sample: SkeletonSample, theta0: float, thickness: float
) -> np.ndarray:
    """Interval-coordinate projection of sample points near a fiber angle."""
    meta = sample.meta
    periodic_idx = meta.get("periodic_idx", [])
    if len(periodic_idx) != 1:
        raise ModelError("cross sections need exactly one circle factor")
    period = meta["periods"][0]
    ang = np.mod(sample.points[:, periodic_idx[0]] - theta0, period)
    dist = np.minimum(ang, period - ang)
    mask = dist < thickness
    if not mask.any():
        raise EmptySection(f"no points within {thickness} of the fiber angle")
    return sample.points[mask][:, meta["interval_idx"]]


def count_clusters(points: np.ndarray, gap: float) -> int:
    """Single-linkage component count at the given gap threshold."""
    pts = np.atleast_2d(np.asarray(points, float))
    n = len(pts)
    if n == 0:
        raise ValueError("empty point set")
    pairs = cKDTree(pts).query_pairs(r=gap, output_type="ndarray")
    if len(pairs) == 0:
        return n
    adj = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    ncomp, _ = connected_components(adj, directed=False)
    return int(ncomp)


def suggested_section_gap(model: ContactModel, depth: int) -> float:
    """Linkage threshold between sibling-cluster spacing and in-cluster
    spacing, from the model's slower contraction rate."""
    rate = model.params.get("rate_y")
    if rate is None:
        raise ModelError("model does not expose per-coordinate contraction rates")
    return 0.25 * float(rate) ** max(depth - 1, 0)


# -- box counting -------------------------------------------------------------

def box_counting_dimension(
    points: np.ndarray,
    scales: Sequence[float],
    origin: Sequence[float] | None = None,
) -> BoxCountResult:
    """Occupied-box counts on origin-anchored grids and the log-log slope."""
    pts = np.atleast_2d(np.asarray(points, float))
    if len(pts) == 0:
        raise ValueError("empty cloud")
    scales = sorted((float(s) for s in scales), reverse=True)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    if any(s <= 0 for s in scales):
        raise ValueError("scales must be positive")
    if len(pts) > 1 and float(np.max(np.ptp(pts, axis=0))) == 0.0:
        raise DegenerateCloud("all points coincide")
    org = (
        np.zeros(pts.shape[1])
        if origin is None
        else np.asarray(origin, float).reshape(-1)
    )
    counts = []
    for s in scales:
        cells = np.floor((pts - org) / s).astype(np.int64)
        counts.append(int(np.unique(cells, axis=0).shape[0]))
    xs = np.log(1.0 / np.asarray(scales))
    ys = np.log(np.asarray(counts, float))
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return BoxCountResult(
        scales=tuple(scales), counts=tuple(counts), slope=float(slope), r2=float(r2)
    )


def _default_section_scales(rate: float, depth: int) -> tuple[float, ...]:
    if depth < 2:
        return (0.25, 0.125, 0.0625)
    top = max(2, min(depth - 1, 7))
    return tuple(0.5 * rate**j for j in range(1, top + 1))


_DEFAULT_CLOUD_SCALES = (0.25, 0.125, 0.0625, 0.03125)


def skeleton_analysis(
    model: ContactModel,
    depth: int,
    seeds: int,
    scales: Sequence[float] | None = None,
    rng_seed: int = 0,
    theta0: float = 0.0,
    threads: int = 1,
) -> SkeletonAnalysis:
    """Dimension estimate for the skeleton of the associated mapping torus.

    The suspension direction contributes exactly 1.  Models with a single
    circle factor are measured through the fiber cross-section (the circle
    direction contributes another 1); otherwise the full attractor cloud is
    box-counted.
    """
    chart = model.chart
    periodic_idx = [i for i, c in enumerate(chart.coords) if c.is_periodic]
    solenoid_like = len(periodic_idx) == 1 and model.params.get("angle_multiplier")
    if solenoid_like:
        mult = int(model.params["angle_multiplier"])
        branches = max(1, mult**depth)
        per_branch = max(8, seeds // branches)
        sample = section_cloud(
            model, depth, per_branch, theta0=theta0, rng_seed=rng_seed, threads=threads
        )
        pts2 = sample.points[:, sample.meta["interval_idx"]]
        rate = float(model.params.get("rate_x", model.params.get("rate", 0.5)))
        use_scales = tuple(scales) if scales else _default_section_scales(rate, depth)
        lows = np.array(
            [chart.coords[i].lo for i in sample.meta["interval_idx"]]
        )
        box = box_counting_dimension(pts2, use_scales, origin=lows)
        clusters = None
        if "rate_y" in model.params:
            # Keep enough points per branch that in-cluster spacing stays
            # below the linkage gap at the current depth.
            target = min(len(pts2), max(4096, 512 * branches))
            sub = pts2[:: max(1, len(pts2) // target)]
            clusters = count_clusters(sub, suggested_section_gap(model, depth))
        return SkeletonAnalysis(
            estimate=2.0 + box.slope,
            route="section",
            box=box,
            section_clusters=clusters,
            depth=depth,
            seeds=seeds,
        )

    sample = iterate_attractor(model, depth, seeds, rng_seed=rng_seed, threads=threads)
    use_scales = tuple(scales) if scales else _DEFAULT_CLOUD_SCALES
    box = box_counting_dimension(sample.points, use_scales, origin=chart.lows())
    return SkeletonAnalysis(
        estimate=1.0 + box.slope,
        route="cloud",
        box=box,
        section_clusters=None,
        depth=depth,
        seeds=seeds,
    )


def skeleton_dimension(
    model: ContactModel,
    depth: int,
    seeds: int,
    scales: Sequence[float] | None = None,
    rng_seed: int = 0,
    theta0: float = 0.0,
    threads: int = 1,
) -> float:
    return skeleton_analysis(
        model, depth, seeds, scales=scales, rng_seed=rng_seed, theta0=theta0, threads=threads
    ).estimate


def export_cloud_csv(
    points: np.ndarray,
    names: Sequence[str],
    path: str,
    max_rows: int = 10_000_000,
) -> int:
    """Write a cloud as CSV (one point per row); uniform stride subsampling
    keeps the file at or below ``max_rows`` rows.  Returns rows written."""
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[1] != len(names):
        raise ValueError("column names do not match point dimension")
    if len(pts) > max_rows:
        stride = int(math.ceil(len(pts) / max_rows))
        pts = pts[::stride]
    header = ",".join(names)
    np.savetxt(path, pts, delimiter=",", header=header, comments="", fmt="%.17g")
    return len(pts)
