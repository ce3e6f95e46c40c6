"""Numeric differential-geometry kernel.

Evaluates contact forms on box-with-circle-factor charts, pulls back
1-forms through smooth maps (analytic Jacobians for the built-in models,
central finite differences otherwise), and certifies the three contraction
axioms by sampling: image interiority, local/sampled injectivity, and
conformal rescaling of the contact form by a factor strictly inside (0, 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .exactlin import IntMatrix, determinant
from .spectrum_search import SpectrumCertificate

__all__ = [
    "Coord",
    "Chart",
    "OneForm",
    "SmoothMap",
    "ContactModel",
    "ContractionCertificate",
    "OutOfChart",
    "NotConformal",
    "DegenerateForm",
    "UnknownModel",
    "EigenFailure",
    "ModelError",
    "eval_pullback",
    "model_pullback",
    "conformal_factor",
    "contact_check",
    "certify_contraction",
    "builtin_model",
    "anosov_model",
    "BUILTIN_MODELS",
]

TWO_PI = 2.0 * math.pi


class OutOfChart(Exception):
    """A mapped point left the chart box along a non-periodic coordinate."""


class NotConformal(Exception):
    """Pullback is not proportional to the reference form at the point."""


class DegenerateForm(Exception):
    """The reference form vanishes at the point (never for a contact form)."""


class UnknownModel(Exception):
    """Requested built-in model name does not exist."""


class EigenFailure(Exception):
    """Numeric eigendata does not satisfy the required pullback relations."""


class ModelError(Exception):
    """Model is unusable for the requested certification."""


@dataclass(frozen=True)
class Coord:
    """One chart coordinate: either an interval factor or a circle factor."""

    name: str
    lo: float = 0.0
    hi: float = 0.0
    period: float | None = None

    @classmethod
    def interval(cls, name: str, lo: float, hi: float) -> "Coord":
        return cls(name, float(lo), float(hi), None)

    @classmethod
    def circle(cls, name: str, period: float = 1.0) -> "Coord":
        return cls(name, 0.0, float(period), float(period))

    @property
    def is_periodic(self) -> bool:
        return self.period is not None


@dataclass(frozen=True)
class Chart:
    """Product chart: intervals and circle factors, one per coordinate."""

    coords: tuple[Coord, ...]
    interior_margin: float = 1e-3

    def __post_init__(self) -> None:
        if self.dim < 3 or self.dim % 2 == 0:
            raise ValueError("chart dimension must be odd and at least 3")
        for c in self.coords:
            if c.is_periodic:
                if c.period <= 0:
                    raise ValueError(f"coordinate {c.name}: period must be positive")
            elif not c.hi > c.lo:
                raise ValueError(f"coordinate {c.name}: degenerate interval")
        if self.interior_margin <= 0:
            raise ValueError("interior_margin must be positive")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coords)

    def periodic_mask(self) -> np.ndarray:
        return np.array([c.is_periodic for c in self.coords])

    def periods(self) -> np.ndarray:
        return np.array([c.period if c.is_periodic else np.nan for c in self.coords])

    def lows(self) -> np.ndarray:
        return np.array([0.0 if c.is_periodic else c.lo for c in self.coords])

    def highs(self) -> np.ndarray:
        return np.array(
            [c.period if c.is_periodic else c.hi for c in self.coords]
        )

    def reduce(self, pts: np.ndarray) -> np.ndarray:
        """Wrap periodic coordinates into [0, period)."""
        out = np.array(pts, dtype=float, copy=True)
        flat = np.atleast_2d(out)
        for i, c in enumerate(self.coords):
            if c.is_periodic:
                flat[:, i] = np.mod(flat[:, i], c.period)
        return out

    def interior_margins(self, pts: np.ndarray) -> np.ndarray:
        """Distance to the boundary along interval coordinates (min over them).

        Periodic coordinates impose no constraint.  Non-finite coordinates
        yield -inf so they register as violations.
        """
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        margins = np.full(p.shape[0], np.inf)
        for i, c in enumerate(self.coords):
            if c.is_periodic:
                continue
            d = np.minimum(p[:, i] - c.lo, c.hi - p[:, i])
            d = np.where(np.isfinite(p[:, i]), d, -np.inf)
            margins = np.minimum(margins, d)
        bad = ~np.all(np.isfinite(p), axis=1)
        margins[bad] = -np.inf
        return margins

    def contains(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        return self.interior_margins(pts) >= -tol

    def normalized_radius(self, pts: np.ndarray) -> np.ndarray:
        """Sup-norm radius of the interval factors, rescaled so the boundary
        sits at radius 1."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.zeros(p.shape[0])
        for i, c in enumerate(self.coords):
            if c.is_periodic:
                continue
            mid = 0.5 * (c.lo + c.hi)
            half = 0.5 * (c.hi - c.lo)
            r = np.maximum(r, np.abs(p[:, i] - mid) / half)
        return r

    def periodic_distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Euclidean distance with wrap-around on circle factors."""
        pa = np.atleast_2d(np.asarray(a, dtype=float))
        pb = np.atleast_2d(np.asarray(b, dtype=float))
        d = np.abs(pa - pb)
        for i, c in enumerate(self.coords):
            if c.is_periodic:
                m = np.mod(d[:, i], c.period)
                d[:, i] = np.minimum(m, c.period - m)
        return np.linalg.norm(d, axis=1)

    def sample(self, n: int, rng_seed: int = 0) -> np.ndarray:
        """Low-discrepancy (scrambled Halton) points covering the chart."""
        eng = qmc.Halton(d=self.dim, scramble=True, seed=rng_seed)
        u = eng.random(n)
        lo = self.lows()
        hi = self.highs()
        return lo + u * (hi - lo)

    def probe_points(self, cap: int = 8192) -> np.ndarray:
        """Deterministic corner/edge probes: interval coordinates at
        lo/mid/hi, circle factors at four phases."""
        axes = []
        for c in self.coords:
            if c.is_periodic:
                axes.append([0.0, c.period / 4, c.period / 2, 3 * c.period / 4])
            else:
                axes.append([c.lo, 0.5 * (c.lo + c.hi), c.hi])
        pts = np.array(list(itertools.product(*axes)))
        if len(pts) > cap:
            stride = int(np.ceil(len(pts) / cap))
            pts = pts[::stride]
        return pts

    def embed_periodic(self, pts: np.ndarray) -> np.ndarray:
        """Isометric-to-second-order embedding of circle factors into the
        plane, for KD-tree neighbor queries at small radii."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        cols = []
        for i, c in enumerate(self.coords):
            if c.is_periodic:
                ang = TWO_PI * p[:, i] / c.period
                scale = c.period / TWO_PI
                cols.append(scale * np.cos(ang))
                cols.append(scale * np.sin(ang))
            else:
                cols.append(p[:, i])
        return np.column_stack(cols)


@dataclass(frozen=True)
class OneForm:
    """Coefficient evaluator of a 1-form in chart coordinates.

    The evaluator accepts (..., dim)-shaped points and returns coefficients
    of the same shape.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(pts, dtype=float)), dtype=float)


@dataclass(frozen=True)
class SmoothMap:
    """Smooth map with analytic Jacobian when available, else central FD."""

    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float = 1e-5

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.forward(np.asarray(pts, dtype=float)), dtype=float)

    def jac(self, pts: np.ndarray, h: float | None = None) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.jacobian is not None and h is None:
            return np.asarray(self.jacobian(pts), dtype=float)
        return fd_jacobian(self.forward, pts, h or self.fd_step)


def fd_jacobian(fn: Callable, pts: np.ndarray, h: float) -> np.ndarray:
    """Second-order central-difference Jacobian, batched."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    n, d = p.shape
    out = np.empty((n, d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        fp = np.atleast_2d(np.asarray(fn(p + e), dtype=float))
        fm = np.atleast_2d(np.asarray(fn(p - e), dtype=float))
        out[:, :, j] = (fp - fm) / (2.0 * h)
    if np.asarray(pts).ndim == 1:
        return out[0]
    return out


@dataclass(frozen=True)
class ContactModel:
    """Chart, contact form, and (optionally) a candidate contraction map.

    Maps that land in a differently-parameterized neighborhood carry a
    separate target chart and the coordinate expression of the same form
    there; self-maps leave both unset.
    """

    name: str
    chart: Chart
    alpha: OneForm
    phi: SmoothMap | None = None
    params: dict = field(default_factory=dict)
    target_chart: Chart | None = None
    target_alpha: OneForm | None = None
    g_extension: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def codomain(self) -> Chart:
        return self.target_chart or self.chart

    @property
    def codomain_alpha(self) -> OneForm:
        return self.target_alpha or self.alpha

    @property
    def is_self_map(self) -> bool:
        return self.target_chart is None


@dataclass(frozen=True)
class ContractionCertificate:
    """Sampled evidence for the three contraction axioms.

    The injectivity part of the second axiom is a sampled check: it can
    falsify but not prove, and is reported as "no violation found".
    """

    model: str
    sample_count: int
    tol: float
    d1: dict
    d2: dict
    d3: dict
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return bool(self.d1["pass"] and self.d2["pass"] and self.d3["pass"])

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "sample_count": self.sample_count,
            "tol": self.tol,
            "d1": dict(self.d1),
            "d2": dict(self.d2),
            "d3": dict(self.d3),
            "passed": self.passed,
            "notes": list(self.notes),
        }


# -- pullback and conformal factor -------------------------------------------

def eval_pullback(
    map_: SmoothMap,
    form: OneForm,
    p: np.ndarray,
    codomain: Chart | None = None,
) -> np.ndarray:
    """Pull a 1-form back through a map: Jacobian-transpose applied to the
    form evaluated at the image point."""
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    batch = np.atleast_2d(pts)
    q = np.atleast_2d(map_(batch))
    if codomain is not None:
        if np.any(~np.isfinite(q)) or np.any(codomain.interior_margins(q) < -1e-12):
            raise OutOfChart("image point leaves the chart box")
        q = codomain.reduce(q)
    w = np.atleast_2d(form(q))
    jac = map_.jac(batch)
    out = np.einsum("ni,nij->nj", w, jac)
    return out[0] if single else out


def model_pullback(model: ContactModel, pts: np.ndarray) -> np.ndarray:
    if model.phi is None:
        raise ModelError("model has no map")
    return eval_pullback(model.phi, model.codomain_alpha, pts, model.codomain)


def _proportionality(pb: np.ndarray, base: np.ndarray):
    denom = np.einsum("ni,ni->n", base, base)
    num = np.einsum("ni,ni->n", pb, base)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = num / denom
        resid = np.linalg.norm(pb - f[:, None] * base, axis=1)
    return f, resid, np.sqrt(denom), np.linalg.norm(pb, axis=1)


def conformal_factor(
    map_: SmoothMap,
    form: OneForm,
    p: np.ndarray,
    tol: float = 1e-8,
    target_form: OneForm | None = None,
    codomain: Chart | None = None,
) -> float:
    """Least-squares scalar f with pullback = f * form(p), certified by a
    residual below tol times the participating norms."""
    pt = np.asarray(p, dtype=float)
    base = np.atleast_2d(form(pt))
    pb = np.atleast_2d(eval_pullback(map_, target_form or form, pt, codomain))
    f, resid, nbase, npb = _proportionality(pb, base)
    if nbase[0] <= tol:
        raise DegenerateForm("reference form vanishes at the point")
    if resid[0] > tol * max(npb[0], nbase[0]):
        raise NotConformal(
            f"pullback deviates from proportionality by {resid[0]:.3e}"
        )
    return float(f[0])


def model_conformal_factors(model: ContactModel, pts: np.ndarray, tol: float = 1e-8):
    """Vectorized conformal factors with residual diagnostics (no raising)."""
    base = np.atleast_2d(model.alpha(pts))
    if model.phi is None:
        raise ModelError("model has no map")
    batch = np.atleast_2d(np.asarray(pts, dtype=float))
    with np.errstate(all="ignore"):
        q = np.atleast_2d(model.phi(batch))
        w = np.atleast_2d(model.codomain_alpha(model.codomain.reduce(q)))
        jac = model.phi.jac(batch)
        pb = np.einsum("ni,nij->nj", w, jac)
    f, resid, nbase, npb = _proportionality(pb, base)
    scale = np.maximum(np.maximum(npb, nbase), 1e-300)
    return f, resid, scale, q


# -- contact condition --------------------------------------------------------

def _merge_indices(left: tuple, right: tuple):
    merged: list[int] = []
    sign = 1
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] < right[j]:
            merged.append(left[i])
            i += 1
        elif left[i] > right[j]:
            if (len(left) - i) % 2 == 1:
                sign = -sign
            merged.append(right[j])
            j += 1
        else:
            return None, 0
    merged.extend(left[i:])
    merged.extend(right[j:])
    return tuple(merged), sign


def _wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for idx_a, va in a.items():
        for idx_b, vb in b.items():
            merged, sign = _merge_indices(idx_a, idx_b)
            if merged is None:
                continue
            out[merged] = out.get(merged, 0.0) + sign * va * vb
    return out


def contact_check(form: OneForm, p: np.ndarray, h: float = 1e-5) -> float:
    """Top-form coefficient of alpha wedge (d alpha)^((dim-1)/2) at a point,
    with the exterior derivative taken by central finite differences."""
    pt = np.asarray(p, dtype=float)
    d = pt.size
    m = (d - 1) // 2
    grad = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        grad[i] = (form(pt + e) - form(pt - e)) / (2.0 * h)
    two: dict = {}
    for i in range(d):
        for j in range(i + 1, d):
            c = grad[i][j] - grad[j][i]
            if c != 0.0:
                two[(i, j)] = c
    power = two
    for _ in range(m - 1):
        power = _wedge(power, two)
    one = {(i,): float(v) for i, v in enumerate(form(pt)) if v != 0.0}
    top = _wedge(one, power)
    return float(top.get(tuple(range(d)), 0.0))


# -- contraction certification ------------------------------------------------

def certify_contraction(
    model: ContactModel,
    samples: int = 10_000,
    tol: float = 1e-8,
    rng_seed: int = 0,
) -> ContractionCertificate:
    """Sample the chart (plus deterministic corner probes) and check the
    three contraction axioms; per-axiom verdicts are recorded, not thrown."""
    if model.phi is None:
        raise ModelError("model has no map to certify")
    chart = model.chart
    codomain = model.codomain
    pts = np.vstack([chart.sample(samples, rng_seed), chart.probe_points()])
    notes: list[str] = []

    with np.errstate(all="ignore"):
        q = np.atleast_2d(model.phi(pts))
    finite_img = np.all(np.isfinite(q), axis=1)
    if not finite_img.all():
        notes.append(f"{int((~finite_img).sum())} samples mapped to non-finite points")

    margins = codomain.interior_margins(q)
    d1_min = float(np.min(margins))
    d1 = {
        "min_margin": d1_min,
        "required_margin": codomain.interior_margin,
        "pass": bool(finite_img.all() and d1_min >= codomain.interior_margin),
    }

    with np.errstate(all="ignore"):
        jac = model.phi.jac(pts)
        dets = np.linalg.det(jac)
    finite_det = np.isfinite(dets)
    det_min = float(np.min(np.abs(dets[finite_det]))) if finite_det.any() else 0.0
    collisions = 0
    good = finite_img & finite_det
    if good.any():
        qr = codomain.reduce(q[good])
        dom = pts[good]
        tree = cKDTree(codomain.embed_periodic(qr))
        pairs = tree.query_pairs(r=tol * 1.1, output_type="ndarray")
        if len(pairs):
            img_d = codomain.periodic_distance(qr[pairs[:, 0]], qr[pairs[:, 1]])
            dom_d = chart.periodic_distance(dom[pairs[:, 0]], dom[pairs[:, 1]])
            collisions = int(np.sum((img_d < tol) & (dom_d >= 10.0 * tol)))
    d2 = {
        "min_abs_det": det_min,
        "collisions": collisions,
        "pass": bool(finite_det.all() and det_min >= tol and collisions == 0),
    }

    f, resid, scale, _ = model_conformal_factors(model, pts, tol)
    ok = np.isfinite(f) & (resid <= tol * scale) & (f > 0.0) & (f < 1.0)
    valid = np.isfinite(f) & (f > 0.0)
    g = -np.log(f[valid]) if valid.any() else np.array([])
    d3 = {
        "pass": bool(ok.all()),
        "factor_min": float(np.min(f[np.isfinite(f)])) if np.isfinite(f).any() else math.nan,
        "factor_max": float(np.max(f[np.isfinite(f)])) if np.isfinite(f).any() else math.nan,
        "max_residual": float(np.max(resid[np.isfinite(resid)]))
        if np.isfinite(resid).any()
        else math.nan,
        "g_min": float(g.min()) if g.size else math.nan,
        "g_max": float(g.max()) if g.size else math.nan,
    }

    return ContractionCertificate(
        model=model.name,
        sample_count=len(pts),
        tol=tol,
        d1=d1,
        d2=d2,
        d3=d3,
        notes=tuple(notes),
    )


# -- built-in models ----------------------------------------------------------

def _jet_space_model(params: dict) -> ContactModel:
    chart = Chart(
        (
            Coord.interval("z", -1.0, 1.0),
            Coord.circle("q", 1.0),
            Coord.interval("p", -1.0, 1.0),
        )
    )

    def alpha(pts):
        p = np.atleast_2d(pts)
        out = np.zeros_like(p)
        out[:, 0] = 1.0
        out[:, 1] = -p[:, 2]
        return out if np.asarray(pts).ndim > 1 else out[0]

    def forward(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.column_stack([p[:, 0] / 2.0, p[:, 1], p[:, 2] / 2.0])
        return out if np.asarray(pts).ndim > 1 else out[0]

    jac_const = np.diag([0.5, 1.0, 0.5])

    def jacobian(pts):
        p = np.atleast_2d(pts)
        out = np.broadcast_to(jac_const, (p.shape[0], 3, 3)).copy()
        return out if np.asarray(pts).ndim > 1 else out[0]

    def inverse(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.column_stack([2.0 * p[:, 0], p[:, 1], 2.0 * p[:, 2]])
        if np.any(np.abs(out[:, [0, 2]]) > 1.0 + 1e-9):
            raise OutOfChart("preimage leaves the chart")
        return out if np.asarray(pts).ndim > 1 else out[0]

    return ContactModel(
        name="jet_space",
        chart=chart,
        alpha=OneForm(alpha, "dz - p dq"),
        phi=SmoothMap(forward, jacobian, inverse),
        params={"rate": 0.5, "angle_multiplier": 1, **params},
    )


def _solenoid_model(params: dict) -> ContactModel:
    chart = Chart(
        (
            Coord.circle("theta", TWO_PI),
            Coord.interval("x", -1.0, 1.0),
            Coord.interval("y", -1.0, 1.0),
        )
    )

    def alpha(pts):
        p = np.atleast_2d(pts)
        out = np.zeros_like(p)
        out[:, 0] = p[:, 2]
        out[:, 1] = 1.0
        return out if np.asarray(pts).ndim > 1 else out[0]

    def forward(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        th = p[:, 0]
        out = np.column_stack(
            [
                2.0 * th,
                p[:, 1] / 10.0 + np.cos(th) / 2.0,
                p[:, 2] / 20.0 + np.sin(th) / 4.0,
            ]
        )
        return out if np.asarray(pts).ndim > 1 else out[0]

    def jacobian(pts):
        p = np.atleast_2d(pts)
        th = p[:, 0]
        n = p.shape[0]
        out = np.zeros((n, 3, 3))
        out[:, 0, 0] = 2.0
        out[:, 1, 0] = -np.sin(th) / 2.0
        out[:, 1, 1] = 0.1
        out[:, 2, 0] = np.cos(th) / 4.0
        out[:, 2, 2] = 0.05
        return out if np.asarray(pts).ndim > 1 else out[0]

    def inverse(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        th2 = np.mod(p[:, 0], TWO_PI)
        out = np.empty_like(p)
        found = np.zeros(p.shape[0], dtype=bool)
        for branch in (0.0, math.pi):
            th = th2 / 2.0 + branch
            x = (p[:, 1] - np.cos(th) / 2.0) * 10.0
            y = (p[:, 2] - np.sin(th) / 4.0) * 20.0
            ok = (~found) & (np.abs(x) <= 1.0 + 1e-9) & (np.abs(y) <= 1.0 + 1e-9)
            out[ok, 0] = th[ok]
            out[ok, 1] = x[ok]
            out[ok, 2] = y[ok]
            found |= ok
        if not found.all():
            raise OutOfChart("point is outside the image tube")
        return out if np.asarray(pts).ndim > 1 else out[0]

    return ContactModel(
        name="solenoid",
        chart=chart,
        alpha=OneForm(alpha, "dx + y dtheta"),
        phi=SmoothMap(forward, jacobian, inverse),
        params={"rate_x": 0.1, "rate_y": 0.05, "angle_multiplier": 2, **params},
    )


def _transverse_knot_model(params: dict) -> ContactModel:
    c = float(params.get("c", 0.1))
    delta = float(params.get("delta", 1e-3))
    eps = float(params.get("eps", 0.5))
    if c <= 0 or delta <= 0 or eps <= 0:
        raise ValueError("transverse_knot parameters must be positive")
    chart = Chart(
        (
            Coord.circle("theta", 1.0),
            Coord.interval("x", -1.0, 1.0),
            Coord.interval("y", -1.0, 1.0),
        )
    )
    target = Chart(
        (
            Coord.circle("theta_bar", 1.0),
            Coord.interval("x_bar", -eps, eps),
            Coord.interval("y_bar", -eps, eps),
        )
    )

    def alpha(pts):
        p = np.atleast_2d(pts)
        out = np.zeros_like(p)
        out[:, 0] = 1.0
        out[:, 1] = -p[:, 2]
        return out if np.asarray(pts).ndim > 1 else out[0]

    def alpha_bar(pts):
        p = np.atleast_2d(pts)
        out = np.zeros_like(p)
        out[:, 0] = p[:, 2]
        out[:, 1] = 1.0
        return out if np.asarray(pts).ndim > 1 else out[0]

    def forward(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        with np.errstate(all="ignore"):
            out = np.column_stack(
                [
                    p[:, 0] - c * p[:, 1] / delta,
                    c * p[:, 1],
                    c * delta / (c - delta * p[:, 2]),
                ]
            )
        return out if np.asarray(pts).ndim > 1 else out[0]

    def jacobian(pts):
        p = np.atleast_2d(pts)
        n = p.shape[0]
        out = np.zeros((n, 3, 3))
        out[:, 0, 0] = 1.0
        out[:, 0, 1] = -c / delta
        out[:, 1, 1] = c
        with np.errstate(all="ignore"):
            out[:, 2, 2] = c * delta**2 / (c - delta * p[:, 2]) ** 2
        return out if np.asarray(pts).ndim > 1 else out[0]

    def g_ext(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        ybar = np.clip(p[:, 2], 1e-12, 1.0 - 1e-12)
        out = -np.log(ybar)
        return out if np.asarray(pts).ndim > 1 else float(out[0])

    return ContactModel(
        name="transverse_knot",
        chart=chart,
        alpha=OneForm(alpha, "dtheta - y dx"),
        phi=SmoothMap(forward, jacobian, None),
        params={"c": c, "delta": delta, "eps": eps},
        target_chart=target,
        target_alpha=OneForm(alpha_bar, "dx_bar + y_bar dtheta_bar"),
        g_extension=g_ext,
    )


BUILTIN_MODELS = ("jet_space", "solenoid", "transverse_knot")


def builtin_model(name: str, params: dict | None = None) -> ContactModel:
    """Construct a built-in model with hard-coded analytic Jacobians."""
    key = name.replace("-", "_")
    params = dict(params or {})
    if key == "jet_space":
        return _jet_space_model(params)
    if key == "solenoid":
        return _solenoid_model(params)
    if key == "transverse_knot":
        return _transverse_knot_model(params)
    raise UnknownModel(f"unknown model {name!r}")


# -- hyperbolic torus model ---------------------------------------------------

def _int_inverse_unimodular(A: IntMatrix) -> IntMatrix:
    """Exact inverse of a determinant +1 integer matrix via the adjugate."""
    n = A.n
    det = determinant(A)
    if det != 1:
        raise ValueError("matrix determinant must be exactly 1")
    rows = A.to_lists()

    def minor(r, c):
        sub = [
            [rows[i][j] for j in range(n) if j != c] for i in range(n) if i != r
        ]
        if not sub:
            return 1
        return determinant(IntMatrix.from_rows(sub))

    adj = [[(-1) ** (i + j) * minor(j, i) for j in range(n)] for i in range(n)]
    return IntMatrix.from_rows(adj)


def anosov_model(A: IntMatrix, cert: SpectrumCertificate) -> ContactModel:
    """Contact model on disk x torus from a certified all-real-spectrum
    matrix whose smallest-magnitude eigenvalue is positive.

    The form coefficients are the left eigenvectors (eigenvectors of the
    transpose), normalized to unit norm with first nonzero component
    positive; the map contracts each disk coordinate by the ratio of the
    small eigenvalue to the paired one and acts by the matrix on the torus.
    """
    n = A.n
    roots = np.asarray(cert.roots, dtype=float)
    if roots.size != n:
        raise EigenFailure("certificate does not carry a full spectrum")
    order = np.argsort(np.abs(roots))
    lam_n = float(roots[order[0]])
    if lam_n <= 0:
        raise EigenFailure("smallest-magnitude eigenvalue must be positive")
    if abs(roots[order[1]]) <= lam_n:
        raise EigenFailure("smallest eigenvalue is not strictly dominated")
    others = [int(i) for i in order[1:]][::-1]  # descending magnitude
    lam_list = [float(roots[i]) for i in others] + [lam_n]

    a_float = np.array(A.to_lists(), dtype=float)
    eigvals, eigvecs = np.linalg.eig(a_float.T)
    used: list[int] = []
    betas = []
    for lam in lam_list:
        idx = min(
            (i for i in range(n) if i not in used),
            key=lambda i: abs(eigvals[i] - lam),
        )
        used.append(idx)
        v = eigvecs[:, idx]
        if np.max(np.abs(v.imag)) > 1e-10:
            raise EigenFailure("complex eigenvector for a certified real eigenvalue")
        b = v.real.astype(float)
        b = b / np.linalg.norm(b)
        lead = b[np.flatnonzero(np.abs(b) > 1e-9)[0]]
        if lead < 0:
            b = -b
        if np.max(np.abs(a_float.T @ b - lam * b)) > 1e-8 * (1.0 + abs(lam)):
            raise EigenFailure("eigenvector residual exceeds 1e-8")
        betas.append(b)
    B = np.vstack(betas)  # rows: beta_1..beta_{n-1}, beta_n
    rates = lam_n / np.array(lam_list[:-1])

    coords = tuple(
        Coord.interval(f"y{i + 1}", -1.0, 1.0) for i in range(n - 1)
    ) + tuple(Coord.circle(f"x{i + 1}", 1.0) for i in range(n))
    chart = Chart(coords)
    d = 2 * n - 1

    def alpha(pts):
        p = np.atleast_2d(pts)
        out = np.zeros_like(p)
        out[:, n - 1 :] = B[n - 1][None, :] + p[:, : n - 1] @ B[: n - 1]
        return out if np.asarray(pts).ndim > 1 else out[0]

    def forward(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.empty_like(p)
        out[:, : n - 1] = p[:, : n - 1] * rates[None, :]
        out[:, n - 1 :] = p[:, n - 1 :] @ a_float.T
        return out if np.asarray(pts).ndim > 1 else out[0]

    jac_const = np.zeros((d, d))
    jac_const[: n - 1, : n - 1] = np.diag(rates)
    jac_const[n - 1 :, n - 1 :] = a_float

    def jacobian(pts):
        p = np.atleast_2d(pts)
        out = np.broadcast_to(jac_const, (p.shape[0], d, d)).copy()
        return out if np.asarray(pts).ndim > 1 else out[0]

    a_inv = np.array(_int_inverse_unimodular(A).to_lists(), dtype=float)

    def inverse(pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.empty_like(p)
        out[:, : n - 1] = p[:, : n - 1] / rates[None, :]
        out[:, n - 1 :] = p[:, n - 1 :] @ a_inv.T
        if np.any(np.abs(out[:, : n - 1]) > 1.0 + 1e-9):
            raise OutOfChart("preimage leaves the disk factor")
        return out if np.asarray(pts).ndim > 1 else out[0]

    return ContactModel(
        name="anosov",
        chart=chart,
        alpha=OneForm(alpha, "beta_n + sum y_i beta_i"),
        phi=SmoothMap(forward, jacobian, inverse),
        params={
            "lambda_n": lam_n,
            "rates": tuple(float(r) for r in rates),
            "matrix": tuple(tuple(row) for row in A.entries),
        },
    )
