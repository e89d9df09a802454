"""Convex objectives with gradients, smoothness constants and numeric checks.

Every objective evaluates batches: ``values(X)`` and ``gradients(X)`` take
points as the rows of ``X``. The single-point ``value``/``gradient`` wrap
them. Sampling-based estimators draw points from the level set
``{x : E(x) <= E(0)}`` by walking random rays out of the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

__all__ = [
    "SmoothnessConstants",
    "Objective",
    "QuadraticObjective",
    "LogisticObjective",
    "LinearObjective",
    "PowerObjective",
    "spectral_norm",
    "finite_difference_check",
    "estimate_alpha",
    "estimate_m_zero",
    "level_set_rays",
    "sample_level_set",
    "curvature_direction",
    "load_objective",
    "save_objective",
    "builtin_objective",
    "BUILTINS",
]


@dataclass(frozen=True)
class SmoothnessConstants:
    """Constants (alpha, q) of the smoothness inequality, valid for steps up to
    ``us_radius``, and the gradient bound ``m_zero`` on the level set (None if
    unknown)."""

    alpha: float
    q: float
    us_radius: float = math.inf
    m_zero: Optional[float] = None


def spectral_norm(matrix, iters: int = 500, tol: float = 1e-14, seed: int = 0) -> float:
    """Largest singular value of `matrix` by power iteration on ``A^T A``."""
    a = np.asarray(matrix, dtype=float)
    if not np.any(a):
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = a.T @ (a @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = math.sqrt(nw)
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    return float(np.linalg.norm(a @ v))


class Objective:
    """Base class. Subclasses implement ``values`` and ``gradients`` on batches."""

    dim: int
    constants: Optional[SmoothnessConstants] = None

    def values(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradients(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: got {x.shape}, objective is on R^{self.dim}")
        return x

    def value(self, x) -> float:
        return float(self.values(self._point(x)[None, :])[0])

    def gradient(self, x) -> np.ndarray:
        g = self.gradients(self._point(x)[None, :])[0]
        g.flags.writeable = False
        return g

    def value_and_gradient(self, x) -> Tuple[float, np.ndarray]:
        return self.value(x), self.gradient(x)

    def minimum_info(self) -> Optional[Tuple[np.ndarray, float]]:
        """(xbar, E(xbar)) when a minimizer is available, else None."""
        return None


class QuadraticObjective(Objective):
    """E(x) = ||A x - b||^2."""

    def __init__(self, design, target):
        self.design = np.atleast_2d(np.array(design, dtype=float))
        self.target = np.array(target, dtype=float).reshape(-1)
        if self.design.shape[0] != self.target.size:
            raise ValueError("design rows and target length differ")
        self.dim = self.design.shape[1]
        self.design.flags.writeable = False
        self.target.flags.writeable = False
        self._minimum = None
        self.op_norm = spectral_norm(self.design)
        full_rank = np.linalg.matrix_rank(self.design) == self.dim
        # on the level set ||Ax - b|| <= ||b||, so ||2 A^T (Ax - b)|| <= 2 ||A|| ||b||
        m_zero = 2.0 * self.op_norm * float(np.linalg.norm(self.target)) if full_rank else None
        self.constants = SmoothnessConstants(alpha=self.op_norm**2, q=2.0, m_zero=m_zero)

    def values(self, points):
        r = np.atleast_2d(points) @ self.design.T - self.target
        return np.einsum("ij,ij->i", r, r)

    def gradients(self, points):
        r = np.atleast_2d(points) @ self.design.T - self.target
        return 2.0 * r @ self.design

    def value_and_gradient(self, x):
        r = self.design @ self._point(x) - self.target
        g = 2.0 * (r @ self.design)
        g.flags.writeable = False
        return float(r @ r), g

    def minimum_info(self):
        if self._minimum is None:
            xbar, *_ = np.linalg.lstsq(self.design, self.target, rcond=None)
            xbar.flags.writeable = False
            self._minimum = (xbar, self.value(xbar))
        return self._minimum


class LogisticObjective(Objective):
    """E(x) = sum_i log(1 + exp(-y_i <X_i, x>)) with labels y_i in {-1, +1}."""

    def __init__(self, features, labels):
        self.features = np.atleast_2d(np.array(features, dtype=float))
        self.labels = np.array(labels, dtype=float).reshape(-1)
        if self.features.shape[0] != self.labels.size:
            raise ValueError("feature rows and label count differ")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        self.dim = self.features.shape[1]
        self.features.flags.writeable = False
        self.labels.flags.writeable = False
        self._minimum = None
        # Hessian X^T diag(s(1-s)) X <= ||X||^2 / 4, half of it bounds the remainder
        self.constants = SmoothnessConstants(alpha=spectral_norm(self.features) ** 2 / 8.0, q=2.0)

    def _margins(self, points):
        return self.labels * (np.atleast_2d(points) @ self.features.T)

    def values(self, points):
        return np.logaddexp(0.0, -self._margins(points)).sum(axis=1)

    def gradients(self, points):
        w = -self.labels * expit(-self._margins(points))
        return w @ self.features

    def hessian(self, x) -> np.ndarray:
        s = expit(self._margins(x)[0])
        return (self.features.T * (s * (1.0 - s))) @ self.features

    def minimum_info(self):
        if self._minimum is None:
            self._minimum = self._newton()
        return self._minimum

    def _newton(self, max_iter: int = 100):
        x = np.zeros(self.dim)
        for _ in range(max_iter):
            g = self.gradient(x)
            if np.linalg.norm(g) <= 1e-13 * (1.0 + np.abs(self.features).sum()):
                break
            step = np.linalg.solve(self.hessian(x), g)
            t, e0 = 1.0, self.value(x)
            while self.value(x - t * step) > e0 and t > 1e-12:
                t *= 0.5
            x = x - t * step
            if np.linalg.norm(x) > 1e8:
                return None  # separable data: no finite minimizer
        x.flags.writeable = False
        return x, self.value(x)


class LinearObjective(Objective):
    """E(x) = <c, x> + c0. Convex with zero curvature and an unbounded level set."""

    def __init__(self, coef, offset: float = 0.0):
        self.coef = np.array(coef, dtype=float).reshape(-1)
        self.offset = float(offset)
        self.dim = self.coef.size
        self.constants = SmoothnessConstants(alpha=0.0, q=2.0)

    def values(self, points):
        return np.atleast_2d(points) @ self.coef + self.offset

    def gradients(self, points):
        points = np.atleast_2d(points)
        return np.broadcast_to(self.coef, points.shape).copy()


class PowerObjective(Objective):
    """E(x) = sum_i |x_i - c_i|^p for p in (1, 2].

    Satisfies the smoothness inequality with q = p and
    ``alpha = 2**(2-p) * n**(1-p/2)``: the scalar map |t|^p has a
    (p-1)-Hoelder derivative, and Hoelder's inequality moves from the
    p-norm to the Euclidean norm of the step.
    """

    def __init__(self, center, p: float):
        if not 1.0 < p <= 2.0:
            raise ValueError("p must lie in (1, 2]")
        self.center = np.array(center, dtype=float).reshape(-1)
        self.p = float(p)
        self.dim = self.center.size
        alpha = 2.0 ** (2.0 - p) * self.dim ** (1.0 - p / 2.0)
        self.constants = SmoothnessConstants(alpha=alpha, q=self.p)

    def values(self, points):
        return (np.abs(np.atleast_2d(points) - self.center) ** self.p).sum(axis=1)

    def gradients(self, points):
        d = np.atleast_2d(points) - self.center
        return self.p * np.sign(d) * np.abs(d) ** (self.p - 1.0)

    def minimum_info(self):
        c = self.center.copy()
        c.flags.writeable = False
        return c, 0.0


# numeric checks and estimators --------------------------------------------


def finite_difference_check(obj: Objective, x, h: float) -> float:
    """Largest coordinate gap between the gradient and central differences,
    scaled by ``1 + max|gradient|``."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = obj._point(x)
    eye = np.eye(obj.dim) * h
    fd = (obj.values(x + eye) - obj.values(x - eye)) / (2.0 * h)
    g = obj.gradient(x)
    return float(np.max(np.abs(g - fd)) / (1.0 + np.max(np.abs(g))))


def level_set_rays(obj: Objective, directions: np.ndarray, max_doublings: int = 60,
                   bisections: int = 60) -> Tuple[np.ndarray, np.ndarray]:
    """Distance from the origin to the boundary of ``{E <= E(0)}`` along each
    unit direction (rows). Returns ``(s_max, unbounded)``; for unbounded rays
    ``s_max`` is the last inside point of the doubling walk."""
    level = obj.value(np.zeros(obj.dim))
    u = np.atleast_2d(directions)
    lo = np.zeros(len(u))
    hi = np.ones(len(u))
    inside = obj.values(hi[:, None] * u) <= level
    doublings = 0
    while np.any(inside) and doublings < max_doublings:
        lo[inside] = hi[inside]
        hi[inside] *= 2.0
        inside[inside] = obj.values(hi[inside, None] * u[inside]) <= level
        doublings += 1
    unbounded = inside
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        ok = obj.values(mid[:, None] * u) <= level
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo, unbounded


def _unit_rows(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    y = rng.standard_normal((count, n))
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def sample_level_set(obj: Objective, count: int, rng: np.random.Generator):
    """`count` points in the level set: a uniform fraction of the way to the
    boundary along a random ray. Unbounded rays are truncated at the longest
    bounded ray, or at length 1 if every ray is unbounded, so samples stay at
    a scale where roundoff does not swamp second differences. Also returns
    the boundary points and the unbounded flag."""
    u = _unit_rows(rng, count, obj.dim)
    frac = rng.random(count)
    s_max, unbounded = level_set_rays(obj, u)
    if np.any(unbounded):
        cap = s_max[~unbounded].max() if np.any(~unbounded) else 1.0
        s_max = np.where(unbounded, max(cap, 1.0), s_max)
    boundary = s_max[:, None] * u
    return frac[:, None] * boundary, boundary, bool(np.any(unbounded))


def curvature_direction(obj: Objective, x, rng: np.random.Generator, iters: int = 100) -> np.ndarray:
    """Unit direction of largest curvature at `x`: power iteration on
    Hessian-vector products formed by central differences of the gradient."""
    x = np.asarray(x, dtype=float)
    eps = 1e-3 * (1.0 + np.linalg.norm(x))
    v = rng.standard_normal(obj.dim)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        g = obj.gradients(np.vstack([x + eps * v, x - eps * v]))
        w = (g[0] - g[1]) / (2.0 * eps)
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            break
        w /= nw
        if np.linalg.norm(w - v) < 1e-12:
            v = w
            break
        v = w
    return v


def _probe_count(samples: int) -> int:
    return min(4, samples)


def estimate_alpha(obj: Objective, q: float, sample_pairs: int, radius: float, seed: int) -> float:
    """Sampled lower estimate of the smallest valid alpha for exponent `q`.

    Maximizes ``(E(x') - E(x) - <E'(x), x' - x>) / ||x' - x||^q`` over base
    points x in the level set and steps of length at most `radius`; a few
    steps along the top curvature direction are always included.
    """
    if not 1.0 < q <= 2.0:
        raise ValueError("q must lie in (1, 2]")
    if not radius > 0:
        raise ValueError("radius must be positive")
    ss = np.random.SeedSequence(seed)
    rng_x, rng_y, rng_probe = (np.random.default_rng(s) for s in ss.spawn(3))
    x, _, _ = sample_level_set(obj, sample_pairs, rng_x)
    # log-uniform over two decades: shorter steps only add cancellation error
    lengths = radius * 10.0 ** (-2.0 * rng_y.random(sample_pairs))
    steps = lengths[:, None] * _unit_rows(rng_y, sample_pairs, obj.dim)
    probes = [radius * curvature_direction(obj, x[i], rng_probe) for i in range(_probe_count(sample_pairs))]
    if probes:
        x = np.vstack([x, x[: len(probes)]])
        steps = np.vstack([steps, probes])
    gap = obj.values(x + steps) - obj.values(x) - np.einsum("ij,ij->i", obj.gradients(x), steps)
    ratios = gap / np.linalg.norm(steps, axis=1) ** q
    return float(max(0.0, ratios.max()))


def estimate_m_zero(obj: Objective, sample_count: int, seed: int) -> Optional[float]:
    """Largest gradient norm seen on the level set, or None when the level set
    looks unbounded."""
    rng = np.random.default_rng(seed)
    interior, boundary, unbounded = sample_level_set(obj, sample_count, rng)
    if unbounded:
        return None
    pts = np.vstack([np.zeros(obj.dim), boundary, interior])
    level = obj.value(np.zeros(obj.dim))
    pts = pts[obj.values(pts) <= level]
    return float(np.linalg.norm(obj.gradients(pts), axis=1).max())


# plain-text problem files ----------------------------------------------------


def save_objective(obj: Objective, path) -> None:
    if isinstance(obj, QuadraticObjective):
        kind, mat, vec = "quadratic", obj.design, obj.target
    elif isinstance(obj, LogisticObjective):
        kind, mat, vec = "logistic", obj.features, obj.labels
    else:
        raise TypeError(f"no file format for {type(obj).__name__}")
    lines = [f"{kind} {mat.shape[0]} {mat.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in mat]
    lines.append(" ".join(repr(float(v)) for v in vec))
    Path(path).write_text("\n".join(lines) + "\n")


def load_objective(path) -> Objective:
    """Read ``[kind] m n``, then m matrix rows, then the target or label line.

    ``kind`` is ``quadratic`` (default when omitted) or ``logistic``.
    """
    rows = [ln.split() for ln in Path(path).read_text().split("\n")
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty objective file")
    header = rows[0]
    if len(header) == 2:
        kind, m, n = "quadratic", int(header[0]), int(header[1])
    elif len(header) == 3:
        kind, m, n = header[0], int(header[1]), int(header[2])
    else:
        raise ValueError(f"{path}: header must read '[kind] m n'")
    body = rows[1:]
    if len(body) != m + 1 or any(len(r) != n for r in body[:m]) or len(body[m]) != m:
        raise ValueError(f"{path}: expected {m} rows of length {n} and a final line of length {m}")
    mat = np.array(body[:m], dtype=float)
    vec = np.array(body[m], dtype=float)
    if kind == "quadratic":
        return QuadraticObjective(mat, vec)
    if kind == "logistic":
        return LogisticObjective(mat, vec)
    raise ValueError(f"{path}: unknown objective kind {kind!r}")


# built-in instances ----------------------------------------------------------


def random_quadratic(n: int, m: int, seed: int) -> QuadraticObjective:
    rng = np.random.default_rng(seed)
    return QuadraticObjective(rng.standard_normal((m, n)), rng.standard_normal(m))


def conditioned_quadratic(n: int, condition: float, seed: int) -> QuadraticObjective:
    """Square design whose Hessian ``2 A^T A`` has condition number `condition`,
    eigenvalues spread geometrically, and ``||A||_op = 1``."""
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.sqrt(np.geomspace(1.0, condition, n) / condition)
    a = (u * s) @ v.T
    return QuadraticObjective(a, rng.standard_normal(n))


def random_logistic(n: int, m: int, seed: int, noise: float = 1.0) -> LogisticObjective:
    """Labels from a noisy linear rule, so the classes overlap and a finite
    minimizer exists."""
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((m, n))
    w = rng.standard_normal(n)
    labels = np.where(feats @ w + noise * rng.standard_normal(m) * np.linalg.norm(w) >= 0, 1.0, -1.0)
    return LogisticObjective(feats, labels)


BUILTINS = ("quad1d", "quadratic", "conditioned", "logistic", "linear")


def builtin_objective(name: str, seed: int = 0) -> Objective:
    if name == "quad1d":
        return QuadraticObjective([[1.0]], [1.0])
    if name == "quadratic":
        return random_quadratic(10, 15, seed)
    if name == "conditioned":
        return conditioned_quadratic(20, 100.0, seed)
    if name == "logistic":
        return random_logistic(5, 40, seed)
    if name == "linear":
        return LinearObjective(np.arange(1.0, 4.0))
    raise ValueError(f"unknown builtin objective {name!r}; choose from {BUILTINS}")
