"""Finite dictionaries of unit-norm atoms.

Atoms are stored as the rows of a ``(count, n)`` array, so every inner
product against a gradient is a single matrix-vector product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "KINDS",
    "Dictionary",
    "NotInSpanError",
    "canonical_basis",
    "union_of_bases",
    "rotated_basis",
    "random_unit",
    "from_atoms",
    "l1_seminorm_upper_bound",
    "brute_force_l1",
    "load_dictionary",
    "save_dictionary",
]

KINDS = ("canonical_basis", "union_of_bases", "random_unit", "custom")
NORM_TOL = 1e-12


class NotInSpanError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dictionary:
    atoms: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float, copy=True)
        if atoms.ndim != 2 or atoms.shape[0] == 0 or atoms.shape[1] == 0:
            raise ValueError(f"atoms must be a non-empty 2-D array, got shape {atoms.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown dictionary kind {self.kind!r}")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms must be finite")
        dev = np.max(np.abs(np.linalg.norm(atoms, axis=1) - 1.0))
        if dev > NORM_TOL:
            raise ValueError(f"atoms must have unit norm (max deviation {dev:.3e})")
        if self.kind != "custom" and np.linalg.matrix_rank(atoms) < atoms.shape[1]:
            raise ValueError(f"{self.kind} dictionary does not span R^{atoms.shape[1]}")
        atoms.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.atoms[i]

    def inner_products(self, g) -> np.ndarray:
        """<g, phi> for every atom phi, in index order."""
        g = np.asarray(g, dtype=float)
        if g.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: vector {g.shape} vs dictionary dim {self.dim}")
        return self.atoms @ g


def _normalize_rows(atoms: np.ndarray) -> np.ndarray:
    atoms = np.asarray(atoms, dtype=float)
    return atoms / np.linalg.norm(atoms, axis=1, keepdims=True)


def canonical_basis(n: int) -> Dictionary:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Dictionary(np.eye(n), "canonical_basis")


def rotated_basis(n: int, seed: int) -> Dictionary:
    """A random orthonormal basis of R^n (Haar-distributed rotation of the identity)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return Dictionary(_normalize_rows(q.T), "union_of_bases")


def union_of_bases(bases) -> Dictionary:
    bases = list(bases)
    if not bases:
        raise ValueError("need at least one basis")
    dims = {b.dim for b in bases}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch between bases: {sorted(dims)}")
    if len(bases) == 1:
        return bases[0]
    return Dictionary(np.vstack([b.atoms for b in bases]), "union_of_bases")


def random_unit(n: int, count: int, seed: int, max_retries: int = 10) -> Dictionary:
    """`count` Gaussian directions in R^n normalized to unit length.

    Resamples (from the same seeded stream) when the draw fails to span R^n.
    """
    if n < 1 or count < n:
        raise ValueError("need count >= n >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries + 1):
        atoms = _normalize_rows(rng.standard_normal((count, n)))
        if np.linalg.matrix_rank(atoms) == n:
            return Dictionary(atoms, "random_unit")
    raise ValueError(f"random dictionary failed to span R^{n} after {max_retries} retries")


def from_atoms(atoms, normalize: bool = True, kind: str = "custom") -> Dictionary:
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    if normalize:
        atoms = _normalize_rows(atoms)
    return Dictionary(atoms, kind)


def _check_in_span(d: Dictionary, x: np.ndarray) -> None:
    coef, *_ = np.linalg.lstsq(d.atoms.T, x, rcond=None)
    resid = np.linalg.norm(d.atoms.T @ coef - x)
    if resid > 1e-9 * (1.0 + np.linalg.norm(x)):
        raise NotInSpanError(f"point is not in the span of the dictionary (residual {resid:.3e})")


def l1_seminorm_upper_bound(d: Dictionary, x) -> float:
    """Smallest total coefficient mass over finite representations of `x`.

    For a canonical basis this is the coordinate l1 norm. Otherwise it is the
    minimum-l1 representation, found by linear programming with the split
    ``c = c_plus - c_minus``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (d.dim,):
        raise ValueError(f"dimension mismatch: {x.shape} vs dictionary dim {d.dim}")
    if d.kind == "canonical_basis":
        return float(np.sum(np.abs(x)))
    if not np.any(x):
        return 0.0
    _check_in_span(d, x)
    phi = d.atoms.T
    count = len(d)
    res = linprog(
        c=np.ones(2 * count),
        A_eq=np.hstack([phi, -phi]),
        b_eq=x,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        # fall back to any feasible representation; still a valid upper bound
        coef, *_ = np.linalg.lstsq(phi, x, rcond=None)
        return float(np.sum(np.abs(coef)))
    return float(res.fun)


def brute_force_l1(d: Dictionary, x) -> float:
    """Minimum-l1 representation by enumerating every basic solution.

    A linear program attains its optimum at a vertex, and the vertices of the
    representation polytope are supported on linearly independent atom
    subsets. Exponential in the dictionary size; meant for tiny instances.
    """
    x = np.asarray(x, dtype=float)
    n = d.dim
    best = np.inf
    for size in range(0, n + 1):
        for subset in itertools.combinations(range(len(d)), size):
            sub = d.atoms[list(subset)].T if subset else np.zeros((n, 0))
            if size and np.linalg.matrix_rank(sub) < size:
                continue
            if size == 0:
                if np.allclose(x, 0.0):
                    best = 0.0
                continue
            coef, *_ = np.linalg.lstsq(sub, x, rcond=None)
            if np.linalg.norm(sub @ coef - x) <= 1e-9 * (1.0 + np.linalg.norm(x)):
                best = min(best, float(np.sum(np.abs(coef))))
    if not np.isfinite(best):
        raise NotInSpanError("point is not in the span of the dictionary")
    return best


def save_dictionary(d: Dictionary, path) -> None:
    """Write `d` as ``n count kind`` followed by one atom per line."""
    lines = [f"{d.dim} {len(d)} {d.kind}"]
    lines += [" ".join(repr(float(v)) for v in atom) for atom in d.atoms]
    Path(path).write_text("\n".join(lines) + "\n")


def load_dictionary(path) -> Dictionary:
    text = Path(path).read_text().split("\n")
    rows = [ln.split() for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty dictionary file")
    header = rows[0]
    if len(header) != 3:
        raise ValueError(f"{path}: header must read 'n count kind'")
    n, count, kind = int(header[0]), int(header[1]), header[2]
    body = rows[1:]
    if len(body) != count or any(len(r) != n for r in body):
        raise ValueError(f"{path}: expected {count} atoms of length {n}")
    atoms = np.array(body, dtype=float)
    # atoms written with repr() round-trip exactly; renormalize hand-written files
    if np.max(np.abs(np.linalg.norm(atoms, axis=1) - 1.0)) > NORM_TOL:
        atoms = _normalize_rows(atoms)
    return Dictionary(atoms, kind)
