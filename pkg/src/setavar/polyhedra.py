"""Double description method for small dimensions.

``DoubleDescription`` maintains the extreme rays and a lineality basis of the
cone ``{x : a.x >= 0 for every added row a}``; rows are added one at a time so
an outer approximation can be refined incrementally.
"""
from __future__ import annotations

import numpy as np

_ZERO = 1e-9


class DoubleDescription:
    def __init__(self, dim: int, zero_tol: float = _ZERO):
        self.dim = dim
        self.zero_tol = zero_tol
        self.lines: list[np.ndarray] = [e for e in np.eye(dim)]
        self.rays: list[np.ndarray] = []
        self.zeros: list[int] = []     # bitmask of tight rows per ray
        self.rows: list[np.ndarray] = []

    def add(self, row) -> None:
        a = np.asarray(row, dtype=float)
        norm = np.linalg.norm(a)
        if norm == 0:
            return
        a = a / norm
        i = len(self.rows)
        self.rows.append(a)
        bit = 1 << i

        if self.lines:
            vals = np.array([a @ l for l in self.lines])
            k = int(np.argmax(np.abs(vals)))
            if abs(vals[k]) > self.zero_tol:
                l = self.lines.pop(k)
                al = vals[k]
                if al < 0:
                    l, al = -l, -al
                self.lines = [self._unit(l2 - (a @ l2) / al * l) for l2 in self.lines]
                self.rays = [self._unit(r - (a @ r) / al * l) for r in self.rays]
                self.zeros = [z | bit for z in self.zeros]
                prev = bit - 1  # the old line was tight at every earlier row
                self.rays.append(self._unit(l))
                self.zeros.append(prev)
                return

        s = np.array([a @ r for r in self.rays]) if self.rays else np.zeros(0)
        pos = np.flatnonzero(s > self.zero_tol)
        neg = np.flatnonzero(s < -self.zero_tol)
        zer = np.flatnonzero(np.abs(s) <= self.zero_tol)
        if neg.size == 0:
            for j in zer:
                self.zeros[j] |= bit
            return
        need = self.dim - len(self.lines) - 2
        new_rays, new_zeros = [], []
        zeros = self.zeros
        n_rays = len(self.rays)
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                if common.bit_count() < need:
                    continue
                adjacent = True
                for t in range(n_rays):
                    if t != p and t != q and (zeros[t] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = s[p] * self.rays[q] - s[q] * self.rays[p]
                new_rays.append(self._unit(r))
                new_zeros.append(common | bit)
        keep = np.sort(np.concatenate([pos, zer]).astype(int))
        tight = set(zer.tolist())
        rays = [self.rays[j] for j in keep]
        zs = [self.zeros[j] | (bit if j in tight else 0) for j in keep]
        self.rays = rays + new_rays
        self.zeros = zs + new_zeros

    @staticmethod
    def _unit(v: np.ndarray) -> np.ndarray:
        n = np.linalg.norm(v)
        return v / n if n > 0 else v

    def ray_array(self) -> np.ndarray:
        return np.array(self.rays).reshape(-1, self.dim)

    def line_array(self) -> np.ndarray:
        if not self.lines:
            return np.zeros((0, self.dim))
        q, _ = np.linalg.qr(np.array(self.lines).T)
        return q.T.reshape(-1, self.dim)


def cone_rays(A) -> tuple[np.ndarray, np.ndarray]:
    """Extreme rays (rows, unit length) and lineality basis of ``{x : A x >= 0}``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    dd = DoubleDescription(A.shape[1])
    for a in A:
        dd.add(a)
    return _sorted_rows(dd.ray_array()), dd.line_array()


def polyhedron_vrep(A, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vertices, extreme rays and lineality basis of ``{x : A x >= b}``.

    A polyhedron with lines has no vertices; ``vertices`` then holds points
    on its minimal faces.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    n = A.shape[1]
    dd = DoubleDescription(n + 1)
    tau = np.zeros(n + 1)
    tau[-1] = 1.0
    dd.add(tau)
    for a, beta in zip(A, b):
        dd.add(np.concatenate([a, [-beta]]))
    return split_homogeneous(dd)


def split_homogeneous(dd: DoubleDescription) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rays = dd.ray_array()
    n = dd.dim - 1
    verts = [r[:n] / r[n] for r in rays if r[n] > dd.zero_tol]
    dirs = [r[:n] / np.linalg.norm(r[:n]) for r in rays if r[n] <= dd.zero_tol]
    lines = dd.line_array()[:, :n]
    return (_sorted_rows(np.array(verts).reshape(-1, n)),
            _sorted_rows(np.array(dirs).reshape(-1, n)),
            lines)


def _sorted_rows(M: np.ndarray) -> np.ndarray:
    if M.shape[0] <= 1:
        return M
    order = np.lexsort(np.round(M, 12).T[::-1])
    return M[order]


def dedup_rows(M: np.ndarray, tol: float) -> np.ndarray:
    """Merge rows within ``tol`` in the max-norm, keeping the lexicographically smallest."""
    M = _sorted_rows(np.asarray(M, dtype=float).reshape(len(M), -1))
    kept: list[np.ndarray] = []
    for row in M:
        if not any(np.max(np.abs(row - k)) <= tol for k in kept):
            kept.append(row)
    return np.array(kept).reshape(-1, M.shape[1])
