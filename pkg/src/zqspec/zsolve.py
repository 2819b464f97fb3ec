"""Z-eigenpairs of real symmetric tensors.

Three routes are provided:

* :func:`eig_sym_matrix` -- cyclic Jacobi rotations for order 2, exact.
* :func:`zeig_multistart` -- shifted symmetric power iteration from many random
  starts (ascent on ``T`` and on ``-T``), polished by Newton's method on the
  bordered system ``T w^{m-1} = lambda w, |w| = 1`` and then clustered.
* :func:`grid_oracle_n2` / :func:`grid_oracle_n3plus` -- brute-force sphere
  grids used as independent oracles in small dimensions.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, asdict
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from .tensor import SymTensor, TensorError, contract_m1, contract_m2, apply_m

log = logging.getLogger(__name__)

__all__ = [
    "ConvergenceError",
    "Eigenpair",
    "SolverConfig",
    "SpectrumEntry",
    "SpectrumReport",
    "eig_sym_matrix",
    "auto_shift",
    "shifted_power_step",
    "zeig_multistart",
    "grid_oracle_n2",
    "grid_oracle_n3plus",
    "z_spectral_radius",
    "residual",
    "dedup_pairs",
    "distinct_values",
]


class ConvergenceError(RuntimeError):
    """A solver ran out of budget without producing an accepted result."""


@dataclass(frozen=True)
class Eigenpair:
    lam: float
    vector: np.ndarray
    residual: float
    source: str = "shifted_power"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 5000
    num_starts: Optional[int] = None
    dedup_tol: float = 1e-6
    seed: int = 0
    shift: Optional[float] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.num_starts is not None and self.num_starts < 1:
            raise ValueError("num_starts must be >= 1")
        if not self.dedup_tol > self.tol:
            raise ValueError("dedup_tol must exceed tol")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def starts_for(self, dim: int) -> int:
        return self.num_starts if self.num_starts is not None else 100 * dim

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float
    vector: np.ndarray
    residual: float
    cluster_size: int


@dataclass
class SpectrumReport:
    entries: list[SpectrumEntry]
    z_spectral_radius: float
    config: SolverConfig
    order: int
    dim: int
    source: str
    complete: bool
    max_abs_seen: float = float("nan")
    wall_time: float = 0.0

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def vectors(self) -> np.ndarray:
        return np.array([e.vector for e in self.entries])


def residual(T: SymTensor, lam: float, w) -> float:
    """``|T w^{m-1} - lam w|_2``."""
    w = np.asarray(w, dtype=float)
    return float(np.linalg.norm(contract_m1(T, w) - lam * w))


# ----------------------------------------------------------------- order 2


def eig_sym_matrix(M: SymTensor, max_sweeps: int = 60) -> list[Eigenpair]:
    """All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returned in descending order of eigenvalue; the vectors are orthonormal.
    """
    if M.order != 2:
        raise TensorError(f"eig_sym_matrix needs order 2, got {M.order}")
    A = M.to_dense()
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= 1e-15 * scale or scale == 0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * ap - s * aq, s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lams = np.diag(A)
    order = np.argsort(-lams, kind="stable")
    return [
        Eigenpair(float(lams[k]), V[:, k].copy(), residual(M, lams[k], V[:, k]), "jacobi")
        for k in order
    ]


# --------------------------------------------------------- power iteration


def auto_shift(T: SymTensor) -> float:
    """``m * max|orbit value| * n^((m-2)/2)``; doubled during iteration if ascent fails."""
    vmax = float(np.abs(T.values).max(initial=0.0))
    return T.order * vmax * T.dim ** ((T.order - 2) / 2)


def shifted_power_step(T: SymTensor, w, alpha: float) -> np.ndarray:
    """One shifted power step.

    For ``alpha >= 0`` returns ``normalize(T w^{m-1} + alpha w)``, which does
    not decrease ``T w^m`` once ``alpha`` is large enough. For ``alpha < 0``
    returns ``normalize(-(T w^{m-1} + alpha w))``, the descent version.
    Raises ``ZeroDivisionError`` when the shifted vector vanishes.
    """
    w = np.asarray(w, dtype=float)
    v = contract_m1(T, w) + alpha * w
    if alpha < 0:
        v = -v
    nrm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(nrm <= 1e-300):
        raise ZeroDivisionError("shifted vector vanished; increase the shift")
    return v / nrm


def _rowdot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _merge_coalesced(X: np.ndarray, idx: np.ndarray, radius: float) -> np.ndarray:
    """Indices in ``idx`` whose row lies within ``radius`` of an earlier row."""
    pairs = cKDTree(X[idx]).query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return idx[:0]
    return idx[np.unique(pairs.max(axis=1))]


def _power_phase(T: SymTensor, X: np.ndarray, alpha: float, cfg: SolverConfig,
                 handoff: float = 1e-5, merge_every: int = 20, merge_radius: float = 1e-4):
    """Batched shifted ascent on ``T``.

    A row stops once its residual falls below ``handoff`` (Newton finishes it),
    once ``T w^m`` stagnates with residual below ``cfg.tol``, or once it has
    merged into another row's trajectory. Returns the final rows, their
    objective values and a mask of rows that were not merged away.
    """
    X = X.copy()
    S = len(X)
    alphas = np.full(S, alpha)
    f = T._apply(X)
    dlam = np.full(S, np.inf)
    active = np.ones(S, dtype=bool)
    kept = np.ones(S, dtype=bool)
    scale = max(1.0, float(np.abs(T.values).max(initial=0.0)))
    for it in range(cfg.max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        if it and it % merge_every == 0:
            gone = _merge_coalesced(X, idx, merge_radius)
            active[gone] = kept[gone] = False
            idx = np.flatnonzero(active)
        Xa = X[idx]
        G = T._contract(Xa)
        res = np.linalg.norm(G - f[idx, None] * Xa, axis=1)
        done = (res < handoff) | ((dlam[idx] < cfg.tol / 10) & (res < cfg.tol))
        active[idx[done]] = False
        step = ~done
        idx, Xa, G = idx[step], Xa[step], G[step]
        V = G + alphas[idx, None] * Xa
        nrm = np.linalg.norm(V, axis=1)
        vanished = nrm <= 1e-300
        V = V / np.where(vanished, 1.0, nrm)[:, None]
        f_new = T._apply(V)
        worse = (f_new < f[idx] - 1e-13 * scale) | vanished
        alphas[idx[worse]] *= 2.0
        upd = idx[~worse]
        dlam[upd] = np.abs(f_new[~worse] - f[upd])
        X[upd] = V[~worse]
        f[upd] = f_new[~worse]
    return X, f, kept


def _newton_polish(T: SymTensor, X: np.ndarray, iters: int = 25, target: float = 1e-14):
    """Newton on ``[T w^{m-1} - lam w; (1 - w.w)/2] = 0``; keeps each row's best iterate."""
    m, n = T.order, T.dim
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    lam = T._apply(X)
    G = T._contract(X)
    res = np.linalg.norm(G - lam[:, None] * X, axis=1)
    best_X, best_lam, best_res = X.copy(), lam.copy(), res.copy()
    scale = max(1.0, float(np.abs(T.values).max(initial=0.0)))
    eye = np.eye(n)
    for _ in range(iters):
        todo = np.flatnonzero(best_res > target * scale)
        if todo.size == 0:
            break
        Xa, la = X[todo], lam[todo]
        Ga = T._contract(Xa)
        H = T._hessian(Xa)
        J = np.zeros((len(todo), n + 1, n + 1))
        J[:, :n, :n] = (m - 1) * H - la[:, None, None] * eye
        J[:, :n, n] = -Xa
        J[:, n, :n] = -Xa
        rhs = np.zeros((len(todo), n + 1))
        rhs[:, :n] = -(Ga - la[:, None] * Xa)
        rhs[:, n] = -(1.0 - _rowdot(Xa, Xa)) / 2.0
        try:
            step = np.linalg.solve(J, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(Jk, rk, rcond=None)[0] for Jk, rk in zip(J, rhs)])
        Xn = Xa + step[:, :n]
        nrm = np.linalg.norm(Xn, axis=1)
        bad = ~np.isfinite(nrm) | (nrm < 1e-8)
        Xn[bad] = Xa[bad]
        Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
        ln = T._apply(Xn)
        rn = np.linalg.norm(T._contract(Xn) - ln[:, None] * Xn, axis=1)
        X[todo], lam[todo] = Xn, ln
        better = rn < best_res[todo]
        tb = todo[better]
        best_X[tb], best_lam[tb], best_res[tb] = Xn[better], ln[better], rn[better]
    return best_X, best_lam, best_res


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def dedup_pairs(pairs: Iterable[Eigenpair], order: int, dedup_tol: float,
                vec_tol: float = 1e-4) -> list[SpectrumEntry]:
    """Cluster eigenvalues within ``dedup_tol`` (single linkage on sorted values).

    Inside a cluster, vectors equal up to sign count once. The representative
    is the pair with the smallest residual; for even order its vector is
    sign-normalized so the largest-magnitude component is positive.
    """
    pairs = sorted(pairs, key=lambda p: (p.lam, p.residual, tuple(np.round(p.vector, 12))))
    clusters: list[list[Eigenpair]] = []
    for p in pairs:
        if clusters and p.lam - clusters[-1][-1].lam <= dedup_tol:
            clusters[-1].append(p)
        else:
            clusters.append([p])
    out = []
    for cl in clusters:
        reps: list[np.ndarray] = []
        for p in cl:
            v = p.vector
            if not any(min(np.linalg.norm(v - r), np.linalg.norm(v + r)) < vec_tol for r in reps):
                reps.append(v)
        best = min(cl, key=lambda p: p.residual)
        vec = _canonical_sign(best.vector) if order % 2 == 0 else best.vector
        out.append(SpectrumEntry(float(best.lam), vec, float(best.residual), len(reps)))
    out.reverse()
    return out


def distinct_values(values: Iterable[float], tol: float) -> np.ndarray:
    """Sorted (descending) cluster representatives of ``values`` at spacing ``tol``."""
    vals = np.sort(np.asarray(list(values), dtype=float))
    out: list[list[float]] = []
    for v in vals:
        if out and v - out[-1][-1] <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return np.array([float(np.median(c)) for c in out][::-1])


def _mirror_odd(pairs: list[Eigenpair], order: int) -> list[Eigenpair]:
    if order % 2 == 0:
        return pairs
    return pairs + [Eigenpair(-p.lam, -p.vector, p.residual, p.source) for p in pairs]


def _random_starts(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    X = rng.standard_normal((count, dim))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def zeig_multistart(T: SymTensor, cfg: SolverConfig | None = None,
                    extra_starts: Sequence[np.ndarray] | None = None,
                    partner: Callable[[np.ndarray], np.ndarray] | None = None) -> SpectrumReport:
    """Z-eigenpairs of ``T`` by multistart shifted power iteration.

    Order 2 is routed to :func:`eig_sym_matrix` and is exhaustive. For higher
    orders the report is a heuristic enumeration (``complete=False``).
    ``extra_starts`` are appended to the random starts. ``partner`` maps an
    eigenvector for ``lambda`` to a candidate for ``-lambda`` (as for embedded
    tensors); each candidate is kept only if its own residual passes ``tol``.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    if T.is_zero():
        raise TensorError("zero tensor has no informative Z-spectrum")
    if T.order == 2:
        pairs = eig_sym_matrix(T)
        entries = dedup_pairs(pairs, 2, cfg.dedup_tol)
        lams = np.array([p.lam for p in pairs])
        radius = float(np.abs(lams).max())
        return SpectrumReport(entries, radius, cfg, 2, T.dim, "jacobi", True,
                              radius, time.perf_counter() - t0)

    rng = np.random.default_rng(cfg.seed)
    X0 = _random_starts(rng, cfg.starts_for(T.dim), T.dim)
    slice_vecs = np.linalg.eigh(contract_m2(T, X0[0]))[1].T
    parts = [X0, slice_vecs]
    if extra_starts is not None and len(extra_starts):
        E = np.asarray(extra_starts, dtype=float).reshape(-1, T.dim)
        parts.append(E / np.linalg.norm(E, axis=1, keepdims=True))
    X0 = np.vstack(parts)

    alpha = cfg.shift if cfg.shift is not None else auto_shift(T)
    finals, seen = [], []
    for signed in (T, -T):
        X, f, kept = _power_phase(signed, X0, abs(alpha), cfg)
        finals.append(X[kept])
        seen.append(np.abs(f).max())
    W, lam, res = _newton_polish(T, np.vstack(finals))
    ok = res < cfg.tol
    if not np.any(ok):
        raise ConvergenceError(
            f"no start converged to residual < {cfg.tol} "
            f"(best {res.min():.3e}); raise max_iter or num_starts")
    pairs = [Eigenpair(float(l), w, float(r), "shifted_power")
             for l, w, r in zip(lam[ok], W[ok], res[ok])]
    if partner is not None:
        mates = []
        for p in pairs:
            v = np.asarray(partner(p.vector), dtype=float)
            r = residual(T, -p.lam, v)
            if r < cfg.tol:
                mates.append(Eigenpair(-p.lam, v, r, "shifted_power"))
        pairs += mates
    pairs = _mirror_odd(pairs, T.order)
    entries = dedup_pairs(pairs, T.order, cfg.dedup_tol)
    radius = max(abs(e.lam) for e in entries)
    max_seen = float(max(seen))
    if max_seen > radius + 1e-6 * max(1.0, radius):
        warnings.warn(f"ascent reached |T w^m| = {max_seen:.12g} above the accepted radius "
                      f"{radius:.12g}; enumeration is incomplete", RuntimeWarning)
    return SpectrumReport(entries, radius, cfg, T.order, T.dim, "shifted_power", False,
                          max_seen, time.perf_counter() - t0)


def z_spectral_radius(T: SymTensor, cfg: SolverConfig | None = None) -> float:
    """Largest ``|lambda|`` over the computed Z-spectrum."""
    if T.is_zero():
        raise TensorError("Z-spectral radius of the zero tensor is 0; ratios are undefined")
    return zeig_multistart(T, cfg).z_spectral_radius


# ----------------------------------------------------------------- oracles


def grid_oracle_n2(T: SymTensor, points: int = 100_000, theta_tol: float = 1e-12) -> list[Eigenpair]:
    """Every Z-eigenpair of a dimension-2 tensor, up to grid resolution.

    On ``w(t) = (cos t, sin t)`` the tangential derivative of ``T w^m`` is
    ``m (T w^{m-1}) . (-sin t, cos t)``; its sign changes on a uniform grid
    are refined by bisection.
    """
    if T.dim != 2:
        raise TensorError(f"grid_oracle_n2 needs dim 2, got {T.dim}")
    m = T.order

    def deriv(t):
        t = np.asarray(t, dtype=float)
        w = np.stack([np.cos(t), np.sin(t)], axis=-1)
        tang = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        return m * _rowdot(T._contract(w), tang)

    theta = 2 * np.pi * np.arange(points) / points
    g = deriv(theta)
    gscale = np.abs(g).max()
    if gscale <= 1e-13 * max(1.0, float(np.abs(T.values).max())):
        # T w^m is constant on the circle: every unit vector is an eigenvector.
        roots = [0.0, np.pi / 2]
    else:
        roots = []
        s = np.sign(g)
        s_next = np.roll(s, -1)
        for k in np.flatnonzero(s == 0):
            roots.append(theta[k])
        for k in np.flatnonzero(s * s_next < 0):
            lo, hi = theta[k], theta[k] + 2 * np.pi / points
            glo = g[k]
            while hi - lo > theta_tol:
                mid = 0.5 * (lo + hi)
                gm = float(deriv(mid))
                if gm == 0:
                    lo = hi = mid
                    break
                if np.sign(gm) == np.sign(glo):
                    lo, glo = mid, gm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    out = []
    for t in roots:
        w = np.array([math.cos(t), math.sin(t)])
        lam = apply_m(T, w)
        out.append(Eigenpair(lam, w, residual(T, lam, w), "grid_oracle"))
    out.sort(key=lambda p: -p.lam)
    return out


_PSI4 = 1.533751168755204288118041  # real root of x^4 = x + 4


def sphere_grid(dim: int, count: int) -> np.ndarray:
    """Deterministic near-uniform points on the unit sphere in R^3 or R^4.

    Fibonacci lattice for ``dim = 3``, super-Fibonacci spiral for ``dim = 4``.
    """
    s = np.arange(count) + 0.5
    if dim == 3:
        z = 1 - 2 * s / count
        r = np.sqrt(1 - z * z)
        phi = 2 * np.pi * s / ((1 + math.sqrt(5)) / 2)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    if dim == 4:
        t = s / count
        r, R = np.sqrt(t), np.sqrt(1 - t)
        a = 2 * np.pi * s / math.sqrt(2)
        b = 2 * np.pi * s / _PSI4
        return np.stack([r * np.sin(a), r * np.cos(a), R * np.sin(b), R * np.cos(b)], axis=1)
    raise TensorError(f"sphere_grid supports dim 3 or 4, got {dim}")


def grid_oracle_n3plus(T: SymTensor, resolution: int | None = None, neighbours: int = 12,
                       accept: float = 1e-9, dedup_tol: float = 1e-6) -> list[Eigenpair]:
    """Heuristic enumeration of Z-eigenpairs for ``dim`` in {3, 4}.

    Grid points whose projected gradient is a local minimum over their
    nearest neighbours are polished by Levenberg-Marquardt on the eigen
    residual. Good for agreement testing; it certifies nothing.
    """
    if T.dim not in (3, 4):
        raise TensorError(f"grid_oracle_n3plus needs dim 3 or 4, got {T.dim}")
    count = resolution or (20_000 if T.dim == 3 else 60_000)
    P = sphere_grid(T.dim, count)
    G = T._contract(P)
    f = _rowdot(P, G)
    pg = np.linalg.norm(G - f[:, None] * P, axis=1)
    _, nbr = cKDTree(P).query(P, k=neighbours + 1)
    cand = np.flatnonzero(pg <= pg[nbr[:, 1:]].min(axis=1))

    def resid(v):
        u = v / np.linalg.norm(v)
        g = T._contract(u)
        return np.append(g - _rowdot(u, g) * u, np.linalg.norm(v) - 1.0)

    pairs = []
    for i in cand:
        sol = least_squares(resid, P[i], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        u = sol.x / np.linalg.norm(sol.x)
        lam = apply_m(T, u)
        r = residual(T, lam, u)
        if r < accept:
            pairs.append(Eigenpair(lam, u, r, "grid_oracle"))
    pairs = _mirror_odd(pairs, T.order)
    return [Eigenpair(e.lam, e.vector, e.residual, "grid_oracle")
            for e in dedup_pairs(pairs, T.order, dedup_tol)]
