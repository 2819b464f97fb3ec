"""Quantum eigenpairs of complex symmetric tensors.

A Q-eigenpair of ``Psi`` is a real ``lambda`` and a complex ``z`` with
``Psi z^{m-1} = lambda conj(z)`` and ``conj(z).z = 1``. They are computed as
Z-eigenpairs of the real embedding (see :mod:`zqspec.embed`) and every pair is
re-checked against the complex equation. The largest Q-eigenvalue is the
entanglement eigenvalue, which also equals ``max |Psi z^m|`` over unit ``z``;
:func:`direct_overlap_max` computes that maximum without the embedding.
"""
from __future__ import annotations

import cmath
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import comb

from .embed import embed, eigenvector_from_state, partner_map, state_from_eigenvector
from .tensor import (ComplexSymTensor, SymTensor, TensorError, complex_apply_m,
                     complex_contract_m1, orbit_keys)
from .zsolve import SolverConfig, SpectrumReport, zeig_multistart

__all__ = [
    "DominanceError",
    "QEigenpair",
    "QSpectrumReport",
    "EqualityRecord",
    "RatioReport",
    "CASE_KINDS",
    "qeig_all",
    "entanglement_eigenvalue",
    "verify_qeig",
    "pair_map_q",
    "count_bound",
    "direct_overlap_max",
    "generate_case",
    "equality_check",
    "ratio_search",
    "pairing_defect",
]

CASE_KINDS = ("diagonal", "nonnegative", "nonpositive", "odeco", "case6")


class DominanceError(RuntimeError):
    """A real tensor produced Q < Z beyond solver tolerance."""


@dataclass(frozen=True)
class QEigenpair:
    lam: float
    z: np.ndarray
    residual: float
    cluster_size: int = 1


@dataclass
class QSpectrumReport:
    entries: list[QEigenpair]
    count_bound: int
    pairing_ok: bool
    embedded: SpectrumReport
    variant: str = "theorem4"

    @property
    def q_eigenvalues(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def entanglement_eigenvalue(self) -> float:
        return float(self.q_eigenvalues.max())

    @property
    def bound_ok(self) -> bool:
        return len(self.entries) <= self.count_bound

    @property
    def max_residual(self) -> float:
        return max(e.residual for e in self.entries)


def _as_complex(psi) -> ComplexSymTensor:
    return psi if isinstance(psi, ComplexSymTensor) else ComplexSymTensor(psi)


def count_bound(m: int, n: int) -> int:
    """Most Q-eigenvalues an order-``m`` dimension-``n`` tensor can have.

    ``((m-1)^(2n) - 1) / (m - 2)`` for ``m >= 3``; ``2n`` (the embedded
    matrix size) for ``m = 2``.
    """
    if m < 2 or n < 1:
        raise TensorError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    if m == 2:
        return 2 * n
    return ((m - 1) ** (2 * n) - 1) // (m - 2)


def pair_map_q(z, m: int) -> np.ndarray:
    """``z * exp(i pi / m)``: sends a Q-eigenvector for ``lambda`` to one for ``-lambda``."""
    return np.asarray(z, dtype=complex) * cmath.exp(1j * math.pi / m)


def verify_qeig(psi, lam: float, z, unit_tol: float = 1e-10) -> float:
    """``|Psi z^{m-1} - lam conj(z)|_2`` for a unit ``z``.

    Since ``z . conj(z) = 1``, ``|Psi z^m - lam|`` never exceeds this residual.
    """
    psi = _as_complex(psi)
    z = np.asarray(z, dtype=complex)
    if abs(np.vdot(z, z).real - 1.0) > unit_tol:
        raise TensorError(f"z is not a unit vector (|z|^2 = {np.vdot(z, z).real:.15g})")
    return float(np.linalg.norm(complex_contract_m1(psi, z) - lam * np.conj(z)))


def _canonical_phase(z: np.ndarray, m: int) -> np.ndarray:
    """Rotate by the m-th root of unity that brings the largest component closest to the positive axis.

    Only these rotations preserve the eigen equation.
    """
    k = int(np.argmax(np.abs(z)))
    turns = np.round(-np.angle(z[k]) * m / (2 * math.pi))
    return z * cmath.exp(2j * math.pi * turns / m)


def pairing_defect(values: Iterable[float]) -> float:
    """Largest distance from some ``lambda`` to the nearest ``-mu`` in the set."""
    vals = np.asarray(list(values), dtype=float)
    if vals.size == 0:
        return 0.0
    return float(np.abs(vals[:, None] + vals[None, :]).min(axis=1).max())


def qeig_all(psi, cfg: SolverConfig | None = None, variant: str = "theorem4",
             seed_real: bool = True) -> QSpectrumReport:
    """All Q-eigenpairs found through the real embedding.

    Each Z-eigenvector of the embedded tensor is mapped back to ``z``, its phase
    canonicalized, and the pair re-verified directly against ``Psi``. For a
    real ``Psi`` with ``seed_real`` set, the Z-eigenvectors of ``Psi`` itself
    (which are Q-eigenvectors too) are added as starting points; this recovers
    saddle-type eigenvalues that ascent and descent alone tend to miss.
    """
    cfg = cfg or SolverConfig()
    psi = _as_complex(psi)
    if psi.is_zero():
        raise TensorError("Q-spectrum of the zero tensor is not defined here")
    m, n = psi.order, psi.dim
    emb = embed(psi, variant)
    partner = None if m == 2 else partner_map(m, variant)
    extra = None
    if seed_real and m > 2 and psi.is_real:
        real_spec = zeig_multistart(psi.real_part, cfg)
        extra = [eigenvector_from_state(e.vector, variant) for e in real_spec.entries]
    report = zeig_multistart(emb.target, cfg, extra_starts=extra, partner=partner)
    entries = []
    for e in report.entries:
        z = state_from_eigenvector(e.vector, variant)
        z = _canonical_phase(z / np.linalg.norm(z), m)
        entries.append(QEigenpair(e.lam, z, verify_qeig(psi, e.lam, z), e.cluster_size))
    pairing_ok = pairing_defect([e.lam for e in entries]) <= cfg.dedup_tol
    return QSpectrumReport(entries, count_bound(m, n), pairing_ok, report, variant)


def direct_overlap_max(psi, cfg: SolverConfig | None = None, starts: int | None = None) -> float:
    """``max |Psi z^m|`` over unit complex ``z``, by multistart L-BFGS in ``2n`` real coordinates.

    Works on ``Psi`` directly and never forms the embedded tensor.
    """
    cfg = cfg or SolverConfig()
    psi = _as_complex(psi)
    if psi.is_zero():
        raise TensorError("zero tensor")
    m, n = psi.order, psi.dim
    starts = starts or 20 * n

    def neg_obj(v):
        z = v[:n] + 1j * v[n:]
        N = float(v @ v)
        s = complex_apply_m(psi, z)
        g = m * complex_contract_m1(psi, z)
        s2 = abs(s) ** 2
        grad_s2 = np.concatenate([2 * (np.conj(s) * g).real, -2 * (np.conj(s) * g).imag])
        val = s2 / N ** m
        grad = grad_s2 / N ** m - 2 * m * s2 * v / N ** (m + 1)
        return -val, -grad

    rng = np.random.default_rng(cfg.seed + 1)
    best = 0.0
    for _ in range(starts):
        v0 = rng.standard_normal(2 * n)
        sol = minimize(neg_obj, v0 / np.linalg.norm(v0), jac=True, method="L-BFGS-B",
                       options={"gtol": 1e-14, "ftol": 1e-16, "maxiter": cfg.max_iter})
        u = sol.x / np.linalg.norm(sol.x)
        best = max(best, abs(complex_apply_m(psi, u[:n] + 1j * u[n:])))
    return float(best)


def entanglement_eigenvalue(psi, cfg: SolverConfig | None = None, cross_check: bool = True) -> float:
    """Largest Q-eigenvalue, optionally checked against :func:`direct_overlap_max`."""
    cfg = cfg or SolverConfig()
    q = qeig_all(psi, cfg).entanglement_eigenvalue
    if cross_check:
        d = direct_overlap_max(psi, cfg)
        if abs(d - q) > 1e-6 * max(1.0, q):
            warnings.warn(f"entanglement eigenvalue {q:.12g} disagrees with direct overlap "
                          f"maximum {d:.12g}", RuntimeWarning)
    return q


# ------------------------------------------------------------ equality cases


def generate_case(kind: str, m: int, n: int, seed: int = 0, alpha: Sequence[float] | None = None,
                  basis: np.ndarray | None = None) -> SymTensor:
    """Random real tensor from a family on which ``Q = Z`` is known to hold.

    ``diagonal``: diagonal entries in [-1, 1]. ``nonnegative`` / ``nonpositive``:
    every orbit in [0, 1] / [-1, 0]. ``odeco``: ``sum_k alpha_k y_k^m`` over an
    orthonormal basis (random unless ``alpha`` / ``basis`` are given).
    ``case6`` (even ``m >= 4``): only entries whose indices split into two
    halves of equal indices, with each diagonal entry at least
    ``C(m-1, m/2)`` times larger in magnitude than every off-diagonal entry
    that shares one of its indices.
    """
    if kind not in CASE_KINDS:
        raise TensorError(f"unknown kind {kind!r}; expected one of {CASE_KINDS}")
    if m < 2 or n < 2:
        raise TensorError("need m, n >= 2")
    rng = np.random.default_rng(seed)
    keys = orbit_keys(m, n)
    if kind == "diagonal":
        return SymTensor.diagonal(m, rng.uniform(-1, 1, n))
    if kind in ("nonnegative", "nonpositive"):
        vals = rng.uniform(0, 1, len(keys))
        return SymTensor(m, n, vals if kind == "nonnegative" else -vals)
    if kind == "odeco":
        alpha = rng.uniform(-1, 1, n) if alpha is None else np.asarray(alpha, dtype=float)
        if basis is None:
            basis, r = np.linalg.qr(rng.standard_normal((n, n)))
            basis = basis * np.sign(np.diag(r))
        basis = np.asarray(basis, dtype=float)
        if basis.shape != (n, n) or not np.allclose(basis.T @ basis, np.eye(n), atol=1e-12):
            raise TensorError("basis must be an n x n orthogonal matrix (columns are the vectors)")
        vals = (basis[keys].prod(axis=1) * alpha).sum(axis=1)
        return SymTensor(m, n, vals)
    # case6
    if m % 2 or m < 4:
        raise TensorError("case6 needs even m >= 4")
    half = m // 2
    factor = comb(m - 1, half, exact=True)
    diag = rng.uniform(0.5, 1.0, n) * rng.choice([-1.0, 1.0], n)
    vals = np.zeros(len(keys))
    is_diag = np.all(keys == keys[:, :1], axis=1)
    vals[is_diag] = diag[keys[is_diag, 0]]
    split = (keys[:, :half] == keys[:, :1]).all(axis=1) & (keys[:, half:] == keys[:, -1:]).all(axis=1)
    off = split & ~is_diag
    i, j = keys[off, 0], keys[off, -1]
    cap = np.minimum(np.abs(diag[i]), np.abs(diag[j])) / factor
    vals[off] = cap * rng.uniform(-1, 1, off.sum())
    return SymTensor(m, n, vals)


@dataclass(frozen=True)
class EqualityRecord:
    q: float
    z: float
    gap: float
    holds: bool

    @property
    def ratio(self) -> float:
        return self.q / self.z


def equality_check(psi: SymTensor, cfg: SolverConfig | None = None) -> EqualityRecord:
    """Compare ``Q`` and ``Z`` of a real tensor; ``holds`` means ``Q - Z < 1e-6``.

    Raises :class:`DominanceError` if ``Q < Z - 1e-8``.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(psi, SymTensor):
        raise TypeError("equality_check takes a real SymTensor")
    if psi.is_zero():
        raise TensorError("zero tensor")
    q = qeig_all(ComplexSymTensor(psi), cfg, seed_real=False).entanglement_eigenvalue
    z = zeig_multistart(psi, cfg).z_spectral_radius
    if q < z - 1e-8:
        raise DominanceError(f"Q = {q:.15g} < Z = {z:.15g}")
    gap = q - z
    return EqualityRecord(q, z, gap, gap < 1e-6)


# ------------------------------------------------------------- ratio search


CEILING_NOTE = {
    "formula": "2^((m-1)/2) * rho(m, 2n) / mu(m, n)",
    "rho": None,
    "mu": None,
    "evaluable": False,
}


@dataclass
class RatioReport:
    m: int
    n: int
    budget: int
    seed: int
    samples: int = 0
    skipped: int = 0
    best_ratio: float = 1.0
    witness: SymTensor | None = None
    witness_q: float | None = None
    witness_z: float | None = None
    families: dict = field(default_factory=dict)
    ceiling: dict = field(default_factory=lambda: dict(CEILING_NOTE))
    wall_time: float = 0.0


def _evaluate(args):
    T, cfg = args
    if T.is_zero():
        return None
    rec = equality_check(T, cfg)
    if rec.z < 1e-8:
        return None
    return rec


def _sample(family: str, m: int, n: int, rng: np.random.Generator, witness: SymTensor | None,
            scale: float) -> SymTensor:
    K = len(orbit_keys(m, n))
    if family == "perturb" and witness is not None:
        amp = scale * float(np.abs(witness.values).max())
        return SymTensor(m, n, witness.values + amp * rng.standard_normal(K))
    if family in ("gaussian", "perturb"):
        return SymTensor(m, n, rng.standard_normal(K))
    return generate_case(family, m, n, int(rng.integers(2**31)))


def ratio_search(m: int, n: int, budget: int, cfg: SolverConfig | None = None,
                 families: Sequence[str] = ("gaussian", "perturb"),
                 seed_witness: SymTensor | None = None, perturb_scale: float = 0.1,
                 workers: int = 1, round_size: int = 8) -> RatioReport:
    """Empirical lower bound on ``sup Q/Z`` over real symmetric tensors.

    ``families`` may mix ``gaussian`` (independent normal orbit values),
    ``perturb`` (noise around the current best) and the equality families of
    :func:`generate_case`, which act as controls. Samples are drawn one round
    at a time from a seeded generator and reduced in order, so the result
    does not depend on ``workers``. The upper ceiling involves constants that
    are not computable here and is reported symbolically.
    """
    cfg = cfg or SolverConfig(num_starts=20 * n)
    t0 = time.perf_counter()
    report = RatioReport(m, n, budget, cfg.seed)
    if m == 2:
        report.wall_time = time.perf_counter() - t0
        return report
    for fam in families:
        if fam not in ("gaussian", "perturb") + CASE_KINDS:
            raise ValueError(f"unknown family {fam!r}")
    rng = np.random.default_rng(cfg.seed)
    best = 0.0

    def absorb(family, T, rec):
        nonlocal best
        stats = report.families.setdefault(family, {"samples": 0, "skipped": 0, "best_ratio": None})
        report.samples += 1
        stats["samples"] += 1
        if rec is None:
            report.skipped += 1
            stats["skipped"] += 1
            return
        r = rec.q / rec.z
        if stats["best_ratio"] is None or r > stats["best_ratio"]:
            stats["best_ratio"] = r
        if r > best:
            best = r
            report.witness, report.witness_q, report.witness_z = T, rec.q, rec.z

    if seed_witness is not None:
        absorb("seed", seed_witness, _evaluate((seed_witness, cfg)))
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        done = 0
        while done < budget:
            size = min(round_size, budget - done)
            fams = [families[(done + k) % len(families)] for k in range(size)]
            batch = [_sample(f, m, n, rng, report.witness, perturb_scale) for f in fams]
            jobs = [(T, cfg) for T in batch]
            results = list(pool.map(_evaluate, jobs)) if pool else [_evaluate(j) for j in jobs]
            for f, T, rec in zip(fams, batch, results):
                absorb(f, T, rec)
            done += size
    finally:
        if pool:
            pool.shutdown()
    report.best_ratio = best if report.witness is not None else 1.0
    report.wall_time = time.perf_counter() - t0
    return report
