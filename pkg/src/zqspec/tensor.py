"""Dense symmetric tensors stored by canonical index orbit.

A real symmetric tensor of order ``m`` and dimension ``n`` is determined by its
values on nondecreasing index tuples. Each such tuple stands for an orbit of
``m! / prod(c_k!)`` positions of the dense array, where ``c_k`` counts how often
index ``k`` occurs. All sums over the dense array become orbit sums weighted by
that multiplicity.

Indices are 1-based at the public boundary (``from_entries``, ``entries``) and
0-based everywhere inside the package.
"""
from __future__ import annotations

import itertools
import math
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "TensorError",
    "SymmetryError",
    "SymTensor",
    "ComplexSymTensor",
    "orbit_keys",
    "orbit_multiplicity",
    "symmetrize",
    "contract_m1",
    "contract_m2",
    "apply_m",
    "frobenius_norm",
    "complex_contract_m1",
    "complex_apply_m",
]


class TensorError(ValueError):
    """Bad shape, order, dimension or index."""


class SymmetryError(TensorError):
    """Two permutations of one orbit were given different values."""


def orbit_multiplicity(key: Sequence[int]) -> int:
    """Number of distinct permutations of ``key``."""
    counts = np.bincount(np.asarray(key, dtype=int))
    return math.factorial(len(key)) // math.prod(math.factorial(int(c)) for c in counts)


_ORBIT_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, dict]] = {}


def _orbit_table(order: int, dim: int):
    cached = _ORBIT_CACHE.get((order, dim))
    if cached is None:
        keys = np.array(
            list(itertools.combinations_with_replacement(range(dim), order)), dtype=np.intp
        ).reshape(-1, order)
        mult = np.array([orbit_multiplicity(k) for k in keys], dtype=float)
        position = {tuple(int(i) for i in k): p for p, k in enumerate(keys)}
        for arr in (keys, mult):
            arr.setflags(write=False)
        cached = (keys, mult, position)
        _ORBIT_CACHE[(order, dim)] = cached
    return cached


def orbit_keys(order: int, dim: int) -> np.ndarray:
    """All canonical (sorted, 0-based) index tuples, in lexicographic order."""
    return _orbit_table(order, dim)[0]


def _check_shape(order: int, dim: int, min_dim: int = 2) -> None:
    if int(order) != order or order < 2:
        raise TensorError(f"order must be an integer >= 2, got {order!r}")
    if int(dim) != dim or dim < min_dim:
        raise TensorError(f"dim must be an integer >= {min_dim}, got {dim!r}")


class SymTensor:
    """Real symmetric tensor of order ``m`` and dimension ``n``.

    Values are held as one float per canonical orbit, aligned with
    :func:`orbit_keys`. Instances are immutable. The constructor accepts
    ``dim == 1`` for small test cases; the ingestion paths require ``dim >= 2``.
    """

    def __init__(self, order: int, dim: int, values=None):
        _check_shape(order, dim, min_dim=1)
        self.order = int(order)
        self.dim = int(dim)
        n_orbits = len(orbit_keys(self.order, self.dim))
        if values is None:
            vals = np.zeros(n_orbits)
        else:
            vals = np.array(values, dtype=float).reshape(-1)
            if vals.shape != (n_orbits,):
                raise TensorError(f"expected {n_orbits} orbit values, got {vals.size}")
            if not np.all(np.isfinite(vals)):
                raise TensorError("tensor values must be finite")
        vals.setflags(write=False)
        self._values = vals

    # construction -------------------------------------------------------

    @classmethod
    def from_entries(cls, order: int, dim: int, entries: Mapping[Sequence[int], float] | Iterable,
                     strict: bool = True) -> "SymTensor":
        """Build from 1-based ``{index tuple: value}`` (or a sequence of pairs)."""
        return symmetrize(order, dim, entries, strict=strict)

    @classmethod
    def from_dense(cls, array, atol: float = 1e-12) -> "SymTensor":
        """Build from a full ``n x ... x n`` array, which must already be symmetric."""
        arr = np.asarray(array, dtype=float)
        if arr.ndim < 2 or len(set(arr.shape)) != 1:
            raise TensorError(f"dense tensor must be square with ndim >= 2, got shape {arr.shape}")
        order, dim = arr.ndim, arr.shape[0]
        scale = max(1.0, float(np.abs(arr).max(initial=0.0)))
        for perm in itertools.permutations(range(order)):
            if not np.allclose(arr, arr.transpose(perm), rtol=0, atol=atol * scale):
                raise SymmetryError("dense array is not symmetric")
        keys = orbit_keys(order, dim)
        return cls(order, dim, arr[tuple(keys.T)])

    @classmethod
    def diagonal(cls, order: int, diag: Sequence[float]) -> "SymTensor":
        diag = np.asarray(diag, dtype=float)
        keys = orbit_keys(order, len(diag))
        vals = np.zeros(len(keys))
        on_diag = np.all(keys == keys[:, :1], axis=1)
        vals[on_diag] = diag[keys[on_diag, 0]]
        return cls(order, len(diag), vals)

    @classmethod
    def identity_matrix(cls, dim: int) -> "SymTensor":
        return cls.diagonal(2, np.ones(dim))

    # views --------------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def keys(self) -> np.ndarray:
        return orbit_keys(self.order, self.dim)

    @property
    def multiplicities(self) -> np.ndarray:
        return _orbit_table(self.order, self.dim)[1]

    @property
    def entries(self) -> dict[tuple[int, ...], float]:
        """Nonzero orbits as ``{1-based sorted tuple: value}``."""
        nz = np.flatnonzero(self._values)
        return {tuple(int(i) + 1 for i in self.keys[p]): float(self._values[p]) for p in nz}

    def __getitem__(self, index) -> float:
        """Dense lookup with a 1-based index tuple in any order."""
        idx = tuple(sorted(int(i) - 1 for i in index))
        if len(idx) != self.order or min(idx) < 0 or max(idx) >= self.dim:
            raise TensorError(f"index {index} out of range for order {self.order}, dim {self.dim}")
        return float(self._values[_orbit_table(self.order, self.dim)[2][idx]])

    def to_dense(self) -> np.ndarray:
        out = np.empty((self.dim,) * self.order)
        for key, v in zip(self.keys, self._values):
            for perm in set(itertools.permutations(key)):
                out[perm] = v
        return out

    def is_zero(self) -> bool:
        return not np.any(self._values)

    # arithmetic ---------------------------------------------------------

    def _like(self, values) -> "SymTensor":
        return type(self)(self.order, self.dim, values)

    def __mul__(self, c: float) -> "SymTensor":
        return self._like(float(c) * self._values)

    __rmul__ = __mul__

    def __neg__(self) -> "SymTensor":
        return self._like(-self._values)

    def __add__(self, other: "SymTensor") -> "SymTensor":
        if not isinstance(other, SymTensor):
            return NotImplemented
        if (other.order, other.dim) != (self.order, self.dim):
            raise TensorError("shape mismatch")
        return self._like(self._values + other._values)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self.order, self.dim) == (other.order, other.dim) and np.array_equal(
            self._values, other._values)

    def __hash__(self):
        return hash((self.order, self.dim, self._values.tobytes()))

    def __repr__(self) -> str:
        return f"SymTensor(order={self.order}, dim={self.dim}, nonzero_orbits={np.count_nonzero(self._values)})"

    # contraction machinery ----------------------------------------------

    @cached_property
    def _sparse(self):
        """Nonzero orbits with their weights and a one-hot scatter matrix."""
        nz = np.flatnonzero(self._values)
        keys = self.keys[nz]
        coef = self._values[nz] * self.multiplicities[nz]
        scatter = np.zeros((keys.size, self.dim))
        scatter[np.arange(keys.size), keys.T.ravel()] = 1.0  # row p*K + k
        return keys, coef, scatter

    def _contract(self, w: np.ndarray) -> np.ndarray:
        keys, coef, scatter = self._sparse
        m = self.order
        if keys.size == 0:
            return np.zeros(w.shape, dtype=np.result_type(w, float))
        W = w[..., keys.T]  # (..., m, K)
        # excl[p] = coef * prod_{q != p} W[q], built from prefix and suffix products
        prefix = [None] * m
        acc = np.broadcast_to(coef, W.shape[:-2] + coef.shape).astype(W.dtype)
        for p in range(m):
            prefix[p] = acc
            acc = acc * W[..., p, :]
        excl = np.empty_like(W)
        acc = None
        for p in range(m - 1, -1, -1):
            excl[..., p, :] = prefix[p] if acc is None else prefix[p] * acc
            acc = W[..., p, :] if acc is None else acc * W[..., p, :]
        flat = excl.reshape(*excl.shape[:-2], -1)
        return (flat @ scatter) / m

    def _apply(self, w: np.ndarray) -> np.ndarray:
        keys, coef, _ = self._sparse
        if keys.size == 0:
            return np.zeros(w.shape[:-1], dtype=np.result_type(w, float))
        return w[..., keys].prod(axis=-1) @ coef

    @cached_property
    def _pair_scatter(self):
        keys, _, _ = self._sparse
        m, n = self.order, self.dim
        cols = np.arange(m)
        pairs = []
        for p, q in itertools.combinations(range(m), 2):
            onehot = np.zeros((len(keys), n * n))
            rows = np.arange(len(keys))
            np.add.at(onehot, (rows, keys[:, p] * n + keys[:, q]), 1.0)
            np.add.at(onehot, (rows, keys[:, q] * n + keys[:, p]), 1.0)
            pairs.append(((cols != p) & (cols != q), onehot))
        return pairs

    def _hessian(self, w: np.ndarray) -> np.ndarray:
        keys, coef, _ = self._sparse
        m, n = self.order, self.dim
        out = np.zeros(w.shape[:-1] + (n * n,), dtype=np.result_type(w, float))
        if keys.size == 0:
            return out.reshape(w.shape[:-1] + (n, n))
        W = w[..., keys]
        for mask, onehot in self._pair_scatter:
            out += (W[..., mask].prod(axis=-1) * coef) @ onehot
        return out.reshape(w.shape[:-1] + (n, n)) / (m * (m - 1))


class ComplexSymTensor:
    """``A + iB`` with ``A`` and ``B`` real symmetric tensors of the same shape."""

    __slots__ = ("real_part", "imag_part")

    def __init__(self, real_part: SymTensor, imag_part: SymTensor | None = None):
        if imag_part is None:
            imag_part = SymTensor(real_part.order, real_part.dim)
        if (real_part.order, real_part.dim) != (imag_part.order, imag_part.dim):
            raise TensorError("real and imaginary parts must share order and dim")
        self.real_part = real_part
        self.imag_part = imag_part

    @classmethod
    def from_entries(cls, order: int, dim: int, entries, strict: bool = True) -> "ComplexSymTensor":
        """Build from 1-based ``{index tuple: complex value}`` or a sequence of pairs."""
        items = list(entries.items()) if isinstance(entries, Mapping) else list(entries)
        re = symmetrize(order, dim, [(k, complex(v).real) for k, v in items], strict=strict)
        im = symmetrize(order, dim, [(k, complex(v).imag) for k, v in items], strict=strict)
        return cls(re, im)

    @classmethod
    def from_dense(cls, array, atol: float = 1e-12) -> "ComplexSymTensor":
        arr = np.asarray(array, dtype=complex)
        return cls(SymTensor.from_dense(arr.real, atol), SymTensor.from_dense(arr.imag, atol))

    @property
    def order(self) -> int:
        return self.real_part.order

    @property
    def dim(self) -> int:
        return self.real_part.dim

    @property
    def is_real(self) -> bool:
        return self.imag_part.is_zero()

    def is_zero(self) -> bool:
        return self.real_part.is_zero() and self.imag_part.is_zero()

    def to_dense(self) -> np.ndarray:
        return self.real_part.to_dense() + 1j * self.imag_part.to_dense()

    def conj(self) -> "ComplexSymTensor":
        return ComplexSymTensor(self.real_part, -self.imag_part)

    def __mul__(self, c: float) -> "ComplexSymTensor":
        return ComplexSymTensor(self.real_part * c, self.imag_part * c)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexSymTensor":
        return ComplexSymTensor(-self.real_part, -self.imag_part)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexSymTensor):
            return NotImplemented
        return self.real_part == other.real_part and self.imag_part == other.imag_part

    def __hash__(self):
        return hash((self.real_part, self.imag_part))

    def __repr__(self) -> str:
        return f"ComplexSymTensor(order={self.order}, dim={self.dim})"


def symmetrize(order: int, dim: int, entries, strict: bool = True) -> SymTensor:
    """Ingest raw 1-based entries into a :class:`SymTensor`.

    Every orbit takes the mean of the raw values supplied for any of its
    permutations, so a value given at one representative is broadcast to the
    whole orbit. With ``strict`` set, differing values within one orbit raise
    :class:`SymmetryError` instead of being averaged.
    """
    _check_shape(order, dim)
    items = list(entries.items()) if isinstance(entries, Mapping) else list(entries)
    _, _, position = _orbit_table(order, dim)
    seen: dict[int, list[float]] = {}
    for idx, value in items:
        idx = tuple(int(i) for i in idx)
        if len(idx) != order:
            raise TensorError(f"index {idx} has length {len(idx)}, expected {order}")
        if min(idx) < 1 or max(idx) > dim:
            raise TensorError(f"index {idx} out of range [1, {dim}]")
        seen.setdefault(position[tuple(sorted(i - 1 for i in idx))], []).append(float(value))
    vals = np.zeros(len(position))
    for p, raw in seen.items():
        if strict and len(raw) > 1:
            ref = raw[0]
            tol = 1e-12 * max(1.0, max(abs(r) for r in raw))
            if any(abs(r - ref) > tol for r in raw):
                key = tuple(int(i) + 1 for i in orbit_keys(order, dim)[p])
                raise SymmetryError(f"conflicting values {raw} for permutations of {key}")
        vals[p] = raw[0] if strict else float(np.mean(raw))
    return SymTensor(order, dim, vals)


def _vector(T, w, dtype=float) -> np.ndarray:
    w = np.asarray(w, dtype=dtype)
    if w.shape[-1:] != (T.dim,):
        raise TensorError(f"vector length {w.shape[-1:]} does not match dim {T.dim}")
    return w


def contract_m1(T: SymTensor, w) -> np.ndarray:
    """``(T w^{m-1})_i``: contract every index but the first with ``w``.

    ``w`` may carry leading batch axes.
    """
    return T._contract(_vector(T, w))


def contract_m2(T: SymTensor, w) -> np.ndarray:
    """The matrix ``T w^{m-2}`` (for ``m = 2`` this is the matrix itself)."""
    return T._hessian(_vector(T, w))


def apply_m(T: SymTensor, w) -> float | np.ndarray:
    """``T w^m``, the full contraction."""
    out = T._apply(_vector(T, w))
    return float(out) if np.ndim(out) == 0 else out


def frobenius_norm(T: SymTensor | ComplexSymTensor) -> float:
    """Frobenius norm; for complex tensors ``sqrt(|A|^2 + |B|^2)``."""
    if isinstance(T, ComplexSymTensor):
        return math.hypot(frobenius_norm(T.real_part), frobenius_norm(T.imag_part))
    return math.sqrt(float(np.dot(T.values ** 2, T.multiplicities)))


def complex_contract_m1(psi: ComplexSymTensor, z) -> np.ndarray:
    """``Psi z^{m-1}`` for complex ``z``."""
    z = _vector(psi, z, complex)
    return psi.real_part._contract(z) + 1j * psi.imag_part._contract(z)


def complex_apply_m(psi: ComplexSymTensor, z) -> complex | np.ndarray:
    z = _vector(psi, z, complex)
    out = psi.real_part._apply(z) + 1j * psi.imag_part._apply(z)
    return complex(out) if np.ndim(out) == 0 else out
