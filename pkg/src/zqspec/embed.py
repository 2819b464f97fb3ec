"""Real symmetric embedding of a complex symmetric tensor.

``Psi = A + iB`` of order ``m`` and dimension ``n`` maps to a real symmetric
tensor ``T`` of order ``m`` and dimension ``2n``. An index ``i > n`` is "high"
and reduces to ``i - n``. An entry of ``T`` with ``2j`` high indices is
``(-1)^j A`` at the reduced indices; one with ``2j + 1`` high indices is
``(-1)^(j+1) B``. With ``w = (Re z, Im z)`` this gives

    T w^{m-1} = (Re conj(Psi z^{m-1}), Im conj(Psi z^{m-1}))

so ``Psi z^{m-1} = lambda conj(z)`` holds exactly when ``T w^{m-1} = lambda w``.
For ``m = 2`` the same rule produces the block matrix ``[[A, -B], [-B, -A]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .tensor import ComplexSymTensor, SymTensor, TensorError, frobenius_norm, orbit_keys, _orbit_table

__all__ = [
    "Embedding",
    "embed",
    "embed_matrix",
    "embed_tensor",
    "unembed",
    "lift_vector",
    "project_vector",
    "pair_partner",
    "phase_partner",
    "partner_map",
    "state_from_eigenvector",
    "eigenvector_from_state",
]

Variant = Literal["theorem4", "remark_m3"]
VARIANTS = ("theorem4", "remark_m3")


@dataclass(frozen=True)
class Embedding:
    source: ComplexSymTensor
    target: SymTensor
    variant: str

    @property
    def scale_fact(self) -> float:
        """Ratio of target to source Frobenius norm, ``2^((m-1)/2)``."""
        return 2.0 ** ((self.source.order - 1) / 2)

    def norm_defect(self) -> float:
        """Relative deviation of the measured norm ratio from ``scale_fact``."""
        src = frobenius_norm(self.source)
        if src == 0:
            return frobenius_norm(self.target)
        return abs(frobenius_norm(self.target) / (self.scale_fact * src) - 1.0)


def _as_complex(psi) -> ComplexSymTensor:
    if isinstance(psi, SymTensor):
        return ComplexSymTensor(psi)
    if not isinstance(psi, ComplexSymTensor):
        raise TypeError(f"expected SymTensor or ComplexSymTensor, got {type(psi).__name__}")
    return psi


def _embedded_values(psi: ComplexSymTensor, sign_a, sign_b) -> SymTensor:
    m, n = psi.order, psi.dim
    keys = orbit_keys(m, 2 * n)
    high = (keys >= n).sum(axis=1)
    base = np.sort(keys % n, axis=1)
    position = _orbit_table(m, n)[2]
    src = np.array([position[tuple(int(i) for i in k)] for k in base], dtype=np.intp)
    even = high % 2 == 0
    vals = np.where(
        even,
        sign_a(high) * psi.real_part.values[src],
        sign_b(high) * psi.imag_part.values[src],
    )
    return SymTensor(m, 2 * n, vals)


def _theorem4_signs():
    # 2j high -> (-1)^j A ; 2j+1 high -> (-1)^(j+1) B
    return (lambda h: (-1.0) ** (h // 2), lambda h: (-1.0) ** (h // 2 + 1))


def embed_matrix(psi) -> SymTensor:
    """The ``2n x 2n`` matrix ``[[A, -B], [-B, -A]]`` for an order-2 ``Psi``."""
    psi = _as_complex(psi)
    if psi.order != 2:
        raise TensorError(f"embed_matrix needs order 2, got {psi.order}")
    return _embedded_values(psi, *_theorem4_signs())


def embed_tensor(psi, variant: Variant = "theorem4") -> SymTensor:
    """Order-``m``, dimension-``2n`` real embedding of ``Psi`` for ``m >= 3``.

    ``variant="remark_m3"`` (order 3 only) uses the sign table
    ``A, +B, -A, -B`` for 0, 1, 2, 3 high indices. That tensor is the default
    one with every high coordinate negated, so its eigenvalues agree and its
    eigenvectors are ``(x, -y)`` where the default has ``(x, y)``.
    """
    psi = _as_complex(psi)
    if psi.order < 3:
        raise TensorError(f"embed_tensor needs order >= 3, got {psi.order}")
    if variant == "theorem4":
        return _embedded_values(psi, *_theorem4_signs())
    if variant == "remark_m3":
        if psi.order != 3:
            raise TensorError("remark_m3 variant is only defined for order 3")
        table_a = {0: 1.0, 2: -1.0}
        table_b = {1: 1.0, 3: -1.0}
        return _embedded_values(
            psi,
            lambda h: np.vectorize(lambda k: table_a.get(int(k), 0.0))(h),
            lambda h: np.vectorize(lambda k: table_b.get(int(k), 0.0))(h),
        )
    raise TensorError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def embed(psi, variant: Variant = "theorem4") -> Embedding:
    """Embed ``Psi``, using the block matrix for order 2 and the sign rule otherwise."""
    psi = _as_complex(psi)
    if psi.order == 2:
        if variant != "theorem4":
            raise TensorError("order-2 tensors only support the theorem4 variant")
        target = embed_matrix(psi)
    else:
        target = embed_tensor(psi, variant)
    return Embedding(psi, target, variant)


def unembed(T: SymTensor, variant: Variant = "theorem4") -> ComplexSymTensor:
    """Recover ``Psi`` from its embedding; raises if ``T`` is not an embedding."""
    m, N = T.order, T.dim
    if N % 2:
        raise TensorError(f"embedded dimension must be even, got {N}")
    n = N // 2
    keys = orbit_keys(m, n)
    a = np.array([T[tuple(int(i) + 1 for i in k)] for k in keys])
    b = np.array([T[tuple(int(i) + 1 for i in k[:-1]) + (int(k[-1]) + n + 1,)] for k in keys])
    if variant == "theorem4":
        b = -b
    psi = ComplexSymTensor(SymTensor(m, n, a), SymTensor(m, n, b))
    back = embed(psi, variant).target
    if not np.allclose(back.values, T.values, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(T.values).max())):
        raise TensorError(f"tensor is not a {variant} embedding")
    return psi


def lift_vector(z) -> np.ndarray:
    """``x + iy -> (x, y)``."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def _halves(w):
    w = np.asarray(w, dtype=float)
    if w.shape[-1] % 2:
        raise TensorError(f"vector length {w.shape[-1]} is odd")
    n = w.shape[-1] // 2
    return w[..., :n], w[..., n:]


def project_vector(w) -> np.ndarray:
    """``(x, y) -> x + iy``; inverse of :func:`lift_vector`."""
    x, y = _halves(w)
    return x + 1j * y


def pair_partner(w) -> np.ndarray:
    """``(x, y) -> (y, -x)``, i.e. multiplication of ``z`` by ``-i``.

    For order 2 (and any order congruent to 2 mod 4) this carries an
    eigenpair ``(lambda, w)`` of the embedded tensor to ``(-lambda, w_hat)``.
    Other orders need :func:`phase_partner`.
    """
    x, y = _halves(w)
    return np.concatenate([y, -x], axis=-1)


def phase_partner(w, order: int) -> np.ndarray:
    """Lift of ``z * exp(i pi / m)``: the partner of ``(lambda, w)`` at ``-lambda``.

    Valid for every order. For ``m = 2`` it equals ``-pair_partner(w)``.
    """
    return lift_vector(project_vector(w) * np.exp(1j * math.pi / order))


def _flip_high(w) -> np.ndarray:
    x, y = _halves(w)
    return np.concatenate([x, -y], axis=-1)


def state_from_eigenvector(w, variant: Variant = "theorem4") -> np.ndarray:
    """Complex vector ``z`` behind a Z-eigenvector of the embedded tensor."""
    return project_vector(_flip_high(w) if variant == "remark_m3" else w)


def eigenvector_from_state(z, variant: Variant = "theorem4") -> np.ndarray:
    w = lift_vector(z)
    return _flip_high(w) if variant == "remark_m3" else w


def partner_map(order: int, variant: Variant = "theorem4"):
    """Callable sending an embedded eigenvector for ``lambda`` to one for ``-lambda``."""
    if variant == "remark_m3":
        return lambda w: _flip_high(phase_partner(_flip_high(w), order))
    return lambda w: phase_partner(w, order)
