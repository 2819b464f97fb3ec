"""Tensor files, verification bundles and witness archives (JSON)."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .tensor import ComplexSymTensor, SymTensor, TensorError, symmetrize

__all__ = [
    "TensorFileError",
    "WitnessDriftError",
    "parse_tensor_file",
    "parse_tensor_document",
    "serialize_tensor",
    "tensor_document",
    "load_tensor",
    "save_tensor",
    "parse_bundle",
    "save_witness",
    "load_witness",
]


class TensorFileError(TensorError):
    """Malformed tensor file or bundle."""


class WitnessDriftError(ValueError):
    """Recomputed witness values differ from the archived ones."""


def _require(cond, msg):
    if not cond:
        raise TensorFileError(msg)


def _number(x, what):
    _require(isinstance(x, (int, float)) and not isinstance(x, bool), f"{what} must be a number")
    _require(math.isfinite(x), f"{what} must be finite")
    return float(x)


def parse_tensor_document(doc: dict):
    """Validate a decoded tensor document; returns ``(tensor, embedding_meta_or_None)``."""
    _require(isinstance(doc, dict), "tensor document must be a JSON object")
    for key in ("order", "dim", "field", "entries"):
        _require(key in doc, f"missing field {key!r}")
    order, dim, fld = doc["order"], doc["dim"], doc["field"]
    _require(isinstance(order, int) and not isinstance(order, bool), "order must be an integer")
    _require(isinstance(dim, int) and not isinstance(dim, bool), "dim must be an integer")
    _require(order >= 2 and dim >= 2, f"order and dim must be >= 2 (got order={order}, dim={dim})")
    _require(fld in ("real", "complex"), f"field must be 'real' or 'complex', got {fld!r}")
    strict = not doc.get("symmetrize", False)
    _require(isinstance(doc["entries"], list), "entries must be a list")
    re_items, im_items = [], []
    for k, rec in enumerate(doc["entries"]):
        _require(isinstance(rec, dict) and "idx" in rec, f"entry {k} needs an 'idx'")
        idx = rec["idx"]
        _require(isinstance(idx, list) and all(isinstance(i, int) and not isinstance(i, bool) for i in idx),
                 f"entry {k}: idx must be a list of integers")
        _require(len(idx) == order, f"entry {k}: idx has length {len(idx)}, expected {order}")
        _require(all(1 <= i <= dim for i in idx), f"entry {k}: index {idx} out of range [1, {dim}]")
        re = _number(rec.get("re", 0.0), f"entry {k}: re")
        re_items.append((idx, re))
        if fld == "complex":
            im_items.append((idx, _number(rec.get("im", 0.0), f"entry {k}: im")))
        else:
            _require("im" not in rec, f"entry {k}: 'im' given for a real tensor")
    A = symmetrize(order, dim, re_items, strict=strict)
    tensor = A if fld == "real" else ComplexSymTensor(A, symmetrize(order, dim, im_items, strict=strict))
    meta = doc.get("embedding")
    if meta is not None:
        _require(isinstance(meta, dict) and meta.get("variant") in ("theorem4", "remark_m3"),
                 "embedding metadata needs a variant")
    return tensor, meta


def parse_tensor_file(text: str):
    """Parse a tensor file into a :class:`SymTensor` or :class:`ComplexSymTensor`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"not valid JSON: {exc}") from None
    return parse_tensor_document(doc)[0]


def tensor_document(T, embedding: dict | None = None) -> dict:
    if isinstance(T, ComplexSymTensor):
        A, B, fld = T.real_part, T.imag_part, "complex"
    else:
        A, B, fld = T, None, "real"
    entries = []
    for p in np.flatnonzero((A.values != 0) | (B.values != 0 if B is not None else False)):
        rec = {"idx": [int(i) + 1 for i in A.keys[p]], "re": float(A.values[p])}
        if B is not None:
            rec["im"] = float(B.values[p])
        entries.append(rec)
    doc = {"order": A.order, "dim": A.dim, "field": fld, "entries": entries}
    if embedding is not None:
        doc["embedding"] = embedding
    return doc


def serialize_tensor(T, embedding: dict | None = None) -> str:
    """Canonical text: sorted orbits, nonzero entries only, exact doubles."""
    return json.dumps(tensor_document(T, embedding), indent=1) + "\n"


def load_tensor(path):
    return parse_tensor_file(Path(path).read_text(encoding="utf-8"))


def save_tensor(path, T, embedding: dict | None = None) -> None:
    Path(path).write_text(serialize_tensor(T, embedding), encoding="utf-8")


def parse_bundle(text: str):
    """Verification bundle: ``{"tensor": {...}, "kind": "q"|"z", "pairs": [...]}``.

    Q pairs are ``{"lambda", "z_re", "z_im"}``; Z pairs are ``{"lambda", "w"}``.
    Returns ``(tensor, kind, [(lambda, vector), ...])``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"not valid JSON: {exc}") from None
    _require(isinstance(doc, dict) and "tensor" in doc and "pairs" in doc,
             "bundle needs 'tensor' and 'pairs'")
    tensor, _ = parse_tensor_document(doc["tensor"])
    kind = doc.get("kind", "q")
    _require(kind in ("q", "z"), f"kind must be 'q' or 'z', got {kind!r}")
    _require(kind == "q" or isinstance(tensor, SymTensor), "z bundles need a real tensor")
    pairs = []
    for k, rec in enumerate(doc["pairs"]):
        lam = _number(rec.get("lambda"), f"pair {k}: lambda")
        if kind == "q":
            re = np.asarray(rec.get("z_re"), dtype=float)
            im = np.asarray(rec.get("z_im", [0.0] * len(re)), dtype=float)
            _require(re.shape == im.shape == (tensor.dim,), f"pair {k}: vector length must be {tensor.dim}")
            pairs.append((lam, re + 1j * im))
        else:
            w = np.asarray(rec.get("w"), dtype=float)
            _require(w.shape == (tensor.dim,), f"pair {k}: vector length must be {tensor.dim}")
            pairs.append((lam, w))
    return tensor, kind, pairs


def save_witness(report, prefix) -> tuple[Path, Path]:
    """Write the best tensor of a ratio search and its metadata next to each other."""
    if report.witness is None:
        raise ValueError("report has no witness")
    prefix = Path(prefix)
    tpath = prefix.with_suffix(".json")
    mpath = prefix.with_suffix(".meta.json")
    save_tensor(tpath, report.witness)
    meta = {"m": report.m, "n": report.n, "ratio": report.best_ratio, "q": report.witness_q,
            "z": report.witness_z, "seed": report.seed, "budget": report.budget}
    mpath.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
    return tpath, mpath


def load_witness(tensor_path, meta_path, cfg=None, atol: float = 1e-8):
    """Reload an archived witness and recompute its ``Q`` and ``Z``.

    Raises :class:`WitnessDriftError` if either differs from the stored value by more than ``atol``.
    """
    from .qspec import equality_check

    T = load_tensor(tensor_path)
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    rec = equality_check(T, cfg)
    if abs(rec.q - meta["q"]) > atol or abs(rec.z - meta["z"]) > atol:
        raise WitnessDriftError(f"witness drifted: stored Q={meta['q']}, Z={meta['z']}; "
                         f"recomputed Q={rec.q}, Z={rec.z}")
    return T, meta, rec
