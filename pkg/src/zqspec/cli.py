"""Command-line front end.

Exit codes: 0 success, 1 a verification or consistency check failed,
2 usage or input error, 3 the solver exhausted its budget.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embed import embed, unembed
from .io import (TensorFileError, WitnessDriftError, load_witness, parse_bundle, parse_tensor_document,
                 save_witness, serialize_tensor, tensor_document)
from .qspec import (CASE_KINDS, DominanceError, count_bound, equality_check, generate_case,
                    pair_map_q, qeig_all, ratio_search, verify_qeig)
from .tensor import SymTensor, TensorError
from .zsolve import (ConvergenceError, SolverConfig, distinct_values, grid_oracle_n2,
                     grid_oracle_n3plus, residual, zeig_multistart)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
VECTOR_LIMIT = 10_000
ORACLE_TOL = 1e-4


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    args: dict
    config: dict
    seed: int
    results: dict
    complete: bool
    ok: bool = True
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command, "args": self.args, "config": self.config, "seed": self.seed,
            "complete": self.complete, "ok": self.ok, "results": self.results,
            "warnings": self.warnings, "wall_time": self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _floats(a) -> list:
    return [float(x) for x in np.ravel(a)]


def _read_document(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"{path}: not valid JSON: {exc}") from None


def _load(path: str):
    return parse_tensor_document(_read_document(path))


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, num_starts=args.starts,
                        dedup_tol=args.dedup_tol, seed=args.seed)


def _want_vectors(args, dim: int, count: int) -> bool:
    return not args.no_vectors and dim * count <= VECTOR_LIMIT


# ------------------------------------------------------------------ commands
def _cmd_zeig(args):
    T, meta = _load(args.file)
    if not isinstance(T, SymTensor):
        raise UsageError("zeig needs a real tensor; use qeig for complex input")
    cfg = _config(args)
    if meta:
        # same path as qeig: partner completion plus warm starts from the source tensor
        rep = qeig_all(unembed(T, meta["variant"]), cfg, variant=meta["variant"]).embedded
    else:
        rep = zeig_multistart(T, cfg)
    vec = _want_vectors(args, T.dim, len(rep.entries))
    pairs = []
    for e in rep.entries:
        rec = {"lambda": e.lam, "residual": e.residual, "cluster_size": e.cluster_size}
        if vec:
            rec["w"] = _floats(e.vector)
        pairs.append(rec)
    results = {"order": T.order, "dim": T.dim, "solver": rep.source,
               "eigenvalues": _floats(rep.eigenvalues), "z_spectral_radius": rep.z_spectral_radius,
               "count": len(rep.entries), "pairs": pairs}
    ok = True
    if args.oracle == "grid":
        results["oracle"], ok = _grid_compare(T, rep.eigenvalues)
    return results, rep.complete, ok


def _grid_compare(T: SymTensor, found: np.ndarray):
    if T.dim == 2:
        oracle = grid_oracle_n2(T)
    elif T.dim <= 4:
        oracle = grid_oracle_n3plus(T)
    else:
        raise UsageError("grid oracle supports dim <= 4")
    vals = distinct_values([p.lam for p in oracle], 1e-6)
    if T.dim == 2:
        # both sets are exhaustive, so compare them whole
        agree = len(vals) == len(found) and bool(np.all(np.abs(np.sort(vals) - np.sort(found)) < ORACLE_TOL))
    else:
        agree = abs(vals.max() - found.max()) < ORACLE_TOL and abs(vals.min() - found.min()) < ORACLE_TOL
    agree = bool(agree)
    return {"eigenvalues": _floats(vals), "agrees": agree, "tolerance": ORACLE_TOL}, agree


def _cmd_qeig(args):
    psi, _ = _load(args.file)
    cfg = _config(args)
    rep = qeig_all(psi, cfg, variant=args.variant)
    vec = _want_vectors(args, psi.dim, len(rep.entries))
    pairs = []
    for e in rep.entries:
        rec = {"lambda": e.lam, "residual": e.residual, "cluster_size": e.cluster_size}
        if vec:
            rec["z_re"], rec["z_im"] = _floats(e.z.real), _floats(e.z.imag)
        pairs.append(rec)
    results = {"order": psi.order, "dim": psi.dim, "variant": rep.variant,
               "q_eigenvalues": _floats(rep.q_eigenvalues),
               "entanglement_eigenvalue": rep.entanglement_eigenvalue,
               "count": len(rep.entries), "count_bound": rep.count_bound, "bound_ok": rep.bound_ok,
               "pairing_ok": rep.pairing_ok, "max_residual": rep.max_residual, "pairs": pairs}
    ok = rep.pairing_ok and rep.bound_ok and rep.max_residual < cfg.tol
    return results, rep.embedded.complete, ok


def _cmd_embed(args):
    psi, _ = _load(args.file)
    emb = embed(psi, args.variant)
    meta = {"source_order": psi.order, "source_dim": psi.dim, "variant": args.variant}
    return serialize_tensor(emb.target, meta)


def _cmd_gen(args):
    if args.m is None or args.n is None:
        raise UsageError("gen needs --m and --n")
    return serialize_tensor(generate_case(args.kind, args.m, args.n, seed=args.seed))


def _cmd_verify(args):
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    T, kind, pairs = parse_bundle(text)
    cfg = _config(args)
    m, n = T.order, T.dim
    checks = []
    for k, (lam, v) in enumerate(pairs):
        if not np.any(v):
            raise TensorFileError(f"pair {k}: zero vector")
        if kind == "q":
            norm = float(np.sqrt(np.vdot(v, v).real))
            unit = abs(norm - 1.0) < 1e-10
            r = verify_qeig(T, lam, v / norm)
            # the rotated vector must satisfy the equation at -lambda
            rp = verify_qeig(T, -lam, pair_map_q(v / norm, m))
            checks.append({"pair": k, "lambda": lam, "unit": unit, "residual": r, "partner_residual": rp,
                           "ok": bool(unit and r < cfg.tol and rp < cfg.tol)})
        else:
            norm = float(np.linalg.norm(v))
            unit = abs(norm - 1.0) < 1e-10
            r = residual(T, lam, v / norm)
            checks.append({"pair": k, "lambda": lam, "unit": unit, "residual": r, "ok": bool(unit and r < cfg.tol)})
    lams = [lam for lam, _ in pairs]
    distinct = len(distinct_values(lams, cfg.dedup_tol)) if lams else 0
    if kind == "q":
        bound = count_bound(m, n)
    else:
        # eigenvector classes for real data, doubled because odd orders pair (lambda, w) with (-lambda, -w)
        bound = n if m == 2 else 2 * (((m - 1) ** n - 1) // (m - 2))
    results = {"kind": kind, "order": m, "dim": n, "pairs": checks,
               "residual_ok": all(c["ok"] for c in checks),
               "distinct": distinct, "count_bound": bound, "bound_ok": bool(distinct <= bound)}
    real = T if isinstance(T, SymTensor) else (T.real_part if T.is_real else None)
    if kind == "q" and real is not None:
        try:
            rec = equality_check(real, cfg)
            results["dominance"] = {"q": rec.q, "z": rec.z, "ok": True}
        except DominanceError as exc:
            results["dominance"] = {"ok": False, "detail": str(exc)}
    ok = results["residual_ok"] and results["bound_ok"] and results.get("dominance", {}).get("ok", True)
    return results, True, ok


def _cmd_ratio_search(args):
    if args.m is None or args.n is None:
        raise UsageError("ratio-search needs --m and --n")
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter,
                       num_starts=args.starts if args.starts is not None else 20 * args.n,
                       dedup_tol=args.dedup_tol, seed=args.seed)
    seed_witness = None
    if args.witness:
        seed_witness, _ = _load(args.witness)
        if not isinstance(seed_witness, SymTensor) or (seed_witness.order, seed_witness.dim) != (args.m, args.n):
            raise UsageError("witness must be a real tensor with the requested order and dim")
    families = tuple(args.family) if args.family else ("gaussian", "perturb")
    rep = ratio_search(args.m, args.n, args.budget, cfg, families=families,
                       seed_witness=seed_witness, workers=args.workers)
    results = {"m": rep.m, "n": rep.n, "budget": rep.budget, "samples": rep.samples,
               "skipped": rep.skipped, "best_ratio": rep.best_ratio, "witness_q": rep.witness_q,
               "witness_z": rep.witness_z, "families": rep.families, "ceiling": rep.ceiling,
               "witness": tensor_document(rep.witness) if rep.witness is not None else None}
    if args.archive and rep.witness is not None:
        tpath, mpath = save_witness(rep, args.archive)
        results["archive"] = [str(tpath), str(mpath)]
    return results, False, True


def _cmd_check_witness(args):
    try:
        _, meta, rec = load_witness(args.file, args.meta, _config(args))
    except WitnessDriftError as exc:
        return {"q": None, "z": None, "ratio": None, "detail": str(exc)}, False, False
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load witness: {exc}") from None
    return {"q": rec.q, "z": rec.z, "ratio": rec.ratio, "stored": meta}, False, True


COMMANDS = {
    "zeig": _cmd_zeig, "qeig": _cmd_qeig, "embed": _cmd_embed, "verify": _cmd_verify,
    "ratio-search": _cmd_ratio_search, "gen": _cmd_gen, "check-witness": _cmd_check_witness,
}
FILE_OUTPUT = {"embed", "gen"}


# -------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="residual acceptance (default 1e-10)")
    common.add_argument("--starts", type=int, default=None, help="random starts (default 100*dim)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-iter", type=int, default=5000)
    common.add_argument("--dedup-tol", type=float, default=1e-6)
    common.add_argument("--output", choices=("json", "text"), default="json")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--no-vectors", action="store_true", help="omit eigenvectors from the report")

    parser = argparse.ArgumentParser(prog="zqspec", description="Z- and Q-eigenvalues of symmetric tensors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeig", parents=[common], help="Z-eigenpairs of a real tensor")
    p.add_argument("file")
    p.add_argument("--oracle", choices=("none", "grid"), default="none",
                   help="cross-check against the brute-force grid (dim <= 4)")

    p = sub.add_parser("qeig", parents=[common], help="Q-eigenpairs via the real embedding")
    p.add_argument("file")
    p.add_argument("--variant", choices=("theorem4", "remark_m3"), default="theorem4")

    p = sub.add_parser("embed", parents=[common], help="write the embedded real tensor")
    p.add_argument("file")
    p.add_argument("--variant", choices=("theorem4", "remark_m3"), default="theorem4")

    p = sub.add_parser("verify", parents=[common], help="check a (tensor, pairs) bundle")
    p.add_argument("file")

    p = sub.add_parser("ratio-search", parents=[common], help="search for large Q/Z")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--family", action="append", choices=("gaussian", "perturb") + CASE_KINDS)
    p.add_argument("--witness", help="tensor file to seed the search with")
    p.add_argument("--archive", metavar="PREFIX", help="save the best tensor as PREFIX.json + PREFIX.meta.json")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("gen", parents=[common], help="generate an equality-family tensor")
    p.add_argument("--kind", choices=CASE_KINDS, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)

    p = sub.add_parser("check-witness", parents=[common], help="recompute an archived witness")
    p.add_argument("file")
    p.add_argument("meta")
    return parser


def _echo(args) -> dict:
    skip = {"command", "out", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def format_text(report: RunReport) -> str:
    r = report.results
    lines = [f"command: {report.command}  seed: {report.seed}  complete: {report.complete}  ok: {report.ok}"]

    def g(x):
        return "None" if x is None else f"{x:.12g}"

    if report.command == "zeig":
        lines.append(f"Z-spectral radius: {g(r['z_spectral_radius'])}")
        lines += [f"  lambda = {g(p['lambda'])}  residual = {p['residual']:.3e}" for p in r["pairs"]]
        if "oracle" in r:
            lines.append(f"grid oracle agrees: {r['oracle']['agrees']}")
    elif report.command == "qeig":
        lines.append(f"Q(Psi): {g(r['entanglement_eigenvalue'])}  count: {r['count']} <= {r['count_bound']}"
                     f"  pairing_ok: {r['pairing_ok']}")
        lines += [f"  lambda = {g(p['lambda'])}  residual = {p['residual']:.3e}" for p in r["pairs"]]
    elif report.command == "verify":
        lines.append(f"residual_ok: {r['residual_ok']}  bound_ok: {r['bound_ok']}"
                     f"  dominance: {r.get('dominance', {}).get('ok', 'n/a')}")
        lines += [f"  pair {c['pair']}: lambda = {g(c['lambda'])}  residual = {c['residual']:.3e}  ok = {c['ok']}"
                  for c in r["pairs"]]
    elif report.command == "ratio-search":
        lines.append(f"best ratio: {g(r['best_ratio'])}  Q = {g(r['witness_q'])}  Z = {g(r['witness_z'])}"
                     f"  samples: {r['samples']}")
    else:
        lines.append(f"Q = {g(r['q'])}  Z = {g(r['z'])}  ratio = {g(r['ratio'])}")
    lines += [f"warning: {w}" for w in report.warnings]
    return "\n".join(lines) + "\n"


def _execute(args) -> tuple[int, str]:
    handler = COMMANDS[args.command]
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = handler(args)
    except ConvergenceError as exc:
        return EXIT_BUDGET, f"solver budget exhausted: {exc}\n"
    except (UsageError, TensorError, ValueError, TypeError) as exc:
        return EXIT_USAGE, f"error: {exc}\n"
    if args.command in FILE_OUTPUT:
        return EXIT_OK, out
    results, complete, ok = out
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter, num_starts=args.starts,
                       dedup_tol=args.dedup_tol, seed=args.seed).to_dict()
    report = RunReport(args.command, _echo(args), cfg, args.seed, results, complete, bool(ok),
                       sorted({str(w.message) for w in caught}), time.perf_counter() - t0)
    text = report.to_json() if args.output == "json" else format_text(report)
    return (EXIT_OK if report.ok else EXIT_CHECK), text


def run(argv=None) -> tuple[int, str]:
    """Parse ``argv``, dispatch, and return ``(exit_code, output_text)``.

    Argument errors raise :class:`SystemExit` with code 2, as argparse does.
    """
    return _execute(build_parser().parse_args(argv))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code, text = _execute(args)
    if code in (EXIT_OK, EXIT_CHECK):
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
