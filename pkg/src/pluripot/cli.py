"""Command-line experiment runner.

Every subcommand writes CSV or JSON (to ``--out`` or stdout) with floats
printed to 17 significant digits.  Exit status: 0 on success, 2 on invalid
input, 3 on numerical failure (degenerate Gram, non-convergence), 1 when
``all-acceptance`` reports a failing criterion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
COMMANDS = ("dims", "fekete", "tfd", "gram", "bergman", "optimal", "energy", "bvr", "all-acceptance")


def fmt(x: float) -> str:
    return "%.17g" % x


def _to_json(obj, indent: int = 0) -> str:
    """Minimal JSON writer so that floats keep 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else json.dumps(str(obj))
    if isinstance(obj, complex):
        return _to_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple, complex)) for v in obj):
            return "[" + ", ".join(_to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "tolist"):
        return _to_json(obj.tolist(), indent)
    raise TypeError(f"cli: cannot serialize {type(obj).__name__}")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _sibling(path: str | None, suffix: str) -> str | None:
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


@dataclass
class ExperimentConfig:
    command: str
    body: str = "interval(0,1)"
    grid: str | None = None
    weight: str | None = None
    n: list[int] = field(default_factory=list)
    seed: int = 0
    tol: float = 1e-4
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def n_single(self) -> int:
        if len(self.n) != 1:
            from .errors import InvalidParameterError

            raise InvalidParameterError(f"cli.{self.command}: exactly one --n required")
        return self.n[0]


def _n_range(args, file_cfg: dict) -> list[int]:
    if args.n is not None:
        return [args.n]
    if args.n_max is not None:
        return list(range(1, args.n_max + 1))
    if "n" in file_cfg:
        n = file_cfg["n"]
        return list(n) if isinstance(n, list) else [int(n)]
    if "n_max" in file_cfg:
        return list(range(1, int(file_cfg["n_max"]) + 1))
    return []


def build_config(args) -> ExperimentConfig:
    """Merge a JSON ``--config`` file with flags; flags win."""
    from .errors import InvalidParameterError

    file_cfg: dict = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise InvalidParameterError(f"cli.config: file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"cli.config: invalid JSON in {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise InvalidParameterError("cli.config: top level must be an object")
    seed = args.seed if args.seed is not None else int(file_cfg.get("seed", 0))
    if not 0 <= seed < 2**64:
        raise InvalidParameterError(f"cli.config: seed must be a 64-bit unsigned integer, got {seed}")
    cfg = ExperimentConfig(
        command=args.command,
        body=args.body or file_cfg.get("body", "interval(0,1)"),
        grid=args.grid or file_cfg.get("grid"),
        weight=args.weight or file_cfg.get("weight"),
        n=_n_range(args, file_cfg),
        seed=seed,
        tol=args.tol if args.tol is not None else float(file_cfg.get("tol", 1e-4)),
        out=args.out or file_cfg.get("out"),
        extra=file_cfg,
    )
    if any(n < 1 for n in cfg.n):
        raise InvalidParameterError(f"cli.config: degrees must be positive, got {cfg.n}")
    return cfg


def _require_n(cfg: ExperimentConfig) -> list[int]:
    from .errors import InvalidParameterError

    if not cfg.n:
        raise InvalidParameterError(f"cli.{cfg.command}: empty n range; pass --n or --n-max")
    return cfg.n


def _require_grid(cfg: ExperimentConfig):
    from .errors import InvalidParameterError
    from .measures import parse_grid

    if not cfg.grid:
        raise InvalidParameterError(f"cli.{cfg.command}: --grid is required")
    return parse_grid(cfg.grid)


# -- subcommands -------------------------------------------------------------


def cmd_dims(cfg: ExperimentConfig, args) -> int:
    from .basis import dims
    from .geometry import parse_body

    P = parse_body(cfg.body)
    rows = []
    for n in _require_n(cfg):
        info = dims(P, n)
        rows.append((n, info.d_n, info.l_n, info.f_n.numerator, info.f_n.denominator))
    _emit(_csv_text(["n", "d_n", "l_n", "f_n_num", "f_n_den"], rows), cfg.out)
    return EXIT_OK


def cmd_fekete(cfg: ExperimentConfig, args) -> int:
    from .basis import MultiIndexBasis
    from .fekete import fekete_moments, fekete_search
    from .geometry import parse_body
    from .measures import parse_weight

    P = parse_body(cfg.body)
    B = MultiIndexBasis.build(P, cfg.n_single())
    res = fekete_search(_require_grid(cfg), parse_weight(cfg.weight), B)
    doc = {
        "body": cfg.body, "grid": cfg.grid, "weight": cfg.weight or "zero", "n": B.n, "d_n": B.size,
        "points": [[complex(c) for c in p] for p in res.points],
        "indices": [int(i) for i in res.indices],
        "log_wvdm": res.log_wvdm, "delta_wn": res.delta_wn, "iterations": res.iterations,
    }
    _emit(_to_json(doc), cfg.out)
    mom = fekete_moments(res.points)
    power = mom.power.reshape(-1, len(mom.k))
    fourier = mom.fourier.reshape(-1, len(mom.k))
    rows = [(int(k), c + 1, float(power[c, j]), float(fourier[c, j]))
            for c in range(power.shape[0]) for j, k in enumerate(mom.k)]
    moments_path = args.moments_out or _sibling(cfg.out, "_moments.csv")
    if moments_path is not None:
        _emit(_csv_text(["k", "coord", "power", "fourier"], rows), moments_path)
    return EXIT_OK


def cmd_tfd(cfg: ExperimentConfig, args) -> int:
    from .basis import MultiIndexBasis
    from .fekete import fekete_search
    from .geometry import parse_body
    from .measures import parse_weight

    P = parse_body(cfg.body)
    grid = _require_grid(cfg)
    w = parse_weight(cfg.weight)
    rows = [(n, fekete_search(grid, w, MultiIndexBasis.build(P, n)).delta_wn) for n in _require_n(cfg)]
    _emit(_csv_text(["n", "delta_wn"], rows), cfg.out)
    return EXIT_OK


def cmd_gram(cfg: ExperimentConfig, args) -> int:
    from .basis import MultiIndexBasis
    from .geometry import parse_body
    from .gram import gram_build, logdet_scaled
    from .measures import parse_weight

    B = MultiIndexBasis.build(parse_body(cfg.body), cfg.n_single())
    G = gram_build(B, _require_grid(cfg), parse_weight(cfg.weight))
    doc = {
        "n": B.n, "d_n": B.size, "l_n": B.degree_sum, "logdet": G.logdet,
        "logdet_scaled": logdet_scaled(G) if not G.degenerate else float("nan"),
        "degenerate": G.degenerate, "jittered": G.jittered,
    }
    _emit(_to_json(doc), cfg.out)
    return EXIT_NUMERICAL if G.degenerate else EXIT_OK


def _read_points(path: str, dim: int):
    """CSV of points: ``re_1, im_1, ..., re_d, im_d`` per row (``im`` columns optional)."""
    import numpy as np

    from .errors import DimensionMismatchError, InvalidParameterError

    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise InvalidParameterError(f"cli.bergman: z-file not found: {path}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        vals = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InvalidParameterError(f"cli.bergman: bad number in {path}: {exc}") from None
    if vals.size == 0:
        raise InvalidParameterError(f"cli.bergman: no points in {path}")
    if vals.shape[1] == dim:
        return vals.astype(complex)
    if vals.shape[1] == 2 * dim:
        return vals[:, 0::2] + 1j * vals[:, 1::2]
    raise DimensionMismatchError(f"cli.bergman: expected {dim} or {2 * dim} columns, got {vals.shape[1]}")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_bergman(cfg: ExperimentConfig, args) -> int:
    from .basis import MultiIndexBasis
    from .errors import InvalidParameterError
    from .geometry import parse_body
    from .gram import bergman_eval, gram_build
    from .measures import parse_weight

    if not args.z_file:
        raise InvalidParameterError("cli.bergman: --z-file is required")
    B = MultiIndexBasis.build(parse_body(cfg.body), cfg.n_single())
    G = gram_build(B, _require_grid(cfg), parse_weight(cfg.weight))
    G.require_nondegenerate("cli.bergman")
    z = _read_points(args.z_file, B.dim)
    vals = bergman_eval(G, z, include_weight_at_z=True)
    header = [f"{p}_{i + 1}" for i in range(B.dim) for p in ("re", "im")] + ["B"]
    rows = [[float(c) for zi in p for c in (zi.real, zi.imag)] + [float(v)] for p, v in zip(z, vals)]
    _emit(_csv_text(header, rows), cfg.out)
    return EXIT_OK


def cmd_optimal(cfg: ExperimentConfig, args) -> int:
    from .basis import MultiIndexBasis
    from .design import optimal_measure
    from .geometry import parse_body
    from .measures import parse_weight

    B = MultiIndexBasis.build(parse_body(cfg.body), cfg.n_single())
    res = optimal_measure(_require_grid(cfg), parse_weight(cfg.weight), B, tol=cfg.tol,
                          max_iters=int(args.max_iters or cfg.extra.get("max_iters", 5000)))
    doc = {"n": B.n, "d_n": B.size, "tol": cfg.tol, **res.to_json()}
    _emit(_to_json(doc), cfg.out)
    header = [f"{p}_{i + 1}" for i in range(B.dim) for p in ("re", "im")] + ["mass", "B"]
    rows = [[float(c) for zi in p for c in (zi.real, zi.imag)] + [float(m), float(b)]
            for p, m, b in zip(res.measure.points, res.measure.masses, res.bergman)]
    table = args.table_out or _sibling(cfg.out, "_design.csv")
    if table is not None:
        _emit(_csv_text(header, rows), table)
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def cmd_energy(cfg: ExperimentConfig, args) -> int:
    from .energy import GridFunction1D, energy_1d, interval_green, log_plus
    from .errors import UnknownCaseError

    N = int(args.N or cfg.extra.get("N", 1024))
    extent = float(args.extent or cfg.extra.get("extent", 4.0))
    case = args.case or cfg.extra.get("case", "interval-vs-torus")
    v = GridFunction1D.sample(log_plus, extent, N, slope=1.0)
    if case == "interval-vs-torus":
        u, target = GridFunction1D.sample(interval_green, extent, N, slope=1.0), math.log(2)
    elif case == "identical":
        u, target = v, 0.0
    elif case == "shift":
        c = float(cfg.extra.get("c", args.c if args.c is not None else 1.0))
        u, target = v.shifted(c), 2 * c
    else:
        raise UnknownCaseError(f"cli.energy: unknown case {case!r} (interval-vs-torus, identical, shift)")
    E = energy_1d(u, v)
    _emit(_to_json({"case": case, "N": N, "extent": extent, "energy": E, "target": target,
                    "error": abs(E - target)}), cfg.out)
    return EXIT_OK


def cmd_bvr(cfg: ExperimentConfig, args) -> int:
    from .energy import bvr_energy_experiment
    from .errors import InvalidParameterError

    if not getattr(args, "config", None) and not cfg.n:
        raise InvalidParameterError("cli.bvr: --config file.json (or --n/--n-max) is required")
    conf = dict(cfg.extra)
    conf["n"] = _require_n(cfg)
    if args.body:
        conf["body"] = args.body
    if args.grid:
        conf["grid"] = args.grid
    rows = bvr_energy_experiment(conf)
    _emit(_csv_text(["n", "L_n", "target", "gap"], [(r.n, r.L_n, r.target, r.gap) for r in rows]), cfg.out)
    return EXIT_OK


def cmd_all_acceptance(cfg: ExperimentConfig, args) -> int:
    from .acceptance import run_all

    lines: list[str] = []
    results = run_all(echo=lambda s: (print(s, flush=True), lines.append(s)))
    if cfg.out:
        _emit("\n".join(lines), cfg.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


HANDLERS = {
    "dims": cmd_dims, "fekete": cmd_fekete, "tfd": cmd_tfd, "gram": cmd_gram, "bergman": cmd_bergman,
    "optimal": cmd_optimal, "energy": cmd_energy, "bvr": cmd_bvr, "all-acceptance": cmd_all_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; flags override its keys")
    common.add_argument("--body", help="simplex(d), box(d), interval(a,b) or a JSON body file")
    common.add_argument("--grid", help="e.g. circle(300), interval(-1,1,chebyshev,2000), torus(2,9)")
    common.add_argument("--weight", help="zero, constant(c) or quadratic(c)")
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--n", type=int, help="single degree")
    grp.add_argument("--n-max", type=int, help="degrees 1..N")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--threads", type=int, help="BLAS threads (default: $PLURIPOT_THREADS)")

    parser = argparse.ArgumentParser(prog="pluripot", description="Weighted pluripotential experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "fekete":
            p.add_argument("--moments-out", help="moment CSV path (default: <out>_moments.csv)")
        elif name == "bergman":
            p.add_argument("--z-file", help="CSV of evaluation points")
        elif name == "optimal":
            p.add_argument("--table-out", help="design CSV path (default: <out>_design.csv)")
            p.add_argument("--max-iters", type=int)
        elif name == "energy":
            p.add_argument("--case", help="interval-vs-torus, identical or shift")
            p.add_argument("--N", type=int, help="grid points per side")
            p.add_argument("--extent", type=float, help="side length of the square grid")
            p.add_argument("--c", type=float, help="shift for case=shift")
    return parser


def _set_threads(threads: int | None) -> None:
    if threads is None:
        env = os.environ.get("PLURIPOT_THREADS")
        threads = int(env) if env and env.isdigit() else None
    if threads:
        # only effective before numpy loads its BLAS; results do not depend on it
        for var in THREAD_VARS:
            os.environ[var] = str(threads)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    from .errors import NumericalError, ValidationError

    try:
        cfg = build_config(args)
        return HANDLERS[cfg.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: cli.io: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
