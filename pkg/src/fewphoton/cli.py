"""Command-line front end: sweeps and oracle runs written as CSV or JSON.

Grids use ``start:stop:steps`` (steps intervals, so steps + 1 points), a
comma-separated list, or a single number. Output is deterministic for a
given command line; the configuration is echoed in a ``# config:`` header
(CSV) or a ``config`` field (JSON).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from .model import DEFAULT_DELTA, DEFAULT_EPSILON, GaussianPacket, SystemParams

WORKERS_ENV = "FEWPHOTON_MAX_WORKERS"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_GRID = 3
EXIT_PATH = 4
EXIT_FLAGGED = 5


class GridError(ValueError):
    pass


def fmt(x) -> str:
    """Floats with 9 significant digits, everything else via str."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def parse_grid(text: str, name: str = "v") -> list[float]:
    text = (text or "").strip()
    if not text:
        raise GridError(f"empty {name}-grid")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise GridError(f"{name}-grid '{text}' must look like start:stop:steps")
            start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
            if steps < 1:
                raise GridError(f"{name}-grid needs at least one step, got {steps}")
            values = list(np.linspace(start, stop, steps + 1))
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, GridError):
            raise
        raise GridError(f"invalid {name}-grid '{text}': {exc}") from None
    if not values:
        raise GridError(f"empty {name}-grid")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise GridError(f"{name}-grid must be strictly increasing")
    return [float(v) for v in values]


def worker_count(requested: int | None) -> int:
    cap = os.environ.get(WORKERS_ENV)
    n = requested or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logging.getLogger(__name__).warning("ignoring non-integer %s=%r", WORKERS_ENV, cap)
    return n


def _common(p: argparse.ArgumentParser, grid: bool = True):
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="emitter transition energy")
    if grid:
        p.add_argument("--v", default="0.5", help="coupling V: value, list a,b,c or grid start:stop:steps")
    else:
        p.add_argument("--v", type=float, default=0.5, help="coupling V")
    p.add_argument("--gamma-prime", type=float, default=0.0, help="loss rate into other channels")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="packet width")
    p.add_argument("--k0", type=float, default=None, help="packet centre (default: epsilon)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any point is flagged unreliable")


def _quad(p: argparse.ArgumentParser):
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--window", type=float, default=None, help="integration half-window in packet widths")
    p.add_argument("--workers", type=int, default=None, help=f"worker threads (capped by ${WORKERS_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fewphoton", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigenstate", help="sample the n-photon eigenstate g_n at random positions")
    _common(e, grid=False)
    e.add_argument("--n", type=int, default=2, choices=(1, 2, 3, 4))
    e.add_argument("--ks", default=None, help="comma-separated momenta (default: all equal to epsilon)")
    e.add_argument("--samples", type=int, default=20)
    e.add_argument("--extent", type=float, default=5.0, help="positions drawn from [-extent, extent]")
    e.add_argument("--seed", type=int, default=0)

    f = sub.add_parser("fock", help="sector probabilities of an n-photon Fock packet vs V")
    _common(f)
    _quad(f)
    f.add_argument("--n", type=int, default=2, choices=(1, 2, 3))

    g = sub.add_parser("g2", help="second-order correlation of the transmitted field")
    _common(g, grid=False)
    g.add_argument("--nbar", type=float, default=1.0)
    g.add_argument("--points", type=int, default=60)
    g.add_argument("--gamma-x-max", type=float, default=15.0)

    s = sub.add_parser("stats", help="transmitted photon-number distribution vs Poisson")
    _common(s)
    _quad(s)
    s.add_argument("--nbar", default="1.0", help="mean photon number(s), same grid syntax as --v")
    s.add_argument("--reference", choices=("transmitted", "incident"), default="transmitted",
                   help="mean used for the Poisson reference")

    o = sub.add_parser("oracle", help="lattice time evolution vs analytic kernels (JSON report)")
    _common(o, grid=False)
    o.add_argument("--n", type=int, default=1, choices=(1, 2))
    o.add_argument("--m-modes", type=int, default=96)
    o.add_argument("--k-halfwidth", type=float, default=None, help="window half-width in packet widths")
    o.add_argument("--evolve-time", type=float, default=None)
    o.add_argument("--tail-modes", type=int, default=24)
    o.add_argument("--no-loss", action="store_true", help="drop the Gamma' term from the lattice")
    return ap


def _params(args, v=None):
    return SystemParams(epsilon=args.epsilon, coupling_v=args.v if v is None else v, gamma_prime=args.gamma_prime)


def _packet(args, nbar: float = 1.0):
    return GaussianPacket(k0=args.epsilon if args.k0 is None else args.k0, delta=args.delta, nbar=nbar)


def _spec(args, base=None):
    from .quadrature import QuadratureSpec

    base = base or QuadratureSpec()
    kw = {}
    if args.rel_tol is not None:
        kw["rel_tol"] = args.rel_tol
    if args.abs_tol is not None:
        kw["abs_tol"] = args.abs_tol
    if args.window is not None:
        kw["window_halfwidth"] = args.window
    from dataclasses import replace

    return replace(base, **kw)


def _config(args) -> dict:
    """Every input that affects the numbers, with quadrature defaults resolved."""
    from dataclasses import asdict

    from .fock import THREE_PHOTON_SPEC

    skip = ("out", "verbose", "workers", "rel_tol", "abs_tol", "window")
    d = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if hasattr(args, "rel_tol"):
        three = args.command == "fock" and args.n == 3
        d["quadrature"] = asdict(_spec(args, THREE_PHOTON_SPEC if three else None))
        if args.command == "stats":
            d["quadrature_three_photon"] = asdict(_spec(args, THREE_PHOTON_SPEC))
    return d


def _csv_text(config: dict, header: list[str], rows: list[list], notes: list[str] = ()) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    for note in notes:
        buf.write(f"# note: {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def _json_text(config: dict, header: list[str], rows: list[list], notes: list[str] = ()) -> str:
    recs = [{h: (float(x) if isinstance(x, (float, np.floating)) else x) for h, x in zip(header, r)} for r in rows]
    return json.dumps({"config": config, "rows": recs, "notes": list(notes)}, indent=2, sort_keys=True,
                      default=str) + "\n"


def _emit(args, header, rows, notes=()):
    text = (_csv_text if args.format == "csv" else _json_text)(_config(args), header, rows, notes)
    _write(args.out, text)


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise PermissionError(f"cannot write output to {path!r}: {exc.strerror or exc}") from None


def _check_writable(path: str):
    if path == "-":
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK) or (
            os.path.exists(path) and not os.access(path, os.W_OK)):
        raise PermissionError(f"cannot write output to {path!r}")


def cmd_eigenstate(args):
    from .eigenstates import eigenstate_g

    p = _params(args)
    ks = [args.epsilon] * args.n if args.ks is None else parse_grid(args.ks, "ks") if ":" in args.ks else [
        float(k) for k in args.ks.split(",")]
    if len(ks) != args.n:
        raise GridError(f"--ks needs {args.n} momenta, got {len(ks)}")
    rng = np.random.default_rng(args.seed)
    xs = rng.uniform(-args.extent, args.extent, size=(args.n, args.samples))
    g = eigenstate_g(args.n, ks, xs, p)
    header = [f"x{i + 1}" for i in range(args.n)] + ["re", "im", "abs"]
    rows = [list(xs[:, j]) + [g[j].real, g[j].imag, abs(g[j])] for j in range(args.samples)]
    _emit(args, header, rows)
    return False


def cmd_fock(args):
    from .fock import THREE_PHOTON_SPEC, sweep

    grid = parse_grid(args.v, "v")
    spec = _spec(args, THREE_PHOTON_SPEC if args.n == 3 else None)
    rows = sweep(args.n, grid, _packet(args), _params(args, 0.0), spec, worker_count(args.workers))
    notes = sorted({f"V={fmt(r.v)}: {r.message}" for r in rows if r.message})
    _emit(args, ["V", "sector", "total", "pw", "bs", "err"],
          [[r.v, r.sector, r.total, r.pw, r.bs, r.err] for r in rows], notes)
    return any(not r.ok for r in rows)


def cmd_g2(args):
    from .coherent import default_x_grid, g2_curve

    p = _params(args)
    pkt = _packet(args, args.nbar)
    xs = default_x_grid(p, args.points, args.gamma_x_max)
    curve = g2_curve(pkt, p, xs)
    notes = ["denominator too small; values unreliable"] if curve.unreliable.any() else []
    _emit(args, ["gamma_x", "g2"], [[gx, v] for gx, v in zip(curve.gamma_x, curve.values)], notes)
    return bool(curve.unreliable.any())


def cmd_stats(args):
    from .coherent import fock_table, number_distribution
    from .fock import THREE_PHOTON_SPEC

    vs = parse_grid(args.v, "v")
    nbars = parse_grid(args.nbar, "nbar")
    spec = _spec(args)
    spec3 = _spec(args, THREE_PHOTON_SPEC)
    rows, notes, flagged = [], [], False
    for v in vs:
        p = _params(args, v)
        table = fock_table(_packet(args), p, spec, spec3)
        if table.messages:
            flagged = True
            notes += [f"V={fmt(v)}: {m}" for m in table.messages]
        for nb in nbars:
            d = number_distribution(_packet(args, nb), p, reference=args.reference, table=table)
            notes += [f"V={fmt(v)} nbar={fmt(nb)}: {m}" for m in d.messages if m not in table.messages]
            for n in range(len(d.probs)):
                rows.append([v, nb, n, d.probs[n], d.poisson[n], d.ratios[n]])
    _emit(args, ["V", "nbar", "n", "P", "P_poisson", "ratio"], rows, notes)
    return flagged


def cmd_oracle(args):
    from .oracle import LatticeConfig, scatter_and_compare

    pkt = _packet(args)
    cfg = LatticeConfig(
        m_modes=args.m_modes,
        k_halfwidth=None if args.k_halfwidth is None else args.k_halfwidth * args.delta,
        photon_cutoff=args.n,
        evolve_time=args.evolve_time,
        loss_included=not args.no_loss,
        tail_modes=args.tail_modes,
    )
    rep = scatter_and_compare(args.n, pkt, _params(args), cfg)
    out = json.loads(rep.to_json())
    out["cli"] = _config(args)
    _write(args.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return not all(rep.passed.values())


COMMANDS = {"eigenstate": cmd_eigenstate, "fock": cmd_fock, "g2": cmd_g2, "stats": cmd_stats, "oracle": cmd_oracle}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _check_writable(args.out)
        flagged = COMMANDS[args.command](args)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PATH
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if flagged and args.strict:
        print("error: some points were flagged unreliable (see notes in the output)", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
