"""Transmission/reflection probabilities of 1-, 2- and 3-photon Fock packets.

Sector probabilities are iterated integrals of |Psi|^2 over the real line
in each momentum. The integration variables are nested so that every sharp
feature of the integrand (single-photon poles at epsilon, two-body poles at
p_i + p_j = 2 epsilon, three-body poles at P = 3 epsilon) is a known point
of the innermost rule it lives in:

    n = 2:  E = p1 + p2 (outer), p1 (inner)
    n = 3:  P = p1 + p2 + p3 (outer), p3 (middle), p1 (inner)

The bound-state (BS) part is total - PW by construction.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import GaussianPacket, SystemParams, chiral_coefficients, packet_amplitude
from .quadrature import QuadratureSpec, line_rule
from .smatrix import SECTORS, EvenKernel, OutputAmplitude

log = logging.getLogger(__name__)

UNITARITY_FLAG = 1e-3
# coarse pair of levels: the finer one is reported, their difference is the error
THREE_PHOTON_SPEC = QuadratureSpec(rel_tol=2e-3, abs_tol=5e-4, level=-2, max_subdivisions=1)


class QuadratureError(RuntimeError):
    pass


@dataclass
class SectorEntry:
    total: float
    pw: float
    err: float = 0.0

    @property
    def bs(self) -> float:
        return self.total - self.pw


@dataclass
class SectorProbabilities:
    n: int
    sectors: dict[str, SectorEntry]
    params: SystemParams | None = None
    packet: GaussianPacket | None = None
    flagged: bool = False
    messages: list[str] = field(default_factory=list)

    def __getitem__(self, key: str) -> SectorEntry:
        return self.sectors[key]

    @property
    def total(self) -> float:
        return sum(e.total for e in self.sectors.values())

    def rows(self):
        for name, e in self.sectors.items():
            yield name, e.total, e.pw, e.bs, e.err


def _check(res: SectorProbabilities, p: SystemParams, tol: float):
    if p.gamma_prime == 0 and abs(res.total - 1) > tol:
        res.flagged = True
        res.messages.append(f"unitarity violated: sum of sectors = {res.total:.8f}")
    for name, e in res.sectors.items():
        if e.total < -tol or e.total > 1 + tol:
            res.flagged = True
            res.messages.append(f"{name} probability out of range: {e.total}")
    return res


def _refine(compute, spec: QuadratureSpec):
    """Run ``compute(level)`` at increasing levels until consecutive levels agree."""
    lev = spec.level
    prev = compute(lev)
    last = lev + (spec.max_subdivisions if spec.scheme == "nested" else 1)
    while True:
        lev += 1
        cur = compute(lev)
        err = {k: abs(cur[k][0] - prev[k][0]) + abs(cur[k][1] - prev[k][1]) for k in cur}
        ok = all(e <= max(spec.abs_tol, spec.rel_tol * abs(cur[k][0])) for k, e in err.items())
        if ok or lev >= last:
            return cur, err, ok
        prev = cur


def _finish(n, vals, err, ok, p, pkt, spec):
    res = SectorProbabilities(
        n, {k: SectorEntry(float(v[0]), float(v[1]), float(err[k])) for k, v in vals.items()}, p, pkt
    )
    if not ok:
        res.messages.append("quadrature tolerance not reached; error estimates attached")
    return _check(res, p, {1: 1e-6, 2: UNITARITY_FLAG, 3: UNITARITY_FLAG}[n])


def prob_one(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None) -> SectorProbabilities:
    """P_R = integral alpha^2 |t|^2, P_L = integral alpha^2 |r|^2."""
    q = q or QuadratureSpec()
    pkt.check_narrowband()

    def compute(level):
        x, w = line_rule([p.epsilon], 0.5 * p.gamma, [pkt.k0], pkt.delta, q.window_halfwidth, level, tails=False)
        x, w = x[0], w[0]
        t, r = chiral_coefficients(x, p)
        a2 = packet_amplitude(x, pkt) ** 2
        pr = float((w * a2 * abs(t) ** 2).sum())
        pl = float((w * a2 * abs(r) ** 2).sum())
        return {"R": (pr, pr), "L": (pl, pl)}

    vals, err, ok = _refine(compute, q)
    return _finish(1, vals, err, ok, p, pkt, q)


def prob_one_fixed(pkt: GaussianPacket, p: SystemParams, nodes: int = 200001, halfwidth: float = 12.0):
    """Independent fixed-order check of prob_one: composite Simpson on a uniform grid."""
    from scipy.integrate import simpson

    x = np.linspace(pkt.k0 - halfwidth * pkt.delta, pkt.k0 + halfwidth * pkt.delta, nodes)
    t, r = chiral_coefficients(x, p)
    a2 = packet_amplitude(x, pkt) ** 2
    return float(simpson(a2 * abs(t) ** 2, x=x)), float(simpson(a2 * abs(r) ** 2, x=x))


def _sector_densities(amps: list[OutputAmplitude], pts, gfunc=None):
    cache_full, cache_pw = {}, {}
    out = {}
    for a in amps:
        full = a.eval(pts, cache_full, gfunc)
        pw = a.pw(pts, cache_pw)
        out[a.sector] = (np.abs(full) ** 2, np.abs(pw) ** 2)
    return out


def prob_two(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None) -> SectorProbabilities:
    """P_RR, P_RL, P_LL with PW/BS split (2D nested quadrature)."""
    q = q or QuadratureSpec()
    pkt.check_narrowband()
    kern = EvenKernel(2, pkt, p, q)
    amps = [OutputAmplitude(s, kern) for s in SECTORS[2]]
    eps, width = p.epsilon, 0.5 * p.gamma

    def compute(level):
        e, we = line_rule([2 * eps], width, [2 * pkt.k0], np.sqrt(2) * pkt.delta, q.window_halfwidth, level, tails=False)
        e, we = e[0], we[0]
        keep = we > 0
        e, we = e[keep], we[keep]
        pts_in = np.stack([np.full_like(e, eps), e - eps], axis=1)
        x, wx = line_rule(pts_in, width, 0.5 * e, pkt.delta, q.window_halfwidth, level)
        pts = np.stack([x, e[:, None] - x], axis=-1)
        dens = _sector_densities(amps, pts)
        ww = we[:, None] * wx
        return {k: (float((ww * v[0]).sum()), float((ww * v[1]).sum())) for k, v in dens.items()}

    vals, err, ok = _refine(compute, q)
    return _finish(2, vals, err, ok, p, pkt, q)


def _three_slab(kern, amps, total, q, level):
    eps, width, pkt = kern.p.epsilon, 0.5 * kern.p.gamma, kern.pkt
    gfunc = kern.g_slab(total) if not kern.decoupled else None
    p3, w3 = line_rule([eps, total - 2 * eps], width, [pkt.k0], pkt.delta, q.window_halfwidth, level)
    p3, w3 = p3[0], w3[0]
    keep = w3 > 0
    p3, w3 = p3[keep], w3[keep]
    rest = total - p3
    pts_in = np.stack([np.full_like(p3, eps), rest - eps, 2 * eps - p3, np.full_like(p3, total - 2 * eps)], axis=1)
    p1, w1 = line_rule(pts_in, width, 0.5 * rest, pkt.delta, q.window_halfwidth, level)
    pts = np.stack([p1, rest[:, None] - p1, np.broadcast_to(p3[:, None], p1.shape)], axis=-1)
    dens = _sector_densities(amps, pts, gfunc)
    ww = w3[:, None] * w1
    return {k: np.array([(ww * v[0]).sum(), (ww * v[1]).sum()]) for k, v in dens.items()}


def _decoupled(n, pkt, p, q):
    """S = 1: the all-transmitted sector is the n-th power of the packet norm."""
    x, w = line_rule([p.epsilon], 0.5 * p.gamma, [pkt.k0], pkt.delta, q.window_halfwidth, 2, tails=False)
    norm = float((w[0] * packet_amplitude(x[0], pkt) ** 2).sum()) ** n
    vals = {s: ((norm, norm) if set(s) == {"R"} else (0.0, 0.0)) for s in SECTORS[n]}
    return _finish(n, vals, {s: 0.0 for s in vals}, True, p, pkt, q)


def prob_three(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None, budget: float | None = None,
               workers: int | None = None) -> SectorProbabilities:
    """P_RRR, P_RRL, P_RLL, P_LLL with PW/BS split (3D nested quadrature).

    ``budget`` (seconds) stops refinement once exceeded; the result then
    carries its last error estimate and a message.
    """
    q = q or THREE_PHOTON_SPEC
    pkt.check_narrowband()
    kern = EvenKernel(3, pkt, p, q)
    if kern.decoupled:
        return _decoupled(3, pkt, p, q)
    amps = [OutputAmplitude(s, kern) for s in SECTORS[3]]
    t_start = time.monotonic()

    def compute(level):
        if budget is not None and time.monotonic() - t_start > budget:
            raise TimeoutError
        tot, wt = line_rule([3 * p.epsilon], 0.5 * p.gamma, [3 * pkt.k0], np.sqrt(3) * pkt.delta,
                            q.window_halfwidth, level, tails=False)
        tot, wt = tot[0], wt[0]
        keep = wt > 0
        tot, wt = tot[keep], wt[keep]
        acc = {s: np.zeros(2) for s in SECTORS[3]}
        run = lambda P: _three_slab(kern, amps, P, q, level)
        if workers and workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                slabs = list(ex.map(run, tot))
        else:
            slabs = [run(P) for P in tot]
        for w, s in zip(wt, slabs):
            for k in acc:
                acc[k] += w * s[k]
        return {k: (float(v[0]), float(v[1])) for k, v in acc.items()}

    try:
        vals, err, ok = _refine(compute, q)
    except TimeoutError:
        raise QuadratureError(f"three-photon quadrature exceeded its budget of {budget} s")
    return _finish(3, vals, err, ok, p, pkt, q)


PROB = {1: prob_one, 2: prob_two, 3: prob_three}


@dataclass
class SweepRow:
    v: float
    sector: str
    total: float
    pw: float
    bs: float
    err: float
    ok: bool = True
    message: str = ""


def sweep(kind, v_grid, pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None,
          workers: int | None = None) -> list[SweepRow]:
    """Probabilities on a grid of couplings V, rows in grid order then sector order."""
    n = {"one": 1, "two": 2, "three": 3, 1: 1, 2: 2, 3: 3}[kind]
    fn = PROB[n]
    v_grid = list(v_grid)

    def point(v):
        try:
            return fn(pkt, p.replace(coupling_v=float(v)), q)
        except Exception as exc:  # record and continue
            log.warning("sweep point V=%s failed: %s", v, exc)
            return exc

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(point, v_grid))
    else:
        results = [point(v) for v in v_grid]
    rows = []
    for v, res in zip(v_grid, results):
        if isinstance(res, Exception):
            for s in SECTORS[n]:
                rows.append(SweepRow(float(v), s, np.nan, np.nan, np.nan, np.nan, False, str(res)))
            continue
        for name, tot, pw, bs, err in res.rows():
            rows.append(SweepRow(float(v), name, tot, pw, bs, err, not res.flagged, "; ".join(res.messages)))
    return rows
