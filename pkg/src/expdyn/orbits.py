"""Orbit iteration, escape certification, and maximum-modulus machinery.

Orbits are iterated in three regimes.  While the next exponent b z^d is
representable in doubles the position is held as an exact complex number and
f is evaluated in log-domain.  Beyond that the magnitude is carried as an
iterated-exp pair (depth, v) with |z| = exp^depth(v), driven by the dominant
term's growth max_j |b_j| cos(d phi + arg b_j) * |z|^d; at this scale the
phase is a deterministic proxy (the argument direction of the dominant
exponent), since the true phase of f is an astronomically large number mod
2 pi.  Classification is certificate-based: escape is only reported when a
run of consecutive steps each shows the point outside the level-1
exceptional set, beyond the escape radius, and growing at the stretched
exponential rate log|z_{k+1}| >= |z_k|^alpha.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadBase, ZeroValue
from .exceptional import in_E_mask
from .funcs import ExpPoly, _term_exponents, eval_deriv_log, eval_log, eval_log_batch, wrap_phase
from .towers import LIFT, TowerMag, _tower_add_const, _tower_scale, tower_exp, tower_log, tower_pow

__all__ = [
    "ClassifyParams",
    "OrbitClass",
    "ESCAPE_CERTIFIED",
    "NON_ESCAPE_OBSERVED",
    "UNDETERMINED",
    "log_max_modulus",
    "iterate_max_modulus",
    "iterate_E_alpha",
    "sixsmith_quantity",
    "classify_batch",
    "classify_orbit",
    "write_orbit_csv",
]

ESCAPE_CERTIFIED = "EscapeCertified"
NON_ESCAPE_OBSERVED = "NonEscapeObserved"
UNDETERMINED = "Undetermined"

_TAG_NAMES = {0: UNDETERMINED, 1: ESCAPE_CERTIFIED, 2: NON_ESCAPE_OBSERVED}

# A non-escape verdict requires this many trailing steps inside the radius.
TAIL_STEPS = 16
# Beyond this iterated-exp depth an uncertified orbit is given up on.
MAX_DEPTH = 6


@dataclass(frozen=True)
class ClassifyParams:
    alpha: float = 0.25
    escape_radius: float = 50.0
    max_iter: int = 512
    cert_steps: int = 3
    bail_logmod: float = 690.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.cert_steps < 2:
            raise ValueError("cert_steps must be at least 2")
        if self.escape_radius <= 0 or self.max_iter < 1:
            raise ValueError("invalid escape_radius/max_iter")


@dataclass
class OrbitClass:
    tag: str
    steps: int
    fast_escape: bool
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Maximum modulus


def _log_deriv_bound(f: ExpPoly, r: float) -> float:
    """Crude bound on |f'/f| near the circle maximum of |f| on |z| = r.

    Near the maximum the dominant term carries f, so |f'/f| is within a
    factor of the exponent derivative plus polynomial logarithmic
    derivatives; the factor 2 absorbs the subdominant correction.
    """
    bound = 0.0
    for t in f.terms:
        g = f.d * abs(t.b) * r ** (f.d - 1) + t.P.deriv().coeff_bound(r)
        if t.Q.degree > 0:
            g += t.Q.degree / max(r, 1.0)
        bound = max(bound, g)
    return 2.0 * bound + 1.0


def log_max_modulus(f: ExpPoly, r: float, ntheta: int = 256):
    """Bracket [lo, hi] for log max_{|z|=r} |f(z)| by circle sampling.

    lo is the sampled maximum of log|f|; hi adds a Lipschitz slack for the
    half gap between samples using the crude gradient bound above.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    thetas = 2.0 * math.pi * np.arange(ntheta) / ntheta
    Z = r * np.exp(1j * thetas)
    lm, _, zero = eval_log_batch(f, Z)
    lm = np.where(zero, -np.inf, lm)
    lo = float(lm.max())
    slack = r * _log_deriv_bound(f, r) * (math.pi / ntheta)
    return lo, lo + slack


def _asymptotic_log_max(f: ExpPoly) -> float:
    """Conservative coefficient for log M(r) <= c r^d at unrepresentable r."""
    return f.max_abs_b * (1.0 + 1e-9)


def iterate_max_modulus(f: ExpPoly, R: float, n: int):
    """The first n iterates of r -> M(r, f) starting at R, as TowerMag.

    Uses circle sampling (upper bracket side) while r is small enough that
    the exponents fit in doubles, and the dominant-coefficient asymptotic
    log M(r) <= c r^d beyond; every approximation is taken on the upper
    side, so the iterates are usable as conservative fast-escape gates.
    """
    lo, hi = log_max_modulus(f, R)
    if lo <= math.log(R):
        raise BadBase(f"M({R}) not certified above {R}")
    out = []
    t = TowerMag(0, float(R))
    c_up = _asymptotic_log_max(f)
    for _ in range(n):
        if t.depth == 0 and f.d * math.log(t.value) + math.log(f.max_abs_b) <= 700.0:
            _, hi = log_max_modulus(f, t.value)
            t = TowerMag.from_logmod(hi)
        else:
            log_r = tower_log(t)
            loglog_m = _tower_add_const(_tower_scale(log_r, float(f.d)), math.log(c_up))
            t = tower_exp(tower_exp(loglog_m))
        out.append(t)
    return out


def iterate_E_alpha(x: float, alpha: float, k: int) -> TowerMag:
    """k-fold iterate of x -> exp(x^alpha) in tower form."""
    if x <= 0 or alpha <= 0:
        raise ValueError("x and alpha must be positive")
    t = TowerMag(0, float(x))
    for _ in range(k):
        t = tower_exp(tower_pow(t, alpha))
    return t


def sixsmith_quantity(f: ExpPoly, z: complex) -> float:
    """|z f'(z)/f(z)|, evaluated from log-domain values."""
    z = complex(z)
    v = eval_log(f, z)
    d1 = eval_log_batch(f, np.asarray(z), order=1)
    if bool(d1[2]):
        return 0.0
    e = float(d1[0]) - v.logmod + math.log(abs(z))
    return math.inf if e > 709.0 else math.exp(e)


# ---------------------------------------------------------------------------
# Classification engine


def _canon_arrays(depth, val):
    """Canonicalize (depth, value) pairs so lexicographic order is the real order."""
    depth = depth.copy()
    val = val.copy()
    while True:
        m = (depth > 0) & (val <= LIFT)
        if not m.any():
            break
        val[m] = np.exp(val[m])
        depth[m] -= 1
    return depth, val


def _tower_ge(d1, v1, d2, v2):
    return (d1 > d2) | ((d1 == d2) & (v1 >= v2))


def classify_batch(f: ExpPoly, points, p: ClassifyParams | None = None, record: bool = False):
    """Classify an array of starting points; returns a dict of result arrays.

    Keys: tag (strings), steps, fast_escape, escape_step, final_depth,
    final_val (|z| = exp^depth(val) at the last computed step), and, when
    record is set, trace (per-step diagnostics for the single-point case).
    """
    if p is None:
        p = ClassifyParams()
    pts = np.asarray(points, dtype=complex).ravel()
    n_pts = pts.size
    d = f.d
    use_e1 = d >= 3
    alpha = p.alpha
    radius = p.escape_radius
    dcap = min((700.0 - math.log(f.max_abs_b) - 5.0) / d, p.bail_logmod)

    betas = np.array([cmath.phase(t.b) for t in f.terms])
    babs = np.array([abs(t.b) for t in f.terms])
    logd = math.log(d) if d > 1 else 0.0

    mode = np.zeros(n_pts, np.int8)  # 0 direct complex, 1 tower magnitude
    z = pts.copy()
    depth = np.zeros(n_pts, np.int64)
    val = np.abs(pts)
    phase = np.angle(pts)
    run = np.zeros(n_pts, np.int64)
    below = np.zeros(n_pts, np.int64)
    tag = np.zeros(n_pts, np.int8)
    done = np.zeros(n_pts, bool)
    fast_ok = np.ones(n_pts, bool)
    esc_step = np.full(n_pts, -1, np.int64)
    steps_used = np.zeros(n_pts, np.int64)

    try:
        ladder = iterate_max_modulus(f, radius, p.max_iter + 1)
        lad_depth = np.array([t.depth for t in ladder])
        lad_val = np.array([t.value for t in ladder])
    except BadBase:
        ladder = None
        fast_ok[:] = False

    trace = [] if record else None

    for k in range(p.max_iter):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        steps_used[act] = k + 1

        ia = act[mode[act] == 0]
        it = act[mode[act] == 1]

        new_depth = np.empty(act.size, np.int64)
        new_val = np.empty(act.size)
        cond_all = np.zeros(n_pts, bool)
        stop_now = np.zeros(n_pts, bool)  # undetermined dead ends

        if ia.size:
            Z = z[ia]
            absZ = np.abs(Z)
            if use_e1:
                in_e1 = in_E_mask(f, Z, 1)
            else:
                in_e1 = np.zeros(ia.size, bool)
            lm, ph, zero = eval_log_batch(f, Z)
            lm = np.where(zero, -np.inf, lm)
            with np.errstate(over="ignore", invalid="ignore"):
                g_ok = lm >= absZ**alpha
            cond_all[ia] = (absZ >= radius) & ~in_e1 & g_ok
            below[ia] = np.where(absZ <= radius, below[ia] + 1, 0)

            promote = lm > dcap
            # Step with the exact complex term sum whenever every term fits in
            # doubles: IEEE products and sums commute with negation and
            # conjugation, so sign/mirror symmetries of f survive bitwise.
            # Otherwise reconstruct from the log-domain value.
            ws = _term_exponents(f, Z)
            pv = [t.Q(Z) for t in f.terms]
            maxw = np.maximum.reduce([w.real for w in ws])
            with np.errstate(divide="ignore"):
                maxs = np.maximum.reduce(
                    [w.real + np.log(np.abs(q)) for w, q in zip(ws, pv)]
                )
            safe = (maxw <= 700.0) & (maxs <= 700.0) & ~promote & ~zero
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                direct = np.zeros_like(Z)
                for w, q in zip(ws, pv):
                    direct = direct + q * np.exp(np.where(safe, w, 0.0))
                znew = np.where(
                    zero,
                    0.0 + 0.0j,
                    np.where(
                        safe, direct, np.exp(np.where(promote, 0.0, lm)) * np.exp(1j * ph)
                    ),
                )
            fixed = ~promote & (znew == Z)
            nonesc = fixed & (absZ <= radius)
            stuck = fixed & (absZ > radius)
            done[ia[nonesc]] = True
            tag[ia[nonesc]] = 2
            done[ia[stuck]] = True

            mode[ia] = np.where(promote, 1, 0)
            z[ia] = np.where(promote, 0.0, znew)
            phase[ia] = ph
            sel = np.searchsorted(act, ia)
            new_depth[sel] = np.where(promote, 1, 0)
            new_val[sel] = np.where(promote, lm, np.abs(znew))
            depth[ia] = np.where(promote, 1, 0)
            val[ia] = np.where(promote, lm, np.abs(znew))

        if it.size:
            dep = depth[it]
            v = val[it]
            dphi = d * phase[it]
            cj = babs[:, None] * np.cos(dphi[None, :] + betas[:, None])
            mj = np.argmax(cj, axis=0)
            c = cj[mj, np.arange(it.size)]
            dead = c <= 0
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                logc = np.where(dead, 0.0, np.log(np.where(dead, 1.0, c)))
                # growth: log|z'| = c |z|^d >= |z|^alpha
                g1 = logc + d * v >= alpha * v
                small = (dep >= 2) & (v <= 10.0)
                l_small = np.exp(np.where(small, v, 0.0))
                g2 = np.where(small, logc + d * l_small >= alpha * l_small, True)
            g_ok = np.where(dep == 1, g1, g2) & ~dead
            cond_all[it] = g_ok
            below[it] = 0

            nv = np.where(dep == 1, logc + d * v, np.where(dep == 2, v + logd, v))
            nd = dep + 1
            # Reduce back down if the new magnitude is representable again.
            while True:
                m = (nd > 0) & (nv <= LIFT)
                if not m.any():
                    break
                nv[m] = np.exp(nv[m])
                nd[m] -= 1
            phase[it] = wrap_phase(dphi + betas[mj])
            # Demotion to direct mode when |z| fits the exact evaluator again.
            with np.errstate(divide="ignore"):
                demote = (nd == 0) & (np.log(np.maximum(nv, 1e-300)) <= dcap)
            redepth = (nd == 0) & ~demote
            nd = np.where(redepth, 1, nd)
            nv = np.where(redepth, np.log(np.maximum(nv, 1e-300)), nv)
            mode[it] = np.where(demote, 0, 1)
            z[it] = np.where(demote, nv * np.exp(1j * phase[it]), 0.0)
            depth[it] = np.where(demote, 0, nd)
            val[it] = nv
            sel = np.searchsorted(act, it)
            new_depth[sel] = np.where(demote, 0, nd)
            new_val[sel] = nv

            stop_now[it[dead]] = True
            stop_now[it[(nd > MAX_DEPTH) & ~dead]] = True

        # fast-escape gate: |z_n| >= M^(n - cert_steps)(escape_radius)
        n_step = k + 1
        gate = n_step - p.cert_steps
        if ladder is not None and 0 < gate <= len(ladder):
            cd, cv = _canon_arrays(new_depth, new_val)
            live = ~done[act]
            ok = _tower_ge(cd, cv, lad_depth[gate - 1], lad_val[gate - 1])
            fa = fast_ok[act]
            fa[live] &= ok[live]
            fast_ok[act] = fa

        run[act] = np.where(cond_all[act] & ~done[act], run[act] + 1, 0)
        cert = (~done) & (run >= p.cert_steps)
        tag[cert] = 1
        esc_step[cert] = n_step
        done |= cert
        newly_stopped = stop_now & ~done
        done |= newly_stopped

        if record:
            trace.append(
                {
                    "step": n_step,
                    "mode": mode.copy(),
                    "z": z.copy(),
                    "depth": depth.copy(),
                    "val": val.copy(),
                    "phase": phase.copy(),
                    "cond": cond_all.copy(),
                    "run": run.copy(),
                }
            )

    rest = ~done
    tag[rest & (below >= min(TAIL_STEPS, p.max_iter))] = 2

    fast = fast_ok & (tag == 1)
    return {
        "tag": np.array([_TAG_NAMES[t] for t in tag], dtype=object),
        "tag_code": tag,
        "steps": steps_used,
        "fast_escape": fast,
        "escape_step": esc_step,
        "final_mode": mode,
        "final_depth": depth,
        "final_val": val,
        "trace": trace,
    }


def _final_abs_tower(res, i=0) -> TowerMag:
    if res["final_mode"][i] == 0:
        return TowerMag(0, float(np.abs(res["final_val"][i])))
    return TowerMag(int(res["final_depth"][i]), float(res["final_val"][i]))


def classify_orbit(f: ExpPoly, z0: complex, p: ClassifyParams | None = None) -> OrbitClass:
    """Classify a single orbit, with certificate diagnostics attached."""
    if p is None:
        p = ClassifyParams()
    res = classify_batch(f, [complex(z0)], p, record=True)
    tag = str(res["tag"][0])
    diagnostics = {"last_abs": _final_abs_tower(res)}
    try:
        diagnostics["last_sixsmith"] = sixsmith_quantity(f, z0)
    except ZeroValue:
        diagnostics["last_sixsmith"] = None
    cert_trace = []
    prev_abs = TowerMag(0, abs(complex(z0)))
    for rec in res["trace"]:
        if rec["mode"][0] == 0:
            cur = TowerMag(0, float(np.abs(rec["z"][0])))
        else:
            dep = int(rec["depth"][0])
            cur = TowerMag(dep, float(rec["val"][0])) if dep else TowerMag(0, float(rec["val"][0]))
        cert_trace.append(
            {"step": rec["step"], "abs_before": prev_abs, "abs_after": cur, "certified": bool(rec["cond"][0])}
        )
        prev_abs = cur
    diagnostics["cert_trace"] = cert_trace
    return OrbitClass(
        tag=tag,
        steps=int(res["steps"][0]),
        fast_escape=bool(res["fast_escape"][0]),
        diagnostics=diagnostics,
    )


def write_orbit_csv(f: ExpPoly, z0: complex, p: ClassifyParams, path) -> OrbitClass:
    """Iterate one orbit and export its trace as CSV."""
    res = classify_batch(f, [complex(z0)], p, record=True)
    tag = str(res["tag"][0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "re", "im", "logmod", "phase", "depth", "tag"])
        writer.writerow([0, complex(z0).real, complex(z0).imag, "", "", 0, tag])
        for rec in res["trace"]:
            if rec["mode"][0] == 0:
                zz = rec["z"][0]
                writer.writerow([rec["step"], zz.real, zz.imag, "", "", 0, tag])
            else:
                writer.writerow(
                    [rec["step"], "", "", rec["val"][0], rec["phase"][0], rec["depth"][0], tag]
                )
    return OrbitClass(tag=tag, steps=int(res["steps"][0]), fast_escape=bool(res["fast_escape"][0]))
