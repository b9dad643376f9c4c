"""Brute-force verification of constant-control gate times.

Nothing here uses matrix logarithms: candidate controls are propagated with
``exp(-i t (H0 + Hc))`` and compared with the target directly. The only link
to the closed form is the search window ``t_max``, which is a multiple of the
best closed-form time.

For a constant Hamiltonian with eigenpairs ``(w_n, v_n)`` the squared
distance to ``O`` along the trajectory is

    ||U(t) - O||_F^2 = 2N - 2 Re sum_n exp(-i w_n t) <v_n|O^dagger|v_n>,

which makes dense time scans cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.stats import qmc

from . import matcore
from .errors import ValidationError
from .hamiltonians import ControlProblem, require_valid
from .qsl import t_opt_over_branches

DIST_TOL = 1e-6
SCAN_SAMPLES = 4096

DEFAULT_SEARCH = {
    "samples": None,  # 2000 for N=2, 20000 otherwise
    "t_max_factor": 3.0,
    "refine_iters": 200,
    "seed": 0,
    "dist_tol": DIST_TOL,
    "quotient_center": False,
    "max_dim": 4,
    "windows": 8,
    "starts_per_window": 3,
    "branch_max_shift": 1,
    "scan_samples": SCAN_SAMPLES,
}


def propagate(h, t: float) -> np.ndarray:
    """``exp(-i H t)`` for a constant Hermitian ``H``."""
    return matcore.expm_hermitian_generator(h, t)


def _center_phases(n, quotient_center):
    if not quotient_center:
        return np.ones(1, dtype=np.complex128)
    return np.exp(2j * np.pi * np.arange(n) / n)


def gate_distance(u, o, quotient_center: bool = False) -> float:
    """Frobenius distance ``||U - O||``, optionally minimised over ``O -> w^k O``."""
    u = matcore.as_matrix(u, "U")
    o = matcore.as_matrix(o, "O")
    return float(min(np.linalg.norm(u - z * o) for z in _center_phases(o.shape[0], quotient_center)))


def _overlaps(v, o):
    """Diagonal of ``V^dagger O^dagger V`` for a stack of eigenbases ``v``."""
    return np.einsum("...ji,jl,...li->...i", v.conj(), o.conj().T, v)


def _dist2_profile(w, cdiag, ts, zs):
    """Squared distance on a time grid for one or many Hamiltonians.

    ``w``, ``cdiag`` have shape ``(..., N)``; returns ``(..., len(ts))``.
    """
    n = w.shape[-1]
    acc = np.zeros(w.shape[:-1] + (len(ts),), dtype=np.complex128)
    for k in range(n):
        acc += cdiag[..., k, None] * np.exp(-1j * w[..., k, None] * ts)
    best = None
    for z in zs:
        # Tr((z O)^dagger U) = conj(z) Tr(O^dagger U)
        d2 = 2 * n - 2 * np.real(np.conj(z) * acc)
        best = d2 if best is None else np.minimum(best, d2)
    return np.maximum(best, 0.0)


def _direct_distance(w, v, o, zs):
    """``t -> min_z ||V exp(-i w t) V^dagger - z O||`` without the cancellation of the trace form."""
    vh = v.conj().T

    def dist(t):
        u = (v * np.exp(-1j * w * t)) @ vh
        return float(min(np.linalg.norm(u - z * o) for z in zs))
    return dist


def _minimise_in(fn, lo, mid, hi):
    """Local minimum of ``fn`` on ``[lo, hi]``.

    Brent with a proper bracket reaches ~1e-11 absolute in ``t``; the bounded
    variant stops at ``sqrt(eps)`` relative, so it is only the fallback.
    """
    if lo < mid < hi and fn(mid) < min(fn(lo), fn(hi)):
        res = optimize.minimize_scalar(fn, bracket=(lo, mid, hi), method="brent",
                                       options={"xtol": 1e-15})
        if lo <= res.x <= hi:
            return float(res.x), float(res.fun)
    res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-15})
    return float(res.x), float(res.fun)


def _refine_hits(ts, d, t_max, dist_tol, slack, dist_fn):
    """Walk sampled local minima in time order; return the first refined hit.

    The scan profile ``d`` comes from the cheap trace form, whose squared
    distance loses about half the digits near a hit; the refinement uses the
    direct matrix distance ``dist_fn`` instead.
    """
    dt = ts[1] - ts[0]
    for j in range(1, len(ts)):
        if d[j] > slack or d[j] > d[j - 1] or (j + 1 < len(ts) and d[j] > d[j + 1]):
            continue
        lo, hi = ts[j - 1], min(ts[min(j + 1, len(ts) - 1)], t_max)
        if hi <= lo:
            hi = lo + dt
        x, fx = _minimise_in(dist_fn, lo, ts[j], hi)
        if fx <= dist_tol and 0 < x <= t_max:
            return x
    return None


def first_hit_time(h, o, t_max: float, dist_tol: float = DIST_TOL, samples: int = SCAN_SAMPLES,
                   quotient_center: bool = False) -> float | None:
    """Earliest ``t`` in ``(0, t_max]`` with ``||exp(-iHt) - O|| <= dist_tol``.

    A uniform scan of ``samples`` points locates local minima of the distance;
    each one that could hide a hit is refined by bounded scalar minimisation
    and the refined minimiser is returned. ``None`` when nothing hits.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    dec = matcore.eigh_decomposition(h)
    o = matcore.as_matrix(o, "O")
    zs = _center_phases(o.shape[0], quotient_center)
    return _first_hit(dec.eigenvalues, dec.eigenvectors, o, t_max, dist_tol, samples, zs)


def _first_hit(w, v, o, t_max, dist_tol, samples, zs):
    ts = np.linspace(0.0, t_max, samples + 1)
    d = np.sqrt(_dist2_profile(w, _overlaps(v, o), ts, zs))
    slack = float(np.linalg.norm(w)) * (ts[1] - ts[0]) + dist_tol
    return _refine_hits(ts, d, t_max, dist_tol, slack, _direct_distance(w, v, o, zs))


def traceless_hermitian_basis(n: int) -> np.ndarray:
    """Generalised Gell-Mann matrices scaled so that ``Tr(B_j B_k) = delta_jk``."""
    basis = []
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=np.complex128)
            m[j, k] = m[k, j] = 1 / math.sqrt(2)
            basis.append(m)
            m = np.zeros((n, n), dtype=np.complex128)
            m[j, k], m[k, j] = -1j / math.sqrt(2), 1j / math.sqrt(2)
            basis.append(m)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(np.complex128))
    return np.array(basis).reshape(-1, n, n)


def sphere_controls(coords, basis, budget) -> np.ndarray:
    """Map coordinates to controls on the sphere ``Tr(Hc^2) = budget``."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    unit = coords / np.linalg.norm(coords, axis=1, keepdims=True)
    return np.einsum("kd,dij->kij", unit * math.sqrt(budget), basis)


def quasi_random_directions(dim: int, count: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points pushed through the normal quantile, then normalised."""
    m = max(1, math.ceil(math.log2(count)))
    pts = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]
    z = special.ndtri(np.clip(pts, 1e-15, 1 - 1e-15))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass
class SearchReport:
    best_time: float
    best_control: np.ndarray | None
    best_distance: float
    samples_evaluated: int
    refinement_iters: int
    success: bool = False
    t_max: float = math.nan
    reference_time: float = math.nan
    max_budget_error: float = 0.0
    candidates: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "best_time": self.best_time if self.success else None,
            "best_control": (matcore.matrix_to_json(self.best_control)
                             if self.best_control is not None else None),
            "best_distance": self.best_distance,
            "samples_evaluated": self.samples_evaluated,
            "refinement_iters": self.refinement_iters,
            "success": self.success,
            "t_max": self.t_max,
            "reference_time": self.reference_time,
            "max_budget_error": self.max_budget_error,
        }


def _search_config(search_cfg, n):
    cfg = dict(DEFAULT_SEARCH)
    unknown = set(search_cfg or {}) - set(cfg)
    if unknown:
        raise ValueError(f"unknown search options: {sorted(unknown)}")
    cfg.update(search_cfg or {})
    if cfg["samples"] is None:
        cfg["samples"] = 2000 if n == 2 else 20000
    return cfg


def _reference_time(p, o, cfg):
    zs = _center_phases(p.dim, cfg["quotient_center"])
    times = []
    for z in zs:
        times += [r.t_opt for r in t_opt_over_branches(p, z * o, cfg["branch_max_shift"]) if r.t_opt > 0]
    if not times:
        raise ValidationError("no positive closed-form time to size the search window")
    return min(times)


def brute_force_min_time(p: ControlProblem, o, search_cfg: dict | None = None) -> SearchReport:
    """Search the control sphere for the fastest constant control reaching ``o``.

    Controls are ``Hc = sqrt(budget) * sum_k c_k B_k / |c|`` over an orthonormal
    traceless Hermitian basis, so every candidate meets the budget exactly.
    Quasi-random directions are scanned on ``(0, t_max]``; the best sample in
    each of ``windows`` nested time windows seeds a Powell refinement of
    ``||exp(-i t (H0 + Hc)) - O||^2`` over ``(c, t)``, and every refined control
    is re-scanned with :func:`first_hit_time`. The earliest verified hit wins.
    """
    require_valid(p)
    o = matcore.as_matrix(o, "O")
    n = p.dim
    cfg = _search_config(search_cfg, n)
    if n > cfg["max_dim"]:
        raise ValidationError(f"dimension {n} exceeds the brute-force guard max_dim={cfg['max_dim']}")
    if o.shape != (n, n):
        raise ValidationError("target dimension does not match H0")

    zs = _center_phases(n, cfg["quotient_center"])
    t_ref = _reference_time(p, o, cfg)
    t_max = cfg["t_max_factor"] * t_ref
    dist_tol = cfg["dist_tol"]
    basis = traceless_hermitian_basis(n)
    h0 = np.asarray(p.h0)
    budget = p.budget

    dirs = quasi_random_directions(len(basis), int(cfg["samples"]), int(cfg["seed"]))
    ts = np.linspace(0.0, t_max, int(cfg["scan_samples"]) + 1)
    caps = t_max * np.arange(1, cfg["windows"] + 1) / cfg["windows"]
    cap_idx = [np.searchsorted(ts, c, side="right") for c in caps]
    win_d = np.empty((len(dirs), len(caps)))
    win_t = np.empty((len(dirs), len(caps)))
    max_budget_err = 0.0
    hits = []

    chunk = max(1, 2_000_000 // (len(ts) * n))
    for start in range(0, len(dirs), chunk):
        hc = sphere_controls(dirs[start:start + chunk], basis, budget)
        tr = np.real(np.einsum("kij,kji->k", hc, hc))
        max_budget_err = max(max_budget_err, float(np.max(np.abs(tr - budget))) / budget)
        w, v = np.linalg.eigh(h0 + hc)
        cdiag = _overlaps(v, o)
        d = np.sqrt(_dist2_profile(w, cdiag, ts, zs))
        for j, ci in enumerate(cap_idx):
            a = np.argmin(d[:, 1:ci], axis=1) + 1
            win_d[start:start + len(a), j] = d[np.arange(len(a)), a]
            win_t[start:start + len(a), j] = ts[a]
        near = d[:, 1:].min(axis=1) <= np.linalg.norm(w, axis=1) * (ts[1] - ts[0]) + dist_tol
        for k in np.flatnonzero(near):
            slack = float(np.linalg.norm(w[k])) * (ts[1] - ts[0]) + dist_tol
            t_hit = _refine_hits(ts, d[k], t_max, dist_tol, slack,
                                 _direct_distance(w[k], v[k], o, zs))
            if t_hit is not None:
                hits.append((t_hit, start + k, hc[k]))

    starts = []
    for j in range(len(caps)):
        for k in np.argsort(win_d[:, j], kind="stable")[:cfg["starts_per_window"]]:
            key = (int(k), float(win_t[k, j]))
            if key not in starts:
                starts.append(key)

    def objective(x):
        hc = sphere_controls(x[:-1], basis, budget)[0]
        w, v = np.linalg.eigh(h0 + hc)
        return float(_dist2_profile(w, _overlaps(v, o), np.array([x[-1]]), zs)[0])

    iters = 0
    candidates = []
    bounds = [(None, None)] * len(basis) + [(1e-12 * t_max, t_max)]
    for k, t0 in starts:
        res = optimize.minimize(objective, np.r_[dirs[k], t0], method="Powell", bounds=bounds,
                                options={"maxiter": cfg["refine_iters"], "xtol": 1e-10, "ftol": 1e-22})
        iters += int(res.nit)
        hc = sphere_controls(res.x[:-1], basis, budget)[0]
        tr = float(np.real(np.trace(hc @ hc)))
        max_budget_err = max(max_budget_err, abs(tr - budget) / budget)
        dist = math.sqrt(max(res.fun, 0.0))
        candidates.append((float(res.x[-1]), dist, hc))
        if dist <= dist_tol:
            t_hit = first_hit_time(h0 + hc, o, t_max, dist_tol, int(cfg["scan_samples"]),
                                   cfg["quotient_center"])
            if t_hit is not None:
                hits.append((t_hit, -1, hc))

    if hits:
        t_best, _, hc_best = min(hits, key=lambda x: x[0])
        d_best = gate_distance(propagate(h0 + hc_best, t_best), o, cfg["quotient_center"])
        return SearchReport(t_best, hc_best, d_best, len(dirs), iters, True, t_max, t_ref,
                            max_budget_err, candidates)
    _, d_c, hc_c = min(candidates, key=lambda x: x[1]) if candidates else (math.nan, math.inf, None)
    return SearchReport(math.inf, hc_c, d_c, len(dirs), iters, False, t_max, t_ref,
                        max_budget_err, candidates)
