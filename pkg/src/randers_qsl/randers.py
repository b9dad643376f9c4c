"""Randers navigation norm on SU(N) and curve lengths.

The Riemannian part is ``g(X, Y) = alpha * Re Tr(X^dagger Y)`` on
anti-Hermitian generators and the wind is the drift generator ``W = -i H0``.
Both are right-invariant, so every function here takes the generator ``X``
of a tangent vector ``X U`` and never the base point ``U``.

Sign convention: trajectories obey ``dU/dt = -i H U``, so a Hamiltonian ``H``
corresponds to the generator ``-i H``. The specialised form
:func:`randers_norm_su` keeps the ``i A U`` parametrisation of tangents,
i.e. its ``A`` equals ``-H`` for the trajectory driven by ``H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import SchemaError, SingularFormError, ValidationError
from .hamiltonians import (
    TOL_BUDGET,
    ControlProblem,
    check_control,
    hamiltonian_from_json,
    require_valid,
)

DEFAULT_PANELS = 256
MAX_PANELS = 2**14
QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class NavigationData:
    problem: ControlProblem

    def __post_init__(self):
        require_valid(self.problem)

    @property
    def alpha(self) -> float:
        return self.problem.alpha

    @property
    def wind(self) -> np.ndarray:
        return -1j * self.problem.h0

    def g(self, x, y) -> float:
        return self.alpha * float(np.real(np.vdot(x, y)))


def randers_norm_general(nav: NavigationData, x) -> float:
    """Navigation norm of the tangent ``X U`` for an anti-Hermitian generator ``X``.

    Parameters
    ----------
    nav : NavigationData
        Metric scale and wind.
    x : array_like
        Generator in su(N), i.e. ``X = -i A`` with ``A`` Hermitian and traceless.

    Returns
    -------
    float
        ``[-g(X,W) + sqrt(g(X,W)^2 + (1 - g(W,W)) g(X,X))] / (1 - g(W,W))``.
    """
    x = matcore.as_matrix(x, "X")
    if x.shape != nav.problem.h0.shape:
        raise ValueError("generator dimension does not match H0")
    if matcore.hermitian_defect(1j * x) > nav.problem.tol_spec:
        raise ValidationError("generator is not anti-Hermitian")
    w = nav.wind
    gxw = nav.g(x, w)
    gww = nav.g(w, w)
    gxx = nav.g(x, x)
    lam = 1.0 - gww
    return (-gxw + math.sqrt(gxw * gxw + lam * gxx)) / lam


def hamiltonian_norm(nav: NavigationData, h) -> float:
    """Norm of the tangent of the trajectory driven by the total Hamiltonian ``h``."""
    return randers_norm_general(nav, -1j * matcore.as_matrix(h, "H"))


def su_roots(nav: NavigationData, a) -> tuple[float, float]:
    """Both sign choices of the specialised norm for the tangent ``i A U``."""
    a = matcore.as_matrix(a, "A")
    p = nav.problem
    if matcore.hermitian_defect(a) > p.tol_spec:
        raise ValidationError("A is not Hermitian")
    h0 = p.h0
    tr_ah = float(np.real(np.trace(a @ h0)))
    scale = np.linalg.norm(a) * np.linalg.norm(h0)
    if scale == 0 or abs(tr_ah) <= p.tol_spec * scale:
        raise SingularFormError("Tr(A H0) = 0: use randers_norm_general instead")
    h = p.tr_h0_sq
    r = p.budget / h
    tr_a2 = float(np.real(np.trace(a @ a)))
    root = math.sqrt(1.0 + (r - 1.0) * h * tr_a2 / tr_ah**2)
    pref = tr_ah / (h * (r - 1.0))
    return pref * (1.0 + root), pref * (1.0 - root)


def randers_norm_su(nav: NavigationData, a) -> float:
    """Specialised SU(N) norm of ``i A U``; the sign is chosen for positivity."""
    plus, minus = su_roots(nav, a)
    return plus if plus >= 0 else minus


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant controls: a sequence of ``(hc, duration)`` pairs."""

    segments: tuple

    def __post_init__(self):
        segs = []
        for hc, dt in self.segments:
            if not dt > 0:
                raise ValidationError(f"segment durations must be positive, got {dt}")
            segs.append((matcore.as_matrix(hc, "Hc"), float(dt)))
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def duration(self) -> float:
        return math.fsum(dt for _, dt in self.segments)

    def violations(self, problem: ControlProblem, tol_budget: float = TOL_BUDGET):
        return [(i, v) for i, (hc, _) in enumerate(self.segments)
                for v in check_control(problem, hc, tol_budget)]


def schedule_from_json(obj) -> tuple[ControlSchedule, bool]:
    """Parse ``{"segments": [{"hc": ..., "duration": t}, ...], "relax_budget": bool}``."""
    try:
        raw = obj["segments"]
        segs = tuple((hamiltonian_from_json(s["hc"]), float(s["duration"])) for s in raw)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad schedule: {exc}") from None
    return ControlSchedule(segs), bool(obj.get("relax_budget", False))


def _simpson(values, h):
    w = np.ones(len(values))
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    # fsum in node order keeps the result independent of BLAS reduction order.
    return math.fsum((w * values).tolist()) * h / 3.0


def _segment_integrand(nav, h, u0, taus):
    dec = matcore.eigh_decomposition(h, nav.problem.tol_spec)
    v, e = dec.eigenvectors, dec.eigenvalues
    vals = np.empty(len(taus))
    for k, tau in enumerate(taus):
        u = (v * np.exp(-1j * tau * e)) @ matcore.dagger(v) @ u0
        udot = -1j * h @ u
        gen = matcore.anti_hermitize(udot @ matcore.dagger(u))
        vals[k] = randers_norm_general(nav, gen)
    return vals


def curve_length(nav: NavigationData, schedule: ControlSchedule, relax_budget: bool = False,
                 panels: int = DEFAULT_PANELS, rtol: float = QUAD_RTOL,
                 max_panels: int = MAX_PANELS) -> float:
    """Length of the trajectory driven by ``H0 + Hc(t)`` under the navigation norm.

    Each segment is integrated with composite Simpson, doubling the panel count
    from ``panels`` until successive estimates agree to ``rtol`` (relative) or
    ``max_panels`` is reached. Segments are summed in schedule order.
    """
    if not relax_budget:
        bad = schedule.violations(nav.problem)
        if bad:
            msg = "; ".join(f"segment {i}: {v}" for i, v in bad)
            raise ValidationError("invalid schedule: " + msg, [v for _, v in bad])
    n = nav.problem.dim
    u = np.eye(n, dtype=np.complex128)
    total = []
    for hc, dt in schedule.segments:
        if hc.shape != (n, n):
            raise ValidationError("control dimension does not match H0")
        h = nav.problem.h0 + hc
        m = panels
        prev = None
        while True:
            taus = np.linspace(0.0, dt, 2 * m + 1)
            est = _simpson(_segment_integrand(nav, h, u, taus), dt / (2 * m))
            if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
                break
            if m >= max_panels:
                break
            prev = est
            m *= 2
        total.append(est)
        u = matcore.expm_hermitian_generator(h, dt, nav.problem.tol_spec) @ u
    return math.fsum(total)
