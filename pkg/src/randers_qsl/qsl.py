"""Optimal gate times for constant controls.

For a constant control the trajectory is the one-parameter subgroup
``U_t = exp(-i t (H0 + Hc))``. Reaching ``O`` at time ``T`` along the branch
``L = log(O)`` forces ``Hc = (i/T) L - H0``; imposing ``Tr(Hc^2) = budget``
leaves a quadratic in ``1/T`` with exactly one positive root under the
small-wind condition. :func:`t_opt_closed_form` evaluates the navigation
closed form, :func:`budget_quadratic_root` solves the quadratic directly and
serves as its oracle.

The closed form :func:`closed_form_time` is written for tangents ``i A U``
(trajectories ``exp(+i t A)``). Under ``dU/dt = -i H U`` the logarithm enters
it with the opposite sign, so :func:`t_opt_closed_form` passes
``-Tr(H0 L)``. Feeding ``+Tr(H0 L)`` instead gives the time for the drift
reversed, ``H0 -> -H0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import SchemaError, ValidationError
from .hamiltonians import TOL_BUDGET, ControlProblem, build_pauli, require_valid

SWAP = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]
SWAP_SU4 = np.exp(1j * np.pi / 4) * SWAP
IY = np.array([[0, -1], [1, 0]], dtype=np.complex128)

PRESETS = ("single-spin", "swap-chain")


@dataclass(frozen=True)
class TargetGate:
    o: np.ndarray
    branch: matcore.LogBranch

    @classmethod
    def from_unitary(cls, o, branch: matcore.LogBranch | None = None,
                     tol: float = matcore.TOL_SPEC) -> "TargetGate":
        o = matcore.as_matrix(o, "O")
        if branch is None:
            branch = matcore.logm_special_unitary(o, tol)
        else:
            if not matcore.is_special_unitary(o, tol):
                raise ValidationError("target is not special unitary")
            # exp(L) of a far branch carries rounding ~ eps * |phases|
            slack = tol * max(1.0, float(np.max(np.abs(branch.phases))))
            if np.linalg.norm(matcore.expm_hermitian_generator(1j * branch.matrix, 1.0) - o) > slack:
                raise ValidationError("branch is not a logarithm of the target")
        return cls(o, branch)


@dataclass
class QslResult:
    t_opt: float
    rho: float
    root_sign: int
    hc_opt: np.ndarray | None
    branch_used: matcore.LogBranch
    diagnostics: dict = field(default_factory=dict)

    @property
    def hc_defined(self) -> bool:
        return self.hc_opt is not None

    def to_json(self) -> dict:
        d = self.diagnostics
        return {
            "t_opt": self.t_opt,
            "rho": self.rho,
            "root_sign": self.root_sign,
            "hc_defined": self.hc_defined,
            "hc_opt": matcore.matrix_to_json(self.hc_opt) if self.hc_defined else None,
            "branch_used": {
                "log": matcore.matrix_to_json(self.branch_used.matrix),
                "phases": [float(x) for x in self.branch_used.phases],
                "branch_offsets": list(self.branch_used.branch_offsets),
                "phase_sum_check": self.branch_used.phase_sum_check,
                "near_branch_cut": self.branch_used.near_branch_cut,
            },
            "diagnostics": {
                "tr_H0_logO": [d["tr_H0_logO"].real, d["tr_H0_logO"].imag],
                "tr_logO_sq": d["tr_logO_sq"],
                "tr_H0_sq": d["tr_H0_sq"],
                "budget_residual": d["budget_residual"],
                "route": d["route"],
            },
        }


def closed_form_time(rho: float, tr_h0_sq: float, tr_h0_log: complex,
                     tr_log_sq: float) -> tuple[float, int]:
    """Positive root of the navigation closed form and the sign that produced it.

    ``T = 1/(rho-1) * i Tr(H0 L)/Tr(H0^2) * (1 +- sqrt(1 + (rho-1) Tr(H0^2) Tr(L^2) / Tr(H0 L)^2))``,
    in the ``exp(+i t A)`` parametrisation (see module docstring).
    """
    tr_h0_log = complex(tr_h0_log)
    pref = (1j * tr_h0_log).real / ((rho - 1.0) * tr_h0_sq)
    radicand = 1.0 + (rho - 1.0) * tr_h0_sq * tr_log_sq / (tr_h0_log * tr_h0_log).real
    root = math.sqrt(radicand)
    plus, minus = pref * (1.0 + root), pref * (1.0 - root)
    if plus > 0:
        return plus, 1
    if minus > 0:
        return minus, -1
    raise AssertionError("closed form has no positive root; problem invariants are violated")


def _quadratic_coefficients(p: ControlProblem, lmat):
    a = -float(np.real(np.trace(lmat @ lmat)))
    b = float(np.real(-2j * np.trace(lmat @ p.h0)))
    c = p.tr_h0_sq - p.budget
    return a, b, c


def budget_quadratic_root(p: ControlProblem, branch, relax: bool = False) -> float:
    """Time ``T = 1/u`` from the positive root of ``-Tr(L^2) u^2 - 2i Tr(L H0) u + Tr(H0^2) - budget``.

    ``branch`` may be a :class:`~randers_qsl.matcore.LogBranch` or a bare
    anti-Hermitian matrix. ``relax=True`` skips problem validation (useful
    for probing the small-wind boundary).
    """
    if not relax:
        require_valid(p)
    lmat = branch.matrix if isinstance(branch, matcore.LogBranch) else matcore.as_matrix(branch, "L")
    a, b, c = _quadratic_coefficients(p, lmat)
    if a <= 0:
        raise ValidationError("logarithm is zero: the target is the identity branch")
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise ValidationError("budget quadratic has no real root")
    sq = math.sqrt(disc)
    # cancellation-free positive root for a > 0
    if b >= 0:
        u = -2.0 * c / (b + sq) if (b + sq) > 0 else 0.0
    else:
        u = (sq - b) / (2.0 * a)
    if not u > 0:
        raise ValidationError("budget quadratic has no positive root (small-wind boundary)")
    return 1.0 / u


def t_opt_closed_form(p: ControlProblem, g: TargetGate, tol_budget: float = TOL_BUDGET) -> QslResult:
    """Optimal constant-control time to reach ``g.o`` along ``g.branch``.

    Falls back to :func:`budget_quadratic_root` when ``Tr(H0 L)`` vanishes or
    the drift is zero, where the closed form is singular. The identity branch
    gives ``t_opt = 0`` and no control (``hc_opt is None``).
    """
    require_valid(p)
    lmat = g.branch.matrix
    h0 = p.h0
    h = p.tr_h0_sq
    tr_h0_l = complex(np.trace(h0 @ lmat))
    tr_l2 = float(np.real(np.trace(lmat @ lmat)))
    r = p.budget / h if h > 0 else math.inf
    diag = {"tr_H0_logO": tr_h0_l, "tr_logO_sq": tr_l2, "tr_H0_sq": h}

    if np.linalg.norm(lmat) <= p.tol_spec:
        diag.update(budget_residual=math.nan, route="identity")
        return QslResult(0.0, r, 1, None, g.branch, diag)

    scale = np.linalg.norm(h0) * np.linalg.norm(lmat)
    if h == 0 or abs(tr_h0_l) <= p.tol_spec * scale:
        t, sign, route = budget_quadratic_root(p, g.branch), 1, "quadratic"
    else:
        t, sign = closed_form_time(r, h, -tr_h0_l, tr_l2)
        route = "closed_form"

    hc = matcore.hermitize((1j / t) * lmat - h0)
    resid = float(np.real(np.trace(hc @ hc))) - p.budget
    diag.update(budget_residual=resid, route=route)
    return QslResult(t, r, sign, hc, g.branch, diag)


def t_opt_over_branches(p: ControlProblem, o, max_shift: int,
                        tol: float = matcore.TOL_SPEC) -> list[QslResult]:
    """Closed-form time for every enumerated logarithm branch, ascending."""
    results = [t_opt_closed_form(p, TargetGate(matcore.as_matrix(o), b))
               for b in matcore.enumerate_log_branches(o, max_shift, tol)]
    return sorted(results, key=lambda r: r.t_opt)


def min_branch_time(p: ControlProblem, o, max_shift: int = 1) -> float:
    """Smallest positive closed-form time over branches."""
    times = [r.t_opt for r in t_opt_over_branches(p, o, max_shift) if r.t_opt > 0]
    if not times:
        raise ValidationError("no branch gives a positive time")
    return times[0]


def _param(params, *names):
    for n in names:
        if n in params:
            return float(params[n])
    raise SchemaError(f"missing preset parameter {names[0]!r}")


def _swap_lambdas(params):
    if "lambda" in params:
        lam = [float(x) for x in params["lambda"]]
        if len(lam) != 3:
            raise SchemaError("'lambda' must have three components")
        return lam
    return [_param(params, "lambda_x"), _param(params, "lambda_y"), _param(params, "lambda_z")]


def preset(name: str, params: dict) -> tuple[ControlProblem, TargetGate]:
    """The two worked setups.

    ``"single-spin"``: ``H0 = B_x X + B_y Y``, ``Tr(Hc^2) = 2 D^2``,
    target ``[[0, -1], [1, 0]]``.

    ``"swap-chain"``: ``H0 = l_x XX + l_y YY + l_z ZZ``, budget ``1/alpha``,
    target ``e^{i pi/4} SWAP``.
    """
    if name == "single-spin":
        bx, by, d = _param(params, "B_x", "bx"), _param(params, "B_y", "by"), _param(params, "D", "d")
        if not bx * bx + by * by < d * d:
            raise ValidationError("single-spin preset needs B_x^2 + B_y^2 < D^2")
        h0 = build_pauli([("X", bx), ("Y", by)])
        return ControlProblem(h0, 2.0 * d * d), TargetGate.from_unitary(IY)
    if name == "swap-chain":
        lx, ly, lz = _swap_lambdas(params)
        alpha = _param(params, "alpha")
        if alpha <= 0 or not 4 * alpha * (lx * lx + ly * ly + lz * lz) < 1:
            raise ValidationError("swap-chain preset needs alpha > 0 and 4 alpha lambda^2 < 1")
        h0 = build_pauli([("XX", lx), ("YY", ly), ("ZZ", lz)])
        return ControlProblem.from_alpha(h0, alpha), TargetGate.from_unitary(SWAP_SU4)
    raise SchemaError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def _positive(pref, root):
    plus, minus = pref * (1 + root), pref * (1 - root)
    return plus if plus > 0 else minus


def single_spin_formula(bx: float, by: float, d: float) -> float:
    """``(pi/2) B_y/(D^2-B^2) (1 +- sqrt(1 + (D^2-B^2)/B_y^2))``, positive root.

    This is :func:`closed_form_time` specialised to the single-spin preset, so
    it shares the ``exp(+i t A)`` parametrisation: it equals the ``t_opt`` of
    the preset with ``B_y -> -B_y`` (and ``B_x -> -B_x``).
    """
    b2 = bx * bx + by * by
    gap = d * d - b2
    if by == 0:
        return 0.5 * math.pi / math.sqrt(gap)
    return _positive(0.5 * math.pi * by / gap, math.sqrt(1 + gap / (by * by)))


def swap_chain_formula(lx: float, ly: float, lz: float, alpha: float) -> float:
    """``-pi alpha S/(1-4 alpha lambda^2) (1 +- sqrt(1 + 3(1-4 alpha lambda^2)/(4 alpha S^2)))``, ``S = l_x+l_y+l_z``.

    Same parametrisation caveat as :func:`single_spin_formula`.
    """
    s = lx + ly + lz
    gap = 1 - 4 * alpha * (lx * lx + ly * ly + lz * lz)
    if s == 0:
        return math.pi * math.sqrt(3 * alpha / (4 * gap))
    return _positive(-math.pi * alpha * s / gap, math.sqrt(1 + 3 * gap / (4 * alpha * s * s)))


def preset_report(name: str, params: dict) -> dict:
    """Every intermediate quantity of the worked examples, ready to diff."""
    p, g = preset(name, params)
    res = t_opt_closed_form(p, g)
    lmat = g.branch.matrix
    tr_h0_l = res.diagnostics["tr_H0_logO"]
    if name == "single-spin":
        bx, by, d = _param(params, "B_x", "bx"), _param(params, "B_y", "by"), _param(params, "D", "d")
        displayed = single_spin_formula(bx, by, d)
        symbolic = {"rho": "D^2/B^2", "tr_H0_logO": "-pi i B_y", "tr_logO_sq": "-pi^2/2",
                    "log_O": "-i (pi/2) sigma_y"}
    else:
        lx, ly, lz = _swap_lambdas(params)
        alpha = _param(params, "alpha")
        displayed = swap_chain_formula(lx, ly, lz, alpha)
        symbolic = {"rho": "1/(4 alpha lambda^2)", "tr_H0_logO": "pi i (l_x + l_y + l_z)",
                    "tr_logO_sq": "-3 pi^2/4", "tr_H0_sq": "4 lambda^2",
                    "log_O": "(pi i/4) [[1,0,0,0],[0,-1,2,0],[0,2,-1,0],[0,0,0,1]]"}
    reversed_p = ControlProblem(-p.h0, p.budget)
    return {
        "preset": name,
        "params": dict(params),
        "rho": res.rho,
        "alpha": p.alpha,
        "budget": p.budget,
        "log_O": matcore.matrix_to_json(lmat),
        "tr_H0_sq": p.tr_h0_sq,
        "tr_H0_logO": [tr_h0_l.real, tr_h0_l.imag],
        "tr_logO_sq": res.diagnostics["tr_logO_sq"],
        "t_opt": res.t_opt,
        "root_sign": res.root_sign,
        "hc_opt": matcore.matrix_to_json(res.hc_opt),
        "budget_residual": res.diagnostics["budget_residual"],
        "t_opt_displayed_formula": displayed,
        "t_opt_reversed_drift": t_opt_closed_form(reversed_p, g).t_opt,
        "symbolic": symbolic,
        "convention": ("t_opt uses dU/dt = -i H U; t_opt_displayed_formula is the "
                       "exp(+i t A) closed form and equals t_opt_reversed_drift"),
    }
