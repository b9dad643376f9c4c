"""Drift/control Hamiltonians and the constraints the speed limit needs.

Units: hbar = 1, so energies and inverse times share units. The control
budget is ``Tr(Hc^2) = 1/alpha``; the drift must satisfy the small-wind
condition ``Tr(H0^2) < budget``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import matcore
from .matcore import TOL_SPEC
from .errors import SchemaError, ValidationError

TOL_BUDGET = 1e-9

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    letters: str
    coeff: float = 1.0

    def __post_init__(self):
        if not self.letters or any(c not in PAULI for c in self.letters):
            raise ValueError(f"Pauli string must be a nonempty word over IXYZ, got {self.letters!r}")

    def matrix(self) -> np.ndarray:
        return self.coeff * reduce(np.kron, (PAULI[c] for c in self.letters))


def build_pauli(strings) -> np.ndarray:
    """Sum of ``coeff * P1 (x) P2 (x) ...`` over the given Pauli strings.

    Accepts :class:`PauliString` objects or ``(letters, coeff)`` pairs.
    """
    terms = [s if isinstance(s, PauliString) else PauliString(*s) for s in strings]
    if not terms:
        raise ValueError("need at least one Pauli string")
    q = len(terms[0].letters)
    if any(len(t.letters) != q for t in terms):
        raise ValueError("Pauli strings have mixed lengths")
    return sum((t.matrix() for t in terms), np.zeros((2**q, 2**q), dtype=np.complex128))


@dataclass(frozen=True)
class Violation:
    name: str
    value: float
    detail: str = ""

    def __str__(self):
        return f"{self.name}: {self.detail} (measured {self.value:.6g})"


@dataclass(frozen=True)
class ControlProblem:
    """Navigation data: drift ``h0`` and control budget ``Tr(Hc^2)``.

    A drift whose trace is at most ``tol_spec`` in magnitude is projected onto
    its traceless part (a global phase), with a warning unless the trace is
    at round-off level. Larger traces are kept
    and reported by :func:`validate`.
    """

    h0: np.ndarray
    budget: float
    tol_spec: float = TOL_SPEC

    def __post_init__(self):
        h0 = matcore.as_matrix(self.h0, "H0").copy()
        n = h0.shape[0]
        tr = np.trace(h0)
        if 0 < abs(tr) <= self.tol_spec:
            # round-off traces are dropped silently; anything larger is worth a warning
            if abs(tr) > 64 * np.finfo(float).eps * max(1.0, float(np.linalg.norm(h0))):
                warnings.warn(f"projecting H0 onto its traceless part (trace {tr:.3e})", stacklevel=3)
            h0 = h0 - (tr / n) * np.eye(n)
        h0.setflags(write=False)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "budget", float(self.budget))

    @classmethod
    def from_alpha(cls, h0, alpha: float, **kw) -> "ControlProblem":
        if alpha <= 0:
            raise ValidationError("alpha must be positive")
        return cls(h0, 1.0 / alpha, **kw)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def alpha(self) -> float:
        return 1.0 / self.budget

    @property
    def tr_h0_sq(self) -> float:
        return float(np.real(np.trace(self.h0 @ self.h0)))


def validate(p: ControlProblem) -> list[Violation]:
    """Named violations of the problem invariants; empty when all hold."""
    out = []
    herm = matcore.hermitian_defect(p.h0)
    if herm > p.tol_spec:
        out.append(Violation("not_hermitian", herm, "H0 - H0^dagger is nonzero"))
    tr = abs(np.trace(p.h0))
    if tr > p.tol_spec:
        out.append(Violation("not_traceless", tr, "|Tr(H0)| exceeds tol_spec"))
    if not p.budget > 0:
        out.append(Violation("nonpositive_budget", p.budget, "control budget Tr(Hc^2) must be > 0"))
    if not p.tr_h0_sq < p.budget:
        out.append(Violation(
            "small_wind_violated", p.tr_h0_sq / p.budget if p.budget > 0 else np.inf,
            "alpha*Tr(H0^2) must be < 1"))
    return out


def require_valid(p: ControlProblem) -> None:
    v = validate(p)
    if v:
        raise ValidationError("invalid control problem: " + "; ".join(str(x) for x in v), v)


def rho(p: ControlProblem) -> float:
    """Budget-to-drift ratio ``Tr(Hc^2) / Tr(H0^2)``."""
    h = p.tr_h0_sq
    if h <= 0:
        raise ValidationError("rho is undefined for a zero drift Hamiltonian")
    return p.budget / h


def uniform_superposition_check(h) -> tuple[float, float]:
    """Return ``(Tr(H^2), N <psi|H^2|psi>)`` with psi uniform in H's eigenbasis."""
    dec = matcore.eigh_decomposition(h)
    n = len(dec.eigenvalues)
    psi = dec.eigenvectors @ np.full(n, 1 / np.sqrt(n))
    h = matcore.hermitize(matcore.as_matrix(h))
    h2 = h @ h
    lhs = float(np.real(np.trace(h2)))
    rhs = float(n * np.real(np.vdot(psi, h2 @ psi)))
    return lhs, rhs


def check_control(p: ControlProblem, hc, tol_budget: float = TOL_BUDGET) -> list[Violation]:
    """Violations of the control constraints for a candidate ``hc``."""
    hc = matcore.as_matrix(hc, "Hc")
    out = []
    if hc.shape != p.h0.shape:
        out.append(Violation("dimension_mismatch", hc.shape[0], f"expected N={p.dim}"))
        return out
    herm = matcore.hermitian_defect(hc)
    if herm > p.tol_spec:
        out.append(Violation("not_hermitian", herm, "Hc - Hc^dagger is nonzero"))
    tr = abs(np.trace(hc))
    if tr > p.tol_spec:
        out.append(Violation("not_traceless", tr, "|Tr(Hc)| exceeds tol_spec"))
    resid = float(np.real(np.trace(hc @ hc))) - p.budget
    if abs(resid) > tol_budget * p.budget:
        out.append(Violation("budget_violated", resid, "Tr(Hc^2) - budget outside tol_budget"))
    return out


def hamiltonian_from_json(obj) -> np.ndarray:
    """Parse either ``{"pauli_terms": [...]}`` or the dense matrix form."""
    if not isinstance(obj, dict):
        raise SchemaError("Hamiltonian must be a JSON object")
    if "pauli_terms" in obj:
        try:
            terms = [PauliString(t["string"], float(t["coeff"])) for t in obj["pauli_terms"]]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad pauli term: {exc}") from None
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
        try:
            return build_pauli(terms)
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    return matcore.matrix_from_json(obj)


def budget_from_json(obj) -> float:
    has_b, has_a = "budget" in obj, "alpha" in obj
    if has_b == has_a:
        raise SchemaError("give exactly one of 'budget' or 'alpha'")
    try:
        if has_b:
            return float(obj["budget"])
        alpha = float(obj["alpha"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"budget/alpha must be numeric: {exc}") from None
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    return 1.0 / alpha


def problem_from_json(obj, tol_spec: float = TOL_SPEC) -> ControlProblem:
    if "h0" not in obj:
        raise SchemaError("problem needs an 'h0' Hamiltonian")
    return ControlProblem(hamiltonian_from_json(obj["h0"]), budget_from_json(obj), tol_spec=tol_spec)
