"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. This module
provides the Hilbert-Schmidt product, Hermitian/unitary predicates, spectral
decompositions, the propagator ``exp(-itH)`` and traceless logarithms of
special-unitary matrices (principal branch plus enumerated alternatives).

Unitary matrices are diagonalised through the complex Schur form: for a normal
matrix the triangular factor is diagonal up to rounding, and the Schur vectors
are unitary even when eigenvalues are degenerate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spl

from .errors import SchemaError, ValidationError

TOL_SPEC = 1e-9
TOL_BRANCH = 1e-6

# Upper bound on the number of shift vectors enumerate_log_branches will visit.
MAX_BRANCH_CANDIDATES = 2_000_000


def as_matrix(a, name="matrix") -> np.ndarray:
    """Return ``a`` as a square complex128 array, raising on bad shapes."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hilbert_schmidt(a, b) -> complex:
    """Tr(A^dagger B)."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hermitian_defect(a) -> float:
    a = as_matrix(a)
    return float(np.linalg.norm(a - dagger(a)))


def is_hermitian(a, tol: float = TOL_SPEC) -> bool:
    return hermitian_defect(a) <= tol


def is_unitary(a, tol: float = TOL_SPEC) -> bool:
    a = as_matrix(a)
    return float(np.linalg.norm(dagger(a) @ a - np.eye(a.shape[0]))) <= tol


def is_special_unitary(a, tol: float = TOL_SPEC) -> bool:
    a = as_matrix(a)
    return is_unitary(a, tol) and abs(np.linalg.det(a) - 1.0) <= tol


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def anti_hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a - dagger(a))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and a unitary matrix whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def eigh_decomposition(h, tol: float = TOL_SPEC) -> SpectralDecomposition:
    h = as_matrix(h, "H")
    if not is_hermitian(h, tol):
        raise ValidationError(f"matrix is not Hermitian (defect {hermitian_defect(h):.3e})")
    w, v = np.linalg.eigh(hermitize(h))
    return SpectralDecomposition(w, v)


def unitary_decomposition(o, tol: float = TOL_SPEC) -> SpectralDecomposition:
    """Diagonalise a unitary matrix via its complex Schur form."""
    o = as_matrix(o, "O")
    if not is_unitary(o, tol):
        raise ValidationError("matrix is not unitary")
    t, z = spl.schur(o, output="complex")
    lam = np.diag(t).copy()
    return SpectralDecomposition(lam / np.abs(lam), z)


def expm_hermitian_generator(h, t: float, tol: float = TOL_SPEC) -> np.ndarray:
    """exp(-i t H) for Hermitian H, via the eigendecomposition of H."""
    dec = eigh_decomposition(h, tol)
    v = dec.eigenvectors
    return (v * np.exp(-1j * t * dec.eigenvalues)) @ dagger(v)


@dataclass(frozen=True)
class LogBranch:
    """A traceless anti-Hermitian logarithm of a special-unitary matrix.

    ``phases`` are the eigenphases of ``matrix`` (so ``matrix`` has
    eigenvalues ``1j * phases`` on the columns of ``eigenvectors``), and
    ``branch_offsets`` the integer shifts, in units of 2*pi, relative to the
    principal eigenphases in (-pi, pi].
    """

    matrix: np.ndarray
    phases: np.ndarray
    eigenvectors: np.ndarray
    branch_offsets: tuple
    phase_sum_check: float
    near_branch_cut: bool = False
    warnings: tuple = field(default=())


def _principal_phases(o, tol):
    dec = unitary_decomposition(o, tol)
    theta = np.angle(dec.eigenvalues)
    # np.angle maps -1-0j to -pi; the principal interval is (-pi, pi].
    theta = np.where(theta <= -np.pi, theta + 2 * np.pi, theta)
    return theta, dec.eigenvectors


def _check_special_unitary(o, tol):
    o = as_matrix(o, "O")
    if not is_unitary(o, tol):
        raise ValidationError("target is not unitary")
    det = np.linalg.det(o)
    if abs(det - 1.0) > tol:
        raise ValidationError(f"target is not special unitary (det = {det:.12g})")
    return o


def _make_branch(o, theta0, vecs, offsets, tol, tol_branch) -> LogBranch:
    phases = theta0 + 2 * np.pi * np.asarray(offsets, dtype=float)
    mat = anti_hermitize((vecs * (1j * phases)) @ dagger(vecs))
    phase_sum = float(np.sum(phases))
    near_cut = bool(np.any(np.abs(np.abs(theta0) - np.pi) <= tol_branch))
    warn = ("eigenphase within tol_branch of pi: branch choice is ill-conditioned",) if near_cut else ()
    return LogBranch(
        matrix=mat,
        phases=phases,
        eigenvectors=vecs,
        branch_offsets=tuple(int(k) for k in offsets),
        phase_sum_check=phase_sum,
        near_branch_cut=near_cut,
        warnings=warn,
    )


def _traceless_correction(theta):
    """Offsets that bring sum(theta) = 2*pi*m back to zero.

    Shifts the |m| eigenphases closest to the cut; stable sorting breaks ties by
    ascending index.
    """
    m = int(round(np.sum(theta) / (2 * np.pi)))
    offsets = np.zeros(len(theta), dtype=int)
    if m > 0:
        idx = np.argsort(-theta, kind="stable")[:m]
        offsets[idx] = -1
    elif m < 0:
        idx = np.argsort(theta, kind="stable")[:-m]
        offsets[idx] = 1
    return offsets


def logm_special_unitary(o, tol: float = TOL_SPEC, tol_branch: float = TOL_BRANCH) -> LogBranch:
    """Principal traceless logarithm of a special-unitary matrix.

    Examples
    --------
    >>> import numpy as np
    >>> L = logm_special_unitary(np.array([[0, -1], [1, 0]]))
    >>> np.round(L.matrix.real / (np.pi / 2), 12) + 0.0
    array([[ 0., -1.],
           [ 1.,  0.]])
    """
    o = _check_special_unitary(o, tol)
    theta, vecs = _principal_phases(o, tol)
    return _make_branch(o, theta, vecs, _traceless_correction(theta), tol, tol_branch)


def enumerate_log_branches(o, max_shift: int, tol: float = TOL_SPEC,
                           tol_branch: float = TOL_BRANCH) -> list[LogBranch]:
    """All traceless logarithms within ``max_shift`` 2*pi-shifts of the principal one.

    Shifts are counted per eigenphase relative to the principal traceless
    branch, so ``max_shift=0`` returns exactly ``[logm_special_unitary(o)]``.
    With degenerate eigenvalues the result depends on the eigenbasis chosen
    inside each eigenspace; every returned matrix is nevertheless a valid
    logarithm.
    """
    if max_shift < 0:
        raise ValueError("max_shift must be >= 0")
    o = _check_special_unitary(o, tol)
    theta, vecs = _principal_phases(o, tol)
    base = _traceless_correction(theta)
    n = len(theta)
    span = 2 * max_shift + 1
    if span ** (n - 1) > MAX_BRANCH_CANDIDATES:
        raise ValueError(f"too many branch candidates for N={n}, max_shift={max_shift}")

    branches = []
    seen = set()
    for head in itertools.product(range(-max_shift, max_shift + 1), repeat=n - 1):
        last = -sum(head)
        if abs(last) > max_shift:
            continue
        offsets = base + np.array(head + (last,), dtype=int)
        key = tuple(np.round(theta + 2 * np.pi * offsets, 9))
        if key in seen:
            continue
        seen.add(key)
        branches.append(_make_branch(o, theta, vecs, offsets, tol, tol_branch))
    return branches


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim": N, "entries": [[[re, im], ...], ...]}`` (row-major)."""
    try:
        dim = obj["dim"]
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"matrix object needs 'dim' and 'entries': {exc}") from None
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError(f"'dim' must be a positive integer, got {dim!r}")
    if len(entries) != dim or any(len(row) != dim for row in entries):
        raise SchemaError(f"'entries' must be {dim}x{dim}")
    out = np.empty((dim, dim), dtype=np.complex128)
    for i, row in enumerate(entries):
        for j, z in enumerate(row):
            if not (isinstance(z, (list, tuple)) and len(z) == 2):
                raise SchemaError(f"entry [{i}][{j}] must be a [re, im] pair")
            re, im = (float(x) for x in z)
            if not (math.isfinite(re) and math.isfinite(im)):
                raise SchemaError(f"entry [{i}][{j}] is not finite")
            out[i, j] = complex(re, im)
    return out
