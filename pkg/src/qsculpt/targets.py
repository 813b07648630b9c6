"""Reference qudit states, extraction from Fock states, phase-free comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .fock import ATOL, COMPUTATIONAL, FOURIER, SparseState, fourier_matrix


class ExtractionError(ValueError):
    """Raised when too much state weight sits outside the one-boson-per-mode sector."""

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"residual weight {residual:.3e} outside the one-boson-per-mode sector "
            f"exceeds tolerance {tol:.3e}"
        )


@dataclass
class QuditState:
    """Dense N-qudit state: amplitudes over {0..d-1}^N in lexicographic order.

    ``label_basis`` records how internal rail indices were read (computational
    or fourier labels).
    """

    n: int
    d: int
    amplitudes: np.ndarray
    label_basis: str = FOURIER

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.amplitudes.shape != (self.d**self.n,):
            raise ValueError(
                f"expected {self.d ** self.n} amplitudes, got {self.amplitudes.shape}"
            )
        if not np.all(np.isfinite(self.amplitudes.view(np.float64))):
            raise ValueError("amplitudes must be finite")

    def index(self, digits: tuple[int, ...]) -> int:
        if len(digits) != self.n or any(not 0 <= x < self.d for x in digits):
            raise ValueError(f"bad digit string {digits} for n={self.n}, d={self.d}")
        idx = 0
        for x in digits:
            idx = idx * self.d + x
        return idx

    def amplitude(self, digits: tuple[int, ...]) -> complex:
        return complex(self.amplitudes[self.index(digits)])

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuditState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return QuditState(self.n, self.d, self.amplitudes / nrm, self.label_basis)

    def inner(self, other: "QuditState") -> complex:
        self._check_shape(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "QuditState") -> float:
        """|<a|b>|^2 on the normalized pair."""
        self._check_shape(other)
        denom = self.norm() * other.norm()
        if denom == 0.0:
            raise ValueError("fidelity undefined for the zero state")
        return float(abs(self.inner(other)) ** 2 / denom**2)

    def _check_shape(self, other: "QuditState") -> None:
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError(
                f"dimension mismatch: ({self.n},{self.d}) vs ({other.n},{other.d})"
            )


def singlet_state(n: int) -> QuditState:
    """Totally anti-symmetric n-qudit state: sgn(sigma)/sqrt(n!) per permutation."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    amps = np.zeros(n**n, dtype=np.complex128)
    norm = 1.0 / math.sqrt(math.factorial(n))
    for sigma in permutations(range(n)):
        idx = 0
        for x in sigma:
            idx = idx * n + x
        amps[idx] = _parity(sigma) * norm
    return QuditState(n, n, amps)


def dicke_1n_state(n: int) -> QuditState:
    """Equal superposition of all permutations of (0,..,n-1)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    amps = np.zeros(n**n, dtype=np.complex128)
    norm = 1.0 / math.sqrt(math.factorial(n))
    for sigma in permutations(range(n)):
        idx = 0
        for x in sigma:
            idx = idx * n + x
        amps[idx] = norm
    return QuditState(n, n, amps)


def d33_reference() -> QuditState:
    """Three-qutrit reference: six permutation terms plus a double-weight |111>."""
    amps = np.zeros(27, dtype=np.complex128)
    for sigma in permutations(range(3)):
        amps[9 * sigma[0] + 3 * sigma[1] + sigma[2]] = 1.0
    amps[9 + 3 + 1] = 2.0
    return QuditState(3, 3, amps / np.linalg.norm(amps))


def _parity(sigma: tuple[int, ...]) -> int:
    inversions = sum(
        1 for i in range(len(sigma)) for j in range(i + 1, len(sigma)) if sigma[i] > sigma[j]
    )
    return -1 if inversions % 2 else 1


def extract_qudits(
    state: SparseState, read_basis: str = FOURIER, tol: float = ATOL
) -> tuple[QuditState, float]:
    """Read one-boson-per-mode Fock terms as an N-qudit state.

    Returns the (unnormalized) qudit state and the squared norm of the
    residual, i.e. of every term that is bunched, leaves a mode empty, or
    occupies an ancilla rail.  Raises ExtractionError when the residual
    exceeds ``tol`` (pass ``math.inf`` to always get the decomposition).

    With ``read_basis == "fourier"`` the per-qudit amplitudes are re-expressed
    in the tilde basis via the collective DFT.
    """
    if read_basis not in (COMPUTATIONAL, FOURIER):
        raise ValueError(f"unknown read basis {read_basis!r}")
    layout = state.layout
    if state.is_zero():
        raise ValueError("cannot extract qudits from the zero state")
    n, d = layout.spatial_count, layout.internal_dim
    if state.photon_count() != n:
        raise ValueError(
            f"extraction needs exactly {n} photons, state has {state.photon_count()}"
        )
    amps = np.zeros((d,) * n, dtype=np.complex128)
    residual = 0.0
    for occ, amp in state.terms.items():
        if any(occ[layout.spatial_rails + i] for i in range(layout.ancilla_count)):
            residual += abs(amp) ** 2
            continue
        digits = []
        for j in range(n):
            block = occ[j * d : (j + 1) * d]
            if sum(block) != 1:
                digits = None
                break
            digits.append(block.index(1))
        if digits is None:
            residual += abs(amp) ** 2
        else:
            amps[tuple(digits)] += amp
    if residual > tol:
        raise ExtractionError(residual, tol)
    if read_basis == FOURIER:
        fmat = fourier_matrix(d)
        for axis in range(n):
            amps = np.moveaxis(np.tensordot(fmat, amps, axes=([1], [axis])), 0, axis)
    return QuditState(n, d, amps.reshape(-1), read_basis), residual


@dataclass(frozen=True)
class PhaseMatch:
    """Result of a global-phase-free comparison."""

    equal: bool
    phase: float | None
    fidelity: float


def equal_up_to_phase(a: QuditState, b: QuditState, tol: float = ATOL) -> PhaseMatch:
    """Whether ``a = exp(i*theta) * b`` within tol, and the recovered theta.

    The reference component is b's largest-magnitude amplitude (ties broken by
    lexicographic basis order); fidelity |<a|b>|^2 is reported either way.
    """
    a._check_shape(b)
    fid = a.fidelity(b)
    ref = int(np.argmax(np.abs(b.amplitudes)))
    if abs(b.amplitudes[ref]) == 0.0:
        raise ValueError("comparison against the zero state")
    if abs(a.amplitudes[ref]) < tol * abs(b.amplitudes[ref]):
        return PhaseMatch(False, None, fid)
    theta = float(np.angle(a.amplitudes[ref] / b.amplitudes[ref]))
    dev = float(np.max(np.abs(a.amplitudes - np.exp(1j * theta) * b.amplitudes)))
    return PhaseMatch(dev <= tol, theta, fid)


def collective_unitary(state: QuditState, unitary: np.ndarray) -> QuditState:
    """Apply U^(tensor N) for one d x d unitary U."""
    u = np.asarray(unitary, dtype=np.complex128)
    if u.shape != (state.d, state.d):
        raise ValueError(f"expected a {state.d}x{state.d} matrix, got {u.shape}")
    if np.max(np.abs(u @ u.conj().T - np.eye(state.d))) > 1e-10:
        raise ValueError("matrix is not unitary within 1e-10")
    amps = state.tensor()
    for axis in range(state.n):
        amps = np.moveaxis(np.tensordot(u, amps, axes=([1], [axis])), 0, axis)
    return QuditState(state.n, state.d, amps.reshape(-1), state.label_basis)
