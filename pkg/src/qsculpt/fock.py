"""Sparse second-quantized state algebra over a fixed rail layout.

A *rail* is one bosonic mode.  Rails are laid out as N spatial modes times d
internal levels (rail ``j*d + s`` for spatial mode ``j`` and internal level
``s``), followed by any ancilla rails.  States are sparse maps from occupation
tuples to complex amplitudes; all operations return fresh states.

The internal Fourier ("tilde") basis uses ``omega = exp(2*pi*i/d)`` with
annihilation operators transforming as ``a~_l = (1/sqrt d) sum_s omega^{l s} a_s``
and creation operators carrying the conjugated coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Default tolerances: amplitudes below PRUNE_TOL are dropped from sparse maps;
# ATOL is the comparison tolerance used by verification-style checks.
PRUNE_TOL = 1e-12
ATOL = 1e-9

COMPUTATIONAL = "computational"
FOURIER = "fourier"

Occupation = tuple[int, ...]


@dataclass(frozen=True)
class ModeLayout:
    """Rail layout: ``spatial_count * internal_dim`` mode rails plus ancillas.

    Spatial/internal rails come first (mode-major), ancilla rails last.
    """

    spatial_count: int
    internal_dim: int
    ancilla_count: int = 0

    def __post_init__(self):
        if self.spatial_count < 1:
            raise ValueError(f"spatial_count must be >= 1, got {self.spatial_count}")
        if self.internal_dim < 2:
            raise ValueError(f"internal_dim must be >= 2, got {self.internal_dim}")
        if self.ancilla_count < 0:
            raise ValueError(f"ancilla_count must be >= 0, got {self.ancilla_count}")

    @property
    def total_rails(self) -> int:
        return self.spatial_count * self.internal_dim + self.ancilla_count

    @property
    def spatial_rails(self) -> int:
        return self.spatial_count * self.internal_dim

    def rail(self, mode: int, level: int) -> int:
        if not 0 <= mode < self.spatial_count:
            raise ValueError(f"spatial mode {mode} out of range 0..{self.spatial_count - 1}")
        if not 0 <= level < self.internal_dim:
            raise ValueError(f"internal level {level} out of range 0..{self.internal_dim - 1}")
        return mode * self.internal_dim + level

    def ancilla_rail(self, index: int) -> int:
        if not 0 <= index < self.ancilla_count:
            raise ValueError(f"ancilla index {index} out of range 0..{self.ancilla_count - 1}")
        return self.spatial_rails + index

    def split(self, rail: int) -> tuple[str, int, int]:
        """Inverse of rail()/ancilla_rail(): ('spatial', j, s) or ('ancilla', i, 0)."""
        if not 0 <= rail < self.total_rails:
            raise ValueError(f"rail {rail} out of range 0..{self.total_rails - 1}")
        if rail < self.spatial_rails:
            return ("spatial", rail // self.internal_dim, rail % self.internal_dim)
        return ("ancilla", rail - self.spatial_rails, 0)


@dataclass(frozen=True)
class ModeSuperposition:
    """A superposed single-boson operator ``sum_r c_r a_r`` (or its adjoint).

    Rail indices must be distinct within one superposition.
    """

    terms: tuple[tuple[int, complex], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("superposition must have at least one term")
        rails = [r for r, _ in self.terms]
        if len(set(rails)) != len(rails):
            raise ValueError(f"superposition rails must be distinct, got {rails}")

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for _, c in self.terms))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) < ATOL


@dataclass
class SparseState:
    """Sparse Fock state: occupation tuple -> complex amplitude.

    Treated as immutable: every operation returns a fresh state.  The zero
    state is the empty map.  All stored basis states share one photon number
    (operators applied here preserve that homogeneity).
    """

    layout: ModeLayout
    terms: dict[Occupation, complex] = field(default_factory=dict)

    @classmethod
    def from_terms(cls, layout: ModeLayout, terms: dict[Occupation, complex]) -> "SparseState":
        """Validating constructor for externally supplied term maps."""
        n_rails = layout.total_rails
        counts = set()
        for occ in terms:
            if len(occ) != n_rails:
                raise ValueError(f"occupation {occ} does not match {n_rails} rails")
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            counts.add(sum(occ))
        if len(counts) > 1:
            raise ValueError(f"mixed photon numbers {sorted(counts)} in one state")
        return cls(layout, dict(terms))

    def is_zero(self) -> bool:
        return not self.terms

    def photon_count(self) -> int | None:
        """Shared photon number of all terms, or None for the zero state."""
        for occ in self.terms:
            return sum(occ)
        return None

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, occ: Occupation) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def sorted_terms(self) -> list[tuple[Occupation, complex]]:
        """Terms in lexicographic occupation order (deterministic reports)."""
        return sorted(self.terms.items())

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)


def vacuum(layout: ModeLayout) -> SparseState:
    """All-rails-empty state with amplitude 1."""
    return SparseState(layout, {(0,) * layout.total_rails: 1.0 + 0j})


def zero_state(layout: ModeLayout) -> SparseState:
    return SparseState(layout, {})


def _check_rail(state: SparseState, rail: int) -> None:
    if not 0 <= rail < state.layout.total_rails:
        raise ValueError(f"rail {rail} out of range 0..{state.layout.total_rails - 1}")


def create(state: SparseState, rail: int) -> SparseState:
    """Apply a†_rail: occupation n -> n+1 with bosonic factor sqrt(n+1)."""
    _check_rail(state, rail)
    out: dict[Occupation, complex] = {}
    for occ, amp in state.terms.items():
        n = occ[rail]
        new = occ[:rail] + (n + 1,) + occ[rail + 1 :]
        out[new] = out.get(new, 0j) + amp * math.sqrt(n + 1)
    return SparseState(state.layout, out)


def annihilate(state: SparseState, rail: int) -> SparseState:
    """Apply a_rail: occupation n -> n-1 with factor sqrt(n); n=0 terms vanish."""
    _check_rail(state, rail)
    out: dict[Occupation, complex] = {}
    for occ, amp in state.terms.items():
        n = occ[rail]
        if n == 0:
            continue
        new = occ[:rail] + (n - 1,) + occ[rail + 1 :]
        out[new] = out.get(new, 0j) + amp * math.sqrt(n)
    return SparseState(state.layout, out)


def apply_superposition(
    state: SparseState,
    sup: ModeSuperposition,
    adjoint: bool = False,
    prune_tol: float = PRUNE_TOL,
) -> SparseState:
    """Apply ``sum_r c_r a_r`` (or ``sum_r c_r* a†_r`` when adjoint) term-wise.

    The result is pruned at ``prune_tol``.
    """
    out: dict[Occupation, complex] = {}
    for rail, coeff in sup.terms:
        _check_rail(state, rail)
        c = coeff.conjugate() if adjoint else coeff
        for occ, amp in state.terms.items():
            n = occ[rail]
            if adjoint:
                new = occ[:rail] + (n + 1,) + occ[rail + 1 :]
                out[new] = out.get(new, 0j) + amp * c * math.sqrt(n + 1)
            else:
                if n == 0:
                    continue
                new = occ[:rail] + (n - 1,) + occ[rail + 1 :]
                out[new] = out.get(new, 0j) + amp * c * math.sqrt(n)
    return prune(SparseState(state.layout, out), prune_tol)


def fourier_matrix(d: int) -> np.ndarray:
    """d x d unitary with entries omega^{l s}/sqrt(d), omega = exp(2 pi i/d).

    Row l gives the annihilation-side coefficients of the tilde mode l; the
    same matrix re-expresses single-particle amplitudes from the computational
    to the tilde basis.
    """
    idx = np.arange(d)
    return np.exp(2j * np.pi * np.outer(idx, idx) / d) / math.sqrt(d)


def tilde_superposition(layout: ModeLayout, mode: int, index: int) -> ModeSuperposition:
    """Tilde-basis annihilation mode a~_index on one spatial mode.

    Coefficients are ``omega^{index * s}/sqrt(d)`` on rails (mode, s); apply
    with ``adjoint=True`` for the corresponding creation operator.
    """
    d = layout.internal_dim
    if not 0 <= index < d:
        raise ValueError(f"fourier index {index} out of range 0..{d - 1}")
    row = fourier_matrix(d)[index]
    return ModeSuperposition(
        tuple((layout.rail(mode, s), complex(row[s])) for s in range(d))
    )


def inner(a: SparseState, b: SparseState) -> complex:
    """<a|b> = sum conj(amp_a) * amp_b over shared basis states."""
    if a.layout != b.layout:
        raise ValueError(f"layout mismatch: {a.layout} vs {b.layout}")
    if len(b.terms) < len(a.terms):
        return inner(b, a).conjugate()
    return sum(amp.conjugate() * b.terms[occ] for occ, amp in a.terms.items() if occ in b.terms)


def prune(state: SparseState, tol: float = PRUNE_TOL) -> SparseState:
    if tol < 0:
        raise ValueError(f"prune tolerance must be >= 0, got {tol}")
    return SparseState(
        state.layout, {occ: a for occ, a in state.terms.items() if abs(a) >= tol}
    )


def normalize(state: SparseState) -> tuple[SparseState, float]:
    """Unit-norm copy plus the original norm.  Raises on the zero state."""
    n = state.norm()
    if n == 0.0:
        raise ValueError("cannot normalize the zero state")
    return SparseState(state.layout, {occ: a / n for occ, a in state.terms.items()}), n


def states_close(a: SparseState, b: SparseState, tol: float = ATOL) -> bool:
    """Term-by-term amplitude agreement within tol."""
    if a.layout != b.layout:
        return False
    for occ in a.terms.keys() | b.terms.keys():
        if abs(a.terms.get(occ, 0j) - b.terms.get(occ, 0j)) > tol:
            return False
    return True
