"""Sculpting bigraphs: data model, built-in schemes, protocol, matchings.

A sculpting bigraph has N labelled circles (spatial modes) and unlabelled
dots; each dot is a set of weighted edges into distinct circles.  A dot acts
on a Fock state as a unit-normalized superposed single-boson subtraction:
edge weights are ``exp(i*pi*p/q)/sqrt(#edges)`` and the edge color selects the
internal mode that is subtracted (a computational level, or a tilde mode that
expands over all d levels of the circle).

Running the protocol means applying every dot, in order, to the even
``d``-boson-per-mode initial distribution.  For graphs whose colors are all
tilde-0 or tilde-(d-1), the same state is obtained by summing over the
(d-1)-to-one matchings between circles and dots; ``state_from_matchings`` is
that independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import _engine
from .fock import (
    ATOL,
    COMPUTATIONAL,
    FOURIER,
    PRUNE_TOL,
    ModeLayout,
    ModeSuperposition,
    SparseState,
    apply_superposition,
    fourier_matrix,
)


def pi_phase(fraction: Fraction) -> complex:
    """exp(i * pi * fraction), exact for the quarter-turn multiples."""
    f = Fraction(fraction) % 2
    if f == 0:
        return 1.0 + 0j
    if f == 1:
        return -1.0 + 0j
    if f == Fraction(1, 2):
        return 1j
    if f == Fraction(3, 2):
        return -1j
    return complex(math.cos(math.pi * float(f)), math.sin(math.pi * float(f)))


@dataclass(frozen=True)
class ColorLabel:
    """Internal-state edge label: a computational level or a tilde index."""

    basis: str
    index: int

    def __post_init__(self):
        if self.basis not in (COMPUTATIONAL, FOURIER):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.index < 0:
            raise ValueError(f"color index must be >= 0, got {self.index}")

    @classmethod
    def fourier(cls, index: int) -> "ColorLabel":
        return cls(FOURIER, index)

    @classmethod
    def computational(cls, index: int) -> "ColorLabel":
        return cls(COMPUTATIONAL, index)

    @property
    def is_fourier(self) -> bool:
        return self.basis == FOURIER


@dataclass(frozen=True)
class Edge:
    """Weighted edge of a dot: target circle, phase (multiple of pi), color."""

    mode: int
    phase: Fraction
    color: ColorLabel

    def __post_init__(self):
        if self.mode < 0:
            raise ValueError(f"spatial mode must be >= 0, got {self.mode}")
        object.__setattr__(self, "phase", Fraction(self.phase))

    def phase_factor(self) -> complex:
        return pi_phase(self.phase)


@dataclass(frozen=True)
class Dot:
    """One subtraction operator: a non-empty edge set over distinct circles."""

    edges: tuple[Edge, ...]

    def __post_init__(self):
        if not self.edges:
            raise ValueError("a dot must have at least one edge")
        modes = [e.mode for e in self.edges]
        if len(set(modes)) != len(modes):
            raise ValueError(f"dot edges must target distinct circles, got modes {modes}")

    @property
    def amplitude(self) -> float:
        """Common |weight| of this dot's edges (unit-normalized subtraction)."""
        return 1.0 / math.sqrt(len(self.edges))


@dataclass(frozen=True)
class SculptingBigraph:
    """N circles, internal dimension d, and an ordered dot list."""

    n: int
    d: int
    dots: tuple[Dot, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        object.__setattr__(self, "dots", tuple(self.dots))
        for dot in self.dots:
            for e in dot.edges:
                if e.mode >= self.n:
                    raise ValueError(f"edge mode {e.mode} out of range for n={self.n}")
                if e.color.index >= self.d:
                    raise ValueError(f"color index {e.color.index} out of range for d={self.d}")

    @property
    def is_standard(self) -> bool:
        """Standard protocol shape: (d-1)*n dots."""
        return len(self.dots) == (self.d - 1) * self.n

    def layout(self, ancilla_count: int = 0) -> ModeLayout:
        return ModeLayout(self.n, self.d, ancilla_count)


def _pair_dot(j: int, k: int, color: int, k_phase: Fraction) -> Dot:
    return Dot(
        (
            Edge(j, Fraction(0), ColorLabel.fourier(color)),
            Edge(k, k_phase, ColorLabel.fourier(color)),
        )
    )


def singlet_bigraph(n: int) -> SculptingBigraph:
    """Totally anti-symmetric scheme: per pair j<k, a (+,+) tilde-0 dot and a
    (+,-) tilde-(n-1) dot.  d is set to n."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dots = []
    for j in range(n):
        for k in range(j + 1, n):
            dots.append(_pair_dot(j, k, 0, Fraction(0)))
            dots.append(_pair_dot(j, k, n - 1, Fraction(1)))
    return SculptingBigraph(n, n, tuple(dots))


def dicke_bigraph(n: int) -> SculptingBigraph:
    """Totally symmetric scheme: both dots of each pair carry the minus sign."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dots = []
    for j in range(n):
        for k in range(j + 1, n):
            dots.append(_pair_dot(j, k, 0, Fraction(1)))
            dots.append(_pair_dot(j, k, n - 1, Fraction(1)))
    return SculptingBigraph(n, n, tuple(dots))


def symmetric_variant_bigraph(n: int) -> SculptingBigraph:
    """All-plus variant of the symmetric scheme (extra diagonal component)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dots = []
    for j in range(n):
        for k in range(j + 1, n):
            dots.append(_pair_dot(j, k, 0, Fraction(0)))
            dots.append(_pair_dot(j, k, n - 1, Fraction(0)))
    return SculptingBigraph(n, n, tuple(dots))


def initial_state(n: int, d: int, ancilla_count: int = 0) -> SparseState:
    """Even allocation: one boson in every (mode, level) rail, ancillas empty."""
    layout = ModeLayout(n, d, ancilla_count)
    occ = (1,) * layout.spatial_rails + (0,) * ancilla_count
    return SparseState(layout, {occ: 1.0 + 0j})


def dot_superposition(dot: Dot, layout: ModeLayout) -> ModeSuperposition:
    """Annihilation superposition of a dot on a layout.

    A computational-colored edge contributes its single rail; a tilde-colored
    edge expands over the d rails of its circle with DFT coefficients.
    """
    d = layout.internal_dim
    weight = dot.amplitude
    fmat = fourier_matrix(d)
    terms: list[tuple[int, complex]] = []
    for e in dot.edges:
        if e.color.index >= d:
            raise ValueError(f"color index {e.color.index} out of range for d={d}")
        w = weight * e.phase_factor()
        if e.color.is_fourier:
            row = fmat[e.color.index]
            for s in range(d):
                terms.append((layout.rail(e.mode, s), w * complex(row[s])))
        else:
            terms.append((layout.rail(e.mode, e.color.index), w))
    return ModeSuperposition(tuple(terms))


def apply_sculpting(
    graph: SculptingBigraph, state: SparseState, prune_tol: float = PRUNE_TOL
) -> SparseState:
    """Apply every dot of the graph, in listed order, as a subtraction.

    The output photon number drops by one per dot.
    """
    layout = state.layout
    if layout.spatial_count != graph.n or layout.internal_dim != graph.d:
        raise ValueError(
            f"state layout ({layout.spatial_count},{layout.internal_dim}) does not "
            f"match graph (n={graph.n}, d={graph.d})"
        )
    if state.is_zero():
        raise ValueError("cannot sculpt the zero state")
    photons = state.photon_count()
    if photons < len(graph.dots):
        raise ValueError(f"{photons} photons cannot absorb {len(graph.dots)} subtractions")
    if not graph.dots:
        return SparseState(layout, dict(state.terms))

    sups = [dot_superposition(dot, layout) for dot in graph.dots]
    base = max(max(occ) for occ in state.terms) + 1
    try:
        arr = _engine.from_terms(state.terms, layout.total_rails, base)
        for sup in sups:
            arr = _engine.apply_annihilation(arr, list(sup.terms), prune_tol)
        return SparseState(layout, _engine.to_terms(arr))
    except _engine.KeyOverflowError:
        out = state
        for sup in sups:
            out = apply_superposition(out, sup, prune_tol=prune_tol)
        return out


@dataclass(frozen=True)
class Matching:
    """One (d-1)-to-one assignment: per dot the (circle, edge index) chosen.

    ``tally[j]`` counts, per circle, how many chosen edges carry each color
    class (tilde-0 count, tilde-(d-1) count).
    """

    assignment: tuple[tuple[int, int], ...]
    tally: tuple[tuple[int, int], ...]


def enumerate_matchings(graph: SculptingBigraph) -> list[Matching]:
    """All one-edge-per-dot assignments giving every circle exactly d-1 picks.

    Depth-first over dots in order with remaining-capacity pruning; the result
    order is deterministic (lexicographic in edge choices).
    """
    quota = graph.d - 1
    remaining_dots = len(graph.dots)
    capacity = [quota] * graph.n
    chosen: list[tuple[int, int]] = []
    out: list[Matching] = []

    def feasible_tail(i: int) -> bool:
        # Each circle must still be reachable by enough of the unassigned dots.
        need = sum(capacity)
        return need <= remaining_dots - i

    def walk(i: int) -> None:
        if i == len(graph.dots):
            if all(c == 0 for c in capacity):
                tally = _matching_tally(graph, chosen)
                out.append(Matching(tuple(chosen), tally))
            return
        if not feasible_tail(i):
            return
        for e_idx, edge in enumerate(graph.dots[i].edges):
            if capacity[edge.mode] == 0:
                continue
            capacity[edge.mode] -= 1
            chosen.append((edge.mode, e_idx))
            walk(i + 1)
            chosen.pop()
            capacity[edge.mode] += 1

    walk(0)
    return out


def _matching_tally(
    graph: SculptingBigraph, chosen: list[tuple[int, int]]
) -> tuple[tuple[int, int], ...]:
    zeros = [0] * graph.n
    tops = [0] * graph.n
    for dot, (mode, e_idx) in zip(graph.dots, chosen):
        color = dot.edges[e_idx].color
        if color.is_fourier and color.index == 0:
            zeros[mode] += 1
        elif color.is_fourier and color.index == graph.d - 1:
            tops[mode] += 1
    return tuple(zip(zeros, tops))


def _check_matching_colors(graph: SculptingBigraph) -> None:
    for dot in graph.dots:
        for e in dot.edges:
            if not e.color.is_fourier or e.color.index not in (0, graph.d - 1):
                raise ValueError(
                    "matching evaluation requires every edge color to be tilde-0 "
                    f"or tilde-{graph.d - 1}; found {e.color}"
                )


def state_from_matchings(graph: SculptingBigraph, prune_tol: float = PRUNE_TOL) -> SparseState:
    """Independent protocol route: weighted sum over (d-1)-to-one matchings.

    Each matching contributes the product of its edge weights times, per
    circle, the closed-form subtraction factor
    ``(-1)^(d-1-l) * l! (d-1-l)! / sqrt(d)^(d-2)`` (l = tilde-0 picks on that
    circle), and leaves one boson in tilde mode ``d-1-l`` of the circle.
    """
    _check_matching_colors(graph)
    n, d = graph.n, graph.d
    layout = graph.layout()
    fmat = fourier_matrix(d)
    creation_rows = fmat.conj()  # creation coefficients of the tilde modes
    out: dict[tuple[int, ...], complex] = {}
    for matching in enumerate_matchings(graph):
        amp = 1.0 + 0j
        for dot, (_, e_idx) in zip(graph.dots, matching.assignment):
            edge = dot.edges[e_idx]
            amp *= dot.amplitude * edge.phase_factor()
        survivors = []
        for j in range(n):
            l, top = matching.tally[j]
            amp *= (-1) ** (d - 1 - l) * math.factorial(l) * math.factorial(d - 1 - l)
            amp /= math.sqrt(d) ** (d - 2)
            survivors.append(d - 1 - l)
        # Expand the product of single tilde creations into rail occupations.
        for levels in product(range(d), repeat=n):
            coeff = amp
            for j, s in enumerate(levels):
                coeff *= creation_rows[survivors[j], s]
            occ = [0] * layout.total_rails
            for j, s in enumerate(levels):
                occ[layout.rail(j, s)] = 1
            key = tuple(occ)
            out[key] = out.get(key, 0j) + coeff
    return SparseState(layout, {k: v for k, v in out.items() if abs(v) >= prune_tol})


def swap_spatial(state: SparseState, j: int, k: int) -> SparseState:
    """Exchange the occupation blocks of spatial modes j and k."""
    layout = state.layout
    if j == k:
        raise ValueError("swap requires two distinct modes")
    for m in (j, k):
        if not 0 <= m < layout.spatial_count:
            raise ValueError(f"spatial mode {m} out of range 0..{layout.spatial_count - 1}")
    d = layout.internal_dim
    a, b = j * d, k * d
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        lst = list(occ)
        lst[a : a + d], lst[b : b + d] = occ[b : b + d], occ[a : a + d]
        out[tuple(lst)] = amp
    return SparseState(layout, out)
