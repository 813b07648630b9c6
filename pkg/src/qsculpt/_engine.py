"""Vectorized sparse-state kernels on integer-encoded occupation keys.

Occupation tuples are packed into int64 keys with big-endian place values
(``base ** (n_rails - 1 - rail)``), so integer order equals lexicographic
order over occupation vectors and canonical forms are deterministic.  The
base must exceed every occupation that can appear; drivers pick
``photon_count + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .fock import Occupation

_KEY_LIMIT = 1 << 62


class KeyOverflowError(Exception):
    """Raised when base ** n_rails does not fit the int64 key space."""


def _place_values(n_rails: int, base: int) -> np.ndarray:
    if base < 2 or base**n_rails >= _KEY_LIMIT:
        raise KeyOverflowError(f"base {base} with {n_rails} rails overflows int64 keys")
    return (base ** np.arange(n_rails - 1, -1, -1)).astype(np.int64)


@dataclass
class ArrayState:
    """Sorted unique int64 keys with complex amplitudes."""

    keys: np.ndarray
    amps: np.ndarray
    n_rails: int
    base: int

    @property
    def place(self) -> np.ndarray:
        return _place_values(self.n_rails, self.base)

    def digit(self, rail: int) -> np.ndarray:
        return (self.keys // self.place[rail]) % self.base

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


def from_terms(terms: dict[Occupation, complex], n_rails: int, base: int) -> ArrayState:
    place = _place_values(n_rails, base)
    if not terms:
        return ArrayState(np.empty(0, np.int64), np.empty(0, np.complex128), n_rails, base)
    occs = np.array(list(terms.keys()), dtype=np.int64)
    if occs.max(initial=0) >= base:
        raise KeyOverflowError(f"occupation {occs.max()} >= base {base}")
    keys = occs @ place
    amps = np.array(list(terms.values()), dtype=np.complex128)
    order = np.argsort(keys, kind="stable")
    return ArrayState(keys[order], amps[order], n_rails, base)


def to_terms(state: ArrayState) -> dict[Occupation, complex]:
    place = state.place
    digits = (state.keys[:, None] // place[None, :]) % state.base
    return {
        tuple(int(x) for x in digits[i]): complex(state.amps[i])
        for i in range(len(state.keys))
    }


def canonical(keys: np.ndarray, amps: np.ndarray, state: ArrayState, cutoff: float) -> ArrayState:
    """Sort, merge duplicate keys, drop |amplitude| below cutoff."""
    if len(keys) == 0:
        return ArrayState(keys.astype(np.int64), amps.astype(np.complex128), state.n_rails, state.base)
    order = np.argsort(keys, kind="stable")
    ks, vs = keys[order], amps[order]
    starts = np.r_[0, np.flatnonzero(np.diff(ks)) + 1]
    uk = ks[starts]
    sums = np.add.reduceat(vs, starts)
    keep = np.abs(sums) > cutoff if cutoff > 0 else np.abs(sums) > 0
    return ArrayState(uk[keep], sums[keep], state.n_rails, state.base)


def apply_annihilation(
    state: ArrayState, terms: list[tuple[int, complex]], cutoff: float
) -> ArrayState:
    """Apply ``sum_r c_r a_r`` with bosonic sqrt factors."""
    place = state.place
    parts_k, parts_a = [], []
    for rail, coeff in terms:
        digit = state.digit(rail)
        mask = digit > 0
        parts_k.append(state.keys[mask] - place[rail])
        parts_a.append(state.amps[mask] * (coeff * np.sqrt(digit[mask])))
    if not parts_k:
        return canonical(np.empty(0, np.int64), np.empty(0, np.complex128), state, cutoff)
    return canonical(np.concatenate(parts_k), np.concatenate(parts_a), state, cutoff)


def apply_phase(state: ArrayState, rail: int, phase: complex) -> ArrayState:
    """Multiply each term by phase ** occupation(rail)."""
    return ArrayState(
        state.keys, state.amps * phase ** state.digit(rail), state.n_rails, state.base
    )


def _expand_pattern(matrix: np.ndarray, occ: tuple[int, ...]) -> list[tuple[tuple[int, ...], complex]]:
    """Images of |occ> under the transfer matrix on the gate's local rails.

    Expands ``prod_i (sum_j T[j,i] a†_j)^{n_i}`` and attaches the
    sqrt(out!/in!) normalization, so the returned coefficients map Fock
    amplitudes directly.
    """
    m = len(occ)
    poly: dict[tuple[int, ...], complex] = {(0,) * m: 1.0 + 0j}
    for i, n in enumerate(occ):
        if n == 0:
            continue
        col = {}
        for ks in product(range(n + 1), repeat=m):
            if sum(ks) != n:
                continue
            mult = math.factorial(n)
            coeff = 1.0 + 0j
            for j, k in enumerate(ks):
                mult //= math.factorial(k)
                coeff *= matrix[j, i] ** k
            col[ks] = mult * coeff
        nxt: dict[tuple[int, ...], complex] = {}
        for k1, c1 in poly.items():
            for k2, c2 in col.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                nxt[k] = nxt.get(k, 0j) + c1 * c2
        poly = nxt
    denom = math.prod(math.factorial(n) for n in occ)
    out = []
    for k, c in poly.items():
        num = math.prod(math.factorial(x) for x in k)
        out.append((k, c * math.sqrt(num / denom)))
    return out


def apply_transfer(
    state: ArrayState,
    rails: tuple[int, ...],
    matrix: np.ndarray,
    cutoff: float,
    cache: dict | None = None,
) -> ArrayState:
    """Exact Fock-space action of a linear-optical transfer matrix on `rails`.

    Terms are grouped by their local occupation pattern; each group expands
    through a cached multinomial table.
    """
    if len(state.keys) == 0:
        return state
    place = state.place
    local = np.stack([state.digit(r) for r in rails], axis=1)
    # Encode local patterns compactly for grouping.
    enc = np.zeros(len(state.keys), dtype=np.int64)
    for i in range(len(rails)):
        enc = enc * state.base + local[:, i]
    patterns, inverse = np.unique(enc, return_inverse=True)
    lp = place[list(rails)]
    parts_k, parts_a = [], []
    for p_idx in range(len(patterns)):
        sel = np.flatnonzero(inverse == p_idx)
        occ = tuple(int(x) for x in local[sel[0]])
        key = (id(matrix), occ) if cache is not None else None
        table = cache.get(key) if cache is not None else None
        if table is None:
            expansion = _expand_pattern(matrix, occ)
            deltas = np.array(
                [sum((k[i] - occ[i]) * int(lp[i]) for i in range(len(rails))) for k, _ in expansion],
                dtype=np.int64,
            )
            coeffs = np.array([c for _, c in expansion], dtype=np.complex128)
            table = (deltas, coeffs)
            if cache is not None:
                cache[key] = table
        deltas, coeffs = table
        parts_k.append((state.keys[sel][:, None] + deltas[None, :]).ravel())
        parts_a.append((state.amps[sel][:, None] * coeffs[None, :]).ravel())
    return canonical(np.concatenate(parts_k), np.concatenate(parts_a), state, cutoff)


def select_digit(state: ArrayState, rail: int, value: int) -> ArrayState:
    """Keep only terms whose occupation on `rail` equals `value`."""
    mask = state.digit(rail) == value
    return ArrayState(state.keys[mask], state.amps[mask], state.n_rails, state.base)
