"""Finite fields and mutually orthogonal Latin squares.

Field elements of GF(p^m) are encoded as integers ``sum(c_i * p**i)`` where
``c_i`` are the polynomial coefficients. For m > 1 the modulus is the
lexicographically smallest monic irreducible polynomial of degree m, i.e. the
one whose lower coefficients ``(c_{m-1}, ..., c_0)`` compare smallest.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from itertools import product

import numpy as np

from .errors import InvalidMols, NoMolsExists, NotPrimePower, UnsupportedOrder

__all__ = [
    "FiniteField",
    "LatinSquare",
    "MolsPair",
    "gf_construct",
    "mols_from_field",
    "macneish_product",
    "mols_pair",
    "verify_latin",
    "verify_mols",
    "literature_order3_pair",
    "prime_power",
    "factorize",
]


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, m)`` with ``q == p**m`` or None."""
    if q < 2:
        return None
    f = factorize(q)
    if len(f) != 1:
        return None
    ((p, m),) = f.items()
    return p, m


# polynomials over GF(p) as coefficient lists, lowest degree first


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim(list(a))
    b = _poly_trim(list(b))
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b):
        coef = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bc) % p
        _poly_trim(a)
    return a


def _digits(x: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(x % p)
        x //= p
    return out


def _is_irreducible(f: list[int], p: int) -> bool:
    m = len(f) - 1
    for deg in range(1, m // 2 + 1):
        for low in range(p**deg):
            g = _digits(low, p, deg) + [1]
            if not _poly_mod(f, g, p):
                return False
    return True


def _smallest_irreducible(p: int, m: int) -> list[int]:
    # iterate lower coefficients in lexicographic order (c_{m-1}, ..., c_0)
    for low in range(p**m):
        f = _digits(low, p, m) + [1]
        if f[0] != 0 and _is_irreducible(f, p):
            return f
    raise AssertionError(f"no irreducible polynomial of degree {m} over GF({p})")


@dataclass(frozen=True)
class FiniteField:
    p: int
    m: int
    modulus: tuple[int, ...]
    add: np.ndarray
    mul: np.ndarray

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def order(self) -> int:
        return self.q

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(np.flatnonzero(self.mul[a] == 1)[0])

    def check_axioms(self) -> bool:
        """Exhaustive field-axiom check; cubic in q, intended for q <= 16."""
        q, add, mul = self.q, self.add, self.mul
        idx = np.arange(q)
        if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
            return False
        if not (np.array_equal(add[0], idx) and np.array_equal(mul[1], idx)):
            return False
        for a in range(q):
            if not np.array_equal(add[add[a]], add[a][add]) or not np.array_equal(mul[mul[a]], mul[a][mul]):
                return False
            # a * (b + c) == a*b + a*c for all b, c
            if not np.array_equal(mul[a][add], add[mul[a][:, None], mul[a][None, :]]):
                return False
            if 0 not in add[a]:
                return False
            if a and 1 not in mul[a]:
                return False
        return True


def gf_construct(q: int) -> FiniteField:
    """Addition and multiplication tables of GF(q)."""
    pm = prime_power(q)
    if pm is None:
        raise NotPrimePower(f"{q} is not a prime power")
    p, m = pm
    if m == 1:
        idx = np.arange(p)
        return FiniteField(p, 1, (0, 1), (idx[:, None] + idx) % p, (idx[:, None] * idx) % p)
    f = _smallest_irreducible(p, m)
    digits = np.array([_digits(x, p, m) for x in range(q)])
    weights = p ** np.arange(m)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    mul = np.zeros((q, q), dtype=int)
    for a in range(q):
        for b in range(a, q):
            prod_ = [0] * (2 * m - 1)
            for i, ai in enumerate(digits[a]):
                for k, bk in enumerate(digits[b]):
                    prod_[i + k] = (prod_[i + k] + ai * bk) % p
            r = _poly_mod(prod_, f, p)
            val = sum(c * p**i for i, c in enumerate(r))
            mul[a, b] = mul[b, a] = val
    return FiniteField(p, m, tuple(f), add.astype(int), mul)


@dataclass(frozen=True, eq=False)
class LatinSquare:
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=int)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"Latin square cells must be a square array, got shape {cells.shape}")
        object.__setattr__(self, "cells", cells)

    @property
    def order(self) -> int:
        return self.cells.shape[0]

    def __eq__(self, other):
        return isinstance(other, LatinSquare) and np.array_equal(self.cells, other.cells)

    def to_dict(self) -> dict:
        return {"order": self.order, "cells": self.cells.tolist()}


@dataclass(frozen=True)
class MolsPair:
    first: LatinSquare
    second: LatinSquare

    def __post_init__(self):
        if self.first.order != self.second.order:
            raise ValueError("squares in a pair must have equal order")

    @property
    def order(self) -> int:
        return self.first.order

    def to_dict(self) -> dict:
        return {"first": self.first.to_dict(), "second": self.second.to_dict()}


def verify_latin(sq: LatinSquare) -> tuple[bool, str | None]:
    d = sq.order
    cells = sq.cells
    symbols = set(range(d))
    for i in range(d):
        if set(cells[i].tolist()) != symbols:
            return False, f"row {i} is not a permutation of 0..{d - 1}: {cells[i].tolist()}"
    for k in range(d):
        if set(cells[:, k].tolist()) != symbols:
            return False, f"column {k} is not a permutation of 0..{d - 1}: {cells[:, k].tolist()}"
    return True, None


def verify_mols(pair: MolsPair) -> tuple[bool, str | None]:
    """Exhaustive Latin and orthogonality check.

    Returns ``(True, None)`` or ``(False, witness)`` naming the first
    offending row, column or repeated cell pair.
    """
    for name, sq in (("first", pair.first), ("second", pair.second)):
        ok, why = verify_latin(sq)
        if not ok:
            return False, f"{name} square: {why}"
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    d = pair.order
    for i, k in product(range(d), range(d)):
        key = (int(pair.first.cells[i, k]), int(pair.second.cells[i, k]))
        if key in seen:
            return False, f"pair {key} repeated at cells {seen[key]} and {(i, k)}"
        seen[key] = (i, k)
    return True, None


def mols_from_field(field: FiniteField) -> list[LatinSquare]:
    """The q-1 squares ``L_a(i, k) = a*i + k`` for nonzero a."""
    q = field.q
    i = np.arange(q)
    out = []
    for a in range(1, q):
        out.append(LatinSquare(field.add[field.mul[a][i][:, None], i[None, :]]))
    return out


def macneish_product(a: MolsPair, b: MolsPair) -> MolsPair:
    """Direct product of two orthogonal pairs, of order ``a.order * b.order``."""

    def combine(x: LatinSquare, y: LatinSquare) -> LatinSquare:
        n = y.order
        # row (i1, i2) -> i1*n + i2, symbol (s1, s2) -> s1*n + s2
        cells = x.cells[:, None, :, None] * n + y.cells[None, :, None, :]
        return LatinSquare(cells.reshape(x.order * n, x.order * n))

    return MolsPair(combine(a.first, b.first), combine(a.second, b.second))


def _pair_for_prime_power(q: int) -> MolsPair:
    squares = mols_from_field(gf_construct(q))
    return MolsPair(squares[0], squares[1])


def mols_pair(d: int, supplied: MolsPair | None = None) -> MolsPair:
    """An orthogonal pair of order ``d``.

    Prime powers use the field construction, other orders the product of
    their prime-power parts. Orders 2 mod 4 above 6 need ``supplied``, which
    is verified and returned (it is also accepted for any other order).
    """
    if supplied is not None:
        if supplied.order != d:
            raise InvalidMols(f"supplied pair has order {supplied.order}, expected {d}")
        ok, why = verify_mols(supplied)
        if not ok:
            raise InvalidMols(why)
        return supplied
    if d in (2, 6):
        raise NoMolsExists(f"no pair of orthogonal Latin squares of order {d} exists")
    if d < 2:
        raise NoMolsExists(f"order must be at least 3, got {d}")
    if d % 4 == 2:
        raise UnsupportedOrder(
            f"order {d} = 2 mod 4 has orthogonal squares but no built-in construction; supply a pair file"
        )
    parts = [p**m for p, m in sorted(factorize(d).items())]
    pair = _pair_for_prime_power(parts[0])
    for q in parts[1:]:
        pair = macneish_product(pair, _pair_for_prime_power(q))
    return pair


def literature_order3_pair() -> MolsPair:
    """The explicit order-3 pair from the literature example (stored 1-based)."""
    from .io import mols_pair_from_dict

    text = resources.files("qmask.data").joinpath("order3_pair.json").read_text()
    return mols_pair_from_dict(json.loads(text))
