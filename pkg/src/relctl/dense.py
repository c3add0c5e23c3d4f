"""Dense Boolean-matrix reference backend.

Every relation operation has a direct matrix counterpart here, used to
cross-validate the symbolic implementation entry for entry.  Matrices are
plain numpy bool arrays indexed by element indices, so there is no care
space to worry about: every index is a real element.

Capacity is capped at 2**24 cells; this backend exists for tests, not for
solving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_CELLS = 1 << 24


class DenseError(Exception):
    pass


def _check_size(rows: int, cols: int) -> None:
    if rows * cols > MAX_CELLS:
        raise DenseError(f"dense relation {rows}x{cols} exceeds {MAX_CELLS} cells")


@dataclass
class DenseRelation:
    source_size: int
    target_size: int
    bits: np.ndarray  # bool matrix, shape (source_size, target_size)

    def __post_init__(self) -> None:
        _check_size(self.source_size, self.target_size)
        assert self.bits.shape == (self.source_size, self.target_size)
        assert self.bits.dtype == np.bool_

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DenseRelation)
            and self.source_size == other.source_size
            and self.target_size == other.target_size
            and bool(np.array_equal(self.bits, other.bits))
        )

    def entry_count(self) -> int:
        return int(self.bits.sum())


def make(rows: int, cols: int, entries=()) -> DenseRelation:
    _check_size(rows, cols)
    m = np.zeros((rows, cols), dtype=np.bool_)
    for i, j in entries:
        m[i, j] = True
    return DenseRelation(rows, cols, m)


def empty(rows: int, cols: int) -> DenseRelation:
    return make(rows, cols)


def universal(rows: int, cols: int) -> DenseRelation:
    _check_size(rows, cols)
    return DenseRelation(rows, cols, np.ones((rows, cols), dtype=np.bool_))


def identity(n: int) -> DenseRelation:
    return DenseRelation(n, n, np.eye(n, dtype=np.bool_))


def complement(r: DenseRelation) -> DenseRelation:
    return DenseRelation(r.source_size, r.target_size, ~r.bits)


def transpose(r: DenseRelation) -> DenseRelation:
    return DenseRelation(r.target_size, r.source_size, r.bits.T.copy())


def union(r: DenseRelation, s: DenseRelation) -> DenseRelation:
    return DenseRelation(r.source_size, r.target_size, r.bits | s.bits)


def inter(r: DenseRelation, s: DenseRelation) -> DenseRelation:
    return DenseRelation(r.source_size, r.target_size, r.bits & s.bits)


def compose(r: DenseRelation, s: DenseRelation) -> DenseRelation:
    assert r.target_size == s.source_size
    prod = r.bits.astype(np.int64) @ s.bits.astype(np.int64)
    return DenseRelation(r.source_size, s.target_size, prod > 0)


def is_incl(r: DenseRelation, s: DenseRelation) -> bool:
    return bool(np.all(~r.bits | s.bits))


def syq(r: DenseRelation, s: DenseRelation) -> DenseRelation:
    """syq(R,S)[y,z] iff column y of R equals column z of S."""
    assert r.source_size == s.source_size
    eq = r.bits[:, :, None] == s.bits[:, None, :]
    return DenseRelation(r.target_size, s.target_size, eq.all(axis=0))


def pairing(r: DenseRelation, s: DenseRelation) -> DenseRelation:
    """[R,S][z, x*|Y|+y] iff R[z,x] and S[z,y] (left-major product index)."""
    assert r.source_size == s.source_size
    both = r.bits[:, :, None] & s.bits[:, None, :]
    return DenseRelation(
        r.source_size,
        r.target_size * s.target_size,
        both.reshape(r.source_size, -1),
    )


def exchange(n: int) -> DenseRelation:
    """On a square product X*X of inner size n: (x1,x2) -> (x2,x1)."""
    m = np.zeros((n * n, n * n), dtype=np.bool_)
    for a in range(n):
        for b in range(n):
            m[a * n + b, b * n + a] = True
    return DenseRelation(n * n, n * n, m)


def vec(r: DenseRelation) -> DenseRelation:
    """Row-major flattening to a column vector over the product."""
    return DenseRelation(r.source_size * r.target_size, 1,
                         r.bits.reshape(-1, 1).copy())


def rel_of(v: DenseRelation, rows: int, cols: int) -> DenseRelation:
    assert v.target_size == 1 and v.source_size == rows * cols
    return DenseRelation(rows, cols, v.bits.reshape(rows, cols).copy())


def pi(nx: int, ny: int) -> DenseRelation:
    """Projection (X*Y) -> X."""
    m = np.zeros((nx * ny, nx), dtype=np.bool_)
    for x in range(nx):
        m[x * ny:(x + 1) * ny, x] = True
    return DenseRelation(nx * ny, nx, m)


def rho(nx: int, ny: int) -> DenseRelation:
    """Projection (X*Y) -> Y."""
    m = np.zeros((nx * ny, ny), dtype=np.bool_)
    for x in range(nx):
        for y in range(ny):
            m[x * ny + y, y] = True
    return DenseRelation(nx * ny, ny, m)


def eps(m: int) -> DenseRelation:
    """Membership X <-> 2^X; subset index is sum(2**j for j in S)."""
    _check_size(m, 1 << m)
    bits = np.zeros((m, 1 << m), dtype=np.bool_)
    for s in range(1 << m):
        for j in range(m):
            if (s >> j) & 1:
                bits[j, s] = True
    return DenseRelation(m, 1 << m, bits)


def omega(m: int) -> DenseRelation:
    """Size comparison 2^X <-> 2^X: (Y,Z) related iff |Y| <= |Z|."""
    n = 1 << m
    _check_size(n, n)
    pop = np.array([bin(s).count("1") for s in range(n)])
    return DenseRelation(n, n, pop[:, None] <= pop[None, :])


def point(n: int, index: int) -> DenseRelation:
    m = np.zeros((n, 1), dtype=np.bool_)
    m[index, 0] = True
    return DenseRelation(n, 1, m)


def inj(v: DenseRelation) -> DenseRelation:
    """Embedding of the subset described by a vector, rows in index order."""
    assert v.target_size == 1
    members = [i for i in range(v.source_size) if v.bits[i, 0]]
    m = np.zeros((len(members), v.source_size), dtype=np.bool_)
    for y, x in enumerate(members):
        m[y, x] = True
    return DenseRelation(len(members), v.source_size, m)


def column_enum(v: DenseRelation, m: int) -> DenseRelation:
    """Columns of eps restricted to the subsets described by v over 2^X."""
    return compose(eps(m), transpose(inj(v)))
