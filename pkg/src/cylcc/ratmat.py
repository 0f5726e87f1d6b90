"""Exact rational matrices as lists of Fraction rows.

Just enough linear algebra for chain-complex bookkeeping: products,
rank/kernel via Gaussian elimination, and determinants.  Everything is
exact; no floats enter or leave.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

Matrix = List[List[Fraction]]


def zeros(nrows: int, ncols: int) -> Matrix:
    return [[Fraction(0)] * ncols for _ in range(nrows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def clone(a: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in a]


def shape(a: Matrix):
    return (len(a), len(a[0]) if a else 0)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    am, an = shape(a)
    bm, bn = shape(b)
    if an != bm:
        raise ValueError(f"shape mismatch: ({am},{an}) @ ({bm},{bn})")
    out = zeros(am, bn)
    for i in range(am):
        row = a[i]
        for k in range(an):
            aik = row[k]
            if aik == 0:
                continue
            brow = b[k]
            orow = out[i]
            for j in range(bn):
                if brow[j] != 0:
                    orow[j] += aik * brow[j]
    return out


def mat_mul_shaped(
    a: Matrix, b: Matrix, nrows: int, nmid: int, ncols: int
) -> Matrix:
    """Product with explicit dimensions; safe when any dimension is zero.

    Bare list-of-rows matrices lose their column count when a dimension
    collapses, so callers that track graded dimensions pass them in.
    """
    out = zeros(nrows, ncols)
    for i in range(nrows):
        arow = a[i]
        orow = out[i]
        for k in range(nmid):
            aik = arow[k]
            if aik == 0:
                continue
            brow = b[k]
            for j in range(ncols):
                if brow[j] != 0:
                    orow[j] += aik * brow[j]
    return out


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    am, an = shape(a)
    if shape(b) != (am, an):
        raise ValueError("shape mismatch in subtraction")
    return [[a[i][j] - b[i][j] for j in range(an)] for i in range(am)]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    am, an = shape(a)
    if shape(b) != (am, an):
        raise ValueError("shape mismatch in addition")
    return [[a[i][j] + b[i][j] for j in range(an)] for i in range(am)]


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def hstack(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return clone(b)
    if not b:
        return clone(a)
    if len(a) != len(b):
        raise ValueError("row count mismatch in hstack")
    return [list(a[i]) + list(b[i]) for i in range(len(a))]


def _forward_eliminate(m: Matrix) -> int:
    """In-place row echelon; returns the rank."""
    nrows, ncols = shape(m)
    piv_r = 0
    for piv_c in range(ncols):
        pivot = None
        for r in range(piv_r, nrows):
            if m[r][piv_c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[piv_r], m[pivot] = m[pivot], m[piv_r]
        fp = m[piv_r][piv_c]
        for r in range(piv_r + 1, nrows):
            fr = m[r][piv_c]
            if fr == 0:
                continue
            factor = fr / fp
            for c in range(piv_c, ncols):
                m[r][c] -= m[piv_r][c] * factor
        piv_r += 1
        if piv_r == nrows:
            break
    return piv_r


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return _forward_eliminate(clone(a))


def nullspace(a: Matrix, ncols: int = None) -> Matrix:
    """Basis of the kernel, returned as a matrix whose columns span it."""
    if not a:
        n = ncols or 0
        return identity(n)
    nrows, n = shape(a)
    m = clone(a)
    piv_r = 0
    piv_cols = []
    for piv_c in range(n):
        pivot = None
        for r in range(piv_r, nrows):
            if m[r][piv_c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[piv_r], m[pivot] = m[pivot], m[piv_r]
        fp = m[piv_r][piv_c]
        m[piv_r] = [x / fp for x in m[piv_r]]
        for r in range(nrows):
            if r != piv_r and m[r][piv_c] != 0:
                factor = m[r][piv_c]
                m[r] = [m[r][c] - factor * m[piv_r][c] for c in range(n)]
        piv_cols.append(piv_c)
        piv_r += 1
    free_cols = [c for c in range(n) if c not in piv_cols]
    basis = zeros(n, len(free_cols))
    for j, fc in enumerate(free_cols):
        basis[fc][j] = Fraction(1)
        for r, pc in enumerate(piv_cols):
            basis[pc][j] = -m[r][fc]
    return basis


def det(a: Matrix) -> Fraction:
    n, m = shape(a)
    if n != m:
        raise ValueError("determinant needs a square matrix")
    w = clone(a)
    result = Fraction(1)
    for c in range(n):
        pivot = None
        for r in range(c, n):
            if w[r][c] != 0:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            w[c], w[pivot] = w[pivot], w[c]
            result = -result
        result *= w[c][c]
        inv = Fraction(1) / w[c][c]
        for r in range(c + 1, n):
            if w[r][c] != 0:
                factor = w[r][c] * inv
                for k in range(c, n):
                    w[r][k] -= factor * w[c][k]
    return result


def solve_coordinates(basis: Matrix, vector: Sequence[Fraction]):
    """Coordinates of ``vector`` in the column span of ``basis``; None if outside."""
    nrows, ncols = shape(basis)
    if len(vector) != nrows:
        raise ValueError("dimension mismatch")
    aug = [list(basis[i]) + [Fraction(vector[i])] for i in range(nrows)]
    piv_r = 0
    piv_cols = []
    for piv_c in range(ncols):
        pivot = None
        for r in range(piv_r, nrows):
            if aug[r][piv_c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        aug[piv_r], aug[pivot] = aug[pivot], aug[piv_r]
        fp = aug[piv_r][piv_c]
        aug[piv_r] = [x / fp for x in aug[piv_r]]
        for r in range(nrows):
            if r != piv_r and aug[r][piv_c] != 0:
                factor = aug[r][piv_c]
                aug[r] = [aug[r][k] - factor * aug[piv_r][k] for k in range(ncols + 1)]
        piv_cols.append(piv_c)
        piv_r += 1
    for r in range(piv_r, nrows):
        if aug[r][ncols] != 0:
            return None
    coords = [Fraction(0)] * ncols
    for r, pc in enumerate(piv_cols):
        coords[pc] = aug[r][ncols]
    return coords
