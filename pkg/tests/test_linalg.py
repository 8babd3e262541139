from fractions import Fraction

import numpy as np

from l2mult._linalg import (charpoly_exact, charpoly_trailing, column_reduce,
                            sparse_rank)

from conftest import make_rng


def _random_matrix(rng, nrows, ncols, density=0.6):
    cols = []
    for _ in range(ncols):
        col = {}
        for r in range(nrows):
            if rng.random() < density:
                col[r] = Fraction(rng.randint(-3, 3))
        cols.append({r: v for r, v in col.items() if v})
    return cols


def _dense(cols, nrows):
    out = np.zeros((nrows, len(cols)))
    for j, col in enumerate(cols):
        for r, v in col.items():
            out[r, j] = float(v)
    return out


def test_rank_matches_numpy():
    rng = make_rng(1)
    for trial in range(40):
        nrows = rng.randint(1, 7)
        ncols = rng.randint(1, 7)
        cols = _random_matrix(rng, nrows, ncols)
        expected = np.linalg.matrix_rank(_dense(cols, nrows), tol=1e-9)
        assert sparse_rank(cols) == expected


def test_column_expansion_reconstructs_columns():
    rng = make_rng(2)
    for trial in range(30):
        nrows = rng.randint(2, 6)
        ncols = rng.randint(2, 8)
        cols = _random_matrix(rng, nrows, ncols)
        red = column_reduce(cols)
        pivots = [cols[j] for j in red.pivot_cols]
        for j, col in enumerate(cols):
            expr = red.col_expr[j]
            rebuilt = {}
            for t, lam in expr.items():
                for r, v in pivots[t].items():
                    rebuilt[r] = rebuilt.get(r, Fraction(0)) + lam * v
            rebuilt = {r: v for r, v in rebuilt.items() if v}
            assert rebuilt == col


def test_pivot_columns_expand_to_units():
    rng = make_rng(3)
    cols = _random_matrix(rng, 5, 9)
    red = column_reduce(cols)
    for t, j in enumerate(red.pivot_cols):
        assert red.col_expr[j] == {t: Fraction(1)}


def test_charpoly_trailing_matches_exact():
    rng = make_rng(4)
    for trial in range(25):
        n = rng.randint(1, 7)
        mat = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
        coeffs = charpoly_exact([[Fraction(x) for x in row] for row in mat])
        nz = [i for i, c in enumerate(coeffs) if c]
        rank, coeff = charpoly_trailing(np.array(mat, dtype=object), 10 ** 12)
        assert rank == n - nz[0]
        assert coeff == coeffs[nz[0]]


def test_charpoly_trailing_zero_matrix():
    rank, coeff = charpoly_trailing(np.zeros((4, 4), dtype=np.int64), 100)
    assert rank == 0 and coeff == 1


def test_charpoly_exact_matches_numpy_roots():
    rng = make_rng(5)
    mat = [[rng.randint(-3, 3) for _ in range(5)] for _ in range(5)]
    coeffs = charpoly_exact([[Fraction(x) for x in row] for row in mat])
    numpy_coeffs = np.poly(np.array(mat, dtype=float))  # leading first
    for i, c in enumerate(coeffs):
        assert abs(float(c) - numpy_coeffs[len(coeffs) - 1 - i]) < 1e-6


def test_charpoly_trailing_large_symmetric():
    # N-cycle Laplacian: product of nonzero eigenvalues is N * N
    for n in (3, 12, 33):
        mat = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            mat[i, i] = 2
            mat[i, (i + 1) % n] -= 1
            mat[i, (i - 1) % n] -= 1
        rank, coeff = charpoly_trailing(mat, 4 ** n)
        assert rank == n - 1
        assert abs(coeff) == n * n
