"""Exact linear algebra kernels: sparse rational elimination and integer
characteristic polynomials.

Matrices are handled column-wise as ``dict[row_index, Fraction]`` so that the
boundary matrices of quotient complexes (a handful of entries per column) and
operator matrices of permutation representations stay cheap.  Characteristic
polynomials of integer matrices are computed exactly by Hessenberg reduction
modulo a batch of word-sized primes followed by CRT reconstruction; only the
trailing nonzero coefficient needs a reconstruction bound, which the callers
derive from the coefficient sup-norm of the group-ring matrix.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

SparseCol = dict[int, Fraction]


class ColumnReduction:
    """Sparse column elimination that remembers, for every input column, its
    expansion over the selected pivot columns.

    ``pivot_cols[t]`` is the index of the t-th independent input column and
    ``col_expr[j][t]`` the coefficient of that pivot column in the expansion
    of input column ``j``.  Pivot columns expand to unit vectors.

    Stored pivot columns are reduced only against earlier pivots; reducing a
    fresh column in increasing pivot order therefore terminates (each step
    only introduces pivot rows of strictly later pivots).
    """

    def __init__(self, want_expr: bool = True):
        self.want_expr = want_expr
        self.pivot_rows: list[int] = []
        self.pivot_cols: list[int] = []
        self._cols: list[SparseCol] = []   # unit pivot entry, reduced vs earlier
        self._expr: list[SparseCol] = []   # expansion over original pivot columns
        self._row_to_k: dict[int, int] = {}
        self.col_expr: dict[int, SparseCol] = {}

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    def _reduce(self, col: SparseCol) -> tuple[SparseCol, dict[int, Fraction]]:
        c = dict(col)
        comb: dict[int, Fraction] = {}
        while True:
            hit_k = None
            for r in c:
                k = self._row_to_k.get(r)
                if k is not None and (hit_k is None or k < hit_k):
                    hit_k = k
            if hit_k is None:
                return c, comb
            lam = c[self.pivot_rows[hit_k]]
            comb[hit_k] = comb.get(hit_k, Fraction(0)) + lam
            for r, v in self._cols[hit_k].items():
                nv = c.get(r, Fraction(0)) - lam * v
                if nv:
                    c[r] = nv
                else:
                    c.pop(r, None)

    def add_column(self, col_id: int, col: SparseCol) -> bool:
        """Feed one column; returns True when it enlarged the rank."""
        residual, comb = self._reduce(col)
        if not residual:
            if self.want_expr:
                expr: SparseCol = {}
                for k, lam in comb.items():
                    for t, v in self._expr[k].items():
                        nv = expr.get(t, Fraction(0)) + lam * v
                        if nv:
                            expr[t] = nv
                        else:
                            expr.pop(t, None)
                self.col_expr[col_id] = expr
            return False
        pivot_row = min(residual)
        inv = Fraction(1) / residual[pivot_row]
        unit = {r: v * inv for r, v in residual.items()}
        k_new = len(self._cols)
        expr_new: SparseCol = {}
        if self.want_expr:
            expr_new = {k_new: inv}
            for k, lam in comb.items():
                for t, v in self._expr[k].items():
                    nv = expr_new.get(t, Fraction(0)) - inv * lam * v
                    if nv:
                        expr_new[t] = nv
                    else:
                        expr_new.pop(t, None)
        self._cols.append(unit)
        self._expr.append(expr_new)
        self._row_to_k[pivot_row] = k_new
        self.pivot_rows.append(pivot_row)
        self.pivot_cols.append(col_id)
        if self.want_expr:
            self.col_expr[col_id] = {k_new: Fraction(1)}
        return True


def column_reduce(columns: list[SparseCol], want_expr: bool = True) -> ColumnReduction:
    red = ColumnReduction(want_expr=want_expr)
    for j, col in enumerate(columns):
        red.add_column(j, col)
    return red


def sparse_rank(columns: list[SparseCol]) -> int:
    return column_reduce(columns, want_expr=False).rank


# ---------------------------------------------------------------------------
# Integer characteristic polynomials via CRT
# ---------------------------------------------------------------------------

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int) -> bool:
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_PRIME_CACHE: list[int] = []


def _primes(count: int) -> list[int]:
    # 25-bit primes keep all modular numpy arithmetic inside int64.
    n = _PRIME_CACHE[-1] - 2 if _PRIME_CACHE else (1 << 25) - 1
    while len(_PRIME_CACHE) < count:
        if _is_prime(n):
            _PRIME_CACHE.append(n)
        n -= 2
    return _PRIME_CACHE[:count]


def _hessenberg_mod(mat: np.ndarray, p: int) -> np.ndarray:
    h = np.mod(mat.astype(object) if mat.dtype == object else mat, p).astype(np.int64)
    n = h.shape[0]
    for j in range(n - 2):
        col = h[j + 1:, j]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = int(nz[0]) + j + 1
        if piv != j + 1:
            h[[j + 1, piv], :] = h[[piv, j + 1], :]
            h[:, [j + 1, piv]] = h[:, [piv, j + 1]]
        inv = pow(int(h[j + 1, j]), p - 2, p)
        mult = (h[j + 2:, j] * inv) % p
        if mult.any():
            h[j + 2:, :] = (h[j + 2:, :] - np.outer(mult, h[j + 1, :])) % p
            h[:, j + 1] = (h[:, j + 1] + h[:, j + 2:] @ mult) % p
    return h


def _charpoly_mod(mat: np.ndarray, p: int) -> np.ndarray:
    """Coefficients (index = power of x) of det(x*I - mat) mod p."""
    n = mat.shape[0]
    if n == 0:
        return np.array([1], dtype=np.int64)
    h = _hessenberg_mod(mat, p)
    polys = np.zeros((n + 1, n + 1), dtype=np.int64)
    polys[0, 0] = 1
    for m in range(1, n + 1):
        prev = polys[m - 1]
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:] = prev[:-1]
        cur = (cur - (int(h[m - 1, m - 1]) * prev) % p) % p
        if m >= 2:
            coefs = np.zeros(m - 1, dtype=np.int64)
            prod = 1
            for i in range(1, m):
                prod = (prod * int(h[m - i, m - i - 1])) % p
                if prod == 0:
                    break
                coefs[i - 1] = (int(h[m - 1 - i, m - 1]) * prod) % p
            if coefs.any():
                acc = (coefs[np.newaxis, :] @ polys[m - 2::-1][: m - 1]) % p
                cur = (cur - acc[0]) % p
        polys[m] = cur
    return polys[n]


def _crt(residues: list[int], primes: list[int]) -> int:
    modulus = 1
    value = 0
    for r, p in zip(residues, primes):
        inc = ((r - value) * pow(modulus, -1, p)) % p
        value += modulus * inc
        modulus *= p
    if value > modulus // 2:
        value -= modulus
    return value


def charpoly_trailing(mat: np.ndarray, bound: int) -> tuple[int, int]:
    """Exact rank and trailing nonzero characteristic-polynomial coefficient
    of an integer matrix.

    ``bound`` must dominate the absolute value of the trailing coefficient
    (e.g. ``c**rank`` with ``c`` a bound on the eigenvalue magnitudes).
    Returns ``(rank, coeff)`` with ``coeff`` the coefficient of
    ``x**(n-rank)`` in ``det(x*I - mat)``.
    """
    n = mat.shape[0]
    if n == 0:
        return 0, 1
    need = 1
    prod = 1
    while prod <= 4 * bound:
        prod *= _primes(need)[need - 1]
        need += 1
    primes = _primes(need + 4)
    polys = [_charpoly_mod(mat, p) for p in primes]
    first_nonzero = n
    for coeffs in polys:
        nz = np.nonzero(coeffs)[0]
        if nz.size and nz[0] < first_nonzero:
            first_nonzero = int(nz[0])
    rank = n - first_nonzero
    coeff = _crt([int(c[first_nonzero]) for c in polys], primes)
    return rank, coeff


def charpoly_exact(mat: list[list[Fraction]]) -> list[Fraction]:
    """Dense exact characteristic polynomial (Hessenberg over Fractions).

    Cross-check oracle for the modular path; only sensible for small sizes.
    """
    n = len(mat)
    h = [[Fraction(x) for x in row] for row in mat]
    for j in range(n - 2):
        piv = None
        for i in range(j + 1, n):
            if h[i][j]:
                piv = i
                break
        if piv is None:
            continue
        if piv != j + 1:
            h[j + 1], h[piv] = h[piv], h[j + 1]
            for row in h:
                row[j + 1], row[piv] = row[piv], row[j + 1]
        for i in range(j + 2, n):
            if not h[i][j]:
                continue
            m = h[i][j] / h[j + 1][j]
            for c in range(n):
                h[i][c] -= m * h[j + 1][c]
            for r in range(n):
                h[r][j + 1] += m * h[r][i]
    polys: list[list[Fraction]] = [[Fraction(1)]]
    for m in range(1, n + 1):
        prev = polys[m - 1]
        cur = [Fraction(0)] * (m + 1)
        for i, c in enumerate(prev):
            cur[i + 1] += c
            cur[i] -= h[m - 1][m - 1] * c
        prod = Fraction(1)
        for i in range(1, m):
            prod *= h[m - i][m - i - 1]
            if not prod:
                break
            coef = h[m - 1 - i][m - 1] * prod
            if coef:
                for t, c in enumerate(polys[m - 1 - i]):
                    cur[t] -= coef * c
        polys.append(cur)
    return polys[n]
