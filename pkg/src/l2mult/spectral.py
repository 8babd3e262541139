"""Finite unitary representations and the spectral side of the pipeline:
operator matrices, atomic spectral measures, Fuglede-Kadison determinants,
moment checks, the determinant lower bound, and twisted Betti numbers of
compressed chain complexes.

Exact rational elimination is used whenever the representation and the
coefficients allow it; everything else falls back to dense numerics with
thresholds tied to the coefficient sup-norm bound of the matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import SparseCol, charpoly_trailing, column_reduce, sparse_rank
from .finite_groups import (FiniteGroup, FiniteSubgroup, GroupHom,
                            OrdinaryCharacter, induce_ordinary)
from .word_groups import (FiniteAlgebraMatrix, FreeAbelianGroup, FreeGroup,
                          GroupRingMatrix, Word)


class SpectralError(Exception):
    pass


class NotHermitian(SpectralError):
    pass


class MomentMismatch(SpectralError):
    def __init__(self, k, detail=""):
        self.k = k
        super().__init__(f"moment {k} mismatch: {detail}")


class BoundViolated(SpectralError):
    pass


class CharacterMismatch(SpectralError):
    pass


class NotAComplex(SpectralError):
    pass


def euler_phi(n: int) -> int:
    out, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            out *= p - 1
            m //= p
            while m % p == 0:
                out *= p
                m //= p
        p += 1
    if m > 1:
        out *= m - 1
    return out


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

class PermutationRep:
    """Unitary representation of a finite group on functions over a finite
    right G-set: rho(g) e_y = e_{y.g^-1}."""

    def __init__(self, group: FiniteGroup, act, n_points: int):
        self.group = group
        self.dim = n_points
        self.is_rational = True
        self.arithmetic_degree = 1
        self._act = act
        self._dest: dict[int, np.ndarray] = {}

    def dest(self, elem: int) -> np.ndarray:
        cached = self._dest.get(elem)
        if cached is None:
            ginv = self.group.inv(elem)
            cached = np.array([self._act(ginv, y) for y in range(self.dim)],
                              dtype=np.int64)
            self._dest[elem] = cached
        return cached

    def matrix(self, elem: int) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=complex)
        m[self.dest(elem), np.arange(self.dim)] = 1.0
        return m

    def trace(self, elem: int) -> complex:
        d = self.dest(elem)
        return float(np.count_nonzero(d == np.arange(self.dim)))


class UnitaryRep:
    """Dense unitary representation generated from generator images."""

    def __init__(self, group: FiniteGroup, gen_matrices: dict[int, np.ndarray],
                 exact_gen_matrices=None, arithmetic_degree: int | None = None,
                 tol: float = 1e-9, dim: int | None = None):
        self.group = group
        if gen_matrices:
            self.dim = next(iter(gen_matrices.values())).shape[0]
        elif dim is not None:
            self.dim = dim
        else:
            raise SpectralError("dimension required without generators")
        self.is_rational = exact_gen_matrices is not None
        self.arithmetic_degree = (arithmetic_degree if arithmetic_degree
                                  else euler_phi(group.order))
        self._mats: dict[int, np.ndarray] = {0: np.eye(self.dim, dtype=complex)}
        self._exact: dict[int, list] | None = None
        for g, m in gen_matrices.items():
            if np.max(np.abs(m.conj().T @ m - np.eye(self.dim))) > tol:
                raise SpectralError("generator image is not unitary")
        self._fill(gen_matrices)
        if exact_gen_matrices is not None:
            ident = [[Fraction(int(i == j)) for j in range(self.dim)]
                     for i in range(self.dim)]
            self._exact = {0: ident}
            self._fill_exact(exact_gen_matrices)

    def _fill(self, gen_matrices):
        group = self.group
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g, mg in gen_matrices.items():
                y = group.mul(x, g)
                if y not in self._mats:
                    self._mats[y] = self._mats[x] @ mg
                    frontier.append(y)
                y = group.mul(x, group.inv(g))
                if y not in self._mats:
                    self._mats[y] = self._mats[x] @ mg.conj().T
                    frontier.append(y)
        if len(self._mats) != group.order:
            raise SpectralError("generator images do not generate the group")

    def _fill_exact(self, exact_gens):
        group = self.group

        def mat_mul(a, b):
            n = self.dim
            return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
                    for i in range(n)]

        def mat_inv_orth(a):
            # inverse of a signed-permutation/orthogonal rational matrix = transpose
            n = self.dim
            return [[a[j][i] for j in range(n)] for i in range(n)]

        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g, mg in exact_gens.items():
                for y, my in ((group.mul(x, g), mat_mul(self._exact[x], mg)),
                              (group.mul(x, group.inv(g)),
                               mat_mul(self._exact[x], mat_inv_orth(mg)))):
                    if y not in self._exact:
                        self._exact[y] = my
                        frontier.append(y)

    def matrix(self, elem: int) -> np.ndarray:
        return self._mats[elem]

    def exact_matrix(self, elem: int):
        if self._exact is None:
            raise SpectralError("representation has no exact form")
        return self._exact[elem]

    def trace(self, elem: int) -> complex:
        return complex(np.trace(self._mats[elem]))


class PullbackRep:
    """Composition of a representation with a group homomorphism."""

    def __init__(self, hom: GroupHom, rho):
        self.hom = hom
        self.rho = rho
        self.group = hom.source
        self.dim = rho.dim
        self.is_rational = rho.is_rational
        self.arithmetic_degree = rho.arithmetic_degree
        if hasattr(rho, "dest"):
            self.dest = lambda elem: rho.dest(hom(elem))
        if hasattr(rho, "exact_matrix"):
            self.exact_matrix = lambda elem: rho.exact_matrix(hom(elem))

    def matrix(self, elem):
        return self.rho.matrix(self.hom(elem))

    def trace(self, elem):
        return self.rho.trace(self.hom(elem))


class WordPermRep:
    """Permutation representation of a free or free-abelian group, given by
    one permutation per generator letter (x -> x.a_i)."""

    def __init__(self, group, letter_perms):
        if not isinstance(group, (FreeGroup, FreeAbelianGroup)):
            raise SpectralError("word permutation reps cover free families only")
        self.group = group
        self.perms = [np.asarray(p, dtype=np.int64) for p in letter_perms]
        if len(self.perms) != group.n_letters:
            raise SpectralError("one permutation per generator required")
        self.dim = len(self.perms[0])
        for p in self.perms:
            if sorted(p.tolist()) != list(range(self.dim)):
                raise SpectralError("letter images must be bijections")
        if isinstance(group, FreeAbelianGroup):
            for i in range(len(self.perms)):
                for j in range(i + 1, len(self.perms)):
                    a, b = self.perms[i], self.perms[j]
                    if not np.array_equal(a[b], b[a]):
                        raise SpectralError("letter permutations must commute")
        self.is_rational = True
        self.arithmetic_degree = 1
        self._inv = [np.argsort(p) for p in self.perms]
        self._cache: dict = {}

    def dest(self, word: Word) -> np.ndarray:
        """Index map of rho(w): e_y -> e_{y.w^-1}."""
        cached = self._cache.get(word)
        if cached is None:
            out = np.arange(self.dim)
            for i, e in word.inverse().letters():
                p = self.perms[i] if e > 0 else self._inv[i]
                out = p[out]
            self._cache[word] = out
            cached = out
        return cached

    def matrix(self, word: Word) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=complex)
        m[self.dest(word), np.arange(self.dim)] = 1.0
        return m

    def trace(self, word: Word) -> complex:
        d = self.dest(word)
        return float(np.count_nonzero(d == np.arange(self.dim)))


def rep_from_action(group: FiniteGroup, act, n_points: int) -> PermutationRep:
    from .characters import check_action
    check_action(group, act, n_points)
    return PermutationRep(group, act, n_points)


def regular_rep(group: FiniteGroup) -> PermutationRep:
    return PermutationRep(group, lambda g, x: group.mul(x, g), group.order)


def coset_rep(group: FiniteGroup, subgroup: FiniteSubgroup) -> PermutationRep:
    """Permutation representation on right cosets H\\Q."""
    mem = set(subgroup.members)
    reps = []
    coset_of = {}
    for g in range(group.order):
        if g in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for h in mem:
            coset_of[group.mul(h, g)] = idx
    return PermutationRep(group, lambda g, x: coset_of[group.mul(reps[x], g)],
                          len(reps))


def character_of(rho) -> OrdinaryCharacter:
    classes = rho.group.conjugacy_classes()
    return OrdinaryCharacter(rho.group,
                             [rho.trace(r) for r in classes.representatives])


def irreducible_rep(group: FiniteGroup, chi: OrdinaryCharacter,
                    attempts: int = 10) -> UnitaryRep:
    """A unitary representation affording the irreducible character chi.

    Degree-1 characters are realized directly (exactly when rational); higher
    degrees are cut out of the regular representation by the isotypic
    projector and a random commutant operator.
    """
    if chi.group is not group:
        raise SpectralError("character of a different group")
    if chi.degree == 1:
        gens = {g: np.array([[chi.value(g)]]) for g in group.generators}
        exact = None
        if all(abs(chi.value(g).imag) < 1e-12 and
               abs(chi.value(g).real - round(chi.value(g).real)) < 1e-12
               for g in range(group.order)):
            exact = {g: [[Fraction(int(round(chi.value(g).real)))]]
                     for g in group.generators}
        return UnitaryRep(group, gens, exact_gen_matrices=exact,
                          arithmetic_degree=1 if exact is not None else None,
                          dim=1)
    reg = regular_rep(group)
    n = group.order
    d = chi.degree
    proj = np.zeros((n, n), dtype=complex)
    for g in range(n):
        proj += np.conj(chi.value(g)) * reg.matrix(g)
    proj *= d / n
    evals, evecs = np.linalg.eigh((proj + proj.conj().T) / 2)
    basis = evecs[:, evals > 0.5]
    if basis.shape[1] != d * d:
        raise SpectralError("isotypic projector has unexpected rank")
    action = {g: basis.conj().T @ reg.matrix(g) @ basis for g in range(n)}
    rng = np.random.default_rng(97 + group.order)
    for _ in range(attempts):
        x = rng.standard_normal((d * d, d * d))
        x = x + x.T
        t = sum(action[g] @ x @ action[g].conj().T for g in range(n)) / n
        evals, evecs = np.linalg.eigh((t + t.conj().T) / 2)
        # split into eigenvalue clusters; each is an invariant subspace
        splits = [0] + [i for i in range(1, d * d)
                        if evals[i] - evals[i - 1] > 1e-7] + [d * d]
        for a, b in zip(splits, splits[1:]):
            if b - a != d:
                continue
            sub = evecs[:, a:b]
            gens = {g: sub.conj().T @ action[g] @ sub for g in group.generators}
            try:
                rep = UnitaryRep(group, gens)
            except SpectralError:
                continue
            char = character_of(rep)
            if np.max(np.abs(char.values - chi.values)) < 1e-7:
                return rep
    raise SpectralError(f"could not realize irreducible of degree {d}")


def induced_rep(q_group: FiniteGroup, h_sub: FiniteSubgroup, rho_h,
                tol: float = 1e-8) -> UnitaryRep:
    """Block-monomial induced representation along H <= Q; the character is
    cross-checked against ordinary character induction."""
    h_abs, to_local = h_sub.abstract_group()
    if rho_h.group is not h_abs:
        raise SpectralError("rho_h must live on the abstract subgroup")
    mem = set(h_sub.members)
    reps: list[int] = []
    coset_of: dict[int, int] = {}
    for g in range(q_group.order):
        if g in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for h in mem:
            coset_of[q_group.mul(g, h)] = idx   # left cosets tH
    k = len(reps)
    d = rho_h.dim
    exact_ok = rho_h.is_rational

    def block_matrix(g, exact=False):
        if exact:
            out = [[Fraction(0)] * (k * d) for _ in range(k * d)]
        else:
            out = np.zeros((k * d, k * d), dtype=complex)
        for j in range(k):
            u = q_group.mul(g, reps[j])
            i = coset_of[u]
            h = q_group.mul(q_group.inv(reps[i]), u)
            if exact:
                sub = (rho_h.exact_matrix(to_local[h]) if hasattr(rho_h, "exact_matrix")
                       else [[Fraction(int(round(x.real))) for x in row]
                             for row in rho_h.matrix(to_local[h])])
                for a in range(d):
                    for b in range(d):
                        out[i * d + a][j * d + b] = sub[a][b]
            else:
                out[i * d:(i + 1) * d, j * d:(j + 1) * d] = \
                    rho_h.matrix(to_local[h])
        return out

    gens = {g: block_matrix(g) for g in q_group.generators}
    exact = {g: block_matrix(g, exact=True) for g in q_group.generators} \
        if exact_ok else None
    rep = UnitaryRep(q_group, gens, exact_gen_matrices=exact,
                     arithmetic_degree=rho_h.arithmetic_degree, dim=k * d)
    induced_char = induce_ordinary(h_sub, character_of(rho_h))
    if np.max(np.abs(character_of(rep).values - induced_char.values)) > tol:
        raise CharacterMismatch("induced character does not match the formula")
    return rep


def pullback_rep(hom: GroupHom, rho) -> PullbackRep:
    return PullbackRep(hom, rho)


# ---------------------------------------------------------------------------
# Operator matrices
# ---------------------------------------------------------------------------

def _pairs(a):
    if isinstance(a, FiniteAlgebraMatrix):
        return a.entries.items()
    if isinstance(a, GroupRingMatrix):
        return a.entries.items()
    raise SpectralError(f"unsupported matrix type {type(a).__name__}")


def _check_compat(a, rho):
    if isinstance(a, FiniteAlgebraMatrix):
        if getattr(rho, "group", None) is not a.group:
            raise SpectralError("matrix and representation group differ")
    elif isinstance(a, GroupRingMatrix):
        if not isinstance(rho, WordPermRep) or rho.group is not a.group:
            raise SpectralError("group-ring matrices need a word permutation rep")


def operator_matrix(a, rho) -> np.ndarray:
    """Dense block operator of the left-multiplication action in rho."""
    _check_compat(a, rho)
    d = rho.dim
    out = np.zeros((a.rows * d, a.cols * d), dtype=complex)
    for (i, j), terms in _pairs(a):
        block = np.zeros((d, d), dtype=complex)
        for elem, c in terms.items():
            if hasattr(rho, "dest"):
                block[rho.dest(elem), np.arange(d)] += complex(c)
            else:
                block += complex(c) * rho.matrix(elem)
        out[i * d:(i + 1) * d, j * d:(j + 1) * d] = block
    return out


def operator_columns_exact(a, rho) -> tuple[int, list[SparseCol]]:
    """Sparse exact columns of the operator; requires a rational rep."""
    _check_compat(a, rho)
    if not rho.is_rational:
        raise SpectralError("exact operator needs a rational representation")
    d = rho.dim
    cols: list[SparseCol] = [dict() for _ in range(a.cols * d)]
    for (i, j), terms in _pairs(a):
        for elem, c in terms.items():
            c = Fraction(c)
            if hasattr(rho, "dest"):
                dest = rho.dest(elem)
                for y in range(d):
                    col = cols[j * d + y]
                    r = i * d + int(dest[y])
                    nv = col.get(r, Fraction(0)) + c
                    if nv:
                        col[r] = nv
                    else:
                        col.pop(r, None)
            else:
                mat = rho.exact_matrix(elem)
                for y in range(d):
                    col = cols[j * d + y]
                    for r in range(d):
                        if mat[r][y]:
                            nv = col.get(i * d + r, Fraction(0)) + c * mat[r][y]
                            if nv:
                                col[i * d + r] = nv
                            else:
                                col.pop(i * d + r, None)
    return a.rows * d, cols


def operator_trace(a, rho) -> complex:
    """Unnormalized trace of the operator: sum of diagonal block traces."""
    total = 0j
    for (i, j), terms in _pairs(a):
        if i != j:
            continue
        for elem, c in terms.items():
            total += complex(c) * rho.trace(elem)
    return total


def _is_exact_pair(a, rho) -> bool:
    return rho.is_rational


# ---------------------------------------------------------------------------
# Spectral measures
# ---------------------------------------------------------------------------

@dataclass
class SpectralMeasure:
    """Finite atomic measure: eigenvalue atoms with integer multiplicities,
    unit mass per matrix column after dividing by the representation size."""

    atoms: list[tuple[float, int]]
    normalizer: int
    matrix_size: int

    def total_mass(self) -> Fraction:
        return Fraction(sum(m for _, m in self.atoms), self.normalizer)

    def moment(self, k: int) -> float:
        return sum(m * v ** k for v, m in self.atoms) / self.normalizer

    def null_mass(self) -> Fraction:
        return Fraction(sum(m for v, m in self.atoms if v == 0.0),
                        self.normalizer)

    def to_json(self) -> dict:
        return {"normalizer": self.normalizer, "matrix_size": self.matrix_size,
                "atoms": [[v, m] for v, m in self.atoms]}

    @classmethod
    def from_json(cls, data: dict) -> "SpectralMeasure":
        return cls([(float(v), int(m)) for v, m in data["atoms"]],
                   int(data["normalizer"]), int(data["matrix_size"]))


def spectral_measure(a, rho, herm_tol: float = 1e-9,
                     cluster_tol: float = 1e-7) -> SpectralMeasure:
    """Eigenvalue atoms of the operator of a self-adjoint matrix, clustered
    at absolute tolerance and normalized by the representation dimension."""
    op = operator_matrix(a, rho)
    if op.shape[0] != op.shape[1]:
        raise NotHermitian("operator is not square")
    scale = max(1.0, float(np.max(np.abs(op))) if op.size else 1.0)
    if np.max(np.abs(op - op.conj().T)) > herm_tol * scale:
        raise NotHermitian("operator differs from its adjoint")
    eigs = np.linalg.eigvalsh((op + op.conj().T) / 2)
    atoms: list[tuple[float, int]] = []
    i = 0
    n = len(eigs)
    while i < n:
        j = i + 1
        while j < n and eigs[j] - eigs[j - 1] <= cluster_tol:
            j += 1
        value = float(np.mean(eigs[i:j]))
        if abs(value) <= cluster_tol:
            value = 0.0
        atoms.append((value, j - i))
        i = j
    return SpectralMeasure(atoms, rho.dim, a.cols)


def fk_det(mu: SpectralMeasure) -> float:
    """Geometric mean exp(int ln|t| dmu), zero atoms excluded; the empty
    product is 1."""
    log_sum = 0.0
    for v, m in mu.atoms:
        if v != 0.0:
            log_sum += m * math.log(abs(v))
    return math.exp(log_sum / mu.normalizer)


def rank_nullity(a, rho, svd_tol: float = 1e-8):
    """phi-rank and phi-nullity of a (possibly rectangular) matrix: kernel
    dimension of the operator divided by the representation dimension.

    Returns exact Fractions on the rational path, floats otherwise.
    """
    if _is_exact_pair(a, rho):
        _, cols = operator_columns_exact(a, rho)
        op_rank = sparse_rank(cols)
        nullity = Fraction(a.cols * rho.dim - op_rank, rho.dim)
        return a.cols - nullity, nullity
    op = operator_matrix(a, rho)
    svals = np.linalg.svd(op, compute_uv=False) if op.size else np.array([])
    thr = svd_tol * max(1.0, float(a.sup_norm_bound()))
    op_rank = int(np.count_nonzero(svals > thr))
    nullity = (a.cols * rho.dim - op_rank) / rho.dim
    return a.cols - nullity, nullity


def moments_check(a, rho, kmax: int, tol: float = 1e-6):
    """Compare measure moments with normalized operator traces of powers."""
    if a.rows != a.cols:
        raise SpectralError("moments need a square matrix")
    mu = spectral_measure(a, rho)
    c = max(1.0, float(a.sup_norm_bound()))
    rows = []
    power = a
    for k in range(1, kmax + 1):
        lhs = mu.moment(k)
        rhs = operator_trace(power, rho) / rho.dim
        if abs(rhs.imag) > tol * c ** k:
            raise MomentMismatch(k, f"trace not real: {rhs}")
        delta = abs(lhs - rhs.real)
        rows.append({"k": k, "moment": lhs, "trace": rhs.real, "delta": delta})
        if delta > tol * c ** k:
            raise MomentMismatch(k, f"|{lhs} - {rhs.real}| = {delta}")
        power = power @ a
    return rows


@dataclass
class LuckReport:
    det: float
    bound: float
    passed: bool
    rank: int | None = None
    char_trailing: int | None = None
    det_exact: float | None = None
    integrality_gap: float | None = None
    log_gap: float | None = None


def luck_bound_check(a, rho, d: int) -> LuckReport:
    """det(mu) >= c_A^{-(d-1)n} for integer self-adjoint positive matrices;
    for d = 1 and rational representations the trailing coefficient of the
    exact characteristic polynomial certifies det^dim as a nonzero integer."""
    if not a.is_integral():
        raise SpectralError("integer coefficients required")
    if a.rows != a.cols:
        raise SpectralError("square matrix required")
    mu = spectral_measure(a, rho)
    det = fk_det(mu)
    c = float(a.sup_norm_bound())
    bound = c ** (-(d - 1) * a.rows) if c > 0 else 1.0
    report = LuckReport(det=det, bound=bound, passed=det >= bound * (1 - 1e-9))
    if d == 1 and rho.is_rational:
        nrows, cols = operator_columns_exact(a, rho)
        size = a.cols * rho.dim
        dense = np.zeros((size, size), dtype=np.int64)
        for j, col in enumerate(cols):
            for r, v in col.items():
                if v.denominator != 1:
                    raise SpectralError("integer operator expected")
                if abs(v.numerator) >= 2 ** 31:
                    raise SpectralError("operator entries too large")
                dense[r, j] = int(v)
        growth = max(2, math.ceil(c))
        rank, coeff = charpoly_trailing(dense, growth ** size)
        report.rank = rank
        report.char_trailing = int(abs(coeff))
        log_c = math.log(abs(coeff)) if coeff else 0.0
        report.det_exact = math.exp(log_c / rho.dim)
        report.log_gap = abs(rho.dim * math.log(det) - log_c) if det > 0 else None
        if abs(coeff) < 2 ** 50 and rho.dim * math.log(max(det, 1e-300)) < 600:
            report.integrality_gap = abs(det ** rho.dim - abs(coeff))
        if coeff == 0:
            raise BoundViolated("vanishing characteristic coefficient")
        if not report.passed:
            raise BoundViolated(f"det {det} below bound {bound}")
    elif not report.passed:
        raise BoundViolated(f"det {det} below bound {bound}")
    return report


# ---------------------------------------------------------------------------
# Twisted Betti numbers of compressed complexes
# ---------------------------------------------------------------------------

def _idempotent_columns(rho, summands, n_modules) -> tuple[list[SparseCol], int]:
    """Exact basis columns of the images of the averaging idempotents of the
    stabilizer summands inside V^n (rational representations)."""
    d = rho.dim
    basis: list[SparseCol] = []
    for j in range(n_modules):
        stab = summands[j] if summands else None
        if stab is None or len(stab[0]) <= 1:
            for y in range(d):
                basis.append({j * d + y: Fraction(1)})
            continue
        elems, signs = stab
        cols: list[SparseCol] = [dict() for _ in range(d)]
        w = Fraction(1, len(elems))
        for elem, sign in zip(elems, signs):
            if hasattr(rho, "dest"):
                dest = rho.dest(elem)
                for y in range(d):
                    col = cols[y]
                    r = int(dest[y])
                    nv = col.get(r, Fraction(0)) + sign * w
                    if nv:
                        col[r] = nv
                    else:
                        col.pop(r, None)
            else:
                mat = rho.exact_matrix(elem)
                for y in range(d):
                    col = cols[y]
                    for r in range(d):
                        if mat[r][y]:
                            nv = col.get(r, Fraction(0)) + sign * w * mat[r][y]
                            if nv:
                                col[r] = nv
                            else:
                                col.pop(r, None)
        red = column_reduce(cols, want_expr=False)
        for k in red.pivot_cols:
            basis.append({j * d + r: v for r, v in cols[k].items()})
    return basis, d * n_modules


def _apply_columns(op_cols: list[SparseCol], vecs: list[SparseCol]) -> list[SparseCol]:
    out = []
    for v in vecs:
        acc: SparseCol = {}
        for idx, c in v.items():
            for r, w in op_cols[idx].items():
                nv = acc.get(r, Fraction(0)) + c * w
                if nv:
                    acc[r] = nv
                else:
                    acc.pop(r, None)
        out.append(acc)
    return out


def _project_columns(rho, summands, n_modules, vecs: list[SparseCol]):
    """Apply the block-diagonal averaging idempotents to sparse vectors."""
    if summands is None or all(s is None or len(s[0]) <= 1 for s in summands):
        return vecs
    d = rho.dim
    out = []
    for v in vecs:
        acc: SparseCol = {}
        for idx, c in v.items():
            j, y = divmod(idx, d)
            stab = summands[j]
            if stab is None or len(stab[0]) <= 1:
                nv = acc.get(idx, Fraction(0)) + c
                if nv:
                    acc[idx] = nv
                else:
                    acc.pop(idx, None)
                continue
            elems, signs = stab
            w = Fraction(1, len(elems))
            for elem, sign in zip(elems, signs):
                if hasattr(rho, "dest"):
                    r = j * d + int(rho.dest(elem)[y])
                    nv = acc.get(r, Fraction(0)) + sign * w * c
                    if nv:
                        acc[r] = nv
                    else:
                        acc.pop(r, None)
                else:
                    mat = rho.exact_matrix(elem)
                    for r in range(d):
                        if mat[r][y]:
                            key = j * d + r
                            nv = acc.get(key, Fraction(0)) + sign * w * c * mat[r][y]
                            if nv:
                                acc[key] = nv
                            else:
                                acc.pop(key, None)
        out.append(acc)
    return out


def _numeric_projector(rho, summands, n_modules) -> np.ndarray | None:
    if summands is None or all(s is None or len(s[0]) <= 1 for s in summands):
        return None
    d = rho.dim
    out = np.zeros((n_modules * d, n_modules * d), dtype=complex)
    for j in range(n_modules):
        stab = summands[j]
        if stab is None or len(stab[0]) <= 1:
            out[j * d:(j + 1) * d, j * d:(j + 1) * d] = np.eye(d)
            continue
        elems, signs = stab
        proj = sum(sign * rho.matrix(elem) for elem, sign in zip(elems, signs))
        out[j * d:(j + 1) * d, j * d:(j + 1) * d] = np.asarray(proj) / len(elems)
    return out


def _numeric_idempotent_basis(rho, summands, n_modules) -> np.ndarray:
    d = rho.dim
    blocks = []
    for j in range(n_modules):
        stab = summands[j] if summands else None
        if stab is None or len(stab[0]) <= 1:
            blocks.append((j, np.eye(d, dtype=complex)))
            continue
        elems, signs = stab
        proj = sum(sign * rho.matrix(elem) for elem, sign in zip(elems, signs))
        proj = np.asarray(proj) / len(elems)
        evals, evecs = np.linalg.eigh((proj + proj.conj().T) / 2)
        blocks.append((j, evecs[:, evals > 0.5]))
    total = sum(b.shape[1] for _, b in blocks)
    out = np.zeros((n_modules * d, total), dtype=complex)
    pos = 0
    for j, b in blocks:
        out[j * d:(j + 1) * d, pos:pos + b.shape[1]] = b
        pos += b.shape[1]
    return out


def phi_betti(boundary_p, boundary_p1, rho, stabilizers=None,
              svd_tol: float = 1e-8):
    """Twisted Betti number nullity(d_p) - rank(d_{p+1}) of one degree of a
    complex of projective summands, compressed by stabilizer idempotents.

    ``stabilizers`` is an optional triple of summand lists (degrees p-1, p,
    p+1); each summand is None for a free module or a pair
    (element_indices, signs) describing the averaging idempotent.
    """
    stabs = stabilizers or (None, None, None)
    if boundary_p is None and boundary_p1 is None:
        raise SpectralError("at least one boundary required")
    n_p = boundary_p.cols if boundary_p is not None else boundary_p1.rows
    n_pm1 = boundary_p.rows if boundary_p is not None else 0
    exact = rho.is_rational
    if exact:
        basis_p, _ = _idempotent_columns(rho, stabs[1], n_p)
        dim_wp = len(basis_p)
        if boundary_p is not None:
            _, cols_p = operator_columns_exact(boundary_p, rho)
            mapped = _project_columns(rho, stabs[0], n_pm1,
                                      _apply_columns(cols_p, basis_p))
            rank_p = column_reduce(mapped, want_expr=False).rank
        else:
            rank_p = 0
        rank_p1 = 0
        if boundary_p1 is not None:
            basis_p1, _ = _idempotent_columns(rho, stabs[2], boundary_p1.cols)
            _, cols_p1 = operator_columns_exact(boundary_p1, rho)
            image = _project_columns(rho, stabs[1], n_p,
                                     _apply_columns(cols_p1, basis_p1))
            if boundary_p is not None:
                composite = _project_columns(rho, stabs[0], n_pm1,
                                             _apply_columns(cols_p, image))
                if any(composite):
                    raise NotAComplex("d_p . d_{p+1} != 0 on the compression")
            rank_p1 = column_reduce(image, want_expr=False).rank
        return Fraction(dim_wp - rank_p, rho.dim) - Fraction(rank_p1, rho.dim)
    basis_p = _numeric_idempotent_basis(rho, stabs[1], n_p)
    thr = svd_tol * max(1.0, float((boundary_p or boundary_p1).sup_norm_bound()))
    proj_pm1 = _numeric_projector(rho, stabs[0], n_pm1)
    rank_p = 0
    if boundary_p is not None:
        mapped = operator_matrix(boundary_p, rho) @ basis_p
        if proj_pm1 is not None:
            mapped = proj_pm1 @ mapped
        svals = np.linalg.svd(mapped, compute_uv=False) if mapped.size else []
        rank_p = int(np.count_nonzero(np.asarray(svals) > thr))
    rank_p1 = 0
    if boundary_p1 is not None:
        basis_p1 = _numeric_idempotent_basis(rho, stabs[2], boundary_p1.cols)
        image = operator_matrix(boundary_p1, rho) @ basis_p1
        proj_p = _numeric_projector(rho, stabs[1], n_p)
        if proj_p is not None:
            image = proj_p @ image
        if boundary_p is not None:
            comp = operator_matrix(boundary_p, rho) @ image
            if proj_pm1 is not None:
                comp = proj_pm1 @ comp
            if comp.size and np.max(np.abs(comp)) > 1e-7:
                raise NotAComplex("d_p . d_{p+1} != 0 on the compression")
        svals = np.linalg.svd(image, compute_uv=False) if image.size else []
        rank_p1 = int(np.count_nonzero(np.asarray(svals) > thr))
    return (basis_p.shape[1] - rank_p - rank_p1) / rho.dim
