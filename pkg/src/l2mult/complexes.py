"""Equivariant CW chain data over the built-in groups, finite quotient
complexes with residual symmetry, exact homology, traces and multiplicities.

A quotient complex stores exact rational boundary columns; homology traces
are computed without kernel bases through

    Tr(h | H_p) = Tr(h | C_p) - Tr(h | im d_p) - Tr(h | im d_{p+1}),

where the trace on an image is read off from the column expansion recorded
during elimination (the symmetry permutes boundary columns up to sign).
A floating Hodge-projector route is kept alongside as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import ColumnReduction, SparseCol, column_reduce
from .finite_groups import (CharacterTable, FiniteGroup, FiniteSubgroup,
                            NotIntegral)
from .characters import (CrossCheckFailed, HNotNormalizing,
                         UnsupportedFamily, finite_word_subgroup)
from .spectral import (PermutationRep, induced_rep, irreducible_rep,
                       operator_columns_exact, phi_betti)
from .word_groups import (BuiltinGroup, FiniteAlgebraMatrix,
                          FiniteIndexSubgroup, FreeAbelianGroup, FreeGroup,
                          FreeByFiniteGroup, GroupRingMatrix,
                          InfiniteDihedralGroup, Word, format_ring_sum)


class ComplexError(Exception):
    pass


class NotFree(ComplexError):
    pass


class NotAComplex(ComplexError):
    pass


# ---------------------------------------------------------------------------
# Equivariant data over the infinite group
# ---------------------------------------------------------------------------

@dataclass
class OrbitCell:
    """One orbit of cells: stabilizer words (identity first) with their
    orientation signs."""

    stabilizer: tuple[Word, ...]
    signs: tuple[int, ...]
    label: str

    def __post_init__(self):
        if len(self.stabilizer) != len(self.signs):
            raise ComplexError("one sign per stabilizer element")
        if not self.stabilizer or not self.stabilizer[0].is_identity():
            raise ComplexError("stabilizer must list the identity first")
        if self.signs[0] != 1 or any(s not in (-1, 1) for s in self.signs):
            raise ComplexError("signs must be +-1 with +1 at the identity")


def _ring_mul(t1: dict[Word, Fraction], t2: dict[Word, Fraction]):
    out: dict[Word, Fraction] = {}
    for w1, c1 in t1.items():
        for w2, c2 in t2.items():
            w = w1 * w2
            nv = out.get(w, Fraction(0)) + c1 * c2
            if nv:
                out[w] = nv
            else:
                out.pop(w, None)
    return out


def _averaging(cell: OrbitCell) -> dict[Word, Fraction]:
    n = len(cell.stabilizer)
    out: dict[Word, Fraction] = {}
    for w, s in zip(cell.stabilizer, cell.signs):
        out[w] = out.get(w, Fraction(0)) + Fraction(s, n)
    return out


class EquivariantCWData:
    """Cells and boundaries of a cocompact complex over a built-in group."""

    def __init__(self, group: BuiltinGroup, cells: dict[int, list[OrbitCell]],
                 boundaries: dict[int, GroupRingMatrix]):
        self.group = group
        self.cells = cells
        self.boundaries = boundaries
        self.validate()

    def dims(self):
        return sorted(self.cells)

    def validate(self):
        for p, mat in self.boundaries.items():
            if p - 1 not in self.cells or p not in self.cells:
                raise ComplexError(f"boundary {p} without cells")
            if mat.rows != len(self.cells[p - 1]) or mat.cols != len(self.cells[p]):
                raise ComplexError(f"boundary {p} has the wrong shape")
            if mat.group is not self.group:
                raise ComplexError("boundary over a different group")
        for p, orbit_cells in self.cells.items():
            for cell in orbit_cells:
                self._check_stabilizer(cell)
        for p, mat in self.boundaries.items():
            self._check_invariance(p, mat)

    def _check_stabilizer(self, cell: OrbitCell):
        words = list(cell.stabilizer)
        sign_of = dict(zip(words, cell.signs))
        if len(sign_of) != len(words):
            raise ComplexError(f"duplicate stabilizer words in {cell.label}")
        for w1 in words:
            for w2 in words:
                prod = w1 * w2
                if prod not in sign_of:
                    raise ComplexError(f"stabilizer of {cell.label} not closed")
                if sign_of[prod] != sign_of[w1] * sign_of[w2]:
                    raise ComplexError(f"signs of {cell.label} not a character")

    def _check_invariance(self, p: int, mat: GroupRingMatrix):
        """e_i x s = sign(s) e_i x for each source stabilizer generator s."""
        for j, src in enumerate(self.cells[p]):
            for s_word, s_sign in zip(src.stabilizer[1:], src.signs[1:]):
                for i, tgt in enumerate(self.cells[p - 1]):
                    terms = mat.entry(i, j)
                    if not terms:
                        continue
                    left = _averaging(tgt)
                    lhs = _ring_mul(left, _ring_mul(terms, {s_word: Fraction(1)}))
                    rhs = _ring_mul(left, {w: s_sign * c for w, c in terms.items()})
                    if lhs != rhs:
                        raise ComplexError(
                            f"boundary entry ({tgt.label},{src.label}) breaks "
                            f"stabilizer invariance")


def _free_cell(group: BuiltinGroup, label: str) -> OrbitCell:
    return OrbitCell((group.identity(),), (1,), label)


def builtin_line_Z() -> EquivariantCWData:
    """The real line as a Z-complex: one free vertex, one free edge."""
    g = FreeAbelianGroup(1)
    a = g.generator(0)
    boundary = GroupRingMatrix(g, 1, 1, {(0, 0): {g.identity(): Fraction(1),
                                                  a: Fraction(-1)}})
    return EquivariantCWData(g, {0: [_free_cell(g, "v")],
                                 1: [_free_cell(g, "e")]}, {1: boundary})


def builtin_line_Dinf() -> EquivariantCWData:
    """The real line as a D_inf-complex: vertex orbits at the two reflection
    points, one free edge orbit."""
    g = InfiniteDihedralGroup()
    ident = g.identity()
    s = g.word("b")
    ts = g.word("ab")
    cells0 = [OrbitCell((ident, s), (1, 1), "v0"),
              OrbitCell((ident, ts), (1, 1), "v1")]
    boundary = GroupRingMatrix(g, 2, 1, {(0, 0): {ident: Fraction(-1)},
                                         (1, 0): {ident: Fraction(1)}})
    return EquivariantCWData(g, {0: cells0, 1: [_free_cell(g, "e")]},
                             {1: boundary})


def builtin_rose_free(rank: int) -> EquivariantCWData:
    """Universal cover of the rose: the tree of the free group."""
    g = FreeGroup(rank)
    entries = {}
    for i in range(rank):
        entries[(0, i)] = {g.identity(): Fraction(1),
                           g.generator(i): Fraction(-1)}
    boundary = GroupRingMatrix(g, 1, rank, entries)
    cells1 = [_free_cell(g, f"e_{chr(97 + i)}") for i in range(rank)]
    return EquivariantCWData(g, {0: [_free_cell(g, "v")], 1: cells1},
                             {1: boundary})


def builtin_tree_free_by_finite(rank: int, h_group: FiniteGroup,
                                action: dict) -> EquivariantCWData:
    """The free-group tree as a complex over F_rank : H.

    Requires a monomial-diagonal action (every h sends each generator to
    itself or its inverse); edge orbits pick up order-2 stabilizers with the
    flip acting by -1.
    """
    g = FreeByFiniteGroup(rank, h_group, action)
    ident = g.identity()
    h_words = [Word(g, ((), h)) for h in range(h_group.order)]
    vertex = OrbitCell(tuple(h_words), tuple([1] * h_group.order), "v")
    cells1 = []
    entries = {}
    for i in range(rank):
        gen_free = ((i, 1),)
        stab = [ident]
        signs = [1]
        for h in range(1, h_group.order):
            img = g.apply_aut(h, gen_free)
            if img == gen_free:
                stab.append(Word(g, ((), h)))
                signs.append(1)
            elif img == ((i, -1),):
                stab.append(Word(g, (((i, -1),), h)))
                signs.append(-1)
            else:
                raise UnsupportedFamily(
                    "tree complex needs a monomial-diagonal action on the "
                    "free generators")
        cells1.append(OrbitCell(tuple(stab), tuple(signs), f"e_{chr(97 + i)}"))
        entries[(0, i)] = {ident: Fraction(1), g.generator(i): Fraction(-1)}
    boundary = GroupRingMatrix(g, 1, rank, entries)
    return EquivariantCWData(g, {0: [vertex], 1: cells1}, {1: boundary})


def cw_from_json(group: BuiltinGroup, data: dict) -> EquivariantCWData:
    """Equivariant complex from its JSON form: per dimension, orbit cells
    with stabilizer word lists, and boundary entries as group-ring sums."""
    cells = {}
    for p_str, orbit_list in data["cells"].items():
        out = []
        for record in orbit_list:
            stab = tuple(group.word(w) for w in record.get("stabilizer", ["1"]))
            signs = tuple(record.get("signs", [1] * len(stab)))
            out.append(OrbitCell(stab, signs, record.get("label", "cell")))
        cells[int(p_str)] = out
    boundaries = {}
    for p_str, rows in data.get("boundaries", {}).items():
        boundaries[int(p_str)] = GroupRingMatrix.from_strings(group, rows)
    return EquivariantCWData(group, cells, boundaries)


def cw_to_json(cw: EquivariantCWData) -> dict:
    return {
        "cells": {str(p): [{"stabilizer": [str(w) for w in c.stabilizer],
                            "signs": list(c.signs), "label": c.label}
                           for c in cells]
                  for p, cells in cw.cells.items()},
        "boundaries": {str(p): [[format_ring_sum(mat.entry(i, j))
                                 for j in range(mat.cols)]
                                for i in range(mat.rows)]
                       for p, mat in cw.boundaries.items()},
    }


# ---------------------------------------------------------------------------
# Finite chain complexes with symmetry
# ---------------------------------------------------------------------------

@dataclass
class HomologyReport:
    betti: dict[int, int]
    multiplicities: dict[tuple[int, int], int]
    traces: dict[tuple[int, int], Fraction]


class FiniteChainComplex:
    """Rational chain complex with a signed permutation action of a finite
    symmetry group; boundaries are stored as exact sparse columns."""

    def __init__(self, n_cells: dict[int, int],
                 boundaries: dict[int, tuple[int, list[SparseCol]]],
                 sym_group: FiniteGroup | None = None,
                 actions: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]
                 | None = None):
        self.n_cells = dict(n_cells)
        self.boundaries = boundaries
        self.sym_group = sym_group
        self.actions = actions or {}
        self._elims: dict[int, ColumnReduction | None] = {}
        self._validate()

    def dims(self):
        return sorted(self.n_cells)

    def _validate(self):
        for p, (nrows, cols) in self.boundaries.items():
            if len(cols) != self.n_cells.get(p, -1) or \
                    nrows != self.n_cells.get(p - 1, -1):
                raise ComplexError(f"boundary {p} shape mismatch")
        # d d = 0, exactly
        for p, (_, cols) in self.boundaries.items():
            upper = self.boundaries.get(p + 1)
            if upper is None:
                continue
            for col in upper[1]:
                acc: SparseCol = {}
                for idx, c in col.items():
                    for r, v in cols[idx].items():
                        nv = acc.get(r, Fraction(0)) + c * v
                        if nv:
                            acc[r] = nv
                        else:
                            acc.pop(r, None)
                if acc:
                    raise NotAComplex(f"d_{p} . d_{p + 1} != 0")
        # symmetry: signed permutations commuting with the boundaries
        for (h, p), (perm, signs) in self.actions.items():
            if sorted(perm.tolist()) != list(range(self.n_cells[p])):
                raise ComplexError("action is not a permutation")
            if not np.all(np.abs(signs) == 1):
                raise ComplexError("action signs must be +-1")
            bnd = self.boundaries.get(p)
            if bnd is None:
                continue
            lower = self.actions.get((h, p - 1))
            if lower is None:
                continue
            nrows, cols = bnd
            lperm, lsigns = lower
            for j in range(len(cols)):
                lhs: SparseCol = {int(lperm[r]): int(lsigns[r]) * v
                                  for r, v in cols[j].items()}
                rhs = {r: int(signs[j]) * v
                       for r, v in cols[int(perm[j])].items()}
                if lhs != rhs:
                    raise ComplexError(
                        f"action does not commute with boundary {p}")

    def _elim(self, p: int) -> ColumnReduction | None:
        if p not in self._elims:
            bnd = self.boundaries.get(p)
            self._elims[p] = None if bnd is None else column_reduce(bnd[1])
        return self._elims[p]

    def rank(self, p: int) -> int:
        elim = self._elim(p)
        return 0 if elim is None else elim.rank

    def betti(self, p: int) -> int:
        return self.n_cells[p] - self.rank(p) - self.rank(p + 1)

    def betti_numbers(self) -> dict[int, int]:
        return {p: self.betti(p) for p in self.dims()}

    def _image_trace(self, h: int, p: int) -> Fraction:
        """Trace of the symmetry on im(d_p), from the recorded expansions."""
        elim = self._elim(p)
        if elim is None or elim.rank == 0:
            return Fraction(0)
        perm, signs = self.actions[(h, p)]
        total = Fraction(0)
        for t, j in enumerate(elim.pivot_cols):
            expr = elim.col_expr.get(int(perm[j]), {})
            total += int(signs[j]) * expr.get(t, Fraction(0))
        return total

    def cell_trace(self, h: int, p: int) -> Fraction:
        perm, signs = self.actions[(h, p)]
        fixed = perm == np.arange(self.n_cells[p])
        return Fraction(int(np.sum(signs[fixed])))

    def action_trace(self, h: int, p: int) -> Fraction:
        if self.sym_group is None:
            raise ComplexError("complex carries no symmetry action")
        if h == 0:
            return Fraction(self.betti(p))
        return (self.cell_trace(h, p) - self._image_trace(h, p)
                - self._image_trace(h, p + 1))

    def multiplicities(self, table: CharacterTable,
                       tol: float = 1e-6) -> HomologyReport:
        if self.sym_group is None or table.group is not self.sym_group:
            raise ComplexError("character table of a different group")
        classes = table.classes
        betti = self.betti_numbers()
        traces = {(p, h): self.action_trace(h, p)
                  for p in self.dims() for h in range(self.sym_group.order)}
        mult = {}
        order = self.sym_group.order
        for p in self.dims():
            for chi_idx, chi in enumerate(table.irreducibles):
                total = 0j
                for h in range(order):
                    total += np.conj(chi.values[classes.class_of[h]]) * \
                        float(traces[(p, h)])
                total /= order
                m = int(round(total.real))
                if abs(total - m) > tol:
                    raise NotIntegral(
                        f"multiplicity {total} of irreducible {chi_idx} in "
                        f"H_{p} is not integral")
                mult[(p, chi_idx)] = m
            total_dim = sum(table.irreducibles[i].degree * mult[(p, i)]
                            for i in range(len(table.irreducibles)))
            if total_dim != betti[p]:
                raise ComplexError(f"sum rule fails in degree {p}")
        return HomologyReport(betti, mult, traces)

    # numeric oracle ------------------------------------------------------

    def _dense_boundary(self, p: int) -> np.ndarray | None:
        bnd = self.boundaries.get(p)
        if bnd is None:
            return None
        nrows, cols = bnd
        out = np.zeros((nrows, len(cols)))
        for j, col in enumerate(cols):
            for r, v in col.items():
                out[r, j] = float(v)
        return out

    def hodge_trace(self, h: int, p: int) -> float:
        """Floating trace of the symmetry on harmonic p-chains; independent
        of the exact elimination route."""
        n = self.n_cells[p]
        proj = np.eye(n)
        for q, sign in ((p, 0), (p + 1, 1)):
            mat = self._dense_boundary(q)
            if mat is None:
                continue
            m = mat if sign else mat.T
            # projection onto the image of m
            u, s, _ = np.linalg.svd(m, full_matrices=False)
            cols = u[:, s > 1e-9 * max(1.0, s[0] if len(s) else 1.0)]
            proj -= cols @ cols.T
        perm, signs = self.actions[(h, p)]
        act = np.zeros((n, n))
        act[perm, np.arange(n)] = signs
        return float(np.trace(act @ proj))


# ---------------------------------------------------------------------------
# Quotient complexes
# ---------------------------------------------------------------------------

@dataclass
class QuotientOrbit:
    label: str
    stab_images: list[tuple[int, int]]      # (element of Q, sign)
    cell_reps: list[int]                    # canonical double coset reps
    offset: int
    dec: list[tuple[int, int]]              # Q element -> (cell id, sign)


class QuotientComplex(FiniteChainComplex):
    def __init__(self, index: int, orbits: dict[int, list[QuotientOrbit]],
                 h_group: FiniteGroup | None, h_images: list[int], **kw):
        self.index = index
        self.orbits = orbits
        self.h_images = h_images
        super().__init__(sym_group=h_group, **kw)

    def cell_labels(self, p: int) -> list[str]:
        out = []
        for orbit in self.orbits[p]:
            for rep in orbit.cell_reps:
                out.append(f"{orbit.label}@{rep}")
        return out


def quotient_complex(cw: EquivariantCWData, gamma: FiniteIndexSubgroup,
                     h_words: list[Word] | None = None,
                     h_ctx=None) -> QuotientComplex:
    """Quotient of the equivariant complex by the finite-index subgroup,
    carrying the residual action of the words in ``h_words``.

    Cells in the quotient are double cosets S\\Q/K with canonical minimal
    representatives; signs come from decomposing elements as s.rep.k.
    """
    if cw.group is not gamma.group:
        raise ComplexError("complex and subgroup over different groups")
    qmap = gamma.via
    q = qmap.target
    fiber = list(gamma.fiber.members)
    fiber_set = set(fiber)
    if h_ctx is not None:
        h_abs, h_elem_words = h_ctx
    elif h_words:
        h_abs, h_elem_words = finite_word_subgroup(h_words)
    else:
        h_abs, h_elem_words = None, []
    h_images = [qmap.evaluate(w) for w in h_elem_words]
    if h_abs is not None and len(set(h_images)) != h_abs.order:
        raise ComplexError("symmetry group collapses in the quotient")
    for him in h_images:
        for k in fiber:
            if q.mul(q.mul(him, k), q.inv(him)) not in fiber_set:
                raise HNotNormalizing(f"{q.label(him)} does not normalize the fiber")

    orbits: dict[int, list[QuotientOrbit]] = {}
    n_cells: dict[int, int] = {}
    for p in cw.dims():
        orbit_list = []
        offset = 0
        for cell in cw.cells[p]:
            stab_images = []
            seen_stab = {}
            for w, sgn in zip(cell.stabilizer, cell.signs):
                im = qmap.evaluate(w)
                if im in seen_stab:
                    raise NotFree(f"stabilizer of {cell.label} collapses "
                                  f"in the quotient")
                seen_stab[im] = sgn
                stab_images.append((im, sgn))
            # freeness: no conjugate of a nontrivial stabilizer image may
            # meet the fiber
            for u in range(q.order):
                ui = q.inv(u)
                for im, _ in stab_images[1:]:
                    if q.mul(q.mul(ui, im), u) in fiber_set:
                        raise NotFree(
                            f"{cell.label}: stabilizer survives at coset "
                            f"{q.label(u)}")
            dec: list[tuple[int, int] | None] = [None] * q.order
            reps = []
            for u in range(q.order):
                if dec[u] is not None:
                    continue
                cell_id = len(reps)
                reps.append(u)
                for im, sgn in stab_images:
                    su = q.mul(im, u)
                    for k in fiber:
                        v = q.mul(su, k)
                        if dec[v] is None:
                            dec[v] = (cell_id, sgn)
                        elif dec[v] != (cell_id, sgn):
                            raise NotFree(f"{cell.label}: sign collision in "
                                          f"the quotient")
            orbit_list.append(QuotientOrbit(cell.label, stab_images, reps,
                                            offset, dec))
            offset += len(reps)
        orbits[p] = orbit_list
        n_cells[p] = offset

    boundaries: dict[int, tuple[int, list[SparseCol]]] = {}
    for p, mat in cw.boundaries.items():
        # push entries through the quotient map, collecting coefficients
        collected: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), terms in mat.entries.items():
            target: dict[int, Fraction] = {}
            for w, c in terms.items():
                g = qmap.evaluate(w)
                nv = target.get(g, Fraction(0)) + Fraction(c)
                if nv:
                    target[g] = nv
                else:
                    target.pop(g, None)
            if target:
                collected[(i, j)] = target
        cols: list[SparseCol] = []
        for j, src_orbit in enumerate(orbits[p]):
            for u in src_orbit.cell_reps:
                col: SparseCol = {}
                for i, tgt_orbit in enumerate(orbits[p - 1]):
                    terms = collected.get((i, j))
                    if not terms:
                        continue
                    for g, c in terms.items():
                        v = q.mul(g, u)
                        cell_id, sgn = tgt_orbit.dec[v]
                        r = tgt_orbit.offset + cell_id
                        nv = col.get(r, Fraction(0)) + sgn * c
                        if nv:
                            col[r] = nv
                        else:
                            col.pop(r, None)
                cols.append(col)
        boundaries[p] = (n_cells[p - 1], cols)

    actions = {}
    if h_abs is not None:
        for h_local, him in enumerate(h_images):
            for p in cw.dims():
                perm = np.empty(n_cells[p], dtype=np.int64)
                signs = np.empty(n_cells[p], dtype=np.int64)
                for orbit in orbits[p]:
                    for cell_id, u in enumerate(orbit.cell_reps):
                        v = q.mul(u, him)
                        tgt, sgn = orbit.dec[v]
                        perm[orbit.offset + cell_id] = orbit.offset + tgt
                        signs[orbit.offset + cell_id] = sgn
                actions[(h_local, p)] = (perm, signs)

    return QuotientComplex(index=gamma.index, orbits=orbits, h_group=h_abs,
                           h_images=h_images, n_cells=n_cells,
                           boundaries=boundaries, actions=actions)


def homology(qc: FiniteChainComplex) -> dict[int, int]:
    return qc.betti_numbers()


def action_trace(qc: FiniteChainComplex, h: int, p: int) -> Fraction:
    return qc.action_trace(h, p)


def multiplicities(qc: FiniteChainComplex, table: CharacterTable) -> HomologyReport:
    return qc.multiplicities(table)


def export_boundaries_csv(qc: FiniteChainComplex, directory):
    """Dense CSV dumps of the boundary matrices, one file per degree."""
    import csv
    from pathlib import Path
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for p, (nrows, cols) in sorted(qc.boundaries.items()):
        path = directory / f"boundary_{p}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for r in range(nrows):
                writer.writerow([str(cols[j].get(r, Fraction(0)))
                                 for j in range(len(cols))])
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Finite-group cross-check
# ---------------------------------------------------------------------------

def _left_regular_rep(group: FiniteGroup) -> PermutationRep:
    return PermutationRep(group, lambda g, y: group.mul(group.inv(g), y),
                          group.order)


def materialize_regular(group: FiniteGroup,
                        boundaries: dict[int, FiniteAlgebraMatrix],
                        h_sub: FiniteSubgroup) -> FiniteChainComplex:
    """Free complex over the group algebra as a plain rational complex, the
    subgroup acting by right translation on each group-ring coordinate."""
    rho = _left_regular_rep(group)
    n_cells = {}
    sizes = {}
    for p, mat in boundaries.items():
        sizes[p] = mat.cols
        sizes[p - 1] = mat.rows
    for p, n_mod in sizes.items():
        n_cells[p] = n_mod * group.order
    cols = {}
    for p, mat in boundaries.items():
        nrows, columns = operator_columns_exact(mat, rho)
        cols[p] = (nrows, columns)
    h_abs, to_local = h_sub.abstract_group()
    order = group.order
    actions = {}
    for h_local, h_parent in enumerate(h_sub.members):
        for p, n_mod in sizes.items():
            perm = np.empty(n_mod * order, dtype=np.int64)
            for x in range(order):
                dest = group.mul(x, h_parent)
                for i in range(n_mod):
                    perm[i * order + x] = i * order + dest
            actions[(h_local, p)] = (perm, np.ones(n_mod * order, dtype=np.int64))
    return FiniteChainComplex(n_cells, cols, sym_group=h_abs, actions=actions)


def finite_group_crosscheck(group: FiniteGroup, h_sub: FiniteSubgroup,
                            boundaries: dict[int, FiniteAlgebraMatrix],
                            table: CharacterTable, tol: float = 1e-7) -> dict:
    """Two independent routes to the normalized multiplicities of a free
    complex over a finite group algebra: twisted Betti numbers under the
    induced representation versus homology multiplicities over the subgroup.

    Returns {(p, chi_idx): (betti_route, homology_route)} and raises when
    the routes disagree beyond tolerance.
    """
    h_abs, _ = h_sub.abstract_group()
    if table.group is not h_abs:
        raise ComplexError("table must belong to the abstract subgroup")
    sizes = {}
    for p, mat in boundaries.items():
        sizes[p] = mat.cols
        sizes[p - 1] = mat.rows
    complex_b = materialize_regular(group, boundaries, h_sub)
    report = complex_b.multiplicities(table)
    out = {}
    for chi_idx, chi in enumerate(table.irreducibles):
        rho_h = irreducible_rep(h_abs, chi)
        rho = induced_rep(group, h_sub, rho_h)
        for p in sorted(sizes):
            betti_phi = phi_betti(boundaries.get(p), boundaries.get(p + 1), rho)
            lhs = float(betti_phi) * chi.degree / h_sub.order
            rhs = report.multiplicities[(p, chi_idx)] / group.order
            if abs(lhs - rhs) > tol:
                raise CrossCheckFailed(
                    f"deg {p}, irreducible {chi_idx}: {lhs} vs {rhs}")
            out[(p, chi_idx)] = (lhs, rhs)
    return out
