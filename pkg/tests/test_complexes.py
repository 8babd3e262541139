from fractions import Fraction

import pytest

from l2mult import (EquivariantCWData, FiniteIndexSubgroup, FreeAbelianGroup,
                    GroupRingMatrix, InfiniteDihedralGroup, OrbitCell,
                    QuotientMap, abelian_group, builtin_line_Dinf,
                    builtin_line_Z, builtin_rose_free,
                    builtin_tree_free_by_finite, character_table,
                    cw_from_json, cw_to_json, cyclic_group, dihedral_group,
                    export_boundaries_csv, finite_group_crosscheck,
                    from_generators, quotient_complex)
from l2mult.characters import UnsupportedFamily
from l2mult.complexes import ComplexError, NotFree
from l2mult.word_groups import FiniteAlgebraMatrix

S3_GENS = [(1, 0, 2), (0, 2, 1)]


def line_z_level(n):
    cw = builtin_line_Z()
    target = cyclic_group(n)
    q = QuotientMap(cw.group, target, [1 % n])
    return cw, FiniteIndexSubgroup(q, target.subgroup([0]))


def dinf_level(m, reflection=False):
    cw = builtin_line_Dinf()
    target = dihedral_group(m)
    q = QuotientMap(cw.group, target,
                    [target.index_of((1 % m, 0)), target.index_of((0, 1))])
    members = [0, target.index_of((0, 1))] if reflection else [0]
    return cw, FiniteIndexSubgroup(q, target.subgroup(members))


def test_line_z_quotient_is_cycle():
    from l2mult import homology
    for n in (1, 2, 8):
        cw, level = line_z_level(n)
        qc = quotient_complex(cw, level)
        assert qc.n_cells == {0: n, 1: n}
        assert homology(qc) == {0: 1, 1: 1}


def test_line_dinf_quotient_counts():
    for m in (2, 4, 8):
        cw, level = dinf_level(m)
        qc = quotient_complex(cw, level)
        # circle with 2m edges and 2m vertices in two m-orbits
        assert qc.n_cells == {0: 2 * m, 1: 2 * m}
        assert [len(o.cell_reps) for o in qc.orbits[0]] == [m, m]
        assert qc.betti_numbers() == {0: 1, 1: 1}


def test_line_dinf_reflection_fiber_not_free():
    cw, level = dinf_level(4, reflection=True)
    with pytest.raises(NotFree):
        quotient_complex(cw, level)


def test_rose_quotient_euler_characteristic():
    cw = builtin_rose_free(2)
    for moduli in ((2, 2), (4, 2), (4, 4)):
        target = abelian_group(moduli)
        units = []
        for i in range(2):
            e = [0, 0]
            e[i] = 1
            units.append(target.index_of(tuple(e)))
        level = FiniteIndexSubgroup(QuotientMap(cw.group, target, units),
                                    target.subgroup([0]))
        qc = quotient_complex(cw, level)
        n = target.order
        assert qc.n_cells == {0: n, 1: 2 * n}
        assert qc.betti_numbers() == {0: 1, 1: n + 1}


def test_dinf_action_traces_and_multiplicities():
    for m in (2, 4, 16):
        cw, level = dinf_level(m)
        d = cw.group
        qc = quotient_complex(cw, level,
                              h_words=[d.identity(), d.word("b")])
        table = character_table(qc.sym_group)
        report = qc.multiplicities(table)
        assert report.traces[(0, 1)] == 1
        assert report.traces[(1, 1)] == -1
        assert report.traces[(0, 0)] == report.betti[0] == 1
        # multiplicity table is independent of m: (1, 0, 0, 1)
        assert report.multiplicities == {(0, 0): 1, (0, 1): 0,
                                         (1, 0): 0, (1, 1): 1}
        # Hodge oracle agrees with the exact elimination route
        for p in (0, 1):
            for h in (0, 1):
                assert abs(qc.hodge_trace(h, p) -
                           float(qc.action_trace(h, p))) < 1e-8


def test_exact_traces_match_hodge_oracle_randomized():
    # many reflections and levels: the exact elimination route must agree
    # with the floating harmonic-projector route everywhere
    cases = 0
    for m in (2, 3, 4, 5, 6, 8, 12):
        for reflection in ("b", "ab", "aab"):
            cw, level = dinf_level(m)
            d = cw.group
            qc = quotient_complex(cw, level,
                                  h_words=[d.identity(), d.word(reflection)])
            for p in (0, 1):
                for h in range(qc.sym_group.order):
                    exact = float(qc.action_trace(h, p))
                    assert abs(qc.hodge_trace(h, p) - exact) < 1e-7
                    cases += 1
    assert cases == 7 * 3 * 4


def test_orbifold_euler_characteristic():
    cases = [dinf_level(2), dinf_level(4), dinf_level(8), line_z_level(6)]
    for cw, level in cases:
        qc = quotient_complex(cw, level)
        lhs = sum((-1) ** p * qc.n_cells[p] for p in qc.dims())
        rhs = Fraction(0)
        for p in cw.dims():
            for cell in cw.cells[p]:
                rhs += (-1) ** p * Fraction(1, len(cell.stabilizer))
        assert lhs == level.index * rhs


def test_tree_free_by_finite_quotients():
    c2 = cyclic_group(2)
    cw = builtin_tree_free_by_finite(2, c2, {1: ["a'", "b'"]})
    g = cw.group
    from l2mult import semidirect_vector_group
    for n in (1, 2):
        mod = 2 ** n
        target = semidirect_vector_group([mod] * 2, c2,
                                         {1: [[-1, 0], [0, -1]]})
        images = [target.index_of(((1, 0), 0)), target.index_of(((0, 1), 0)),
                  target.index_of(((0, 0), 1))]
        level = FiniteIndexSubgroup(QuotientMap(g, target, images),
                                    target.subgroup([0]))
        qc = quotient_complex(cw, level,
                              h_words=[g.identity(), g.word("c")])
        assert qc.n_cells == {0: 4 ** n, 1: 2 * 4 ** n}
        assert qc.betti_numbers() == {0: 1, 1: 4 ** n + 1}
        report = qc.multiplicities(character_table(qc.sym_group))
        assert report.traces[(1, 1)] == -3
        assert report.multiplicities[(1, 0)] + \
            report.multiplicities[(1, 1)] == 4 ** n + 1
        for p in (0, 1):
            for h in (0, 1):
                assert abs(qc.hodge_trace(h, p) -
                           float(qc.action_trace(h, p))) < 1e-7


def test_tree_rejects_non_monomial_action():
    s3 = from_generators(S3_GENS)
    # an order-2 automorphism of F_2 swapping the generators is monomial but
    # not diagonal; the built-in tree requires the diagonal form
    with pytest.raises((UnsupportedFamily, Exception)):
        builtin_tree_free_by_finite(2, cyclic_group(2), {1: ["b", "a"]})


def test_invariance_check_rejects_bad_boundary():
    d = InfiniteDihedralGroup()
    ident = d.identity()
    s = d.word("b")
    cells0 = [OrbitCell((ident, s), (1, 1), "v")]
    cells1 = [OrbitCell((ident,), (1,), "e")]
    # boundary t - 1 is not invariant under right multiplication by s on the
    # stabilizer side: e_v (t - 1) s != +- e_v (t - 1)
    bad = GroupRingMatrix(d, 1, 1, {(0, 0): {d.word("a"): Fraction(1),
                                             ident: Fraction(-1)}})
    cells1_stab = [OrbitCell((ident, s), (1, 1), "e")]
    with pytest.raises(ComplexError):
        EquivariantCWData(d, {0: cells0, 1: cells1_stab}, {1: bad})


def test_stabilizer_must_be_closed():
    d = InfiniteDihedralGroup()
    with pytest.raises(ComplexError):
        OrbitCell((d.identity(), d.word("a")), (1, 1), "v")   # t has infinite order
        EquivariantCWData(d, {0: [OrbitCell((d.identity(), d.word("a")),
                                            (1, 1), "v")]}, {})


def test_user_supplied_torus_complex():
    # two-dimensional input through the JSON format: the plane as a
    # Z^2-complex, quotients are n x n tori with betti (1, 2, 1)
    z2 = FreeAbelianGroup(2)
    data = {
        "cells": {
            "0": [{"stabilizer": ["1"], "signs": [1], "label": "v"}],
            "1": [{"stabilizer": ["1"], "signs": [1], "label": "ea"},
                  {"stabilizer": ["1"], "signs": [1], "label": "eb"}],
            "2": [{"stabilizer": ["1"], "signs": [1], "label": "f"}],
        },
        "boundaries": {
            "1": [["1*1 + -1*a", "1*1 + -1*b"]],
            "2": [["1*1 + -1*b"], ["-1*1 + 1*a"]],
        },
    }
    cw = cw_from_json(z2, data)
    for n in (2, 3, 4):
        target = abelian_group([n, n])
        units = [target.index_of((1, 0)), target.index_of((0, 1))]
        level = FiniteIndexSubgroup(QuotientMap(z2, target, units),
                                    target.subgroup([0]))
        qc = quotient_complex(cw, level)
        assert qc.n_cells == {0: n * n, 1: 2 * n * n, 2: n * n}
        assert qc.betti_numbers() == {0: 1, 1: 2, 2: 1}
        euler = sum((-1) ** p * qc.n_cells[p] for p in qc.dims())
        assert euler == 0


def test_cw_json_round_trip():
    cw = builtin_line_Dinf()
    data = cw_to_json(cw)
    again = cw_from_json(cw.group, data)
    assert cw_to_json(again) == data


def test_export_boundaries_csv(tmp_path):
    cw, level = line_z_level(4)
    qc = quotient_complex(cw, level)
    paths = export_boundaries_csv(qc, tmp_path)
    assert len(paths) == 1
    rows = [line.split(",") for line in paths[0].read_text().splitlines()]
    assert len(rows) == 4 and len(rows[0]) == 4
    colsum = [sum(Fraction(rows[r][c]) for r in range(4)) for c in range(4)]
    assert colsum == [0, 0, 0, 0]


def test_action_commutes_validation():
    # corrupting an action sign must be caught
    cw, level = dinf_level(4)
    d = cw.group
    qc = quotient_complex(cw, level, h_words=[d.identity(), d.word("b")])
    from l2mult.complexes import FiniteChainComplex
    actions = dict(qc.actions)
    perm, signs = actions[(1, 1)]
    bad_signs = signs.copy()
    bad_signs[0] = -bad_signs[0]
    actions[(1, 1)] = (perm, bad_signs)
    with pytest.raises(ComplexError):
        FiniteChainComplex(qc.n_cells, qc.boundaries, qc.sym_group, actions)


def _free_complex(group, columns):
    """1 x k boundary over the group algebra from element-index columns."""
    entries = {}
    for j, terms in enumerate(columns):
        entries[(0, j)] = {g: Fraction(c) for g, c in terms.items()}
    return FiniteAlgebraMatrix(group, 1, len(columns), entries)


def test_finite_group_crosscheck_cyclic4():
    g = cyclic_group(4)
    sub = g.subgroup([0, 2])
    h_abs, _ = sub.abstract_group()
    table = character_table(h_abs)
    boundary = _free_complex(g, [{0: 1, 1: -1}])
    out = finite_group_crosscheck(g, sub, {1: boundary}, table)
    for (p, chi_idx), (lhs, rhs) in out.items():
        assert abs(lhs - rhs) < 1e-7


def test_finite_group_crosscheck_s3_cayley():
    g = from_generators(S3_GENS)
    boundary = _free_complex(g, [{0: 1, g.generators[0]: -1},
                                 {0: 1, g.generators[1]: -1}])
    for gen in (g.generators[0], g.index_of((2, 0, 1))):
        sub = g.subgroup_generated([gen])
        h_abs, _ = sub.abstract_group()
        table = character_table(h_abs)
        out = finite_group_crosscheck(g, sub, {1: boundary}, table)
        assert out


def test_finite_group_crosscheck_trivial_group_is_betti():
    g = cyclic_group(1)
    sub = g.subgroup([0])
    h_abs, _ = sub.abstract_group()
    table = character_table(h_abs)
    boundary = FiniteAlgebraMatrix(g, 1, 2, {(0, 0): {0: Fraction(1)}})
    out = finite_group_crosscheck(g, sub, {1: boundary}, table)
    # both routes equal the plain Betti numbers: b_0 = 0, b_1 = 1
    assert abs(out[(0, 0)][0] - 0) < 1e-9
    assert abs(out[(1, 0)][0] - 1) < 1e-9


def test_finite_group_crosscheck_three_term_cyclic():
    g = cyclic_group(6)
    d1 = _free_complex(g, [{0: 1, 1: -1}])
    norm = {i: Fraction(1) for i in range(6)}
    d2 = FiniteAlgebraMatrix(g, 1, 1, {(0, 0): norm})
    sub = g.subgroup([0, 3])
    h_abs, _ = sub.abstract_group()
    table = character_table(h_abs)
    out = finite_group_crosscheck(g, sub, {1: d1, 2: d2}, table)
    assert out
