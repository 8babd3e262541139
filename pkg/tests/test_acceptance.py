"""Acceptance gate: one test per criterion, each printing a pass/fail line
and enforcing the stated tolerances and runtime budgets."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from l2mult import (FreeAbelianGroup, FreeGroup, GroupRingMatrix,
                    QuotientMap, abelian_group, character_table, cyclic_group,
                    dihedral_group, finite_group_crosscheck, from_generators,
                    luck_bound_check, push_matrix, rank_nullity, regular_rep,
                    symmetric_group)
from l2mult.runner import (ExperimentConfig, ExperimentContext,
                           farber_diagnostic, rel_farber_diagnostic, run)
from l2mult.spectral import WordPermRep
from l2mult.word_groups import FiniteAlgebraMatrix

import suites
from conftest import SEED


def _report(number, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number}: {status} {detail}")
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def dinf_run():
    cfg = ExperimentConfig.from_json({
        "group": {"family": "dihedral_infinite"},
        "complex": "line_dinf",
        "chain": {"template": "dihedral", "orders": [2, 4, 8, 16, 32]},
        "h_words": ["1", "b"],
        "degrees": [0, 1],
        "b2": {"0": "0", "1": "0"},
        "infinite_centralizers": True,
        "probe_words": ["a", "b"],
    })
    start = time.perf_counter()
    records, report = run(cfg)
    return records, report, time.perf_counter() - start


@pytest.fixture(scope="module")
def semidirect_run():
    cfg = ExperimentConfig.from_json({
        "group": {"family": "free_by_finite", "rank": 2, "h": "cyclic:2",
                  "action": {"0": ["a'", "b'"]}},
        "complex": "tree_semidirect",
        "chain": {"template": "semidirect_mod", "base": 2, "depth": 5},
        "h_words": ["1", "c"],
        "degrees": [0, 1],
        "b2": {"1": "1"},
        "infinite_centralizers": True,
        "normalize_per_h": True,
        "probe_words": ["a", "c"],
    })
    start = time.perf_counter()
    records, report = run(cfg)
    return records, report, time.perf_counter() - start


def test_criterion_1_integer_approximation():
    start = time.perf_counter()
    z = FreeAbelianGroup(1)
    a = GroupRingMatrix.from_strings(z, [["1 + -1*a"]])
    gram = a.adjoint() @ a
    ok = True
    for n in range(1, 11):
        order = 2 ** n
        target = cyclic_group(order)
        q = QuotientMap(z, target, [1])
        rho = regular_rep(target)
        _, null_gram = rank_nullity(push_matrix(q, gram), rho)
        rank_a, null_a = rank_nullity(push_matrix(q, a), rho)
        ok &= null_gram == Fraction(1, order)
        ok &= null_a == Fraction(1, order)
        ok &= rank_a == 1 - Fraction(1, order)
    # limits: nullity -> 0 and rank -> 1 (the regular character values)
    ok &= null_a == Fraction(1, 1024) and rank_a == Fraction(1023, 1024)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    _report(1, ok, f"nullity 1/2^n exact along 10 levels ({elapsed:.2f}s)")


def test_criterion_2_determinant_integrality():
    start = time.perf_counter()
    z = FreeAbelianGroup(1)
    a = GroupRingMatrix.from_strings(z, [["1 + -1*a"]])
    gram = a.adjoint() @ a
    ok = True
    for n in range(1, 65):
        target = cyclic_group(n)
        rho = regular_rep(target)
        rep = luck_bound_check(push_matrix(QuotientMap(z, target, [1 % n]),
                                           gram), rho, 1)
        expected = 1 if n == 1 else n * n
        ok &= rep.char_trailing == expected
        ok &= abs(rep.det ** n - expected) < 1e-6 * max(1, expected)

    rng = random.Random(SEED + 200)
    f2 = FreeGroup(2)

    def random_word():
        letters = "".join(rng.choice(["a", "a'", "b", "b'"])
                          for _ in range(rng.randint(0, 4)))
        return f2.word(letters)

    checked = 0
    for _ in range(50):
        degree = rng.randint(3, 200)
        n_mat = 1 if degree > 100 else rng.choice([1, 2])
        entries = {}
        for i in range(n_mat):
            for j in range(n_mat):
                terms = {}
                for _ in range(rng.randint(1, 2)):
                    w = random_word()
                    terms[w] = terms.get(w, 0) + rng.choice([-1, 1])
                terms = {w: Fraction(c) for w, c in terms.items() if c}
                if terms:
                    entries[(i, j)] = terms
        mat = GroupRingMatrix(f2, n_mat, n_mat, entries)
        gram2 = mat.adjoint() @ mat
        rho = WordPermRep(f2, [rng.sample(range(degree), degree)
                               for _ in range(2)])
        rep = luck_bound_check(gram2, rho, 1)
        ok &= rep.det >= 1.0 - 1e-9
        ok &= rep.char_trailing is not None and rep.char_trailing >= 1
        # det^dim is certified integral by the exact characteristic
        # polynomial; compare the float route where it is representable
        if rep.integrality_gap is not None:
            ok &= rep.integrality_gap <= 1e-6 * max(1, rep.char_trailing)
        ok &= rep.log_gap is not None and rep.log_gap < 1e-8
        checked += 1
    elapsed = time.perf_counter() - start
    ok &= checked == 50 and elapsed < 30.0
    _report(2, ok, f"det^N = N^2 for N <= 64 and 50 permutation instances "
                   f"({elapsed:.1f}s)")


def _crosscheck_corpus():
    s3 = from_generators([(1, 0, 2), (0, 2, 1)])
    s4 = symmetric_group(4)
    d12 = dihedral_group(6)        # order 12
    d24 = dihedral_group(12)       # order 24
    d48 = dihedral_group(24)       # order 48
    k4 = abelian_group([2, 2])
    corpus = []

    def cayley(group):
        cols = [{0: Fraction(1), g: Fraction(-1)} for g in group.generators]
        entries = {(0, j): col for j, col in enumerate(cols)}
        return {1: FiniteAlgebraMatrix(group, 1, len(cols), entries)}

    def cyclic_line(group):
        return {1: FiniteAlgebraMatrix(group, 1, 1,
                                       {(0, 0): {0: Fraction(1),
                                                 1: Fraction(-1)}})}

    c4 = cyclic_group(4)
    corpus.append((c4, [0, 2], cyclic_line(c4)))
    c6 = cyclic_group(6)
    corpus.append((c6, [0, 3], cyclic_line(c6)))
    corpus.append((c6, [0, 2, 4], cyclic_line(c6)))
    c8 = cyclic_group(8)
    corpus.append((c8, [0, 4], cyclic_line(c8)))
    corpus.append((s3, sorted(s3.subgroup_generated(
        [s3.index_of((1, 0, 2))]).members), cayley(s3)))
    corpus.append((s3, sorted(s3.subgroup_generated(
        [s3.index_of((2, 0, 1))]).members), cayley(s3)))
    d4 = dihedral_group(4)
    corpus.append((d4, [0, d4.index_of((0, 1))], cayley(d4)))
    corpus.append((d4, [0, d4.index_of((2, 0))], cayley(d4)))
    corpus.append((k4, [0, k4.index_of((1, 0))], cayley(k4)))
    corpus.append((d12, [0, d12.index_of((0, 1))], cayley(d12)))
    corpus.append((s4, sorted(s4.subgroup_generated(
        [s4.generators[0]]).members), cayley(s4)))
    corpus.append((d24, [0, d24.index_of((6, 0)), d24.index_of((0, 1)),
                         d24.index_of((6, 1))], cayley(d24)))
    corpus.append((d48, [0, d48.index_of((12, 0))], cayley(d48)))
    # a three-term complex over a cyclic group: (1-g) after the norm element
    norm = {i: Fraction(1) for i in range(6)}
    three_term = {1: cyclic_line(c6)[1],
                  2: FiniteAlgebraMatrix(c6, 1, 1, {(0, 0): norm})}
    corpus.append((c6, [0, 3], three_term))
    return corpus


def test_criterion_3_finite_group_crosscheck():
    start = time.perf_counter()
    corpus = _crosscheck_corpus()
    instances = 0
    comparisons = 0
    ok = True
    for group, members, boundaries in corpus:
        sub = group.subgroup(members)
        h_abs, _ = sub.abstract_group()
        table = character_table(h_abs)
        out = finite_group_crosscheck(group, sub, boundaries, table, tol=1e-7)
        for (p, chi_idx), (lhs, rhs) in out.items():
            ok &= abs(lhs - rhs) <= 1e-7
            comparisons += 1
        instances += 1
    elapsed = time.perf_counter() - start
    ok &= instances >= 10 and elapsed < 60.0
    _report(3, ok, f"{instances} instances, {comparisons} comparisons agree "
                   f"within 1e-7 ({elapsed:.1f}s)")


def test_criterion_4_dinf_experiment(dinf_run):
    records, report, elapsed = dinf_run
    ok = all(r.error is None for r in records)
    for r in records:
        two_m = r.index
        ok &= (r.raw[(0, 0)], r.raw[(0, 1)], r.raw[(1, 0)], r.raw[(1, 1)]) \
            == (1, 0, 0, 1)
        for key, raw in r.raw.items():
            expected = Fraction(raw, two_m)
            ok &= r.normalized[key] == expected
            ok &= abs(r.normalized[key] - 0) <= Fraction(1, two_m)
    ok &= [r.index for r in records] == [4, 8, 16, 32, 64]
    ok &= elapsed < 5.0
    _report(4, ok, f"constant table (1,0,0,1), deviations <= 1/(2m) "
                   f"({elapsed:.2f}s)")


def test_criterion_5_farber_tables():
    start = time.perf_counter()
    cfg = ExperimentConfig.from_json({
        "group": {"family": "dihedral_infinite"},
        "complex": "line_dinf",
        "chain": {"template": "dihedral_reflection",
                  "orders": [2, 4, 8, 16, 32]},
        "h_words": ["1", "b"],
        "probe_words": [],
    })
    ctx = ExperimentContext(cfg)
    d = ctx.group
    ok = True
    # fixed-coset counts over the non-normal subgroups: m / gcd(2,m) / 0
    probes = {0: d.identity(), 1: d.word("a"), 2: d.word("aa"),
              4: d.word("aaaa"), "s": d.word("b"), "ts": d.word("ab"),
              "tts": d.word("aab")}
    rows = farber_diagnostic(ctx.chain, list(probes.values()))
    counts = {(r["level"], r["word"]): (r["count"], r["fraction"])
              for r in rows}
    orders = [2, 4, 8, 16, 32]
    for level, m in enumerate(orders):
        for k in (0, 1, 2, 4):
            word = str(probes[k])
            expected = m if k % m == 0 else 0
            ok &= counts[(level, word)] == (expected, Fraction(expected, m))
        for label, k in (("s", 0), ("ts", 1), ("tts", 2)):
            word = str(probes[label])
            g = math.gcd(2, m)
            expected = g if k % g == 0 else 0
            ok &= counts[(level, word)] == (expected, Fraction(expected, m))
    # relative Farber fails persistently at (1, s) on the non-normal chain
    rel = rel_farber_diagnostic(ctx.chain, ctx.h_elems,
                                [d.identity(), d.word("a")])
    persistent = [r["deviation"] for r in rel
                  if r["g"] == "1" and r["h"] == "b"]
    ok &= persistent == [1] * len(orders)
    # while the kernel chain's deviations decay like 1/m (value 2/m exactly)
    kernel_cfg = ExperimentConfig.from_json({
        "group": {"family": "dihedral_infinite"},
        "complex": "line_dinf",
        "chain": {"template": "dihedral", "orders": [2, 4, 8, 16, 32]},
        "h_words": ["1", "b"],
    })
    kernel_ctx = ExperimentContext(kernel_cfg)
    rel_kernel = rel_farber_diagnostic(kernel_ctx.chain, kernel_ctx.h_elems,
                                       [d2 := kernel_ctx.group.word("b")])
    at_ss = {r["level"]: r["deviation"] for r in rel_kernel
             if r["g"] == "b" and r["h"] == "b"}
    ok &= all(at_ss[level] == Fraction(2, m)
              for level, m in enumerate(orders))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5.0
    _report(5, ok, f"coset counts m/gcd(2,m)/0 exact; (1,s) deviation "
                   f"persists; kernel deviations = 2/m ({elapsed:.2f}s)")


def _involution_homology_oracle(n):
    """Brute-force multiplicities of the inversion action on H_1 of the
    Cayley multigraph of (Z/2^n)^2, built independently of the package."""
    mod = 2 ** n
    verts = [(x, y) for x in range(mod) for y in range(mod)]
    v_index = {v: i for i, v in enumerate(verts)}
    edges = []
    for v in verts:
        for e in ((1, 0), (0, 1)):
            w = ((v[0] + e[0]) % mod, (v[1] + e[1]) % mod)
            edges.append((v, w))
    boundary = np.zeros((len(verts), len(edges)))
    for j, (v, w) in enumerate(edges):
        boundary[v_index[w], j] += 1
        boundary[v_index[v], j] -= 1
    b1 = len(edges) - np.linalg.matrix_rank(boundary, tol=1e-9)
    # inversion: edge (v, v+e) -> (-v, -v-e) = reversed edge at -v-e
    act = np.zeros((len(edges), len(edges)))
    edge_index = {pair: j for j, pair in enumerate(edges)}
    for j, (v, w) in enumerate(edges):
        nv = ((-w[0]) % mod, (-w[1]) % mod)
        nw = ((-v[0]) % mod, (-v[1]) % mod)
        act[edge_index[(nv, nw)], j] = -1.0
    # trace on H_1 = trace on C_1 minus trace on im(boundary^T)
    u, s, _ = np.linalg.svd(boundary.T, full_matrices=False)
    cols = u[:, s > 1e-9]
    trace_h1 = np.trace(act) - np.trace(cols.T @ act @ cols)
    m_triv = (b1 + trace_h1) / 2
    m_sign = (b1 - trace_h1) / 2
    return int(round(m_triv)), int(round(m_sign))


def test_criterion_6_free_by_finite_experiment(semidirect_run):
    records, report, elapsed = semidirect_run
    ok = all(r.error is None for r in records)
    ok &= [r.norm_index for r in records] == [4, 16, 64, 256, 1024]
    half = Fraction(1, 2)
    for r in records:
        for chi_idx in (0, 1):
            value = r.normalized[(1, chi_idx)]
            ok &= abs(value - half) <= Fraction(2, r.norm_index)
    deepest = records[-1]
    for chi_idx in (0, 1):
        ok &= abs(float(deepest.normalized[(1, chi_idx)]) - 0.5) <= 0.002
    # independent brute-force oracle at shallow levels
    for n in (1, 2, 3):
        m_triv, m_sign = _involution_homology_oracle(n)
        rec = records[n - 1]
        ok &= rec.raw[(1, 0)] == m_triv and rec.raw[(1, 1)] == m_sign
    ok &= elapsed < 600.0
    _report(6, ok, f"normalized multiplicities within 2/N of 1/2, oracle "
                   f"agrees at n<=3 ({elapsed:.1f}s)")


def test_criterion_7_property_suites():
    start = time.perf_counter()
    counts = {fn.__name__: fn() for fn in suites.ALL_SUITES}
    ok = all(c >= 200 for c in counts.values())
    elapsed = time.perf_counter() - start
    _report(7, ok, f"{counts} ({elapsed:.1f}s)")


def test_criterion_8_trace_decay(dinf_run, semidirect_run):
    ok = True
    detail = []
    for name, (records, _, _) in (("dihedral", dinf_run),
                                  ("free_by_finite", semidirect_run)):
        for r in records:
            for (p, h), tr in r.traces.items():
                if h == 0:
                    continue
                bound_ok = abs(tr) * 1 <= 2          # |Tr|/N <= 2/N
                if not bound_ok:
                    detail.append(f"{name} level {r.level} p={p}: |Tr|={abs(tr)}")
                ok &= bound_ok
    _report(8, ok, "; ".join(detail) if detail else
            "|Tr(h|H_p)| <= 2 at every level")
