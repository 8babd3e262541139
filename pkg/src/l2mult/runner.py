"""Approximation experiments along chains of finite quotients.

A run walks a quotient chain, builds each quotient complex, records raw and
normalized multiplicities plus symmetry traces, compares against predicted
limits, and attaches Farber / relative-Farber diagnostics.  Levels that fail
(stabilizers surviving, symmetry collapsing) are recorded and skipped.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .finite_groups import (FiniteGroup, FiniteSubgroup, abelian_group,
                            character_table, cyclic_group, dihedral_group,
                            hom_from_generator_images,
                            semidirect_vector_group)
from .characters import (ind_finite, UnsupportedFamily, builtin_conjugate,
                         builtin_centralizer_index, finite_word_subgroup)
from .complexes import (EquivariantCWData, NotFree, ComplexError,
                        builtin_line_Dinf, builtin_line_Z, builtin_rose_free,
                        builtin_tree_free_by_finite, cw_from_json,
                        quotient_complex)
from .word_groups import (BuiltinGroup, FiniteIndexSubgroup, FreeAbelianGroup,
                          FreeGroup, FreeByFiniteGroup, InfiniteDihedralGroup,
                          QuotientChain, QuotientMap, Word, WordGroupError,
                          intersection_heuristic, validate_chain)
from .finite_groups import NotIntegral
from .characters import HNotNormalizing


class ConfigInvalid(Exception):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 \
        else str(x.numerator)


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    group: dict
    complex: object
    chain: dict
    h_words: list[str] = field(default_factory=lambda: ["1"])
    irreducibles: object = "all"
    degrees: list[int] = field(default_factory=lambda: [0, 1])
    b2: dict[int, Fraction] = field(default_factory=dict)
    infinite_centralizers: bool = False
    normalize_per_h: bool = False
    probe_words: list[str] = field(default_factory=list)
    char_convergence: int | None = None
    out: str | None = None
    format: str = "both"

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        try:
            kwargs = dict(data)
            if "b2" in kwargs:
                kwargs["b2"] = {int(k): _frac(v)
                                for k, v in kwargs["b2"].items()}
            cfg = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc
        if cfg.format not in ("csv", "json", "both"):
            raise ConfigInvalid(f"unknown format {cfg.format!r}")
        return cfg

    def to_json(self) -> dict:
        out = {
            "group": self.group, "complex": self.complex, "chain": self.chain,
            "h_words": self.h_words, "irreducibles": self.irreducibles,
            "degrees": self.degrees,
            "b2": {str(k): _frac_str(v) for k, v in self.b2.items()},
            "infinite_centralizers": self.infinite_centralizers,
            "normalize_per_h": self.normalize_per_h,
            "probe_words": self.probe_words,
            "char_convergence": self.char_convergence,
            "out": self.out, "format": self.format,
        }
        return out


def build_group(spec: dict) -> BuiltinGroup:
    family = spec.get("family")
    if family == "free":
        return FreeGroup(int(spec.get("rank", 2)))
    if family == "free_abelian":
        return FreeAbelianGroup(int(spec.get("rank", 1)))
    if family == "dihedral_infinite":
        return InfiniteDihedralGroup()
    if family == "free_by_finite":
        h_spec = spec.get("h", "cyclic:2")
        h_group = finite_group_from_spec(h_spec)
        rank = int(spec.get("rank", 2))
        raw_action = spec.get("action")
        if raw_action is None:
            raise ConfigInvalid("free_by_finite needs an action")
        action = {h_group.generators[int(k)]: v
                  for k, v in raw_action.items()}
        return FreeByFiniteGroup(rank, h_group, action)
    raise ConfigInvalid(f"unknown group family {family!r}")


def finite_group_from_spec(spec) -> FiniteGroup:
    if isinstance(spec, str):
        if spec.startswith("cyclic:"):
            return cyclic_group(int(spec.split(":")[1]))
        if spec.startswith("dihedral:"):
            return dihedral_group(int(spec.split(":")[1]))
        if spec.startswith("abelian:"):
            return abelian_group([int(x) for x in spec.split(":")[1].split(",")])
        if spec.startswith("sym:"):
            from .finite_groups import symmetric_group
            return symmetric_group(int(spec.split(":")[1]))
        if spec.startswith("perm:"):
            from .finite_groups import from_generators
            return from_generators(json.loads(spec.split(":", 1)[1]))
    raise ConfigInvalid(f"unknown finite group spec {spec!r}")


def build_complex(spec, group: BuiltinGroup) -> EquivariantCWData:
    if isinstance(spec, dict) and "file" in spec:
        with open(spec["file"]) as fh:
            return cw_from_json(group, json.load(fh))
    if isinstance(spec, dict) and "cells" in spec:
        return cw_from_json(group, spec)
    if spec == "line_z":
        if not isinstance(group, FreeAbelianGroup):
            raise ConfigInvalid("line_z needs the free abelian group")
        return builtin_line_Z()
    if spec == "line_dinf":
        if not isinstance(group, InfiniteDihedralGroup):
            raise ConfigInvalid("line_dinf needs the infinite dihedral group")
        return builtin_line_Dinf()
    if spec == "rose":
        if not isinstance(group, FreeGroup):
            raise ConfigInvalid("rose needs a free group")
        return builtin_rose_free(group.rank)
    if spec == "tree_semidirect":
        if not isinstance(group, FreeByFiniteGroup):
            raise ConfigInvalid("tree_semidirect needs a free-by-finite group")
        action = {g: [str(Word(group.free, img)) for img in group._aut[g]]
                  for g in group.h_group.generators}
        return builtin_tree_free_by_finite(group.rank, group.h_group, action)
    raise ConfigInvalid(f"unknown complex spec {spec!r}")


def _build_complex_on(group, spec):
    cw = build_complex(spec, group)
    if cw.group is group:
        return cw
    # builders create their own group instance; rebuild words on ours
    return _rebase_cw(cw, group)


def _rebase_cw(cw: EquivariantCWData, group: BuiltinGroup) -> EquivariantCWData:
    from .complexes import OrbitCell
    from .word_groups import GroupRingMatrix
    cells = {p: [OrbitCell(tuple(group.word(str(w)) for w in c.stabilizer),
                           c.signs, c.label) for c in lst]
             for p, lst in cw.cells.items()}
    boundaries = {}
    for p, mat in cw.boundaries.items():
        entries = {key: {group.word(str(w)): c for w, c in terms.items()}
                   for key, terms in mat.entries.items()}
        boundaries[p] = GroupRingMatrix(group, mat.rows, mat.cols, entries)
    return EquivariantCWData(group, cells, boundaries)


def build_chain(spec: dict, group: BuiltinGroup) -> QuotientChain:
    template = spec.get("template")
    if template == "cyclic_mod":
        return _chain_cyclic(group, int(spec.get("base", 2)),
                             int(spec.get("depth", 5)))
    if template == "abelianized_mod":
        return _chain_abelianized(group, int(spec.get("base", 2)),
                                  int(spec.get("depth", 3)))
    if template in ("dihedral", "dihedral_reflection"):
        orders = [int(m) for m in spec.get("orders", [2, 4, 8, 16])]
        return _chain_dihedral(group, orders,
                               reflection=template == "dihedral_reflection")
    if template == "semidirect_mod":
        return _chain_semidirect(group, int(spec.get("base", 2)),
                                 int(spec.get("depth", 3)))
    raise ConfigInvalid(f"unknown chain template {template!r}")


def _chain_cyclic(group, base, depth) -> QuotientChain:
    if not isinstance(group, FreeAbelianGroup) or group.rank != 1:
        raise ConfigInvalid("cyclic_mod chains need FreeAbelian(1)")
    levels, connectors = [], []
    prev = None
    for n in range(1, depth + 1):
        target = cyclic_group(base ** n)
        qmap = QuotientMap(group, target, [1])
        levels.append(FiniteIndexSubgroup(qmap, target.subgroup([0])))
        if prev is not None:
            connectors.append(hom_from_generator_images(
                target, prev, {1: 1 % prev.order}))
        prev = target
    return QuotientChain(levels, connectors)


def _chain_abelianized(group, base, depth) -> QuotientChain:
    if not isinstance(group, FreeGroup):
        raise ConfigInvalid("abelianized_mod chains need a free group")
    r = group.rank
    levels, connectors = [], []
    prev = None
    for n in range(1, depth + 1):
        target = abelian_group([base ** n] * r)
        units = []
        for i in range(r):
            e = [0] * r
            e[i] = 1
            units.append(target.index_of(tuple(e)))
        qmap = QuotientMap(group, target, units)
        levels.append(FiniteIndexSubgroup(qmap, target.subgroup([0])))
        if prev is not None:
            gen_map = {}
            for i, g in enumerate(target.generators):
                e = [0] * r
                e[i] = 1 % prev_mod
                gen_map[g] = prev.index_of(tuple(e))
            connectors.append(hom_from_generator_images(target, prev, gen_map))
        prev = target
        prev_mod = base ** n
    return QuotientChain(levels, connectors)


def _chain_dihedral(group, orders, reflection=False) -> QuotientChain:
    if not isinstance(group, InfiniteDihedralGroup):
        raise ConfigInvalid("dihedral chains need the infinite dihedral group")
    for a, b in zip(orders, orders[1:]):
        if b % a:
            raise ConfigInvalid("dihedral chain orders must divide each other")
    levels, connectors = [], []
    prev = None
    for m in orders:
        target = dihedral_group(m)
        t_img = target.index_of((1 % m, 0))
        s_img = target.index_of((0, 1))
        qmap = QuotientMap(group, target, [t_img, s_img])
        if reflection:
            fiber = target.subgroup([0, target.index_of((0, 1))])
        else:
            fiber = target.subgroup([0])
        levels.append(FiniteIndexSubgroup(qmap, fiber))
        if prev is not None:
            m_prev = prev_m
            gen_map = {target.index_of((1 % m, 0)): prev.index_of((1 % m_prev, 0)),
                       target.index_of((0, 1)): prev.index_of((0, 1))}
            connectors.append(hom_from_generator_images(target, prev, gen_map))
        prev, prev_m = target, m
    return QuotientChain(levels, connectors)


def _chain_semidirect(group, base, depth) -> QuotientChain:
    if not isinstance(group, FreeByFiniteGroup):
        raise ConfigInvalid("semidirect_mod chains need a free-by-finite group")
    r = group.rank
    h = group.h_group
    levels, connectors = [], []
    prev = None
    for n in range(1, depth + 1):
        mod = base ** n
        mats = {}
        for g in h.generators:
            img_words = group._aut[g]
            mat = []
            for i in range(r):
                row = [0] * r
                for gen_idx, exp in img_words[i]:
                    row[gen_idx] += exp
                mat.append(row)
            # images of generators under h give the ROWS of the action of h
            # on the abelianization; transpose to act on column vectors
            mats[g] = [[mat[j][i] % mod for j in range(r)] for i in range(r)]
        target = semidirect_vector_group([mod] * r, h, mats)
        images = []
        zero = tuple([0] * r)
        for i in range(r):
            e = [0] * r
            e[i] = 1
            images.append(target.index_of((tuple(e), 0)))
        for g in h.generators:
            images.append(target.index_of((zero, g)))
        qmap = QuotientMap(group, target, images)
        levels.append(FiniteIndexSubgroup(qmap, target.subgroup([0])))
        if prev is not None:
            gen_map = {}
            for i, g in enumerate(target.generators):
                raw = target.elements[g]
                vec, hh = raw
                prev_raw = (tuple(x % prev_mod for x in vec), hh)
                gen_map[g] = prev.index_of(prev_raw)
            connectors.append(hom_from_generator_images(target, prev, gen_map))
        prev, prev_mod = target, mod
    return QuotientChain(levels, connectors)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def _fiber_coset_reps(level: FiniteIndexSubgroup) -> list[int]:
    q = level.via.target
    fiber = level.fiber.members
    reps, covered = [], set()
    for f in range(q.order):
        if f not in covered:
            reps.append(f)
            covered.update(q.mul(f, k) for k in fiber)
    return reps


def farber_diagnostic(chain: QuotientChain, probe_words: list[Word]):
    """Fixed-coset fractions |{f : g in f Gamma f^-1}| / [G:Gamma], exact."""
    rows = []
    for n, level in enumerate(chain.levels):
        q = level.via.target
        fiber = set(level.fiber.members)
        reps = _fiber_coset_reps(level)
        for w in probe_words:
            g = level.via.evaluate(w)
            count = sum(1 for f in reps
                        if q.mul(q.mul(q.inv(f), g), f) in fiber)
            rows.append({"level": n, "word": str(w), "count": count,
                         "fraction": Fraction(count, len(reps))})
    return rows


def i_limit_value(g_word: Word, h_word: Word,
                  assert_infinite: bool = False) -> Fraction:
    """Limit biset character i_G(g, h) through the built-in oracles."""
    if assert_infinite:
        if h_word.is_identity():
            return Fraction(1) if g_word.is_identity() else Fraction(0)
        return Fraction(0)
    if not builtin_conjugate(g_word, h_word):
        return Fraction(0)
    ci = builtin_centralizer_index(h_word)
    return Fraction(0) if ci is None else Fraction(1, ci)


def rel_farber_diagnostic(chain: QuotientChain, h_words: list[Word],
                          probe_words: list[Word],
                          assert_infinite: bool = False):
    """Deviation of the biset characters of G/Gamma_n from the limit i_G."""
    h_abs, h_elems = finite_word_subgroup(h_words)
    rows = []
    for n, level in enumerate(chain.levels):
        q = level.via.target
        fiber = list(level.fiber.members)
        fiber_set = set(fiber)
        h_images = [level.via.evaluate(w) for w in h_elems]
        for him in h_images:
            for k in fiber:
                if q.mul(q.mul(him, k), q.inv(him)) not in fiber_set:
                    raise HNotNormalizing(
                        f"level {n}: H does not normalize the fiber")
        reps = _fiber_coset_reps(level)
        for w in probe_words:
            g = level.via.evaluate(w)
            for h_word, him in zip(h_elems, h_images):
                coset = {q.mul(him, k) for k in fiber}
                count = sum(1 for f in reps
                            if q.mul(q.mul(q.inv(f), g), f) in coset)
                value = Fraction(count, len(reps))
                limit = i_limit_value(w, h_word, assert_infinite)
                rows.append({"level": n, "g": str(w), "h": str(h_word),
                             "value": value, "limit": limit,
                             "deviation": abs(value - limit)})
    return rows


def centralizer_growth(chain: QuotientChain, word: Word) -> list[int]:
    """[Q_n : C(image of the word)] per level."""
    out = []
    for level in chain.levels:
        q = level.via.target
        out.append(q.conjugacy_class_size(level.via.evaluate(word)))
    return out


# ---------------------------------------------------------------------------
# Run
# ---------------------------------------------------------------------------

@dataclass
class LevelRecord:
    level: int
    index: int
    norm_index: int
    betti: dict[int, int] = field(default_factory=dict)
    raw: dict[tuple[int, int], int] = field(default_factory=dict)
    normalized: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    traces: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    seconds: float = 0.0
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "level": self.level, "index": self.index,
            "norm_index": self.norm_index,
            "betti": {str(p): b for p, b in self.betti.items()},
            "raw": {f"{p},{c}": m for (p, c), m in self.raw.items()},
            "normalized": {f"{p},{c}": _frac_str(v)
                           for (p, c), v in self.normalized.items()},
            "traces": {f"{p},{h}": _frac_str(v)
                       for (p, h), v in self.traces.items()},
            "seconds": round(self.seconds, 6),
            "error": self.error,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LevelRecord":
        def keypair(s):
            a, b = s.split(",")
            return int(a), int(b)
        return cls(
            level=data["level"], index=data["index"],
            norm_index=data["norm_index"],
            betti={int(p): b for p, b in data["betti"].items()},
            raw={keypair(k): v for k, v in data["raw"].items()},
            normalized={keypair(k): _frac(v)
                        for k, v in data["normalized"].items()},
            traces={keypair(k): _frac(v) for k, v in data["traces"].items()},
            seconds=data.get("seconds", 0.0), error=data.get("error"),
        )


class ExperimentContext:
    """Everything reconstructible from a config: group, complex, chain, H."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        try:
            self.group = build_group(config.group)
            self.cw = _build_complex_on(self.group, config.complex)
            self.chain = build_chain(config.chain, self.group)
        except (WordGroupError, ComplexError) as exc:
            raise ConfigInvalid(str(exc)) from exc
        validate_chain(self.chain)
        words = [self.group.word(w) for w in config.h_words]
        self.h_abs, self.h_elems = finite_word_subgroup(words)
        self.table = character_table(self.h_abs)
        if config.irreducibles == "all":
            self.chi_indices = list(range(len(self.table.irreducibles)))
        else:
            self.chi_indices = [int(i) for i in config.irreducibles]
            for i in self.chi_indices:
                if not 0 <= i < len(self.table.irreducibles):
                    raise ConfigInvalid(f"no irreducible {i}")
        self.degrees = list(config.degrees)
        for p in self.degrees:
            if p not in self.cw.cells:
                raise ConfigInvalid(f"complex has no cells in degree {p}")
        self.probes = [self.group.word(w) for w in config.probe_words]

    def norm_index(self, level: FiniteIndexSubgroup) -> int:
        n = level.index
        if self.config.normalize_per_h:
            if n % self.h_abs.order:
                raise ConfigInvalid("index not divisible by |H|")
            n //= self.h_abs.order
        return n

    def prediction(self, p: int, chi_idx: int) -> Fraction | None:
        cfg = self.config
        if not cfg.infinite_centralizers or p not in cfg.b2:
            return None
        chi = self.table.irreducibles[chi_idx]
        return Fraction(chi.degree, self.h_abs.order) * cfg.b2[p]

    def run_level(self, n: int) -> LevelRecord:
        level = self.chain.levels[n]
        record = LevelRecord(level=n, index=level.index,
                             norm_index=self.norm_index(level))
        start = time.perf_counter()
        try:
            h_images = [level.via.evaluate(w) for w in self.h_elems]
            if len(set(h_images)) != self.h_abs.order:
                raise ComplexError("symmetry group collapses at this level")
            qc = quotient_complex(self.cw, level,
                                  h_ctx=(self.h_abs, self.h_elems))
            report = qc.multiplicities(self.table)
            for p in self.degrees:
                record.betti[p] = report.betti[p]
                for c in self.chi_indices:
                    m = report.multiplicities[(p, c)]
                    record.raw[(p, c)] = m
                    record.normalized[(p, c)] = Fraction(m, record.norm_index)
                for h in range(self.h_abs.order):
                    record.traces[(p, h)] = report.traces[(p, h)]
        except (NotFree, HNotNormalizing, ComplexError, NotIntegral) as exc:
            record.error = f"{type(exc).__name__}: {exc}"
        record.seconds = time.perf_counter() - start
        return record


def run(config: ExperimentConfig, levels: int | None = None,
        parallel: int = 1):
    """Execute an experiment; returns (records, report_dict)."""
    ctx = ExperimentContext(config)
    n_levels = len(ctx.chain.levels)
    if levels is not None:
        n_levels = min(n_levels, levels)
    indices = list(range(n_levels))
    if parallel > 1:
        from concurrent.futures import ProcessPoolExecutor
        payload = json.dumps(config.to_json())
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            raw = list(pool.map(_level_worker, [(payload, n) for n in indices]))
        records = [LevelRecord.from_json(r) for r in raw]
    else:
        records = [ctx.run_level(n) for n in indices]
    report = assemble_report(ctx, records)
    return records, report


def _level_worker(args):
    payload, n = args
    config = ExperimentConfig.from_json(json.loads(payload))
    ctx = ExperimentContext(config)
    return ctx.run_level(n).to_json()


def assemble_report(ctx: ExperimentContext, records: list[LevelRecord]) -> dict:
    """JSON-ready convergence report (fractions encoded as strings)."""
    cfg = ctx.config
    sequences = {}
    for p in ctx.degrees:
        for c in ctx.chi_indices:
            seq = [(_frac_str(r.normalized[(p, c)]) if (p, c) in r.normalized
                    else None) for r in records]
            pred = ctx.prediction(p, c)
            good = [r for r in records if (p, c) in r.normalized]
            final_dev = None
            if pred is not None and good:
                final_dev = float(abs(good[-1].normalized[(p, c)] - pred))
            sequences[f"{p},{c}"] = {
                "values": seq,
                "prediction": None if pred is None else _frac_str(pred),
                "final_deviation": final_dev,
            }
    trace_sequences = {}
    for p in ctx.degrees:
        for h in range(1, ctx.h_abs.order):
            trace_sequences[f"{p},{h}"] = [
                (_frac_str(r.traces[(p, h)] / r.norm_index)
                 if (p, h) in r.traces else None)
                for r in records]
    farber_rows = farber_diagnostic(ctx.chain, ctx.probes)
    rel_rows = []
    if ctx.h_abs.order > 1 or ctx.probes:
        try:
            rel_rows = rel_farber_diagnostic(
                ctx.chain, ctx.h_elems, ctx.probes,
                assert_infinite=cfg.infinite_centralizers)
        except (UnsupportedFamily, HNotNormalizing) as exc:
            rel_rows = [{"error": f"{type(exc).__name__}: {exc}"}]
    growth = {str(w): centralizer_growth(ctx.chain, w) for w in ctx.probes}
    char_rows = []
    if cfg.char_convergence is not None:
        char_rows = _char_convergence_rows(ctx, int(cfg.char_convergence))
    report = {
        "config": cfg.to_json(),
        "levels": [r.to_json() for r in records],
        "sequences": sequences,
        "trace_sequences": trace_sequences,
        "farber": [_jsonify(row) for row in farber_rows],
        "rel_farber": [_jsonify(row) for row in rel_rows],
        "centralizer_growth": growth,
        "char_convergence": char_rows,
        "intersection_ball_length": intersection_heuristic(ctx.chain),
        "assumptions": {
            "normal_kernel_chain": all(lv.is_normal()
                                       for lv in ctx.chain.levels),
            "infinite_centralizers_asserted": cfg.infinite_centralizers,
        },
    }
    return report


def _char_convergence_rows(ctx: ExperimentContext, chi_idx: int):
    from .characters import LimitCharacterSpec, limit_value
    chi = ctx.table.irreducibles[chi_idx]
    spec = LimitCharacterSpec(
        group=ctx.group, kind="induced",
        h_words=list(ctx.h_elems), chi=chi,
        assert_infinite_centralizers=ctx.config.infinite_centralizers)
    rows = []
    for n, level in enumerate(ctx.chain.levels):
        q = level.via.target
        h_images = [level.via.evaluate(w) for w in ctx.h_elems]
        if len(set(h_images)) != ctx.h_abs.order:
            rows.append({"level": n, "error": "symmetry collapses"})
            continue
        sub = q.subgroup(sorted(set(h_images)))
        char = ind_finite(q, sub, _chi_on_subgroup(ctx, level, sub, chi_idx))
        for w in ctx.probes:
            observed = complex(char.value(level.via.evaluate(w)))
            lim = complex(limit_value(spec, w))
            rows.append({"level": n, "word": str(w),
                         "observed": [observed.real, observed.imag],
                         "limit": [lim.real, lim.imag],
                         "deviation": abs(observed - lim)})
    return rows


def _chi_on_subgroup(ctx: ExperimentContext, level: FiniteIndexSubgroup,
                     sub: FiniteSubgroup, chi_idx: int):
    """Transport an irreducible of the abstract H onto its image in Q."""
    from .finite_groups import OrdinaryCharacter
    h_img, _ = sub.abstract_group()
    lookup = {m: i for i, m in enumerate(sub.members)}
    chi = ctx.table.irreducibles[chi_idx]
    value_at = {}
    for local, w in enumerate(ctx.h_elems):
        member_local = lookup[level.via.evaluate(w)]
        value_at[member_local] = chi.values[ctx.h_abs.class_of_element(local)]
    values = [value_at[rep]
              for rep in h_img.conjugacy_classes().representatives]
    return OrdinaryCharacter(h_img, values)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _jsonify(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        out[k] = _frac_str(v) if isinstance(v, Fraction) else v
    return out


CSV_COLUMNS = ["level", "index", "p", "chi", "raw", "normalized",
               "normalized_decimal", "prediction", "deviation"]


def emit(records: list[LevelRecord], report: dict, out_dir, fmt: str = "both"):
    """Write results.csv / report.json with a fixed column order."""
    import csv
    from pathlib import Path
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt in ("csv", "both"):
        path = out_dir / "results.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in records:
                if r.error is not None:
                    continue
                for (p, c), m in sorted(r.raw.items()):
                    norm = r.normalized[(p, c)]
                    seq = report["sequences"].get(f"{p},{c}", {})
                    pred = seq.get("prediction")
                    dev = ""
                    if pred is not None:
                        dev = str(abs(norm - _frac(pred)))
                    writer.writerow([r.level, r.index, p, c, m,
                                     _frac_str(norm), float(norm),
                                     pred if pred is not None else "",
                                     dev])
        paths.append(path)
    if fmt in ("json", "both"):
        path = out_dir / "report.json"
        with open(path, "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
        paths.append(path)
    return paths


def report_round_trip(report: dict) -> dict:
    return json.loads(json.dumps(report))
