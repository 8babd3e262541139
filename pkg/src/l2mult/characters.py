"""Normalized characters of finite quotients, biset characters, induction.

A ``FiniteCharacter`` is a conjugation-invariant function with value 1 at the
identity, stored per conjugacy class.  ``BisetCharacter`` couples a finite
quotient Q with a finite group H and holds the rational fixed-point fractions
of a Q-H-biset; inducing a character of H through it is a plain weighted sum
with the normalization built into the defining formula.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .finite_groups import (FiniteGroup, FiniteSubgroup, OrdinaryCharacter,
                            induce_ordinary)
from .word_groups import (BuiltinGroup, FreeGroup, FreeAbelianGroup,
                          InfiniteDihedralGroup, Word, FiniteIndexSubgroup)


class CharacterError(Exception):
    pass


class NotAnAction(CharacterError):
    pass


class CannotInduce(CharacterError):
    pass


class CrossCheckFailed(CharacterError):
    pass


class HNotNormalizing(CharacterError):
    pass


class UnsupportedFamily(CharacterError):
    pass


class FiniteCharacter:
    """Class function on a finite group with value 1 at the identity."""

    def __init__(self, group: FiniteGroup, values, normalized: bool | None = None):
        self.group = group
        self.values = np.asarray(values, dtype=complex)
        classes = group.conjugacy_classes()
        if len(self.values) != len(classes.representatives):
            raise CharacterError("one value per conjugacy class required")
        if normalized is None:
            normalized = abs(self.values[0] - 1.0) <= 1e-9
        self.normalized = bool(normalized)

    @classmethod
    def from_ordinary(cls, chi: OrdinaryCharacter) -> "FiniteCharacter":
        return cls(chi.group, chi.normalized_values(), normalized=True)

    def value(self, element: int) -> complex:
        return self.values[self.group.class_of_element(element)]

    def product(self, other: "FiniteCharacter") -> "FiniteCharacter":
        if other.group is not self.group:
            raise CharacterError("characters on different groups")
        return FiniteCharacter(self.group, self.values * other.values)

    def convex(self, other: "FiniteCharacter", lam: Fraction) -> "FiniteCharacter":
        lam = float(lam)
        return FiniteCharacter(self.group,
                               lam * self.values + (1 - lam) * other.values)

    def gram_min_eigenvalue(self, sample: list[int]) -> float:
        """Smallest eigenvalue of (phi(g_i^-1 g_j)) over an element sample;
        characters must be positive semidefinite up to numerical error."""
        g = self.group
        n = len(sample)
        mat = np.empty((n, n), dtype=complex)
        for a in range(n):
            inv_a = g.inv(sample[a])
            for b in range(n):
                mat[a, b] = self.value(g.mul(inv_a, sample[b]))
        return float(np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0])

    def to_json(self) -> dict:
        classes = self.group.conjugacy_classes()
        return {
            "normalized": self.normalized,
            "classes": [
                {"representative": self.group.label(rep), "size": size,
                 "value": [float(v.real), float(v.imag)]}
                for rep, size, v in zip(classes.representatives, classes.sizes,
                                        self.values)
            ],
        }


def regular_character(group: FiniteGroup) -> FiniteCharacter:
    values = [0.0] * len(group.conjugacy_classes().representatives)
    values[0] = 1.0
    return FiniteCharacter(group, values, normalized=True)


def trivial_character(group: FiniteGroup) -> FiniteCharacter:
    k = len(group.conjugacy_classes().representatives)
    return FiniteCharacter(group, [1.0] * k, normalized=True)


def check_action(group: FiniteGroup, act, n_points: int, rng=None,
                 samples: int = 50):
    if rng is None:
        rng = random.Random(1729)
    for x in range(n_points):
        if act(0, x) != x:
            raise NotAnAction("identity does not act trivially")
    pairs = [(g, h) for g in group.generators for h in group.generators]
    pairs += [(rng.randrange(group.order), rng.randrange(group.order))
              for _ in range(samples)]
    for g, h in pairs:
        gh = group.mul(g, h)
        for x in range(min(n_points, 64)):
            if act(gh, x) != act(h, act(g, x)):
                raise NotAnAction(f"({g},{h}) breaks associativity of the action")


def perm_character(group: FiniteGroup, act, n_points: int) -> FiniteCharacter:
    """Fixed-point fraction character of a right action act(g, x) = x.g."""
    check_action(group, act, n_points)
    classes = group.conjugacy_classes()
    values = []
    for rep in classes.representatives:
        fixed = sum(1 for x in range(n_points) if act(rep, x) == x)
        values.append(fixed / n_points)
    return FiniteCharacter(group, values, normalized=True)


# ---------------------------------------------------------------------------
# Biset characters
# ---------------------------------------------------------------------------

@dataclass
class BisetCharacter:
    """Rational character values of a Q-H-biset, one per (Q-class, H-element).

    ``h_group`` is a standalone copy of H; ``h_in_q`` gives the image of each
    of its elements inside Q (empty when H only acts abstractly).
    """

    q_group: FiniteGroup
    h_group: FiniteGroup
    values: dict[tuple[int, int], Fraction]
    h_in_q: tuple[int, ...] = ()

    def value(self, q_element: int, h_element: int) -> Fraction:
        cls = self.q_group.class_of_element(q_element)
        return self.values.get((cls, h_element), Fraction(0))


def i_finite(q_group: FiniteGroup, h_sub: FiniteSubgroup) -> BisetCharacter:
    """i(g,h) = [Q:C_Q(h)]^-1 when g and h are conjugate in Q, else 0."""
    if h_sub.parent is not q_group:
        raise CharacterError("subgroup of a different group")
    h_abs, _ = h_sub.abstract_group()
    classes = q_group.conjugacy_classes()
    values: dict[tuple[int, int], Fraction] = {}
    for h_local, h_parent in enumerate(h_sub.members):
        cls = classes.class_of[h_parent]
        values[(cls, h_local)] = Fraction(1, classes.sizes[cls])
    return BisetCharacter(q_group, h_abs, values, tuple(h_sub.members))


def induce_via(psi: BisetCharacter, phi: FiniteCharacter,
               tol: float = 1e-10) -> FiniteCharacter:
    """Character of Q induced by phi through psi: a ratio of weighted sums
    over H, normalized by the value at the identity."""
    if phi.group is not psi.h_group:
        raise CharacterError("phi must live on the biset's H")
    h_order = psi.h_group.order
    classes = psi.q_group.conjugacy_classes()
    phi_at = [complex(phi.value(h)) for h in range(h_order)]
    denom = sum(complex(psi.values.get((0, h), 0)) * phi_at[h]
                for h in range(h_order))
    if abs(denom) <= tol:
        raise CannotInduce(f"denominator {denom} vanishes")
    values = []
    for cls in range(len(classes.representatives)):
        num = sum(complex(psi.values.get((cls, h), 0)) * phi_at[h]
                  for h in range(h_order))
        values.append(num / denom)
    return FiniteCharacter(psi.q_group, values, normalized=True)


def ind_finite(q_group: FiniteGroup, h_sub: FiniteSubgroup,
               chi: OrdinaryCharacter, tol: float = 1e-9) -> FiniteCharacter:
    """Normalized induction of an irreducible character of H <= Q, computed
    through the i-function and cross-checked against ordinary induction."""
    h_abs, _ = h_sub.abstract_group()
    if chi.group is not h_abs:
        raise CharacterError("chi must live on the abstract subgroup")
    via_biset = induce_via(i_finite(q_group, h_sub),
                           FiniteCharacter.from_ordinary(chi))
    theta = induce_ordinary(h_sub, chi)
    direct = theta.values / theta.degree
    if np.max(np.abs(via_biset.values - direct)) > tol:
        raise CrossCheckFailed("biset route disagrees with ordinary induction")
    return via_biset


def finite_word_subgroup(words: list[Word], cap: int = 512):
    """Closure of a word list; returns (H_abs, elements) with elements[i]
    the word realizing H_abs element i and elements[0] the identity."""
    if not words:
        raise CharacterError("empty generating set")
    group = words[0].group
    ident = group.identity()
    elems = [ident]
    seen = {ident: 0}
    frontier = [ident]
    gens = [w for w in words if not w.is_identity()]
    while frontier:
        w = frontier.pop()
        for g in gens:
            for u in (w * g, w * g.inverse()):
                if u not in seen:
                    if len(elems) >= cap:
                        raise CharacterError(f"word closure exceeds cap {cap}")
                    seen[u] = len(elems)
                    elems.append(u)
                    frontier.append(u)

    # products of closure words are already in canonical form
    h_abs = FiniteGroup(elems, lambda a, b: a * b, lambda a: a.inverse(),
                        name="H",
                        generators=sorted({seen[g] for g in gens}),
                        labels=[str(w) for w in elems])
    return h_abs, elems


def biset_character(gamma: FiniteIndexSubgroup, h_words: list[Word],
                    h_abs: FiniteGroup | None = None,
                    h_elems: list[Word] | None = None) -> BisetCharacter:
    """Character of the biset G/Gamma computed inside the finite quotient:
    psi(g,h) = #{cosets fK : f^-1 g f in hK} / [Q:K]."""
    if h_abs is None:
        h_abs, h_elems = finite_word_subgroup(h_words)
    q = gamma.via.target
    fiber = set(gamma.fiber.members)
    h_images = [gamma.via.evaluate(w) for w in h_elems]
    for him in h_images:
        for k in fiber:
            if q.mul(q.mul(him, k), q.inv(him)) not in fiber:
                raise HNotNormalizing(
                    f"{q.label(him)} does not normalize the fiber")
    # coset representatives of the fiber
    reps = []
    covered = set()
    for f in range(q.order):
        if f not in covered:
            reps.append(f)
            covered.update(q.mul(f, k) for k in fiber)
    index = len(reps)
    classes = q.conjugacy_classes()
    values: dict[tuple[int, int], Fraction] = {}
    for cls, g in enumerate(classes.representatives):
        for h_local, him in enumerate(h_images):
            h_coset = {q.mul(him, k) for k in fiber}
            count = 0
            for f in reps:
                if q.mul(q.mul(q.inv(f), g), f) in h_coset:
                    count += 1
            if count:
                values[(cls, h_local)] = Fraction(count, index)
    return BisetCharacter(q, h_abs, values, tuple(h_images))


# ---------------------------------------------------------------------------
# Limit characters of the built-in infinite groups
# ---------------------------------------------------------------------------

@dataclass
class LimitCharacterSpec:
    """Limit of a character sequence on a built-in group.

    kind: "regular" | "trivial" | "circle" | "induced".
    - circle: requires FreeAbelian(1) and a unimodular z.
    - induced: an irreducible character chi of the finite subgroup generated
      by h_words; for families without a conjugacy oracle the caller must
      assert that all nontrivial subgroup elements have infinite-index
      centralizers, which collapses the limit to the regular character.
    """

    group: BuiltinGroup
    kind: str
    z: complex = 1.0
    h_words: list[Word] = field(default_factory=list)
    chi: OrdinaryCharacter | None = None
    assert_infinite_centralizers: bool = False

    def __post_init__(self):
        if self.kind == "circle":
            if not isinstance(self.group, FreeAbelianGroup) or self.group.rank != 1:
                raise UnsupportedFamily("circle characters need FreeAbelian(1)")
            if abs(abs(self.z) - 1.0) > 1e-12:
                raise CharacterError("|z| must be 1")
        if self.kind == "induced":
            h_abs, elems = finite_word_subgroup(self.h_words)
            if self.chi is None or self.chi.group.order != h_abs.order:
                raise CharacterError("chi must live on the subgroup of h_words")
            self._h_abs, self._h_elems = h_abs, elems
            try:
                self._chi_index = [self.chi.group.index_of(w) for w in elems]
            except KeyError:
                if h_abs.order == 1:
                    self._chi_index = [0]
                else:
                    raise CharacterError(
                        "chi must be defined on the word subgroup itself")


def dinf_conjugate(w1: Word, w2: Word) -> bool:
    (k1, e1), (k2, e2) = w1.data, w2.data
    if e1 != e2:
        return False
    if e1 == 0:
        return k1 == k2 or k1 == -k2
    return (k1 - k2) % 2 == 0


def dinf_centralizer_index(w: Word):
    """[D_inf : C(w)]; None encodes infinite index."""
    k, e = w.data
    if e == 0:
        return 1 if k == 0 else 2
    return None


def builtin_conjugate(w1: Word, w2: Word) -> bool:
    group = w1.group
    if isinstance(group, FreeAbelianGroup):
        return w1.data == w2.data
    if isinstance(group, InfiniteDihedralGroup):
        return dinf_conjugate(w1, w2)
    if isinstance(group, FreeGroup):
        return _cyclic_reduce(w1.data) in _cyclic_rotations(_cyclic_reduce(w2.data))
    raise UnsupportedFamily(f"no conjugacy oracle for {group.family}")


def _cyclic_reduce(data):
    d = list(data)
    while len(d) >= 2 and d[0][0] == d[-1][0] and d[0][1] == -d[-1][1]:
        d = d[1:-1]
    return tuple(d)


def _cyclic_rotations(data):
    return {tuple(data[i:] + data[:i]) for i in range(max(len(data), 1))}


def builtin_centralizer_index(w: Word):
    group = w.group
    if isinstance(group, FreeAbelianGroup):
        return 1
    if isinstance(group, InfiniteDihedralGroup):
        return dinf_centralizer_index(w)
    if isinstance(group, FreeGroup):
        return 1 if not w.data else None
    raise UnsupportedFamily(f"no centralizer oracle for {group.family}")


def limit_value(spec: LimitCharacterSpec, w: Word) -> complex:
    if w.group is not spec.group:
        raise CharacterError("word from a different group")
    if spec.kind == "regular":
        return 1.0 if w.is_identity() else 0.0
    if spec.kind == "trivial":
        return 1.0
    if spec.kind == "circle":
        return complex(spec.z) ** w.data[0]
    if spec.kind == "induced":
        if spec.assert_infinite_centralizers:
            return 1.0 if w.is_identity() else 0.0
        total = 0j
        for pos, h_word in enumerate(spec._h_elems):
            if not builtin_conjugate(w, h_word):
                continue
            ci = builtin_centralizer_index(h_word)
            if ci is not None:
                chi_tilde = spec.chi.value(spec._chi_index[pos]) / spec.chi.degree
                total += chi_tilde / ci
        return total
    raise CharacterError(f"unknown limit kind {spec.kind!r}")


@dataclass
class ConvergenceRow:
    level: int
    word: str
    observed: complex
    limit: complex

    @property
    def deviation(self) -> float:
        return abs(self.observed - self.limit)


def convergence_report(chain, spec: LimitCharacterSpec, probe_words: list[Word],
                       chars_per_level: list[FiniteCharacter]) -> list[ConvergenceRow]:
    """Pointwise deviations of per-level characters from the limit values."""
    if len(chars_per_level) != len(chain.levels):
        raise CharacterError("one character per chain level required")
    rows = []
    for n, (lv, char) in enumerate(zip(chain.levels, chars_per_level)):
        if char.group is not lv.via.target:
            raise CharacterError(f"level {n} character on the wrong group")
        for w in probe_words:
            observed = char.value(lv.via.evaluate(w))
            rows.append(ConvergenceRow(n, str(w), complex(observed),
                                       complex(limit_value(spec, w))))
    return rows
