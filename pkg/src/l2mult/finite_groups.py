"""Exact arithmetic for finite groups on integer element indices.

Element 0 is always the identity.  Groups carry their elements in a canonical
raw form (permutation tuples, residue tuples, ...) so products of specific
pairs stay cheap even for groups too large for a full Cayley table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class GroupError(Exception):
    pass


class ClosureTooLarge(GroupError):
    pass


class NumericalDegeneracy(GroupError):
    pass


class NotIntegral(GroupError):
    pass


@dataclass
class ConjugacyData:
    class_of: list[int]          # element index -> class index
    representatives: list[int]   # minimal element index per class
    sizes: list[int]
    members: list[list[int]]


class FiniteGroup:
    def __init__(self, elements, mul_raw, inv_raw=None, name="G",
                 generators=None, labels=None):
        self.elements = list(elements)
        self.order = len(self.elements)
        self.name = name
        self._index = {e: i for i, e in enumerate(self.elements)}
        if len(self._index) != self.order:
            raise GroupError("duplicate elements")
        self._mul_raw = mul_raw
        self._inv_raw = inv_raw
        self.generators = list(generators) if generators is not None else [
            i for i in range(1, self.order)]
        self._labels = labels
        self._inverse_cache: dict[int, int] = {}
        self._classes: ConjugacyData | None = None
        self._table = None

    # -- basic structure ---------------------------------------------------

    def mul(self, i: int, j: int) -> int:
        return self._index[self._mul_raw(self.elements[i], self.elements[j])]

    def inv(self, i: int) -> int:
        cached = self._inverse_cache.get(i)
        if cached is not None:
            return cached
        if self._inv_raw is not None:
            k = self._index[self._inv_raw(self.elements[i])]
        else:
            k = next(j for j in range(self.order) if self.mul(i, j) == 0)
        self._inverse_cache[i] = k
        return k

    def index_of(self, raw) -> int:
        return self._index[raw]

    def label(self, i: int) -> str:
        if self._labels is not None:
            return self._labels[i]
        return str(self.elements[i])

    def conjugate(self, g: int, x: int) -> int:
        """g x g^-1."""
        return self.mul(self.mul(g, x), self.inv(g))

    def is_abelian(self) -> bool:
        gens = self.generators
        return all(self.mul(a, b) == self.mul(b, a)
                   for a in gens for b in gens)

    def check_axioms(self):
        """Exhaustive associativity/identity scan; intended for small orders."""
        n = self.order
        for i in range(n):
            if self.mul(0, i) != i or self.mul(i, 0) != i:
                raise GroupError("identity axiom fails")
            j = self.inv(i)
            if self.mul(i, j) != 0 or self.mul(j, i) != 0:
                raise GroupError("inverse axiom fails")
        for a in range(n):
            for b in range(n):
                ab = self.mul(a, b)
                for c in range(n):
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)):
                        raise GroupError("associativity fails")

    # -- conjugacy ---------------------------------------------------------

    def conjugacy_classes(self) -> ConjugacyData:
        if self._classes is None:
            n = self.order
            class_of = [-1] * n
            reps, sizes, members = [], [], []
            for x in range(n):
                if class_of[x] >= 0:
                    continue
                orbit = sorted({self.conjugate(g, x) for g in range(n)})
                k = len(reps)
                for y in orbit:
                    class_of[y] = k
                reps.append(orbit[0])
                sizes.append(len(orbit))
                members.append(orbit)
            self._classes = ConjugacyData(class_of, reps, sizes, members)
        return self._classes

    def class_of_element(self, x: int) -> int:
        return self.conjugacy_classes().class_of[x]

    def conjugacy_class_size(self, x: int) -> int:
        # Orbit of a single element; avoids the full partition on big groups.
        if self._classes is not None:
            return self._classes.sizes[self._classes.class_of[x]]
        return len({self.conjugate(g, x) for g in range(self.order)})

    def subgroup(self, members) -> "FiniteSubgroup":
        return FiniteSubgroup(self, members)

    def subgroup_generated(self, gens) -> "FiniteSubgroup":
        seen = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                for y in (self.mul(x, g), self.mul(x, self.inv(g))):
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
        return FiniteSubgroup(self, sorted(seen))

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"


class FiniteSubgroup:
    def __init__(self, parent: FiniteGroup, members):
        self.parent = parent
        self.members = tuple(sorted(set(members)))
        if 0 not in self.members:
            raise GroupError("subgroup must contain the identity")
        mem = set(self.members)
        for a in self.members:
            if parent.inv(a) not in mem:
                raise GroupError("subgroup not closed under inverse")
            for b in self.members:
                if parent.mul(a, b) not in mem:
                    raise GroupError("subgroup not closed under product")
        if parent.order % len(self.members):
            raise GroupError("Lagrange violation (bad subgroup data)")
        self._abstract = None

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def is_normal(self) -> bool:
        mem = set(self.members)
        return all(self.parent.conjugate(g, h) in mem
                   for g in range(self.parent.order) for h in self.members)

    def abstract_group(self) -> tuple[FiniteGroup, dict[int, int]]:
        """The subgroup as a standalone FiniteGroup plus parent->local map."""
        if self._abstract is None:
            parent = self.parent
            locals_ = {m: i for i, m in enumerate(self.members)}
            elems = list(range(len(self.members)))
            mem = self.members

            def mul(a, b):
                return locals_[parent.mul(mem[a], mem[b])]

            def inv(a):
                return locals_[parent.inv(mem[a])]

            grp = FiniteGroup(elems, mul, inv,
                              name=f"{parent.name}-sub{len(mem)}",
                              labels=[parent.label(m) for m in mem])
            self._abstract = (grp, locals_)
        return self._abstract


class GroupHom:
    """Homomorphism given by the full image list; multiplicativity is checked
    against the source generators, which suffices by induction on word length."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, images):
        self.source = source
        self.target = target
        self.images = list(images)
        if len(self.images) != source.order:
            raise GroupError("image list has wrong length")
        if self.images[0] != 0:
            raise GroupError("identity must map to identity")
        for x in range(source.order):
            for g in source.generators:
                if self.images[source.mul(x, g)] != \
                        target.mul(self.images[x], self.images[g]):
                    raise GroupError("not a homomorphism")

    def __call__(self, i: int) -> int:
        return self.images[i]


def hom_from_generator_images(source: FiniteGroup, target: FiniteGroup,
                              gen_images: dict[int, int]) -> GroupHom:
    """Extend generator images through the Cayley graph; inconsistency means
    the assignment does not define a homomorphism."""
    images = [-1] * source.order
    images[0] = 0
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for g, img in gen_images.items():
            for y, iy in ((source.mul(x, g), target.mul(images[x], img)),
                          (source.mul(x, source.inv(g)),
                           target.mul(images[x], target.inv(img)))):
                if images[y] == -1:
                    images[y] = iy
                    frontier.append(y)
                elif images[y] != iy:
                    raise GroupError("generator images are inconsistent")
    if -1 in images:
        raise GroupError("generators do not generate the source")
    return GroupHom(source, target, images)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def trivial_group() -> FiniteGroup:
    return FiniteGroup([0], lambda a, b: 0, lambda a: 0, name="1",
                       generators=[], labels=["e"])


def cyclic_group(n: int) -> FiniteGroup:
    if n <= 0:
        raise GroupError("order must be positive")
    labels = ["e"] + [f"g^{k}" if k > 1 else "g" for k in range(1, n)]
    return FiniteGroup(list(range(n)), lambda a, b: (a + b) % n,
                       lambda a: (-a) % n, name=f"C{n}",
                       generators=[1] if n > 1 else [], labels=labels)


def abelian_group(moduli) -> FiniteGroup:
    moduli = tuple(moduli)
    elems = list(itertools.product(*[range(m) for m in moduli]))

    def mul(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, moduli))

    def inv(a):
        return tuple((-x) % m for x, m in zip(a, moduli))

    gens = []
    for i in range(len(moduli)):
        if moduli[i] > 1:
            e = [0] * len(moduli)
            e[i] = 1
            gens.append(elems.index(tuple(e)))
    name = "x".join(f"C{m}" for m in moduli)
    return FiniteGroup(elems, mul, inv, name=name, generators=gens)


def dihedral_group(m: int) -> FiniteGroup:
    """Dihedral group of order 2m: rotations (k,0) and reflections (k,1)."""
    if m <= 0:
        raise GroupError("m must be positive")
    elems = [(k, e) for e in (0, 1) for k in range(m)]

    def mul(a, b):
        k1, e1 = a
        k2, e2 = b
        return ((k1 + (k2 if e1 == 0 else -k2)) % m, e1 ^ e2)

    def inv(a):
        k, e = a
        return ((-k) % m if e == 0 else k, e)

    gens = [elems.index((1 % m, 0)), elems.index((0, 1))]
    if m == 1:
        gens = [elems.index((0, 1))]
    labels = [("e" if k == 0 and e == 0 else
               (f"r^{k}" if e == 0 else (f"r^{k}s" if k else "s")))
              for (k, e) in elems]
    return FiniteGroup(elems, mul, inv, name=f"Dih{2*m}", generators=gens,
                       labels=labels)


def from_generators(perms, cap: int = 10 ** 6) -> FiniteGroup:
    """Closure of bijections on {0..d-1} under composition (BFS order)."""
    perms = [tuple(p) for p in perms]
    if not perms:
        raise GroupError("need at least one generator")
    degree = len(perms[0])
    for p in perms:
        if len(p) != degree or sorted(p) != list(range(degree)):
            raise GroupError("generators must be bijections on one finite set")
    ident = tuple(range(degree))

    def compose(a, b):
        # (a*b)(x) = a(b(x))
        return tuple(a[b[x]] for x in range(degree))

    from collections import deque
    elems = [ident]
    seen = {ident: 0}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for p in perms:
            y = compose(x, p)
            if y not in seen:
                if len(elems) >= cap:
                    raise ClosureTooLarge(f"closure exceeds cap {cap}")
                seen[y] = len(elems)
                elems.append(y)
                queue.append(y)

    def inv(a):
        out = [0] * degree
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    gens = [seen[p] for p in perms if p != ident]
    return FiniteGroup(elems, compose, inv, name=f"Perm{len(elems)}",
                       generators=sorted(set(gens)))


def symmetric_group(n: int) -> FiniteGroup:
    if n <= 1:
        return trivial_group()
    cycle = tuple(list(range(1, n)) + [0])
    transp = tuple([1, 0] + list(range(2, n)))
    return from_generators([transp, cycle])


def semidirect_vector_group(moduli, h_group: FiniteGroup,
                            gen_matrices: dict[int, list[list[int]]]) -> FiniteGroup:
    """(Z/m1 x ... x Z/mr) : H with H acting through integer matrices.

    ``gen_matrices`` maps H generator indices to r x r integer matrices; the
    assignment is extended to all of H and checked for consistency.
    """
    moduli = tuple(moduli)
    r = len(moduli)
    ident_mat = [[1 if i == j else 0 for j in range(r)] for i in range(r)]

    def mat_mul(a, b):
        return [[sum(a[i][k] * b[k][j] for k in range(r)) % moduli[i]
                 for j in range(r)] for i in range(r)]

    mats: list[list[list[int]] | None] = [None] * h_group.order
    mats[0] = ident_mat
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for g, mg in gen_matrices.items():
            y = h_group.mul(x, g)
            # action is a left action: M(x*g) = M(x) M(g)
            my = mat_mul(mats[x], mg)
            if mats[y] is None:
                mats[y] = my
                frontier.append(y)
            elif mats[y] != my:
                raise GroupError("matrices do not define an H-action")
    if any(m is None for m in mats):
        raise GroupError("gen_matrices keys do not generate H")

    vec_elems = list(itertools.product(*[range(m) for m in moduli]))
    elems = [(v, h) for h in range(h_group.order) for v in vec_elems]

    def act(h, v):
        m = mats[h]
        return tuple(sum(m[i][j] * v[j] for j in range(r)) % moduli[i]
                     for i in range(r))

    def mul(a, b):
        v1, h1 = a
        v2, h2 = b
        w = act(h1, v2)
        return (tuple((x + y) % m for x, y, m in zip(v1, w, moduli)),
                h_group.mul(h1, h2))

    def inv(a):
        v, h = a
        hi = h_group.inv(h)
        w = act(hi, v)
        return (tuple((-x) % m for x, m in zip(w, moduli)), hi)

    gens = []
    for i in range(r):
        if moduli[i] > 1:
            e = [0] * r
            e[i] = 1
            gens.append(elems.index((tuple(e), 0)))
    zero = tuple([0] * r)
    for g in h_group.generators:
        gens.append(elems.index((zero, g)))
    name = "x".join(f"C{m}" for m in moduli) + f":{h_group.name}"
    return FiniteGroup(elems, mul, inv, name=name, generators=gens)


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------

class OrdinaryCharacter:
    """Character of a complex representation: one value per conjugacy class."""

    def __init__(self, group: FiniteGroup, values):
        self.group = group
        self.values = np.asarray(values, dtype=complex)
        classes = group.conjugacy_classes()
        if len(self.values) != len(classes.representatives):
            raise GroupError("one value per conjugacy class required")
        self.degree = int(round(self.values[0].real))
        if abs(self.values[0] - self.degree) > 1e-8 or self.degree <= 0:
            raise GroupError("character degree must be a positive integer")

    def value(self, element: int) -> complex:
        return self.values[self.group.class_of_element(element)]

    def inner(self, other: "OrdinaryCharacter") -> complex:
        sizes = np.array(self.group.conjugacy_classes().sizes)
        return np.sum(sizes * self.values * np.conj(other.values)) / self.group.order

    def is_irreducible(self, tol: float = 1e-9) -> bool:
        return abs(self.inner(self) - 1.0) < max(tol, 1e-9)

    def normalized_values(self) -> np.ndarray:
        return self.values / self.degree


class CharacterTable:
    def __init__(self, group: FiniteGroup, irreducibles: list[OrdinaryCharacter]):
        self.group = group
        self.classes = group.conjugacy_classes()
        self.irreducibles = irreducibles
        self._validate()

    def _validate(self, tol: float = 1e-8):
        k = len(self.classes.representatives)
        if len(self.irreducibles) != k:
            raise NumericalDegeneracy("wrong number of irreducibles")
        if sum(ch.degree ** 2 for ch in self.irreducibles) != self.group.order:
            raise NumericalDegeneracy("degree sum rule fails")
        sizes = np.array(self.classes.sizes)
        mat = np.array([ch.values for ch in self.irreducibles])
        gram = (mat * sizes) @ np.conj(mat.T) / self.group.order
        if np.max(np.abs(gram - np.eye(k))) > tol:
            raise NumericalDegeneracy("row orthogonality fails")

    def column_orthogonality_defect(self) -> float:
        mat = np.array([ch.values for ch in self.irreducibles])
        sizes = np.array(self.classes.sizes)
        gram = np.conj(mat.T) @ mat
        expect = np.diag(self.group.order / sizes)
        return float(np.max(np.abs(gram - expect)))


def conjugacy_classes(group: FiniteGroup) -> ConjugacyData:
    return group.conjugacy_classes()


def centralizer_index(group: FiniteGroup, h: int) -> int:
    return group.conjugacy_class_size(h)


def character_table(group: FiniteGroup, max_order: int = 2000,
                    tol: float = 1e-8, attempts: int = 12) -> CharacterTable:
    """Numeric class-sum eigenvector method (Burnside/Dixon style).

    A random combination of the class-multiplication matrices is
    diagonalized; the common eigenvectors give the central characters, from
    which degrees and character values follow.
    """
    if group._table is not None:
        return group._table
    if group.order > max_order:
        raise GroupError(f"order {group.order} exceeds cap {max_order}")
    classes = group.conjugacy_classes()
    k = len(classes.representatives)
    rep_pos = {rep: idx for idx, rep in enumerate(classes.representatives)}
    # structure constants a[i][j][l]: #{(x,y) in C_i x C_j : xy = rep_l}
    a = np.zeros((k, k, k), dtype=np.int64)
    for i in range(k):
        for x in classes.members[i]:
            for rep_l, l in rep_pos.items():
                # count y with x*y = rep_l  <=>  y = x^-1 rep_l, then tally class
                y = group.mul(group.inv(x), rep_l)
                a[i][classes.class_of[y]][l] += 1
    rng = np.random.default_rng(20240531)
    for attempt in range(attempts):
        coeffs = rng.standard_normal(k)
        # (M w)_j = sum_l (sum_i c_i a[i,j,l]) w_l = (sum_i c_i w_i) w_j,
        # so the central characters w are the eigenvectors of M.
        m = np.tensordot(coeffs, a, axes=(0, 0))
        eigvals, eigvecs = np.linalg.eig(m)
        order = np.argsort(eigvals.real + 1e-3 * eigvals.imag)
        eigvals = eigvals[order]
        eigvecs = eigvecs[:, order]
        gaps_ok = all(abs(eigvals[i] - eigvals[j]) > 1e-7
                      for i in range(k) for j in range(i + 1, k))
        if not gaps_ok:
            continue
        irreducibles = []
        ok = True
        for idx in range(k):
            v = eigvecs[:, idx]
            if abs(v[0]) < 1e-12:
                ok = False
                break
            w = v / v[0]
            sizes = np.array(classes.sizes)
            denom = np.sum(np.abs(w) ** 2 / sizes)
            deg = np.sqrt(group.order / denom)
            degree = int(round(deg.real))
            if degree <= 0 or abs(deg - degree) > 1e-6:
                ok = False
                break
            values = w * degree / sizes
            irreducibles.append(OrdinaryCharacter(group, values))
        if not ok:
            continue
        irreducibles.sort(key=lambda ch: (
            ch.degree,
            tuple((round(z.real, 7), round(z.imag, 7)) for z in ch.values)))
        # put the trivial character first for stable downstream indexing
        for pos, ch in enumerate(irreducibles):
            if ch.degree == 1 and np.max(np.abs(ch.values - 1)) < 1e-7:
                irreducibles.insert(0, irreducibles.pop(pos))
                break
        try:
            table = CharacterTable(group, irreducibles)
        except NumericalDegeneracy:
            continue
        if table.column_orthogonality_defect() > tol:
            continue
        group._table = table
        return table
    raise NumericalDegeneracy(
        f"class-sum eigenspaces not separated after {attempts} attempts")


def induce_ordinary(subgroup: FiniteSubgroup,
                    chi: OrdinaryCharacter) -> OrdinaryCharacter:
    """Ordinary induction: Ind(chi)(g) = |H|^-1 sum_t chi0(t g t^-1)."""
    parent = subgroup.parent
    h_abs, to_local = subgroup.abstract_group()
    if chi.group is not h_abs:
        raise GroupError("character does not live on the given subgroup")
    classes = parent.conjugacy_classes()
    values = []
    mem = set(subgroup.members)
    for rep in classes.representatives:
        total = 0j
        for t in range(parent.order):
            c = parent.conjugate(t, rep)
            if c in mem:
                total += chi.value(to_local[c])
        values.append(total / subgroup.order)
    return OrdinaryCharacter(parent, values)


def restrict_ordinary(theta: OrdinaryCharacter,
                      subgroup: FiniteSubgroup) -> OrdinaryCharacter:
    h_abs, _ = subgroup.abstract_group()
    values = [theta.value(subgroup.members[rep_local])
              for rep_local in h_abs.conjugacy_classes().representatives]
    return OrdinaryCharacter(h_abs, values)


def multiplicity(chi: OrdinaryCharacter, theta: OrdinaryCharacter,
                 tol: float = 1e-6) -> int:
    """Multiplicity of the irreducible chi inside theta."""
    if chi.group is not theta.group:
        raise GroupError("characters live on different groups")
    if not chi.is_irreducible(1e-6):
        raise GroupError("first argument must be irreducible")
    val = theta.inner(chi)
    m = int(round(val.real))
    if abs(val - m) > tol:
        raise NotIntegral(f"inner product {val} is not integral")
    return m


def frobenius_check(subgroup: FiniteSubgroup, chi: OrdinaryCharacter,
                    theta: OrdinaryCharacter) -> bool:
    """m(Ind chi, theta) == m(chi, Res theta) for irreducible chi, theta."""
    induced = induce_ordinary(subgroup, chi)
    restricted = restrict_ordinary(theta, subgroup)
    return multiplicity(theta, induced) == multiplicity(chi, restricted)
