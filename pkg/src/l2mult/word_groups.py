"""Built-in infinite groups with solvable word problems.

Supported families: free groups, free abelian groups, the infinite dihedral
group <t, s | s^2, s t s = t^-1>, and free-by-finite semidirect products
F_r : H for a finite group H acting on the free generators.  Elements are
``Word`` values stored in a per-family normal form; matrices over the
rational group ring and quotient maps onto finite groups are built on top.

Serialization uses the alphabet a, b, c, ... for the generators with a
trailing apostrophe for inverses ("ab'a"), "1" for the identity, and group
ring sums like "3/2*ab' + -1*1".
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .finite_groups import FiniteGroup, FiniteSubgroup


class WordGroupError(Exception):
    pass


class ChainBroken(WordGroupError):
    def __init__(self, level, detail=""):
        self.level = level
        super().__init__(f"chain broken at level {level}: {detail}")


class BuiltinGroup:
    """Base for the built-in families; subclasses provide the word problem."""

    family = "abstract"
    n_letters = 0

    def identity(self) -> "Word":
        return Word(self, self.identity_data())

    def generator(self, i: int) -> "Word":
        if not 0 <= i < self.n_letters:
            raise WordGroupError(f"no generator {i}")
        return Word(self, self.data_from_letters(((i, 1),)))

    def word(self, text: str) -> "Word":
        return Word(self, self.data_from_letters(parse_letters(text)))

    def data_from_letters(self, letters):
        data = self.identity_data()
        for (i, e) in letters:
            data = self.mul_data(data, self.letter_data(i, e))
        return data

    # subclasses implement: identity_data, letter_data, mul_data, inv_data,
    # letters_of
    def __repr__(self):
        return f"{type(self).__name__}()"


@dataclass(frozen=True)
class Word:
    group: BuiltinGroup
    data: tuple

    def __mul__(self, other: "Word") -> "Word":
        if other.group is not self.group:
            raise WordGroupError("words from different groups")
        return Word(self.group, self.group.mul_data(self.data, other.data))

    def inverse(self) -> "Word":
        return Word(self.group, self.group.inv_data(self.data))

    def is_identity(self) -> bool:
        return self.data == self.group.identity_data()

    def letters(self):
        return self.group.letters_of(self.data)

    def __str__(self):
        return format_letters(self.letters())

    def __hash__(self):
        return hash((id(self.group), self.data))

    def __eq__(self, other):
        return isinstance(other, Word) and other.group is self.group \
            and other.data == self.data


def parse_letters(text: str):
    text = text.strip()
    if text in ("", "1"):
        return ()
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if not c.isalpha():
            raise WordGroupError(f"bad word syntax: {text!r}")
        idx = ord(c.lower()) - 97
        i += 1
        exp = 1
        if i < len(text) and text[i] == "'":
            exp = -1
            i += 1
        out.append((idx, exp))
    return tuple(out)


def format_letters(letters) -> str:
    if not letters:
        return "1"
    return "".join(chr(97 + i) + ("'" if e < 0 else "") for i, e in letters)


def normal_form(word: Word) -> Word:
    """Words are stored normalized; method kept as the public entry point."""
    return Word(word.group, word.group.data_from_letters(word.letters()))


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def _free_reduce_append(letters: list, item):
    if letters and letters[-1][0] == item[0] and letters[-1][1] == -item[1]:
        letters.pop()
    else:
        letters.append(item)


class FreeGroup(BuiltinGroup):
    family = "free"

    def __init__(self, rank: int):
        if not 0 < rank <= 26:
            raise WordGroupError("rank must be between 1 and 26")
        self.rank = rank
        self.n_letters = rank

    def identity_data(self):
        return ()

    def letter_data(self, i, e):
        if not 0 <= i < self.rank:
            raise WordGroupError(f"no generator {i}")
        return ((i, e),)

    def mul_data(self, d1, d2):
        out = list(d1)
        for item in d2:
            _free_reduce_append(out, item)
        return tuple(out)

    def inv_data(self, d):
        return tuple((i, -e) for i, e in reversed(d))

    def letters_of(self, d):
        return d

    def __repr__(self):
        return f"FreeGroup({self.rank})"


class FreeAbelianGroup(BuiltinGroup):
    family = "free_abelian"

    def __init__(self, rank: int):
        if not 0 < rank <= 26:
            raise WordGroupError("rank must be between 1 and 26")
        self.rank = rank
        self.n_letters = rank

    def identity_data(self):
        return (0,) * self.rank

    def letter_data(self, i, e):
        if not 0 <= i < self.rank:
            raise WordGroupError(f"no generator {i}")
        v = [0] * self.rank
        v[i] = e
        return tuple(v)

    def mul_data(self, d1, d2):
        return tuple(x + y for x, y in zip(d1, d2))

    def inv_data(self, d):
        return tuple(-x for x in d)

    def letters_of(self, d):
        out = []
        for i, k in enumerate(d):
            out.extend([(i, 1 if k > 0 else -1)] * abs(k))
        return tuple(out)

    def __repr__(self):
        return f"FreeAbelianGroup({self.rank})"


class InfiniteDihedralGroup(BuiltinGroup):
    """<t, s | s^2 = 1, s t s = t^-1>; normal form t^k or t^k s.

    Letter 0 is t, letter 1 is s.
    """

    family = "dihedral_infinite"
    n_letters = 2

    def identity_data(self):
        return (0, 0)

    def letter_data(self, i, e):
        if i == 0:
            return (e, 0)
        if i == 1:
            return (0, 1)
        raise WordGroupError(f"no generator {i}")

    def mul_data(self, d1, d2):
        k1, e1 = d1
        k2, e2 = d2
        return (k1 + (k2 if e1 == 0 else -k2), e1 ^ e2)

    def inv_data(self, d):
        k, e = d
        return ((-k, 0) if e == 0 else (k, 1))

    def letters_of(self, d):
        k, e = d
        out = [(0, 1 if k > 0 else -1)] * abs(k)
        if e:
            out.append((1, 1))
        return tuple(out)


class FreeByFiniteGroup(BuiltinGroup):
    """F_rank : H with H acting on the free group through generator images.

    ``action`` maps H generator indices to lists of ``rank`` words (strings
    or letter tuples) giving the images of the free generators.  The letters
    of the product group are the free generators followed by one letter per
    H generator.
    """

    family = "free_by_finite"

    def __init__(self, rank: int, h_group: FiniteGroup, action: dict):
        if rank <= 0:
            raise WordGroupError("rank must be positive")
        self.rank = rank
        self.h_group = h_group
        self.free = FreeGroup(rank)
        self.h_letter_of = {g: rank + pos for pos, g in enumerate(h_group.generators)}
        self.n_letters = rank + len(h_group.generators)
        if self.n_letters > 26:
            raise WordGroupError("alphabet is limited to 26 letters")
        self._aut = self._extend_action(action)
        self._h_words = self._shortest_h_words()

    def _parse_free(self, w):
        if isinstance(w, str):
            return self.free.data_from_letters(parse_letters(w))
        return tuple(w)

    def _apply(self, images, d):
        out = ()
        for i, e in d:
            img = images[i]
            out = self.free.mul_data(out, img if e > 0 else self.free.inv_data(img))
        return out

    def _extend_action(self, action: dict):
        h = self.h_group
        ident_images = tuple(self.free.letter_data(i, 1) for i in range(self.rank))
        aut: list[tuple | None] = [None] * h.order
        aut[0] = ident_images
        gen_images = {}
        for g in h.generators:
            words = action[g]
            if len(words) != self.rank:
                raise WordGroupError("action must give one image per generator")
            gen_images[g] = tuple(self._parse_free(w) for w in words)
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g, imgs in gen_images.items():
                y = h.mul(x, g)
                # left action: (x*g) acts as x after g
                new = tuple(self._apply(aut[x], img) for img in imgs)
                if aut[y] is None:
                    aut[y] = new
                    frontier.append(y)
                elif aut[y] != new:
                    raise WordGroupError("action maps are inconsistent on H")
        if any(m is None for m in aut):
            raise WordGroupError("action generators do not generate H")
        # invertibility: each aut must be bijective on the free group
        for x in range(h.order):
            inv_images = aut[h.inv(x)]
            for i in range(self.rank):
                if self._apply(inv_images, aut[x][i]) != ((i, 1),):
                    raise WordGroupError("action images are not automorphisms")
        return aut

    def _shortest_h_words(self):
        h = self.h_group
        words: list[tuple | None] = [None] * h.order
        words[0] = ()
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for g in h.generators:
                for e, y in ((1, h.mul(x, g)), (-1, h.mul(x, h.inv(g)))):
                    if words[y] is None:
                        words[y] = words[x] + ((self.h_letter_of[g], e),)
                        queue.append(y)
        return words

    def apply_aut(self, h_idx: int, free_data):
        return self._apply(self._aut[h_idx], free_data)

    def identity_data(self):
        return ((), 0)

    def letter_data(self, i, e):
        if i < self.rank:
            return (((i, e),), 0)
        pos = i - self.rank
        if pos >= len(self.h_group.generators):
            raise WordGroupError(f"no generator {i}")
        g = self.h_group.generators[pos]
        return ((), g if e > 0 else self.h_group.inv(g))

    def mul_data(self, d1, d2):
        u1, h1 = d1
        u2, h2 = d2
        return (self.free.mul_data(u1, self.apply_aut(h1, u2)),
                self.h_group.mul(h1, h2))

    def inv_data(self, d):
        u, h = d
        hi = self.h_group.inv(h)
        return (self.apply_aut(hi, self.free.inv_data(u)), hi)

    def letters_of(self, d):
        u, h = d
        return tuple(u) + self._h_words[h]

    def __repr__(self):
        return f"FreeByFiniteGroup({self.rank}, {self.h_group.name})"


# ---------------------------------------------------------------------------
# Group ring matrices
# ---------------------------------------------------------------------------

def _add_term(d: dict, key, coeff):
    nv = d.get(key, 0) + coeff
    if nv:
        d[key] = nv
    else:
        d.pop(key, None)


def parse_ring_sum(group: BuiltinGroup, text: str) -> dict[Word, Fraction]:
    out: dict[Word, Fraction] = {}
    text = text.strip()
    if text in ("", "0"):
        return out
    for part in text.split(" + "):
        part = part.strip()
        if "*" in part:
            coeff_s, word_s = part.split("*", 1)
            coeff = Fraction(coeff_s.strip())
        else:
            coeff, word_s = Fraction(1), part
        _add_term(out, group.word(word_s.strip()), coeff)
    return out


def format_ring_sum(terms: dict) -> str:
    if not terms:
        return "0"
    keys = sorted(terms, key=lambda w: (len(w.letters()), str(w)))
    return " + ".join(f"{terms[k]}*{k}" for k in keys)


class GroupRingMatrix:
    """Rectangular matrix over the rational group ring of a built-in group."""

    def __init__(self, group: BuiltinGroup, rows: int, cols: int, entries=None):
        self.group = group
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], dict[Word, Fraction]] = {}
        if entries:
            for (i, j), terms in entries.items():
                clean = {w: Fraction(c) for w, c in terms.items() if c}
                if clean:
                    self.entries[(i, j)] = clean

    @classmethod
    def from_strings(cls, group: BuiltinGroup, rows_of_sums):
        rows = len(rows_of_sums)
        cols = len(rows_of_sums[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows_of_sums):
            if len(row) != cols:
                raise WordGroupError("ragged matrix")
            for j, text in enumerate(row):
                terms = parse_ring_sum(group, text)
                if terms:
                    entries[(i, j)] = terms
        return cls(group, rows, cols, entries)

    def entry(self, i, j) -> dict[Word, Fraction]:
        return self.entries.get((i, j), {})

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if other.group is not self.group or self.cols != other.rows:
            raise WordGroupError("shape/group mismatch")
        out: dict[tuple[int, int], dict[Word, Fraction]] = {}
        by_row: dict[int, list] = {}
        for (j, k), terms in other.entries.items():
            by_row.setdefault(j, []).append((k, terms))
        for (i, j), left in self.entries.items():
            for k, right in by_row.get(j, []):
                target = out.setdefault((i, k), {})
                for w1, c1 in left.items():
                    for w2, c2 in right.items():
                        _add_term(target, w1 * w2, c1 * c2)
        clean = {key: terms for key, terms in out.items() if terms}
        return GroupRingMatrix(self.group, self.rows, other.cols, clean)

    def adjoint(self) -> "GroupRingMatrix":
        out = {}
        for (i, j), terms in self.entries.items():
            out[(j, i)] = {w.inverse(): c for w, c in terms.items()}
        return GroupRingMatrix(self.group, self.cols, self.rows, out)

    def scale(self, c) -> "GroupRingMatrix":
        c = Fraction(c)
        out = {key: {w: c * v for w, v in terms.items()}
               for key, terms in self.entries.items()}
        return GroupRingMatrix(self.group, self.rows, self.cols, out)

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if (other.group, other.rows, other.cols) != (self.group, self.rows, self.cols):
            raise WordGroupError("shape/group mismatch")
        out = {key: dict(terms) for key, terms in self.entries.items()}
        for key, terms in other.entries.items():
            target = out.setdefault(key, {})
            for w, c in terms.items():
                _add_term(target, w, c)
        return GroupRingMatrix(self.group, self.rows, self.cols, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        return isinstance(other, GroupRingMatrix) and other.group is self.group \
            and (other.rows, other.cols) == (self.rows, self.cols) \
            and other.entries == self.entries

    def sup_norm_bound(self) -> Fraction:
        """Sum of |coefficient| over all entries; dominates the operator norm
        of the matrix in every unitary representation."""
        total = Fraction(0)
        for terms in self.entries.values():
            for c in terms.values():
                total += abs(c)
        return total

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for terms in self.entries.values()
                   for c in terms.values())

    def __repr__(self):
        body = "; ".join(
            ", ".join(format_ring_sum(self.entry(i, j)) for j in range(self.cols))
            for i in range(self.rows))
        return f"[{body}]"


class FiniteAlgebraMatrix:
    """Matrix over the rational group algebra of a finite group; entries map
    element indices to rational coefficients."""

    def __init__(self, group: FiniteGroup, rows: int, cols: int, entries=None):
        self.group = group
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], dict[int, Fraction]] = {}
        if entries:
            for (i, j), terms in entries.items():
                clean = {g: Fraction(c) for g, c in terms.items() if c}
                if clean:
                    self.entries[(i, j)] = clean

    def entry(self, i, j) -> dict[int, Fraction]:
        return self.entries.get((i, j), {})

    def __matmul__(self, other: "FiniteAlgebraMatrix") -> "FiniteAlgebraMatrix":
        if other.group is not self.group or self.cols != other.rows:
            raise WordGroupError("shape/group mismatch")
        mul = self.group.mul
        out: dict[tuple[int, int], dict[int, Fraction]] = {}
        by_row: dict[int, list] = {}
        for (j, k), terms in other.entries.items():
            by_row.setdefault(j, []).append((k, terms))
        for (i, j), left in self.entries.items():
            for k, right in by_row.get(j, []):
                target = out.setdefault((i, k), {})
                for g1, c1 in left.items():
                    for g2, c2 in right.items():
                        _add_term(target, mul(g1, g2), c1 * c2)
        clean = {key: terms for key, terms in out.items() if terms}
        return FiniteAlgebraMatrix(self.group, self.rows, other.cols, clean)

    def adjoint(self) -> "FiniteAlgebraMatrix":
        inv = self.group.inv
        out = {}
        for (i, j), terms in self.entries.items():
            out[(j, i)] = {inv(g): c for g, c in terms.items()}
        return FiniteAlgebraMatrix(self.group, self.cols, self.rows, out)

    def power(self, k: int) -> "FiniteAlgebraMatrix":
        if self.rows != self.cols:
            raise WordGroupError("power of a non-square matrix")
        result = FiniteAlgebraMatrix(
            self.group, self.rows, self.cols,
            {(i, i): {0: Fraction(1)} for i in range(self.rows)})
        for _ in range(k):
            result = result @ self
        return result

    def sup_norm_bound(self) -> Fraction:
        total = Fraction(0)
        for terms in self.entries.values():
            for c in terms.values():
                total += abs(c)
        return total

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for terms in self.entries.values()
                   for c in terms.values())

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebraMatrix) and other.group is self.group \
            and (other.rows, other.cols) == (self.rows, self.cols) \
            and other.entries == self.entries


# ---------------------------------------------------------------------------
# Quotient maps and chains
# ---------------------------------------------------------------------------

class QuotientMap:
    """Surjection from a built-in group onto a finite group, fixed by the
    images of the alphabet letters."""

    def __init__(self, source: BuiltinGroup, target: FiniteGroup, generator_images):
        self.source = source
        self.target = target
        self.generator_images = tuple(generator_images)
        if len(self.generator_images) != source.n_letters:
            raise WordGroupError("one image per alphabet letter required")
        self._check_relators()
        self._check_surjective()

    def _check_relators(self):
        src, tgt = self.source, self.target
        imgs = self.generator_images
        if isinstance(src, FreeGroup):
            return
        if isinstance(src, FreeAbelianGroup):
            for i in range(len(imgs)):
                for j in range(i + 1, len(imgs)):
                    if tgt.mul(imgs[i], imgs[j]) != tgt.mul(imgs[j], imgs[i]):
                        raise WordGroupError("images do not commute")
            return
        if isinstance(src, InfiniteDihedralGroup):
            t_img, s_img = imgs
            if tgt.mul(s_img, s_img) != 0:
                raise WordGroupError("s^2 relator not honoured")
            sts = tgt.mul(tgt.mul(s_img, t_img), s_img)
            if sts != tgt.inv(t_img):
                raise WordGroupError("sts = t^-1 relator not honoured")
            return
        if isinstance(src, FreeByFiniteGroup):
            h = src.h_group
            # H-part must be a homomorphism H -> target
            h_images = {g: imgs[src.h_letter_of[g]] for g in h.generators}
            himg: list[int | None] = [None] * h.order
            himg[0] = 0
            frontier = [0]
            while frontier:
                x = frontier.pop()
                for g, ig in h_images.items():
                    y = h.mul(x, g)
                    iy = tgt.mul(himg[x], ig)
                    if himg[y] is None:
                        himg[y] = iy
                        frontier.append(y)
                    elif himg[y] != iy:
                        raise WordGroupError("H-letter images break H relations")
            self._h_elem_images = himg
            # semidirect relations: h a_i h^-1 = action_h(a_i)
            for g in h.generators:
                hg = h_images[g]
                for i in range(src.rank):
                    lhs = tgt.mul(tgt.mul(hg, imgs[i]), tgt.inv(hg))
                    rhs = self._eval_free(src.apply_aut(g, ((i, 1),)))
                    if lhs != rhs:
                        raise WordGroupError("semidirect relations not honoured")
            return
        raise WordGroupError(f"unsupported family {src.family}")

    def _eval_free(self, free_data) -> int:
        acc = 0
        for i, e in free_data:
            img = self.generator_images[i]
            acc = self.target.mul(acc, img if e > 0 else self.target.inv(img))
        return acc

    def _check_surjective(self):
        tgt = self.target
        seen = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for img in self.generator_images:
                for y in (tgt.mul(x, img), tgt.mul(x, tgt.inv(img))):
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
        if len(seen) != tgt.order:
            raise WordGroupError("generator images do not generate the target")

    def __call__(self, word: Word) -> int:
        return self.evaluate(word)

    def evaluate(self, word: Word) -> int:
        if word.group is not self.source:
            raise WordGroupError("word from a different group")
        acc = 0
        tgt = self.target
        for i, e in word.letters():
            img = self.generator_images[i]
            acc = tgt.mul(acc, img if e > 0 else tgt.inv(img))
        return acc


def push_matrix(qmap: QuotientMap, a: GroupRingMatrix) -> FiniteAlgebraMatrix:
    """Apply the induced ring map entrywise, collecting coefficients."""
    if a.group is not qmap.source:
        raise WordGroupError("matrix over a different group")
    out = {}
    for (i, j), terms in a.entries.items():
        target: dict[int, Fraction] = {}
        for w, c in terms.items():
            _add_term(target, qmap.evaluate(w), c)
        if target:
            out[(i, j)] = target
    return FiniteAlgebraMatrix(qmap.target, a.rows, a.cols, out)


class FiniteIndexSubgroup:
    """Subgroup presented as the preimage of a finite subgroup under a
    quotient map."""

    def __init__(self, via: QuotientMap, fiber: FiniteSubgroup):
        if fiber.parent is not via.target:
            raise WordGroupError("fiber must live in the quotient target")
        self.via = via
        self.fiber = fiber

    @property
    def group(self) -> BuiltinGroup:
        return self.via.source

    @property
    def index(self) -> int:
        return self.fiber.index

    def is_normal(self) -> bool:
        return self.fiber.is_normal()

    def contains(self, word: Word) -> bool:
        return self.via.evaluate(word) in set(self.fiber.members)


@dataclass
class ChainLevelReport:
    level: int
    index: int
    normal: bool


class QuotientChain:
    def __init__(self, levels, connectors):
        if len(connectors) != max(len(levels) - 1, 0):
            raise WordGroupError("need one connector between consecutive levels")
        self.levels = list(levels)
        self.connectors = list(connectors)
        src = self.levels[0].group if self.levels else None
        for lv in self.levels:
            if lv.group is not src:
                raise WordGroupError("levels over different groups")

    @property
    def group(self):
        return self.levels[0].group


def validate_chain(chain: QuotientChain) -> list[ChainLevelReport]:
    """Check connector compatibility and fiber containment; report indices."""
    reports = []
    for n, lv in enumerate(chain.levels):
        if n + 1 < len(chain.levels):
            conn = chain.connectors[n]
            deeper = chain.levels[n + 1]
            if conn.source is not deeper.via.target or conn.target is not lv.via.target:
                raise ChainBroken(n, "connector endpoints mismatch")
            for i in range(chain.group.n_letters):
                if conn(deeper.via.generator_images[i]) != lv.via.generator_images[i]:
                    raise ChainBroken(n, f"generator {chr(97 + i)}")
            fiber_low = set(lv.fiber.members)
            for m in deeper.fiber.members:
                if conn(m) not in fiber_low:
                    raise ChainBroken(n, "fiber does not map into fiber")
        reports.append(ChainLevelReport(n, lv.index, lv.is_normal()))
    return reports


def intersection_heuristic(chain: QuotientChain, max_words: int = 20000) -> int:
    """Largest L such that no nonidentity word of length <= L lies in the
    deepest subgroup of the chain (balls enumerated up to ``max_words``)."""
    deepest = chain.levels[-1]
    grp = chain.group
    gens = [grp.generator(i) for i in range(grp.n_letters)]
    gens += [g.inverse() for g in gens]
    seen = {grp.identity()}
    sphere = [grp.identity()]
    length = 0
    while True:
        nxt = []
        for w in sphere:
            for g in gens:
                u = w * g
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        if not nxt:
            return length
        length += 1
        for u in nxt:
            if deepest.contains(u) and not u.is_identity():
                return length - 1
        if len(seen) > max_words:
            return length
        sphere = nxt


__all__ = [
    "BuiltinGroup", "FreeGroup", "FreeAbelianGroup", "InfiniteDihedralGroup",
    "FreeByFiniteGroup", "Word", "normal_form", "parse_letters",
    "format_letters", "parse_ring_sum", "format_ring_sum", "GroupRingMatrix",
    "FiniteAlgebraMatrix", "QuotientMap", "push_matrix",
    "FiniteIndexSubgroup", "QuotientChain", "ChainBroken", "validate_chain",
    "intersection_heuristic", "WordGroupError",
]
