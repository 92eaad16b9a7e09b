"""Finitely generated group model.

A group is given either by a presentation (generators plus relators, no
rewriting is ever attempted) or by an explicit multiplication table with
identity and inverses, verified exhaustively at load for orders up to
512. Words are freely reduced sequences of signed generator indices:
+k means generator k (1-based), -k its inverse, the empty word is e.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParamsError, SchemaError, UnknownGeneratorError

TABLE_CHECK_LIMIT = 512


def free_reduce(letters) -> tuple:
    out = []
    for k in letters:
        k = int(k)
        if k == 0:
            raise BadParamsError("word letters are nonzero signed integers")
        if out and out[-1] == -k:
            out.pop()
        else:
            out.append(k)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word over signed generator indices."""

    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @property
    def is_empty(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-k for k in reversed(self.letters)))

    def __str__(self) -> str:
        return " ".join(str(k) for k in self.letters) if self.letters else "e"

    @classmethod
    def parse(cls, text: str) -> "Word":
        text = text.strip()
        if text in ("", "e"):
            return cls(())
        try:
            return cls(tuple(int(tok) for tok in text.split()))
        except ValueError as exc:
            raise SchemaError(f"cannot parse word {text!r}") from exc


def parse_word_file(text: str) -> list:
    """One word per line, signed integers separated by spaces, '#' starts a
    comment; blank lines are skipped."""
    words = []
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            words.append(Word.parse(body))
    return words


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Presentation- or table-backed group.

    Table kind carries element names, the n x n index table, the identity
    index, the inverse map, and for each generator symbol the element it
    denotes; every element reachable from the generators also gets a
    canonical spelling (breadth-first shortest word, deterministic ties).
    Presentation kind carries only generators and relators.
    """

    kind: str
    generators: tuple
    relators: tuple = ()
    table: np.ndarray | None = None
    identity: int | None = None
    inverse: tuple | None = None
    elements: tuple | None = None
    generator_elements: tuple | None = None
    canonical_words: tuple = ()  # derived for table kind; do not pass

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if len(set(self.generators)) != len(self.generators):
            raise SchemaError("duplicate generator symbols")
        if self.kind == "presentation":
            self._validate_presentation()
        elif self.kind == "table":
            self._validate_table()
        else:
            raise SchemaError(f"unknown group kind {self.kind!r}")

    def _validate_presentation(self):
        if not self.generators:
            raise SchemaError("presentation needs at least one generator")
        rels = tuple(
            w if isinstance(w, Word) else Word(tuple(w)) for w in self.relators
        )
        for w in rels:
            if w.is_empty:
                raise SchemaError("relators must be nonempty reduced words")
            self.check_letters(w)
        object.__setattr__(self, "relators", rels)

    def _validate_table(self):
        table = np.asarray(self.table, dtype=np.int64)
        n = table.shape[0]
        if table.ndim != 2 or table.shape != (n, n) or n == 0:
            raise SchemaError("table must be a nonempty square index matrix")
        if table.min() < 0 or table.max() >= n:
            raise SchemaError("table entries must be element indices")
        if self.identity is None or not (0 <= self.identity < n):
            raise SchemaError("table kind needs a valid identity index")
        inv = tuple(int(i) for i in (self.inverse or ()))
        if len(inv) != n or any(not 0 <= i < n for i in inv):
            raise SchemaError("inverse map must list one index per element")
        e = int(self.identity)
        rng = np.arange(n)
        if not (np.array_equal(table[e], rng) and np.array_equal(table[:, e], rng)):
            raise SchemaError("identity axiom fails")
        inv_arr = np.asarray(inv)
        if not (
            np.array_equal(table[rng, inv_arr], np.full(n, e))
            and np.array_equal(table[inv_arr, rng], np.full(n, e))
        ):
            raise SchemaError("inverse axiom fails")
        if n <= TABLE_CHECK_LIMIT:
            for a in range(n):
                if not np.array_equal(table[table[a], :], table[a, table]):
                    raise SchemaError(f"associativity fails at element {a}")
        elements = self.elements or tuple(f"g{i}" for i in range(n))
        if len(elements) != n or len(set(elements)) != n:
            raise SchemaError("element names must be distinct, one per element")
        gen_elems = self.generator_elements
        if gen_elems is None and tuple(elements) == tuple(self.generators):
            gen_elems = tuple(range(n))
        gen_elems = tuple(int(i) for i in (gen_elems or ()))
        if len(gen_elems) != len(self.generators) or any(
            not 0 <= i < n for i in gen_elems
        ):
            raise SchemaError("generator_elements must map each generator symbol")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "elements", tuple(elements))
        object.__setattr__(self, "generator_elements", gen_elems)
        object.__setattr__(self, "relators", ())
        object.__setattr__(
            self, "canonical_words", _canonical_spellings(table, e, inv, gen_elems)
        )

    @property
    def order(self) -> int | None:
        return None if self.kind == "presentation" else self.table.shape[0]

    def check_letters(self, word: Word):
        for k in word.letters:
            if abs(k) > len(self.generators):
                raise UnknownGeneratorError(
                    f"letter {k} references generator {abs(k)} but only "
                    f"{len(self.generators)} exist"
                )

    def word_element(self, word: Word) -> int:
        """Element index a word multiplies out to (table kind only)."""
        if self.kind != "table":
            raise BadParamsError("word_element requires a table-kind group")
        self.check_letters(word)
        current = int(self.identity)
        for k in word.letters:
            g = self.generator_elements[abs(k) - 1]
            if k < 0:
                g = self.inverse[g]
            current = int(self.table[current, g])
        return current

    def is_identity_word(self, word: Word) -> bool:
        """Identity test: syntactic (empty reduced word) for presentations,
        table product for table-kind groups."""
        if self.kind == "presentation":
            return word.is_empty
        return self.word_element(word) == self.identity

    def product_word(self, g: Word, h: Word) -> Word:
        """The word gh as the group multiplies: reduced concatenation for
        presentations, the canonical spelling of the product element for
        table-kind groups (so defect metrics see relation failure)."""
        if self.kind == "presentation":
            return g * h
        element = int(self.table[self.word_element(g), self.word_element(h)])
        spelling = self.canonical_words[element]
        if spelling is None:
            return g * h  # unreachable element: keep the free representative
        return Word(spelling)


def _canonical_spellings(table, identity, inverse, gen_elems) -> tuple:
    """Breadth-first shortest spelling of each element over the signed
    generator alphabet; deterministic, letters tried as 1, -1, 2, -2, ...
    in frontier order. Unreachable elements stay None."""
    n = table.shape[0]
    letters = []
    for k, g in enumerate(gen_elems, start=1):
        letters.append((k, g))
        letters.append((-k, inverse[g]))
    spelled: list = [None] * n
    spelled[identity] = ()
    frontier = [identity]
    while frontier:
        nxt = []
        for cur in frontier:
            for letter, g in letters:
                target = int(table[cur, g])
                if spelled[target] is None:
                    spelled[target] = spelled[cur] + (letter,)
                    nxt.append(target)
        frontier = nxt
    return tuple(spelled)


def group_to_json(group: GroupSpec) -> dict:
    if group.kind == "presentation":
        return {
            "kind": "presentation",
            "generators": list(group.generators),
            "relators": [list(w.letters) for w in group.relators],
        }
    return {
        "kind": "table",
        "generators": list(group.generators),
        "table": group.table.tolist(),
        "identity": int(group.identity),
        "inverse": list(group.inverse),
        "elements": list(group.elements),
        "generator_elements": list(group.generator_elements),
    }


def group_from_json(obj) -> GroupSpec:
    try:
        kind = obj["kind"]
        if kind == "presentation":
            return GroupSpec(
                kind="presentation",
                generators=tuple(obj["generators"]),
                relators=tuple(Word(tuple(r)) for r in obj.get("relators", [])),
            )
        if kind == "table":
            return GroupSpec(
                kind="table",
                generators=tuple(obj["generators"]),
                table=np.asarray(obj["table"], dtype=np.int64),
                identity=int(obj["identity"]),
                inverse=tuple(obj["inverse"]),
                elements=tuple(obj["elements"]) if "elements" in obj else None,
                generator_elements=(
                    tuple(obj["generator_elements"])
                    if "generator_elements" in obj
                    else None
                ),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed group JSON: {exc}") from exc
    raise SchemaError(f"unknown group kind {obj.get('kind')!r}")


def _table_group(elements, multiply, names) -> GroupSpec:
    """Assemble a table-kind GroupSpec with every element as a generator."""
    index = {el: i for i, el in enumerate(elements)}
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[multiply(a, b)]
    identity = next(
        i for i in range(n) if all(table[i, j] == j for j in range(n))
    )
    inverse = tuple(
        int(np.flatnonzero(table[i] == identity)[0]) for i in range(n)
    )
    return GroupSpec(
        kind="table",
        generators=tuple(names),
        table=table,
        identity=identity,
        inverse=inverse,
        elements=tuple(names),
        generator_elements=tuple(range(n)),
    )


def cyclic_group(n: int) -> GroupSpec:
    if n < 1:
        raise BadParamsError("cyclic group order must be >= 1")
    names = ["e"] + [f"a{i}" if i > 1 else "a" for i in range(1, n)]
    return _table_group(list(range(n)), lambda a, b: (a + b) % n, names)


def symmetric_group(n: int) -> GroupSpec:
    if not 1 <= n <= 5:
        raise BadParamsError("symmetric groups supported for 1 <= n <= 5")
    perms = sorted(itertools.permutations(range(n)))
    names = ["".join(str(v) for v in perm) for perm in perms]

    def compose(a, b):  # (a b)(x) = a(b(x))
        return tuple(a[b[x]] for x in range(n))

    return _table_group(perms, compose, names)


def dihedral_group(n: int) -> GroupSpec:
    """Symmetries of the regular n-gon, order 2n; elements (i, s) act as
    rotation by i composed with s reflections."""
    if n < 1:
        raise BadParamsError("dihedral group needs n >= 1")
    elements = [(i, s) for s in (0, 1) for i in range(n)]
    names = [f"r{i}" if s == 0 else f"sr{i}" for (i, s) in elements]

    def compose(a, b):
        i, s = a
        j, t = b
        return ((i + j) % n if s == 0 else (i - j) % n, s ^ t)

    return _table_group(elements, compose, names)


_BUILTIN_PATTERN = re.compile(r"^(z|s|d)(\d+)$")


def builtin_group(name: str) -> GroupSpec:
    """Named finite groups for the CLI: z<n> cyclic, s<n> symmetric,
    d<n> dihedral of order 2n."""
    m = _BUILTIN_PATTERN.match(name.strip().lower())
    if not m:
        raise BadParamsError(
            f"unknown builtin group {name!r} (expected z<n>, s<n> or d<n>)"
        )
    family, n = m.group(1), int(m.group(2))
    if family == "z":
        return cyclic_group(n)
    if family == "s":
        return symmetric_group(n)
    return dihedral_group(n)
