"""Finite partial orders and their linear extensions.

A :class:`ResponsivePoset` keeps the relation "x is ranked above y" closed
under transitivity.  It may also carry *links*: a link ``(a, b, c, d)``
says that in every admissible total order ``a`` is above ``b`` exactly when
``c`` is above ``d``.  Links are how set preferences of hospitals with
capacity three or more are expressed, since adding a common doctor to two
sets must preserve their comparison in both directions.
"""
from __future__ import annotations

import random
from collections import deque
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import ExtensionCapExceeded, InconsistentOrder

DEFAULT_EXTENSION_CAP = 10**5


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _close(up, down, links, queue, edges=None):
    """Add every relation in ``queue`` and propagate.

    Mutates ``up``/``down`` in place.  Returns ``None`` on success or the
    offending pair ``(i, j)`` when ``j`` is already known to be above ``i``.
    """
    while queue:
        i, j = queue.pop()
        if i == j or (up[i] >> j) & 1:
            return (i, j)
        if (down[i] >> j) & 1:
            continue
        if edges is not None:
            edges.append((i, j))
        above_i = up[i] | (1 << i)
        below_j = down[j] | (1 << j)
        for x in _bits(above_i):
            new = below_j & ~down[x]
            if not new:
                continue
            down[x] |= new
            bit_x = 1 << x
            for y in _bits(new):
                up[y] |= bit_x
                if links:
                    queue.extend(links.get((x, y), ()))
    return None


class ResponsivePoset:
    """A strict partial order over ``elements``, transitively closed.

    ``relations`` are pairs ``(better, worse)``.  ``links`` are 4-tuples of
    elements, see the module docstring.  Raises :class:`InconsistentOrder`
    naming a cycle when the constraints admit no total order.
    """

    def __init__(
        self,
        elements: Iterable[Hashable],
        relations: Iterable[tuple] = (),
        links: Iterable[tuple] = (),
    ):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValueError("duplicate elements in poset ground set")
        n = len(self.elements)
        self._up = [0] * n
        self._down = [0] * n
        self._link_list = []
        self._links: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for link in links:
            a, b, c, d = (self.index[e] for e in link)
            self._link_list.append((a, b, c, d))
            for key, val in (((a, b), (c, d)), ((c, d), (a, b)),
                             ((b, a), (d, c)), ((d, c), (b, a))):
                self._links.setdefault(key, []).append(val)
        self._edges: list[tuple[int, int]] = []
        for better, worse in relations:
            self._add(self.index[better], self.index[worse])
        self._open = tuple(
            lk for lk in self._link_list
            if not self._known(lk[0], lk[1]) and not self._known(lk[2], lk[3])
        )

    def _known(self, i, j):
        return bool((self._down[i] >> j) & 1 or (self._up[i] >> j) & 1)

    def _add(self, i, j):
        bad = _close(self._up, self._down, self._links, [(i, j)], self._edges)
        if bad is not None:
            raise InconsistentOrder(self._cycle(*bad))

    def _cycle(self, i, j):
        # i > j was requested while j > i already follows from earlier edges
        if i == j:
            return [self.elements[i], self.elements[i]]
        graph: dict[int, list[int]] = {}
        for a, b in self._edges:
            graph.setdefault(a, []).append(b)
        prev = {j: None}
        todo = deque([j])
        while todo:
            x = todo.popleft()
            if x == i:
                break
            for y in graph.get(x, ()):
                if y not in prev:
                    prev[y] = x
                    todo.append(y)
        path = []
        x = i
        while x is not None:
            path.append(x)
            x = prev.get(x)
        path.reverse()
        return [self.elements[k] for k in [i] + path]

    def __len__(self):
        return len(self.elements)

    def above(self, a, b) -> bool:
        """True when ``a`` is ranked above ``b`` in every extension."""
        return bool((self._down[self.index[a]] >> self.index[b]) & 1)

    def comparable(self, a, b) -> bool:
        return self.above(a, b) or self.above(b, a)

    @property
    def open_links(self):
        """Links neither side of which is settled by the relation."""
        return tuple(tuple(self.elements[k] for k in lk) for lk in self._open)

    def relations(self) -> Iterator[tuple]:
        for i, e in enumerate(self.elements):
            for j in _bits(self._down[i]):
                yield e, self.elements[j]

    def is_extension(self, order: Sequence) -> bool:
        """Check that ``order`` (best first) is an admissible total order."""
        if len(order) != len(self.elements) or set(order) != set(self.elements):
            return False
        pos = [0] * len(self.elements)
        for k, e in enumerate(order):
            pos[self.index[e]] = k
        for i in range(len(self.elements)):
            for j in _bits(self._down[i]):
                if pos[i] > pos[j]:
                    return False
        return all(
            (pos[a] < pos[b]) == (pos[c] < pos[d]) for a, b, c, d in self._link_list
        )


def _extensions(poset: ResponsivePoset, rng: random.Random | None = None):
    """Yield index sequences of admissible total orders.

    Deterministic (available elements tried in ground-set order) unless
    ``rng`` is given, in which case the choice order is shuffled.
    """
    n = len(poset.elements)
    full = (1 << n) - 1
    links = poset._links if poset._open else None

    def available(up, remaining):
        cand = [i for i in _bits(remaining) if not up[i] & remaining]
        if rng is not None:
            rng.shuffle(cand)
        return cand

    if links is None:
        up = poset._up

        def rec(remaining, prefix):
            if not remaining:
                yield tuple(prefix)
                return
            for i in available(up, remaining):
                prefix.append(i)
                yield from rec(remaining & ~(1 << i), prefix)
                prefix.pop()

        yield from rec(full, [])
        return

    def rec_linked(up, down, remaining, prefix):
        if not remaining:
            yield tuple(prefix)
            return
        for i in available(up, remaining):
            u, d = up[:], down[:]
            rest = remaining & ~(1 << i)
            queue = [(i, j) for j in _bits(rest & ~d[i])]
            if _close(u, d, links, queue) is None:
                prefix.append(i)
                yield from rec_linked(u, d, rest, prefix)
                prefix.pop()

    yield from rec_linked(poset._up[:], poset._down[:], full, [])


def enumerate_extensions(
    poset: ResponsivePoset, cap: int = DEFAULT_EXTENSION_CAP
) -> Iterator[tuple]:
    """Yield every linear extension of ``poset`` exactly once, best first.

    Raises :class:`ExtensionCapExceeded` once more than ``cap`` extensions
    would be produced; the ``cap`` items before that have been yielded.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    els = poset.elements
    for count, seq in enumerate(_extensions(poset)):
        if count >= cap:
            raise ExtensionCapExceeded(count)
        yield tuple(els[i] for i in seq)


def count_extensions(poset: ResponsivePoset, cap: int = DEFAULT_EXTENSION_CAP) -> int:
    n = 0
    for _ in enumerate_extensions(poset, cap):
        n += 1
    return n


def first_extension(poset: ResponsivePoset) -> tuple:
    """The canonical extension: first in enumeration order."""
    return next(enumerate_extensions(poset, cap=1))


def sample_extension(poset: ResponsivePoset, seed: int) -> tuple:
    """A random linear extension, deterministic for a given ``seed``.

    Built as a random topological completion: at each step a uniformly
    chosen currently-maximal element goes next.
    """
    rng = random.Random(seed)
    seq = next(_extensions(poset, rng))
    return tuple(poset.elements[i] for i in seq)
