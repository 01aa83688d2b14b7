"""Finite portraits of p-adic tree automorphisms with rooted-cycle labels.

A depth-n portrait stores one residue mod p for every internal vertex of the
rooted p-ary tree of depth n, in breadth-first order. The label k at a vertex
means the automorphism permutes the subtrees below it by the k-th power of the
standard cycle (1 2 ... p). Words over the alphabet {1, ..., p} name vertices;
automorphisms act on the right.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class TreeError(ValueError):
    """Malformed portrait data or an operation outside its domain."""


@lru_cache(maxsize=None)
def level_offsets(p: int, depth: int) -> tuple[int, ...]:
    """Start index of each level's label block; the last entry is the total."""
    out = [0]
    size = 1
    for _ in range(depth):
        out.append(out[-1] + size)
        size *= p
    return tuple(out)


def label_count(p: int, depth: int) -> int:
    return level_offsets(p, depth)[-1]


class Portrait:
    """Immutable depth-limited tree automorphism in labelled form."""

    __slots__ = ("p", "depth", "labels", "_images")

    def __init__(self, p: int, depth: int, labels, _checked: bool = False):
        if not _checked:
            if p < 2:
                raise TreeError(f"alphabet size must be at least 2, got {p}")
            if depth < 0:
                raise TreeError(f"depth must be nonnegative, got {depth}")
        arr = np.asarray(labels, dtype=np.int16)
        if not _checked:
            want = label_count(p, depth)
            if arr.shape != (want,):
                raise TreeError(
                    f"expected {want} labels for depth {depth}, got shape {arr.shape}"
                )
            if arr.size and (arr.min() < 0 or arr.max() >= p):
                raise TreeError("labels must be residues in 0..p-1")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        self.p = p
        self.depth = depth
        self.labels = arr
        self._images = None

    @classmethod
    def identity(cls, p: int, depth: int) -> "Portrait":
        return cls(p, depth, np.zeros(label_count(p, depth), dtype=np.int16), _checked=True)

    @classmethod
    def rooted(cls, p: int, depth: int, k: int) -> "Portrait":
        """The automorphism a^k rotating the top-level subtrees."""
        labels = np.zeros(label_count(p, depth), dtype=np.int16)
        if depth > 0:
            labels[0] = k % p
        return cls(p, depth, labels, _checked=True)

    # -- structure ----------------------------------------------------------

    def level_labels(self, level: int) -> np.ndarray:
        offs = level_offsets(self.p, self.depth)
        return self.labels[offs[level] : offs[level + 1]]

    def _level_images(self) -> list[np.ndarray]:
        """Image position arrays per level; entry l is the permutation on level l."""
        if self._images is None:
            p = self.p
            offs = level_offsets(p, self.depth)
            imgs = [np.zeros(1, dtype=np.int64)]
            ar = np.arange(p, dtype=np.int64)
            for l in range(self.depth):
                lab = self.labels[offs[l] : offs[l + 1]].astype(np.int64)
                nxt = (imgs[l][:, None] * p + (ar[None, :] + lab[:, None]) % p).ravel()
                imgs.append(nxt)
            self._images = imgs
        return self._images

    def is_identity(self) -> bool:
        return not self.labels.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Portrait):
            return NotImplemented
        return (
            self.p == other.p
            and self.depth == other.depth
            and self.labels.tobytes() == other.labels.tobytes()
        )

    def __hash__(self) -> int:
        return hash((self.p, self.depth, self.labels.tobytes()))

    def __repr__(self) -> str:
        return f"Portrait(p={self.p}, depth={self.depth}, labels={self.labels.tolist()})"

    # -- action -------------------------------------------------------------

    def act(self, vertex: tuple[int, ...]) -> tuple[int, ...]:
        """Image of a vertex (word of letters in 1..p, length at most depth)."""
        if len(vertex) > self.depth:
            raise TreeError(
                f"vertex of length {len(vertex)} exceeds portrait depth {self.depth}"
            )
        p = self.p
        offs = level_offsets(p, self.depth)
        pos = 0
        out = []
        for level, x in enumerate(vertex):
            if not 1 <= x <= p:
                raise TreeError(f"letter {x} outside 1..{p}")
            k = int(self.labels[offs[level] + pos])
            out.append((x - 1 + k) % p + 1)
            pos = pos * p + (x - 1)
        return tuple(out)

    def fixes(self, vertex: tuple[int, ...]) -> bool:
        return self.act(vertex) == tuple(vertex)

    def leaf_permutation(self, level: int | None = None) -> np.ndarray:
        """Permutation induced on the vertices of the given level (0-based positions)."""
        if level is None:
            level = self.depth
        if not 0 <= level <= self.depth:
            raise TreeError(f"level {level} outside 0..{self.depth}")
        return self._level_images()[level].copy()

    # -- group operations ----------------------------------------------------

    def __mul__(self, other: "Portrait") -> "Portrait":
        """Composition, self applied first."""
        if not isinstance(other, Portrait):
            return NotImplemented
        if self.p != other.p or self.depth != other.depth:
            raise TreeError("portraits must share alphabet and depth to compose")
        p = self.p
        offs = level_offsets(p, self.depth)
        out = np.empty_like(self.labels)
        imgs = self._level_images()
        for l in range(self.depth):
            sl = slice(offs[l], offs[l + 1])
            out[sl] = (self.labels[sl] + other.labels[sl][imgs[l]]) % p
        return Portrait(p, self.depth, out, _checked=True)

    def __invert__(self) -> "Portrait":
        p = self.p
        offs = level_offsets(p, self.depth)
        out = np.empty_like(self.labels)
        imgs = self._level_images()
        for l in range(self.depth):
            sl = slice(offs[l], offs[l + 1])
            out[sl][imgs[l]] = (-self.labels[sl]) % p
        return Portrait(p, self.depth, out, _checked=True)

    def __pow__(self, e: int) -> "Portrait":
        if e < 0:
            return (~self) ** (-e)
        result = Portrait.identity(self.p, self.depth)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def conj(self, g: "Portrait") -> "Portrait":
        """Conjugate of self by g (g inverse, then self, then g)."""
        return ~g * self * g

    def order(self) -> int:
        """Order as an automorphism of the truncated tree (a power of p)."""
        n = 1
        g = self
        while not g.is_identity():
            g = g ** self.p
            n *= self.p
        return n

    # -- tree surgery ---------------------------------------------------------

    def section(self, vertex: tuple[int, ...]) -> "Portrait":
        """Restriction to the subtree under a vertex the portrait fixes."""
        if not self.fixes(vertex):
            raise TreeError(f"section undefined: vertex {vertex} is moved")
        k = len(vertex)
        p = self.p
        offs = level_offsets(p, self.depth)
        q = 0
        for x in vertex:
            q = q * p + (x - 1)
        sub_depth = self.depth - k
        out = np.empty(label_count(p, sub_depth), dtype=np.int16)
        sub_offs = level_offsets(p, sub_depth)
        width = 1
        for l in range(sub_depth):
            src = offs[k + l] + q * width
            out[sub_offs[l] : sub_offs[l + 1]] = self.labels[src : src + width]
            width *= p
        return Portrait(p, sub_depth, out, _checked=True)

    def truncate(self, depth: int) -> "Portrait":
        if not 0 <= depth <= self.depth:
            raise TreeError(f"cannot truncate depth {self.depth} to {depth}")
        return Portrait(self.p, depth, self.labels[: label_count(self.p, depth)], _checked=True)

    @classmethod
    def embed(cls, p: int, depth: int, vertex: tuple[int, ...], sub: "Portrait") -> "Portrait":
        """Portrait acting as `sub` below `vertex` and trivially elsewhere."""
        k = len(vertex)
        if sub.p != p or sub.depth != depth - k:
            raise TreeError("embedded portrait must have depth equal to the remaining depth")
        q = 0
        for x in vertex:
            if not 1 <= x <= p:
                raise TreeError(f"letter {x} outside 1..{p}")
            q = q * p + (x - 1)
        labels = np.zeros(label_count(p, depth), dtype=np.int16)
        offs = level_offsets(p, depth)
        sub_offs = level_offsets(p, sub.depth)
        width = 1
        for l in range(sub.depth):
            dst = offs[k + l] + q * width
            labels[dst : dst + width] = sub.labels[sub_offs[l] : sub_offs[l + 1]]
            width *= p
        return cls(p, depth, labels, _checked=True)

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        body = " ".join(str(int(x)) for x in self.labels)
        return f"{self.p} {self.depth}\n{body}\n" if body else f"{self.p} {self.depth}\n"

    @classmethod
    def from_text(cls, text: str) -> "Portrait":
        tokens = text.split()
        if len(tokens) < 2:
            raise TreeError("portrait text needs a 'p depth' header")
        try:
            p, depth = int(tokens[0]), int(tokens[1])
        except ValueError as exc:
            raise TreeError(f"bad portrait header {tokens[:2]}") from exc
        if p < 2 or depth < 0:
            raise TreeError(f"bad portrait header values p={p} depth={depth}")
        want = label_count(p, depth)
        body = tokens[2:]
        if len(body) != want:
            raise TreeError(f"expected {want} labels, got {len(body)}")
        try:
            labels = [int(t) for t in body]
        except ValueError as exc:
            raise TreeError("labels must be integers") from exc
        return cls(p, depth, labels)


def commutator(x: Portrait, y: Portrait) -> Portrait:
    return ~x * ~y * x * y
