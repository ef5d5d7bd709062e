"""Rooted directed trees stored as parent functions.

A tree is a finite set of string vertex ids together with a parent map in
which the root is the unique fixed point.  Children are kept in insertion
order so that every traversal in the package is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class TreeError(ValueError):
    """Raised for malformed trees or unknown vertices."""


class DirectedTree:
    """Finite rooted tree given by its parent function."""

    __slots__ = ("_parent", "_root", "_children", "_depth")

    def __init__(self, parent: Mapping[str, str], root: str | None = None):
        par = {str(k): str(v) for k, v in parent.items()}
        if not par:
            raise TreeError("tree must have at least one vertex")
        for v, p in par.items():
            if p not in par:
                raise TreeError(f"parent {p!r} of {v!r} is not a vertex")
        fixed = [v for v, p in par.items() if p == v]
        if len(fixed) != 1:
            raise TreeError(f"expected exactly one root, found {len(fixed)}")
        if root is not None and str(root) != fixed[0]:
            raise TreeError(f"declared root {root!r} is not the fixed point {fixed[0]!r}")
        self._root = fixed[0]
        self._parent = par

        children: dict[str, list[str]] = {v: [] for v in par}
        for v, p in par.items():
            if v != p:
                children[p].append(v)
        self._children = {v: tuple(c) for v, c in children.items()}

        # breadth-first depths; anything unreached sits on a cycle or another tree
        depth = {self._root: 0}
        frontier = [self._root]
        while frontier:
            nxt = []
            for v in frontier:
                for u in self._children[v]:
                    depth[u] = depth[v] + 1
                    nxt.append(u)
            frontier = nxt
        if len(depth) != len(par):
            missing = sorted(set(par) - set(depth))[:3]
            raise TreeError(f"vertices not connected to the root: {missing}")
        self._depth = depth

    # basic accessors

    @property
    def root(self) -> str:
        return self._root

    @property
    def vertices(self) -> tuple[str, ...]:
        """Vertices in breadth-first order from the root."""
        return tuple(self._depth)

    @property
    def parent_map(self) -> dict[str, str]:
        return dict(self._parent)

    def __contains__(self, v: object) -> bool:
        return v in self._parent

    def __len__(self) -> int:
        return len(self._parent)

    def __iter__(self) -> Iterator[str]:
        return iter(self._depth)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedTree):
            return NotImplemented
        return self._parent == other._parent

    def __hash__(self) -> int:
        return hash(frozenset(self._parent.items()))

    def __repr__(self) -> str:
        return f"DirectedTree(root={self._root!r}, n={len(self)})"

    def _check(self, v: str) -> None:
        if v not in self._parent:
            raise TreeError(f"unknown vertex {v!r}")

    def parent(self, v: str) -> str:
        self._check(v)
        return self._parent[v]

    def depth(self, v: str) -> int:
        self._check(v)
        return self._depth[v]

    def height(self, v: str | None = None) -> int:
        """Largest distance from v (default: root) to one of its descendants."""
        v = self._root if v is None else v
        base = self.depth(v)
        return max(self._depth[u] for u in self.descendants(v)) - base

    def children(self, v: str) -> tuple[str, ...]:
        self._check(v)
        return self._children[v]

    def children_k(self, v: str, k: int) -> tuple[str, ...]:
        """The k-th children of v; k=0 gives (v,)."""
        self._check(v)
        if k < 0:
            raise TreeError("k must be nonnegative")
        level = (v,)
        for _ in range(k):
            level = tuple(u for w in level for u in self._children[w])
        return level

    def descendants(self, v: str) -> tuple[str, ...]:
        self._check(v)
        out = [v]
        i = 0
        while i < len(out):
            out.extend(self._children[out[i]])
            i += 1
        return tuple(out)

    def leaves(self) -> tuple[str, ...]:
        return tuple(v for v in self._depth if not self._children[v])

    def is_leafless(self, tails: Iterable[str] = ()) -> bool:
        """True iff every vertex has a child or carries a tail marker."""
        marked = set(tails)
        return all(self._children[v] or v in marked for v in self._depth)

    def subtree(self, v: str) -> "DirectedTree":
        self._check(v)
        par = {u: self._parent[u] for u in self.descendants(v)}
        par[v] = v
        return DirectedTree(par)

    def relabel(self, fn) -> "DirectedTree":
        return DirectedTree({fn(v): fn(p) for v, p in self._parent.items()})


@dataclass(frozen=True)
class TreeExtensionMap:
    """New vertices added by a construction and where old vertices went.

    For a backward extension ``new_vertices`` lists the chain from the old
    root's new parent up to the new root.  For a rooted sum it holds the
    fresh root only, and ``embedding`` has one dict per summand.
    """

    new_vertices: tuple[str, ...]
    embedding: tuple[dict[str, str], ...] = field(default_factory=tuple)


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def rooted_sum(
    trees: Sequence[DirectedTree],
    labels: Sequence[str] | None = None,
    root: str = "o",
) -> tuple[DirectedTree, TreeExtensionMap]:
    """Join the trees under a fresh root; summand j is namespaced "label/id"."""
    if not trees:
        raise TreeError("rooted sum of an empty family is not supported")
    if labels is None:
        labels = [str(j + 1) for j in range(len(trees))]
    labels = [str(x) for x in labels]
    if len(labels) != len(trees) or len(set(labels)) != len(labels):
        raise TreeError("labels must be distinct and match the number of trees")
    par: dict[str, str] = {}
    embeds = []
    for lab, t in zip(labels, trees):
        emb = {v: f"{lab}/{v}" for v in t}
        embeds.append(emb)
        for v in t:
            par[emb[v]] = emb[t.parent(v)] if v != t.root else ""
    omega = _fresh(root, par)
    for v, p in par.items():
        if p == "":
            par[v] = omega
    par[omega] = omega
    return DirectedTree(par), TreeExtensionMap((omega,), tuple(embeds))


def backward_extend_tree(tree: DirectedTree, k: int) -> tuple[DirectedTree, TreeExtensionMap]:
    """Add a chain of k new ancestors above the root."""
    if k < 0:
        raise TreeError("k must be nonnegative")
    ident = {v: v for v in tree}
    if k == 0:
        return tree, TreeExtensionMap((), (ident,))
    par = tree.parent_map
    chain = []
    below = tree.root
    for j in range(1, k + 1):
        w = _fresh(f"{tree.root}^{j}", par)
        par[below] = w
        par[w] = w
        chain.append(w)
        below = w
    return DirectedTree(par), TreeExtensionMap(tuple(chain), (ident,))


def path_tree(n: int, prefix: str = "v") -> DirectedTree:
    """Path v0 <- v1 <- ... <- v{n-1} rooted at v0."""
    par = {f"{prefix}0": f"{prefix}0"}
    for i in range(1, n):
        par[f"{prefix}{i}"] = f"{prefix}{i - 1}"
    return DirectedTree(par)


def full_tree(branching: int, depth: int) -> DirectedTree:
    """Complete tree with the given branching; vertex ids are digit paths."""
    par = {"r": "r"}
    level = ["r"]
    for _ in range(depth):
        nxt = []
        for v in level:
            for b in range(branching):
                u = f"{v}.{b}"
                par[u] = v
                nxt.append(u)
        level = nxt
    return DirectedTree(par)
