"""Subgroups of free groups as folded labeled graphs.

The fundamental group of a finite graph is free; a finitely generated
subgroup is stored as its pointed Stallings core: a folded graph immersed
over the ambient graph by a labeling of edges.  Folding a wedge of loops,
membership by path tracing, rank counting, images of subgroups under
endomorphisms, kernel stabilization, the stable quotient data, and Hall
completion of a core to a finite cover all live here.

A labeling sends positive darts to positive ambient darts; the label of a
reversed dart is the reversed label.  Folded means no vertex carries two
out-darts with the same label, so tracing an ambient path through the graph
is deterministic wherever it is possible at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import (
    EdgePath, SerreGraph, edge_of, inv, is_positive, reduce_darts,
)


class LabeledGraph:
    """Graph immersed over an ambient graph via an edge labeling.

    ``edge_label`` maps each edge id to an ambient edge id (positive darts to
    positive darts); ``vertex_image`` maps vertices to ambient vertices.  The
    labeling must respect incidence.
    """

    def __init__(self, graph, ambient, edge_label, vertex_image):
        self.graph = graph
        self.ambient = ambient
        self.edge_label = dict(edge_label)
        self.vertex_image = dict(vertex_image)
        for e, o, t in graph.edge_data:
            a = self.edge_label[e]
            if a not in ambient.edge_ids:
                raise ValueError("label %r is not an ambient edge" % a)
            if (self.vertex_image[o] != ambient.origin(a)
                    or self.vertex_image[t] != ambient.terminus(a)):
                raise ValueError("labeling of %r breaks incidence" % e)
        steps = {}
        immersed = True
        for d in graph.darts:
            key = (graph.origin(d), self.dart_label(d))
            if key in steps:
                immersed = False
            steps[key] = d
        self._steps = steps
        self._immersed = immersed

    def dart_label(self, d):
        if is_positive(d):
            return self.edge_label[d]
        return inv(self.edge_label[inv(d)])

    def project_darts(self, darts):
        return tuple(self.dart_label(d) for d in darts)

    def is_immersion(self):
        return self._immersed

    def step(self, vertex, ambient_dart):
        """The unique dart at ``vertex`` labeled ``ambient_dart``, or None."""
        return self._steps.get((vertex, ambient_dart))

    def trace(self, vertex, ambient_darts):
        """Lift an ambient dart sequence from a vertex, while possible.

        Returns ``(end_vertex, lifted_darts, consumed)``; ``consumed`` is the
        number of steps that existed.
        """
        out = []
        cur = vertex
        for i, a in enumerate(ambient_darts):
            d = self.step(cur, a)
            if d is None:
                return cur, tuple(out), i
            out.append(d)
            cur = self.graph.terminus(d)
        return cur, tuple(out), len(ambient_darts)

    def fiber(self, ambient_vertex):
        return tuple(v for v in self.graph.vertices
                     if self.vertex_image[v] == ambient_vertex)

    def is_covering(self):
        """Every vertex carries exactly one dart per ambient dart upstairs."""
        if not self._immersed:
            return False
        for v in self.graph.vertices:
            have = sorted(self.dart_label(d) for d in self.graph.out_darts(v))
            want = sorted(self.ambient.out_darts(self.vertex_image[v]))
            if have != want:
                return False
        return True

    def degree(self):
        sizes = {u: len(self.fiber(u)) for u in self.ambient.vertices}
        if len(set(sizes.values())) != 1:
            raise ValueError("fibers have unequal sizes; not a covering")
        return next(iter(sizes.values()))


class SubgroupGraph(LabeledGraph):
    """Pointed folded core representing a finitely generated subgroup."""

    def __init__(self, graph, ambient, edge_label, vertex_image, basepoint):
        super().__init__(graph, ambient, edge_label, vertex_image)
        if basepoint not in graph._out:
            raise ValueError("basepoint %r is not a vertex" % basepoint)
        self.basepoint = basepoint
        self._basis = None

    def rank(self):
        return len(self.graph.edge_ids) - len(self.graph.vertices) + 1

    def is_folded(self):
        return self._immersed

    def core_violations(self):
        """Non-basepoint vertices of valence < 2 (a pointed core has none)."""
        return tuple(v for v in self.graph.vertices
                     if v != self.basepoint and self.graph.valence(v) < 2)

    def spanning_tree(self):
        """BFS tree from the basepoint: (tree edge set, dart path to each vertex)."""
        parent_path = {self.basepoint: ()}
        tree = set()
        queue = [self.basepoint]
        while queue:
            v = queue.pop(0)
            for d in self.graph.out_darts(v):
                w = self.graph.terminus(d)
                if w not in parent_path:
                    parent_path[w] = parent_path[v] + (d,)
                    tree.add(edge_of(d))
                    queue.append(w)
        return tree, parent_path

    def basis(self):
        """Free basis from the non-tree edges.

        Returns a list of ``(name, loop_darts, ambient_word)`` triples; the
        loop runs through the tree to the extra edge and back, freely
        reduced, and the ambient word is its projection.
        """
        if self._basis is not None:
            return self._basis
        tree, path_to = self.spanning_tree()
        gens = []
        extra = [e for e in self.graph.edge_ids if e not in tree]
        for i, e in enumerate(sorted(extra)):
            o = self.graph.origin(e)
            t = self.graph.terminus(e)
            loop = reduce_darts(
                path_to[o] + (e,) + tuple(inv(d) for d in reversed(path_to[t])))
            gens.append(("g%d" % i, loop, self.project_darts(loop)))
        self._basis = gens
        return gens

    def generator_words(self):
        return [word for (_, _, word) in self.basis()]

    def contains(self, ambient_darts):
        """Membership of a loop at the basepoint, by deterministic tracing."""
        word = reduce_darts(tuple(ambient_darts))
        end, _, consumed = self.trace(self.basepoint, word)
        return consumed == len(word) and end == self.basepoint

    def rewrite(self, ambient_darts):
        """Express a member loop in the basis; tokens are (name, sign).

        Crossing a non-tree edge positively emits +1, negatively -1; tree
        crossings emit nothing.  The result is freely reduced as a word in
        the abstract generators.
        """
        word = reduce_darts(tuple(ambient_darts))
        end, lifted, consumed = self.trace(self.basepoint, word)
        if consumed != len(word) or end != self.basepoint:
            raise ValueError("word is not in the subgroup")
        tree, _ = self.spanning_tree()
        names = {}
        for name, loop, _w in self.basis():
            # the defining non-tree edge is the unique non-tree dart on the loop
            for d in loop:
                if edge_of(d) not in tree:
                    names[edge_of(d)] = name
                    break
        out = []
        for d in lifted:
            e = edge_of(d)
            if e in tree:
                continue
            tok = (names[e], 1 if is_positive(d) else -1)
            if out and out[-1][0] == tok[0] and out[-1][1] == -tok[1]:
                out.pop()
            else:
                out.append(tok)
        return tuple(out)

    def canonical_key(self):
        return (self.graph.vertices, self.graph.edge_data,
                tuple(sorted(self.edge_label.items())),
                tuple(sorted(self.vertex_image.items())),
                self.basepoint)

    def __eq__(self, other):
        return (isinstance(other, SubgroupGraph)
                and self.ambient == other.ambient
                and self.canonical_key() == other.canonical_key())

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return "SubgroupGraph(rank %d, %d vertices)" % (
            self.rank(), len(self.graph.vertices))


def whole_group_graph(ambient, basepoint):
    """The ambient graph as the degree-one cover of itself."""
    return SubgroupGraph(
        ambient, ambient,
        {e: e for e in ambient.edge_ids},
        {v: v for v in ambient.vertices},
        basepoint)


# -- folding -----------------------------------------------------------------


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def fold(ambient, basepoint, loops):
    """Stallings core of the subgroup generated by loops at the basepoint.

    Builds the wedge of the (freely reduced) loops, folds equal-labeled darts
    until the graph is an immersion, trims stray valence-one vertices, and
    renames everything by breadth-first search from the basepoint so that the
    result is canonical: permuting the input loops returns an identical
    object.
    """
    if basepoint not in ambient._out and basepoint not in ambient.vertices:
        raise ValueError("unknown basepoint %r" % basepoint)
    words = []
    for loop in loops:
        if isinstance(loop, EdgePath):
            darts = loop.darts
        elif isinstance(loop, str):
            from .graphs import token_dart
            darts = tuple(token_dart(t) for t in loop.split())
        else:
            darts = tuple(loop)
        darts = reduce_darts(darts)
        if not darts:
            continue
        if (ambient.origin(darts[0]) != basepoint
                or ambient.terminus(darts[-1]) != basepoint):
            raise ValueError("loop %r is not closed at the basepoint" % (darts,))
        words.append(darts)

    # wedge: vertices and edges as integers, edges carry (ambient edge, o, t)
    vparent = [0]
    vamb = [basepoint]
    eparent = []
    elabel = []
    eends = []  # [origin, terminus] per edge

    def new_vertex(u):
        vparent.append(len(vparent))
        vamb.append(u)
        return len(vparent) - 1

    def new_edge(label, o, t):
        eparent.append(len(eparent))
        elabel.append(label)
        eends.append([o, t])
        return len(eparent) - 1

    for word in words:
        cur = 0
        for i, d in enumerate(word):
            last = i == len(word) - 1
            nxt = 0 if last else new_vertex(ambient.terminus(d))
            if is_positive(d):
                new_edge(d, cur, nxt)
            else:
                new_edge(inv(d), nxt, cur)
            cur = nxt

    # darts_at[v]: signed label -> list of (edge, side); side 0 is the
    # positive dart at the origin, side 1 the reversed dart at the terminus
    darts_at = {v: {} for v in range(len(vparent))}
    for e in range(len(eparent)):
        o, t = eends[e]
        darts_at[o].setdefault(elabel[e], []).append((e, 0))
        darts_at[t].setdefault(inv(elabel[e]), []).append((e, 1))

    queue = list(range(len(vparent)))
    while queue:
        v = _find(vparent, queue.pop())
        table = darts_at.get(v)
        if table is None:
            continue
        refold = False
        for slabel, entries in list(table.items()):
            live = []
            seen = set()
            for e, side in entries:
                er = _find(eparent, e)
                if er not in seen:
                    seen.add(er)
                    live.append((er, side))
            table[slabel] = live
            if len(live) < 2:
                continue
            (e1, s1), (e2, s2) = live[0], live[1]
            # same signed label at the same vertex: identify the two edges
            # and their far endpoints
            a = _find(vparent, eends[e1][1 - s1])
            b = _find(vparent, eends[e2][1 - s2])
            eparent[_find(eparent, e2)] = _find(eparent, e1)
            if a != b:
                if vamb[a] != vamb[b]:
                    raise AssertionError("fold merged distinct ambient vertices")
                # merge smaller dart table into larger
                if len(darts_at[a]) < len(darts_at[b]):
                    a, b = b, a
                vparent[b] = a
                for sl, lst in darts_at[b].items():
                    darts_at[a].setdefault(sl, []).extend(lst)
                del darts_at[b]
                queue.append(a)
            refold = True
            break
        if refold:
            queue.append(v)

    # surviving edges and vertices
    edges = {}
    for e in range(len(eparent)):
        er = _find(eparent, e)
        if er not in edges:
            o = _find(vparent, eends[er][0])
            t = _find(vparent, eends[er][1])
            edges[er] = [elabel[er], o, t]
        # normalize stored endpoints as we go
    for er, (lab, o, t) in edges.items():
        edges[er] = [lab, _find(vparent, o), _find(vparent, t)]

    incident = {}
    for er, (lab, o, t) in edges.items():
        incident.setdefault(o, set()).add((er, 0))
        incident.setdefault(t, set()).add((er, 1))
    base = _find(vparent, 0)
    incident.setdefault(base, set())

    # trim hanging trees away from the basepoint (reduced inputs rarely
    # produce any, but the pass keeps the core invariant unconditional)
    changed = True
    while changed:
        changed = False
        for v, inc in list(incident.items()):
            if v == base or len(inc) != 1:
                continue
            (er, side) = next(iter(inc))
            lab, o, t = edges[er]
            other = t if side == 0 else o
            del edges[er]
            del incident[v]
            incident[other].discard((er, 1 - side))
            changed = True

    # canonical renaming by BFS from the basepoint
    order = {base: "w0"}
    seq = [base]
    new_edges = []
    elab = {}
    vimg = {order[base]: vamb[base]}
    visited_edges = set()
    head = 0
    while head < len(seq):
        v = seq[head]
        head += 1
        # darts at v sorted by signed ambient label; folded graphs have at
        # most one dart per label so the order is total
        local = []
        for (er, side) in incident[v]:
            lab = edges[er][0]
            slabel = lab if side == 0 else inv(lab)
            local.append((slabel, er, side))
        for slabel, er, side in sorted(local):
            if er in visited_edges:
                continue
            visited_edges.add(er)
            lab, o, t = edges[er]
            far = t if side == 0 else o
            if far not in order:
                order[far] = "w%d" % len(order)
                vimg[order[far]] = vamb[far]
                seq.append(far)
            name = "e%d" % len(new_edges)
            new_edges.append((name, order[o], order[t]))
            elab[name] = lab
    graph = SerreGraph(list(order.values()), new_edges,
                       allow_isolated=not new_edges)
    return SubgroupGraph(graph, ambient, elab, vimg, "w0")


# -- endomorphisms of the fundamental group ----------------------------------


class Pi1Endomorphism:
    """Endomorphism of the fundamental group carried by a graph self-map.

    Stores the basepoint (which the map must fix), a spanning tree, and the
    induced free basis as reduced loops; arbitrary loops are pushed through
    the map and freely reduced.  Abstract endomorphisms of free groups are
    handled by realizing them on a rose.
    """

    def __init__(self, f, base, tree_edges, basis):
        self.map = f
        self.ambient = f.domain
        self.base = base
        self.tree_edges = frozenset(tree_edges)
        self.basis = dict(basis)  # name -> dart tuple (reduced loop at base)

    @property
    def rank(self):
        return len(self.basis)

    def basis_names(self):
        return tuple(sorted(self.basis))

    def apply_word(self, darts, times=1):
        word = tuple(darts)
        for _ in range(times):
            word = reduce_darts(self.map.apply_to_darts(word))
        return word

    def basis_images(self):
        return {name: self.apply_word(loop)
                for name, loop in self.basis.items()}

    def __repr__(self):
        return "Pi1Endomorphism(rank %d at %r)" % (self.rank, self.base)


def pi1_endomorphism(f, base=None, tree=None):
    """Induced endomorphism at a fixed vertex of a graph self-map.

    The basepoint must be fixed by the map; pass an iterate of the map at a
    periodic vertex otherwise.  The basis has one generator per non-tree
    edge: through the tree, across the edge, and back.
    """
    if not f.is_self_map:
        raise ValueError("need a self map")
    graph = f.domain
    if base is None:
        fixed = [v for v in graph.vertices if f.vertex_map[v] == v]
        if not fixed:
            raise ValueError("map fixes no vertex; pass a suitable iterate")
        base = fixed[0]
    if f.vertex_map[base] != base:
        raise ValueError("basepoint %r is not fixed" % base)
    if not graph.is_connected():
        raise ValueError("graph is not connected")
    if tree is None:
        helper = whole_group_graph(graph, base)
        tree, path_to = helper.spanning_tree()
    else:
        tree = set(tree)
        if len(tree) != len(graph.vertices) - 1:
            raise ValueError("given edge set is not a spanning tree")
        helper = whole_group_graph(graph, base)
        full_tree, path_to = helper.spanning_tree()
        if tree != full_tree:
            # recompute paths constrained to the given tree
            path_to = {base: ()}
            queue = [base]
            while queue:
                v = queue.pop(0)
                for d in graph.out_darts(v):
                    if edge_of(d) not in tree:
                        continue
                    w = graph.terminus(d)
                    if w not in path_to:
                        path_to[w] = path_to[v] + (d,)
                        queue.append(w)
            if len(path_to) != len(graph.vertices):
                raise ValueError("given edge set is not a spanning tree")
    basis = {}
    extra = [e for e in sorted(graph.edge_ids) if e not in tree]
    for i, e in enumerate(extra):
        o, t = graph.origin(e), graph.terminus(e)
        loop = reduce_darts(
            path_to[o] + (e,) + tuple(inv(d) for d in reversed(path_to[t])))
        basis["x%d" % i] = loop
    return Pi1Endomorphism(f, base, tree, basis)


def endomorphism_on_rose(generators, images):
    """Abstract endomorphism of a free group, realized on a rose.

    ``images`` maps generator names to token words over the generators.
    """
    from .graphs import GraphMap, rose, token_dart
    rose_graph = rose(generators)
    edge_images = {}
    for g in generators:
        word = images[g]
        if isinstance(word, str):
            darts = tuple(token_dart(t) for t in word.split())
        else:
            darts = tuple(word)
        edge_images[g] = darts
    f = GraphMap(rose_graph, rose_graph, {"v": "v"}, edge_images)
    return pi1_endomorphism(f, "v")


def image_subgroup(phi, k):
    """Stallings graph of the image of the k-th power (k = 0: whole group)."""
    if k < 0:
        raise ValueError("negative power")
    if k == 0:
        return whole_group_graph(phi.ambient, phi.base)
    words = [phi.apply_word(loop, k) for loop in
             (phi.basis[n] for n in phi.basis_names())]
    return fold(phi.ambient, phi.base, words)


def map_subgroup(phi, sub):
    """Image of a subgroup under the endomorphism, as a folded core."""
    if sub.vertex_image[sub.basepoint] != phi.base:
        raise ValueError("subgroup is not based at the endomorphism basepoint")
    words = [phi.apply_word(w) for w in sub.generator_words()]
    return fold(phi.ambient, phi.base, words)


def is_injective_on(phi, sub):
    """Whether the endomorphism is injective on the given subgroup.

    Finitely generated free groups are Hopfian, so injectivity on a rank-n
    subgroup is equivalent to its image having rank n.
    """
    return map_subgroup(phi, sub).rank() == sub.rank()


def kernel_stabilization(phi):
    """Smallest K with the kernel of the (K+1)-st power equal to the K-th.

    Equivalently the first K at which the endomorphism is injective on the
    image of its K-th power; ranks of the image chain strictly decrease
    until then and are preserved from K on.
    """
    current = whole_group_graph(phi.ambient, phi.base)
    k = 0
    while True:
        nxt = fold(phi.ambient, phi.base,
                   [phi.apply_word(w) for w in current.generator_words()])
        if nxt.rank() == current.rank():
            return k
        current = nxt
        k += 1


@dataclass
class StableQuotientReport:
    """Stable image data of a free group endomorphism.

    ``exponent`` is the kernel stabilization constant; ``core`` the folded
    graph of the stable image subgroup, on which the endomorphism restricts
    injectively; ``restriction`` expresses that restriction in the core's
    basis (token words, ``-`` marking inverses).
    """

    exponent: int
    core: SubgroupGraph
    rank: int
    restriction: dict
    injective: bool

    def restriction_word(self, name):
        return self.restriction[name]


def _tokens_to_text(tokens):
    return " ".join(n if s > 0 else "-" + n for (n, s) in tokens)


def stable_quotient(phi):
    """Kernel stabilization constant plus the restricted endomorphism."""
    K = kernel_stabilization(phi)
    core = image_subgroup(phi, K)
    restriction = {}
    for name, _loop, word in core.basis():
        image = phi.apply_word(word)
        restriction[name] = _tokens_to_text(core.rewrite(image))
    return StableQuotientReport(
        exponent=K,
        core=core,
        rank=core.rank(),
        restriction=restriction,
        injective=is_injective_on(phi, core),
    )


def induces_pi1_isomorphism(f):
    """Whether a graph self-map is a homotopy equivalence.

    Surjectivity on the fundamental group is checked by folding the images
    of a basis and asking for the degree-one cover; injectivity then follows
    from Hopficity and is not checked separately.
    """
    graph = f.domain
    if not graph.is_connected():
        return False
    v = graph.vertices[0]
    helper = whole_group_graph(graph, v)
    base_image = f.vertex_map[v]
    words = [f.apply_to_darts(w) for w in helper.generator_words()]
    folded = fold(graph, base_image, words)
    return (folded.is_covering()
            and len(folded.graph.vertices) == len(graph.vertices))


# -- Hall completion ----------------------------------------------------------


def _fresh_names(prefix, taken, count):
    out = []
    i = 0
    while len(out) < count:
        name = "%s%d" % (prefix, i)
        if name not in taken:
            out.append(name)
        i += 1
    return out


def hall_completion(sub):
    """Embed a folded core into a finite cover of the ambient graph.

    Fibers are padded to a common size with fresh vertices, then for every
    ambient edge the partially defined source-to-target matching given by the
    core is completed to a bijection, pairing unmatched sources with
    unmatched targets in vertex-id order.  The core keeps its ids, so the
    embedding is the identity on it; the degree never exceeds the number of
    core vertices (plus padding needed to even out the fibers).
    """
    ambient = sub.ambient
    graph = sub.graph
    fibers = {u: list(sub.fiber(u)) for u in ambient.vertices}
    degree = max(1, max(len(f) for f in fibers.values()))
    taken = set(graph.vertices)
    pad_needed = sum(degree - len(f) for f in fibers.values())
    pads = _fresh_names("h", taken, pad_needed)
    pi = 0
    vertex_image = dict(sub.vertex_image)
    for u in sorted(fibers):
        while len(fibers[u]) < degree:
            name = pads[pi]
            pi += 1
            fibers[u].append(name)
            vertex_image[name] = u
    edges = list(graph.edge_data)
    edge_label = dict(sub.edge_label)
    new_edge_names = _fresh_names(
        "q", set(graph.edge_ids), degree * len(ambient.edge_ids))
    ni = 0
    for a in sorted(ambient.edge_ids):
        u, w = ambient.origin(a), ambient.terminus(a)
        matched_src = set()
        matched_dst = set()
        for x in fibers[u]:
            d = sub.step(x, a) if x in graph._out else None
            if d is not None:
                matched_src.add(x)
                matched_dst.add(graph.terminus(d))
        free_src = sorted(x for x in fibers[u] if x not in matched_src)
        free_dst = sorted(y for y in fibers[w] if y not in matched_dst)
        # self-loops upstairs: u == w shares the fiber, counts still balance
        if len(free_src) != len(free_dst):
            raise AssertionError("unbalanced partial matching for %r" % a)
        for x, y in zip(free_src, free_dst):
            name = new_edge_names[ni]
            ni += 1
            edges.append((name, x, y))
            edge_label[name] = a
    all_vertices = [v for f in fibers.values() for v in f]
    cover_graph = SerreGraph(all_vertices, edges)
    cover = LabeledGraph(cover_graph, ambient, edge_label, vertex_image)
    if not cover.is_covering():
        raise AssertionError("completion failed to produce a covering")
    return cover
