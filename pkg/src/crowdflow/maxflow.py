"""Exact s-t max-flow / min-cut (Boykov-Kolmogorov, numba-compiled).

Arcs live in a CSR layout sorted stably by tail node, so the traversal order,
and with it the cut chosen among equal-capacity cuts, depends only on the
order in which edges were added.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import MalformedNetwork

# search-tree membership
FREE = 0
IN_S = 1
IN_T = 2
# parent-arc sentinels
ROOT = -2
ORPHAN = -3


@numba.njit(cache=True)
def _boykov_kolmogorov(n, s, t, start, head, rev, cap):
    # Two search trees grown from s and t and repaired after each
    # augmentation. parent[v] is the arc linking v to its tree parent,
    # oriented along the flow (parent->v in S, v->parent in T).
    # ts/dist cache "has a valid path to the root" per augmentation.
    # ``cap`` holds residual capacities and is updated in place.
    tree = np.zeros(n, np.int8)
    parent = np.full(n, -1, np.int64)
    ts = np.zeros(n, np.int64)
    dist = np.zeros(n, np.int64)
    queue = np.empty(n, np.int64)
    in_queue = np.zeros(n, np.bool_)
    orphans = np.empty(n, np.int64)
    qh = 0
    tree[s] = IN_S
    tree[t] = IN_T
    parent[s] = ROOT
    parent[t] = ROOT
    dist[s] = 0
    dist[t] = 0
    queue[0] = s
    queue[1 % n] = t
    in_queue[s] = True
    in_queue[t] = True
    qc = 2
    time = 1
    ts[s] = 1
    ts[t] = 1
    flow = 0.0
    while True:
        mid = -1
        while qc > 0:
            p = queue[qh]
            if tree[p] == FREE:
                in_queue[p] = False
                qh = (qh + 1) % n
                qc -= 1
                continue
            if tree[p] == IN_S:
                for a in range(start[p], start[p + 1]):
                    if cap[a] > 0.0:
                        q = head[a]
                        if tree[q] == FREE:
                            tree[q] = IN_S
                            parent[q] = a
                            ts[q] = ts[p]
                            dist[q] = dist[p] + 1
                            if not in_queue[q]:
                                in_queue[q] = True
                                queue[(qh + qc) % n] = q
                                qc += 1
                        elif tree[q] == IN_T:
                            mid = a
                            break
            else:
                for a in range(start[p], start[p + 1]):
                    r = rev[a]
                    if cap[r] > 0.0:
                        q = head[a]
                        if tree[q] == FREE:
                            tree[q] = IN_T
                            parent[q] = r
                            ts[q] = ts[p]
                            dist[q] = dist[p] + 1
                            if not in_queue[q]:
                                in_queue[q] = True
                                queue[(qh + qc) % n] = q
                                qc += 1
                        elif tree[q] == IN_S:
                            mid = r
                            break
            if mid >= 0:
                break
            in_queue[p] = False
            qh = (qh + 1) % n
            qc -= 1
        if mid < 0:
            break
        # augment along s ~> x -> y ~> t
        time += 1
        x = head[rev[mid]]
        y = head[mid]
        b = cap[mid]
        v = x
        while v != s:
            a = parent[v]
            if cap[a] < b:
                b = cap[a]
            v = head[rev[a]]
        v = y
        while v != t:
            a = parent[v]
            if cap[a] < b:
                b = cap[a]
            v = head[a]
        cap[mid] -= b
        cap[rev[mid]] += b
        oh = 0
        oc = 0
        v = x
        while v != s:
            a = parent[v]
            cap[a] -= b
            cap[rev[a]] += b
            nxt = head[rev[a]]
            if cap[a] <= 0.0:
                parent[v] = ORPHAN
                orphans[(oh + oc) % n] = v
                oc += 1
            v = nxt
        v = y
        while v != t:
            a = parent[v]
            cap[a] -= b
            cap[rev[a]] += b
            nxt = head[a]
            if cap[a] <= 0.0:
                parent[v] = ORPHAN
                orphans[(oh + oc) % n] = v
                oc += 1
            v = nxt
        flow += b
        # adoption: reattach orphans or release them to FREE
        while oc > 0:
            v = orphans[oh]
            oh = (oh + 1) % n
            oc -= 1
            side = tree[v]
            best = -1
            dmin = 1 << 60
            for a in range(start[v], start[v + 1]):
                q = head[a]
                if tree[q] != side:
                    continue
                cand = rev[a] if side == IN_S else a
                if cap[cand] <= 0.0:
                    continue
                # origin check
                d = 0
                u = q
                ok = False
                while True:
                    if ts[u] == time:
                        d += dist[u]
                        ok = True
                        break
                    pa = parent[u]
                    d += 1
                    if pa == ROOT:
                        ts[u] = time
                        dist[u] = 1
                        ok = True
                        break
                    if pa == ORPHAN:
                        break
                    u = head[rev[pa]] if side == IN_S else head[pa]
                if ok:
                    if d < dmin:
                        best = cand
                        dmin = d
                    u = q
                    while ts[u] != time:
                        ts[u] = time
                        dist[u] = d
                        d -= 1
                        pa = parent[u]
                        u = head[rev[pa]] if side == IN_S else head[pa]
            if best >= 0:
                parent[v] = best
                ts[v] = time
                dist[v] = dmin + 1
                continue
            for a in range(start[v], start[v + 1]):
                q = head[a]
                if tree[q] != side:
                    continue
                cand = rev[a] if side == IN_S else a
                if cap[cand] > 0.0 and not in_queue[q]:
                    in_queue[q] = True
                    queue[(qh + qc) % n] = q
                    qc += 1
                child_arc = a if side == IN_S else rev[a]
                if parent[q] == child_arc:
                    parent[q] = ORPHAN
                    orphans[(oh + oc) % n] = q
                    oc += 1
            tree[v] = FREE
    return flow


@numba.njit(cache=True)
def _sink_reachable(n, t, start, head, rev, cap):
    """Nodes that can still reach t through positive residual arcs."""
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    seen[t] = True
    queue[0] = t
    qh = 0
    qt = 1
    while qh < qt:
        x = queue[qh]
        qh += 1
        for a in range(start[x], start[x + 1]):
            w = head[a]
            if not seen[w] and cap[rev[a]] > 0.0:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen


def build_csr(n, tails, heads, caps, rev_caps):
    """Pair every edge with its reverse arc and sort arcs by tail (stable).

    Returns ``(start, head, rev, cap, forward_pos)`` where ``forward_pos[i]``
    is the CSR slot of edge i's forward arc.
    """
    m = len(tails)
    arc_tail = np.empty(2 * m, np.int64)
    arc_head = np.empty(2 * m, np.int64)
    arc_cap = np.empty(2 * m, np.float64)
    arc_tail[0::2], arc_tail[1::2] = tails, heads
    arc_head[0::2], arc_head[1::2] = heads, tails
    arc_cap[0::2], arc_cap[1::2] = caps, rev_caps
    order = np.argsort(arc_tail, kind="stable")
    pos = np.empty(2 * m, np.int64)
    pos[order] = np.arange(2 * m)
    rev = pos[order ^ 1]
    start = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(arc_tail, minlength=n), out=start[1:])
    return start, arc_head[order], rev, arc_cap[order], pos[0::2]


def solve_arrays(n, s, t, tails, heads, caps, rev_caps):
    """Max-flow on edge arrays without validation.

    Returns ``(value, source_side, residual_forward)``; ``source_side`` marks
    every node that cannot reach t in the final residual graph.
    """
    start, head, rev, cap, fpos = build_csr(n, tails, heads, caps, rev_caps)
    value = _boykov_kolmogorov(n, s, t, start, head, rev, cap)
    sink_side = _sink_reachable(n, t, start, head, rev, cap)
    return value, ~sink_side, cap[fpos]


@dataclass
class MaxFlowResult:
    value: float
    source_side: np.ndarray
    edge_flow: np.ndarray

    def __iter__(self):
        yield self.value
        yield self.source_side


class FlowNetwork:
    """Directed network with paired reverse arcs and two terminals."""

    def __init__(self, num_nodes: int, source: int, sink: int):
        if num_nodes < 2:
            raise MalformedNetwork("network needs at least two nodes")
        if source == sink:
            raise MalformedNetwork("source and sink must differ")
        for term in (source, sink):
            if not 0 <= term < num_nodes:
                raise MalformedNetwork(f"terminal {term} outside [0, {num_nodes})")
        self.num_nodes = num_nodes
        self.source = source
        self.sink = sink
        self._tails = []
        self._heads = []
        self._caps = []
        self._rev_caps = []

    def add_edge(self, u: int, v: int, cap: float, rev_cap: float = 0.0) -> int:
        """Add arc u->v (and its pair v->u with ``rev_cap``); returns the edge id."""
        for node in (u, v):
            if not 0 <= node < self.num_nodes:
                raise MalformedNetwork(f"node {node} outside [0, {self.num_nodes})")
        if u == v:
            raise MalformedNetwork(f"self-loop at node {u}")
        for c in (cap, rev_cap):
            if not np.isfinite(c) or c < 0:
                raise MalformedNetwork(f"capacity must be finite and >= 0, got {c}")
        self._tails.append(u)
        self._heads.append(v)
        self._caps.append(float(cap))
        self._rev_caps.append(float(rev_cap))
        return len(self._tails) - 1

    @property
    def num_edges(self) -> int:
        return len(self._tails)

    def arrays(self):
        return (
            np.asarray(self._tails, dtype=np.int64),
            np.asarray(self._heads, dtype=np.int64),
            np.asarray(self._caps, dtype=np.float64),
            np.asarray(self._rev_caps, dtype=np.float64),
        )

    def cut_capacity(self, source_side) -> float:
        """Total capacity of arcs leaving ``source_side``."""
        side = np.asarray(source_side, dtype=bool)
        tails, heads, caps, rev_caps = self.arrays()
        fwd = side[tails] & ~side[heads]
        bwd = side[heads] & ~side[tails]
        return float(caps[fwd].sum() + rev_caps[bwd].sum())


def max_flow(network: FlowNetwork) -> MaxFlowResult:
    """Maximum s-t flow and a minimum cut realising it.

    ``edge_flow[i]`` is the net flow along edge i in its added direction
    (negative when it runs through the reverse arc).
    """
    tails, heads, caps, rev_caps = network.arrays()
    value, side, residual = solve_arrays(
        network.num_nodes, network.source, network.sink, tails, heads, caps, rev_caps
    )
    return MaxFlowResult(value=float(value), source_side=side, edge_flow=caps - residual)
