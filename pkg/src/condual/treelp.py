"""Shared LP scaffolding over a market's portfolio variables.

Portfolio variables are stacked node by node (tree order), d entries each.
The helpers here produce the constraint rows and the linear maps from the
stacked vector to terminal gains and per-node gains; both the primal
feasibility LPs and the superhedging/dual LPs are assembled from them.
"""

from __future__ import annotations

from .market import MarketModel


def variable_layout(market: MarketModel):
    """(offset per non-leaf node, total variable count)."""
    offsets = {}
    cursor = 0
    for i in market.tree.nonleaf:
        offsets[i] = cursor
        cursor += market.dim
    return offsets, cursor


def constraint_rows(market: MarketModel):
    """Halfspace rows for 'every holding in its constraint set'.

    Raises NotImplementedError when some constraint set has no halfspace
    form (balls); LP-based operations are documented as polyhedral-only.
    """
    offsets, total = variable_layout(market)
    A, b = [], []
    for i, cset in market.constraints:
        hs = cset.halfspaces()
        if hs is None:
            raise NotImplementedError(
                f"constraint at node {market.tree.nodes[i].node_id!r} has no "
                f"halfspace form; LP-based operations need polyhedral "
                f"constraints")
        for row, off in zip(*hs):
            full = [0] * total
            for k, v in enumerate(row):
                full[offsets[i] + k] = v
            A.append(full)
            b.append(off)
    return A, b


def terminal_gain_rows(market: MarketModel):
    """Row per leaf: coefficients of (H . S)_T on the stacked variables."""
    offsets, total = variable_layout(market)
    rows = []
    for leaf in market.tree.leaves:
        row = [0] * total
        path = market.tree.path_to_leaf(leaf)
        for parent, child in zip(path, path[1:]):
            ds = market.increment(child)
            for k in range(market.dim):
                row[offsets[parent] + k] += ds[k]
        rows.append(row)
    return rows


def node_gain_rows(market: MarketModel):
    """Row per node (tree order): coefficients of the gains accrued by the
    time of that node."""
    offsets, total = variable_layout(market)
    rows = [[0] * total for _ in market.tree.nodes]
    for n in market.tree.nodes:
        if n.parent is None:
            continue
        rows[n.index] = list(rows[n.parent])
        ds = market.increment(n.index)
        for k in range(market.dim):
            rows[n.index][offsets[n.parent] + k] += ds[k]
    return rows


def recession_rows(market: MarketModel):
    """Halfspace rows putting each stacked block in its recession cone."""
    offsets, total = variable_layout(market)
    A = []
    for i, cset in market.constraints:
        cone = cset.recession()
        for row in cone.rows:
            full = [0] * total
            for k, v in enumerate(row):
                full[offsets[i] + k] = v
            A.append(full)
    return A


def subtree_weights(market: MarketModel, leaf_weights):
    """Mass of each node's subtree under a leaf-indexed measure."""
    tree = market.tree
    w = dict(zip(tree.leaves, leaf_weights))
    mass = {}
    for i in reversed(range(len(tree.nodes))):
        n = tree.nodes[i]
        mass[i] = w[i] if not n.children else sum(mass[c] for c in n.children)
    return mass


def node_direction(market: MarketModel, mass, node):
    """xi_n: the measure-weighted one-step increment sum at a non-leaf node.

    Expected terminal gains decompose as sum_n H(n) . xi_n, which is what
    makes every measure-side optimization a per-node affair.
    """
    return tuple(
        sum(mass[c] * (market.prices[c][k] - market.prices[node][k])
            for c in market.tree.nodes[node].children)
        for k in range(market.dim)
    )
