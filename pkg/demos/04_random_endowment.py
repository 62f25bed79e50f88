"""A lump-sum random endowment folded into the market as a pinned asset.

An agent receiving an extra payoff at the horizon can be modeled inside the
pure-investment framework: add a synthetic asset whose price is the
conditional expected payoff under any equivalent martingale measure, and
force exactly one unit of it to be held.  The augmented market's value
function, started at the wealth shifted by the expected payoff, reproduces
the endowment problem exactly.
"""

from fractions import Fraction

from condual import (
    LogUtility,
    brute_force_primal,
    build_market,
    embed_endowment,
    solve_primal,
)

F = Fraction

MARKET = {
    "horizon": 1,
    "dimension": 1,
    "nodes": [
        {"id": "root", "time": 0, "parent": None, "prob": 1, "prices": [1]},
        {"id": "up", "time": 1, "parent": "root", "prob": "1/2", "prices": [2]},
        {"id": "down", "time": 1, "parent": "root", "prob": "1/2",
         "prices": ["1/2"]},
    ],
    "constraints": {"root": {"type": "box", "lower": [-1], "upper": [1]}},
}


def main():
    market = build_market(MARKET)
    endowment = {"up": F(1), "down": F(0)}
    pricing = (F(1, 3), F(2, 3))  # the equivalent martingale measure

    augmented, offset = embed_endowment(market, endowment, pricing)
    print("synthetic asset prices (conditional expected payoff):")
    for node in augmented.tree.nodes:
        print(f"  {node.node_id:5s} -> {augmented.prices[node.index][-1]}")
    print(f"wealth offset = {offset}   (minus the expected payoff)")
    print(f"augmented constraint at the root pins the new holding to 1:")
    print(f"  contains (0.5, 1): {augmented.constraint(0).contains((F(1,2), F(1)))}")
    print(f"  contains (0.5, 0): {augmented.constraint(0).contains((F(1,2), F(0)))}")

    w = 1.0
    lifted = solve_primal(augmented, LogUtility(), w - float(offset))
    direct = brute_force_primal(
        market, LogUtility(), w,
        {"points": 41, "rounds": 8, "terminal_offset": endowment})
    print(f"\nexpected log utility with the endowment, two routes:")
    print(f"  augmented market : {lifted.value:.8f}")
    print(f"  direct brute force: {direct:.8f}")
    print(f"  difference        : {abs(lifted.value - direct):.2e}")


if __name__ == "__main__":
    main()
