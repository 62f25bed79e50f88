"""Superhedging prices and their measure-side certificates.

The least capital from which an admissible strategy dominates a payoff is a
linear program; its LP dual runs over leaf measures and prices the claim at
its best expected value minus the support penalty of the constraint
structure.  With rational inputs both programs are solved in exact
arithmetic, so the duality identity holds on the nose, not within a
tolerance.
"""

import random
from fractions import Fraction

from condual import build_market, superhedge_price, support_alpha

F = Fraction

BINOMIAL = {
    "horizon": 1,
    "dimension": 1,
    "nodes": [
        {"id": "root", "time": 0, "parent": None, "prob": 1, "prices": [1]},
        {"id": "up", "time": 1, "parent": "root", "prob": "1/2", "prices": [2]},
        {"id": "down", "time": 1, "parent": "root", "prob": "1/2",
         "prices": ["1/2"]},
    ],
    "constraints": {"root": {"type": "box", "lower": ["-inf"],
                             "upper": ["inf"]}},
}


def main():
    market = build_market(BINOMIAL)

    print("== a call-like payoff ==")
    res = superhedge_price(market, (F(1), F(0)))
    print(f"price (portfolio LP)   = {res.price}")
    print(f"price (measure-side LP) = {res.dual_value}")
    print(f"witness measure        = {res.witness.weights}"
          "   <- the martingale measure q = 1/3")

    print("\n== pinned holding: a genuinely negative support function ==")
    pinned = build_market({**BINOMIAL, "constraints": {
        "root": {"type": "singleton", "point": [1]}}})
    res = superhedge_price(pinned, (F(0), F(0)))
    print(f"hedging the ZERO claim costs {res.price}: the mandatory share")
    print("loses 1/2 in the down state, and that loss must be prefunded.")
    alpha = support_alpha(pinned, (F(0), F(1)))
    print(f"support value at the all-down measure: {alpha} (negative!)")

    print("\n== translation and duality across random payoffs ==")
    rng = random.Random(0)
    box = build_market({**BINOMIAL, "constraints": {
        "root": {"type": "box", "lower": [-1], "upper": [1]}}})
    for k in range(4):
        payoff = (F(rng.randint(-4, 4), 2), F(rng.randint(-4, 4), 2))
        res = superhedge_price(box, payoff)
        shifted = superhedge_price(box, tuple(v + F(7, 10) for v in payoff))
        print(f"  payoff {str(payoff):24s} price {str(res.price):8s} "
              f"dual {str(res.dual_value):8s} "
              f"shift-by-7/10 {str(shifted.price):8s}")
    print("prices translate exactly and agree with their duals exactly.")


if __name__ == "__main__":
    main()
