"""Constraints carving a viable market out of a blatant arbitrage.

The asset price here IS the clock: it rises by 1 every period with no
randomness at all, so the unconstrained market admits unbounded riskless
profit and no pricing measure whatsoever.  Capping the holding at one share
changes everything: the best riskless gain is limited to one unit per
period, the attainable-claim set becomes compact, and the whole duality
theory applies with a critical initial wealth of MINUS the total cap gain.
"""

from condual import (
    LogUtility,
    build_market,
    check_convex_compactness,
    check_nonempty,
    check_projected_closedness,
    check_supermartingale_condition,
    min_support,
    solve_primal,
)

CAPPED = {
    "horizon": 2,
    "dimension": 1,
    "nodes": [
        {"id": "t0", "time": 0, "parent": None, "prob": 1, "prices": [0]},
        {"id": "t1", "time": 1, "parent": "t0", "prob": 1, "prices": [1]},
        {"id": "t2", "time": 2, "parent": "t1", "prob": 1, "prices": [2]},
    ],
    "constraints": {"default": {"type": "box", "lower": ["-inf"], "upper": [1]}},
}


def main():
    market = build_market(CAPPED)

    print("== the three sufficient conditions ==")
    print(f"admissible class nonempty : {bool(check_nonempty(market))}")
    print(f"projected sets closed     : {check_projected_closedness(market).overall}")
    cert = check_supermartingale_condition(market)
    print(f"supermartingale triple    : certified via {cert.stage}")
    print(f"  reference holdings      : 0 at every node")
    print(f"  compensator increments  : {cert.compensator}")
    print(f"  accumulated compensator : {cert.total_compensator}"
          "   <- one unit of absorbed drift per period")

    print("\n== compactness and the critical wealth ==")
    print(f"attainable set compact    : {check_convex_compactness(market).verdict}")
    ms = min_support(market)
    print(f"inf of the support fn     : {ms.inf_alpha}")
    print(f"best riskless terminal    : {ms.sup_essinf}")
    print(f"critical initial wealth   : {ms.xbar}"
          "   <- you may START at -2 and still end solvent")

    print("\n== the optimum rides the cap ==")
    sol = solve_primal(market, LogUtility(), 1.0)
    print(f"u(1) = {sol.value:.8f}  (= log 3: hold the cap of 1 both periods)")
    print(f"holdings: {[round(float(v[0]), 6) for v in sol.portfolio.as_dict().values()]}")

    uncapped = {**CAPPED, "constraints": {
        "default": {"type": "box", "lower": ["-inf"], "upper": ["inf"]}}}
    free = build_market(uncapped)
    print("\n== without the cap ==")
    print(f"compactness verdict: {check_convex_compactness(free).verdict}")
    print(f"log-utility solve  : {solve_primal(free, LogUtility(), 1.0).status}")


if __name__ == "__main__":
    main()
