#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension (unless SKIP_BUILD=1), loads the shipped market bundle,
prices every shipped trade with every applicable model and checks basic
invariants: positive prices, model agreement within coarse tolerances, and a
couple of closed-form sanity values.

Run from the repository root:  python3 python/smoke_test.py
"""

import json
import math
import os
import shutil
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_extension():
    if os.environ.get("SKIP_BUILD") != "1":
        subprocess.run(
            ["cargo", "build", "-p", "swaption-py", "--release"],
            cwd=ROOT,
            check=True,
        )
    built = os.path.join(ROOT, "target", "release", "libswaption_engine_py.so")
    dest = os.path.join(ROOT, "python", "swaption_engine_py.so")
    shutil.copyfile(built, dest)
    sys.path.insert(0, os.path.dirname(dest))


def main():
    build_extension()
    import swaption_engine_py as eng

    # Closed-form sanity: ATM Bachelier price is sigma * phi(0); cdf midpoint.
    atm = eng.bachelier(0.03, 0.03, 0.01, 1.0)
    assert abs(atm - 0.01 / math.sqrt(2.0 * math.pi)) < 1e-15, atm
    assert abs(eng.norm_cdf(0.0) - 0.5) < 1e-15

    data = os.path.join(ROOT, "data")
    market = eng.Market.from_files(
        os.path.join(data, "market.json"),
        os.path.join(data, "vols.csv"),
        os.path.join(data, "corr.json"),
    )

    # Curve sanity: discount factors decreasing, par rate in a sane band.
    assert market.discount_factor(1.0) > market.discount_factor(10.0) > 0.0
    r = market.par_rate(1.0, 10.0)
    assert 0.0 < r < 0.10, r

    with open(os.path.join(data, "trades.json")) as f:
        trades = json.load(f)
    assert len(trades) >= 4

    for trade in trades:
        kind = trade["kind"]
        models = eng.supported_models(kind)
        assert models, f"no models for {kind}"
        trade_json = json.dumps(trade)
        atm_k = market.atm_strike(trade_json)
        if kind == "relative_strike":
            # Struck relative to the fixing: the ATM spread is zero.
            assert atm_k == 0.0, (trade["id"], atm_k)
        else:
            assert 0.0 < atm_k < 0.10, (trade["id"], atm_k)
        prices = {}
        for model in models:
            res = market.price(trade_json, model, paths=200_000, seed=7)
            assert res["pv"] > 0.0, (trade["id"], model, res)
            assert res["pv_per_annuity"] > 0.0
            prices[model] = res["pv"]
            if model == "mc":
                assert res["std_error"] > 0.0
        # All models describe the same product: agreement within 10%
        # (MC noise at 2e5 paths plus the coarser moment matching).
        lo, hi = min(prices.values()), max(prices.values())
        assert hi - lo < 0.10 * hi, (trade["id"], prices)
        print(f"{trade['id']:>8} ({kind}): " + ", ".join(f"{m}={v:.6f}" for m, v in sorted(prices.items())))

    # Determinism through the bindings: identical settings, identical value.
    t = json.dumps(trades[2])
    a = market.price(t, "mc", paths=100_000, seed=3)["pv"]
    b = market.price(t, "mc", paths=100_000, seed=3)["pv"]
    assert a == b, (a, b)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
