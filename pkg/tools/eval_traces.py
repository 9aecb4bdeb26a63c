#!/usr/bin/env python3
"""Regenerate the demo logs and print the policy comparison table.

Development aid for sizing the synthetic traces; not part of the package.
"""

import subprocess
import sys
import time

sys.path.insert(0, "src")

from qubostream.abr import AbrQuboConfig
from qubostream.anneal import SaParams
from qubostream.ladder import default_ladder
from qubostream.policies import make_policy
from qubostream.sim import SessionConfig, compute_qoe, simulate_session
from qubostream.traces import convert_hsdpa


def main():
    subprocess.run([sys.executable, "tools/make_demo_traces.py"], check=True, capture_output=True)
    ladder = default_ladder()
    ok = True
    for name in ("tram", "ferry"):
        with open(f"data/raw/{name}.log", encoding="utf-8") as fh:
            trace = convert_hsdpa(fh.read())
        kbps = [k for _, k in trace.samples]
        session = SessionConfig(ladder=ladder)
        print(f"--- {name}: mean={trace.mean_kbps():.0f} min={min(kbps):.0f} max={max(kbps):.0f}")
        scores = {}
        for pol_name in ("bba", "rate", "mpc", "qubo", "qubo-full"):
            t0 = time.time()
            pol = make_policy(
                pol_name, trace, ladder, session,
                abr_config=AbrQuboConfig(), sa_params=SaParams(seed=0),
            )
            log = simulate_session(trace, pol, session)
            rep = compute_qoe(log, session.qoe_w, ladder.quality)
            scores[pol_name] = rep.total
            rb = sum(e.rebuffer for e in log.events)
            ml = sum(e.level for e in log.events) / len(log.events)
            print(
                f"{pol_name:10s} qoe={rep.total:9.3f} q={rep.quality_sum:8.2f} "
                f"rebuf={rb:6.2f}s sw={rep.switch_sum:6.2f} lvl={ml:.2f} ({time.time()-t0:.1f}s)"
            )
        checks = {
            "qubo>=bba": scores["qubo"] >= scores["bba"],
            "qubo>=rate": scores["qubo"] >= scores["rate"],
            "qubo-full>=mpc": scores["qubo-full"] >= scores["mpc"],
        }
        print(f"    {checks}")
        ok = ok and all(checks.values())
    print("ALL ORDERINGS HOLD" if ok else "ORDERINGS VIOLATED")


if __name__ == "__main__":
    import logging

    logging.disable(logging.WARNING)
    main()
