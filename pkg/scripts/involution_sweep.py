#!/usr/bin/env python3
"""Sweep every family with l2 <= L and tabulate endpoints, events, drift.

Usage: python scripts/involution_sweep.py [L]
"""

import math
import sys
import time

from cmctori.flow import bouquet_limit, endpoint_H, trace_family, trace_rotational
from cmctori.genus0 import Triple


def triples(max_l2):
    for l2 in range(2, max_l2 + 1):
        for l0 in range(1, l2):
            for l1 in range(0, l0):
                if math.gcd(l0, math.gcd(l1, l2)) == 1:
                    yield Triple(l0, l1, l2)


def main():
    max_l2 = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    print(f"{'triple':>8} {'end':>8} {'H0':>9} {'H1/Hs':>9} {'minimal':>8} "
          f"{'drift':>9} {'time':>6}")
    for t in triples(max_l2):
        t0 = time.time()
        if t.rotational:
            tr = trace_rotational(t.l0, t.l2)
            h0 = endpoint_H(t)[0]
            h1 = bouquet_limit(t.l0, t.l2)[1]
        else:
            tr = trace_family(t)
            h0, h1 = endpoint_H(t)
        minimal = any(e.kind == "minimal" for e in tr.events)
        print(
            f"{str(t):>8} {str(tr.end_triple):>8} {h0:>9.4f} {h1:>9.4f} "
            f"{str(minimal):>8} {tr.level_drift:>9.1e} {time.time() - t0:>5.2f}s"
        )


if __name__ == "__main__":
    main()
