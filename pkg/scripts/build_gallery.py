#!/usr/bin/env python3
"""Export OBJ meshes and profile curves for a small gallery of tori.

Usage: python scripts/build_gallery.py [outdir]

Writes the Clifford torus, embedded rotational (1,0,n) tori, covered
rotational tori, and the minimal (2,1,3) twizzled torus.
"""

import pathlib
import sys

from cmctori.flow import minimal_in_family, polish_closing_state, trace_family, trace_rotational
from cmctori.genus0 import Triple
from cmctori.surface import build_mesh, export, rotational_profile_curve, _json_text


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "gallery")
    outdir.mkdir(parents=True, exist_ok=True)
    res = (192, 192)

    mesh = build_mesh((1j, -1j), resolution=res)
    export(mesh, "obj", outdir / "clifford.obj")
    print("clifford.obj")

    for l0, l2, q in [(1, 2, 0.8), (1, 3, 0.75), (1, 5, 0.75), (2, 3, 0.6)]:
        trace = trace_rotational(l0, l2)
        state = polish_closing_state(
            min(trace.samples, key=lambda s: abs(s.point.q - q)), trace.s
        )
        mesh = build_mesh(state, resolution=res, s=trace.s, triple=Triple(l0, 0, l2))
        name = f"rotational_{l0}_{l2}_q{q}.obj"
        export(mesh, "obj", outdir / name)
        curve, _ = rotational_profile_curve(l0, l2, q)
        (outdir / f"profile_{l0}_{l2}_q{q}.json").write_text(
            _json_text({"turning": curve.turning, "points": curve.points}) + "\n"
        )
        print(name)

    trace = trace_family(Triple(2, 1, 3))
    state = minimal_in_family(Triple(2, 1, 3))
    mesh = build_mesh(state, resolution=res, s=trace.s, triple=Triple(2, 1, 3))
    export(mesh, "obj", outdir / "minimal_213.obj")
    print("minimal_213.obj")


if __name__ == "__main__":
    main()
