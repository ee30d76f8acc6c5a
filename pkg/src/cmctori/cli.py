"""Command-line interface: flows, meshes, profiles, classification, graph, verify.

Exit codes: 0 success, 1 domain/usage error, 2 numerical failure.  All JSON
output is emitted with 17 significant digits so reruns are diff-stable.
Configuration precedence: flags > config file ("key = value" lines) > defaults.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional

from .errors import CmcError, DomainError, NumericsError
from .flow import FlowOptions, polish_closing_state, trace_family, trace_rotational
from .genus0 import Triple
from .moduli import classify, connectivity_check
from .surface import (
    _json_text,
    build_mesh,
    export,
    extract_profiles,
    rotational_profile_curve,
)

DEFAULTS = {
    "res": "256x256",
    "format": "obj",
    "q": 0.6,
    "rtol": 1e-11,
    "max_index": 8,
}


@dataclass
class RunConfig:
    command: str
    triple: Optional[Triple] = None
    t: Optional[float] = None
    q: Optional[float] = None
    resolution: tuple[int, int] = (256, 256)
    rtol: float = 1e-11
    out: Optional[str] = None
    format: str = "obj"
    max_index: int = 8
    suite: Optional[str] = None
    rotational: bool = False


def _parse_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = val
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmctori",
        description="Equivariant CMC tori in the 3-sphere: flows, meshes, "
        "profiles, classification, and the moduli graph.",
        epilog="Defaults: " + ", ".join(f"{k}={v}" for k, v in DEFAULTS.items()),
    )
    parser.add_argument("--config", help="optional key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_triple(p):
        p.add_argument("--triple", required=True, help="l0,l1,l2")

    p_flow = sub.add_parser("flow", help="trace a family, print FamilyTrace JSON")
    add_triple(p_flow)
    p_flow.add_argument("--rotational", action="store_true", help="force the rotational tracer")
    p_flow.add_argument("--rtol", type=float, help="integrator relative tolerance")
    p_flow.add_argument("--out", help="write JSON here instead of stdout")

    p_mesh = sub.add_parser("mesh", help="build and export a surface mesh")
    add_triple(p_mesh)
    p_mesh.add_argument("--t", type=float, help="flow parameter along the family (default: midpoint)")
    p_mesh.add_argument("--q", type=float, help="rotational families: pick the state at this modulus")
    p_mesh.add_argument("--res", help="NXxNY grid (default 256x256)")
    p_mesh.add_argument("--out", required=True, help="output path (.obj or .json)")
    p_mesh.add_argument("--format", choices=("obj", "json"), help="default from extension")
    p_mesh.add_argument("--rtol", type=float, help="integrator relative tolerance")

    p_prof = sub.add_parser("profile", help="profile curve JSON with turning numbers")
    add_triple(p_prof)
    p_prof.add_argument("--t", type=float, help="flow parameter (twizzled families)")
    p_prof.add_argument("--q", type=float, help="modulus (rotational families, default 0.6)")
    p_prof.add_argument("--out", help="write JSON here instead of stdout")

    p_cls = sub.add_parser("classify", help="classification record JSON")
    add_triple(p_cls)

    p_graph = sub.add_parser("graph", help="moduli-graph connectivity report")
    p_graph.add_argument("--max-index", type=int, help="sublattice index bound (default 8)")
    p_graph.add_argument("--out", help="write JSON here instead of stdout")

    p_ver = sub.add_parser("verify", help="run the module invariant suites")
    p_ver.add_argument("--suite", help="run a single suite (default: all)")

    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _pick_state(trace, t_target, q_target):
    if t_target is None and q_target is None:
        t_target = 0.5 * (trace.samples[0].t + trace.samples[-1].t)
    if q_target is not None:
        state = min(trace.samples, key=lambda s: abs(s.point.q - q_target))
    else:
        state = min(trace.samples, key=lambda s: abs(s.t - t_target))
    return polish_closing_state(state, trace.s)


def _flow_options(cfg: RunConfig) -> FlowOptions:
    return FlowOptions(rtol=cfg.rtol, atol=0.1 * cfg.rtol)


def _cmd_flow(cfg: RunConfig) -> str:
    opts = _flow_options(cfg)
    if cfg.triple.rotational or cfg.rotational:
        trace = trace_rotational(cfg.triple.l0, cfg.triple.l2, opts)
    else:
        trace = trace_family(cfg.triple, opts)
    return _json_text(trace.to_jsonable())


def _cmd_mesh(cfg: RunConfig) -> None:
    fmt = cfg.format
    if fmt is None:
        fmt = "json" if str(cfg.out).endswith(".json") else "obj"
    opts = _flow_options(cfg)
    if cfg.triple.rotational:
        trace = trace_rotational(cfg.triple.l0, cfg.triple.l2, opts)
        state = _pick_state(trace, cfg.t, cfg.q if cfg.q else 0.8)
    else:
        trace = trace_family(cfg.triple, opts)
        state = _pick_state(trace, cfg.t, cfg.q)
    mesh = build_mesh(state, resolution=cfg.resolution, s=trace.s, triple=cfg.triple)
    export(mesh, fmt, cfg.out)


def _cmd_profile(cfg: RunConfig) -> str:
    if cfg.triple.rotational:
        q = cfg.q if cfg.q is not None else DEFAULTS["q"]
        curve, theta1 = rotational_profile_curve(cfg.triple.l0, cfg.triple.l2, q)
        payload = {
            "triple": str(cfg.triple),
            "q": q,
            "theta1": theta1,
            "curves": [
                {
                    "turning": curve.turning,
                    "closed": curve.closed,
                    "points": curve.points,
                }
            ],
            "total_turning": curve.turning,
        }
    else:
        trace = trace_family(cfg.triple)
        state = _pick_state(trace, cfg.t, cfg.q)
        curves = extract_profiles(state, trace.s, grid=(192, 192))
        payload = {
            "triple": str(cfg.triple),
            "t": state.t,
            "q": state.point.q,
            "curves": [
                {"turning": c.turning, "closed": c.closed, "points": c.points}
                for c in curves
            ],
            "total_turning": sum(c.turning for c in curves[: len(curves) // 2]),
        }
    return _json_text(payload)


def _cmd_classify(cfg: RunConfig) -> str:
    record = classify(cfg.triple)
    data = {"triple": str(cfg.triple), **record.to_jsonable()}
    return _json_text(data)


def _cmd_graph(cfg: RunConfig) -> str:
    return _json_text(connectivity_check(cfg.max_index))


def _cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_suites

    names = [cfg.suite] if cfg.suite else None
    try:
        results, ok = run_suites(names)
    except KeyError as err:
        raise DomainError(f"unknown suite {err}")
    for suite, (name, passed, detail) in results:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {suite}: {name}"
        if detail:
            line += f" ({detail})"
        print(line)
    return 0 if ok else 2


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    try:
        file_cfg = _parse_config_file(ns.config) if ns.config else {}

        def setting(key, cast, default):
            flag = getattr(ns, key.replace("-", "_"), None)
            if flag is not None:
                return flag
            if key in file_cfg:
                return cast(file_cfg[key])
            return default

        cfg = RunConfig(command=ns.command)
        if hasattr(ns, "triple"):
            cfg.triple = Triple.parse(setting("triple", str, None))
        cfg.t = getattr(ns, "t", None)
        cfg.q = setting("q", float, None) if hasattr(ns, "q") else None
        if hasattr(ns, "res"):
            res = setting("res", str, DEFAULTS["res"])
            nx, ny = (int(v) for v in res.lower().split("x"))
            cfg.resolution = (nx, ny)
        if hasattr(ns, "rtol"):
            cfg.rtol = setting("rtol", float, DEFAULTS["rtol"])
        cfg.out = getattr(ns, "out", None)
        cfg.format = getattr(ns, "format", None)
        if ns.command == "graph":
            cfg.max_index = setting("max_index", int, DEFAULTS["max_index"])
        cfg.suite = getattr(ns, "suite", None)
        cfg.rotational = bool(getattr(ns, "rotational", False))

        if ns.command == "flow":
            _emit(_cmd_flow(cfg), cfg.out)
        elif ns.command == "mesh":
            _cmd_mesh(cfg)
        elif ns.command == "profile":
            _emit(_cmd_profile(cfg), cfg.out)
        elif ns.command == "classify":
            _emit(_cmd_classify(cfg), None)
        elif ns.command == "graph":
            _emit(_cmd_graph(cfg), cfg.out)
        elif ns.command == "verify":
            return _cmd_verify(cfg)
        return 0
    except (DomainError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (NumericsError, CmcError, ArithmeticError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
