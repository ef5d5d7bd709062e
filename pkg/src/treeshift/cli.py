"""Command-line front end.

Exit codes: 0 holds / extension exists, 1 fails / no extension,
3 inconclusive at the horizon, 2 for I/O, format or structural errors.
Results go to stdout as JSON; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Any, Sequence

from .classify import CLASSES, check_class
from .demos import DEMOS, demo_models, run_demo
from .extend import (
    ConsistencyError,
    JointSpec,
    che_condition,
    che_joint,
    extend,
    joint_extend_at_depth,
    powhyp_joint,
)
from .oracle import run_oracle
from .serialize import ModelFormatError, dumps_model, load_model, model_to_json, tree_from_json
from .shiftmodel import StructuralError
from .tree import TreeError
from .verdict import FAILS, HOLDS, fmt

EXIT = {HOLDS: 0, FAILS: 1}
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3


class CLIError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "exact"
    horizon: int = 64
    order: int = 8
    depth: int = 12

    @property
    def float_mode(self) -> bool:
        return self.mode == "float"


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}")
        return n

    return parse


_positive = _int_at_least(1)
_nonneg = _int_at_least(0)


def _emit(obj: Any) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _config(ns) -> RunConfig:
    return RunConfig(ns.mode, ns.horizon, ns.order, ns.depth)


# ---------------------------------------------------------------- commands


def cmd_check(ns) -> int:
    cfg = _config(ns)
    m = load_model(ns.model)
    v = check_class(m, ns.cls, cfg.order, cfg.horizon)
    out = v.to_json(cfg.float_mode)
    if ns.norms:
        with open(ns.norms, "w", encoding="utf-8") as fh:
            fh.write(m.norm_table(cfg.horizon).to_csv())
        out["norms_csv"] = ns.norms
    _emit(out)
    return EXIT.get(v.status, EXIT_INCONCLUSIVE)


def _failure_values(m, cls: str, k: int, cfg: RunConfig) -> dict[str, Any]:
    if cls == "che":
        return {"C0": che_condition(m, k)}
    sub = cls.split(":", 1)[1] if cls.startswith("trivial:") else cls
    v = check_class(m, sub, cfg.order, cfg.horizon)
    return {"verdict": v.to_json(cfg.float_mode), "root_norm_sq": m.norm_sq(m.root, 1)}


def cmd_extend(ns) -> int:
    cfg = _config(ns)
    m = load_model(ns.model)
    cert = extend(m, ns.cls, ns.k, cfg.horizon, cfg.order)
    if cert is None:
        _emit({"class": ns.cls, "k": ns.k, "extends": False,
               "condition_values": fmt(_failure_values(m, ns.cls, ns.k, cfg), cfg.float_mode)})
        return 1
    _emit({"extends": True, **cert.to_json(cfg.float_mode)})
    return 0


def _read_cap(path: str, n_members: int):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ModelFormatError("cap", "expected an object")
    tree = tree_from_json(data.get("tree"), "cap.tree")
    attach = data.get("attach", {})
    blank = data.get("blank", [])
    if not isinstance(attach, dict) or not isinstance(blank, list):
        raise ModelFormatError("cap", "attach must be an object and blank a list")
    leaves = set(tree.leaves())
    named = set(attach) | set(blank)
    if named != leaves or set(attach) & set(blank):
        raise CLIError(f"attach-point mismatch: cap leaves {sorted(leaves)}, file names {sorted(named)}")
    for v, i in attach.items():
        if not isinstance(i, int) or not 0 <= i < n_members:
            raise CLIError(f"attach point {v!r} refers to member {i!r}, have {n_members}")
    return tree, attach, blank


def cmd_joint(ns) -> int:
    cfg = _config(ns)
    members = [load_model(p) for p in ns.models]
    if ns.cap:
        if ns.cls != "powhyp":
            raise CLIError("--cap is only supported for --class powhyp")
        tree, attach, blank = _read_cap(ns.cap, len(members))
        assign = {v: members[i] for v, i in attach.items()}
        assign.update({v: None for v in blank})
        model = joint_extend_at_depth(tree, assign, "powhyp", cfg.horizon, cfg.order)
        if model is None:
            _emit({"class": "powhyp", "cap": ns.cap, "extends": False})
            return 1
        norm, _ = model.op_norm_sq(cfg.horizon)
        _emit({"class": "powhyp", "cap": ns.cap, "extends": True,
               "op_norm_sq": fmt(norm, cfg.float_mode), "model": model_to_json(model)})
        return 0
    spec = JointSpec(members, ns.k)
    if ns.cls == "powhyp":
        cert = powhyp_joint(spec, cfg.horizon, cfg.order)
    else:
        cert = che_joint(spec, cfg.horizon)
    if cert is None:
        bad = []
        for i, mem in enumerate(members):
            cond = che_condition(mem, ns.k + 1) if ns.cls == "che" else None
            ok = extend(mem, ns.cls, ns.k + 1, cfg.horizon, cfg.order) is not None
            bad.append({"member": i, "extends_k_plus_1": ok, "D": fmt(cond, cfg.float_mode)})
        _emit({"class": ns.cls, "k": ns.k, "extends": False, "members": bad})
        return 1
    _emit({"extends": True, **cert.to_json(cfg.float_mode)})
    return 0


def _demo_params(ns) -> dict[str, Any]:
    out = {}
    for key in ("k", "alpha", "members", "sets", "seed"):
        val = getattr(ns, key, None)
        if val is not None:
            out[key] = val
    return out


def cmd_demo(ns) -> int:
    t0 = time.perf_counter()
    rep = run_demo(ns.name, **_demo_params(ns))
    out = rep.to_json()
    out["seconds"] = round(time.perf_counter() - t0, 3)
    if ns.out:
        os.makedirs(ns.out, exist_ok=True)
        files = []
        for name, m in rep.models.items():
            path = os.path.join(ns.out, f"{name}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(dumps_model(m) + "\n")
            files.append(path)
        with open(os.path.join(ns.out, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=2)
        out["files"] = files
    _emit(out)
    return 0 if rep.passed else 1


def cmd_oracle(ns) -> int:
    cfg = _config(ns)
    if ns.model and ns.demos:
        raise CLIError("give a model file or --demos, not both")
    if ns.model:
        targets = {ns.model: load_model(ns.model, strict=False)}
    elif ns.demos:
        targets = demo_models()
    else:
        raise CLIError("nothing to check: give a model file or --demos")
    t0 = time.perf_counter()
    results = {}
    for name, m in targets.items():
        results[name] = run_oracle(m, cfg.depth, ns.powers, not cfg.float_mode)
    passed = all(r["passed"] for r in results.values())
    _emit({"mode": cfg.mode, "results": results, "passed": passed,
           "seconds": round(time.perf_counter() - t0, 3)})
    return 0 if passed else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--horizon", type=_positive, default=64, help="ray positions examined (N)")
    common.add_argument("--order", type=_positive, default=8, help="largest power checked (K)")
    common.add_argument("--depth", type=_positive, default=12, help="truncation depth for the oracle (D)")

    p = argparse.ArgumentParser(prog="treeshift", description="Weighted shifts on rooted directed trees.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="class membership")
    c.add_argument("model")
    c.add_argument("--class", dest="cls", choices=CLASSES, required=True)
    c.add_argument("--norms", metavar="CSV", help="also write ||S^k e_v||^2 for the core and first rays")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("extend", parents=[common], help="k-step backward extension")
    e.add_argument("model")
    e.add_argument("--class", dest="cls", required=True, help="powhyp, che or trivial:<class>")
    e.add_argument("-k", type=_positive, required=True)
    e.set_defaults(func=cmd_extend)

    j = sub.add_parser("joint", parents=[common], help="joint extension over a rooted sum or a cap")
    j.add_argument("models", nargs="+")
    j.add_argument("--class", dest="cls", choices=("powhyp", "che"), required=True)
    j.add_argument("-k", type=_nonneg, default=0)
    j.add_argument("--cap", metavar="CAPFILE")
    j.set_defaults(func=cmd_joint)

    d = sub.add_parser("demo", parents=[common], help="worked examples")
    d.add_argument("name", choices=DEMOS)
    d.add_argument("--k", type=_positive)
    d.add_argument("--alpha")
    d.add_argument("--members", type=_positive)
    d.add_argument("--sets", type=_positive)
    d.add_argument("--seed", type=int)
    d.add_argument("--out", metavar="DIR", help="write model files and the report here")
    d.set_defaults(func=cmd_demo)

    o = sub.add_parser("oracle", parents=[common], help="dense finite-section cross-checks")
    o.add_argument("model", nargs="?")
    o.add_argument("--demos", action="store_true", help="run on every demo model")
    o.add_argument("--powers", type=_positive, default=4, help="largest n for S^n and A_n")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except ConsistencyError as e:
        print(f"treeshift: internal consistency check failed: {e}", file=sys.stderr)
    except (OSError, ValueError, StructuralError, TreeError, CLIError) as e:
        # ValueError covers bad JSON, model format errors and bad parameters
        print(f"treeshift: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
