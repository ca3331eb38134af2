"""``bellnet`` command-line front end.

Every subcommand prints CSV (header row, 12 significant digits) or JSON to
stdout or ``--out``. Exit status: 0 on success, 2 on usage errors, 1 when
a computation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

VARIABLES = ("p", "d", "N", "L", "K")


class UsageError(Exception):
    pass


@dataclass
class SweepSpec:
    variable: str
    start: float
    stop: float
    step: float
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise UsageError(f"unknown sweep variable {self.variable!r}")
        if not self.step > 0:
            raise UsageError("sweep step must be positive")
        if self.start > self.stop:
            raise UsageError("sweep start exceeds stop")

    def grid(self) -> list:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        values = [round(self.start + i * self.step, 12) for i in range(n)]
        if self.variable != "p":
            values = [int(round(v)) for v in values]
        return values


def thread_count() -> int:
    raw = os.environ.get("BELLNET_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, task: Callable[..., dict], values=None) -> list[dict]:
    """Evaluate ``task(value, **fixed)`` per grid point, rows in grid order.

    A failing row gets an ``error`` column instead of aborting the sweep.
    """
    values = spec.grid() if values is None else list(values)

    def one(v):
        try:
            row = {spec.variable: v}
            row.update(task(v, **spec.fixed))
            return row
        except Exception as exc:  # noqa: BLE001 - reported per row
            return {spec.variable: v, "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(one, values))


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return "" if v is None else str(v)


def rows_to_csv(rows: list[dict]) -> str:
    header: list[str] = []
    for row in rows:
        for k in row:
            if k not in header:
                header.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(args, payload) -> None:
    if isinstance(payload, list):
        text = rows_to_csv(payload) if args.format == "csv" else json.dumps(_jsonable(payload), indent=2) + "\n"
    else:
        if args.format == "csv":
            text = rows_to_csv([payload])
        else:
            text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed integer list {text!r}") from exc


# --- subcommands ---------------------------------------------------------------


def cmd_sweep_chsh(args):
    from .behaviors import behavior_from_quantum
    from .bell import chsh
    from .polytope import deterministic_vertices, membership
    from .states import isotropic
    from .measurements import chsh_assignment

    f = chsh()
    local = deterministic_vertices(f.scenario)
    ma = chsh_assignment()

    def task(p):
        b = behavior_from_quantum(isotropic(p, 2), ma)
        v = membership(b, local)
        return {"chsh": f(b), "v_star": v.v_star, "member": v.member}

    spec = SweepSpec("p", args.start, args.stop, args.step)
    return run_sweep(spec, task)


def cmd_hashing_threshold(args):
    from .distill import hashing_threshold

    ds = _int_list(args.d_list) if args.d_list else [2**k for k in range(1, args.k_max + 1)]
    spec = SweepSpec("d", min(ds), max(ds), 1)
    return run_sweep(spec, lambda d: {"p_star": hashing_threshold(d)}, values=ds)


def cmd_star(args):
    from .bell import plane, seesaw
    from .protocols import star_conditional, star_functional, star_threshold, plane_threshold

    res = star_conditional(args.p, args.n)
    if args.ineq == "plane":
        f = plane(args.n, args.K)
        from .behaviors import behavior_from_quantum
        from .bell import plane_angles
        from .measurements import MeasurementAssignment, observable_povm
        from .tensor import SX, SY

        povms = [observable_povm(np.cos(t) * SX + np.sin(t) * SY) for t in plane_angles(args.K)]
        value = f(behavior_from_quantum(res.conditional, MeasurementAssignment([povms] * args.n)))
        detected_above = plane_threshold(args.n, args.K)
    else:
        f = star_functional(args.n) if args.ineq == "auto" else _named(args.ineq, args.n)
        value = seesaw(res.conditional, f.scenario, f, restarts=args.restarts, seed=args.seed).value
        detected_above = None
    return {
        "N": args.n,
        "p": args.p,
        "inequality": f.name,
        "value": value,
        "bound": f.bound,
        "violated": bool(value > f.bound + 1e-9),
        "success_prob": res.success_prob,
        "p_N": star_threshold(args.n),
        "threshold_estimate": detected_above,
    }


def _named(name, n):
    from .bell import catalog

    if name == "chsh":
        if n != 2:
            raise UsageError("chsh needs --n 2")
        return catalog("chsh")
    return catalog(name, n=n)


def cmd_lambda_swap(args):
    from .protocols import lambda_swap
    from .states import isotropic, phi_ket
    from .tensor import fidelity_pure

    p2 = args.p if args.p2 is None else args.p2
    prob, out = lambda_swap(isotropic(args.p, args.d), isotropic(p2, args.d))
    ref = isotropic(args.p * p2, args.d)
    return {
        "p_ab": args.p,
        "p_ac": p2,
        "probability": prob,
        "fidelity": fidelity_pure(out, phi_ket(args.d)),
        "fidelity_isotropic_product": fidelity_pure(ref, phi_ket(args.d)),
    }


def _vertex_set(model: str, scenario):
    from .polytope import deterministic_vertices, hybrid_vertices_3party, ns_vertices_222

    if model == "local":
        return deterministic_vertices(scenario)
    if model == "hybrid":
        return hybrid_vertices_3party()
    if model == "ns":
        return ns_vertices_222()
    raise UsageError(f"unknown model {model!r}")


def cmd_membership(args):
    from .behaviors import Behavior
    from .polytope import membership

    with open(args.behavior) as fh:
        b = Behavior.from_json(fh.read())
    verdict = membership(b, _vertex_set(args.model, b.scenario))
    return json.loads(verdict.to_json())


def cmd_lift(args):
    from .protocols import lambda_lift_demo

    return lambda_lift_demo(args.p, ref_setting=tuple(args.x0))


def cmd_activate_sigma(args):
    from .protocols import lambda_behavior, sigma_activation

    target = lambda_behavior(seed=args.seed)
    act = sigma_activation(target, L_max=args.l_max)
    rows = []
    for step in act.steps:
        v = step.verdict
        rows.append({"L": step.L, "p_eq": step.p_eq, "v_star": v.v_star, "member": v.member, "margin": v.margin})
    return rows


def cmd_activate_tau(args):
    from .protocols import tau_activation

    rows = []
    for L in _int_list(args.l_list):
        t = tau_activation(args.n, args.p, L, restarts=args.restarts, seed=args.seed)
        rows.append({"L": L, "coverage": t.coverage, "star_margin": t.star_margin, "certified_margin": t.certified_margin})
    return rows


def cmd_catalog(args):
    from .bell import catalog

    params = {k: v for k, v in (("n", args.n), ("d", args.d), ("K", args.K)) if v is not None}
    f = catalog(args.name, **params)
    return json.loads(f.to_json())


def cmd_povm_reduce(args):
    from .measurements import dichotomic_to_projective
    from .tensor import random_density

    rng = np.random.default_rng(args.seed)
    if args.effect:
        m0 = np.array(json.loads(args.effect), dtype=complex)
    else:
        a = random_density(args.dim, rng)
        m0 = a / np.linalg.eigvalsh(a).max() * rng.uniform(0.2, 1.0)
    sim = dichotomic_to_projective(m0)
    rho = random_density(m0.shape[0], rng)
    direct = float(np.trace(rho @ m0).real)
    return {
        "response": sim.response.tolist(),
        "basis_real": sim.basis.real.tolist(),
        "basis_imag": sim.basis.imag.tolist(),
        "p0_simulated": sim.probability_zero(rho),
        "p0_direct": direct,
    }


COMMANDS = {
    "sweep-chsh": (cmd_sweep_chsh, "csv"),
    "hashing-threshold": (cmd_hashing_threshold, "csv"),
    "star": (cmd_star, "json"),
    "lambda-swap": (cmd_lambda_swap, "json"),
    "membership": (cmd_membership, "json"),
    "lift": (cmd_lift, "json"),
    "activate-sigma": (cmd_activate_sigma, "csv"),
    "activate-tau": (cmd_activate_tau, "csv"),
    "catalog": (cmd_catalog, "json"),
    "povm-reduce": (cmd_povm_reduce, "json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
        p.add_argument("--out", default=None, help="write to this file instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized routines")
        return p

    p = add("sweep-chsh", "CHSH value and local-polytope visibility of two-qubit isotropic states over a p grid")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.01)

    p = add("hashing-threshold", "noise level above which the isotropic hashing bound is positive, per dimension")
    p.add_argument("--d-list", default=None, help="comma-separated dimensions")
    p.add_argument("--k-max", type=int, default=16, help="use d = 2..2**k-max when --d-list is absent")

    p = add("star", "post-select the star network on GHZ and test the leaves' state")
    p.add_argument("--n", type=int, required=True, help="number of leaves")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--ineq", choices=("auto", "chsh", "mermin", "plane"), default="auto")
    p.add_argument("--K", type=int, default=8, help="settings per party for --ineq plane")
    p.add_argument("--restarts", type=int, default=20)

    p = add("lambda-swap", "entanglement swapping of two isotropic states at the centre of a Lambda network")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--p2", type=float, default=None)
    p.add_argument("--d", type=int, default=2)

    p = add("membership", "visibility of a behavior against a polytope, with a separating functional")
    p.add_argument("--behavior", required=True, help="Behavior JSON file")
    p.add_argument("--model", choices=("local", "hybrid", "ns"), default="local")

    p = add("lift", "lifted CHSH on the Lambda network of two isotropic links")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--x0", type=int, nargs=2, default=(0, 0), help="reference setting of the tested parties")

    p = add("activate-sigma", "hybrid-polytope membership of the flagged many-copy mixture per copy number")
    p.add_argument("--l-max", type=int, default=12)

    p = add("activate-tau", "coverage and certified margin of the flagged star reduction")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=float, default=0.85)
    p.add_argument("--l-list", default="1,3,5,10,20")
    p.add_argument("--restarts", type=int, default=10)

    p = add("catalog", "coefficients and bound of a named Bell functional")
    p.add_argument("--name", choices=("chsh", "mermin", "svetlichny", "cglmp", "plane"), required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--K", type=int, default=None)

    p = add("povm-reduce", "simulate a two-outcome POVM by a projective measurement plus coin flips")
    p.add_argument("--effect", default=None, help="JSON matrix for the outcome-0 effect")
    p.add_argument("--dim", type=int, default=2, help="dimension of the random effect when --effect is absent")
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    func, default_format = COMMANDS[args.command]
    if args.format is None:
        args.format = default_format
    try:
        payload = func(args)
        emit(args, payload)
    except UsageError as exc:
        print(f"bellnet: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"bellnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
