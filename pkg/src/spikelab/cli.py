"""Command-line client for the spikelab service.

All computation goes through the HTTP API: by default requests run against
an in-process ASGI transport, `--server URL` targets a running instance
instead, and `spikelab serve` starts one.  Exit codes: 0 success,
1 verification failure, 2 domain error, 3 I/O error.

Configs are flat UTF-8 `key = value` files (with `#` comments) mirroring
the model-config field names; command-line `--set key=value` pairs and
dedicated flags override file values.
"""

from __future__ import annotations

import argparse
import sys

import httpx

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_DOMAIN = 2
EXIT_IO = 3

CONFIG_KEYS = ("d", "n_trn", "n_tst", "theta_trn", "theta_tst", "tau_a_trn",
               "tau_a_tst", "tau_eps_trn", "mu", "beta_norm_sq", "beta_dot_u")
_INT_KEYS = ("d", "n_trn", "n_tst")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def load_config_file(path: str) -> dict:
    """Parse a flat `key = value` config file."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}", EXIT_IO)
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value'", EXIT_IO)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}", EXIT_IO)
        values[key] = int(value) if key in _INT_KEYS else float(value)
    return values


def build_config(args: argparse.Namespace) -> dict:
    values: dict = {}
    if args.config:
        values.update(load_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise CliError(f"--set expects key=value, got {item!r}", EXIT_IO)
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in CONFIG_KEYS:
            raise CliError(f"--set: unknown key {key!r}", EXIT_IO)
        values[key] = int(value) if key in _INT_KEYS else float(value)
    missing = [k for k in ("d", "n_trn") if k not in values]
    if missing:
        raise CliError(f"config is missing required keys: {missing}", EXIT_IO)
    return values


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # starlette testclient deprecation chatter
        from starlette.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), base_url="http://spikelab")


def post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliError(f"request failed: {exc}", EXIT_IO)
    if response.status_code == 422:
        detail = response.json().get("detail", response.text)
        raise CliError(f"domain error: {detail}", EXIT_DOMAIN)
    if response.status_code != 200:
        raise CliError(f"HTTP {response.status_code}: {response.text}", EXIT_IO)
    return response.json()


def _parse_grid(spec: str) -> list[float]:
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise CliError(f"--grid expects start:stop:step, got {spec!r}", EXIT_IO)
    if step == 0:
        raise CliError("--grid step must be nonzero", EXIT_IO)
    grid = []
    value = start
    sign = 1.0 if step > 0 else -1.0
    while sign * (value - stop) <= 1e-9:
        grid.append(round(value, 12))
        value = start + len(grid) * step
    if not grid:
        raise CliError("--grid produced an empty grid", EXIT_IO)
    return grid


def cmd_theory(args: argparse.Namespace) -> int:
    payload = {"config": build_config(args), "target": args.target}
    with make_client(args.server) as client:
        data = post(client, "/theory", payload)
    for warning in data.pop("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)
    for key in ("bias", "variance_a", "variance_a_eps", "adjustment", "total"):
        print(f"{key}={data[key]:.12g}")
    print(f"regime={data['regime']}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    payload = {"config": build_config(args), "target": args.target,
               "trials": args.trials, "seed": args.seed, "workers": args.workers}
    if args.mu is not None:
        payload["mu"] = args.mu
    with make_client(args.server) as client:
        data = post(client, "/simulate", payload)
    print(f"mean={data['mean']:.12g}")
    print(f"stderr={data['stderr']:.12g}")
    print(f"trials={data['trials']}")
    if data.get("theory_total") is not None:
        print(f"theory_total={data['theory_total']:.12g}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    from .schemas import SweepRowOut
    from .sweep import render_svg, write_csv

    payload = {"config": build_config(args), "target": args.target,
               "variable": args.var, "grid": _parse_grid(args.grid),
               "trials": args.trials, "seed": args.seed,
               "equal_strength": args.equal_strength, "workers": args.workers}
    with make_client(args.server) as client:
        data = post(client, "/sweep", payload)
    rows = [SweepRowOut(**row).to_core() for row in data["rows"]]
    try:
        write_csv(rows, args.out)
        if args.svg:
            render_svg(rows, args.svg, title=f"{args.target} risk vs {args.var}")
    except OSError as exc:
        raise CliError(f"cannot write output: {exc}", EXIT_IO)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    payload = {"level": args.level, "seed": args.seed, "workers": args.workers}
    with make_client(args.server) as client:
        data = post(client, "/verify", payload)
    header = f"{'form':28s} {'config':22s} {'sampled':>13s} {'closed':>13s} {'z':>7s}  ok"
    print(header)
    print("-" * len(header))
    for probe in data["probes"]:
        print(f"{probe['form']:28s} {probe['config']:22s} "
              f"{probe['sampled_mean']:13.6g} {probe['closed_form']:13.6g} "
              f"{probe['z_score']:7.2f}  {'yes' if probe['passed'] else 'NO'}")
    for identity in data["identities"]:
        print(f"{identity['name']:51s} {identity['detail']:>28s}  "
              f"{'yes' if identity['passed'] else 'NO'}")
    print(f"passed={data['passed']}")
    if not data["passed"]:
        failing = [p["form"] for p in data["probes"] if not p["passed"]]
        failing += [i["name"] for i in data["identities"] if not i["passed"]]
        print(f"failing: {', '.join(failing)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("spikelab.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikelab",
                                     description="spiked-regression risk laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_config: bool = True) -> None:
        p.add_argument("--server", default=None,
                       help="service URL (default: in-process)")
        if with_config:
            p.add_argument("--config", default=None, help="key=value config file")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override a config field (repeatable)")
            p.add_argument("--target", choices=("so", "spn"), default="so")

    p_theory = sub.add_parser("theory", help="closed-form risk breakdown")
    add_common(p_theory)
    p_theory.set_defaults(func=cmd_theory)

    p_sim = sub.add_parser("simulate", help="single-config Monte Carlo risk")
    add_common(p_sim)
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--mu", type=float, default=None,
                       help="solver ridge (default: config mu)")
    p_sim.add_argument("--workers", type=int, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="theory + Monte Carlo over a grid")
    add_common(p_sweep)
    p_sweep.add_argument("--var", choices=("n_trn", "c", "mu", "theta_trn", "tau_a_trn"),
                         default="c")
    p_sweep.add_argument("--grid", required=True, metavar="START:STOP:STEP")
    p_sweep.add_argument("--trials", type=int, default=0)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--svg", default=None, help="optional SVG plot path")
    p_sweep.add_argument("--equal-strength", action="store_true",
                         help="tie theta = tau_a sqrt(count) at every point")
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="closed-form vs Monte Carlo probes")
    add_common(p_verify, with_config=False)
    p_verify.add_argument("--level", choices=("quick", "full"), default="quick")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--workers", type=int, default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
