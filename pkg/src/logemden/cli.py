"""Command-line client of the laboratory service.

Every subcommand builds a request for the HTTP API and renders the JSON
response: by default against an in-process application instance (no
server or network required), or against a running service when --url is
given.  stdout carries machine-readable JSON only; human-oriented
diagnostics go to stderr.

Exit codes: 0 success, 1 verification failure, 2 usage or validation
error, 3 integration terminated by a regime event.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Optional

__all__ = ["main"]

OUT_DIR_ENV = "LOGEMDEN_OUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_EVENT = 3


class _Client:
    """Minimal POST/GET wrapper over either transport."""

    def __init__(self, url: Optional[str]) -> None:
        if url:
            import httpx

            self._client = httpx.Client(base_url=url, timeout=3600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette warns about its httpx-based TestClient on import
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

                from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> tuple[int, Any]:
        resp = self._client.post(path, json=payload)
        try:
            body = resp.json()
        except ValueError:
            body = {"detail": resp.text}
        return resp.status_code, body


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _emit(obj: Any) -> None:
    sys.stdout.write(_dump(obj) + "\n")


def _fail(status: int, body: Any) -> int:
    detail = body.get("detail", body) if isinstance(body, dict) else body
    print(f"error ({status}): {detail}", file=sys.stderr)
    return EXIT_USAGE


def _out_path(arg: Optional[str], default_name: str) -> Optional[Path]:
    if arg is None:
        return None
    p = Path(arg)
    if not p.is_absolute():
        base = Path(os.environ.get(OUT_DIR_ENV, "."))
        p = base / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _add_exponent_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="space dimension (>= 3)")
    p.add_argument("--alpha", type=float, required=True, help="power exponent")
    p.add_argument("--beta", type=float, required=True, help="log-power exponent")


def _load_config_file(path: str) -> dict:
    raw = Path(path).read_bytes()
    if path.endswith(".json"):
        return json.loads(raw)
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(raw.decode())
    except Exception:
        # JSON content without a .json suffix
        return json.loads(raw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="logemden",
        description="Radial singular-solution laboratory for -lap(u) = u^a |log u|^b",
    )
    ap.add_argument("--url", default=None, help="remote service URL (default: in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="closed-form constants for an exponent triple")
    _add_exponent_args(p)

    p = sub.add_parser("simulate", help="integrate one trajectory, write CSV")
    _add_exponent_args(p)
    p.add_argument("--frame", choices=["ef", "physical"], default="ef")
    p.add_argument("--t0", type=float, default=None, help="start time (default regime rule)")
    p.add_argument("--T", type=float, default=None, help="end time (overrides --span)")
    p.add_argument("--span", type=float, default=35.0)
    p.add_argument("--psi0", type=float, default=None, help="initial psi (default A)")
    p.add_argument("--dpsi0", type=float, default=0.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--out", default=None, help="trajectory CSV path (default: no file)")

    p = sub.add_parser("classify", help="integrate and classify one trajectory")
    _add_exponent_args(p)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--horizon", type=float, default=300.0)
    p.add_argument("--psi0", type=float, required=True)
    p.add_argument("--dpsi0", type=float, default=0.0)
    p.add_argument("--conv-tol", type=float, default=None)
    p.add_argument("--zero-tol", type=float, default=1e-3)
    p.add_argument("--rel-tol", type=float, default=1e-10)

    p = sub.add_parser("separatrix", help="bisect the critical initial slope")
    _add_exponent_args(p)
    p.add_argument("--t0", type=float, default=5.0)
    p.add_argument("--psi0", type=float, required=True)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--horizon", type=float, default=300.0)

    p = sub.add_parser("sweep", help="run a grid sweep, emit a JSON report")
    p.add_argument("--config", default=None, help="TOML or JSON SweepConfig file")
    p.add_argument("--jobs", type=int, default=None, help="parallel cells (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-states", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--ns", type=int, nargs="+", default=None)
    p.add_argument("--betas", type=float, nargs="+", default=None)
    p.add_argument("--out", default=None, help="write the report JSON here as well")

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--grid", choices=["desk", "default"], default="desk")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return ap


def _cmd_constants(client: _Client, args: argparse.Namespace) -> int:
    status, body = client.post(
        "/constants", {"n": args.n, "alpha": args.alpha, "beta": args.beta}
    )
    if status != 200:
        return _fail(status, body)
    _emit(body)
    return EXIT_OK


def _cmd_simulate(client: _Client, args: argparse.Namespace) -> int:
    span = args.span
    if args.T is not None:
        if args.t0 is None:
            print("error: --T requires --t0", file=sys.stderr)
            return EXIT_USAGE
        span = args.T - args.t0
    payload = {
        "exponents": {"n": args.n, "alpha": args.alpha, "beta": args.beta},
        "frame": args.frame,
        "t0": args.t0,
        "span": span,
        "psi0": args.psi0,
        "dpsi0": args.dpsi0,
        "integrator": {"rel_tol": args.rel_tol, "abs_tol": args.abs_tol},
        "include_csv": args.out is not None,
    }
    status, body = client.post("/simulate", payload)
    if status != 200:
        return _fail(status, body)
    csv_text = body.pop("csv", None)
    out = _out_path(args.out, "trajectory.csv")
    if out is not None and csv_text is not None:
        out.write_text(csv_text, encoding="utf-8")
        body["csv_path"] = str(out)
    _emit(body)
    return EXIT_EVENT if body.get("events") else EXIT_OK


def _cmd_classify(client: _Client, args: argparse.Namespace) -> int:
    payload = {
        "exponents": {"n": args.n, "alpha": args.alpha, "beta": args.beta},
        "t0": args.t0,
        "horizon": args.horizon,
        "psi0": args.psi0,
        "dpsi0": args.dpsi0,
        "thresholds": {"conv_tol": args.conv_tol, "zero_tol": args.zero_tol},
        "integrator": {"rel_tol": args.rel_tol},
    }
    status, body = client.post("/classify", payload)
    if status != 200:
        return _fail(status, body)
    _emit(body)
    if body.get("outcome") == "undetermined" and body.get("events"):
        return EXIT_EVENT
    return EXIT_OK


def _cmd_separatrix(client: _Client, args: argparse.Namespace) -> int:
    payload = {
        "exponents": {"n": args.n, "alpha": args.alpha, "beta": args.beta},
        "t0": args.t0,
        "psi0": args.psi0,
        "slope_lo": args.bracket[0],
        "slope_hi": args.bracket[1],
        "horizon": args.horizon,
    }
    status, body = client.post("/separatrix", payload)
    if status != 200:
        return _fail(status, body)
    _emit(body)
    return EXIT_OK


def _cmd_sweep(client: _Client, args: argparse.Namespace) -> int:
    config: dict = {}
    if args.config:
        config = _load_config_file(args.config)
    for key, val in (
        ("jobs", args.jobs),
        ("seed", args.seed),
        ("n_states", args.n_states),
        ("horizon", args.horizon),
        ("ns", args.ns),
        ("betas", args.betas),
    ):
        if val is not None:
            config[key] = val
    status, body = client.post("/sweep", {"config": config})
    if status != 200:
        return _fail(status, body)
    text = _dump(body)
    out = _out_path(args.out, "sweep_report.json")
    if out is not None:
        out.write_text(text + "\n", encoding="utf-8")
        print(f"report written to {out}", file=sys.stderr)
    sys.stdout.write(text + "\n")
    return EXIT_OK


def _cmd_verify(client: _Client, args: argparse.Namespace) -> int:
    status, body = client.post("/verify", {"scale": args.grid, "jobs": args.jobs})
    if status != 200:
        return _fail(status, body)
    for chk in body["checks"]:
        mark = "PASS" if chk["passed"] else "FAIL"
        print(f"[{mark}] {chk['name']}: {chk['detail']}", file=sys.stderr)
    _emit(body)
    return EXIT_OK if body["passed"] else EXIT_CHECK_FAILED


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    client = _Client(args.url)
    handlers = {
        "constants": _cmd_constants,
        "simulate": _cmd_simulate,
        "classify": _cmd_classify,
        "separatrix": _cmd_separatrix,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
    }
    return handlers[args.command](client, args)


if __name__ == "__main__":
    raise SystemExit(main())
