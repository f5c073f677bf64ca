"""Command-line client for the halfspec service.

Subcommands: spectrum, fucik, check, solve, sensitivity.  The CLI reads a
TOML config, posts the request to the service (an in-process instance by
default, or a remote one via --server / HALFSPEC_SERVER), and writes the
response as CSV and/or JSON files into --out.

Exit codes: 0 success, 2 configuration/parse errors, 3 numeric failures.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx

from .config import Config, ConfigError, load_config, problem_payload

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ServiceClient:
    """Thin POST wrapper over a remote URL or the in-process ASGI app."""

    def __init__(self, server: str | None):
        self.server = server

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        if self.server:
            resp = httpx.post(self.server.rstrip("/") + path, json=payload,
                              timeout=600.0)
            return resp.status_code, resp.json()
        return asyncio.run(self._post_local(path, payload))

    async def _post_local(self, path: str, payload: dict) -> tuple[int, dict]:
        from .service.app import create_app
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://halfspec.local",
                                     timeout=600.0) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()


def _say(args, *items) -> None:
    if not args.quiet:
        print(*items)


def _tol_payload(cfg: Config, overrides: str | None) -> dict:
    tols = cfg.tolerances.to_dict()
    if overrides:
        for part in overrides.split(","):
            key, _, val = part.partition("=")
            key = key.strip()
            if key not in tols:
                raise ConfigError(f"unknown tolerance override {key!r}")
            tols[key] = float(val)
    tols["max_steps"] = int(tols["max_steps"])
    return tols


def _write_json(out_dir: Path, name: str, payload: dict) -> Path:
    path = out_dir / name
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def _write_csv(out_dir: Path, name: str, header: list[str],
               rows: list[list]) -> Path:
    path = out_dir / name
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                ("%.17g" % v) if isinstance(v, float) else str(v)
                for v in row) + "\n")
    return path


def _dispatch(args, client: ServiceClient, cfg: Config) -> int:
    out_dir = Path(args.out or cfg.run.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = args.format or cfg.run.format
    tols = _tol_payload(cfg, args.tolerances)
    problem = problem_payload(cfg)

    if args.command == "spectrum":
        status, body = client.post("/spectrum", {
            "problem": problem, "tolerances": tols, "k_max": cfg.run.k_max})
        if status != 200:
            return _report_error(args, status, body)
        if fmt in ("json", "both"):
            _write_json(out_dir, "spectrum.json", body)
        if fmt in ("csv", "both"):
            _write_csv(out_dir, "spectrum.csv",
                       ["k", "nu", "lambda", "residual"],
                       [[r["k"], r["nu"], r["lambda"], r["residual"]]
                        for r in body["pairs"]])
        _say(args, "half-eigenvalues (k, nu, lambda, residual):")
        for r in body["pairs"]:
            _say(args, "  %2d  %s  %.12g  %.3g"
                 % (r["k"], r["nu"], r["lambda"], r["residual"]))
        return EXIT_OK

    if args.command == "fucik":
        k = cfg.run.fucik_k if args.k is None else args.k
        branch = args.branch or cfg.run.fucik_branch
        grid = list(cfg.run.fucik_alpha_plus)
        if not grid:
            raise ConfigError("run.fucik_alpha_plus is empty; provide grid values")
        status, body = client.post("/fucik", {
            "p": problem["p"], "k": k, "branch": branch,
            "alpha_plus": grid, "tolerances": tols})
        if status != 200:
            return _report_error(args, status, body)
        if fmt in ("json", "both"):
            _write_json(out_dir, "fucik.json", body)
        if fmt in ("csv", "both"):
            _write_csv(out_dir, "fucik.csv",
                       ["alpha_plus", "alpha_minus", "k", "branch",
                        "residual", "found"],
                       [[pt["alpha_plus"], pt["alpha_minus"], pt["k"],
                         pt["branch"], pt["residual"], int(pt["found"])]
                        for pt in body["points"]])
        warn = [pt for pt in body["points"] if not pt["found"]]
        for pt in warn:
            _say(args, "warning: alpha_plus = %.6g: %s"
                 % (pt["alpha_plus"], pt["note"]))
        _say(args, "fucik points written (%d total, %d without bracket)"
             % (len(body["points"]), len(warn)))
        return EXIT_OK

    if args.command == "check":
        status, body = client.post("/check", {
            "problem": problem, "tolerances": tols, "k_max": cfg.run.k_max})
        if status != 200:
            return _report_error(args, status, body)
        _write_json(out_dir, "check.json", body)
        rep = body["landesman"]
        _say(args, "classification:", body["classification"]["detail"])
        for w in body["validation"]["warnings"]:
            _say(args, "hypothesis warning:", w)
        _say(args, "case:", rep["case"], " verdict:", rep["verdict"])
        if rep["case"] == "A":
            _say(args, "  I_min = %.9g, I_max = %.9g, product = %.9g"
                 % (rep["I_min"], rep["I_max"], rep["product"]))
        elif rep["case"] == "B1":
            _say(args, "  I_min = %.9g (must be < 0)" % rep["I_min"])
        elif rep["case"] == "B2":
            _say(args, "  I_max = %.9g (must be > 0)" % rep["I_max"])
        return EXIT_OK

    if args.command == "solve":
        payload = {"problem": problem, "tolerances": tols,
                   "k_max": cfg.run.k_max, "samples": cfg.run.solve_samples}
        if cfg.run.tau_bracket is not None:
            payload["manual_bracket"] = list(cfg.run.tau_bracket)
        status, body = client.post("/solve", payload)
        if status != 200:
            return _report_error(args, status, body)
        res = body["result"]
        if fmt in ("json", "both"):
            summary = {k: v for k, v in body.items() if k != "solution"}
            _write_json(out_dir, "solve.json", summary)
        if fmt in ("csv", "both"):
            sol = body["solution"]
            _write_csv(out_dir, "solution.csv", ["x", "u", "uprime"],
                       [list(row) for row in
                        zip(sol["x"], sol["u"], sol["uprime"])])
        _say(args, "tau* = %.12g  endpoint residual %.3g  defect %.3g"
             % (res["tau_star"], res["endpoint_residual"],
                res["bvp_residual"]))
        for n in res.get("notices", []):
            _say(args, "notice:", n)
        return EXIT_OK

    if args.command == "sensitivity":
        status, body = client.post("/sensitivity", {
            "problem": problem, "tolerances": tols, "k_max": cfg.run.k_max})
        if status != 200:
            return _report_error(args, status, body)
        _write_json(out_dir, "sensitivity.json", body)
        for nu, rep in body["per_nu"].items():
            sens = rep["sensitivity"]
            line = "nu=%s: psi0(1) = %.12g" % (nu, sens["psi0_at_1"])
            if rep.get("identity"):
                line += "  identity lhs=%.9g rhs=%.9g rel=%.3g" % (
                    rep["identity"]["lhs"], rep["identity"]["rhs"],
                    rep["identity"]["rel_discrepancy"])
            _say(args, line)
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")


def _report_error(args, status: int, body: dict) -> int:
    err = body.get("error") if isinstance(body, dict) else None
    if err:
        print(f"error ({err['kind']}): {err['message']}", file=sys.stderr)
        return EXIT_CONFIG if err["kind"] == "config" else EXIT_NUMERIC
    print(f"error (HTTP {status}): {json.dumps(body)[:2000]}", file=sys.stderr)
    return EXIT_CONFIG if status == 422 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="halfspec",
        description="half-eigenvalues, Fucik curves and resonant solves for "
                    "the 1-D p-Laplacian with jumping coefficients")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, desc in (
            ("spectrum", "compute half-eigenvalues lambda_{k,+/-}"),
            ("fucik", "trace a Fucik spectrum curve"),
            ("check", "hypothesis audit, classification, Landesman-Lazer verdict"),
            ("solve", "solve the resonant Dirichlet problem by shooting"),
            ("sensitivity", "derivative of the rescaled endpoint map at 0")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json", "both"),
                       default=None)
        p.add_argument("--tolerances", default=None,
                       help="comma-separated overrides, e.g. eig_tol=1e-8,ode_rel=1e-9")
        p.add_argument("--server", default=os.environ.get("HALFSPEC_SERVER"),
                       help="service URL (default: run in-process)")
        p.add_argument("--quiet", action="store_true")
        if name == "fucik":
            p.add_argument("--k", type=int, default=None)
            p.add_argument("--branch", choices=("+", "-"), default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        client = ServiceClient(args.server)
        return _dispatch(args, client, cfg)
    except ConfigError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except httpx.HTTPError as exc:
        print(f"error (transport): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
