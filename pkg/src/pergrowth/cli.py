"""Command line client for the job layer.

    pergrowth forge --config forge_n3.json --out out/
    pergrowth certify --theta golden --qmax 10000

Exit codes: 0 success, 2 validation error, 3 numeric failure.  Failures
print a JSON error report on stderr (and to ``<out>/error.json``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import service
from .errors import ValidationError

log = logging.getLogger("pergrowth")

NEEDS_CONFIG = {"forge", "census", "kam", "cascade"}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=None, help="u64 seed for the random spot checks")
    common.add_argument("--verbose", action="store_true", help="log key=value events to stderr")

    p = argparse.ArgumentParser(prog="pergrowth", description="periodic-orbit growth toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("forge", parents=[common], help="resonant perturbation plus census")
    sub.add_parser("cascade", parents=[common], help="multi-stage growth campaign")
    sub.add_parser("census", parents=[common], help="periodic-orbit census of a stored map")
    sub.add_parser("kam", parents=[common], help="invariant circle solve")
    sub.add_parser("interval", parents=[common], help="interval-map plateau pipeline")
    cert = sub.add_parser("certify", parents=[common], help="Diophantine certificate")
    cert.add_argument("--theta", default=None, help='rotation number or "golden"')
    cert.add_argument("--qmax", type=int, default=None)
    cert.add_argument("--tau", type=float, default=None)
    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return p


def _load(args):
    if args.config is None:
        if args.command in NEEDS_CONFIG:
            raise ValidationError(f"{args.command} needs --config")
        doc = {}
    else:
        if not args.config.is_file():
            raise ValidationError("config file not found", path=str(args.config))
        try:
            doc = json.loads(args.config.read_text())
        except json.JSONDecodeError as e:
            raise ValidationError("config is not valid JSON", path=str(args.config), error=str(e)) from None
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object", path=str(args.config))
    if args.command == "certify":
        for key in ("theta", "qmax", "tau"):
            v = getattr(args, key)
            if v is not None:
                doc[key] = v
        if doc.get("theta") not in (None, "golden"):
            doc["theta"] = str(doc["theta"])
    if args.seed is not None:
        if not (0 <= args.seed < 1 << 64):
            raise ValidationError("seed must be an unsigned 64-bit integer", seed=args.seed)
        doc["seed"] = args.seed
    return doc


def _write(out: Path, files: dict):
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:  # argparse usage errors
        return service.EXIT_VALIDATION if e.code else service.EXIT_OK
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "serve":
        import uvicorn
        uvicorn.run("pergrowth.api.app:app", host=args.host, port=args.port)
        return service.EXIT_OK
    try:
        doc = _load(args)
        result = service.run_job(args.command, doc)
    except Exception as exc:  # every failure becomes a JSON report
        rep = service.error_report(exc)
        text = rep.model_dump_json(indent=2)
        print(text, file=sys.stderr)
        try:
            _write(args.out, {"error.json": text + "\n"})
        except OSError:
            pass
        return rep.error.exit_code
    _write(args.out, result.files)
    summary = json.dumps({"kind": result.kind, "summary": result.summary, "files": sorted(result.files)},
                         indent=2, sort_keys=True)
    (args.out / "summary.json").write_text(summary + "\n")
    print(summary)
    if result.kind == "cascade" and result.summary.get("status") == "halted":
        return service.EXIT_NUMERIC
    return service.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
