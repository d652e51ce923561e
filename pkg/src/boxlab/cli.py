"""Command line front end.

Exit codes: 0 every check passed, 1 a verification failed, 2 bad
configuration or input, 3 output could not be written.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from typing import Dict, List, Optional, Sequence

from . import campaigns
from .boxes import Box, format_fraction
from .channels import Channel, PreconditionError
from .definetti import DeFinettiState, count_vectors, tau_general_entry
from .reduction import verify_reduction
from .symmetry import SymmetryTemplate, TemplateError, chsh_template, load_template

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned value")
    return value


def _template(name: str) -> SymmetryTemplate:
    try:
        return load_template(name).require_valid()
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load template {name!r}: {exc}") from exc


def cmd_tau(args) -> Dict:
    n = args.n
    if args.template == "chsh":
        state = DeFinettiState("chsh", n)
        entries = []
        for N in range(n + 1):
            value = state.value((n - N, N))
            entries.append({"N": N, "value": _value(value, args, chsh_template(), n, (n - N, N))})
        return {"entries": entries, "pass": True}
    template = _template(args.template)
    entries = []
    for counts in count_vectors(template, n):
        entries.append({"counts": list(counts), "value": _value(None, args, template, n, counts)})
    return {"entries": entries, "pass": True, "template": template.to_dict()}


def _value(exact, args, template, n, counts):
    if args.method == "quadrature":
        return tau_general_entry(template, n, counts, method="quadrature")
    value = exact if exact is not None else tau_general_entry(template, n, counts)
    return format_fraction(value)


def _checks_report(rows: List[Dict]) -> Dict:
    return {"checks": rows, "pass": campaigns.all_hold(rows)}


def cmd_verify(args) -> Dict:
    if args.what == "reduction":
        template = _template(args.template) if args.kind == "general" else None
        rows = campaigns.reduction_campaign(args.kind, args.n, args.trials, args.seed, template, args.m, args.l)
        return _checks_report(rows)
    if args.what == "testbound":
        return _checks_report(campaigns.testbound_campaign(args.kind, args.n, args.trials, args.seed))
    if args.what == "box":
        try:
            with open(args.input) as fh:
                box = Box.from_json(fh.read())
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read box {args.input!r}: {exc}") from exc
        arg = {"chsh": "chsh", "plain": None}[args.kind] if args.kind != "general" else _template(args.template)
        report = verify_reduction(box, arg)
        return _checks_report([report.to_dict()])
    raise ConfigError(f"unknown verification {args.what!r}")


def _load_channels(names: str, n: int, seed: int) -> List[Channel]:
    if names.endswith(".json"):
        out = []
        for path in names.split(","):
            try:
                with open(path) as fh:
                    out.append(Channel.from_json(fh.read()))
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"cannot read channel {path!r}: {exc}") from exc
        return out
    try:
        return campaigns.named_channels(names, n, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_diamond(args) -> Dict:
    if not args.family.startswith("seeded:"):
        raise ConfigError("family must look like seeded:K")
    size = int(args.family.split(":", 1)[1])
    channels = _load_channels(args.channels, args.n, args.seed)
    rows = campaigns.diamond_campaign(args.n, channels, size, args.seed)
    return _checks_report(rows)


def cmd_export(args) -> Dict:
    if args.what == "tau":
        if args.template == "chsh":
            box = DeFinettiState("chsh", args.n).materialize()
        else:
            box = DeFinettiState(_template(args.template), args.n).materialize()
        payload = box.to_json()
    else:
        payload = _template(args.template).to_json()
    _write(args.output, payload + "\n")
    return {"pass": True, "written": args.output}


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _render(report: Dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    rows = report.get("checks") or report.get("entries") or []
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            fields = list(rows[0].keys())
            writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _flat(v) for k, v in row.items()})
        return buf.getvalue()
    lines = [f"{report['command']}: {'PASS' if report['pass'] else 'FAIL'}"]
    for row in rows:
        lines.append("  " + " ".join(f"{k}={_flat(v)}" for k, v in row.items()))
    lines.append(f"  elapsed {report['timing']['seconds']:.3f}s")
    return "\n".join(lines) + "\n"


def _flat(value):
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxlab", description="Exact de Finetti reductions for boxes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=True):
        p.add_argument("--n", type=_positive, required=True, help="number of rounds")
        p.add_argument("--seed", type=_seed, default=0)
        if trials:
            p.add_argument("--trials", type=_positive, default=20)
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")

    tau = sub.add_parser("tau", help="tau entries by color counts")
    tau.add_argument("--template", default="chsh", help="builtin name or template JSON file")
    tau.add_argument("--method", choices=("exact", "quadrature"), default="exact")
    common(tau, trials=False)

    verify = sub.add_parser("verify", help="verification campaigns")
    vsub = verify.add_subparsers(dest="what", required=True)
    red = vsub.add_parser("reduction", help="P <= (n+1)^d tau on random symmetric boxes")
    red.add_argument("--kind", choices=("chsh", "general", "plain"), default="chsh")
    red.add_argument("--template", default="cyclic-3", help="template for --kind general")
    red.add_argument("--m", type=_positive, default=2, help="inputs per round for --kind plain")
    red.add_argument("--l", type=int, default=2, help="outputs per round for --kind plain")
    common(red)
    tb = vsub.add_parser("testbound", help="failure probability of invariant tests")
    tb.add_argument("--kind", choices=("chsh", "plain"), default="chsh")
    common(tb)
    tb.set_defaults(trials=5)
    vbox = vsub.add_parser("box", help="check a box JSON file")
    vbox.add_argument("input")
    vbox.add_argument("--kind", choices=("chsh", "general", "plain"), default="plain")
    vbox.add_argument("--template", default="cyclic-3")
    vbox.add_argument("--format", choices=("json", "csv", "text"), default="json")
    vbox.add_argument("--output", default=None)

    diamond = sub.add_parser("diamond", help="extension-distance bound for invariant channels")
    dsub = diamond.add_subparsers(dest="what", required=True)
    dv = dsub.add_parser("verify")
    dv.add_argument("--channels", default="chsh-score,chsh-parity", help="builtin names or channel JSON files")
    dv.add_argument("--family", default="seeded:4")
    common(dv, trials=False)

    export = sub.add_parser("export", help="write tau or a template as JSON")
    esub = export.add_subparsers(dest="what", required=True)
    for what in ("tau", "template"):
        ep = esub.add_parser(what)
        ep.add_argument("--template", default="chsh")
        if what == "tau":
            ep.add_argument("--n", type=_positive, required=True)
        ep.add_argument("--output", default=None)
    return parser


def _config(args) -> Dict:
    skip = {"command", "what", "format", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


COMMANDS = {"tau": cmd_tau, "verify": cmd_verify, "diamond": cmd_diamond, "export": cmd_export}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.command + (f" {args.what}" if getattr(args, "what", None) else "")
    start = time.perf_counter()
    try:
        body = COMMANDS[args.command](args)
    except (ConfigError, TemplateError, PreconditionError) as exc:
        print(f"boxlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"boxlab: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "export":
        return EXIT_OK
    report = {"command": name, "config": _config(args)}
    report.update(body)
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    try:
        _write(args.output, _render(report, args.format))
    except OSError as exc:
        print(f"boxlab: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if report["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
