"""``hkl`` command-line front end.

Exit codes: 0 success, 1 model or semantic error, 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from .analysis import (deadlocks, expand, format_invariant, invariant_value,
                       place_invariants, transition_invariants)
from .calculus import Module
from .dsl.dot import export_dot
from .dsl.jsonio import export_json, import_json
from .dsl.model import SourceFile
from .dsl.parser import parse
from .dsl.printer import pretty_print, print_module
from .errors import HklError
from .netschema import (NetSchema, enabled_modes, fire, format_marking,
                        instantiate, reachable_markings)
from .runs import count_linearizations, global_views, unfold

OK, MODEL_ERROR, USAGE_ERROR = 0, 1, 2


class CliError(Exception):
    def __init__(self, message, code=MODEL_ERROR):
        super().__init__(message)
        self.code = code


# -- output helpers ----------------------------------------------------------

class Out:
    def __init__(self, args, stdout, stderr, stdin=None):
        self.stdin = stdin or sys.stdin
        self.stdout = stdout
        self.stderr = stderr
        self.path = getattr(args, "out", None)
        self.color = _use_color(args, stdout)

    def paint(self, text, code):
        return f"\033[{code}m{text}\033[0m" if self.color else text

    def info(self, text=""):
        print(text, file=self.stdout)

    def note(self, text):
        print(text, file=self.stderr)

    def artifact(self, text):
        """The command's product: to ``--out`` if given, else stdout."""
        if self.path:
            try:
                with open(self.path, "w", encoding="utf-8") as fh:
                    fh.write(text)
            except OSError as e:
                raise CliError(f"cannot write {self.path}: {e.strerror}", USAGE_ERROR)
        else:
            self.stdout.write(text if text.endswith("\n") else text + "\n")


def _use_color(args, stream) -> bool:
    env = os.environ.get("HKL_COLOR")
    if env in ("0", "1"):
        return env == "1"
    flag = getattr(args, "color", None)
    if flag is not None:
        return flag
    return hasattr(stream, "isatty") and stream.isatty()


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _nonnegative(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must not be negative: {value}")
    return value


# -- model loading -----------------------------------------------------------

def _load(paths, out: Out):
    files = []
    for p in paths:
        try:
            with open(p, encoding="utf-8") as fh:
                files.append(SourceFile(p, fh.read()))
        except OSError as e:
            raise CliError(f"cannot read {p}: {e.strerror}", USAGE_ERROR)
        except UnicodeDecodeError:
            raise CliError(f"cannot read {p}: not UTF-8 text", USAGE_ERROR)
    model, diags = parse(files)
    return model, diags


def _print_diags(diags, out: Out):
    for d in diags:
        text = str(d)
        if d.is_error:
            text = text.replace("error[", out.paint("error", "31") + "[", 1)
        out.note(text)


def _model(args, out: Out):
    model, diags = _load(args.paths, out)
    _print_diags(diags, out)
    if model is None:
        raise CliError(f"{sum(d.is_error for d in diags)} error(s) in the input")
    return model


def _pick(table: dict, name, what):
    if name is not None:
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise CliError(f"no {what} named {name!r} (known: {known})")
        return name
    if len(table) == 1:
        return next(iter(table))
    if not table:
        raise CliError(f"the input declares no {what}")
    raise CliError(f"several {what}s declared; choose one with --{what}")


def _system(model, name) -> Module:
    if name is not None and name not in model.systems and name in model.modules:
        return model.modules[name]
    return model.build_system(_pick(model.systems, name, "system"))


def _instance(args, model):
    module = _system(model, args.system)
    if not isinstance(module.interior, NetSchema):
        raise CliError(f"system {module.name!r} is abstract and cannot be instantiated")
    structure = model.structures[_pick(model.structures, args.structure, "structure")]
    return instantiate(module.interior, structure)


def _fmt_labels(elems) -> str:
    return ", ".join(e.label for e in elems) or "(empty)"


# -- commands ----------------------------------------------------------------

def cmd_check(args, out: Out) -> int:
    model, diags = _load(args.paths, out)
    if args.format == "json":
        out.artifact(export_json([{"code": d.code, "message": d.message,
                                   "severity": d.severity, "file": d.file,
                                   "line": d.line, "col": d.col} for d in diags],
                                 "diagnostics"))
    else:
        _print_diags(diags, out)
    if model is None:
        return MODEL_ERROR
    if args.format != "json":
        out.info(f"ok: {len(model.signatures)} signature(s), {len(model.structures)} "
                 f"structure(s), {len(model.modules)} module(s), "
                 f"{len(model.systems)} system(s)")
    return OK


def cmd_compose(args, out: Out) -> int:
    model = _model(args, out)
    module = _system(model, args.system)
    report = f"left: {_fmt_labels(module.left)}, right: {_fmt_labels(module.right)}"
    if args.format == "json":
        out.artifact(export_json(module))
        out.note(report)
    elif args.format == "dot":
        out.artifact(export_dot(module))
        out.note(report)
    else:
        out.info(f"module {module.name}")
        out.info(report)
        if args.out:
            out.artifact(print_module(module))
    return OK


def cmd_instantiate(args, out: Out) -> int:
    model = _model(args, out)
    inst = _instance(args, model)
    if args.format == "json":
        out.artifact(export_json(inst))
    elif args.format == "dot":
        out.artifact(export_dot(inst))
    else:
        order = [p.name for p in inst.schema.places]
        lines = [f"structure {inst.structure.name}",
                 f"marking: {format_marking(inst.marking, order)}",
                 "enabled: " + (", ".join(str(m) for m in enabled_modes(inst)) or "(none)")]
        out.artifact("\n".join(lines) + "\n")
    return OK


def _read_trace(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", USAGE_ERROR)
    return import_json(text, expect="trace")


def cmd_simulate(args, out: Out) -> int:
    model = _model(args, out)
    inst = _instance(args, model)
    order = [p.name for p in inst.schema.places]
    quiet = args.format == "json"
    trace = []

    def show(label):
        if not quiet:
            out.info(f"{label}: {format_marking(inst.marking, order)}")

    show("initial")
    if args.replay:
        for k, mode in enumerate(_read_trace(args.replay), 1):
            if mode not in enabled_modes(inst):
                raise CliError(f"trace step {k}: {mode} is not enabled")
            inst = fire(inst, mode)
            trace.append(mode)
            show(f"step {k} {mode}")
    elif args.interactive:
        inst, trace = _interactive(inst, order, out, out.stdin)
    else:
        rng = random.Random(args.seed)
        for k in range(1, args.steps + 1):
            modes = enabled_modes(inst)
            if not modes:
                if not quiet:
                    out.info("deadlock")
                break
            mode = rng.choice(modes)
            inst = fire(inst, mode)
            trace.append(mode)
            show(f"step {k} {mode}")
    show("final")
    doc = export_json(trace, "trace")
    if args.out:
        out.artifact(doc)
    elif quiet:
        out.artifact(doc)
    return OK


def _interactive(inst, order, out: Out, stream):
    trace = []
    while True:
        modes = enabled_modes(inst)
        if not modes:
            out.info("deadlock: no enabled modes")
            return inst, trace
        for k, m in enumerate(modes, 1):
            out.info(f"  [{k}] {m}")
        while True:
            out.stdout.write("choose a mode (number, q to quit): ")
            out.stdout.flush()
            line = stream.readline()
            if not line:
                out.info()
                return inst, trace
            choice = line.strip()
            if choice in ("q", "quit"):
                return inst, trace
            if choice.isdigit() and 1 <= int(choice) <= len(modes):
                break
            out.info(f"invalid choice {choice!r}; enter 1-{len(modes)} or q")
        mode = modes[int(choice) - 1]
        inst = fire(inst, mode)
        trace.append(mode)
        out.info(f"fired {mode}")
        out.info(f"marking: {format_marking(inst.marking, order)}")


def _run_stats(run):
    return {"events": len(run.events), "conditions": len(run.conditions),
            "views": len(global_views(run)), "linearizations": count_linearizations(run)}


def cmd_unfold(args, out: Out) -> int:
    model = _model(args, out)
    inst = _instance(args, model)
    runs = unfold(inst, args.max_events)
    if args.figures:
        from .plotting import plot_run
        for k, r in enumerate(runs, 1):
            out.note(f"wrote {plot_run(r, os.path.join(args.figures, f'run{k}.png'))}")
    if args.stats:
        stats = [_run_stats(r) for r in runs]
        if args.format == "json":
            out.artifact(export_json({"runs": stats}, "unfoldStats"))
            return OK
        lines = []
        for k, s in enumerate(stats, 1):
            if len(stats) > 1:
                lines.append(f"run {k}")
            lines += [f"{key}: {value}" for key, value in s.items()]
        out.artifact("\n".join(lines) + "\n")
        return OK
    if args.format == "json":
        out.artifact(export_json(runs, "runs"))
    elif args.format == "dot":
        out.artifact("".join(export_dot(r) for r in runs))
    else:
        lines = [f"{len(runs)} maximal run(s)"]
        for k, r in enumerate(runs, 1):
            lines.append(f"run {k}: {len(r.events)} events, {len(r.conditions)} conditions")
            for e in r.topological():
                if e in r.events:
                    pre = ", ".join(r.describe(c) for c in r.preset(e))
                    post = ", ".join(r.describe(c) for c in r.postset(e))
                    lines.append(f"  {e} {r.events[e].mode}: {pre} -> {post}")
        out.artifact("\n".join(lines) + "\n")
    return OK


def cmd_analyze(args, out: Out) -> int:
    model = _model(args, out)
    inst = _instance(args, model)
    wanted = {k for k in ("invariants", "reachability", "deadlocks") if getattr(args, k)}
    wanted = wanted or {"invariants", "reachability", "deadlocks"}
    graph = reachable_markings(inst, args.bound) \
        if wanted & {"reachability", "deadlocks"} or args.figures else None
    net = expand(inst) if "invariants" in wanted or args.figures else None
    order = [p.name for p in inst.schema.places]
    report, lines = {}, []
    if "reachability" in wanted:
        report["markings"] = len(graph.markings)
        report["edges"] = len(graph.edges)
        lines.append(f"reachable markings: {len(graph.markings)} ({len(graph.edges)} edges)")
    if "invariants" in wanted:
        pis, tis = place_invariants(net), transition_invariants(net)
        report["lowPlaces"] = [{"place": p, "token": t} for p, t in net.low_places]
        report["lowTransitions"] = [{"transition": m.transition,
                                     "valuation": dict(m.valuation)}
                                    for _, m in net.low_transitions]
        report["placeInvariants"] = []
        lines.append(f"place invariants: {len(pis)}")
        for iv in pis:
            value = invariant_value(inst, iv, inst.marking)
            text = format_invariant(net, iv)
            report["placeInvariants"].append({"weights": list(iv.weights), "text": text,
                                              "value": value})
            lines.append(f"  {text} = {value}")
        report["transitionInvariants"] = []
        lines.append(f"transition invariants: {len(tis)}")
        for iv in tis:
            text = format_invariant(net, iv)
            report["transitionInvariants"].append({"weights": list(iv.weights),
                                                   "text": text, "value": None})
            lines.append(f"  {text}")
    if "deadlocks" in wanted:
        dead = deadlocks(inst, graph=graph)
        report["deadlocks"] = [{p: m.tokens(p) for p in order} for m in dead]
        lines.append(f"deadlocks: {len(dead)}")
        lines += [f"  {format_marking(m, order)}" for m in dead]
    if args.figures:
        from .plotting import plot_incidence, plot_reachability
        for path in (plot_reachability(graph, os.path.join(args.figures, "reachability.png")),
                     plot_incidence(net, os.path.join(args.figures, "incidence.png"))):
            out.note(f"wrote {path}")
    if args.format == "json":
        out.artifact(export_json(report, "analysis"))
    else:
        out.artifact("\n".join(lines) + "\n")
    return OK


def cmd_export(args, out: Out) -> int:
    model = _model(args, out)
    if args.system is None and args.structure is None:
        subject = model
    elif args.structure is not None and (args.system is not None or model.systems):
        subject = _instance(args, model)
        if args.reachability:
            subject = reachable_markings(subject, args.bound)
    elif args.structure is not None:
        subject = model.structures[_pick(model.structures, args.structure, "structure")]
    else:
        subject = _system(model, args.system)
    if args.format == "json":
        out.artifact(export_json(subject))
    elif args.format == "dot":
        if subject is model:
            raise CliError("DOT export needs --system (optionally with --structure)")
        out.artifact(export_dot(subject))
    else:
        if subject is model:
            out.artifact(pretty_print(model))
        elif isinstance(subject, Module) and isinstance(subject.interior, (NetSchema, type(None))):
            out.artifact(print_module(subject))
        else:
            raise CliError("text export covers whole models and modules; use --format "
                           "json or dot")
    return OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("paths", nargs="+", metavar="FILE", help=".hkl input files")
    common.add_argument("--out", metavar="PATH", help="write the artifact here")
    color = common.add_mutually_exclusive_group()
    color.add_argument("--color", dest="color", action="store_true", default=None)
    color.add_argument("--no-color", dest="color", action="store_false")

    def fmt(p, choices, default="text"):
        p.add_argument("--format", choices=choices, default=default)

    def target(p):
        p.add_argument("--system", help="system (or single module) to use")
        p.add_argument("--structure", help="structure to instantiate with")

    parser = argparse.ArgumentParser(prog="hkl", description="Compose, instantiate, "
                                     "simulate and analyze modular Petri net models.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("check", parents=[common], help="parse and validate models")
    fmt(p, ["text", "json"])
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compose", parents=[common], help="compose a system's modules")
    p.add_argument("--system")
    fmt(p, ["text", "json", "dot"])
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("instantiate", parents=[common],
                       help="instantiate a system with a structure")
    target(p)
    fmt(p, ["text", "json", "dot"])
    p.set_defaults(func=cmd_instantiate)

    p = sub.add_parser("simulate", parents=[common], help="play the token game")
    target(p)
    fmt(p, ["text", "json"])
    how = p.add_mutually_exclusive_group()
    how.add_argument("--interactive", action="store_true", help="choose modes from a menu")
    how.add_argument("--random", action="store_true", help="fire seeded random modes")
    how.add_argument("--replay", metavar="TRACE", help="fire the modes of a trace file")
    p.add_argument("--steps", type=_nonnegative, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("unfold", parents=[common], help="compute the maximal runs")
    target(p)
    fmt(p, ["text", "json", "dot"])
    p.add_argument("--max-events", type=_positive, default=1000)
    p.add_argument("--stats", action="store_true",
                   help="print event, condition, view and linearization counts")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("analyze", parents=[common], help="reachability, invariants, deadlocks")
    target(p)
    fmt(p, ["text", "json"])
    p.add_argument("--invariants", action="store_true")
    p.add_argument("--reachability", action="store_true")
    p.add_argument("--deadlocks", action="store_true")
    p.add_argument("--bound", type=_positive, default=10_000)
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export", parents=[common], help="export models or derived artifacts")
    target(p)
    fmt(p, ["text", "json", "dot"])
    p.add_argument("--reachability", action="store_true",
                   help="export the reachability graph of the instance")
    p.add_argument("--bound", type=_positive, default=10_000)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_ERROR
    out = Out(args, stdout, stderr, stdin)
    try:
        return args.func(args, out)
    except CliError as e:
        out.note(f"{out.paint('error', '31')}: {e}")
        return e.code
    except HklError as e:
        out.note(f"{out.paint('error', '31')}: {type(e).__name__}: {e}")
        return MODEL_ERROR
    except ValueError as e:
        out.note(f"{out.paint('error', '31')}: {e}")
        return MODEL_ERROR


if __name__ == "__main__":
    sys.exit(main())
