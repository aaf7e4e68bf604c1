"""Command line interface.

Four subcommands drive the library end to end:

``traintrack``
    Certify a graph map file: train track property, irreducibility,
    expansion, stretch factor, Nielsen path search, ideal components,
    rotationless index, and the lone-axis verdict.  The exit code follows
    the verdict: ``0`` yes, ``1`` no, ``2`` inconclusive.

``survey``
    Tabulate the primitive and imprimitive integral classes of the fibered
    sector of a two-generator presentation up to a coordinate height,
    together with the relator polygon and its excluded rays.

``section``
    Build the level-set section of one integral class and print its first
    return table; classes on the pairing-one line get the canonical names.

``monodromy``
    Read the first return map on the fundamental group of the section and
    print the induced outer automorphism.

Input files are ``.map`` graph-map files or ``.2gen`` presentation files;
a presentation names its map file on a ``use`` line and is required by the
class-coordinate commands.  Class coordinates ``--class=cb,cr`` always
refer to the dual basis of the presentation's two dualcycles, in generator
order.  Exit codes: ``0`` success (or verdict yes), ``1`` verdict no,
``2`` verdict inconclusive, ``64`` unusable input, ``65`` a computation
violated an invariant.  Runs are deterministic; no environment variable is
consulted, so setting ``FBC_SEED`` or anything else changes nothing.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import bns
from . import cohomology as co
from . import section as sect
from .errors import FreeByCyclicError, InputParseError, InvariantViolation
from .folding import decompose
from .graphs import MapFile, load_map_file, map_to_automorphism
from .torus import TrapComplex, build_torus, skew_loop
from .traintrack import traintrack_report
from .words import FreeGroupMap, format_word, outer_equal

EXIT_YES = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_INVARIANT = 65

_VERDICT_EXITS = {"yes": EXIT_YES, "no": EXIT_NO,
                  "inconclusive": EXIT_INCONCLUSIVE}


@dataclass
class RunConfig:
    """Everything one invocation needs, parsed and validated."""

    command: str
    input: str
    class_coords: Optional[tuple[int, int]] = None
    k_max: int = 5
    height_max: int = 8
    phase: Optional[Fraction] = None
    nielsen_len: int = 10
    nielsen_period: int = 6
    format: str = "json"
    out: Optional[str] = None


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Argparse variant whose failures surface as input errors (exit 64)."""

    def error(self, message):
        raise InputParseError(message)


def _class_coords(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputParseError(
            f"--class wants two comma-separated integers, got {text!r}")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise InputParseError(f"bad class coordinate in {text!r}") from exc


def _phase(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputParseError(f"bad phase {text!r}") from exc


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = _Parser(prog="freebycyclic",
                     description="train tracks, mapping tori, sections, "
                                 "and fibered-face surveys")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
            ("traintrack", "certify a graph map and test the lone axis"),
            ("survey", "tabulate integral classes of the fibered sector"),
            ("section", "build one class's section and first return table"),
            ("monodromy", "print the outer automorphism of one class")]:
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("--input", required=True,
                         help=".map graph map or .2gen presentation file")
        cmd.add_argument("--class", dest="class_coords", type=_class_coords,
                         default=None, metavar="CB,CR",
                         help="class coordinates in the presentation's "
                              "dual basis (use --class=-1,2 for negatives)")
        cmd.add_argument("--k-max", type=int, default=5,
                         help="axis-line enumeration bound (default 5)")
        cmd.add_argument("--height-max", type=int, default=8,
                         help="survey coordinate height (default 8)")
        cmd.add_argument("--phase", type=_phase, default=None,
                         help="section height phase, e.g. 1/2")
        cmd.add_argument("--nielsen-len", type=int, default=10,
                         help="Nielsen path length bound (default 10)")
        cmd.add_argument("--nielsen-period", type=int, default=6,
                         help="Nielsen path period bound (default 6)")
        cmd.add_argument("--format", choices=("json", "dot", "tikz"),
                         default="json")
        cmd.add_argument("--out", default=None, metavar="DIR",
                         help="write the artifact into DIR instead of stdout")
    ns = parser.parse_args(argv)
    return RunConfig(command=ns.command, input=ns.input,
                     class_coords=ns.class_coords, k_max=ns.k_max,
                     height_max=ns.height_max, phase=ns.phase,
                     nielsen_len=ns.nielsen_len,
                     nielsen_period=ns.nielsen_period,
                     format=ns.format, out=ns.out)


# ---------------------------------------------------------------------------
# shared loading


@dataclass
class Workspace:
    """Parsed inputs plus the derived complex and class basis."""

    mapfile: MapFile
    presentation: Optional[bns.TwoGenPresentation]
    complex_: Optional[TrapComplex]
    duals: Optional[tuple[dict, dict]]
    pairing: Optional[tuple[int, int]]


def load_workspace(path_text: str, *, need_presentation: bool = False,
                   need_complex: bool = False) -> Workspace:
    path = Path(path_text)
    if not path.is_file():
        raise InputParseError(f"no such input file: {path}")
    presentation = None
    if path.suffix == ".2gen":
        presentation = bns.load_presentation_file(path)
        map_path = path.parent / presentation.use
        if not map_path.is_file():
            raise InputParseError(
                f"presentation uses missing map file: {map_path}")
        mapfile = load_map_file(map_path)
    elif path.suffix == ".map":
        mapfile = load_map_file(path)
    else:
        raise InputParseError(
            f"unrecognized input extension {path.suffix!r}; "
            "expected .map or .2gen")
    if need_presentation and presentation is None:
        raise InputParseError(
            "class coordinates are read in a presentation's dual basis; "
            "supply a .2gen input")
    complex_ = duals = pairing = None
    if need_complex:
        complex_ = build_torus(decompose(mapfile.gmap))
        if presentation is not None:
            cycles = [presentation.dualcycles[g]
                      for g in presentation.generators]
            duals = tuple(co.dual_basis(complex_, cycles))
            pairing = bns.pairing_coordinates(
                complex_, presentation.dualcycles, presentation.generators,
                skew_loop(complex_))
    return Workspace(mapfile, presentation, complex_, duals, pairing)


def _emit(cfg: RunConfig, payload: str, filename: str) -> None:
    if cfg.out is not None:
        directory = Path(cfg.out)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / filename).write_text(payload)
    else:
        sys.stdout.write(payload)


def _to_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _require_format(cfg: RunConfig, allowed: tuple[str, ...]) -> None:
    if cfg.format not in allowed:
        raise InputParseError(
            f"format {cfg.format!r} is not available for "
            f"{cfg.command!r} (choose from {', '.join(allowed)})")


def _class_of(ws: Workspace, coords: tuple[int, int]) -> dict:
    b_star, r_star = ws.duals
    return co.dict_sum(co.dict_scale(coords[0], b_star),
                       co.dict_scale(coords[1], r_star))


def _require_class(cfg: RunConfig) -> tuple[int, int]:
    if cfg.class_coords is None:
        raise InputParseError(f"{cfg.command} needs --class=CB,CR")
    if cfg.class_coords == (0, 0):
        raise InvariantViolation("the zero class has no section")
    return cfg.class_coords


# ---------------------------------------------------------------------------
# traintrack


def cmd_traintrack(cfg: RunConfig) -> int:
    _require_format(cfg, ("json",))
    ws = load_workspace(cfg.input)
    assumptions = ws.mapfile.assumptions
    report = traintrack_report(
        ws.mapfile.gmap,
        assume_ageometric="ageometric" in assumptions,
        assume_fully_irreducible="fully-irreducible" in assumptions,
        nielsen_len=cfg.nielsen_len, nielsen_period=cfg.nielsen_period)
    try:
        seq = decompose(ws.mapfile.gmap)
        report["folds"] = {
            "count": seq.fold_count,
            "labels": [record.label[0] for record in seq.folds],
            "kinds": [record.kind for record in seq.folds],
        }
    except FreeByCyclicError as exc:
        report["folds"] = {"error": str(exc)}
    _emit(cfg, _to_json(report), "traintrack.json")
    return _VERDICT_EXITS[report["lone_axis"]["verdict"]]


# ---------------------------------------------------------------------------
# survey


def cmd_survey(cfg: RunConfig) -> int:
    _require_format(cfg, ("json", "tikz"))
    ws = load_workspace(cfg.input, need_presentation=True, need_complex=True)
    pres = ws.presentation
    trace = bns.trace_polygon(pres)
    slopes = bns.excluded_directions(trace)
    if cfg.format == "tikz":
        _emit(cfg, bns.polygon_tikz(trace, slopes), "survey.tikz")
        return EXIT_YES
    sigma = bns.sigma_report(pres, direction=(0, 1), pairing=ws.pairing,
                             line_bound=cfg.k_max)
    comp = bns.component_containing(slopes, (0, 1))
    rows = []
    height = cfg.height_max
    for cr in range(-height, height + 1):
        for cb in range(-height, height + 1):
            if (cb, cr) == (0, 0) or not comp.contains((cb, cr)):
                continue
            divisor = math.gcd(abs(cb), abs(cr))
            cls = _class_of(ws, (cb, cr))
            z = co.integral_cocycle(ws.complex_, cls)
            try:
                co.cone_membership(ws.complex_, cls)
                in_cone = True
            except InvariantViolation:
                in_cone = False
            bound = co.axis_dim_lower_bound(ws.complex_, z)
            on_line = (cb * ws.pairing[0] + cr * ws.pairing[1] == 1)
            rows.append({
                "class": [cb, cr],
                "primitive": divisor == 1,
                "in_cone": in_cone,
                "skew_crossings": bound.crossings,
                "dim_lower_bound": bound.lower_bound,
                "on_axis_line": on_line,
                "monodromy_rank": sect.crossing_rank(ws.complex_, z)
                if divisor == 1 else None,
            })
    payload = {"height_max": height, "sigma": sigma, "classes": rows}
    _emit(cfg, _to_json(payload), "survey.json")
    return EXIT_YES


# ---------------------------------------------------------------------------
# section and monodromy


def _audit_dict(audit: sect.SectionAudit) -> dict:
    return {
        "vertices": audit.vertices,
        "edges": audit.edges,
        "rank": audit.rank,
        "components": audit.components,
        "skew_crossings": audit.skew_crossings,
        "valence_profile": [list(pair) for pair in audit.valence_profile],
        "illegal_turns_at_trivalent": audit.illegal_turns_at_trivalent,
    }


def _disconnection_report(cfg: RunConfig, ws: Workspace,
                          coords: tuple[int, int]) -> int:
    """A non-primitive class disconnects; report the pieces and fail."""
    z = co.integral_cocycle(ws.complex_, _class_of(ws, coords))
    section = sect.build_section(ws.complex_, z,
                                 cfg.phase if cfg.phase is not None
                                 else Fraction(1, 2))
    payload = {
        "class": list(coords),
        "primitive": False,
        "divisibility": math.gcd(abs(coords[0]), abs(coords[1])),
        "components": len(section.components),
        "component_vertices": [list(c) for c in section.components],
    }
    _emit(cfg, _to_json(payload), f"{cfg.command}.json")
    return EXIT_INVARIANT


def _build_for_class(cfg: RunConfig, ws: Workspace, coords: tuple[int, int]):
    """Section + first return for a primitive class, canonically when possible.

    Returns ``(line_section_or_None, section, return_map)``; the canonical
    route applies exactly when the class sits on the pairing-one line with
    a nonnegative chain index and the phase is the table's 1/2 convention.
    """
    cb, cr = coords
    co.cone_membership(ws.complex_, _class_of(ws, coords))
    canonical = (ws.pairing is not None
                 and cb * ws.pairing[0] + cr * ws.pairing[1] == 1
                 and cr == cb + 1 and cb >= 0
                 and cfg.phase in (None, Fraction(1, 2)))
    if canonical:
        ls = sect.line_section(ws.complex_, cb)
        return ls, ls.section, ls.return_map
    z = co.integral_cocycle(ws.complex_, _class_of(ws, coords))
    section = sect.build_section(ws.complex_, z,
                                 cfg.phase if cfg.phase is not None
                                 else Fraction(1, 2))
    return None, section, sect.first_return(section)


def cmd_section(cfg: RunConfig) -> int:
    _require_format(cfg, ("json", "dot"))
    ws = load_workspace(cfg.input, need_presentation=True, need_complex=True)
    coords = _require_class(cfg)
    if math.gcd(abs(coords[0]), abs(coords[1])) != 1:
        return _disconnection_report(cfg, ws, coords)
    ls, section, return_map = _build_for_class(cfg, ws, coords)
    if cfg.format == "dot":
        _emit(cfg, sect.section_dot(section), "section.dot")
        return EXIT_YES
    audit = sect.section_audit(section, return_map)
    payload = {
        "class": list(coords),
        "canonical": ls is not None,
        "k": None if ls is None else ls.k,
        "phase": str(section.phase),
        "basepoint": section.basepoint,
        "audit": _audit_dict(audit),
    }
    if ls is not None:
        payload["tree"] = list(ls.tree_edges)
        payload["first_return"] = {
            name: format_word(ls.table.edge_images[name])
            for name in sorted(ls.graph.edge_names)}
    else:
        payload["first_return"] = {
            name: format_word(return_map.edge_images[name])
            for name in sorted(section.graph.edge_names)}
    _emit(cfg, _to_json(payload), "section.json")
    return EXIT_YES


def _input_class_match(ws: Workspace, data: sect.MonodromyData
                       ) -> Optional[dict]:
    """Identify the monodromy with the input map's outer class, if it is one.

    Only a rank-matching monodromy can be compared; every bijection of
    generators is tried in sorted order, so a reported identification is
    deterministic.
    """
    marked = ws.mapfile.marked
    if marked is None:
        return None
    phi = map_to_automorphism(marked, ws.mapfile.gmap)
    gens = data.generators
    if len(gens) != len(phi.domain):
        return None
    psi = data.automorphism
    for perm in itertools.permutations(phi.domain):
        relabel = FreeGroupMap.from_strings(
            gens, {g: h for g, h in zip(gens, perm)}, codomain=phi.domain)
        unlabel = FreeGroupMap.from_strings(
            phi.domain, {h: g for g, h in zip(gens, perm)}, codomain=gens)
        transported = relabel.compose(psi).compose(unlabel)
        conjugator = outer_equal(transported, phi)
        if conjugator is not None:
            return {"matches": True,
                    "identification": {g: h for g, h in zip(gens, perm)},
                    "conjugator": format_word(conjugator)}
    return {"matches": False}


def cmd_monodromy(cfg: RunConfig) -> int:
    _require_format(cfg, ("json",))
    ws = load_workspace(cfg.input, need_presentation=True, need_complex=True)
    coords = _require_class(cfg)
    if math.gcd(abs(coords[0]), abs(coords[1])) != 1:
        return _disconnection_report(cfg, ws, coords)
    ls, section, return_map = _build_for_class(cfg, ws, coords)
    data = ls.monodromy if ls is not None \
        else sect.monodromy(section, return_map)
    payload = {
        "class": list(coords),
        "canonical": ls is not None,
        "rank": len(data.generators),
        "basepoint": data.basepoint,
        "generators": list(data.generators),
        "images": {g: format_word(data.automorphism.image(g))
                   for g in data.generators},
    }
    comparison = _input_class_match(ws, data)
    if comparison is not None:
        payload["input_class"] = comparison
    _emit(cfg, _to_json(payload), "monodromy.json")
    return EXIT_YES


# ---------------------------------------------------------------------------
# entry point


COMMANDS = {
    "traintrack": cmd_traintrack,
    "survey": cmd_survey,
    "section": cmd_section,
    "monodromy": cmd_monodromy,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_args(argv)
        return COMMANDS[cfg.command](cfg)
    except InputParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
