"""Scenario file format: flat key/section text, diffable and round-trip exact.

Sections: field, obstacle, wall, initial, run, region.  Vectors are
space-separated numbers; floats serialize via repr so a load of a serialized
scenario reproduces it bit for bit.
"""

import configparser
import io
import math

from .errors import ParseError, ValidationError
from .fields import probe_constants
from .geometry import check_reach_ball_condition
from .scenarios import Scenario

_FIELD_KINDS = ("morse", "congestion", "drift")
_OBSTACLE_KINDS = ("ellipse", "halfspace", "none")
_INITIAL_KINDS = ("gaussian", "uniform", "points")
_REGION_KINDS = ("halfspace", "box")
_INTEGRATORS = ("euler", "rk4")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def _floats(raw, count=None, key=""):
    try:
        vals = tuple(float(tok) for tok in raw.split())
    except ValueError as exc:
        raise ParseError(f"could not parse numbers in {key!r}: {raw!r}") from exc
    if count is not None and len(vals) != count:
        raise ParseError(f"{key!r} needs {count} numbers, got {len(vals)}")
    return vals


def _points_list(raw):
    pts = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append(_floats(chunk, 2, key="points"))
    return tuple(pts)


def serialize_scenario(scenario):
    """Render a scenario as the structured-text format."""
    out = io.StringIO()

    def section(name, pairs):
        live = [(k, v) for k, v in pairs if v is not None]
        if not live:
            return
        out.write(f"[{name}]\n")
        for k, v in live:
            out.write(f"{k} = {_fmt(v)}\n")
        out.write("\n")

    fs = scenario.field
    rows = [("kind", fs["kind"])]
    for key in ("attract_strength", "repel_strength", "attract_range", "repel_range",
                "radius", "saturation", "normalizer"):
        if key in fs:
            rows.append((key, float(fs[key])))
    drift = tuple(fs.get("drift", ("zero",)))
    rows.append(("drift", drift[0] if len(drift) == 1
                 else f"{drift[0]} {_fmt(tuple(drift[1]))}"))
    if math.isfinite(fs.get("declared_l", math.inf)):
        rows.append(("declared_l", float(fs["declared_l"])))
    section("field", rows)

    ob = scenario.obstacle
    if ob:
        rows = [("kind", ob["kind"])]
        if ob["kind"] == "ellipse":
            rows += [("center", tuple(ob["center"])),
                     ("semi_axes", tuple(ob["semi_axes"])),
                     ("angle0", float(ob.get("angle0", 0.0))),
                     ("spin", float(ob.get("spin", 0.0))),
                     ("velocity", tuple(ob.get("velocity", (0.0, 0.0))))]
        elif ob["kind"] == "halfspace":
            rows += [("normal", tuple(ob["normal"])),
                     ("offset", float(ob.get("offset", 0.0))),
                     ("speed", float(ob.get("speed", 0.0)))]
        section("obstacle", rows)

    if scenario.wall:
        w = scenario.wall
        section("wall", [("x", float(w["x"])),
                         ("exit_half_width", float(w["exit_half_width"])),
                         ("thickness", float(w["thickness"])),
                         ("exit_center", float(w.get("exit_center", 0.0)))])

    ini = scenario.initial
    rows = [("kind", ini["kind"])]
    if ini["kind"] == "gaussian":
        rows += [("mean", tuple(ini["mean"])), ("std", float(ini.get("std", 1.0)))]
    elif ini["kind"] == "uniform":
        rows += [("box", tuple(ini["box"]))]
        if ini.get("stratified", False):
            rows.append(("stratified", True))
    else:
        rows.append(("points", "; ".join(_fmt(tuple(p)) for p in ini["points"])))
    section("initial", rows)

    section("run", [
        ("name", scenario.name),
        ("tau", float(scenario.tau)),
        ("horizon", float(scenario.horizon)),
        ("n", scenario.n),
        ("seed", scenario.seed),
        ("substeps", scenario.substeps),
        ("integrator", scenario.integrator),
        ("strict", scenario.strict),
        ("workspace", tuple(scenario.workspace[0]) + tuple(scenario.workspace[1])),
        ("declared_m", None if scenario.declared_m is None else float(scenario.declared_m)),
        ("declared_reach", None if scenario.declared_reach is None
         else float(scenario.declared_reach)),
    ])

    reg = scenario.region or {"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0}
    rows = [("kind", reg["kind"])]
    if reg["kind"] == "halfspace":
        rows += [("normal", tuple(reg.get("normal", (1.0, 0.0)))),
                 ("offset", float(reg.get("offset", 0.0)))]
    else:
        rows += [("lo", tuple(reg["lo"])), ("hi", tuple(reg["hi"]))]
    section("region", rows)
    return out.getvalue()


def parse_scenario(text):
    """Parse the structured-text format into a Scenario (no validation yet)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ParseError(f"scenario parse failed: {exc}", line=line) from exc
    if not parser.has_section("field") or not parser.has_section("run"):
        raise ParseError("scenario needs [field] and [run] sections")

    def get(sec, key, default=None):
        return parser.get(sec, key, fallback=default)

    fsec = parser["field"]
    kind = fsec.get("kind", "")
    if kind not in _FIELD_KINDS:
        raise ParseError(f"unknown field kind {kind!r}")
    field = {"kind": kind}
    for key in ("attract_strength", "repel_strength", "attract_range", "repel_range",
                "radius", "saturation", "normalizer", "declared_l"):
        if key in fsec:
            field[key] = float(fsec[key])
    draw = fsec.get("drift", "zero").split()
    if draw[0] in ("zero", "exit_parabola"):
        field["drift"] = (draw[0],)
    elif draw[0] == "constant":
        field["drift"] = ("constant", tuple(float(v) for v in draw[1:]))
    else:
        raise ParseError(f"unknown drift {draw[0]!r}")

    obstacle = None
    if parser.has_section("obstacle"):
        osec = parser["obstacle"]
        okind = osec.get("kind", "")
        if okind not in _OBSTACLE_KINDS:
            raise ParseError(f"unknown obstacle kind {okind!r}")
        if okind == "ellipse":
            obstacle = {"kind": "ellipse",
                        "center": _floats(osec["center"], 2, key="center"),
                        "semi_axes": _floats(osec["semi_axes"], 2, key="semi_axes"),
                        "angle0": float(osec.get("angle0", 0.0)),
                        "spin": float(osec.get("spin", 0.0)),
                        "velocity": _floats(osec.get("velocity", "0 0"), 2, key="velocity")}
        elif okind == "halfspace":
            obstacle = {"kind": "halfspace",
                        "normal": _floats(osec["normal"], 2, key="normal"),
                        "offset": float(osec.get("offset", 0.0)),
                        "speed": float(osec.get("speed", 0.0))}

    wall = None
    if parser.has_section("wall"):
        wsec = parser["wall"]
        wall = {"x": float(wsec["x"]),
                "exit_half_width": float(wsec["exit_half_width"]),
                "thickness": float(wsec["thickness"]),
                "exit_center": float(wsec.get("exit_center", 0.0))}

    if not parser.has_section("initial"):
        raise ParseError("scenario needs an [initial] section")
    isec = parser["initial"]
    ikind = isec.get("kind", "")
    if ikind not in _INITIAL_KINDS:
        raise ParseError(f"unknown initial kind {ikind!r}")
    if ikind == "gaussian":
        initial = {"kind": "gaussian", "mean": _floats(isec["mean"], 2, key="mean"),
                   "std": float(isec.get("std", 1.0))}
    elif ikind == "uniform":
        initial = {"kind": "uniform", "box": _floats(isec["box"], 4, key="box")}
        if isec.get("stratified", "false").lower() == "true":
            initial["stratified"] = True
    else:
        initial = {"kind": "points", "points": _points_list(isec["points"])}

    rsec = parser["run"]
    ws = _floats(rsec.get("workspace", "-8 8 -8 8"), 4, key="workspace")
    integrator = rsec.get("integrator", "rk4")
    if integrator not in _INTEGRATORS:
        raise ParseError(f"unknown integrator {integrator!r}")

    region = None
    if parser.has_section("region"):
        gsec = parser["region"]
        gkind = gsec.get("kind", "halfspace")
        if gkind not in _REGION_KINDS:
            raise ParseError(f"unknown region kind {gkind!r}")
        if gkind == "halfspace":
            region = {"kind": "halfspace",
                      "normal": _floats(gsec.get("normal", "1 0"), 2, key="normal"),
                      "offset": float(gsec.get("offset", 0.0))}
        else:
            region = {"kind": "box", "lo": _floats(gsec["lo"], 2, key="lo"),
                      "hi": _floats(gsec["hi"], 2, key="hi")}

    return Scenario(
        name=rsec.get("name", "scenario"),
        field=field, obstacle=obstacle, wall=wall, initial=initial, region=region,
        tau=float(rsec["tau"]), horizon=float(rsec["horizon"]),
        n=int(rsec.get("n", len(initial.get("points", ())) or 1)),
        seed=int(rsec.get("seed", 0)),
        substeps=int(rsec.get("substeps", 1)),
        integrator=integrator,
        strict=rsec.get("strict", "true").lower() == "true",
        workspace=((ws[0], ws[2]), (ws[1], ws[3])),
        declared_m=float(rsec["declared_m"]) if "declared_m" in rsec else None,
        declared_reach=float(rsec["declared_reach"]) if "declared_reach" in rsec else None,
    )


def validate_scenario(scenario, probe_samples=120):
    """Named validation checks run at load time, fail fast with a witness.

    Order: mesh, tau-feasibility (strict scenarios), reach declaration,
    sampled reach ball test, declared Hausdorff rate, field probes.
    """
    ms = scenario.build_moving_set()
    field = scenario.build_field()
    workspace = scenario.build_workspace()

    lip_l = field.declared_l
    if scenario.strict:
        bound = 2.0 * scenario.tau * (lip_l + ms.lipschitz_m)
        if not bound < ms.declared_reach:
            raise ValidationError(
                "tau-feasibility",
                f"2*tau*(L+M) = {bound:.6g} must stay below reach {ms.declared_reach:.6g}")

    windows = scenario.horizon / (2.0 * scenario.tau)
    if abs(windows - round(windows)) > 1e-9 or round(windows) < 1:
        raise ValidationError("mesh", f"horizon {scenario.horizon} is not an even "
                                      f"multiple of tau {scenario.tau}")

    for t in (0.0, scenario.horizon / 2.0, scenario.horizon):
        shape = ms.at(t)
        if ms.declared_reach > shape.reach * (1.0 + 1e-9):
            raise ValidationError("reach-declaration",
                                  f"declared reach {ms.declared_reach:.6g} exceeds the "
                                  f"analytic reach {shape.reach:.6g} at t={t}")
        witness = check_reach_ball_condition(shape, ms.declared_reach,
                                             workspace=workspace, seed=7)
        if witness is not None:
            raise ValidationError("reach-ball",
                                  f"r-ball inequality fails at t={t}", witness=witness)

    if ms.lipschitz_m > 0:
        observed = ms.check_lipschitz(pairs=6, samples=384, workspace=workspace, seed=11)
        if observed > ms.lipschitz_m * 1.05 + 1e-6:
            raise ValidationError("hausdorff-lipschitz",
                                  f"observed rate {observed:.6g} exceeds declared "
                                  f"M = {ms.lipschitz_m:.6g}")

    if math.isfinite(lip_l):
        probe_constants(field, workspace, samples=max(probe_samples, 100), seed=13)

    return scenario


def load_scenario(path, validate=True):
    """Read, parse, and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise ParseError(f"{path} is empty")
    scenario = parse_scenario(text)
    if validate:
        validate_scenario(scenario)
    return scenario
