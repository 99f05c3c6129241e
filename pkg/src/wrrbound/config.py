"""Line-oriented configuration format.

::

    link   <name>          a=<endpoint> b=<endpoint> capacity_bps=<int>
    port   <switch>.<int>  w1=<int> w2=<int> max_bg_frame_bytes=<int>
    flow   <name>          class=control src=<station> dst=<station> frame_bytes=<int>
                           period_s=<float> deadline_s=<float> path=<sw.port,...>
    flow   <name>          class=background src=<station> dst=<station> path=<sw.port,...>
    optimize               [flow=<name>] [mode=paper|exhaustive] [departure=eq12|paper]
                           [w2=<int,...>] [w2_max=<int>] [w1_cap=<int>]
    simulate               [duration_s=<float>] [seeds=<int>] [gating=open|closed]
                           [queue_cap=<int>]

``#`` starts a comment.  Endpoints of the form ``<switch>.<int>`` are
switch ports; anything else is a station.  Byte counts are converted to
bits when parsed.  Only syntax is checked here; names that do not
resolve are reported by :func:`wrrbound.topology.validate_topology`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .analysis import DepartureMode, PortConfig
from .curves import PeriodicSource
from .errors import ConfigError
from .optimizer import OptimizerSettings, SearchMode
from .topology import FlowClass, FlowSpec, Link, PortId, Topology, port_name

_PORT_RE = re.compile(r"^([A-Za-z_][\w-]*)\.(\d+)$")
_NAME_RE = re.compile(r"^[A-Za-z_][\w.-]*$")

_KEYS = {
    "link": ({"a", "b", "capacity_bps"}, set()),
    "port": ({"w1", "w2", "max_bg_frame_bytes"}, set()),
    "flow:control": ({"class", "src", "dst", "frame_bytes", "period_s", "deadline_s", "path"}, set()),
    "flow:background": ({"class", "src", "dst", "path"}, set()),
    "optimize": (set(), {"flow", "mode", "departure", "w2", "w2_max", "w1_cap"}),
    "simulate": (set(), {"duration_s", "seeds", "gating", "queue_cap"}),
}


@dataclass(frozen=True)
class SimulationSettings:
    duration: float = 10.0
    seeds: int = 20
    gating: str = "open"
    queue_cap: int = 512


@dataclass(frozen=True)
class ConfigDocument:
    topology: Topology
    flows: tuple[FlowSpec, ...]
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    optimize_flow: str | None = None
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    # byte values as written, kept so that formatting round-trips exactly
    frame_bytes: dict = field(default_factory=dict, compare=False)

    def control_flows(self) -> list[FlowSpec]:
        return [f for f in self.flows if f.cls is FlowClass.CONTROL]


class _Line:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno

    def fail(self, code: str, msg: str, token: str | None = None) -> ConfigError:
        col = self.text.find(token) + 1 if token and token in self.text else 1
        return ConfigError(code, msg, self.lineno, col)


def _int(line: _Line, key: str, raw: str, minimum: int | None = None) -> int:
    if not re.fullmatch(r"[+-]?\d+", raw):
        raise line.fail("E_BAD_VALUE", f"{key} must be an integer, got {raw!r}", f"{key}=")
    v = int(raw)
    if minimum is not None and v < minimum:
        raise line.fail("E_BAD_VALUE", f"{key} must be >= {minimum}, got {v}", f"{key}=")
    return v


def _float(line: _Line, key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise line.fail("E_BAD_VALUE", f"{key} must be a number, got {raw!r}", f"{key}=") from None
    if v != v or v in (float("inf"), float("-inf")):
        raise line.fail("E_BAD_VALUE", f"{key} must be finite", f"{key}=")
    return v


def _port(line: _Line, raw: str) -> PortId:
    m = _PORT_RE.match(raw)
    if not m:
        raise line.fail("E_SYNTAX", f"expected <switch>.<port>, got {raw!r}", raw)
    return m.group(1), int(m.group(2))


def _ints(line: _Line, key: str, raw: str) -> tuple[int, ...]:
    return tuple(_int(line, key, x, 1) for x in raw.split(","))


def _pairs(line: _Line, tokens: list[str], kind: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq or not key or not val:
            raise line.fail("E_SYNTAX", f"expected key=value, got {tok!r}", tok)
        if key in out:
            raise line.fail("E_DUPLICATE_KEY", f"key {key!r} given twice", tok)
        out[key] = val
    if kind == "flow":
        cls = out.get("class")
        if cls not in ("control", "background"):
            raise line.fail("E_BAD_VALUE", f"flow class must be control or background, got {cls!r}",
                            "class=" if cls else None)
        kind = f"flow:{cls}"
    required, optional = _KEYS[kind]
    for key in out:
        if key not in required and key not in optional:
            raise line.fail("E_UNKNOWN_KEY", f"unknown key {key!r} for {kind.split(':')[0]}", f"{key}=")
    for key in sorted(required - out.keys()):
        raise line.fail("E_MISSING_KEY", f"missing key {key!r}")
    return out


def parse_config(text: str) -> ConfigDocument:
    """Parse configuration text.

    :raises ConfigError: with a line/column position and one of the codes
        ``E_EMPTY_CONFIG``, ``E_SYNTAX``, ``E_UNKNOWN_DIRECTIVE``,
        ``E_UNKNOWN_KEY``, ``E_MISSING_KEY``, ``E_DUPLICATE_KEY``,
        ``E_BAD_VALUE``, ``E_DUPLICATE_LINK``, ``E_DUPLICATE_PORT``,
        ``E_DUPLICATE_FLOW``, ``E_DUPLICATE_SECTION``.
    """
    links: list[Link] = []
    ports: dict[PortId, PortConfig] = {}
    port_lines: dict[PortId, tuple[_Line, dict]] = {}
    flows: list[FlowSpec] = []
    frame_bytes: dict = {}
    opt_kw: dict = {}
    opt_flow = None
    sim_kw: dict = {}
    seen_sections: set[str] = set()
    any_stmt = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        any_stmt = True
        line = _Line(raw, lineno)
        tokens = body.split()
        kind = tokens[0]
        if kind in ("link", "port", "flow"):
            if len(tokens) < 2 or "=" in tokens[1]:
                raise line.fail("E_SYNTAX", f"{kind} needs a name", kind)
            name, kv = tokens[1], _pairs(line, tokens[2:], kind)
        elif kind in ("optimize", "simulate"):
            if kind in seen_sections:
                raise line.fail("E_DUPLICATE_SECTION", f"second {kind} line", kind)
            seen_sections.add(kind)
            name, kv = None, _pairs(line, tokens[1:], kind)
        else:
            raise line.fail("E_UNKNOWN_DIRECTIVE", f"unknown directive {kind!r}", kind)

        if kind == "link":
            if not _NAME_RE.match(name):
                raise line.fail("E_SYNTAX", f"bad link name {name!r}", name)
            if any(l.name == name for l in links):
                raise line.fail("E_DUPLICATE_LINK", f"link {name} defined twice", name)
            links.append(Link(name, kv["a"], kv["b"], _int(line, "capacity_bps", kv["capacity_bps"], 1)))
        elif kind == "port":
            pid = _port(line, name)
            if pid in port_lines:
                raise line.fail("E_DUPLICATE_PORT", f"port {name} defined twice", name)
            port_lines[pid] = (line, kv)
        elif kind == "flow":
            if not _NAME_RE.match(name):
                raise line.fail("E_SYNTAX", f"bad flow name {name!r}", name)
            if any(f.name == name for f in flows):
                raise line.fail("E_DUPLICATE_FLOW", f"flow {name} defined twice", name)
            path = tuple(_port(line, p) for p in kv["path"].split(","))
            if kv["class"] == "control":
                nbytes = _int(line, "frame_bytes", kv["frame_bytes"], 1)
                period = _float(line, "period_s", kv["period_s"])
                if period <= 0:
                    raise line.fail("E_BAD_VALUE", "period_s must be positive", "period_s=")
                frame_bytes[name] = nbytes
                flows.append(FlowSpec(name, FlowClass.CONTROL, kv["src"], kv["dst"], path,
                                      PeriodicSource(8.0 * nbytes, period),
                                      _float(line, "deadline_s", kv["deadline_s"])))
            else:
                flows.append(FlowSpec(name, FlowClass.BACKGROUND, kv["src"], kv["dst"], path))
        elif kind == "optimize":
            if "flow" in kv:
                opt_flow = kv["flow"]
            if "mode" in kv:
                if kv["mode"] not in ("paper", "exhaustive"):
                    raise line.fail("E_BAD_VALUE", "mode must be paper or exhaustive", "mode=")
                opt_kw["mode"] = SearchMode(kv["mode"])
            if "departure" in kv:
                if kv["departure"] not in ("eq12", "paper"):
                    raise line.fail("E_BAD_VALUE", "departure must be eq12 or paper", "departure=")
                opt_kw["departure_mode"] = DepartureMode(kv["departure"])
            if "w2" in kv:
                opt_kw["w2_fixed"] = _ints(line, "w2", kv["w2"])
            if "w2_max" in kv:
                opt_kw["w2_candidates"] = tuple(range(1, _int(line, "w2_max", kv["w2_max"], 1) + 1))
            if "w1_cap" in kv:
                opt_kw["w1_cap"] = _int(line, "w1_cap", kv["w1_cap"], 1)
        else:
            if "duration_s" in kv:
                sim_kw["duration"] = _float(line, "duration_s", kv["duration_s"])
            if "seeds" in kv:
                sim_kw["seeds"] = _int(line, "seeds", kv["seeds"], 1)
            if "gating" in kv:
                if kv["gating"] not in ("open", "closed"):
                    raise line.fail("E_BAD_VALUE", "gating must be open or closed", "gating=")
                sim_kw["gating"] = kv["gating"]
            if "queue_cap" in kv:
                sim_kw["queue_cap"] = _int(line, "queue_cap", kv["queue_cap"], 1)

    if not any_stmt:
        raise ConfigError("E_EMPTY_CONFIG", "configuration is empty")

    for pid, (line, kv) in port_lines.items():
        w1 = _int(line, "w1", kv["w1"], 1)
        w2 = _int(line, "w2", kv["w2"], 1)
        nbytes = _int(line, "max_bg_frame_bytes", kv["max_bg_frame_bytes"], 1)
        link = next((l for l in links if port_name(pid) in (l.a, l.b)), None)
        # unattached ports get a placeholder capacity; validate reports them
        cap = link.capacity if link else 1.0
        ports[pid] = PortConfig(float(cap), w1, w2, 8.0 * nbytes)
        frame_bytes[pid] = nbytes

    stations = set()
    for l in links:
        for end in (l.a, l.b):
            if not _PORT_RE.match(end):
                stations.add(end)
    topo = Topology(tuple(links), ports, frozenset(stations))
    return ConfigDocument(topo, tuple(flows), OptimizerSettings(**opt_kw), opt_flow,
                          SimulationSettings(**sim_kw), frame_bytes)


def _num(x: float) -> str:
    return repr(float(x))


def format_config(doc: ConfigDocument) -> str:
    """Render a document back to configuration text (``parse_config`` inverts it)."""
    out = []
    for l in doc.topology.links:
        out.append(f"link {l.name} a={l.a} b={l.b} capacity_bps={int(l.capacity)}")
    for pid, p in doc.topology.ports.items():
        nbytes = doc.frame_bytes.get(pid, round(p.max_bg_frame / 8))
        out.append(f"port {port_name(pid)} w1={p.w1} w2={p.w2} max_bg_frame_bytes={nbytes}")
    for f in doc.flows:
        path = ",".join(port_name(p) for p in f.path)
        if f.cls is FlowClass.CONTROL:
            nbytes = doc.frame_bytes.get(f.name, round(f.source.frame_len / 8))
            out.append(f"flow {f.name} class=control src={f.src} dst={f.dst} frame_bytes={nbytes} "
                       f"period_s={_num(f.source.period)} deadline_s={_num(f.deadline)} path={path}")
        else:
            out.append(f"flow {f.name} class=background src={f.src} dst={f.dst} path={path}")
    s = doc.optimizer
    opt = [f"mode={s.mode.value}", f"departure={s.departure_mode.value}",
           f"w1_cap={s.w1_cap}", f"w2_max={max(s.w2_candidates)}"]
    if doc.optimize_flow:
        opt.insert(0, f"flow={doc.optimize_flow}")
    if s.w2_fixed is not None:
        opt.append("w2=" + ",".join(map(str, s.w2_fixed)))
    out.append("optimize " + " ".join(opt))
    sim = doc.simulation
    out.append(f"simulate duration_s={_num(sim.duration)} seeds={sim.seeds} gating={sim.gating} "
               f"queue_cap={sim.queue_cap}")
    return "\n".join(out) + "\n"
