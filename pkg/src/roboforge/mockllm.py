"""Deterministic stand-in for the chat-completion endpoint.

Routes each request on markers in the system prompt and synthesizes a
response as a pure function of the request text, so offline runs are
byte-reproducible. Task instructions come from a parameterized template
bank whose regexes can re-extract the parameters later, which is how the
scripted code generator grounds the instructions it produced itself.
"""

from __future__ import annotations

import hashlib
import random
import re

WORLD_BEARING = {"north": 0, "east": 90, "south": 180, "west": -90}
WORD_TO_WORLD = {"forward": "north", "right": "east", "backward": "south", "left": "west"}
_IF = re.IGNORECASE

_SCENARIO_LEADS = (
    "Perform a structural inspection around a warehouse.",
    "Carry out a routine survey over an equipment yard.",
    "You are checking a communication tower for storm damage.",
    "Run a perimeter check along a construction site fence.",
    "Inspect the loading dock area before the morning shift.",
    "Document the condition of a rooftop solar array.",
    "Survey a storage lot for misplaced containers.",
    "Examine a bridge underside for visible cracks.",
    "Check the ventilation stacks behind a factory hall.",
    "Patrol the orchard rows to look for broken branches.",
    "Verify the crane boom clearance at a dockyard.",
    "Scan the silo exterior for corrosion marks.",
)


def _rng(*parts: str) -> random.Random:
    digest = hashlib.sha256("\x1e".join(parts).encode("utf-8")).hexdigest()
    return random.Random(int(digest[:16], 16))


# --------------------------------------------------------------------------
# Action IR and code emission
# --------------------------------------------------------------------------

def _emit_vertical(direction: str, d, out: list[str], indent: str = ""):
    sign = "-" if direction == "up" else "+"
    out.append(f"{indent}p = aw.get_drone_position()")
    out.append(f"{indent}aw.fly_to([p[0], p[1], p[2] {sign} {d}])")


def _emit_world(direction: str, d, out: list[str], indent: str = ""):
    axis = {"north": (0, "+"), "south": (0, "-"), "east": (1, "+"), "west": (1, "-")}
    idx, sign = axis[direction]
    coords = ["p[0]", "p[1]", "p[2]"]
    coords[idx] = f"p[{idx}] {sign} {d}"
    out.append(f"{indent}p = aw.get_drone_position()")
    out.append(f"{indent}aw.fly_to([{coords[0]}, {coords[1]}, {coords[2]}])")


def _emit_body(direction: str, d, out: list[str], indent: str = ""):
    terms = {
        "forward": (f"+ {d} * cos(radians(yaw))", f"+ {d} * sin(radians(yaw))"),
        "backward": (f"- {d} * cos(radians(yaw))", f"- {d} * sin(radians(yaw))"),
        "right": (f"- {d} * sin(radians(yaw))", f"+ {d} * cos(radians(yaw))"),
        "left": (f"+ {d} * sin(radians(yaw))", f"- {d} * cos(radians(yaw))"),
    }
    tn, te = terms[direction]
    out.append(f"{indent}yaw = aw.get_yaw()")
    out.append(f"{indent}p = aw.get_drone_position()")
    out.append(f"{indent}aw.fly_to([p[0] {tn}, p[1] {te}, p[2]])")


def _emit_yz(vert: str, side: str, angle, d, out: list[str], indent: str = ""):
    side_sign = "-" if side == "right" else "+"   # applied to the sin(yaw) term
    east_sign = "+" if side == "right" else "-"
    down_sign = "-" if vert == "top" else "+"
    out.append(f"{indent}yaw = aw.get_yaw()")
    out.append(f"{indent}p = aw.get_drone_position()")
    out.append(
        f"{indent}aw.fly_to([p[0] {side_sign} {d} * cos(radians({angle})) * sin(radians(yaw)), "
        f"p[1] {east_sign} {d} * cos(radians({angle})) * cos(radians(yaw)), "
        f"p[2] {down_sign} {d} * sin(radians({angle}))])"
    )


def _emit_rotate(delta: int, out: list[str], indent: str = ""):
    op = "+" if delta >= 0 else "-"
    out.append(f"{indent}aw.set_yaw(aw.get_yaw() {op} {abs(delta)})")


def _emit_face(direction: str, out: list[str], indent: str = ""):
    out.append(f"{indent}aw.set_yaw({WORLD_BEARING[direction]})")


def emit_actions(actions, out: list[str], indent: str = "", comments: bool = False):
    for action in actions:
        kind = action[0]
        if comments:
            detail = " ".join(str(a) for a in action[1:] if not isinstance(a, (list, tuple)))
            out.append(f"{indent}# {kind} {detail}".rstrip())
        if kind == "takeoff":
            out.append(f"{indent}aw.takeoff()")
        elif kind == "land":
            out.append(f"{indent}aw.land()")
        elif kind in ("up", "down"):
            _emit_vertical(kind, action[1], out, indent)
        elif kind == "world":
            _emit_world(action[1], action[2], out, indent)
        elif kind == "body":
            _emit_body(action[1], action[2], out, indent)
        elif kind == "rotate":
            _emit_rotate(action[1], out, indent)
        elif kind == "face":
            _emit_face(action[1], out, indent)
        elif kind == "yz":
            _emit_yz(action[1], action[2], action[3], action[4], out, indent)
        elif kind == "loop":
            out.append(f"{indent}for i in range({action[1]}):")
            emit_actions(action[2], out, indent + "    ", comments=False)
        else:
            raise ValueError(f"unknown action {action!r}")


def actions_to_code(actions, comments: bool = False) -> str:
    lines: list[str] = []
    if comments:
        lines.append("# drone operation plan")
    emit_actions(actions, lines, comments=comments)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Instruction templates: render(params) and a regex that recovers params
# --------------------------------------------------------------------------

def _square_sides(words, size):
    return [("world", WORD_TO_WORLD.get(w, w), size) for w in words]


def _oriented_sides(words, size, offset: int):
    actions = []
    for w in words:
        bearing = WORLD_BEARING[WORD_TO_WORLD.get(w, w)]
        facing = (bearing + offset) % 360
        if facing > 180:
            facing -= 360
        direction = {0: "north", 90: "east", 180: "south", -90: "west"}[facing]
        actions.append(("face", direction))
        actions.append(("world", WORD_TO_WORLD.get(w, w), size))
    return actions


class Template:
    def __init__(self, name, pattern, render, compile_, complexity):
        self.name = name
        self.regex = re.compile(pattern, _IF)
        self.render = render
        self.compile = compile_
        self.complexity = complexity


_VERT = ("up", "down")
_COMPASS = ("north", "south", "east", "west")
_BODY = ("forward", "backward", "left", "right")
_WORLD_DIRS = _VERT + _COMPASS
_SQUARE_ORDERS = (
    ("forward", "right", "backward", "left"),
    ("right", "backward", "left", "forward"),
    ("forward", "left", "backward", "right"),
    ("left", "forward", "right", "backward"),
    ("north", "east", "south", "west"),
    ("east", "south", "west", "north"),
    ("north", "west", "south", "east"),
    ("west", "north", "east", "south"),
)

_SQ_HEAD = (
    r"take off and fly up (\d+) meters\. "
    r"(?:you should )?fly in a square pattern with (\d+)-meter sides by moving "
    r"(\w+), (\w+), (\w+),? and (\w+) in the world axis\."
)


def _t_two_moves():
    def render(rng):
        d1, d2 = rng.randint(3, 9), rng.randint(3, 9)
        pool = _VERT if rng.random() < 0.5 else _COMPASS
        a, b = rng.choice(pool), rng.choice(pool)
        return f"Fly {d1} meters {a}, then fly {d2} meters {b} in the world frame."

    def compile_(m):
        def one(d, w):
            w = w.lower()
            return ("up", int(d)) if w == "up" else ("down", int(d)) if w == "down" \
                else ("world", w, int(d))
        return [("takeoff",), one(m.group(1), m.group(2)), one(m.group(3), m.group(4))]

    dirs = "|".join(_WORLD_DIRS)
    return Template(
        "two_moves",
        rf"fly (\d+) meters ({dirs}), then fly (\d+) meters ({dirs}) in the world frame\.",
        render, compile_, "simple",
    )


def _t_rotate_body():
    def render(rng):
        angle = rng.choice((30, 60, 90, 120, 150, 180))
        sense = rng.choice(("clockwise", "counterclockwise"))
        d = rng.randint(3, 9)
        b = rng.choice(_BODY)
        return (f"Rotate {angle} degrees {sense}, then fly {d} meters {b} "
                f"in the drone's body frame.")

    def compile_(m):
        delta = int(m.group(1)) * (1 if m.group(2).lower() == "clockwise" else -1)
        return [("takeoff",), ("rotate", delta), ("body", m.group(4).lower(), int(m.group(3)))]

    return Template(
        "rotate_body",
        rf"rotate (\d+) degrees (clockwise|counterclockwise), then fly (\d+) meters "
        rf"({'|'.join(_BODY)}) in the drone's body frame\.",
        render, compile_, "simple",
    )


def _t_face_body():
    def render(rng):
        c = rng.choice(_COMPASS)
        d = rng.randint(3, 9)
        b = rng.choice(_BODY)
        return (f"Turn to face the local {c}, then fly {d} meters {b} "
                f"in the drone's body frame.")

    def compile_(m):
        return [("takeoff",), ("face", m.group(1).lower()),
                ("body", m.group(3).lower(), int(m.group(2)))]

    return Template(
        "face_body",
        rf"turn to face the local ({'|'.join(_COMPASS)}), then fly (\d+) meters "
        rf"({'|'.join(_BODY)}) in the drone's body frame\.",
        render, compile_, "simple",
    )


def _t_yz_plane():
    def render(rng):
        vert = rng.choice(("top", "bottom"))
        side = rng.choice(("left", "right"))
        angle = rng.choice((30, 60))
        d = rng.randint(3, 9)
        return (f"Fly the drone in the {vert}-{side} direction at an angle of {angle} "
                f"degrees from the horizontal axis, in the YZ plane of the drone's "
                f"body frame for a distance of {d} meters.")

    def compile_(m):
        return [("takeoff",),
                ("yz", m.group(1).lower(), m.group(2).lower(), int(m.group(3)), int(m.group(4)))]

    return Template(
        "yz_plane",
        r"in the (top|bottom)-(left|right) direction at an angle of (\d+) degrees "
        r"from the horizontal axis, in the YZ plane of the drone's body frame "
        r"for a distance of (\d+) meters\.",
        render, compile_, "simple",
    )


def _t_square_plain():
    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        words = rng.choice(_SQUARE_ORDERS)
        return (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving {words[0]}, {words[1]}, {words[2]}, "
                f"and {words[3]} in the world axis.")

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        words = [m.group(i).lower() for i in (3, 4, 5, 6)]
        return [("takeoff",), ("up", h), *_square_sides(words, s)]

    return Template("square_plain", _SQ_HEAD + r"$", render, compile_, "complex")


def _t_square_oriented():
    clauses = {
        "in": "Make sure the drone is oriented in the flying direction.",
        "opposite": "Make sure the drone is oriented opposite to the flying direction.",
        "perpendicular": ("To examine the square area, the drone should orientate "
                          "perpendicular to the moving direction on each side of the square."),
    }
    offsets = {"in": 0, "opposite": 180, "perpendicular": 90}

    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        words = rng.choice(_SQUARE_ORDERS)
        mode = rng.choice(tuple(clauses))
        head = (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving {words[0]}, {words[1]}, {words[2]}, "
                f"and {words[3]} in the world axis.")
        return f"{head} {clauses[mode]}"

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        words = [m.group(i).lower() for i in (3, 4, 5, 6)]
        mode = "perpendicular" if m.group(7) else \
            ("opposite" if m.group(8) and "opposite" in m.group(8).lower() else "in")
        return [("takeoff",), ("up", h), *_oriented_sides(words, s, offsets[mode])]

    return Template(
        "square_oriented",
        _SQ_HEAD + r" (?:(to examine the square area, the drone should orientate "
        r"perpendicular[^.]*\.)|make sure the drone is oriented "
        r"((?:in|opposite to)) the flying direction\.)$",
        render, compile_, "complex",
    )


def _t_square_twice():
    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        words = rng.choice(_SQUARE_ORDERS)
        return (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving {words[0]}, {words[1]}, {words[2]}, "
                f"and {words[3]} in the world axis. Then fly the same square pattern again.")

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        words = [m.group(i).lower() for i in (3, 4, 5, 6)]
        return [("takeoff",), ("up", h), ("loop", 2, _square_sides(words, s))]

    return Template(
        "square_twice",
        _SQ_HEAD + r" then fly the same square pattern again\.$",
        render, compile_, "complex",
    )


def _t_square_reverse():
    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        h2 = rng.randint(3, 9)
        words = rng.choice(_SQUARE_ORDERS)
        return (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving {words[0]}, {words[1]}, {words[2]}, "
                f"and {words[3]} in the world axis. Next, ascend another {h2} meters "
                f"and fly the square pattern in reverse order.")

    def compile_(m):
        h, s, h2 = int(m.group(1)), int(m.group(2)), int(m.group(7))
        words = [m.group(i).lower() for i in (3, 4, 5, 6)]
        return [("takeoff",), ("up", h), *_square_sides(words, s),
                ("up", h2), *_square_sides(list(reversed(words)), s)]

    return Template(
        "square_reverse",
        _SQ_HEAD + r" next, ascend another (\d+) meters and fly the square pattern "
        r"in reverse order\.$",
        render, compile_, "complex",
    )


def _t_square_mirror():
    _MIRROR = {"north": "north", "south": "south", "east": "west", "west": "east"}

    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        words = rng.choice(_SQUARE_ORDERS)
        return (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving {words[0]}, {words[1]}, {words[2]}, "
                f"and {words[3]} in the world axis. Next, fly a second square that is "
                f"symmetric with respect to the X-axis in the XY plane.")

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        words = [m.group(i).lower() for i in (3, 4, 5, 6)]
        first = _square_sides(words, s)
        second = [("world", _MIRROR[d], dist) for _, d, dist in first]
        return [("takeoff",), ("up", h), *first, *second]

    return Template(
        "square_mirror",
        _SQ_HEAD + r" next, fly a second square that is symmetric with respect to "
        r"the x-axis in the xy plane\.$",
        render, compile_, "complex",
    )


def _t_square_body_loop():
    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        return (f"Take off and fly up {h} meters. You should fly in a square pattern "
                f"with {s}-meter sides by moving forward in the drone's body frame "
                f"and turning right at each corner.")

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        return [("takeoff",), ("up", h),
                ("loop", 4, [("body", "forward", s), ("rotate", 90)])]

    return Template(
        "square_body_loop",
        r"take off and fly up (\d+) meters\. (?:you should )?fly in a square pattern "
        r"with (\d+)-meter sides by moving forward in the drone's body frame "
        r"and turning right at each corner\.$",
        render, compile_, "complex",
    )


def _t_figure_eight():
    def render(rng):
        h, s = rng.randint(3, 9), rng.randint(3, 9)
        start = rng.choice(_COMPASS)
        return (f"Take off and fly up {h} meters. Fly a figure of 8 on a flat, "
                f"horizontal plane with each side of {s} meters. The left square is "
                f"on your left-rear side, and the right square is on your right-front "
                f"side. You should begin with the left square by flying left. The "
                f"right square should start from moving {start}.")

    def compile_(m):
        h, s = int(m.group(1)), int(m.group(2))
        start = m.group(3).lower()
        ring = ["north", "east", "south", "west"]
        i = ring.index(start)
        right_square = [("world", ring[(i + k) % 4], s) for k in range(4)]
        left_square = [("body", d, s) for d in ("left", "backward", "right", "forward")]
        return [("takeoff",), ("up", h), *left_square, *right_square]

    return Template(
        "figure_eight",
        r"take off and fly up (\d+) meters\. fly a figure of 8 on a flat, horizontal "
        r"plane with each side of (\d+) meters\..* begin with the left square by "
        r"flying left\. the right square should start from moving "
        rf"({'|'.join(_COMPASS)})\.$",
        render, compile_, "complex",
    )


# Compile order: most specific first so square variants win over plain moves.
TEMPLATES: list[Template] = [
    _t_square_oriented(),
    _t_square_twice(),
    _t_square_reverse(),
    _t_square_mirror(),
    _t_square_body_loop(),
    _t_figure_eight(),
    _t_square_plain(),
    _t_yz_plane(),
    _t_rotate_body(),
    _t_face_body(),
    _t_two_moves(),
]

_PATTERN_BANKS = {
    "plain": [t for t in TEMPLATES if t.name in ("two_moves", "rotate_body", "face_body")],
    "yz_plane": [t for t in TEMPLATES if t.name == "yz_plane"],
    "square": [t for t in TEMPLATES if t.complexity == "complex"],
}


def compile_instruction(text: str):
    """Map an instruction (possibly embedded in prose) to its action list."""
    for template in TEMPLATES:
        m = template.regex.search(text)
        if m:
            return template.compile(m)
    return None


def generate_instructions(pattern: str, n: int, key: str) -> list[str]:
    """Render ``n`` distinct instructions for a pattern bank, seeded by ``key``."""
    bank = _PATTERN_BANKS.get(pattern)
    if bank is None:
        raise ValueError(f"unknown instruction pattern {pattern!r}")
    rng = _rng("instructions", pattern, key)
    seen: set[str] = set()
    out: list[str] = []
    attempts = 0
    while len(out) < n and attempts < n * 200:
        attempts += 1
        text = rng.choice(bank).render(rng)
        if text not in seen:
            seen.add(text)
            out.append(text)
    if len(out) < n:
        raise RuntimeError(f"template bank too small for {n} '{pattern}' tasks")
    return out


def augment_instruction(instruction: str, key: str) -> str:
    rng = _rng("augment", instruction, key)
    lead = rng.choice(_SCENARIO_LEADS)
    body = instruction[0].lower() + instruction[1:] if instruction else instruction
    return f"{lead} To carry out this operation, {body}"


# --------------------------------------------------------------------------
# Request routing
# --------------------------------------------------------------------------

_COUNT_RE = re.compile(r"produce (\d+) task instructions for pattern \"([\w-]+)\"", _IF)
_TASK_RE = re.compile(r"^task:\s*(.+?)\s*$", re.MULTILINE | re.IGNORECASE)


def respond(messages: list[dict]) -> str:
    """Produce a deterministic completion for a chat request."""
    system = next((m["content"] for m in messages if m.get("role") == "system"), "")
    users = [m["content"] for m in messages if m.get("role") == "user"]
    last_user = users[-1] if users else ""

    if "generate drone control tasks" in system.lower():
        m = _COUNT_RE.search(last_user)
        if not m:
            return ""
        n, pattern = int(m.group(1)), m.group(2)
        lines = generate_instructions(pattern, n, key="\n".join(users))
        return "\n".join(f"{i + 1}. {text}" for i, text in enumerate(lines))

    if "convert the given task instruction into drone control code" in system.lower():
        m = _TASK_RE.search(users[0] if users else "")
        instruction = m.group(1).splitlines()[0] if m else last_user.strip()
        actions = compile_instruction(instruction)
        if actions is None:
            return "I am unable to produce code for this task."
        code = actions_to_code(actions, comments=True)
        return "Here is the drone control code:\n```python\n" + code + "```\n"

    if "compare the intentions" in system.lower():
        return "The code fully matches the ground truth behavior. 1"

    if "real-world drone operation task" in system.lower():
        m = _TASK_RE.search(last_user)
        instruction = m.group(1).splitlines()[0] if m else last_user.strip()
        return augment_instruction(instruction, key=last_user)

    return ""
