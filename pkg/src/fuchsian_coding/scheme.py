"""Combinatorial schemes of even-cornered fundamental polygons.

A scheme lists the sides of the polygon counterclockwise.  Each side carries
its interior label and the inverse label; ``corners[i]`` is the corner at the
end of side ``i`` (between sides ``i`` and ``i+1``), either an interior vertex
class or ``null`` for an ideal end or a boundary arc.

Crossing a side whose interior label is ``e`` leads from ``h R`` to
``h e^{-1} R``; the crossed side carries the label ``e^{-1}`` inside the new
domain.  Co-orienting a side from outside to inside, its left end is the
start of the side in the counterclockwise order and its right end is the end.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

BOUNDARY = "BOUNDARY"

CATALOG = ("free-f2-ideal-quad", "genus2-octagon", "triangle-special-case")


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class Label:
    id: str
    inverse_id: str


@dataclass(frozen=True)
class VertexClass:
    id: str
    petals: object  # int, or BOUNDARY


@dataclass(frozen=True)
class Corner:
    """A corner of R: its position in the side cycle and its vertex class."""

    position: int
    vertex: VertexClass

    @property
    def petals(self):
        return self.vertex.petals


@dataclass(frozen=True)
class Side:
    label: Label
    compact: bool


@dataclass
class ValidationReport:
    scheme: str
    clauses: list = field(default_factory=list)
    vertex_table: list = field(default_factory=list)
    special_case: bool = False
    special_label: str = None

    @property
    def ok(self):
        return all(passed for _, passed, _ in self.clauses)

    def failed(self):
        return [name for name, passed, _ in self.clauses if not passed]

    def add(self, name, passed, detail=""):
        self.clauses.append((name, bool(passed), detail))

    def to_text(self):
        lines = [f"scheme {self.scheme}: {'pass' if self.ok else 'FAIL'}"]
        for name, passed, detail in self.clauses:
            mark = "pass" if passed else "FAIL"
            lines.append(f"  [{mark}] {name}" + (f" - {detail}" if detail else ""))
        for row in self.vertex_table:
            lines.append("  vertex {id}: petals={petals} corners={corners} cycle={cycle}".format(**row))
        if self.special_case:
            lines.append(f"  special case: compact self-paired label {self.special_label}")
        return "\n".join(lines)


class PolygonScheme:
    """Immutable combinatorial data of the polygon R plus the derived maps."""

    def __init__(self, name, sides, corners, vertex_classes):
        self.name = name
        self.sides = tuple(sides)
        self.corners = tuple(corners)
        self.vertex_classes = dict(vertex_classes)
        self.labels = tuple(s.label.id for s in self.sides)
        self._pos = {e: i for i, e in enumerate(self.labels)}
        self._inv = {s.label.id: s.label.inverse_id for s in self.sides}

    def __repr__(self):
        return f"PolygonScheme({self.name!r}, N={self.N})"

    @property
    def N(self):
        return len(self.sides)

    @property
    def compact(self):
        return all(s.compact for s in self.sides)

    def inv(self, e):
        return self._inv[e]

    def pos(self, e):
        return self._pos[e]

    def label_at(self, i):
        return self.labels[i % self.N]

    def corner(self, i):
        """Corner at the end of side ``i`` (None for an ideal end)."""
        return self.corners[i % self.N]

    def is_compact_side(self, e):
        return self.sides[self._pos[e]].compact

    def v_left(self, e):
        return self.corner(self._pos[e] - 1)

    def v_right(self, e):
        return self.corner(self._pos[e])

    def rot_l(self, e):
        # v_R(l(e)^{-1}) = v_L(e): the side before s_e shares its end with the start of s_e
        if self.v_left(e) is None:
            return None
        return self.inv(self.label_at(self._pos[e] - 1))

    def rot_r(self, e):
        if self.v_right(e) is None:
            return None
        return self.inv(self.label_at(self._pos[e] + 1))

    def adjacent(self, e1, e2):
        if e1 == e2:
            return True
        return self.adjacency_vertex(e1, e2) is not None

    def adjacency_vertex(self, e1, e2):
        """The corner shared by the sides with outgoing labels e1 and e2, if any."""
        f1, f2 = self.inv(e1), self.inv(e2)
        a, b = self.v_left(f1), self.v_right(f2)
        if a is not None and a == b:
            return a
        a, b = self.v_left(f2), self.v_right(f1)
        if a is not None and a == b:
            return a
        return None

    def n_pair(self, eL, eR):
        vr, vl = self.v_right(eL), self.v_left(eR)
        if vr is None or vl is None:
            raise SchemeError(f"n({eL},{eR}): vertex at a boundary end")
        if vr.vertex.id != vl.vertex.id:
            raise SchemeError(f"n({eL},{eR}): vertex classes differ")
        return vr.petals

    def petals_left(self, e):
        c = self.v_left(e)
        return None if c is None else c.petals

    def petals_right(self, e):
        c = self.v_right(e)
        return None if c is None else c.petals

    def flower_step(self, i):
        """Cross the side after corner ``i``; return (label, corner index in the new domain)."""
        x = self.label_at(i + 1)
        step = self.inv(x)
        return step, self._pos[step]

    def corner_cycle(self, i):
        """Corner indices met by the flower walk from corner ``i`` and the labels crossed.

        Returns (corners, word, closed); ``closed`` is False when the walk hits an
        ideal end before coming back.
        """
        corners, word = [i % self.N], []
        j = i % self.N
        while len(word) <= 2 * self.N:
            step, j = self.flower_step(j)
            word.append(step)
            if j == corners[0]:
                return corners, word, True
            if self.corners[j] is None:
                return corners, word, False
            corners.append(j)
        return corners, word, False

    def vertex_relator(self, i):
        """The label word of a full turn (2 n(v) petals) around corner ``i``."""
        cyc, word, _ = self.corner_cycle(i)
        n = self.corners[i % self.N].petals
        reps = (2 * n) // len(word)
        return tuple(word * reps)

    def special_label(self):
        """The compact self-paired label of the special triangle case, if any."""
        if self.N != 3:
            return None
        compact = [s for s in self.sides if s.compact]
        if len(compact) != 1:
            return None
        g = compact[0].label
        return g.id if g.id == g.inverse_id else None

    def to_dict(self):
        return {
            "name": self.name,
            "sides": [{"label": s.label.id, "inverse": s.label.inverse_id, "compact": s.compact}
                      for s in self.sides],
            "corners": [None if c is None else {"vertex": c.vertex.id} for c in self.corners],
            "vertex_classes": {k: {"petals": v.petals} for k, v in self.vertex_classes.items()},
        }


_TOP = {"name", "sides", "corners", "vertex_classes"}


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise SchemeError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise SchemeError(f"{where}: unknown field(s) {sorted(extra)}")


def parse_scheme(document):
    """Parse a scheme document (JSON text or an already decoded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemeError(f"malformed document: {exc}") from exc
    else:
        data = document
    _check_keys(data, _TOP, "scheme")
    missing = _TOP - set(data)
    if missing:
        raise SchemeError(f"scheme: missing field(s) {sorted(missing)}")
    name = data["name"]
    if not isinstance(name, str):
        raise SchemeError("name must be a string")

    raw_classes = data["vertex_classes"]
    if not isinstance(raw_classes, dict):
        raise SchemeError("vertex_classes must be an object")
    classes = {}
    for vid, body in raw_classes.items():
        _check_keys(body, {"petals"}, f"vertex class {vid}")
        petals = body.get("petals")
        if petals != BOUNDARY and not (isinstance(petals, int) and not isinstance(petals, bool)
                                       and petals >= 1):
            raise SchemeError(f"vertex class {vid}: petals must be a positive integer")
        classes[vid] = VertexClass(vid, petals)

    raw_sides = data["sides"]
    if not isinstance(raw_sides, list) or len(raw_sides) < 3:
        raise SchemeError("a polygon needs at least 3 sides")
    sides = []
    for k, body in enumerate(raw_sides):
        _check_keys(body, {"label", "inverse", "compact"}, f"side {k}")
        try:
            lab, inv, compact = body["label"], body["inverse"], body["compact"]
        except KeyError as exc:
            raise SchemeError(f"side {k}: missing field {exc}") from exc
        if not isinstance(lab, str) or not isinstance(inv, str) or not isinstance(compact, bool):
            raise SchemeError(f"side {k}: bad field types")
        sides.append(Side(Label(lab, inv), compact))
    ids = [s.label.id for s in sides]
    if len(set(ids)) != len(ids):
        raise SchemeError("duplicate side labels")
    by_id = {s.label.id: s for s in sides}
    for s in sides:
        other = by_id.get(s.label.inverse_id)
        if other is None:
            raise SchemeError(f"inverse of {s.label.id} refers to unknown label {s.label.inverse_id}")
        if other.label.inverse_id != s.label.id:
            raise SchemeError(f"pairing is not an involution at {s.label.id}")

    raw_corners = data["corners"]
    if not isinstance(raw_corners, list) or len(raw_corners) != len(sides):
        raise SchemeError("corners must be a list parallel to sides")
    corners = []
    for k, body in enumerate(raw_corners):
        if body is None:
            corners.append(None)
            continue
        _check_keys(body, {"vertex"}, f"corner {k}")
        vid = body.get("vertex")
        if vid not in classes:
            raise SchemeError(f"corner {k}: unknown vertex class {vid!r}")
        if classes[vid].petals == BOUNDARY:
            corners.append(None)
        else:
            corners.append(Corner(k, classes[vid]))
    return PolygonScheme(name, sides, corners, classes)


def load_catalog(name):
    if name not in CATALOG:
        raise SchemeError(f"unknown catalog scheme {name!r}")
    text = resources.files("fuchsian_coding").joinpath("catalog", f"{name}.json").read_text("utf-8")
    return parse_scheme(text)


def load_scheme(path_or_name):
    if path_or_name in CATALOG:
        return load_catalog(path_or_name)
    with open(path_or_name, encoding="utf-8") as fh:
        return parse_scheme(fh.read())


def validate_scheme(s):
    rep = ValidationReport(s.name)
    N = s.N
    rep.add("side count >= 3", N >= 3, f"N(R)={N}")

    # sides: compact iff both ends interior; paired sides agree
    bad = []
    for i, side in enumerate(s.sides):
        ends = (s.corner(i - 1), s.corner(i))
        if side.compact and None in ends:
            bad.append(f"{side.label.id} compact with an ideal end")
        if not side.compact and None not in ends:
            bad.append(f"{side.label.id} non-compact with two interior ends")
        if side.compact != s.is_compact_side(s.inv(side.label.id)):
            bad.append(f"{side.label.id} paired with a side of different type")
    rep.add("sides match their corners", not bad, "; ".join(bad))

    # even corners: flower walks close up consistently
    bad, seen = [], set()
    for i, c in enumerate(s.corners):
        if c is None or i in seen:
            continue
        cyc, word, closed = s.corner_cycle(i)
        seen.update(cyc)
        classes = {s.corners[j].vertex.id if s.corners[j] is not None else None for j in cyc}
        n = c.petals
        row = {"id": c.vertex.id, "petals": n, "corners": sorted(cyc), "cycle": "".join(word)}
        rep.vertex_table.append(row)
        if not closed:
            bad.append(f"corner {i}: flower walk reaches an ideal end")
        elif len(classes) != 1:
            bad.append(f"corner {i}: corners {sorted(cyc)} carry different vertex classes")
        elif n < 2:
            bad.append(f"corner {i}: n(v)={n} < 2")
        elif (2 * n) % len(word):
            bad.append(f"corner {i}: cycle length {len(word)} does not divide 2n(v)={2 * n}")
    rep.add("(i) even corners", not bad, "; ".join(bad))

    # condition (ii)
    if N >= 5:
        ok, why = True, "N(R)>=5"
    elif N == 4 and not s.compact:
        ok, why = True, "N(R)=4, non-compact"
    elif N == 4:
        opp = [(i, i + 2) for i in range(2)
               if s.corner(i).petals == 2 and s.corner(i + 2).petals == 2]
        ok = not opp
        why = "N(R)=4, compact" + ("" if ok else f", opposite corners {opp[0]} both have n=2")
    elif N == 3 and not s.compact:
        ok, why = True, "N(R)=3, non-compact"
    else:
        ok, why = False, f"N(R)={N}" + (", compact" if s.compact else "")
    rep.add("(ii) side count condition", ok, why)

    g = s.special_label()
    if g is not None:
        n = s.corner(s.pos(g)).petals
        rep.special_case = True
        rep.special_label = g
        rep.add("special case: n(v) >= 3 at the compact side", n >= 3, f"n={n}")
    return rep
