"""CVRP instances: parsing, validation, and distance geometry.

Instances arrive either in the TSPLIB-95 CVRP dialect (EUC_2D only) or in a
small JSON format used by tests and tooling.  Whatever the source numbering,
the depot is normalized to id 0 and customers to 1..N.

Distances are unrounded Euclidean doubles.  The classic CMT best-known values
(524.61 and friends) are real-valued and unreachable under TSPLIB's
nearest-integer convention, so no rounding is applied anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed instance files or inconsistent instance data."""


@dataclass(frozen=True)
class Location:
    """A depot or customer site on the plane."""

    id: int
    x: float
    y: float
    demand: float


class Instance:
    """An immutable CVRP instance: depot, customers, and vehicle capacity.

    ``locations[0]`` is always the depot (demand 0); customers occupy ids
    1..N in order.  Construction validates the id layout and demand bounds.
    """

    def __init__(self, name: str, capacity: float, locations: list[Location]):
        if len(locations) < 2:
            raise InstanceError("instance needs a depot and at least 1 customer")
        if capacity <= 0:
            raise InstanceError(f"capacity must be positive, got {capacity}")
        for k, loc in enumerate(locations):
            if loc.id != k:
                raise InstanceError(f"location ids must be contiguous 0..N; index {k} has id {loc.id}")
            if loc.demand < 0:
                raise InstanceError(f"location {loc.id}: negative demand {loc.demand}")
        if locations[0].demand != 0:
            raise InstanceError(f"depot demand must be 0, got {locations[0].demand}")
        for loc in locations[1:]:
            if loc.demand > capacity:
                raise InstanceError(
                    f"customer {loc.id} demand {loc.demand} exceeds capacity {capacity}"
                )
        self.name = name
        self.capacity = float(capacity)
        self.locations = tuple(locations)
        # dense caches shared read-only by the search kernels
        self.demands = np.array([loc.demand for loc in locations], dtype=np.float64)
        self.coords = np.array([(loc.x, loc.y) for loc in locations], dtype=np.float64)
        self.demands.setflags(write=False)
        self.coords.setflags(write=False)

    @property
    def n_customers(self) -> int:
        return len(self.locations) - 1

    @property
    def customers(self) -> range:
        return range(1, len(self.locations))

    def __repr__(self) -> str:
        return f"Instance({self.name!r}, N={self.n_customers}, Q={self.capacity:g})"

    def to_json(self) -> str:
        """Serialize to the companion JSON format (round-trips exactly)."""
        depot = self.locations[0]
        doc = {
            "name": self.name,
            "capacity": self.capacity,
            "depot": {"x": depot.x, "y": depot.y},
            "customers": [
                {"id": c.id, "x": c.x, "y": c.y, "demand": c.demand}
                for c in self.locations[1:]
            ],
        }
        return json.dumps(doc, indent=2)


class DistanceMatrix:
    """Dense symmetric Euclidean distances over depot + customers."""

    def __init__(self, entries: np.ndarray):
        self.entries = entries
        self.n = entries.shape[0]

    def distance(self, i: int, j: int) -> float:
        return float(self.entries[i, j])

    def __getitem__(self, key):
        return self.entries[key]


def build_distance_matrix(instance: Instance) -> DistanceMatrix:
    """Compute all pairwise unrounded Euclidean distances."""
    xy = instance.coords
    diff = xy[:, None, :] - xy[None, :, :]
    entries = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(entries, 0.0)
    entries.setflags(write=False)
    return DistanceMatrix(entries)


# --- TSPLIB-95 CVRP dialect ------------------------------------------------

_EOF_KEYS = ("EOF",)


def parse_instance(text: str) -> Instance:
    """Parse TSPLIB-95 CVRP text into an Instance.

    Supports the subset the CMT files use: NAME / TYPE / DIMENSION /
    EDGE_WEIGHT_TYPE (EUC_2D) / CAPACITY headers plus NODE_COORD_SECTION,
    DEMAND_SECTION and DEPOT_SECTION.  Errors name the offending line or
    field.
    """
    lines = text.splitlines()
    headers: dict[str, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    demands: dict[int, float] = {}
    depot_ids: list[int] = []
    section = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line in _EOF_KEYS:
            break
        upper = line.upper()
        if upper.endswith("_SECTION") or upper == "DEPOT_SECTION":
            section = upper
            continue
        if ":" in line and section is None:
            key, _, value = line.partition(":")
            headers[key.strip().upper()] = value.strip()
            continue
        if section == "NODE_COORD_SECTION":
            parts = line.split()
            if len(parts) != 3:
                raise InstanceError(f"line {lineno}: expected 'id x y', got {line!r}")
            nid = _parse_int(parts[0], lineno)
            if nid in coords:
                raise InstanceError(f"line {lineno}: duplicate node id {nid}")
            coords[nid] = (_parse_float(parts[1], lineno), _parse_float(parts[2], lineno))
        elif section == "DEMAND_SECTION":
            parts = line.split()
            if len(parts) != 2:
                raise InstanceError(f"line {lineno}: expected 'id demand', got {line!r}")
            nid = _parse_int(parts[0], lineno)
            if nid in demands:
                raise InstanceError(f"line {lineno}: duplicate demand for node {nid}")
            demands[nid] = _parse_float(parts[1], lineno)
        elif section == "DEPOT_SECTION":
            val = _parse_int(line.split()[0], lineno)
            if val == -1:
                section = None
            else:
                depot_ids.append(val)
        else:
            raise InstanceError(f"line {lineno}: unexpected content {line!r}")

    for field in ("DIMENSION", "CAPACITY"):
        if field not in headers:
            raise InstanceError(f"missing required field {field}")
    ewt = headers.get("EDGE_WEIGHT_TYPE", "EUC_2D")
    if ewt != "EUC_2D":
        raise InstanceError(f"unsupported EDGE_WEIGHT_TYPE {ewt!r} (only EUC_2D)")
    dimension = _parse_int(headers["DIMENSION"], 0)
    capacity = _parse_float(headers["CAPACITY"], 0)
    if not coords:
        raise InstanceError("missing required field NODE_COORD_SECTION")
    if not demands:
        raise InstanceError("missing required field DEMAND_SECTION")
    if len(coords) != dimension:
        raise InstanceError(
            f"DIMENSION is {dimension} but NODE_COORD_SECTION has {len(coords)} nodes"
        )
    for nid in coords:
        if nid not in demands:
            raise InstanceError(f"DEMAND_SECTION omits node {nid}")
    for nid in demands:
        if nid not in coords:
            raise InstanceError(f"DEMAND_SECTION names unknown node {nid}")
    if not depot_ids:
        raise InstanceError("missing required field DEPOT_SECTION")
    depot = depot_ids[0]
    if demands[depot] != 0:
        raise InstanceError(f"depot node {depot} has nonzero demand {demands[depot]:g}")

    # normalize: depot -> 0, customers -> 1..N in ascending file id order
    customer_ids = sorted(nid for nid in coords if nid != depot)
    locations = [Location(0, coords[depot][0], coords[depot][1], 0.0)]
    for new_id, nid in enumerate(customer_ids, start=1):
        x, y = coords[nid]
        locations.append(Location(new_id, x, y, demands[nid]))
    name = headers.get("NAME", "unnamed")
    return Instance(name, capacity, locations)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceError(f"line {lineno}: expected integer, got {token!r}") from None


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InstanceError(f"line {lineno}: expected number, got {token!r}") from None
    if not math.isfinite(value):
        raise InstanceError(f"line {lineno}: non-finite value {token!r}")
    return value


def _fmt_number(value: float) -> str:
    """Shortest exact decimal form: integral floats print without '.0'."""
    v = float(value)
    return str(int(v)) if v.is_integer() else repr(v)


def serialize_instance(instance: Instance) -> str:
    """Render an Instance back to TSPLIB-95 text (EUC_2D, depot first)."""
    out = [
        f"NAME : {instance.name}",
        "TYPE : CVRP",
        f"DIMENSION : {len(instance.locations)}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {_fmt_number(instance.capacity)}",
        "NODE_COORD_SECTION",
    ]
    for loc in instance.locations:
        out.append(f" {loc.id + 1} {_fmt_number(loc.x)} {_fmt_number(loc.y)}")
    out.append("DEMAND_SECTION")
    for loc in instance.locations:
        out.append(f" {loc.id + 1} {_fmt_number(loc.demand)}")
    out.extend(["DEPOT_SECTION", " 1", " -1", "EOF", ""])
    return "\n".join(out)


def parse_instance_json(text: str) -> Instance:
    """Parse the companion JSON instance format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    for field in ("capacity", "depot", "customers"):
        if field not in doc:
            raise InstanceError(f"missing required field {field!r}")
    depot = doc["depot"]
    locations = [Location(0, float(depot["x"]), float(depot["y"]), 0.0)]
    customers = sorted(doc["customers"], key=lambda c: c["id"])
    for new_id, cust in enumerate(customers, start=1):
        if cust["id"] != new_id:
            raise InstanceError(f"customer ids must be contiguous 1..N; got {cust['id']}")
        locations.append(
            Location(new_id, float(cust["x"]), float(cust["y"]), float(cust["demand"]))
        )
    return Instance(doc.get("name", "unnamed"), float(doc["capacity"]), locations)


def load_instance(path: str) -> Instance:
    """Load an instance file, dispatching on extension (.json vs TSPLIB)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        return parse_instance_json(text)
    return parse_instance(text)
