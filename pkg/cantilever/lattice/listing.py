"""Plain-text point/spring listing of a lattice.

Layout::

    # points <N>
    <id> <x> <z> <mass> <kind> <row>
    ...
    # springs <S>
    <a> <b> <rest_length> <stiffness>
    ...
    # attachment <id> <id> ...
"""

from __future__ import annotations

from cantilever.exceptions import LatticeError
from cantilever.lattice.types import Lattice, MaterialPoint, PointKind, Spring


def dump_listing(lattice: Lattice) -> str:
    lines = [f"# points {lattice.n_points}"]
    for p in lattice.points:
        x, z = p.rest_position
        lines.append(f"{p.id} {x!r} {z!r} {p.mass!r} {p.kind.value} {p.row}")
    lines.append(f"# springs {len(lattice.springs)}")
    for s in lattice.springs:
        lines.append(f"{s.endpoint_a} {s.endpoint_b} {s.rest_length!r} {s.stiffness!r}")
    lines.append("# attachment " + " ".join(str(i) for i in lattice.attachment_ids))
    return "\n".join(lines) + "\n"


def load_listing(text: str) -> Lattice:
    """Reads a listing written by dump_listing. The config is not restored.

    Raises:
        LatticeError: raised on a malformed listing.
    """
    points: list[MaterialPoint] = []
    springs: list[Spring] = []
    attachment: tuple[int, ...] = ()
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        try:
            if fields[0] == "#":
                section = fields[1]
                if section == "attachment":
                    attachment = tuple(int(f) for f in fields[2:])
                continue
            match section:
                case "points":
                    pid, x, z, mass, kind, row = fields
                    points.append(MaterialPoint(int(pid), (float(x), float(z)), float(mass), PointKind(kind), int(row)))
                case "springs":
                    a, b, rest, k = fields
                    springs.append(Spring(int(a), int(b), float(rest), float(k)))
                case _:
                    raise ValueError("record outside a section")
        except ValueError as err:
            raise LatticeError(f"listing line {number}: {err}") from err
    return Lattice(points=tuple(points), springs=tuple(springs), attachment_ids=attachment)
