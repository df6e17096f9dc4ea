"""Line-delimited text serialization for fault polylines and salt boundaries.

Format::

    POLYLINE <id>
    [CLOSED]
    <row> <col>
    ...

Diffable in tests; the CLI renders the same files.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def save_polylines(path, polylines: list[np.ndarray],
                   closed_flags: list[bool] | None = None) -> None:
    closed_flags = closed_flags or [False] * len(polylines)
    with open(path, "w") as f:
        for i, (pl, closed) in enumerate(zip(polylines, closed_flags)):
            f.write(f"POLYLINE {i}\n")
            if closed:
                f.write("CLOSED\n")
            for r, c in np.asarray(pl):
                f.write(f"{r:.3f} {c:.3f}\n")


def load_polylines(path) -> tuple[list[np.ndarray], list[bool]]:
    polylines: list[np.ndarray] = []
    closed_flags: list[bool] = []
    points: list[list[float]] = []

    def flush():
        if points:
            polylines.append(np.asarray(points, dtype=np.float64))
            points.clear()

    with open(path) as f:
        started = False
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("POLYLINE"):
                if started:
                    flush()
                closed_flags.append(False)
                started = True
            elif line == "CLOSED":
                if not started:
                    raise DataError(f"{path}: CLOSED before POLYLINE")
                closed_flags[-1] = True
            else:
                parts = line.split()
                if len(parts) != 2 or not started:
                    raise DataError(f"{path}: malformed line {line!r}")
                points.append([float(parts[0]), float(parts[1])])
        flush()
    if len(polylines) != len(closed_flags):
        raise DataError(f"{path}: polyline without points")
    return polylines, closed_flags
