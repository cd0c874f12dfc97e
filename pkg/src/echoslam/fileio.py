"""File formats: room JSON, echo CSV, raw waveform container, WAV export.

Echo CSV: one row per echo with columns ``point_id,distance_m,label``
(label optional, wall indices joined by dashes for higher orders).
Waveform container: 16-byte header ``{magic "ESLM", u32 sample_rate,
u32 n_samples, 4 reserved bytes}`` followed by little-endian float32 PCM.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .acoustic import Waveform
from .forward import EchoSet
from .geometry import ConvexRoom, Wall, room_from_vertices, room_from_walls

ESLM_MAGIC = b"ESLM"
_HEADER = struct.Struct("<4sII4x")


def room_to_dict(room: ConvexRoom) -> dict:
    return {
        "walls": [
            {"normal_angle_deg": math.degrees(w.normal_angle), "offset_m": w.offset}
            for w in room.walls
        ]
    }


def room_from_dict(spec: dict) -> ConvexRoom:
    """Room from ``{"walls": [{normal_angle_deg, offset_m}, ...]}`` or ``{"vertices": [[x, y], ...]}``."""
    has_walls = bool(spec.get("walls"))
    has_vertices = bool(spec.get("vertices"))
    if has_walls == has_vertices:
        raise ValueError("room spec needs exactly one of 'walls' or 'vertices'")
    if has_walls:
        walls = [
            Wall(math.radians(w["normal_angle_deg"]), float(w["offset_m"]))
            for w in spec["walls"]
        ]
        return room_from_walls(walls)
    return room_from_vertices(spec["vertices"])


def save_room_json(path, room: ConvexRoom) -> None:
    Path(path).write_text(json.dumps(room_to_dict(room), indent=2))


def load_room_json(path) -> ConvexRoom:
    return room_from_dict(json.loads(Path(path).read_text()))


def _label_str(label) -> str:
    return "-".join(str(i) for i in label)


def _parse_label(s: str):
    return tuple(int(x) for x in s.split("-"))


def write_echo_csv(path, point_id: str, echoes: EchoSet) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["point_id", "distance_m", "label"])
        for i, d in enumerate(echoes.distances):
            label = "" if echoes.labels is None else _label_str(echoes.labels[i])
            writer.writerow([point_id, f"{d:.12g}", label])


def read_echo_csv(path) -> tuple[str, EchoSet]:
    """Read one point's echo CSV; returns (point_id, echo set)."""
    distances: list[float] = []
    labels: list[tuple[int, ...]] = []
    point_id = ""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "distance_m" not in reader.fieldnames:
            raise ValueError(f"{path}: missing distance_m column")
        for row in reader:
            point_id = row.get("point_id", "") or point_id
            distances.append(float(row["distance_m"]))
            label = (row.get("label") or "").strip()
            if label:
                labels.append(_parse_label(label))
    if distances and len(labels) == len(distances):
        return point_id, EchoSet(np.array(distances), tuple(labels))
    return point_id, EchoSet(np.array(distances), None)


def write_waveform(path, w: Waveform) -> None:
    data = np.asarray(w.samples, dtype="<f4")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(ESLM_MAGIC, int(round(w.sample_rate)), data.size))
        f.write(data.tobytes())


def read_waveform(path) -> Waveform:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated waveform file")
    magic, rate, n = _HEADER.unpack_from(raw)
    if magic != ESLM_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    samples = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=n)
    if samples.size != n:
        raise ValueError(f"{path}: expected {n} samples, found {samples.size}")
    return Waveform(samples.astype(float), float(rate))


def export_wav(path, w: Waveform) -> None:
    """Standard WAV container (float32), for listening or external tooling."""
    wavfile.write(path, int(round(w.sample_rate)), np.asarray(w.samples, dtype=np.float32))


def is_waveform_file(path) -> bool:
    try:
        with open(path, "rb") as f:
            return f.read(4) == ESLM_MAGIC
    except OSError:
        return False
