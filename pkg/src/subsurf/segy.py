"""Minimal SEG-Y rev-1 reader/writer.

Scope: big-endian files, sample formats 1 (IBM float) and 5 (IEEE float),
3200-byte textual header, 400-byte binary header, 240-byte trace headers.
Inline/crossline numbers default to trace-header bytes 189-192 / 193-196
(1-based), overridable for surveys using other conventions.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DataError, SegyFormatError
from .volume import SeismicVolume

TEXTUAL_HEADER_BYTES = 3200
BINARY_HEADER_BYTES = 400
TRACE_HEADER_BYTES = 240

FORMAT_IBM = 1
FORMAT_IEEE = 5

_F32_MAX = np.finfo(np.float32).max


def ibm32_to_float(bits: np.ndarray) -> np.ndarray:
    """Convert IBM System/360 hexadecimal floats (as uint32) to float64.

    value = (-1)^sign * (fraction / 2^24) * 16^(exponent - 64).
    Patterns whose magnitude overflows IEEE float32 raise DataError; IBM has
    no NaN/Inf encodings, so everything else converts exactly.
    """
    bits = np.asarray(bits, dtype=np.uint64)
    sign = np.where(bits >> 31, -1.0, 1.0)
    exponent = ((bits >> 24) & 0x7F).astype(np.int64) - 64
    fraction = (bits & 0xFFFFFF).astype(np.float64) / float(1 << 24)
    value = sign * fraction * np.power(16.0, exponent)
    if np.any(np.abs(value) > _F32_MAX):
        bad = int(np.flatnonzero(np.abs(value) > _F32_MAX)[0])
        raise DataError(f"IBM float overflows IEEE single at element {bad}")
    return value


def _decode_samples(raw: bytes, n: int, fmt: int) -> np.ndarray:
    if fmt == FORMAT_IEEE:
        return np.frombuffer(raw, dtype=">f4", count=n).astype(np.float32)
    if fmt == FORMAT_IBM:
        bits = np.frombuffer(raw, dtype=">u4", count=n)
        return ibm32_to_float(bits).astype(np.float32)
    raise SegyFormatError(f"unsupported sample format code {fmt}")


def load_segy(path, il_byte: int = 189, xl_byte: int = 193,
              domain_kind: str = "time") -> SeismicVolume:
    """Load a post-stack SEG-Y file into a SeismicVolume.

    ``il_byte``/``xl_byte`` are 1-based trace-header offsets of the 4-byte
    big-endian inline/crossline numbers.
    """
    with open(path, "rb") as f:
        data = f.read()

    header_len = TEXTUAL_HEADER_BYTES + BINARY_HEADER_BYTES
    if len(data) < header_len:
        raise SegyFormatError(f"{path}: truncated file headers")
    bin_hdr = data[TEXTUAL_HEADER_BYTES:header_len]

    sample_interval, = struct.unpack(">H", bin_hdr[16:18])
    n_samples, = struct.unpack(">H", bin_hdr[20:22])
    fmt, = struct.unpack(">H", bin_hdr[24:26])
    if fmt not in (FORMAT_IBM, FORMAT_IEEE):
        raise SegyFormatError(f"unsupported sample format code {fmt}")
    if n_samples < 1:
        raise SegyFormatError("binary header declares zero samples per trace")

    trace_bytes = TRACE_HEADER_BYTES + 4 * n_samples
    body = len(data) - header_len
    if body <= 0 or body % trace_bytes != 0:
        raise SegyFormatError(
            f"{path}: trace data length {body} is not a multiple of "
            f"trace size {trace_bytes}")
    n_traces = body // trace_bytes

    inlines = np.empty(n_traces, dtype=np.int64)
    crosslines = np.empty(n_traces, dtype=np.int64)
    samples = np.empty((n_traces, n_samples), dtype=np.float32)
    pos = header_len
    for i in range(n_traces):
        hdr = data[pos:pos + TRACE_HEADER_BYTES]
        ns_trace, = struct.unpack(">H", hdr[114:116])
        if ns_trace and ns_trace != n_samples:
            raise SegyFormatError(
                f"trace {i}: samples-per-trace {ns_trace} inconsistent with "
                f"binary header {n_samples}")
        inlines[i], = struct.unpack(">i", hdr[il_byte - 1:il_byte + 3])
        crosslines[i], = struct.unpack(">i", hdr[xl_byte - 1:xl_byte + 3])
        raw = data[pos + TRACE_HEADER_BYTES:pos + trace_bytes]
        samples[i] = _decode_samples(raw, n_samples, fmt)
        pos += trace_bytes

    il_vals = np.unique(inlines)
    xl_vals = np.unique(crosslines)
    if len(il_vals) * len(xl_vals) != n_traces:
        raise SegyFormatError(
            f"non-rectilinear inline/crossline grid: {n_traces} traces vs "
            f"{len(il_vals)} x {len(xl_vals)} grid")

    il_idx = {v: k for k, v in enumerate(il_vals)}
    xl_idx = {v: k for k, v in enumerate(xl_vals)}
    grid = np.full((len(il_vals), len(xl_vals), n_samples), np.nan,
                   dtype=np.float32)
    for i in range(n_traces):
        r, c = il_idx[inlines[i]], xl_idx[crosslines[i]]
        if not np.isnan(grid[r, c, 0]):
            raise SegyFormatError(
                f"duplicate trace at inline {inlines[i]}, "
                f"crossline {crosslines[i]} (trace index {i})")
        grid[r, c] = samples[i]
    if np.isnan(grid).any():
        missing = int(np.flatnonzero(np.isnan(grid[:, :, 0]))[0])
        raise SegyFormatError(f"non-rectilinear grid: missing trace at flat "
                              f"position {missing}")
    if not np.isfinite(grid).all():
        raise DataError(f"{path}: non-finite sample values after load")
    return SeismicVolume(grid, sample_interval=float(sample_interval),
                         domain_kind=domain_kind)


def write_segy(volume: SeismicVolume, path, il_byte: int = 189,
               xl_byte: int = 193) -> None:
    """Write a volume as big-endian SEG-Y rev-1 with IEEE samples.

    Round-trips bit-exactly through :func:`load_segy`.
    """
    ni, nx, ns = volume.shape
    if ns > 0xFFFF:
        raise SegyFormatError(
            f"samples-per-trace {ns} exceeds the 16-bit header field")
    interval = int(round(volume.sample_interval))
    interval = min(max(interval, 0), 0xFFFF)

    with open(path, "wb") as f:
        text = ("C 1 subsurf SEG-Y export" + " " * TEXTUAL_HEADER_BYTES)
        f.write(text[:TEXTUAL_HEADER_BYTES].encode("ascii"))
        bin_hdr = bytearray(BINARY_HEADER_BYTES)
        struct.pack_into(">H", bin_hdr, 16, interval)
        struct.pack_into(">H", bin_hdr, 20, ns)
        struct.pack_into(">H", bin_hdr, 24, FORMAT_IEEE)
        struct.pack_into(">H", bin_hdr, 300, 0x0100)  # rev 1
        struct.pack_into(">H", bin_hdr, 302, 1)       # fixed-length traces
        f.write(bin_hdr)
        for i in range(ni):
            for j in range(nx):
                hdr = bytearray(TRACE_HEADER_BYTES)
                struct.pack_into(">H", hdr, 114, ns)
                struct.pack_into(">H", hdr, 116, interval)
                struct.pack_into(">i", hdr, il_byte - 1, i + 1)
                struct.pack_into(">i", hdr, xl_byte - 1, j + 1)
                f.write(hdr)
                f.write(volume.amplitudes[i, j].astype(">f4").tobytes())
