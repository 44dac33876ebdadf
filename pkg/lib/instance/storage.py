"""Binary instance files.

Layout (little-endian):

    magic      6 bytes   b"MFAMP1"
    header     struct HEADER (version, sizes, params, seed, offsets)
    payload    raw float64 sections F0 | X0 | Y | Fprime
    trailer    CRC-32 of the payload, unsigned 32-bit

Section offsets in the header are relative to the start of the payload.
Fprime has zero length when eta is INFINITE.
"""

import logging
import math
import struct
import zlib
from pathlib import Path

import numpy as np

from lib.errors import (
    InstanceChecksumError,
    InstanceFormatError,
    InstanceTruncatedError,
    InstanceVersionError,
    InvalidArgumentError,
)
from lib.instance.generator import ProblemInstance, problem_sizes
from lib.params import INFINITE, ModelParams, is_infinite

logger = logging.getLogger(__name__)

MAGIC = b"MFAMP1"
FORMAT_VERSION = 1

# version | N M P | alpha pi rho delta eta | eta_infinite | seed | has_fprime | 4 offsets | payload length
HEADER = struct.Struct("<H3Q5dBQB4QQ")
VERSION = struct.Struct("<H")
TRAILER = struct.Struct("<I")

_DTYPE = np.dtype("<f8")


def _section(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype=_DTYPE).tobytes()


def dump_instance(inst: ProblemInstance) -> bytes:
    """Serialize an instance to bytes."""
    sections = [_section(inst.F0), _section(inst.X0), _section(inst.Y)]
    sections.append(_section(inst.Fprime) if inst.Fprime is not None else b"")

    offsets = []
    position = 0
    for data in sections:
        offsets.append(position)
        position += len(data)
    payload = b"".join(sections)

    p = inst.params
    infinite = is_infinite(p.eta)
    header = HEADER.pack(
        FORMAT_VERSION,
        inst.N, inst.M, inst.P,
        p.alpha, p.pi, p.rho, p.delta, 0.0 if infinite else p.eta,
        1 if infinite else 0,
        inst.seed,
        0 if inst.Fprime is None else 1,
        *offsets,
        len(payload),
    )
    return MAGIC + header + payload + TRAILER.pack(zlib.crc32(payload) & 0xFFFFFFFF)


def _header_params(alpha, pi, rho, delta, eta, eta_infinite, has_fprime) -> ModelParams:
    if eta_infinite not in (0, 1) or has_fprime not in (0, 1):
        raise InstanceFormatError(f"header flags must be 0 or 1, got eta_infinite={eta_infinite}, has_fprime={has_fprime}")
    if has_fprime == eta_infinite:
        raise InstanceFormatError("header declares side information inconsistent with eta")
    try:
        return ModelParams(alpha=alpha, pi=pi, rho=rho, delta=delta, eta=INFINITE if eta_infinite else eta)
    except InvalidArgumentError as err:
        raise InstanceFormatError(f"header parameters are invalid: {err}") from None


def _expected_layout(params: ModelParams, n: int, m: int, p: int, has_fprime: int) -> list:
    """Sections (name, shape) in payload order, after checking the sizes."""
    try:
        sizes = problem_sizes(params, n)
    except InvalidArgumentError as err:
        raise InstanceFormatError(f"header sizes are invalid: {err}") from None
    if sizes != (m, p):
        raise InstanceFormatError(f"header sizes M={m}, P={p} do not follow alpha, pi at N={n} (expected {sizes})")
    return [("F0", (m, n)), ("X0", (n, p)), ("Y", (m, p)), ("Fprime", (m, n) if has_fprime else (0,))]


def parse_instance(data: bytes) -> ProblemInstance:
    """Deserialize bytes produced by dump_instance.

    Raises:
        InstanceFormatError: wrong magic, inconsistent header or trailing bytes
        InstanceVersionError: unsupported format version
        InstanceTruncatedError: header or payload shorter than declared
        InstanceChecksumError: payload CRC-32 mismatch
    """
    if len(data) < len(MAGIC):
        raise InstanceTruncatedError(f"file is {len(data)} bytes, shorter than the magic header")
    if data[:len(MAGIC)] != MAGIC:
        raise InstanceFormatError(f"bad magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}")

    start = len(MAGIC)
    if len(data) < start + VERSION.size:
        raise InstanceTruncatedError("file ends inside the header")
    (version,) = VERSION.unpack_from(data, start)
    if version != FORMAT_VERSION:
        raise InstanceVersionError(f"unsupported instance format version {version}, expected {FORMAT_VERSION}")
    if len(data) < start + HEADER.size:
        raise InstanceTruncatedError("file ends inside the header")

    (
        _, n, m, p,
        alpha, pi, rho, delta, eta,
        eta_infinite, seed, has_fprime,
        off_f0, off_x0, off_y, off_fp,
        payload_len,
    ) = HEADER.unpack_from(data, start)

    params = _header_params(alpha, pi, rho, delta, eta, eta_infinite, has_fprime)
    item = _DTYPE.itemsize
    layout = []
    position = 0
    for (name, shape), offset in zip(_expected_layout(params, n, m, p, has_fprime), (off_f0, off_x0, off_y, off_fp)):
        if offset != position:
            raise InstanceFormatError(f"section {name} starts at {offset}, expected {position}")
        layout.append((name, offset, shape))
        position += math.prod(shape) * item
    if payload_len != position:
        raise InstanceFormatError(f"payload length {payload_len} does not match the sections ({position} bytes)")

    payload_start = start + HEADER.size
    payload_end = payload_start + payload_len
    if len(data) < payload_end + TRAILER.size:
        raise InstanceTruncatedError(
            f"payload declares {payload_len} bytes but file holds {max(0, len(data) - payload_start - TRAILER.size)}"
        )
    if len(data) > payload_end + TRAILER.size:
        raise InstanceFormatError(f"{len(data) - payload_end - TRAILER.size} trailing bytes after the checksum")
    payload = data[payload_start:payload_end]
    (stored_crc,) = TRAILER.unpack_from(data, payload_end)
    if zlib.crc32(payload) & 0xFFFFFFFF != stored_crc:
        raise InstanceChecksumError("payload checksum mismatch")

    arrays = {}
    for name, offset, shape in layout:
        count = math.prod(shape)
        arrays[name] = np.frombuffer(payload, dtype=_DTYPE, count=count, offset=offset).reshape(shape).astype(float)

    return ProblemInstance(
        F0=arrays["F0"],
        X0=arrays["X0"],
        Y=arrays["Y"],
        Fprime=arrays["Fprime"] if has_fprime else None,
        params=params,
        seed=seed,
    )


def save_instance(inst: ProblemInstance, path) -> Path:
    """Write an instance file and return its path."""
    path = Path(path)
    data = dump_instance(inst)
    path.write_bytes(data)
    logger.info(f"Saved instance N={inst.N} M={inst.M} P={inst.P} to {path} ({len(data)} bytes)")
    return path


def load_instance(path) -> ProblemInstance:
    """Read an instance file written by save_instance."""
    path = Path(path)
    inst = parse_instance(path.read_bytes())
    logger.info(f"Loaded instance N={inst.N} M={inst.M} P={inst.P} from {path}")
    return inst
