"""SGW1 weight files.

Layout (little endian): magic `SGW1`, u32 version, u32 tensor count, then per
tensor a u16 name length, the UTF-8 name, a u8 rank, rank u32 dimensions and the
float32 data; a trailing u32 CRC32 covers every preceding byte. The network
configuration travels as `config.*` tensors so a file is self-describing.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from spoofguard.errors import WeightFileError
from spoofguard.helpers.file_utils import write_bytes_atomic
from spoofguard.neuralnet.model import PRESETS, NetworkConfig, ResNet, build_network

MAGIC = b"SGW1"
VERSION = 1
HEADER = struct.Struct("<4sII")
CRC = struct.Struct("<I")


def _config_tensors(cfg: NetworkConfig) -> dict[str, np.ndarray]:
    return {
        "config.stage_block_counts": np.asarray(cfg.stage_block_counts, dtype=np.float32),
        "config.base_channels": np.asarray([cfg.base_channels], dtype=np.float32),
        "config.input_hw": np.asarray([cfg.input_hw], dtype=np.float32),
        "config.in_channels": np.asarray([cfg.in_channels], dtype=np.float32),
        "config.num_classes": np.asarray([cfg.num_classes], dtype=np.float32),
    }


def _config_from_tensors(tensors: dict[str, np.ndarray]) -> NetworkConfig:
    try:
        blocks = tuple(int(v) for v in tensors["config.stage_block_counts"])
        base = int(tensors["config.base_channels"][0])
        input_hw = int(tensors["config.input_hw"][0])
        in_channels = int(tensors["config.in_channels"][0])
        num_classes = int(tensors["config.num_classes"][0])
    except (KeyError, IndexError) as error:
        message = f"weight file lacks the network configuration ({error})"
        raise WeightFileError(message) from error

    preset = next(
        (name for name, values in PRESETS.items() if values == (blocks, base, input_hw)),
        "custom",
    )
    return NetworkConfig(blocks, base, input_hw, num_classes, in_channels, preset)


def model_tensors(model: ResNet) -> dict[str, np.ndarray]:
    """Every tensor that defines the model, in file order."""
    named = _config_tensors(model.config)
    named.update({name: tensor.data for name, tensor in model.parameters().items()})
    named.update(model.buffers())
    return named


def encode_weights(model: ResNet) -> bytes:
    """Serialize a model to SGW1 bytes."""
    tensors = model_tensors(model)
    parts = [HEADER.pack(MAGIC, VERSION, len(tensors))]
    for name, array in tensors.items():
        encoded_name = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded_name)) + encoded_name)
        parts.append(struct.pack(f"<B{array.ndim}I", array.ndim, *array.shape))
        parts.append(np.asarray(array, dtype="<f4").tobytes())

    body = b"".join(parts)
    return body + CRC.pack(zlib.crc32(body))


def decode_tensors(payload: bytes, source: str = "<bytes>") -> dict[str, np.ndarray]:
    """Parse and checksum SGW1 bytes into named float32 arrays."""
    if len(payload) < HEADER.size + CRC.size:
        message = f"{source}: truncated weight file"
        raise WeightFileError(message)

    magic, version, count = HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        message = f"{source}: bad magic {magic!r}, expected {MAGIC!r}"
        raise WeightFileError(message)
    if version != VERSION:
        message = f"{source}: unsupported SGW1 version {version}"
        raise WeightFileError(message)

    body, (stored_crc,) = payload[:-CRC.size], CRC.unpack_from(payload, len(payload) - CRC.size)

    tensors = {}
    offset = HEADER.size
    try:
        for _ in range(count):
            (name_length,) = struct.unpack_from("<H", body, offset)
            offset += 2
            name = body[offset:offset + name_length].decode("utf-8")
            offset += name_length
            (rank,) = struct.unpack_from("<B", body, offset)
            offset += 1
            shape = struct.unpack_from(f"<{rank}I", body, offset)
            offset += 4 * rank
            size = int(np.prod(shape, dtype=np.int64))
            if offset + 4 * size > len(body):
                message = f"{source}: truncated data for tensor {name!r}"
                raise WeightFileError(message)
            tensors[name] = np.frombuffer(body, dtype="<f4", count=size, offset=offset).reshape(shape)
            offset += 4 * size
    except (struct.error, UnicodeDecodeError) as error:
        message = f"{source}: truncated or corrupt tensor table ({error})"
        raise WeightFileError(message) from error

    if offset != len(body):
        message = f"{source}: {len(body) - offset} unexpected trailing bytes"
        raise WeightFileError(message)
    if zlib.crc32(body) != stored_crc:
        message = f"{source}: CRC32 mismatch, file is corrupt"
        raise WeightFileError(message)

    return tensors


def apply_tensors(model: ResNet, tensors: dict[str, np.ndarray]) -> ResNet:
    """Copy named arrays into a model after checking names and shapes."""
    parameters = model.parameters()
    buffers = model.buffers()
    for name, array in tensors.items():
        if name.startswith("config."):
            continue
        target = parameters[name].data if name in parameters else buffers.get(name)
        if target is None:
            message = f"tensor {name!r} does not exist in a {model.config.preset} network"
            raise WeightFileError(message)
        if target.shape != array.shape:
            message = (
                f"tensor {name!r} has shape {array.shape}, "
                f"a {model.config.preset} network expects {target.shape}"
            )
            raise WeightFileError(message)

    missing = [name for name in [*parameters, *buffers] if name not in tensors]
    if missing:
        message = f"weight file lacks tensor {missing[0]!r}"
        raise WeightFileError(message)

    for name, tensor in parameters.items():
        tensor.data = np.array(tensors[name], dtype=tensor.data.dtype)
    for name, buffer in buffers.items():
        buffer[...] = tensors[name]

    return model


def save_weights(model: ResNet, path: str | Path) -> None:
    """Write a model to an SGW1 file."""
    write_bytes_atomic(path, encode_weights(model))


def load_weights(path: str | Path, cfg: NetworkConfig | None = None) -> ResNet:
    """Read an SGW1 file into a network.

    With `cfg` the tensors are validated against that configuration; otherwise the
    configuration stored in the file is used.
    """
    try:
        payload = Path(path).read_bytes()
    except OSError as error:
        message = f"{path}: unreadable weight file ({error})"
        raise WeightFileError(message) from error

    tensors = decode_tensors(payload, source=str(path))
    if cfg is None:
        cfg = _config_from_tensors(tensors)

    return apply_tensors(build_network(cfg), tensors)
