"""Versioned binary model bundle: network, marginal tables, train config.

Layout (all integers little-endian):

    8 bytes   magic ``NNCOPCD\\0``
    u32       format version (currently 1)
    u32       number of layer sizes, then that many u32 sizes
    u8+bytes  hidden activation name, u8+bytes output activation name
    u64       parameter count, then that many f64 (weights then biases,
              the flatten_params order)
    2 tables  each: f64 bandwidth, u64 sample count, 256 f64 entries
    u32+bytes UTF-8 JSON config block: train config plus free-form meta

The float payload round-trips bit-exactly; the JSON block round-trips
exactly for float64 values since Python prints shortest repr.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .losses import LossWeights
from .marginals import N_LEVELS, CdfTable
from .network import CopulaNet, flatten_params, with_params
from .training import TrainConfig

MAGIC = b"NNCOPCD\x00"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Bad magic, unsupported version, or a truncated/corrupt file."""


@dataclass(frozen=True)
class Checkpoint:
    """Everything inference needs: the net, both marginals, and config."""

    net: CopulaNet
    table1: CdfTable
    table2: CdfTable
    config: TrainConfig
    meta: dict


def save_checkpoint(
    net: CopulaNet,
    table1: CdfTable,
    table2: CdfTable,
    config: TrainConfig,
    path: str | Path,
    meta: dict | None = None,
) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", FORMAT_VERSION)
    blob += struct.pack("<I", len(net.layer_sizes))
    blob += struct.pack(f"<{len(net.layer_sizes)}I", *net.layer_sizes)
    for name in (net.hidden_activation, net.output_activation):
        raw = name.encode()
        blob += struct.pack("<B", len(raw)) + raw
    params = flatten_params(net)
    blob += struct.pack("<Q", len(params))
    blob += params.astype("<f8").tobytes()
    for table in (table1, table2):
        blob += struct.pack("<d", table.bandwidth)
        blob += struct.pack("<Q", table.sample_count)
        blob += table.entries.astype("<f8").tobytes()
    cfg = asdict(config)
    cfg["meta"] = dict(meta or {})
    raw_cfg = json.dumps(cfg, sort_keys=True).encode()
    blob += struct.pack("<I", len(raw_cfg)) + raw_cfg
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    view = memoryview(raw)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise CheckpointError(f"truncated checkpoint file {path}")
        chunk = view[pos : pos + n]
        pos += n
        return chunk

    if bytes(take(len(MAGIC))) != MAGIC:
        raise CheckpointError(f"{path} is not a copula checkpoint (bad magic)")
    (version,) = struct.unpack("<I", take(4))
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})"
        )
    (n_sizes,) = struct.unpack("<I", take(4))
    sizes = struct.unpack(f"<{n_sizes}I", take(4 * n_sizes))
    names = []
    for _ in range(2):
        (ln,) = struct.unpack("<B", take(1))
        names.append(bytes(take(ln)).decode())
    (n_params,) = struct.unpack("<Q", take(8))
    params = np.frombuffer(take(8 * n_params), dtype="<f8").astype(np.float64)
    tables = []
    for _ in range(2):
        (bandwidth,) = struct.unpack("<d", take(8))
        (count,) = struct.unpack("<Q", take(8))
        entries = np.frombuffer(take(8 * N_LEVELS), dtype="<f8").astype(np.float64)
        tables.append(CdfTable(entries=entries, bandwidth=bandwidth, sample_count=count))
    (cfg_len,) = struct.unpack("<I", take(4))
    cfg = json.loads(bytes(take(cfg_len)).decode())
    if pos != len(view):
        raise CheckpointError(f"trailing bytes in checkpoint file {path}")

    meta = cfg.pop("meta", {})
    cfg["weights"] = LossWeights(**cfg["weights"])
    config = TrainConfig(**cfg)
    skeleton = CopulaNet(
        layer_sizes=tuple(int(s) for s in sizes),
        weights=[np.zeros((sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)],
        biases=[np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)],
        hidden_activation=names[0],
        output_activation=names[1],
    )
    if skeleton.n_params != n_params:
        raise CheckpointError("parameter count does not match layer sizes")
    return Checkpoint(
        net=with_params(skeleton, params),
        table1=tables[0],
        table2=tables[1],
        config=config,
        meta=meta,
    )
