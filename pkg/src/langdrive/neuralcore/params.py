"""Named parameter collections and the versioned binary weight file format.

File layout, little-endian throughout: magic b"LDWT", u16 version, u32 tensor
count, then per tensor: u16 name length, utf-8 name, u8 rank, u32 dims, float64
payload. Saving a loaded file reproduces it byte for byte.
"""

import struct

import numpy as np

from .tensor import Tensor

MAGIC = b"LDWT"
VERSION = 1


class ParamSet:
    """Insertion-ordered name -> Tensor mapping of trainable parameters."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def items(self):
        return self._params.items()

    def values(self):
        return self._params.values()

    def names(self):
        return list(self._params)

    def count(self) -> int:
        return sum(p.data.size for p in self._params.values())


def uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def embedding_init(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(-0.1, 0.1, size=shape)


def add_dense(ps: ParamSet, prefix: str, n_in: int, n_out: int,
              rng: np.random.Generator) -> tuple[Tensor, Tensor]:
    w = ps.add(f"{prefix}.w", uniform_init(rng, (n_in, n_out), n_in))
    b = ps.add(f"{prefix}.b", np.zeros(n_out))
    return w, b


def add_conv(ps: ParamSet, prefix: str, c_in: int, c_out: int, k: int,
             rng: np.random.Generator) -> tuple[Tensor, Tensor]:
    w = ps.add(f"{prefix}.w", uniform_init(rng, (c_out, c_in, k, k), c_in * k * k))
    b = ps.add(f"{prefix}.b", np.zeros(c_out))
    return w, b


def add_gru(ps: ParamSet, prefix: str, n_in: int, n_hidden: int,
            rng: np.random.Generator) -> dict[str, Tensor]:
    out = {}
    for gate in ("z", "r", "h"):
        out[f"w{gate}"] = ps.add(f"{prefix}.w{gate}", uniform_init(rng, (n_in, n_hidden), n_in))
        out[f"u{gate}"] = ps.add(f"{prefix}.u{gate}",
                                 uniform_init(rng, (n_hidden, n_hidden), n_hidden))
        out[f"b{gate}"] = ps.add(f"{prefix}.b{gate}", np.zeros(n_hidden))
    return out


def gru_view(ps: ParamSet, prefix: str) -> dict[str, Tensor]:
    return {f"{k}{g}": ps[f"{prefix}.{k}{g}"] for k in ("w", "u", "b") for g in ("z", "r", "h")}


def save_params(path, ps: ParamSet) -> None:
    chunks = [MAGIC, struct.pack("<HI", VERSION, len(ps))]
    for name, p in ps.items():
        raw = name.encode("utf-8")
        arr = np.ascontiguousarray(p.data, dtype="<f8")
        chunks.append(struct.pack("<H", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b"")
        chunks.append(arr.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


def load_params(path) -> ParamSet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path}: not a weight file (bad magic {blob[:4]!r})")
    version, count = struct.unpack_from("<HI", blob, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported weight file version {version}")
    ps = ParamSet()
    off = 10
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off:off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<B", blob, off)
        off += 1
        dims = struct.unpack_from(f"<{rank}I", blob, off) if rank else ()
        off += 4 * rank
        size = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f8", count=size, offset=off).reshape(dims)
        off += 8 * size
        ps.add(name, arr.copy())
    return ps
