#!/usr/bin/env python3
"""Writes the TinyCondNet cross-language parity fixture.

A float64 numpy forward pass (independent of the C++ code) is run on seeded
weights and a seeded 8x8 input. Outputs, in the chosen directory:

  parity_weights.cdwt     CDWT weights
  parity_input.ctns       f32 [2G, 8, 8]  (noisy channels, then condition)
  parity_timestep.ctns    f32 [1]
  parity_output.ctns      f32 [G, 8, 8]
  parity_checksums.json   per-layer sum of the stored f32 values

Re-running with the same seed gives byte-identical files.
"""

import argparse
import json
import struct
from pathlib import Path

import numpy as np

WIDTH = 32
EMBED = 32
TIME = 64
BLOCKS = 3


def layer_table(g):
    t = [
        ("stem.weight", (WIDTH, 2 * g, 3, 3)),
        ("stem.bias", (WIDTH,)),
        ("time_mlp.fc1.weight", (TIME, EMBED)),
        ("time_mlp.fc1.bias", (TIME,)),
        ("time_mlp.fc2.weight", (TIME, TIME)),
        ("time_mlp.fc2.bias", (TIME,)),
    ]
    for b in range(1, BLOCKS + 1):
        p = f"b{b}."
        t += [
            (p + "conv1.weight", (WIDTH, WIDTH, 3, 3)),
            (p + "conv1.bias", (WIDTH,)),
            (p + "time_proj.weight", (WIDTH, TIME)),
            (p + "time_proj.bias", (WIDTH,)),
            (p + "conv2.weight", (WIDTH, WIDTH, 3, 3)),
            (p + "conv2.bias", (WIDTH,)),
        ]
    t += [("head.weight", (g, WIDTH, 3, 3)), ("head.bias", (g,))]
    return t


def make_weights(g, seed, zero=False):
    rng = np.random.default_rng(seed)
    out = {}
    for name, shape in layer_table(g):
        if zero:
            out[name] = np.zeros(shape, np.float32)
            continue
        if len(shape) == 1:
            w = rng.normal(0.0, 0.05, shape)
        else:
            w = rng.normal(0.0, 1.0 / np.sqrt(np.prod(shape[1:])), shape)
        out[name] = w.astype(np.float32)
    return out


def embedding(t):
    half = EMBED // 2
    freqs = 10000.0 ** (-2.0 * np.arange(half) / EMBED)
    return np.concatenate([np.sin(t * freqs), np.cos(t * freqs)])


def silu(x):
    return x / (1.0 + np.exp(-x))


def conv3x3(x, w, b):
    c, h, wd = x.shape
    padded = np.zeros((c, h + 2, wd + 2))
    padded[:, 1:-1, 1:-1] = x
    out = np.zeros((w.shape[0], h, wd))
    for ky in range(3):
        for kx in range(3):
            patch = padded[:, ky:ky + h, kx:kx + wd]
            out += np.einsum("oc,chw->ohw", w[:, :, ky, kx], patch)
    return out + b[:, None, None]


def forward(weights, x, t):
    w = {k: v.astype(np.float64) for k, v in weights.items()}
    emb = embedding(t)
    temb = w["time_mlp.fc2.weight"] @ silu(w["time_mlp.fc1.weight"] @ emb + w["time_mlp.fc1.bias"])
    temb = temb + w["time_mlp.fc2.bias"]
    h = silu(conv3x3(x, w["stem.weight"], w["stem.bias"]))
    for b in range(1, BLOCKS + 1):
        p = f"b{b}."
        r = conv3x3(h, w[p + "conv1.weight"], w[p + "conv1.bias"])
        r = r + (w[p + "time_proj.weight"] @ temb + w[p + "time_proj.bias"])[:, None, None]
        h = h + conv3x3(silu(r), w[p + "conv2.weight"], w[p + "conv2.bias"])
    return conv3x3(h, w["head.weight"], w["head.bias"])


def write_tensor(path, array):
    array = np.ascontiguousarray(array, dtype="<f4")
    head = b"CTNS" + struct.pack("<HBB", 1, 0, array.ndim)
    head += b"".join(struct.pack("<Q", d) for d in array.shape)
    path.write_bytes(head + array.tobytes())


def write_weights(path, weights, g):
    header, blobs, offset = [], [], 0
    for name, shape in layer_table(g):
        header.append({"name": name, "shape": list(shape), "offset": offset})
        blob = np.ascontiguousarray(weights[name], dtype="<f4").tobytes()
        blobs.append(blob)
        offset += len(blob)
    text = json.dumps(header, separators=(",", ":")).encode()
    path.write_bytes(b"CDWT" + struct.pack("<HI", 1, len(text)) + text + b"".join(blobs))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--group", type=int, default=3)
    ap.add_argument("--size", type=int, default=8)
    ap.add_argument("--timestep", type=float, default=217.0)
    ap.add_argument("--zero", action="store_true", help="all-zero weights")
    ap.add_argument("--prefix", default="parity")
    args = ap.parse_args()

    g = args.group
    weights = make_weights(g, args.seed, args.zero)
    rng = np.random.default_rng(args.seed + 1)
    x = rng.normal(0.0, 1.0, (2 * g, args.size, args.size)).astype(np.float32)
    y = forward(weights, x.astype(np.float64), args.timestep)

    args.out.mkdir(parents=True, exist_ok=True)
    pre = args.out / args.prefix
    write_weights(Path(f"{pre}_weights.cdwt"), weights, g)
    write_tensor(Path(f"{pre}_input.ctns"), x)
    write_tensor(Path(f"{pre}_timestep.ctns"), np.array([args.timestep]))
    write_tensor(Path(f"{pre}_output.ctns"), y)
    sums = {name: float(np.sum(weights[name], dtype=np.float64)) for name, _ in layer_table(g)}
    Path(f"{pre}_checksums.json").write_text(json.dumps(sums, indent=1, sort_keys=True) + "\n")
    print(f"wrote {args.prefix} fixture to {args.out}: output range [{y.min():.4f}, {y.max():.4f}]")


if __name__ == "__main__":
    main()
