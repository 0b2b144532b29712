"""Counter-based seed mixing (splitmix64), scalar and vectorised."""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# stream keys for the per-drop random generators
STREAM_BS = 1
STREAM_UAV = 2
STREAM_UE = 3
STREAM_EAVES = 4
STREAM_PATTERNS = 5


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def drop_seed(master_seed: int, drop_index: int) -> int:
    """Seed of drop ``drop_index``; depends on nothing else, so any schedule
    of drops over workers sees the same randomness."""
    return splitmix64(splitmix64(master_seed & MASK64) ^ (drop_index & MASK64))


def stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & MASK64, key])))


_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_G = np.uint64(GOLDEN)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _G
        z = (z ^ (z >> np.uint64(30))) * _C1
        z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


def hash_uniforms(seed: int, a, b, n_out: int):
    """``n_out`` arrays of uniforms in (0, 1], each a pure function of
    (seed, a[i], b[i], output index)."""
    a = np.asarray(a, dtype=np.int64).astype(np.uint64)
    b = np.asarray(b, dtype=np.int64).astype(np.uint64)
    s = np.uint64(splitmix64(seed & MASK64))
    key = splitmix64_array(splitmix64_array(a ^ s) ^ b)
    out = []
    with np.errstate(over="ignore"):
        for j in range(n_out):
            h = splitmix64_array(key + np.uint64(j) * _G)
            out.append(((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53)
    return out
