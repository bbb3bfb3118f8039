"""Counter-based random streams.

Every random number consumed by a simulated path is a pure function of
``(master seed, stream id, path index, draw counter)``.  This makes any
path reconstructible in isolation and makes ensemble results independent
of scheduling, chunking and thread count.

The generator is the splitmix64 finalizer applied to a Weyl sequence:
``draw(key, n) = mix64(key + (n + 1) * GOLDEN)``, with the per-path key
derived by hashing seed, stream id and path index together.  The same
mixing function is reimplemented with identical arithmetic in the numba
stepping kernels (:mod:`dunklmc._stepping`); a unit test pins the two
implementations to each other bit for bit.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
_SEED_SALT = 0xD1B54A32D192ED03
_STREAM_SALT = 0x8BB84B93962EACC9
_PATH_SALT = 0x2545F4914F6CDD1D
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

_INV_2_53 = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (pure-Python reference)."""
    x &= _M64
    x = ((x ^ (x >> 30)) * _MIX_A) & _M64
    x = ((x ^ (x >> 27)) * _MIX_B) & _M64
    return x ^ (x >> 31)


def path_key(seed: int, stream_id: int, path_index: int) -> int:
    """Derive the 64-bit key of one path's stream."""
    k = mix64((seed & _M64) ^ _SEED_SALT)
    k = mix64(k ^ ((stream_id * _STREAM_SALT) & _M64))
    k = mix64(k ^ ((path_index * _PATH_SALT) & _M64))
    return k


def path_keys(seed: int, stream_id: int, n_paths: int, first_index: int = 0) -> np.ndarray:
    """Vector of per-path keys for ``path_index = first_index .. first_index+n-1``."""
    idx = np.arange(first_index, first_index + n_paths, dtype=np.uint64)
    k = mix64((seed & _M64) ^ _SEED_SALT)
    k = mix64(k ^ ((stream_id * _STREAM_SALT) & _M64))
    with np.errstate(over="ignore"):
        x = np.uint64(k) ^ (idx * np.uint64(_PATH_SALT))
        return _mix64_np(x)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX_A)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX_B)
        return x ^ (x >> np.uint64(31))


def u64_at(key: int, counter: int) -> int:
    """The ``counter``-th raw 64-bit draw of the stream ``key``."""
    return mix64((key + ((counter + 1) * GOLDEN)) & _M64)


def uniform_at(key: int, counter: int) -> float:
    """Uniform draw in the open interval (0, 1)."""
    return ((u64_at(key, counter) >> 11) + 0.5) * _INV_2_53


def uniform_block(key: int, start: int, n: int) -> np.ndarray:
    """``n`` consecutive uniforms of one stream, as a float64 array."""
    ctr = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u = _mix64_np(np.uint64(key) + ctr * np.uint64(GOLDEN))
    return ((u >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


class PathStream:
    """Stateful view of one path's counter stream.

    Wraps ``(key, counter)`` so sequential consumers (the single-path
    stepper) advance the counter without owning any other state.
    """

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, stream_id: int = 0, path_index: int = 0, counter: int = 0):
        self.key = path_key(seed, stream_id, path_index)
        self.counter = counter

    def uniforms(self, n: int) -> np.ndarray:
        out = uniform_block(self.key, self.counter, n)
        self.counter += n
        return out
