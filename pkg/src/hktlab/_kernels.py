"""Hot numeric kernels with an optional numba backend.

Set ``HKTLAB_NUMBA=0`` to force the pure-numpy path.  Both paths compute the
same quantities to rounding; ``benchmarks/bench_kernels.py`` times them.
"""

from __future__ import annotations

import itertools
import os
from functools import lru_cache

import numpy as np

USE_NUMBA = os.environ.get("HKTLAB_NUMBA", "1").lower() not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


@lru_cache(maxsize=None)
def signed_permutations(k: int) -> tuple:
    """All permutations of ``range(k)`` with their signs."""
    out = []
    for perm in itertools.permutations(range(k)):
        inversions = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        out.append((perm, -1 if inversions % 2 else 1))
    return tuple(out)


@lru_cache(maxsize=None)
def _perm_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    perms = signed_permutations(k)
    return (np.array([p for p, _ in perms], dtype=np.int64), np.array([s for _, s in perms], dtype=np.float64))


@lru_cache(maxsize=None)
def _combinations(d: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(d), k)), dtype=np.int64).reshape(-1, k)


# -- numpy reference path ---------------------------------------------------------


def _alt_sum_numpy(t: np.ndarray, k: int) -> np.ndarray:
    rest = tuple(range(k, t.ndim))
    acc = np.zeros_like(t)
    for perm, sign in signed_permutations(k):
        if sign > 0:
            acc += t.transpose(perm + rest)
        else:
            acc -= t.transpose(perm + rest)
    return acc


def _outer2_numpy(f1: np.ndarray) -> np.ndarray:
    return f1[..., :, None] * f1[..., None, :]


def _outer3_numpy(f1: np.ndarray) -> np.ndarray:
    return f1[..., :, None, None] * f1[..., None, :, None] * f1[..., None, None, :]


def _hess_grad_sym_numpy(f2: np.ndarray, f1: np.ndarray) -> np.ndarray:
    return f2[..., :, :, None] * f1[..., None, None, :] + f2[..., :, None, :] * f1[..., None, :, None] + f2[..., None, :, :] * f1[..., :, None, None]


# -- numba path ---------------------------------------------------------------------

if USE_NUMBA:

    @numba.njit(cache=True)
    def _alt_sum_flat(t, d, k, rest, combos, perms, signs):
        # t: flat view of shape (d**k * rest,), C-ordered with the k form axes first.
        # The result is antisymmetric, so it is computed on increasing index tuples
        # and scattered to their permutations; tuples with repeats stay zero.
        out = np.zeros(d**k * rest, dtype=t.dtype)
        acc = np.empty(rest, dtype=t.dtype)
        src = np.empty(k, dtype=np.int64)
        for c in range(combos.shape[0]):
            acc[:] = 0
            for p in range(perms.shape[0]):
                # transpose semantics: out[i] += sign * t[i permuted by perm^{-1}]
                for a in range(k):
                    src[perms[p, a]] = combos[c, a]
                off = 0
                for a in range(k):
                    off = off * d + src[a]
                s = signs[p]
                for r in range(rest):
                    acc[r] += s * t[off * rest + r]
            for p in range(perms.shape[0]):
                off = 0
                for a in range(k):
                    off = off * d + combos[c, perms[p, a]]
                s = signs[p]
                for r in range(rest):
                    out[off * rest + r] = s * acc[r]
        return out

    @numba.njit(cache=True)
    def _outer2_flat(f1, m, d):
        out = np.empty((m, d, d), dtype=f1.dtype)
        for i in range(m):
            for a in range(d):
                fa = f1[i, a]
                for b in range(d):
                    out[i, a, b] = fa * f1[i, b]
        return out

    @numba.njit(cache=True)
    def _outer3_flat(f1, m, d):
        out = np.empty((m, d, d, d), dtype=f1.dtype)
        for i in range(m):
            for a in range(d):
                for b in range(d):
                    fab = f1[i, a] * f1[i, b]
                    for c in range(d):
                        out[i, a, b, c] = fab * f1[i, c]
        return out

    @numba.njit(cache=True)
    def _hess_grad_sym_flat(f2, f1, m, d):
        out = np.empty((m, d, d, d), dtype=f2.dtype)
        for i in range(m):
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        out[i, a, b, c] = f2[i, a, b] * f1[i, c] + f2[i, a, c] * f1[i, b] + f2[i, b, c] * f1[i, a]
        return out


def alt_sum(t: np.ndarray, k: int) -> np.ndarray:
    """``sum_sigma sign(sigma) * t`` with the first ``k`` axes permuted by sigma.

    The first ``k`` axes must all have the same length; trailing axes ride along.
    """
    if k <= 1:
        return np.array(t, copy=True)
    if not USE_NUMBA:
        return _alt_sum_numpy(t, k)
    d = t.shape[0]
    rest = int(np.prod(t.shape[k:], dtype=np.int64))
    perms, signs = _perm_table(k)
    flat = np.ascontiguousarray(t).reshape(-1)
    out = _alt_sum_flat(flat, d, k, rest, _combinations(d, k), perms, signs.astype(flat.dtype))
    return out.reshape(t.shape)


def outer2(f1: np.ndarray) -> np.ndarray:
    if not USE_NUMBA:
        return _outer2_numpy(f1)
    lead, d = f1.shape[:-1], f1.shape[-1]
    m = int(np.prod(lead, dtype=np.int64))
    return _outer2_flat(np.ascontiguousarray(f1).reshape(m, d), m, d).reshape(lead + (d, d))


def outer3(f1: np.ndarray) -> np.ndarray:
    if not USE_NUMBA:
        return _outer3_numpy(f1)
    lead, d = f1.shape[:-1], f1.shape[-1]
    m = int(np.prod(lead, dtype=np.int64))
    return _outer3_flat(np.ascontiguousarray(f1).reshape(m, d), m, d).reshape(lead + (d, d, d))


def hess_grad_sym(f2: np.ndarray, f1: np.ndarray) -> np.ndarray:
    """``f2_ab f1_c + f2_ac f1_b + f2_bc f1_a`` over trailing derivative axes."""
    if not USE_NUMBA:
        return _hess_grad_sym_numpy(f2, f1)
    lead, d = f1.shape[:-1], f1.shape[-1]
    m = int(np.prod(lead, dtype=np.int64))
    dtype = np.result_type(f2, f1)
    out = _hess_grad_sym_flat(
        np.ascontiguousarray(f2, dtype=dtype).reshape(m, d, d), np.ascontiguousarray(f1, dtype=dtype).reshape(m, d), m, d
    )
    return out.reshape(lead + (d, d, d))
