"""Vectorised NumPy implementation of the fixed-length subsequence kernel.

This is the fallback used when the compiled extension is not available.
The dynamic program runs over all requested string pairs at once (chunked to
bound memory), so the per-pair Python overhead stays negligible.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_CHUNK = 1024


def encode_strings(strings) -> tuple[np.ndarray, np.ndarray]:
    """Pack strings into an int32 code matrix; returns (codes, lengths)."""
    lengths = np.fromiter((len(s) for s in strings), dtype=np.intp, count=len(strings))
    width = max(int(lengths.max(initial=0)), 1)
    codes = np.full((len(strings), width), -1, dtype=np.int32)
    for i, s in enumerate(strings):
        if s:
            codes[i, : len(s)] = np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(
                np.int32
            )
    return codes, lengths


def _repad(codes: np.ndarray, lengths: np.ndarray, pad: int) -> np.ndarray:
    """Overwrite everything past each string's length with ``pad``.

    The x side and y side get distinct pads so padding never matches padding,
    whatever the caller filled the tails with.
    """
    mask = np.arange(codes.shape[1])[None, :] < lengths[:, None]
    return np.where(mask, codes, np.int32(pad))


def _pairs_dp(match: np.ndarray, p: int, lam: float) -> np.ndarray:
    """Subsequence-kernel values for a batch of pairs given their match tensors.

    ``match`` has shape (pairs, ls, lt), True where characters coincide.
    """
    c, ls, lt = match.shape
    lam2 = lam * lam
    matchf = match.astype(np.float64)
    # kp[m][n] is the prefix quantity for prefix lengths m, n; level 0 is all-ones.
    kp_prev = np.ones((c, ls + 1, lt + 1))
    for _ in range(1, p):
        kd = np.zeros((c, ls + 1, lt + 1))
        for n in range(1, lt + 1):
            kd[:, 1:, n] = lam * kd[:, 1:, n - 1] + lam2 * matchf[:, :, n - 1] * kp_prev[:, :-1, n - 1]
        kp = np.zeros((c, ls + 1, lt + 1))
        for m in range(1, ls + 1):
            kp[:, m, :] = lam * kp[:, m - 1, :] + kd[:, m, :]
        kp_prev = kp
    return lam2 * np.einsum("cmn,cmn->c", matchf, kp_prev[:, :-1, :-1])


def gram_codes(
    xs_codes: np.ndarray,
    xs_len: np.ndarray,
    ys_codes: np.ndarray,
    ys_len: np.ndarray,
    p: int,
    lam: float,
    symmetric: bool,
) -> np.ndarray:
    """Unnormalised subsequence-kernel Gram matrix between two code batches.

    With ``symmetric`` the two batches are assumed identical and only the
    lower triangle is computed, then mirrored.
    """
    a, b = xs_codes.shape[0], ys_codes.shape[0]
    out = np.zeros((a, b))
    if a == 0 or b == 0 or p < 1:
        return out
    xs_codes = _repad(xs_codes, xs_len, pad=-1)
    ys_codes = _repad(ys_codes, ys_len, pad=-2)

    if symmetric:
        ii, jj = np.tril_indices(a)
    else:
        grid_i, grid_j = np.meshgrid(np.arange(a), np.arange(b), indexing="ij")
        ii, jj = grid_i.ravel(), grid_j.ravel()

    vals = np.empty(ii.size)
    for start in range(0, ii.size, _CHUNK):
        sl = slice(start, min(start + _CHUNK, ii.size))
        match = xs_codes[ii[sl], :, None] == ys_codes[jj[sl], None, :]
        vals[sl] = _pairs_dp(match, p, lam)

    out[ii, jj] = vals
    if symmetric:
        out[jj, ii] = vals
    return out


def self_values(codes: np.ndarray, lens: np.ndarray, p: int, lam: float) -> np.ndarray:
    """Diagonal k(s, s) for each string in the batch."""
    a = codes.shape[0]
    if a == 0 or p < 1:
        return np.zeros(a)
    codes_s = _repad(codes, lens, pad=-1)
    codes_t = _repad(codes, lens, pad=-2)
    vals = np.empty(a)
    for start in range(0, a, _CHUNK):
        sl = slice(start, min(start + _CHUNK, a))
        match = codes_s[sl, :, None] == codes_t[sl, None, :]
        vals[sl] = _pairs_dp(match, p, lam)
    return vals
