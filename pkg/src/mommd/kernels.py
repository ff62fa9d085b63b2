"""Positive-definite kernels on real and string domains, plus Gram assembly.

Numeric kernels (rbf, polynomial, linear) are evaluated with vectorised NumPy.
The string-subsequence kernel runs on a compiled extension when available and
falls back to a batched NumPy dynamic program otherwise; ``ssk_backend()``
reports which one is active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _ssk_py
from .errors import DomainMismatchError, HyperparameterError, ShapeError
from .linalg import CholeskyFactor, cholesky_psd

try:
    from . import _ssk_cy as _ssk_impl
except ImportError:  # compiled extension not built
    _ssk_impl = _ssk_py


def ssk_backend() -> str:
    """Name of the active subsequence-kernel backend: "compiled" or "python"."""
    return _ssk_impl.BACKEND


FAMILIES = ("rbf", "polynomial", "linear", "string-subsequence")


@dataclass(frozen=True, eq=True)
class Kernel:
    """A kernel family plus its hyperparameters.

    Use the ``rbf`` / ``polynomial`` / ``linear`` / ``string_subsequence``
    constructors or ``parse_kernel_spec`` rather than building instances by
    hand; validation happens on construction.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise HyperparameterError(f"unknown kernel family {self.family!r}")
        p = self.params
        if self.family == "rbf":
            if set(p) != {"sigma"} or not p["sigma"] > 0:
                raise HyperparameterError("rbf needs bandwidth sigma > 0")
        elif self.family == "polynomial":
            if set(p) != {"degree", "offset"}:
                raise HyperparameterError("polynomial needs degree and offset")
            if int(p["degree"]) != p["degree"] or p["degree"] < 1:
                raise HyperparameterError("polynomial degree must be an integer >= 1")
            if not p["offset"] >= 0:
                raise HyperparameterError("polynomial offset must be >= 0")
        elif self.family == "linear":
            if p:
                raise HyperparameterError("linear kernel takes no parameters")
        else:
            if set(p) != {"p", "lam", "normalized"}:
                raise HyperparameterError("string kernel needs p, lam, normalized")
            if int(p["p"]) != p["p"] or p["p"] < 1:
                raise HyperparameterError("subsequence length p must be an integer >= 1")
            if not 0 < p["lam"] <= 1:
                raise HyperparameterError("decay lam must lie in (0, 1]")

    @property
    def is_string(self) -> bool:
        return self.family == "string-subsequence"


def rbf(sigma: float) -> Kernel:
    return Kernel("rbf", {"sigma": float(sigma)})


def polynomial(degree: int, offset: float = 1.0) -> Kernel:
    return Kernel("polynomial", {"degree": int(degree), "offset": float(offset)})


def linear() -> Kernel:
    return Kernel("linear")


def string_subsequence(p: int = 3, lam: float = 0.8, normalized: bool = True) -> Kernel:
    return Kernel(
        "string-subsequence", {"p": int(p), "lam": float(lam), "normalized": bool(normalized)}
    )


def _fmt(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else repr(float(x))


def kernel_spec(k: Kernel) -> str:
    """Round-trippable one-line spec, e.g. ``rbf:sigma=1`` or ``ssk:p=3,lambda=0.8,norm=1``."""
    if k.family == "rbf":
        return f"rbf:sigma={_fmt(k.params['sigma'])}"
    if k.family == "polynomial":
        return f"poly:degree={k.params['degree']},c={_fmt(k.params['offset'])}"
    if k.family == "linear":
        return "linear"
    p = k.params
    return f"ssk:p={p['p']},lambda={_fmt(p['lam'])},norm={int(p['normalized'])}"


def parse_kernel_spec(spec: str) -> Kernel:
    """Parse a kernel spec string as used on the command line."""
    spec = spec.strip()
    name, _, arg_str = spec.partition(":")
    name = name.strip().lower()
    args: dict[str, str] = {}
    if arg_str:
        for item in arg_str.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise HyperparameterError(f"malformed kernel spec {spec!r}")
            args[key.strip().lower()] = val.strip()
    def take(*names, default=None):
        vals = [args.pop(n) for n in names if n in args]
        if vals:
            return vals[0]
        if default is None:
            raise HyperparameterError(f"kernel spec {spec!r} is missing {names[0]!r}")
        return default

    try:
        if name == "rbf":
            k = rbf(float(take("sigma")))
        elif name in ("poly", "polynomial"):
            k = polynomial(int(take("degree")), float(take("c", "offset", default=1)))
        elif name == "linear":
            k = linear()
        elif name in ("ssk", "string-subsequence"):
            k = string_subsequence(
                int(take("p", default=3)),
                float(take("lambda", "lam", default=0.8)),
                bool(int(take("norm", "normalized", default=1))),
            )
        else:
            raise HyperparameterError(f"unknown kernel family in spec {spec!r}")
    except ValueError as exc:
        raise HyperparameterError(f"kernel spec {spec!r}: {exc}") from None
    if args:
        raise HyperparameterError(f"kernel spec {spec!r} has unknown parameters {sorted(args)}")
    return k


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------


def as_sample(data) -> np.ndarray:
    """Normalise a sample to a float array (n,) / (n, d) or an object array of str."""
    if isinstance(data, np.ndarray) and data.dtype == object:
        return data
    if isinstance(data, (list, tuple)) and any(isinstance(v, str) for v in data):
        if not all(isinstance(v, str) for v in data):
            raise DomainMismatchError("sample mixes strings and non-strings")
        out = np.empty(len(data), dtype=object)
        out[:] = data
        return out
    if isinstance(data, np.ndarray) and data.dtype.kind in ("U", "S"):
        out = np.empty(data.shape[0], dtype=object)
        out[:] = [str(s) for s in data]
        return out
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim > 2:
        raise ShapeError(f"sample must be 1-D or 2-D, got shape {arr.shape}")
    return arr


def is_string_sample(sample: np.ndarray) -> bool:
    return sample.dtype == object


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def ssk_eval(s: str, t: str, p: int, lam: float, normalized: bool = False) -> float:
    """Fixed-length subsequence kernel between two strings.

    Counts common length-``p`` subsequences, each weighted by ``lam`` to the
    power of its index span in both strings.  If ``p`` exceeds either string
    length the value is 0 (not an error).  The normalised variant divides by
    ``sqrt(k(s,s) k(t,t))`` with 0/0 defined as 0; identical strings with a
    non-zero self-kernel normalise to exactly 1.
    """
    if not (isinstance(s, str) and isinstance(t, str)):
        raise DomainMismatchError("subsequence kernel is defined on strings")
    if int(p) != p or p < 1:
        raise HyperparameterError("subsequence length p must be an integer >= 1")
    if not 0 < lam <= 1:
        raise HyperparameterError("decay lam must lie in (0, 1]")
    p = int(p)
    if min(len(s), len(t)) < p:
        return 0.0
    codes, lens = _ssk_py.encode_strings([s, t])
    raw = float(_ssk_impl.gram_codes(codes[:1], lens[:1], codes[1:], lens[1:], p, lam, False)[0, 0])
    if not normalized:
        return raw
    if s == t:
        return 1.0 if raw > 0 else 0.0
    selfs = _ssk_impl.self_values(codes, lens, p, lam)
    denom = float(np.sqrt(selfs[0]) * np.sqrt(selfs[1]))
    return raw / denom if denom > 0 else 0.0


def kernel_eval(k: Kernel, x, y) -> float:
    """Evaluate ``k(x, y)`` on a single pair of points."""
    if k.is_string:
        if not (isinstance(x, str) and isinstance(y, str)):
            raise DomainMismatchError(f"{k.family} kernel expects string points")
        return ssk_eval(x, y, k.params["p"], k.params["lam"], k.params["normalized"])
    if isinstance(x, str) or isinstance(y, str):
        raise DomainMismatchError(f"{k.family} kernel expects numeric points")
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    if xv.shape != yv.shape:
        raise ShapeError(f"point dimensions differ: {xv.shape} vs {yv.shape}")
    if k.family == "rbf":
        sigma = k.params["sigma"]
        return float(np.exp(-np.sum((xv - yv) ** 2) / (2.0 * sigma * sigma)))
    dot = float(xv @ yv)
    if k.family == "linear":
        return dot
    return float((dot + k.params["offset"]) ** k.params["degree"])


def _numeric_gram(k: Kernel, xs: np.ndarray, ys: np.ndarray, symmetric: bool) -> np.ndarray:
    x = xs.reshape(xs.shape[0], -1)
    y = ys.reshape(ys.shape[0], -1)
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"point dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    if k.family == "rbf":
        sigma = k.params["sigma"]
        if x.shape[1] == 1:
            d2 = (x[:, 0][:, None] - y[:, 0][None, :]) ** 2
        else:
            d2 = np.sum(x * x, axis=1)[:, None] + np.sum(y * y, axis=1)[None, :] - 2.0 * (x @ y.T)
            np.maximum(d2, 0.0, out=d2)
        out = np.exp(-d2 / (2.0 * sigma * sigma))
    else:
        out = x @ y.T
        if k.family == "polynomial":
            out = (out + k.params["offset"]) ** k.params["degree"]
    if symmetric:
        lower = np.tril(out)
        out = lower + np.tril(out, -1).T
    return out


def _string_gram(k: Kernel, xs: np.ndarray, ys: np.ndarray, symmetric: bool) -> np.ndarray:
    p, lam = k.params["p"], k.params["lam"]
    x_codes, x_len = _ssk_py.encode_strings(list(xs))
    if symmetric:
        y_codes, y_len = x_codes, x_len
    else:
        y_codes, y_len = _ssk_py.encode_strings(list(ys))
    raw = _ssk_impl.gram_codes(x_codes, x_len, y_codes, y_len, p, lam, symmetric)
    if not k.params["normalized"]:
        return raw
    sx = np.sqrt(np.maximum(_ssk_impl.self_values(x_codes, x_len, p, lam), 0.0))
    sy = sx if symmetric else np.sqrt(np.maximum(_ssk_impl.self_values(y_codes, y_len, p, lam), 0.0))
    denom = sx[:, None] * sy[None, :]
    out = np.divide(raw, denom, out=np.zeros_like(raw), where=denom > 0)
    np.minimum(out, 1.0, out=out)
    if symmetric:
        np.fill_diagonal(out, np.where(sx > 0, 1.0, 0.0))
    return out


def gram(k: Kernel, xs, ys) -> np.ndarray:
    """Gram matrix with entry (i, j) = k(xs[i], ys[j]).

    When ``xs`` and ``ys`` are the same sample the matrix is filled once per
    unordered pair, so it comes out exactly symmetric.
    """
    xs = as_sample(xs)
    ys = as_sample(ys)
    if len(xs) == 0 or len(ys) == 0:
        return np.zeros((len(xs), len(ys)))
    if is_string_sample(xs) != k.is_string or is_string_sample(ys) != k.is_string:
        raise DomainMismatchError(
            f"{k.family} kernel cannot evaluate "
            f"{'string' if is_string_sample(xs) or is_string_sample(ys) else 'numeric'} points"
        )
    symmetric = xs is ys or (xs.shape == ys.shape and bool(np.all(xs == ys)))
    if k.is_string:
        return _string_gram(k, xs, ys, symmetric)
    return _numeric_gram(k, xs, ys, symmetric)


# ---------------------------------------------------------------------------
# Aggregated Gram matrix over paired samples
# ---------------------------------------------------------------------------


@dataclass
class AggregatedGram:
    """The 2n x 2n kernel matrix [Kxx Kxy; Kyx Kyy] over paired samples.

    The Cholesky factor is computed lazily on first use and cached together
    with the jitter that made the factorisation succeed.
    """

    n: int
    entries: np.ndarray
    _chol: CholeskyFactor | None = None

    @property
    def kxx(self) -> np.ndarray:
        return self.entries[: self.n, : self.n]

    @property
    def kxy(self) -> np.ndarray:
        return self.entries[: self.n, self.n :]

    @property
    def kyy(self) -> np.ndarray:
        return self.entries[self.n :, self.n :]

    def chol(self) -> CholeskyFactor:
        if self._chol is None:
            self._chol = cholesky_psd(self.entries)
        return self._chol

    @classmethod
    def from_pooled(
        cls, pooled: np.ndarray, x_idx: np.ndarray, y_idx: np.ndarray
    ) -> "AggregatedGram":
        """Slice an aggregated matrix out of a precomputed pooled Gram matrix."""
        if len(x_idx) != len(y_idx):
            raise ShapeError("x and y index sets must have equal size")
        idx = np.concatenate([np.asarray(x_idx, dtype=np.intp), np.asarray(y_idx, dtype=np.intp)])
        return cls(n=len(x_idx), entries=pooled[np.ix_(idx, idx)])


def aggregated_gram(k: Kernel, xs, ys) -> AggregatedGram:
    """Assemble the aggregated Gram matrix for equal-size samples xs, ys."""
    xs = as_sample(xs)
    ys = as_sample(ys)
    if len(xs) != len(ys) or len(xs) == 0:
        raise ShapeError(f"need equal non-empty samples, got {len(xs)} and {len(ys)}")
    n = len(xs)
    entries = np.empty((2 * n, 2 * n))
    entries[:n, :n] = gram(k, xs, xs)
    entries[n:, n:] = gram(k, ys, ys)
    kxy = gram(k, xs, ys)
    entries[:n, n:] = kxy
    entries[n:, :n] = kxy.T
    return AggregatedGram(n=n, entries=entries)
