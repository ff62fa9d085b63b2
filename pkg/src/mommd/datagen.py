"""Synthetic samples, adversarial contamination, and splice-file ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, HyperparameterError, ShapeError
from .kernels import as_sample, is_string_sample

SPLICE_LABELS = ("EI", "IE", "N")
SPLICE_ALPHABET = frozenset("ACGTDNSR")
SPLICE_LENGTH = 60


@dataclass(frozen=True)
class ContaminationSpec:
    """Replace the last ``n_corrupt`` entries of each sample by a constant."""

    n_corrupt: int
    x_value: float = 2000.0
    y_value: float = 4000.0

    def __post_init__(self):
        if self.n_corrupt < 0:
            raise HyperparameterError("n_corrupt must be >= 0")


@dataclass(frozen=True)
class SpliceRecord:
    label: str
    id: str
    sequence: str


def sample_gaussian(m: float, s: float, n: int, seed) -> np.ndarray:
    """n i.i.d. draws from N(m, s^2) using a deterministic seeded generator."""
    if not s > 0:
        raise HyperparameterError("standard deviation must be positive")
    if n < 0:
        raise HyperparameterError("sample size must be >= 0")
    return np.random.default_rng(seed).normal(m, s, size=n)


def sample_pareto(alpha: float, n: int, seed) -> np.ndarray:
    """n i.i.d. Pareto(alpha) draws on [1, inf) via the inverse CDF."""
    if not alpha > 0:
        raise HyperparameterError("Pareto shape alpha must be positive")
    if n < 0:
        raise HyperparameterError("sample size must be >= 0")
    u = np.random.default_rng(seed).random(size=n)
    return (1.0 - u) ** (-1.0 / alpha)


def contaminate(xs, ys, spec: ContaminationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Overwrite the trailing ``spec.n_corrupt`` entries of both samples.

    Returns fresh arrays; the inputs are left untouched.
    """
    xs = np.array(as_sample(xs), copy=True)
    ys = np.array(as_sample(ys), copy=True)
    if len(xs) != len(ys):
        raise ShapeError(f"samples must have equal size, got {len(xs)} and {len(ys)}")
    if spec.n_corrupt > len(xs):
        raise ShapeError(f"cannot corrupt {spec.n_corrupt} of {len(xs)} entries")
    if spec.n_corrupt:
        xs[len(xs) - spec.n_corrupt :] = spec.x_value
        ys[len(ys) - spec.n_corrupt :] = spec.y_value
    return xs, ys


# ---------------------------------------------------------------------------
# UCI splice-junction file format
# ---------------------------------------------------------------------------


def load_splice(path, diagnostics: list[str] | None = None) -> list[SpliceRecord]:
    """Parse a splice-junction file: one ``label, id, sequence`` record per line.

    Labels are normalised to EI/IE/N, sequences uppercased with all whitespace
    removed.  Malformed lines (wrong field count, unknown label, bad alphabet,
    or a sequence that is not exactly 60 characters) are skipped; a message
    per bad line is appended to ``diagnostics`` when a list is supplied.

    Raises:
        DataFormatError: the file cannot be read at all.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read splice file {path}: {exc}") from exc

    def complain(line_no: int, msg: str) -> None:
        if diagnostics is not None:
            diagnostics.append(f"line {line_no}: {msg}")

    records: list[SpliceRecord] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            complain(line_no, f"expected 3 comma-separated fields, got {len(fields)}")
            continue
        label = fields[0].strip().upper()
        ident = fields[1].strip()
        sequence = "".join(fields[2].split()).upper()
        if label not in SPLICE_LABELS:
            complain(line_no, f"unknown label {fields[0].strip()!r}")
            continue
        if len(sequence) != SPLICE_LENGTH:
            complain(line_no, f"sequence length {len(sequence)} != {SPLICE_LENGTH}")
            continue
        bad = set(sequence) - SPLICE_ALPHABET
        if bad:
            complain(line_no, f"unexpected symbols {''.join(sorted(bad))!r}")
            continue
        records.append(SpliceRecord(label=label, id=ident, sequence=sequence))
    return records


def splice_sequences_by_label(records: list[SpliceRecord]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for rec in records:
        out.setdefault(rec.label, []).append(rec.sequence)
    return out


def write_synthetic_splice(path, n_per_class: int = 766, seed: int = 0) -> None:
    """Write a synthetic file in the splice format, for offline testing.

    EI sequences carry a noisy donor-like motif, IE a pyrimidine-rich
    acceptor-like stretch, N none; classes are separable but this is not the
    real dataset.
    """
    rng = np.random.default_rng(seed)
    bases = np.array(list("ACGT"))
    lines = []
    for label in ("EI", "IE", "N"):
        for i in range(n_per_class):
            seq = rng.choice(bases, size=SPLICE_LENGTH)
            if label == "EI":
                for off, ch in enumerate("CAGGTAAGT"):
                    if rng.random() < 0.8:
                        seq[26 + off] = ch
            elif label == "IE":
                pyr = rng.choice(np.array(list("CT")), size=12)
                keep = rng.random(12) < 0.8
                seq[16:28][keep] = pyr[keep]
                if rng.random() < 0.9:
                    seq[28] = "A"
                    seq[29] = "G"
            lines.append(f"{label},SYN-{label}-{i + 1},{''.join(seq)}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Single-column sample CSV
# ---------------------------------------------------------------------------


def save_sample_csv(path, sample) -> None:
    """Write a sample as single-column CSV, header "value" or "sequence"."""
    sample = as_sample(sample)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if is_string_sample(sample):
            writer.writerow(["sequence"])
            for s in sample:
                writer.writerow([s])
        else:
            if sample.ndim != 1:
                raise ShapeError("only scalar samples serialise to single-column CSV")
            writer.writerow(["value"])
            for v in sample:
                writer.writerow([repr(float(v))])


def load_sample_csv(path) -> np.ndarray:
    """Read a sample written by :func:`save_sample_csv`."""
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataFormatError(f"cannot read sample file {path}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: empty sample file (missing header)")
    header = [h.strip().lower() for h in rows[0]]
    if header == ["value"]:
        try:
            return np.array([float(row[0]) for row in rows[1:]])
        except ValueError as exc:
            raise DataFormatError(f"{path}: non-numeric value ({exc})") from None
    if header == ["sequence"]:
        out = np.empty(len(rows) - 1, dtype=object)
        out[:] = [row[0] for row in rows[1:]]
        return out
    raise DataFormatError(f"{path}: expected header 'value' or 'sequence', got {rows[0]}")
