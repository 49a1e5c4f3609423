"""Periodic grids, continuum-normalised discrete Fourier transforms, field files.

Grid points along an axis with ``N`` points and period ``L`` sit at
``y_j = j * L / N`` for ``j = 0..N-1``.  Mode ``m`` carries the angular
frequency ``eta_m = 2*pi*wrap(m)/L`` where ``wrap`` maps into ``(-N/2, N/2]``.

Transforms are Riemann-sum normalised so that coefficients approximate the
continuum transform ``fhat(eta) = int f(y) exp(-i y.eta) dy`` and the inverse
mirrors ``f(y) = (2 pi)^-n int exp(i y.eta) fhat(eta) d eta``.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import StructuralError

__all__ = [
    "PeriodicField",
    "FracParams",
    "forward_transform",
    "inverse_transform",
    "mode_frequencies",
    "frequency_norms",
    "wrap_indices",
    "fft_workers",
    "save_field",
    "load_field",
]


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``FRACLAP_THREADS`` (0 = auto)."""
    raw = os.environ.get("FRACLAP_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise StructuralError(f"FRACLAP_THREADS must be an integer, got {raw!r}", contract="cli")
    if n < 0:
        raise StructuralError(f"FRACLAP_THREADS must be >= 0, got {n}", contract="cli")
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class PeriodicField:
    """Complex samples on a uniform periodic grid.

    ``values`` may be passed flat (row-major) or already shaped; it is stored
    as a read-only complex128 array of shape ``dims``.
    """

    dims: tuple[int, ...]
    box_lengths: tuple[float, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        boxes = tuple(float(b) for b in self.box_lengths)
        if not dims:
            raise StructuralError("dims must be non-empty")
        if len(boxes) != len(dims):
            raise StructuralError(f"{len(dims)} dims but {len(boxes)} box lengths")
        if any(d < 2 for d in dims):
            raise StructuralError(f"every axis needs at least 2 points, got dims={dims}")
        if any(not (b > 0 and math.isfinite(b)) for b in boxes):
            raise StructuralError(f"box lengths must be finite and positive, got {boxes}")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.size != math.prod(dims):
            raise StructuralError(
                f"values has {vals.size} entries, dims {dims} need {math.prod(dims)}"
            )
        vals = np.array(vals.reshape(dims), dtype=np.complex128, order="C")
        vals.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "box_lengths", boxes)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.box_lengths, self.dims))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def frequency_cell_volume(self) -> float:
        return math.prod(2 * math.pi / L for L in self.box_lengths)

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays ``y_j = j*h`` per axis."""
        return np.meshgrid(
            *[np.arange(N) * h for N, h in zip(self.dims, self.spacing)],
            indexing="ij",
            sparse=True,
        )

    def with_values(self, values) -> "PeriodicField":
        return PeriodicField(self.dims, self.box_lengths, values)

    def norm(self) -> float:
        """Continuum L2 norm (Riemann sum)."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_volume))

    @classmethod
    def from_function(cls, func, dims: Sequence[int], box_lengths: Sequence[float]) -> "PeriodicField":
        """Sample ``func(*coords)`` on the grid; ``func`` receives broadcastable arrays."""
        proto = cls(tuple(dims), tuple(box_lengths), np.zeros(math.prod(dims)))
        vals = np.broadcast_to(func(*proto.coordinates()), proto.dims)
        return proto.with_values(vals)


@dataclass(frozen=True)
class FracParams:
    """The triple (n, gamma, k): dimension, fractional order, singular-set dimension."""

    n: int
    gamma: float
    k: int | None = None

    def __post_init__(self):
        from .errors import DomainError

        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}")
        if self.k is None:
            if not (0 < self.gamma <= self.n / 2):
                raise DomainError(f"gamma must lie in (0, n/2] = (0, {self.n / 2}], got {self.gamma}")
        elif int(self.k) != self.k or not (0 <= self.k < self.n):
            raise DomainError(f"k must be an integer in [0, n), got {self.k}")


def _check(field_: PeriodicField) -> None:
    if not isinstance(field_, PeriodicField):
        raise StructuralError(f"expected PeriodicField, got {type(field_).__name__}")


def forward_transform(field_: PeriodicField) -> PeriodicField:
    """Mode coefficients ``fhat(eta_m) = sum_y f(y) exp(-i y.eta_m) h^n``."""
    _check(field_)
    coeffs = scipy.fft.fftn(field_.values, workers=fft_workers()) * field_.cell_volume
    return field_.with_values(coeffs)


def inverse_transform(coeffs: PeriodicField) -> PeriodicField:
    """Inverse of :func:`forward_transform`: ``(2 pi)^-n sum_m e^{i y.eta_m} fhat_m d_eta^n``."""
    _check(coeffs)
    # (2 pi)^-n * d_eta^n * prod(N) == 1 / h^n; ifftn already divides by prod(N)
    vals = scipy.fft.ifftn(coeffs.values, workers=fft_workers()) / coeffs.cell_volume
    return coeffs.with_values(vals)


def wrap_indices(N: int) -> np.ndarray:
    """Mode numbers in the symmetric range (-N/2, N/2], Nyquist mode positive."""
    m = np.arange(N)
    return np.where(m <= N // 2, m, m - N)


def mode_frequencies(dims: Sequence[int], box_lengths: Sequence[float]) -> list[np.ndarray]:
    """Per-axis angular frequencies ``2*pi*wrap(m)/L``."""
    if len(dims) != len(box_lengths):
        raise StructuralError(f"{len(dims)} dims but {len(box_lengths)} box lengths")
    return [2 * np.pi * wrap_indices(int(N)) / float(L) for N, L in zip(dims, box_lengths)]


def frequency_norms(dims: Sequence[int], box_lengths: Sequence[float]) -> np.ndarray:
    """Euclidean ``|eta_m|`` on the full mode grid."""
    axes = mode_frequencies(dims, box_lengths)
    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    sq = sum(g * g for g in grids)
    return np.sqrt(np.broadcast_to(sq, tuple(dims)))


# -- field files ------------------------------------------------------------

_HEADER_KEYS = ("dims", "box_lengths", "dtype", "layout")


def _header(field_: PeriodicField) -> dict:
    return {
        "dims": list(field_.dims),
        "box_lengths": list(field_.box_lengths),
        "dtype": "c128",
        "layout": "row-major",
    }


def _pack(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values.ravel()).astype("<c16").tobytes()


def _unpack(raw: bytes, dims) -> np.ndarray:
    count = math.prod(dims)
    if len(raw) != 16 * count:
        raise StructuralError(f"field payload has {len(raw)} bytes, expected {16 * count}")
    return np.frombuffer(raw, dtype="<c16").reshape(dims)


def save_field(field_: PeriodicField, path, fmt: str | None = None) -> Path:
    """Write a field file.

    ``fmt`` is ``"json"`` (header plus inline base64 payload), ``"raw"``
    (header plus a sibling ``.bin`` file of little-endian re/im float64 pairs)
    or ``"csv"`` (one row per grid point: index tuple, re, im).  By default the
    suffix decides: ``.csv`` gives CSV, anything else inline JSON.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    head = _header(field_)
    if fmt == "json":
        head["data"] = base64.b64encode(_pack(field_.values)).decode("ascii")
        path.write_text(json.dumps(head, indent=1) + "\n")
    elif fmt == "raw":
        bin_path = path.with_suffix(".bin")
        bin_path.write_bytes(_pack(field_.values))
        head["data_file"] = bin_path.name
        path.write_text(json.dumps(head, indent=1) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + json.dumps(head) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"i{a}" for a in range(field_.ndim)] + ["re", "im"])
        for idx in np.ndindex(*field_.dims):
            v = field_.values[idx]
            writer.writerow(list(idx) + [repr(float(v.real)), repr(float(v.imag))])
        path.write_text(buf.getvalue())
    else:
        raise StructuralError(f"unknown field format {fmt!r}")
    return path


def _validate_header(head: dict) -> tuple[tuple[int, ...], tuple[float, ...]]:
    missing = [k for k in _HEADER_KEYS if k not in head]
    if missing:
        raise StructuralError(f"field header missing keys {missing}")
    if head["dtype"] != "c128" or head["layout"] != "row-major":
        raise StructuralError(
            f"unsupported field encoding dtype={head['dtype']!r} layout={head['layout']!r}"
        )
    return tuple(int(d) for d in head["dims"]), tuple(float(b) for b in head["box_lengths"])


def load_field(path) -> PeriodicField:
    """Read any file written by :func:`save_field`."""
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise StructuralError(f"cannot read field file {path}: {exc}")
    if text.startswith("#"):
        first, _, body = text.partition("\n")
        try:
            head = json.loads(first[1:])
        except json.JSONDecodeError as exc:
            raise StructuralError(f"bad CSV field header in {path}: {exc}")
        dims, boxes = _validate_header(head)
        vals = np.full(dims, np.nan, dtype=np.complex128)
        rows = list(csv.reader(io.StringIO(body)))
        if not rows or len(rows[0]) != len(dims) + 2:
            raise StructuralError(f"CSV field {path} has a malformed column header")
        try:
            for row in rows[1:]:
                idx = tuple(int(v) for v in row[: len(dims)])
                vals[idx] = complex(float(row[-2]), float(row[-1]))
        except (ValueError, IndexError) as exc:
            raise StructuralError(f"malformed CSV row in {path}: {exc}")
        if np.isnan(vals).any():
            raise StructuralError(f"CSV field {path} does not cover every grid point")
        return PeriodicField(dims, boxes, vals)
    try:
        head = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"field file {path} is neither JSON nor CSV: {exc}")
    dims, boxes = _validate_header(head)
    if "data" in head:
        try:
            raw = base64.b64decode(head["data"], validate=True)
        except ValueError as exc:
            raise StructuralError(f"bad base64 payload in {path}: {exc}")
    elif "data_file" in head:
        bin_path = path.parent / head["data_file"]
        try:
            raw = bin_path.read_bytes()
        except OSError as exc:
            raise StructuralError(f"cannot read payload {bin_path}: {exc}")
    else:
        raise StructuralError(f"field file {path} has neither 'data' nor 'data_file'")
    return PeriodicField(dims, boxes, _unpack(raw, dims))
