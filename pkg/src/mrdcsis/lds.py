"""
Low-discrepancy target point sets on the unit hypercube.

The multivariate rank map sends a sample onto a fixed set of ``n`` points
that spread evenly over ``(0, 1]^d``. For ``d = 1`` that set is the grid
``{1/n, ..., n/n}``; for ``d >= 2`` it is the first ``n`` nonzero points of
an unscrambled Sobol' sequence in Gray-code order.

Direction numbers follow the Joe & Kuo text layout (``new-joe-kuo-6.*``):
a header line, then one row ``d s a m_1 ... m_s`` per dimension ``d >= 2``.
A table covering dimensions up to 64 ships with the package; larger tables
can be loaded from a file.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import IO, Iterable, Union

import numpy as np

from .errors import CapabilityError, DomainError, ParseError

#: Bits of fixed-point precision; coordinates are ``k / 2**32``.
BITS = 32
_SCALE = 2.0**-BITS
MAX_POINTS = 2**BITS - 1

_BUILTIN_TABLE = "new-joe-kuo-6.64"


@dataclass(frozen=True)
class DirectionRecord:
    """Primitive polynomial and initial direction integers for one dimension."""

    degree: int
    coeffs: int
    m: tuple

    def validate(self, dim: int, lineno: int | None = None) -> None:
        where = f" (line {lineno})" if lineno is not None else ""
        if self.degree < 1:
            raise ParseError(f"dimension {dim}{where}: degree must be >= 1, got {self.degree}")
        if len(self.m) != self.degree:
            raise ParseError(
                f"dimension {dim}{where}: expected {self.degree} direction integers, "
                f"got {len(self.m)}"
            )
        if not 0 <= self.coeffs < 2 ** (self.degree - 1):
            raise ParseError(
                f"dimension {dim}{where}: coefficient bits {self.coeffs} out of range "
                f"for degree {self.degree}"
            )
        for k, mk in enumerate(self.m, start=1):
            if mk % 2 == 0:
                raise DomainError(f"dimension {dim}{where}: m_{k} = {mk} is not odd")
            if not 0 < mk < 2**k:
                raise DomainError(f"dimension {dim}{where}: m_{k} = {mk} must be < 2^{k}")


@dataclass(frozen=True)
class DirectionNumberTable:
    """Direction numbers for dimensions ``2..max_dim``.

    Dimension 1 is implicit (van der Corput: every ``m_k = 1``), so
    ``records[0]`` describes dimension 2.
    """

    records: tuple = ()

    @property
    def max_dim(self) -> int:
        return len(self.records) + 1

    def record(self, dim: int) -> DirectionRecord:
        if dim == 1:
            return DirectionRecord(degree=1, coeffs=0, m=(1,))
        return self.records[dim - 2]

    def direction_integers(self, dim: int) -> np.ndarray:
        """Return ``V_1..V_32`` for dimension ``dim`` as uint32 (1-based dim)."""
        if not 1 <= dim <= self.max_dim:
            raise CapabilityError(
                f"dimension {dim} exceeds direction-number table (max {self.max_dim})"
            )
        v = [0] * (BITS + 1)
        if dim == 1:
            for k in range(1, BITS + 1):
                v[k] = 1 << (BITS - k)
        else:
            rec = self.records[dim - 2]
            s, a = rec.degree, rec.coeffs
            for k in range(1, min(s, BITS) + 1):
                v[k] = rec.m[k - 1] << (BITS - k)
            for k in range(s + 1, BITS + 1):
                val = v[k - s] ^ (v[k - s] >> s)
                for i in range(1, s):
                    if (a >> (s - 1 - i)) & 1:
                        val ^= v[k - i]
                v[k] = val
        return np.array(v[1:], dtype=np.uint32)

    @lru_cache(maxsize=None)
    def direction_matrix(self, d: int) -> np.ndarray:
        """``(d, 32)`` uint32 array of direction integers for dims ``1..d``."""
        out = np.stack([self.direction_integers(k) for k in range(1, d + 1)])
        out.flags.writeable = False
        return out


@dataclass(frozen=True)
class TargetPointSet:
    points: np.ndarray
    generator: str

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _parse_rows(lines: Iterable[str]) -> DirectionNumberTable:
    records = []
    header_seen = False
    expected = 2
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not header_seen:
            header_seen = True
            continue
        fields = line.split()
        try:
            nums = [int(f) for f in fields]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer field in {line!r}") from exc
        if len(nums) < 4:
            raise ParseError(f"line {lineno}: expected 'd s a m_1 ... m_s', got {line!r}")
        dim, s, a, m = nums[0], nums[1], nums[2], tuple(nums[3:])
        if dim != expected:
            raise ParseError(f"line {lineno}: expected dimension {expected}, got {dim}")
        rec = DirectionRecord(degree=s, coeffs=a, m=m)
        rec.validate(dim, lineno)
        records.append(rec)
        expected += 1
    return DirectionNumberTable(records=tuple(records))


def load_direction_numbers(
    source: Union[str, os.PathLike, bytes, IO[bytes], IO[str]],
) -> DirectionNumberTable:
    """Parse a Joe–Kuo direction-number table.

    ``source`` may be a path, raw bytes, or an open binary/text stream.
    """
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("ascii")
        return _parse_rows(io.StringIO(text))
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="ascii") as fh:
            return _parse_rows(fh)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("ascii")
    return _parse_rows(io.StringIO(data))


@lru_cache(maxsize=1)
def builtin_table() -> DirectionNumberTable:
    """The packaged table (dimensions 1..64)."""
    with resources.files("mrdcsis.data").joinpath(_BUILTIN_TABLE).open("rb") as fh:
        return load_direction_numbers(fh)


def sobol_points(n: int, d: int, table: DirectionNumberTable | None = None) -> TargetPointSet:
    """Points ``1..n`` of the Gray-code Sobol' sequence in ``d`` dimensions.

    The origin (index 0) is skipped, so every coordinate lies in ``(0, 1)``.
    Point ``i`` is the XOR of the direction integers selected by the bits of
    ``gray(i) = i ^ (i >> 1)``, which equals the usual incremental recurrence.

    >>> sobol_points(3, 2).points.tolist()
    [[0.5, 0.5], [0.75, 0.25], [0.25, 0.75]]
    """
    if table is None:
        table = builtin_table()
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if d > table.max_dim:
        raise CapabilityError(
            f"dimension {d} exceeds direction-number table (max {table.max_dim}); "
            "load a larger table"
        )
    if not 1 <= n <= MAX_POINTS:
        raise DomainError(f"n must be in [1, {MAX_POINTS}], got {n}")

    v = table.direction_matrix(d)  # (d, 32)
    idx = np.arange(1, n + 1, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    acc = np.zeros((n, d), dtype=np.uint32)
    for b in range(BITS):
        bit = ((gray >> np.uint64(b)) & np.uint64(1)).astype(bool)
        if not bit.any():
            break
        acc[bit] ^= v[:, b]
    pts = acc.astype(np.float64) * _SCALE
    pts.flags.writeable = False
    return TargetPointSet(points=pts, generator="sobol")


def grid1d(n: int) -> TargetPointSet:
    """The univariate rank grid ``{1/n, 2/n, ..., 1}`` as an ``(n, 1)`` array."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    pts = (np.arange(1, n + 1, dtype=np.float64) / n).reshape(n, 1)
    pts.flags.writeable = False
    return TargetPointSet(points=pts, generator="grid1d")


def target_points(n: int, d: int, table: DirectionNumberTable | None = None) -> TargetPointSet:
    """``grid1d`` for one dimension, Sobol' otherwise."""
    if d == 1:
        return grid1d(n)
    return sobol_points(n, d, table)
