"""Exact rational linear algebra: sparse matrices and graded complexes.

Everything here works over :class:`fractions.Fraction`; nothing is ever
rounded.  Complexes are stored with a single cohomological indexing
internally; chain complexes are kept with negated degrees and a direction
flag so that one homology routine serves both.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

__all__ = [
    "NotAComplex",
    "SparseMatrix",
    "GradedComplex",
    "rank",
    "homology_dims",
    "dualize_complex",
    "euler_characteristic",
    "parse_scalar",
]


class NotAComplex(ValueError):
    """Raised when a composite of consecutive differentials is nonzero."""


def parse_scalar(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class SparseMatrix:
    """A ``rows x cols`` matrix with exact rational entries.

    Only nonzero entries are stored; duplicate keys are summed on
    construction.
    """

    rows: int
    cols: int
    entries: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[tuple[int, int], Fraction] = {}
        for (r, c), v in dict(self.entries).items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
            v = parse_scalar(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_triples(cls, rows: int, cols: int, triples: Iterable) -> "SparseMatrix":
        acc: dict[tuple[int, int], Fraction] = {}
        for r, c, v in triples:
            acc[(r, c)] = acc.get((r, c), Fraction(0)) + parse_scalar(v)
        return cls(rows, cols, acc)

    @classmethod
    def from_dense(cls, data) -> "SparseMatrix":
        data = [list(row) for row in data]
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, {(i, j): parse_scalar(x) for i, row in enumerate(data)
                                for j, x in enumerate(row) if x})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    T = property(transpose)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: dict[int, list[tuple[int, Fraction]]] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc: dict[tuple[int, int], Fraction] = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                acc[(r, c)] = acc.get((r, c), Fraction(0)) + v * w
        return SparseMatrix(self.rows, other.cols, acc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def triples(self) -> list[list]:
        return [[r, c, _fmt(v)] for (r, c), v in sorted(self.entries.items())]

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _integer_rows(m: SparseMatrix) -> list[dict[int, int]]:
    rows: list[dict[int, Fraction]] = [dict() for _ in range(m.rows)]
    for (r, c), v in m.entries.items():
        rows[r][c] = v
    out = []
    for row in rows:
        if not row:
            continue
        den = 1
        for v in row.values():
            den = den * v.denominator // gcd(den, v.denominator)
        out.append({c: int(v * den) for c, v in row.items()})
    return out


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    return {c: v // g for c, v in row.items()} if g > 1 else row


def rank(m: SparseMatrix) -> int:
    """Rank over Q by fraction-free sparse elimination.

    Rows are cleared to integers, each elimination step is a
    cross-multiplication followed by division by the row content, so
    coefficients stay small at the sizes used here.
    """
    if m.rows > m.cols:
        m = m.transpose()
    pivots: dict[int, dict[int, int]] = {}
    # shorter rows first keeps fill-in down
    work = sorted(_integer_rows(m), key=len)
    for row in work:
        while row:
            # pivot on the leading column; among equal columns prefer the
            # stored pivot, else take the smallest-magnitude leading entry
            col = min(row)
            piv = pivots.get(col)
            if piv is None:
                pivots[col] = _primitive(row)
                break
            a, b = piv[col], row[col]
            new = {}
            for c in set(row) | set(piv):
                v = a * row.get(c, 0) - b * piv.get(c, 0)
                if v:
                    new[c] = v
            row = _primitive(new)
    return len(pivots)


def _composite_zero(a: SparseMatrix, b: SparseMatrix) -> bool:
    return (b @ a).is_zero()


class GradedComplex:
    """A finite graded complex of Q-vector spaces with explicit differentials.

    ``dims`` and ``diffs`` are keyed by the user-facing degree.  For a chain
    complex ``diffs[k]`` maps degree ``k`` to ``k-1``; for a cochain complex
    it maps ``k`` to ``k+1``.  Missing degrees are zero.
    """

    __slots__ = ("direction", "_coh_dims", "_coh_diffs")

    def __init__(self, dims: Mapping[int, int], diffs: Mapping[int, SparseMatrix] | None = None,
                 direction: str = "chain", check: bool = True):
        if direction not in ("chain", "cochain"):
            raise ValueError(f"direction must be chain or cochain, got {direction!r}")
        self.direction = direction
        sgn = self._sign
        self._coh_dims = {sgn * int(k): int(n) for k, n in dims.items() if n}
        self._coh_diffs: dict[int, SparseMatrix] = {}
        for k, mat in (diffs or {}).items():
            k = int(k)
            src, tgt = sgn * k, sgn * k + 1
            expected = (self._coh_dims.get(tgt, 0), self._coh_dims.get(src, 0))
            if mat.shape != expected:
                raise ValueError(f"differential out of degree {k} has shape {mat.shape}, expected {expected}")
            if not mat.is_zero():
                self._coh_diffs[src] = mat
        if check:
            self.check()

    @property
    def _sign(self) -> int:
        return -1 if self.direction == "chain" else 1

    @classmethod
    def chain(cls, dims, diffs=None, **kw) -> "GradedComplex":
        return cls(dims, diffs, direction="chain", **kw)

    @classmethod
    def cochain(cls, dims, diffs=None, **kw) -> "GradedComplex":
        return cls(dims, diffs, direction="cochain", **kw)

    @property
    def dims(self) -> dict[int, int]:
        return {self._sign * k: n for k, n in sorted(self._coh_dims.items())}

    def dim(self, degree: int) -> int:
        return self._coh_dims.get(self._sign * degree, 0)

    def differential(self, degree: int) -> SparseMatrix:
        """Differential leaving ``degree`` (user-facing indexing)."""
        src = self._sign * degree
        mat = self._coh_diffs.get(src)
        if mat is None:
            return SparseMatrix.zero(self._coh_dims.get(src + 1, 0), self._coh_dims.get(src, 0))
        return mat

    @property
    def diffs(self) -> dict[int, SparseMatrix]:
        return {self._sign * k: m for k, m in sorted(self._coh_diffs.items())}

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def check(self) -> None:
        for k, d in self._coh_diffs.items():
            nxt = self._coh_diffs.get(k + 1)
            if nxt is not None and not _composite_zero(d, nxt):
                raise NotAComplex(f"d∘d != 0 leaving cohomological degree {k}")

    def is_zero(self) -> bool:
        return not self._coh_dims

    def __repr__(self):
        return f"GradedComplex({self.direction}, dims={self.dims})"

    def to_json(self) -> dict:
        return {
            "direction": self.direction,
            "dims": {str(k): n for k, n in self.dims.items()},
            "diff": {str(k): m.triples() for k, m in self.diffs.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "GradedComplex":
        direction = data.get("direction", "chain")
        dims = {int(k): int(v) for k, v in data.get("dims", {}).items()}
        step = -1 if direction == "chain" else 1
        diffs = {}
        for k, triples in data.get("diff", {}).items():
            k = int(k)
            diffs[k] = SparseMatrix.from_triples(dims.get(k + step, 0), dims.get(k, 0), triples)
        return cls(dims, diffs, direction=direction)


def homology_dims(c: GradedComplex) -> dict[int, int]:
    """Dimension of ker/im in every degree of ``c`` (zeros omitted)."""
    c.check()
    out = {}
    for k, n in c._coh_dims.items():
        out_rank = rank(c._coh_diffs[k]) if k in c._coh_diffs else 0
        in_rank = rank(c._coh_diffs[k - 1]) if (k - 1) in c._coh_diffs else 0
        h = n - out_rank - in_rank
        if h:
            out[c._sign * k] = h
    return dict(sorted(out.items()))


def euler_characteristic(dims: Mapping[int, int]) -> int:
    return sum((-1) ** (k % 2) * n for k, n in dims.items())


def dualize_complex(c: GradedComplex) -> GradedComplex:
    """The functor V -> V^vee: chain <-> cochain, transposed differentials.

    ``(V^vee)^i = (V_i)^*`` so degrees are preserved and the differential
    into degree ``i`` becomes the transpose of the one out of it.
    """
    target = "cochain" if c.direction == "chain" else "chain"
    step = -1 if c.direction == "chain" else 1
    diffs = {}
    for k, m in c.diffs.items():
        # d: C_k -> C_{k+step}; its transpose leaves degree k+step
        diffs[k + step] = m.transpose()
    return GradedComplex(c.dims, diffs, direction=target, check=False)
