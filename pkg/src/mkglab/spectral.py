"""Periodic grid, Fourier multipliers and de-aliased products on the 2-torus.

Fields live on ``[0, L)^2`` sampled at ``n x n`` points. Spectral data are the
normalized Fourier coefficients ``c_k`` with ``f(x) = sum_k c_k exp(i k.x)``,
so a single plane wave has a coefficient of exactly one.

Every homogeneous operator of negative order (``D^-1``, ``Delta^-1``, Riesz)
sends the zero mode to zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO, Callable, Sequence

import numpy as np

__all__ = [
    "Grid2D",
    "ScalarField",
    "VectorField",
    "MeanNotZero",
    "apply_multiplier",
    "partial",
    "gradient",
    "divergence",
    "laplacian",
    "riesz",
    "frac_op",
    "inv_laplacian",
    "leray",
    "truncate",
    "dealias_product",
    "l2_norm",
    "dump_field",
    "load_field",
]


class MeanNotZero(ValueError):
    """Raised when an operator defined on mean-zero data receives a nonzero mean."""


@dataclass(frozen=True)
class Grid2D:
    """Square periodic grid with ``n`` modes per axis and period ``length``."""

    n: int
    length: float = 2 * np.pi

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical coordinates ``(x1, x2)``, indexed ``[i1, i2]``."""
        xs = np.arange(self.n) * (self.length / self.n)
        return tuple(np.meshgrid(xs, xs, indexing="ij"))

    @cached_property
    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer mode numbers in ``{-n/2, ..., n/2-1}`` for both axes."""
        m = np.fft.fftfreq(self.n, 1.0 / self.n)
        return tuple(np.meshgrid(m, m, indexing="ij"))

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray]:
        scale = 2 * np.pi / self.length
        m1, m2 = self.modes
        return m1 * scale, m2 * scale

    @cached_property
    def kabs(self) -> np.ndarray:
        k1, k2 = self.k
        return np.hypot(k1, k2)

    @cached_property
    def nonzero(self) -> np.ndarray:
        mask = np.ones((self.n, self.n), dtype=bool)
        mask[0, 0] = False
        return mask

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on the modes kept by the 2/3 rule: ``max(|m1|, |m2|) <= n/3``."""
        m1, m2 = self.modes
        return np.maximum(np.abs(m1), np.abs(m2)) <= self.n / 3

    @cached_property
    def cell_area(self) -> float:
        return (self.length / self.n) ** 2

    def _symbol(self, name: str) -> np.ndarray:
        # Shared symbol tables; zero mode follows the module convention.
        cache = self.__dict__.setdefault("_symbols", {})
        if name not in cache:
            k1, k2 = self.k
            kabs = self.kabs
            with np.errstate(divide="ignore", invalid="ignore"):
                if name == "riesz1":
                    s = np.where(self.nonzero, 1j * k1 / kabs, 0)
                elif name == "riesz2":
                    s = np.where(self.nonzero, 1j * k2 / kabs, 0)
                elif name == "dinv":
                    s = np.where(self.nonzero, 1 / kabs, 0)
                elif name == "lapinv":
                    s = np.where(self.nonzero, -1 / kabs**2, 0)
                elif name == "lap":
                    s = -(kabs**2)
                elif name == "d1":
                    s = 1j * k1
                elif name == "d2":
                    s = 1j * k2
                else:
                    raise KeyError(name)
            s.setflags(write=False)
            cache[name] = s
        return cache[name]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A grid function in physical or spectral representation.

    ``real`` tags fields whose physical values are real; their physical data
    is stored as float64.
    """

    grid: Grid2D
    data: np.ndarray
    spectral: bool = False
    real: bool = False

    def __post_init__(self):
        n = self.grid.n
        data = np.asarray(self.data)
        if data.shape != (n, n):
            raise ValueError(f"expected shape {(n, n)}, got {data.shape}")
        if self.spectral:
            data = data.astype(complex, copy=True)
            if self.real:
                # Keep coefficients consistent with real physical values.
                mirror = np.roll(np.flip(data), shift=(1, 1), axis=(0, 1))
                data = 0.5 * (data + np.conj(mirror))
        elif self.real:
            if np.iscomplexobj(data):
                imag = np.max(np.abs(data.imag), initial=0.0)
                if imag > 1e-10 * max(1.0, float(np.max(np.abs(data.real), initial=0.0))):
                    raise ValueError(f"real-tagged field has imaginary part {imag:.3e}")
            data = np.array(data.real, dtype=float)
        else:
            data = data.astype(complex, copy=True)
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_function(cls, grid: Grid2D, fn: Callable, real: bool = False) -> ScalarField:
        x1, x2 = grid.x
        return cls(grid, np.broadcast_to(fn(x1, x2), (grid.n, grid.n)), real=real)

    @classmethod
    def zeros(cls, grid: Grid2D, real: bool = False) -> ScalarField:
        return cls(grid, np.zeros((grid.n, grid.n)), real=real)

    @classmethod
    def from_coefficients(cls, grid: Grid2D, coeffs: np.ndarray, real: bool = False) -> ScalarField:
        return cls(grid, coeffs, spectral=True, real=real)

    # The other representation is computed once and cached on the instance.
    @cached_property
    def values(self) -> np.ndarray:
        """Physical values (computed if the field is stored spectrally)."""
        if not self.spectral:
            return self.data
        v = np.fft.ifft2(self.data) * self.grid.n**2
        return _frozen(v.real if self.real else v)

    @cached_property
    def coefficients(self) -> np.ndarray:
        if self.spectral:
            return self.data
        return _frozen(np.fft.fft2(self.data) / self.grid.n**2)

    def to_spectral(self) -> ScalarField:
        if self.spectral:
            return self
        out = ScalarField(self.grid, self.coefficients, spectral=True, real=self.real)
        out.__dict__["values"] = self.data
        return out

    def to_physical(self) -> ScalarField:
        if not self.spectral:
            return self
        out = ScalarField(self.grid, self.values, spectral=False, real=self.real)
        out.__dict__["coefficients"] = self.data
        return out

    def _like(self, coeffs: np.ndarray, real: bool | None = None) -> ScalarField:
        """New field from coefficients, in this field's representation."""
        real = self.real if real is None else real
        out = ScalarField(self.grid, coeffs, spectral=True, real=real)
        return out if self.spectral else out.to_physical()

    def conj(self) -> ScalarField:
        if self.real:
            return self
        return ScalarField(self.grid, np.conj(self.values))

    @property
    def re(self) -> ScalarField:
        return ScalarField(self.grid, self.values.real, real=True)

    @property
    def im(self) -> ScalarField:
        return ScalarField(self.grid, np.imag(self.values), real=True)

    def mean(self) -> complex | float:
        c = self.coefficients[0, 0]
        return float(c.real) if self.real else complex(c)

    # Linear combinations only; pointwise products go through dealias_product.
    def _combine(self, other, op) -> ScalarField:
        if isinstance(other, ScalarField):
            _check_same_grid([self, other])
            return ScalarField(self.grid, op(self.values, other.values), real=self.real and other.real)
        if np.isscalar(other):
            real = self.real and np.isrealobj(other)
            return ScalarField(self.grid, op(self.values, other), real=real)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            raise TypeError("use dealias_product for field-field products")
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return self._combine(other, np.divide)

    def __neg__(self):
        return ScalarField(self.grid, -self.values, real=self.real)

    def __repr__(self):
        rep = "spectral" if self.spectral else "physical"
        kind = "real" if self.real else "complex"
        return f"ScalarField(n={self.grid.n}, {rep}, {kind})"


@dataclass(frozen=True, eq=False)
class VectorField:
    """A pair of scalar fields on a common grid."""

    x1: ScalarField
    x2: ScalarField

    def __post_init__(self):
        _check_same_grid([self.x1, self.x2])

    @property
    def grid(self) -> Grid2D:
        return self.x1.grid

    @classmethod
    def zeros(cls, grid: Grid2D) -> VectorField:
        return cls(ScalarField.zeros(grid, real=True), ScalarField.zeros(grid, real=True))

    def __iter__(self):
        return iter((self.x1, self.x2))

    def __getitem__(self, j: int) -> ScalarField:
        """Component by 1-based axis index."""
        return (self.x1, self.x2)[j - 1]

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(self.x1 - other.x1, self.x2 - other.x2)

    def __mul__(self, c) -> VectorField:
        return VectorField(self.x1 * c, self.x2 * c)

    __rmul__ = __mul__

    def __neg__(self) -> VectorField:
        return VectorField(-self.x1, -self.x2)


def _check_same_grid(fields: Sequence[ScalarField]) -> None:
    grids = {f.grid for f in fields}
    if len(grids) != 1:
        raise ValueError(f"fields live on different grids: {sorted(grids, key=repr)}")


def _apply_symbol(f: ScalarField, symbol: np.ndarray, real: bool | None = None) -> ScalarField:
    return f._like(f.coefficients * symbol, real=real)


def apply_multiplier(f: ScalarField, m: Callable, m0: complex) -> ScalarField:
    """Multiply the Fourier coefficients of ``f`` by ``m(k1, k2)``.

    ``m`` is evaluated on the nonzero wavevectors only (as flat arrays); the
    zero-mode value ``m0`` must be given explicitly.
    """
    g = f.grid
    k1, k2 = g.k
    nz = g.nonzero
    values = np.asarray(m(k1[nz], k2[nz]), dtype=complex)
    if not (np.all(np.isfinite(values)) and np.isfinite(m0)):
        raise ValueError("multiplier is not finite on the grid spectrum")
    symbol = np.empty((g.n, g.n), dtype=complex)
    symbol[nz] = values
    symbol[0, 0] = m0
    return _apply_symbol(f, symbol)


def partial(f: ScalarField, j: int) -> ScalarField:
    """Spectral derivative along axis ``j`` (1 or 2)."""
    return _apply_symbol(f, f.grid._symbol(f"d{j}"))


def gradient(f: ScalarField) -> VectorField:
    return VectorField(partial(f, 1), partial(f, 2))


def divergence(X: VectorField) -> ScalarField:
    g = X.grid
    c = X.x1.coefficients * g._symbol("d1") + X.x2.coefficients * g._symbol("d2")
    return X.x1._like(c, real=X.x1.real and X.x2.real)


def laplacian(f: ScalarField) -> ScalarField:
    return _apply_symbol(f, f.grid._symbol("lap"))


def riesz(f: ScalarField, j: int) -> ScalarField:
    """Riesz transform ``R_j`` with symbol ``i k_j / |k|`` (zero at k = 0)."""
    if j not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {j}")
    return _apply_symbol(f, f.grid._symbol(f"riesz{j}"))


def frac_op(f: ScalarField, alpha: float, kind: str = "inhomogeneous") -> ScalarField:
    """``D^alpha`` (symbol ``|k|^alpha``) or ``Lambda^alpha`` (``(1+|k|^2)^(alpha/2)``)."""
    g = f.grid
    if kind == "inhomogeneous":
        symbol = (1 + g.kabs**2) ** (alpha / 2)
    elif kind == "homogeneous":
        if alpha == 0:
            return f
        symbol = np.zeros_like(g.kabs)
        symbol[g.nonzero] = g.kabs[g.nonzero] ** alpha
    else:
        raise ValueError(f"kind must be 'homogeneous' or 'inhomogeneous', got {kind!r}")
    return _apply_symbol(f, symbol)


def inv_laplacian(f: ScalarField, tol: float = 1e-12) -> ScalarField:
    """Zero-mean solution ``u`` of ``Delta u = f``; ``f`` must have zero mean."""
    c = f.coefficients
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[0, 0]) > tol * scale:
        raise MeanNotZero(f"mean of input is {c[0, 0]:.3e}, expected 0")
    return _apply_symbol(f, f.grid._symbol("lapinv"))


def leray(X: VectorField) -> VectorField:
    """Projection ``P X_j = R_k (R_j X_k - R_k X_j)`` onto divergence-free fields."""
    out = []
    for j in (1, 2):
        acc = None
        for k in (1, 2):
            if k == j:
                continue
            inner = riesz(X[k], j) - riesz(X[j], k)
            term = riesz(inner, k)
            acc = term if acc is None else acc + term
        out.append(acc)
    return VectorField(*out)


def truncate(f: ScalarField) -> ScalarField:
    """Zero all modes outside the 2/3-rule band."""
    return f._like(np.where(f.grid.dealias_mask, f.coefficients, 0))


def dealias_product(fs: Sequence[ScalarField]) -> ScalarField:
    """Pointwise product of 2 or 3 fields followed by 2/3-rule truncation.

    Quadratic products of band-limited inputs are alias free; cubic ones keep
    the residual aliasing that folds back into the retained band.
    """
    if len(fs) not in (2, 3):
        raise ValueError(f"expected 2 or 3 factors, got {len(fs)}")
    _check_same_grid(fs)
    prod = fs[0].values
    for f in fs[1:]:
        prod = prod * f.values
    real = all(f.real for f in fs)
    g = fs[0].grid
    c = np.fft.fft2(prod) / g.n**2
    c[~g.dealias_mask] = 0
    return ScalarField(g, c, spectral=True, real=real).to_physical()


def l2_norm(f: ScalarField) -> float:
    """Discrete ``L^2`` norm (grid-sum quadrature)."""
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_area))


# -- field dump format -------------------------------------------------------
# One JSON header line, then little-endian float64 row-major payload:
# n*n reals for a real-tagged physical field, otherwise n*n (re, im) pairs.


def dump_field(f: ScalarField, fp: BinaryIO | str, name: str = "") -> None:
    header = {
        "n": f.grid.n,
        "length": f.grid.length,
        "representation": "spectral" if f.spectral else "physical",
        "real_tagged": f.real,
        "name": name,
    }
    if isinstance(fp, str):
        with open(fp, "wb") as fh:
            return dump_field(f, fh, name)
    fp.write(json.dumps(header, sort_keys=True).encode() + b"\n")
    data = f.data
    if np.iscomplexobj(data):
        data = np.stack([data.real, data.imag], axis=-1)
    fp.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def load_field(fp: BinaryIO | str) -> tuple[ScalarField, str]:
    if isinstance(fp, str):
        with open(fp, "rb") as fh:
            return load_field(fh)
    header = json.loads(fp.readline())
    n = int(header["n"])
    spectral = header["representation"] == "spectral"
    real = bool(header["real_tagged"])
    raw = np.frombuffer(fp.read(), dtype="<f8")
    if real and not spectral:
        data = raw.reshape(n, n)
    else:
        pairs = raw.reshape(n, n, 2)
        data = pairs[..., 0] + 1j * pairs[..., 1]
    grid = Grid2D(n, float(header["length"]))
    return ScalarField(grid, data, spectral=spectral, real=real), header.get("name", "")
