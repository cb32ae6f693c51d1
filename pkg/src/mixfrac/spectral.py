"""Periodic 3D grids, unitary-convention Fourier transforms and spectral operators.

The whole space is replaced by the periodic box ``[-L/2, L/2)^3`` sampled on an
``n x n x n`` lattice.  Transforms approximate

    phi_hat(p) = (2 pi)^(-3/2) * integral phi(x) exp(-i p.x) dx

so continuum formulas carry over to the grid with no extra factors:

    forward:  phi_hat_k = h^3 (2 pi)^(-3/2) sum_j phi_j exp(-i p_k . x_j)
    inverse:  phi_j     = (2 pi)^(-3/2) (2 pi / L)^3 sum_k phi_hat_k exp(i p_k . x_j)

With this scaling Parseval reads ``sum |phi_j|^2 h^3 == sum |phi_hat_k|^2 dp`` where
the dual cell is ``dp = (2 pi / L)^3``.

Because the box is centred at the origin, ``exp(-i p_k . x_0)`` with
``x_0 = -L/2`` reduces to ``(-1)^(kx + ky + kz)``; it is applied as an exact
sign pattern.  The unpaired Nyquist index ``-n/2`` is its own mirror image, so
every radial symbol stays real there and Hermitian symmetry survives.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable

import numpy as np

from .exceptions import GridMismatchError

TWO_PI_3_2 = (2.0 * np.pi) ** 1.5

REGIMES = ("nonlinear", "linear-a", "linear-b")

#: relative tolerance for discarding the imaginary part of an inverse transform
REAL_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic sampling of the cube ``[-L/2, L/2)^3``.

    Parameters
    ----------
    n_per_axis : int
        Even number of samples per axis, at least 8.
    box_length : float
        Side length ``L`` of the periodic box.
    """

    n_per_axis: int = 32
    box_length: float = 20.0

    def __post_init__(self):
        n = self.n_per_axis
        if isinstance(n, bool) or int(n) != n or n < 8 or n % 2:
            raise ValueError(f"n_per_axis must be an even integer >= 8, got {n!r}")
        object.__setattr__(self, "n_per_axis", int(n))
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def dual_cell_volume(self) -> float:
        """Volume element ``(2 pi / L)^3`` of the wavenumber lattice."""
        return (2.0 * np.pi / self.box_length) ** 3

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.n_per_axis
        return (n, n, n)

    @property
    def n_samples(self) -> int:
        return self.n_per_axis**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @cached_property
    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis, starting at ``-L/2``; index ``n/2`` is the origin."""
        return -0.5 * self.box_length + self.spacing * np.arange(self.n_per_axis)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.axis, self.axis, self.axis, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        x, y, z = self.mesh
        return np.sqrt(x * x + y * y + z * z)

    @cached_property
    def signed_index(self) -> np.ndarray:
        """Integer wavenumber indices in FFT order, covering ``[-n/2, n/2)``."""
        n = self.n_per_axis
        return np.fft.fftfreq(n, d=1.0 / n).round().astype(np.int64)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """``p = 2 pi k / L`` for each signed index, FFT order."""
        return 2.0 * np.pi * self.signed_index / self.box_length

    @cached_property
    def p_squared(self) -> np.ndarray:
        k = self.wavenumbers
        return k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2

    @cached_property
    def p_abs(self) -> np.ndarray:
        return np.sqrt(self.p_squared)

    @cached_property
    def phase(self) -> np.ndarray:
        """``exp(-i p.x_0)`` for the corner ``x_0 = (-L/2,)*3``; exactly +-1."""
        k = self.signed_index
        parity = k[:, None, None] + k[None, :, None] + k[None, None, :]
        return np.where(parity % 2 == 0, 1.0, -1.0)

    def symbol_power(self, s: float) -> np.ndarray:
        """``|p|^(2s)`` on the wavenumber lattice, zero at ``p = 0``."""
        out = self.p_squared**s
        out[0, 0, 0] = 0.0
        return out

    def sample(self, func: Callable) -> "Field":
        """Evaluate ``func(x, y, z)`` on the grid mesh."""
        x, y, z = self.mesh
        return Field(self, np.broadcast_to(func(x, y, z), self.shape))


@dataclass(frozen=True)
class FracExponents:
    """Pair of fractional powers ``s1 < s2`` tagged with the admissible window.

    ``nonlinear`` requires 1/4 < s1 < 3/4; ``linear-a`` 0 < s1 < 3/4;
    ``linear-b`` 3/4 <= s1 < 1.  Always s1 < s2 < 1.
    """

    s1: float
    s2: float
    regime: str = "nonlinear"

    def __post_init__(self):
        s1, s2 = float(self.s1), float(self.s2)
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if not s1 < s2 < 1.0:
            raise ValueError(f"need s1 < s2 < 1, got s1={s1}, s2={s2}")
        lo, hi = {
            "nonlinear": (0.25, 0.75),
            "linear-a": (0.0, 0.75),
            "linear-b": (0.75, 1.0),
        }[self.regime]
        inside = (lo <= s1 < hi) if self.regime == "linear-b" else (lo < s1 < hi)
        if not inside:
            raise ValueError(f"s1={s1} outside the {self.regime} window ({lo}, {hi})")

    def symbol(self, grid: GridSpec) -> np.ndarray:
        """``|p|^(2 s1) + |p|^(2 s2)`` on ``grid``."""
        return grid.symbol_power(self.s1) + grid.symbol_power(self.s2)

    @property
    def linear_regime(self) -> str:
        """Linear solvability case; the nonlinear window lies inside ``linear-a``."""
        return "linear-b" if self.regime == "linear-b" else "linear-a"


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a scalar function on a :class:`GridSpec`.

    The sample array is copied and frozen on construction.
    """

    grid: GridSpec
    samples: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.shape != self.grid.shape:
            if arr.size != self.grid.n_samples:
                raise ValueError(f"expected {self.grid.shape} samples, got shape {arr.shape}")
            arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    def _check(self, other: "Field"):
        if self.grid != other.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.samples + other.samples)
        return Field(self.grid, self.samples + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.samples - other.samples)
        return Field(self.grid, self.samples - other)

    def __neg__(self):
        return Field(self.grid, -self.samples)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            return NotImplemented
        return Field(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.grid, self.samples / scalar)

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        """Pointwise ``func`` applied to the samples."""
        return Field(self.grid, func(self.samples))

    def integral(self) -> float:
        return float(self.samples.sum() * self.grid.cell_volume)

    def boundary_max(self) -> float:
        """Largest magnitude on the faces of the box."""
        a = np.abs(self.samples)
        return float(max(a[0].max(), a[:, 0].max(), a[:, :, 0].max(),
                         a[-1].max(), a[:, -1].max(), a[:, :, -1].max()))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients on the wavenumber lattice of ``grid`` (FFT order)."""

    grid: GridSpec
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise ValueError(f"expected {self.grid.shape} coefficients, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def mirrored(self) -> np.ndarray:
        """Coefficients at ``-k`` (indices taken mod n)."""
        c = self.coeffs
        return np.roll(c[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))

    def hermitian_defect(self) -> float:
        """``max |c(-k) - conj(c(k))| / max |c|``; zero for transforms of real fields."""
        scale = np.abs(self.coeffs).max()
        if scale == 0:
            return 0.0
        return float(np.abs(self.mirrored() - np.conj(self.coeffs)).max() / scale)


def forward_transform(field: Field) -> SpectralField:
    grid = field.grid
    coeffs = np.fft.fftn(field.samples)
    coeffs *= grid.cell_volume / TWO_PI_3_2
    coeffs *= grid.phase
    return SpectralField(grid, coeffs)


def inverse_transform(spec: SpectralField) -> Field:
    """Inverse of :func:`forward_transform`.

    Raises ``ValueError`` when the result has an imaginary part above
    ``REAL_TOL`` relative to the triangle-inequality bound on its magnitude,
    i.e. when ``spec`` is not the transform of a real field.
    """
    grid = spec.grid
    scale = TWO_PI_3_2 / grid.cell_volume
    values = np.fft.ifftn(spec.coeffs * grid.phase) * scale
    bound = float(np.abs(spec.coeffs).sum()) * TWO_PI_3_2 / grid.volume
    resid = float(np.abs(values.imag).max()) if values.size else 0.0
    if resid > REAL_TOL * bound:
        raise ValueError(f"inverse transform is not real: imaginary residue {resid:.3e}")
    return Field(grid, values.real)


def apply_symbol(field: Field, symbol: np.ndarray) -> Field:
    """Multiply the transform of ``field`` by a real, even ``symbol`` and invert."""
    spec = forward_transform(field)
    return inverse_transform(SpectralField(field.grid, spec.coeffs * symbol))


def apply_fractional_laplacian(field: Field, s: float) -> Field:
    """``(-Delta)^s field`` via the symbol ``|p|^(2s)``."""
    if not s > 0:
        raise ValueError(f"fractional power must be positive, got {s}")
    return apply_symbol(field, field.grid.symbol_power(s))


def apply_mixed_operator(field: Field, exps: FracExponents) -> Field:
    """``[(-Delta)^s1 + (-Delta)^s2] field``."""
    return apply_symbol(field, exps.symbol(field.grid))


def convolve(kernel: Field, g_of_u: Field) -> Field:
    """Approximate ``integral kernel(x - y) g_of_u(y) dy`` on the periodic box."""
    if kernel.grid != g_of_u.grid:
        raise GridMismatchError(f"grid mismatch: {kernel.grid} vs {g_of_u.grid}")
    k_hat = forward_transform(kernel).coeffs
    g_hat = forward_transform(g_of_u).coeffs
    return inverse_transform(SpectralField(kernel.grid, TWO_PI_3_2 * k_hat * g_hat))
