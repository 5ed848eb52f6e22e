"""Dirichlet sine basis on boxes and the spectral fractional Laplacian.

A field u on the box (0, L_1) x ... x (0, L_d) is stored through its
coefficients in the L2-orthonormal eigenbasis of the Dirichlet Laplacian,

    phi_m(x) = prod_j sqrt(2 / L_j) sin(m_j pi x_j / L_j),   m_j = 1..N,
    lambda_m = pi^2 sum_j (m_j / L_j)^2,

so every fractional power A^s is a diagonal scaling by lambda_m^s.  Point
values live on the interior grid x_i = i L / (M + 1), i = 1..M, where the
type-I discrete sine transform is an exact transform pair for sine sums
with modes up to M.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box (0, L_1) x ... x (0, L_dim)."""

    dim: int
    lengths: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        lengths = tuple(float(L) for L in self.lengths)
        if len(lengths) != self.dim:
            raise ValueError(f"expected {self.dim} side lengths, got {len(lengths)}")
        if not all(np.isfinite(L) and L > 0 for L in lengths):
            raise ValueError(f"side lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def unit(cls, dim: int) -> "Domain":
        return cls(dim, (1.0,) * dim)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))


@dataclass(frozen=True, eq=False)
class Basis:
    """Truncated Dirichlet eigenbasis with N modes per axis.

    ``grid_size`` is the number M of interior collocation points per axis
    used for nonlinear terms (default 2N).
    """

    domain: Domain
    modes: int
    grid_size: int
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.modes,) * self.dim

    @property
    def size(self) -> int:
        return self.modes**self.dim

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues.flat[0])

    def sorted_eigenvalues(self) -> np.ndarray:
        return np.sort(self.eigenvalues, axis=None)

    def mode_indices(self) -> np.ndarray:
        """Multi-indices m (1-based), shape ``shape + (dim,)``."""
        axes = np.meshgrid(*([np.arange(1, self.modes + 1)] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def grid(self, grid_size: int | None = None) -> list[np.ndarray]:
        """Interior grid coordinates per axis."""
        M = self.grid_size if grid_size is None else grid_size
        return [np.arange(1, M + 1) * L / (M + 1) for L in self.domain.lengths]

    def cell_volume(self, grid_size: int | None = None) -> float:
        M = self.grid_size if grid_size is None else grid_size
        return float(np.prod([L / (M + 1) for L in self.domain.lengths]))

    def compatible(self, other: "Basis") -> bool:
        return self is other or (
            self.domain == other.domain and self.modes == other.modes
        )

    def eigenfunction(self, *m: int) -> "SpectralField":
        """Coefficient vector of the single mode phi_m (1-based indices)."""
        if len(m) != self.dim or not all(1 <= k <= self.modes for k in m):
            raise ValueError(f"mode {m} outside basis of {self.modes} modes per axis")
        c = np.zeros(self.shape)
        c[tuple(k - 1 for k in m)] = 1.0
        return SpectralField(self, c)

    def zeros(self) -> "SpectralField":
        return SpectralField(self, np.zeros(self.shape))


def build_basis(domain: Domain, modes_per_axis: int, grid_size: int | None = None) -> Basis:
    if int(modes_per_axis) != modes_per_axis or modes_per_axis < 2:
        raise ValueError(f"modes_per_axis must be an integer >= 2, got {modes_per_axis}")
    N = int(modes_per_axis)
    M = 2 * N if grid_size is None else int(grid_size)
    if M < N:
        raise ValueError(f"grid_size {M} smaller than modes_per_axis {N}")
    lam = np.zeros((N,) * domain.dim)
    for axis, L in enumerate(domain.lengths):
        k2 = (np.pi * np.arange(1, N + 1) / L) ** 2
        shape = [1] * domain.dim
        shape[axis] = N
        lam = lam + k2.reshape(shape)
    lam.setflags(write=False)
    return Basis(domain, N, M, lam)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients xi_m of u = sum xi_m phi_m, shape ``basis.shape``."""

    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != self.basis.shape:
            if c.size != self.basis.size:
                raise ValueError(f"{c.size} coefficients for a basis of size {self.basis.size}")
            c = c.reshape(self.basis.shape)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite spectral coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def _check(self, other: "SpectralField") -> None:
        if not self.basis.compatible(other.basis):
            raise ValueError("fields live on different bases")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.basis, -self.coeffs)


@dataclass(frozen=True, eq=False)
class NodalField:
    """Point values on the interior tensor grid with ``grid_size`` points per axis."""

    basis: Basis
    values: np.ndarray
    grid_size: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid_size,) * self.basis.dim:
            raise ValueError(f"nodal values of shape {v.shape} do not match grid size {self.grid_size}")
        if self.grid_size < self.basis.modes:
            raise ValueError("grid_size must be at least the number of modes per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite nodal values")
        object.__setattr__(self, "values", v)

    def integrate(self) -> float:
        """Interior-grid quadrature of the field (exact for in-band sine sums)."""
        return float(self.values.sum() * self.basis.cell_volume(self.grid_size))


def _axis_scale(basis: Basis, M: int) -> float:
    return float(np.prod([np.sqrt(L / (M + 1)) for L in basis.domain.lengths]))


def analyze(values: np.ndarray, basis: Basis) -> np.ndarray:
    """Projection of grid values onto the first N modes, as a raw array."""
    M = values.shape[0]
    full = fft.dstn(values, type=1, norm="ortho") * _axis_scale(basis, M)
    return full[(slice(0, basis.modes),) * basis.dim]


def synthesize(coeffs: np.ndarray, basis: Basis, M: int) -> np.ndarray:
    """Grid values of sum xi_m phi_m on the M-point interior grid, as a raw array."""
    padded = np.zeros((M,) * basis.dim)
    padded[(slice(0, basis.modes),) * basis.dim] = coeffs
    return fft.idstn(padded, type=1, norm="ortho") / _axis_scale(basis, M)


def to_spectral(u: NodalField) -> SpectralField:
    return SpectralField(u.basis, analyze(u.values, u.basis))


def to_nodal(u: SpectralField, grid_size: int | None = None) -> NodalField:
    M = u.basis.grid_size if grid_size is None else int(grid_size)
    return NodalField(u.basis, synthesize(u.coeffs, u.basis, M), M)


def sample(basis: Basis, func, grid_size: int | None = None) -> NodalField:
    """Evaluate ``func(*coords)`` on the interior grid (coords broadcast in ij order)."""
    M = basis.grid_size if grid_size is None else grid_size
    coords = np.meshgrid(*basis.grid(M), indexing="ij")
    values = np.broadcast_to(np.asarray(func(*coords), dtype=float), (M,) * basis.dim)
    return NodalField(basis, np.array(values), M)


def apply_power(u: SpectralField, s: float) -> SpectralField:
    """A^s u; negative s gives the inverse power."""
    if s == 0:
        return u
    return SpectralField(u.basis, u.basis.eigenvalues**s * u.coeffs)


def invert_power(f: SpectralField, s: float) -> SpectralField:
    """A^{-s} f, the truncated Green operator of A^s."""
    if s <= 0:
        raise ValueError(f"invert_power needs s > 0, got {s}")
    return SpectralField(f.basis, f.coeffs / f.basis.eigenvalues**s)


def theta_norm(u: SpectralField, alpha: float) -> float:
    """(sum lambda^alpha xi^2)^(1/2); alpha = 0 is the L2 norm."""
    return float(np.sqrt(np.sum(u.basis.eigenvalues**alpha * u.coeffs**2)))


def inner_theta(u: SpectralField, v: SpectralField, s: float) -> float:
    u._check(v)
    return float(np.sum(u.basis.eigenvalues**s * u.coeffs * v.coeffs))


def dual_norm(f: SpectralField, s: float) -> float:
    """Norm of f in the dual of Theta^s, (sum lambda^-s c^2)^(1/2)."""
    if s <= 0:
        raise ValueError(f"dual_norm needs s > 0, got {s}")
    return theta_norm(f, -s)


# Field files: CSV, first row "dim,N,L_1,...,L_dim", then one coefficient per
# row in row-major (C) order of the multi-index (m_1, ..., m_dim).


def write_field(path, u: SpectralField) -> None:
    path = Path(path)
    b = u.basis
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([b.dim, b.modes, *(repr(L) for L in b.domain.lengths)])
        for c in u.flat:
            w.writerow([repr(float(c))])


def read_field(path, basis: Basis | None = None) -> SpectralField:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty field file")
    head = rows[0]
    dim, N = int(head[0]), int(head[1])
    lengths = tuple(float(x) for x in head[2:])
    domain = Domain(dim, lengths)
    if basis is None:
        basis = build_basis(domain, N)
    elif basis.domain != domain or basis.modes != N:
        raise ValueError(f"{path}: header {dim},{N},{lengths} does not match basis")
    coeffs = np.array([float(r[0]) for r in rows[1:]])
    return SpectralField(basis, coeffs)
