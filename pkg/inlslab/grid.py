"""Periodic spectral grids, fields sampled on them, and the quadratures
used by the diagnostics."""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft
from scipy import ndimage

from . import settings
from .errors import ArtifactError, NonFiniteField, ValidationError
from .params import INFINITY

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

_fft_workers = settings.THREADS

# d, n, L, offset; followed by interleaved re/im doubles.
HEADER = np.dtype([('d', '<i4'), ('n', '<i4'), ('L', '<f8'), ('offset', '<i4')])


def set_fft_workers(workers):
    """Number of threads scipy.fft may use for every transform."""
    global _fft_workers
    if workers < 1:
        raise ValueError('workers must be >= 1, got {!r}'.format(workers))
    _fft_workers = int(workers)
    logger.debug("FFT workers set to {}".format(_fft_workers))


def fft(values):
    return scipy.fft.fftn(values, workers=_fft_workers)


def ifft(values):
    return scipy.fft.ifftn(values, workers=_fft_workers)


@dataclass(frozen=True)
class GridSpec(object):

    """Uniform periodic grid on [-L/2, L/2)^d with n points per axis."""

    d: int
    L: float
    n: int
    offset: bool = True

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValidationError('grid dimension must be 1, 2 or 3, '
                                  'got {!r}'.format(self.d))
        if not self.L > 0:
            raise ValidationError('L must be positive, got {!r}'.format(self.L))
        if self.n < 8 or self.n & (self.n - 1):
            raise ValidationError('n must be a power of two >= 8, '
                                  'got {!r}'.format(self.n))
        object.__setattr__(self, 'L', float(self.L))
        object.__setattr__(self, 'offset', bool(self.offset))

    @property
    def h(self):
        return self.L / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self):
        return self.n ** self.d

    @property
    def cell_volume(self):
        return self.h ** self.d

    @cached_property
    def axis(self):
        """Node coordinates along one axis."""
        shift = 0.5 if self.offset else 0.0
        return -self.L / 2 + (np.arange(self.n) + shift) * self.h

    @cached_property
    def coords(self):
        """Array of shape (d, n, ..., n) holding x_j at every node."""
        return np.array(np.meshgrid(*([self.axis] * self.d), indexing='ij'))

    @cached_property
    def radius(self):
        return np.sqrt(np.sum(self.coords ** 2, axis=0))

    @cached_property
    def wavenumbers(self):
        """2*pi*m/L along one axis, in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def k(self):
        """Array of shape (d, n, ..., n) holding k_j for every mode."""
        return np.array(np.meshgrid(*([self.wavenumbers] * self.d),
                                    indexing='ij'))

    @cached_property
    def k2(self):
        return np.sum(self.k ** 2, axis=0)

    def spectral_quadrature(self, density):
        """h^d/N * sum over modes: Parseval weight for spectral sums."""
        return float(np.sum(density)) * self.cell_volume / self.size

    def quadrature(self, density):
        """Rectangle rule h^d * sum over nodes."""
        return float(np.sum(density)) * self.cell_volume


def make_grid(d, L, n, offset=True):
    """Build a GridSpec, rejecting n that is not a power of two."""
    grid = GridSpec(d=int(d), L=L, n=int(n), offset=offset)
    logger.debug("Grid d={} L={} n={} h={} offset={}".format(
        grid.d, grid.L, grid.n, grid.h, grid.offset))
    return grid


class Field(object):

    """Complex samples of a function on a GridSpec.

    Values are copied and frozen on construction; NaN/Inf are rejected.
    """

    def __init__(self, grid, values):
        values = np.array(values, dtype=complex)
        if values.size != grid.size:
            raise ValueError('Expected {} values, got {}'.format(
                grid.size, values.size))
        values = values.reshape(grid.shape)
        if not np.isfinite(values).all():
            raise NonFiniteField('Field contains NaN or Inf')
        values.setflags(write=False)
        self._grid = grid
        self._values = values

    @property
    def grid(self):
        return self._grid

    @property
    def values(self):
        return self._values

    def spectrum(self):
        return fft(self._values)

    @classmethod
    def from_spectrum(cls, grid, spectrum):
        return cls(grid, ifft(spectrum))

    def with_values(self, values):
        return Field(self._grid, values)

    def _check_grid(self, other):
        if other.grid != self._grid:
            raise ValueError('Fields live on different grids')

    def __add__(self, other):
        self._check_grid(other)
        return self.with_values(self._values + other.values)

    def __sub__(self, other):
        self._check_grid(other)
        return self.with_values(self._values - other.values)

    def __mul__(self, scalar):
        return self.with_values(scalar * self._values)

    __rmul__ = __mul__

    def __repr__(self):
        return 'Field(d={}, n={}, L={})'.format(
            self._grid.d, self._grid.n, self._grid.L)

    def to_bytes(self):
        grid = self._grid
        header = np.array([(grid.d, grid.n, grid.L, int(grid.offset))],
                          dtype=HEADER)
        return header.tobytes() + self._values.astype('<c16').tobytes()

    @classmethod
    def from_bytes(cls, data):
        if len(data) < HEADER.itemsize:
            raise ArtifactError('Field data shorter than its header')
        header = np.frombuffer(data, dtype=HEADER, count=1)[0]
        try:
            grid = GridSpec(d=int(header['d']), L=float(header['L']),
                            n=int(header['n']), offset=bool(header['offset']))
        except ValidationError as e:
            raise ArtifactError('Corrupt field header: {}'.format(e))
        expected = HEADER.itemsize + 16 * grid.size
        if len(data) != expected:
            raise ArtifactError('Field data has {} bytes, expected {}'.format(
                len(data), expected))
        values = np.frombuffer(data, dtype='<c16', offset=HEADER.itemsize)
        return cls(grid, values)

    def save(self, path):
        with open(path, 'wb') as handle:
            handle.write(self.to_bytes())
        logger.debug("Wrote field to {}".format(path))

    @classmethod
    def load(cls, path):
        with open(path, 'rb') as handle:
            return cls.from_bytes(handle.read())


def _capped_radius(grid, cap):
    if grid.offset:
        return grid.radius
    if not cap:
        raise ValueError('A grid without offset needs cap=True')
    return np.maximum(grid.radius, grid.h / 2)


def singular_weight(grid, s, cap=True):
    """|x|^-s at every node.

    On grids without offset the origin node is given |x| = h/2.
    """
    s = float(s)
    if s <= 0:
        raise ValueError('s must be positive, got {}'.format(s))
    weight = _capped_radius(grid, cap) ** -s
    weight.setflags(write=False)
    return weight


def weight_gradient(grid, s, cap=True):
    """Analytic gradient -s x |x|^(-s-2), shape (d, n, ..., n)."""
    s = float(s)
    if s <= 0:
        raise ValueError('s must be positive, got {}'.format(s))
    r = _capped_radius(grid, cap)
    return -s * grid.coords * r ** (-s - 2)


def gradient(field):
    """Spectral derivatives of the trigonometric interpolant.

    :returns: complex array of shape (d, n, ..., n)
    """
    grid = field.grid
    spectrum = field.spectrum()
    return np.array([ifft(1j * k * spectrum) for k in grid.k])


def _exponent(q):
    if q is INFINITY or q == np.inf:
        return np.inf
    q = float(q)
    if q < 1:
        raise ValueError('q must be >= 1, got {}'.format(q))
    return q


def lq_norm(field, q):
    """Rectangle-rule L^q norm; q may be infinite."""
    q = _exponent(q)
    modulus = np.abs(field.values)
    if q == np.inf:
        return float(modulus.max())
    return field.grid.quadrature(modulus ** q) ** (1.0 / q)


def l2_norm(field):
    return lq_norm(field, 2)


def spectral_l2_norm(field):
    """L^2 norm computed from the Fourier coefficients."""
    return np.sqrt(field.grid.spectral_quadrature(np.abs(field.spectrum()) ** 2))


def sobolev_norm(field, s):
    """H^s norm with multiplier (1 + |k|^2)^(s/2)."""
    grid = field.grid
    density = (1 + grid.k2) ** s * np.abs(field.spectrum()) ** 2
    return np.sqrt(grid.spectral_quadrature(density))


def h1_norm(field):
    return sobolev_norm(field, 1)


def gradient_l2_norm(field):
    """||grad u||_2 from the spectrum."""
    grid = field.grid
    return np.sqrt(grid.spectral_quadrature(grid.k2 * np.abs(field.spectrum()) ** 2))


def cube_cells(grid, edge):
    """Number of cells spanned by a cube edge that is a multiple of h."""
    edge = float(edge)
    if edge > grid.L * (1 + 1e-12):
        raise ValueError('edge {} exceeds the box length {}'.format(edge, grid.L))
    cells = edge / grid.h
    if cells < 1 - 1e-9 or abs(cells - round(cells)) > 1e-9 * max(cells, 1.0):
        raise ValueError('edge {} is not a multiple of h = {}'.format(edge, grid.h))
    return int(round(cells))


def nearest_cube_edge(grid, edge):
    """Closest multiple of h to edge, at least one cell."""
    return max(1, int(round(float(edge) / grid.h))) * grid.h


def sup_cube_l2(field, edge):
    """Largest L^2 mass over grid-aligned cubes of the given edge,
    with periodic wrap."""
    grid = field.grid
    cells = cube_cells(grid, edge)
    density = np.abs(field.values) ** 2 * grid.cell_volume
    windows = ndimage.uniform_filter(density, size=cells, mode='wrap')
    return float(np.sqrt(max(windows.max() * cells ** grid.d, 0.0)))
