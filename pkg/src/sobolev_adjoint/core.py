"""Grids, sampled functions, inner products, FFT and the linear-operator abstraction.

Conventions used throughout the package:

* Torus domains are unit tori, one point row per dimension, spacing
  ``h = 1/points``; interval/rectangle grids include both endpoints,
  spacing ``length/(points-1)``.
* Spectral coefficients are scaled so that the entry at frequency ``k``
  approximates the inner product of the function with ``exp(2*pi*i*k*x)``
  (DFT sum times ``h**N``).  The Nyquist mode is labelled ``+points/2``.
* All quadrature is the rectangle rule at grid resolution with weight
  ``h**N`` per node (pixel area on masked disks).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np

__all__ = [
    "DomainKind",
    "Domain",
    "GridFn",
    "SpectralField",
    "InnerProductSpec",
    "LinOp",
    "fft_forward",
    "fft_inverse",
    "inner",
    "l2_norm",
    "quad_weight",
    "check_adjoint",
]


class DomainKind(enum.Enum):
    TORUS = "torus"
    INTERVAL = "interval"
    RECTANGLE = "rectangle"
    DISK_MASK = "disk_mask"
    REAL_LINE = "real_line"


@lru_cache(maxsize=32)
def _disk_active(radius: float, n: int) -> np.ndarray:
    """Flat boolean mask of pixels whose centers lie inside the circle."""
    px = 2.0 * radius / n
    c = -radius + px * (np.arange(n) + 0.5)
    xx, yy = np.meshgrid(c, c, indexing="ij")
    return (xx**2 + yy**2 < radius**2).ravel()


@dataclass(frozen=True)
class Domain:
    """Uniform grid over a declared domain (torus, interval, rectangle, disk, truncated line)."""

    kind: DomainKind
    shape: tuple[int, ...]
    lengths: tuple[float, ...]
    origin: tuple[float, ...]
    radius: Optional[float] = None

    @staticmethod
    def torus(n_dims: int, points_per_dim: int) -> "Domain":
        _require_even(points_per_dim)
        return Domain(DomainKind.TORUS, (points_per_dim,) * n_dims,
                      (1.0,) * n_dims, (0.0,) * n_dims)

    @staticmethod
    def interval(a: float, b: float, points: int) -> "Domain":
        if not b > a:
            raise ValueError("interval requires b > a")
        if points < 2:
            raise ValueError("interval requires at least 2 points")
        return Domain(DomainKind.INTERVAL, (points,), (b - a,), (a,))

    @staticmethod
    def rectangle(a: float, b: float, nx: int, ny: int) -> "Domain":
        if a <= 0 or b <= 0:
            raise ValueError("rectangle sides must be positive")
        if nx < 2 or ny < 2:
            raise ValueError("rectangle requires at least 2 points per side")
        return Domain(DomainKind.RECTANGLE, (nx, ny), (a, b), (0.0, 0.0))

    @staticmethod
    def disk_mask(radius: float, n_pixels_per_side: int) -> "Domain":
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        n = n_pixels_per_side
        if n < 2:
            raise ValueError("disk mask requires at least 2 pixels per side")
        return Domain(DomainKind.DISK_MASK, (n, n), (2.0 * radius,) * 2,
                      (-radius,) * 2, radius=radius)

    @staticmethod
    def real_line(half_width: float, points: int) -> "Domain":
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        _require_even(points)
        return Domain(DomainKind.REAL_LINE, (points,), (2.0 * half_width,),
                      (-half_width,))

    # -- derived geometry -------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def periodic(self) -> bool:
        return self.kind in (DomainKind.TORUS, DomainKind.REAL_LINE)

    @property
    def spacing(self) -> tuple[float, ...]:
        if self.periodic or self.kind is DomainKind.DISK_MASK:
            return tuple(length / n for length, n in zip(self.lengths, self.shape))
        return tuple(length / (n - 1) for length, n in zip(self.lengths, self.shape))

    def axes(self) -> list[np.ndarray]:
        """Node coordinates per dimension (pixel centers on masked disks)."""
        out = []
        for o, h, n in zip(self.origin, self.spacing, self.shape):
            if self.kind is DomainKind.DISK_MASK:
                out.append(o + h * (np.arange(n) + 0.5))
            else:
                out.append(o + h * np.arange(n))
        return out

    @property
    def active(self) -> Optional[np.ndarray]:
        if self.kind is DomainKind.DISK_MASK:
            return _disk_active(self.radius, self.shape[0])
        return None

    @property
    def grid_size(self) -> int:
        if self.kind is DomainKind.DISK_MASK:
            return int(self.active.sum())
        return int(np.prod(self.shape))


def _require_even(points: int) -> None:
    # Odd counts are admitted for pixel geometries with a central pixel
    # (e.g. 201x201 tomography grids); numpy's mixed-radix FFT handles them
    # and the Nyquist-mode convention only arises for even counts.
    if points < 2:
        raise ValueError("FFT-capable domains need at least 2 points per dim")


@dataclass(frozen=True)
class GridFn:
    """Sampled function on a :class:`Domain`; values flat in row-major order.

    On masked disks only active pixels are stored.  Entries must be finite.
    """

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(np.float64)
        vals = vals.ravel()
        if vals.size != self.domain.grid_size:
            raise ValueError(
                f"expected {self.domain.grid_size} samples, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridFn values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def is_real(self) -> bool:
        return self.values.dtype.kind == "f"

    def with_values(self, values: np.ndarray) -> "GridFn":
        return GridFn(self.domain, values)

    def to_array(self) -> np.ndarray:
        """Values on the full grid (inactive disk pixels filled with 0)."""
        if self.domain.kind is DomainKind.DISK_MASK:
            full = np.zeros(int(np.prod(self.domain.shape)), dtype=self.values.dtype)
            full[self.domain.active] = self.values
            return full.reshape(self.domain.shape)
        return self.values.reshape(self.domain.shape)

    @staticmethod
    def from_array(domain: Domain, arr: np.ndarray) -> "GridFn":
        arr = np.asarray(arr)
        if arr.shape != domain.shape:
            raise ValueError(f"array shape {arr.shape} != grid shape {domain.shape}")
        flat = arr.ravel()
        if domain.kind is DomainKind.DISK_MASK:
            flat = flat[domain.active]
        return GridFn(domain, flat)

    def __add__(self, other: "GridFn") -> "GridFn":
        _same_domain(self, other)
        return GridFn(self.domain, self.values + other.values)

    def __sub__(self, other: "GridFn") -> "GridFn":
        _same_domain(self, other)
        return GridFn(self.domain, self.values - other.values)

    def __mul__(self, scalar) -> "GridFn":
        return GridFn(self.domain, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFn":
        return GridFn(self.domain, -self.values)


def _same_domain(u, v) -> None:
    if u.domain != v.domain:
        raise ValueError("domain mismatch")


@dataclass(frozen=True)
class SpectralField:
    """Truncated Fourier coefficients on an FFT-capable domain, FFT ordering."""

    domain: Domain
    coeffs: np.ndarray

    def __post_init__(self):
        if not self.domain.periodic:
            raise ValueError("spectral fields live on torus/real-line domains")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.domain.shape:
            raise ValueError(f"coefficient shape {c.shape} != grid {self.domain.shape}")
        object.__setattr__(self, "coeffs", c)


def frequency_axes(domain: Domain) -> list[np.ndarray]:
    """Physical frequency labels per dimension, Nyquist assigned to +points/2.

    Integers on the unit torus; k/(2W) on a truncated line of half-width W.
    """
    if not domain.periodic:
        raise ValueError("frequencies defined for torus/real-line domains only")
    axes = []
    for n, length in zip(domain.shape, domain.lengths):
        k = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            k[n // 2] = n // 2
        axes.append(k / length)
    return axes


def frequency_sq(domain: Domain) -> np.ndarray:
    """|xi|^2 on the FFT grid."""
    axes = frequency_axes(domain)
    grids = np.meshgrid(*axes, indexing="ij")
    return sum(g**2 for g in grids)


def quad_weight(domain: Domain) -> float:
    """Rectangle-rule quadrature weight per node (h^N; pixel area on disks)."""
    return float(np.prod(domain.spacing))


def _line_phase(domain: Domain) -> np.ndarray:
    # exp(-2*pi*i*xi_k*origin) for the truncated line: (-1)^k per label.
    k = np.rint(frequency_axes(domain)[0] * domain.lengths[0]).astype(int)
    return np.where(k % 2 == 0, 1.0, -1.0)


def fft_forward(u: GridFn) -> SpectralField:
    """DFT scaled so that the coefficient at k approximates <u, e_k>."""
    dom = u.domain
    if not dom.periodic:
        raise ValueError("fft_forward requires a torus or real-line domain")
    h = quad_weight(dom)
    c = np.fft.fftn(u.values.reshape(dom.shape)) * h
    if dom.kind is DomainKind.REAL_LINE:
        c = c * _line_phase(dom)
    return SpectralField(dom, c)


def fft_inverse(c: SpectralField) -> GridFn:
    """Exact inverse of :func:`fft_forward`."""
    dom = c.domain
    h = quad_weight(dom)
    coeffs = c.coeffs
    if dom.kind is DomainKind.REAL_LINE:
        coeffs = coeffs * _line_phase(dom)
    vals = np.fft.ifftn(coeffs / h)
    return GridFn(dom, vals.ravel())


@dataclass(frozen=True)
class InnerProductSpec:
    """Inner product selector: plain L2, a Sobolev inner product, or a custom form."""

    kind: str
    sobolev: Any = None
    fn: Optional[Callable[[Any, Any], complex]] = None

    @staticmethod
    def l2() -> "InnerProductSpec":
        return InnerProductSpec("l2")

    @staticmethod
    def sobolev_spec(spec) -> "InnerProductSpec":
        return InnerProductSpec("sobolev", sobolev=spec)

    @staticmethod
    def custom(fn: Callable[[Any, Any], complex]) -> "InnerProductSpec":
        return InnerProductSpec("custom", fn=fn)

    def __call__(self, u, v) -> complex:
        return inner(u, v, self)


def inner(u, v, spec: InnerProductSpec = InnerProductSpec("l2")) -> complex:
    """Sesquilinear inner product <u, v> (conjugation on the second argument)."""
    if spec.kind == "custom":
        return spec.fn(u, v)
    _same_domain(u, v)
    if spec.kind == "l2":
        return quad_weight(u.domain) * complex(np.vdot(v.values, u.values))
    if spec.kind == "sobolev":
        from . import multiplier

        return multiplier.sobolev_inner(u, v, spec.sobolev)
    raise ValueError(f"unknown inner product kind {spec.kind!r}")


def l2_norm(u) -> float:
    """L2 norm with the object's natural quadrature weight."""
    if isinstance(u, GridFn):
        w = quad_weight(u.domain)
    else:
        w = u.quad_weight  # duck-typed (e.g. sinograms)
    return float(np.sqrt(w) * np.linalg.norm(u.values))


@dataclass(frozen=True)
class LinOp:
    """Forward/adjoint pair with declared inner products on both sides.

    ``domain_template``/``codomain_template`` are prototype elements used to
    draw random test vectors; any object with ``values`` and ``with_values``
    works (GridFn, Sinogram).
    """

    apply: Callable[[Any], Any]
    apply_adjoint: Callable[[Any], Any]
    domain_inner: Callable[[Any, Any], complex]
    codomain_inner: Callable[[Any, Any], complex]
    domain_template: Any
    codomain_template: Any


def _random_like(template, rng: np.random.Generator):
    n = template.values.size
    vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return template.with_values(vals)


def check_adjoint(op: LinOp, trials: int = 20, seed: int = 0) -> float:
    """Max relative defect of <u, A v> = <A* u, v> over random trial pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        v = _random_like(op.domain_template, rng)
        u = _random_like(op.codomain_template, rng)
        lhs = op.codomain_inner(u, op.apply(v))
        rhs = op.domain_inner(op.apply_adjoint(u), v)
        nu = np.sqrt(abs(op.codomain_inner(u, u)))
        nv = np.sqrt(abs(op.domain_inner(v, v)))
        worst = max(worst, abs(lhs - rhs) / (nu * nv))
    return worst


def identity_linop(template, inner_spec: InnerProductSpec | None = None) -> LinOp:
    ip = inner_spec if inner_spec is not None else InnerProductSpec.l2()
    return LinOp(apply=lambda u: u, apply_adjoint=lambda u: u,
                 domain_inner=ip, codomain_inner=ip,
                 domain_template=template, codomain_template=template)
