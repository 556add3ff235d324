"""Skew/extended tent map evaluation and orbit diagnostics.

The skew tent map with peak alpha:

    F_a(x) = x / a            for 0 <= x <= a
             (1 - x)/(1 - a)  for a < x <= 1

and its extended form G_{a,b} that redirects the boundary states {0, 1}
to b so orbits escape the fixed point at 0.  All arithmetic goes through a
backend from :mod:`tentbreak.backend`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backend import DomainError, ParameterError


@dataclass(frozen=True)
class TentParams:
    """Peak position alpha and boundary-restart value beta (backend values)."""

    alpha: object
    beta: object


@dataclass
class OrbitReport:
    """Outcome of cycle detection on a digital orbit."""

    transient_len: int
    period: int
    hit_boundary_at: int | None
    samples: list = field(default_factory=list)
    conclusive: bool = True


def _check_open_unit(v, backend, name):
    if not (backend.zero < v < backend.one):
        raise ParameterError(f"{name} must lie strictly inside (0, 1)")


def skew_tent_step(x, alpha, backend):
    """One step of the plain skew tent map F_alpha."""
    _check_open_unit(alpha, backend, "alpha")
    if not backend.zero <= x <= backend.one:
        raise DomainError("x outside [0, 1]")
    if x <= alpha:
        return backend.div(x, alpha)
    return backend.div(backend.complement(x), backend.complement(alpha))


def extended_step(x, p: TentParams, backend):
    """One step of the extended map G: boundary states go to beta."""
    if x == backend.zero or x == backend.one:
        _check_open_unit(p.beta, backend, "beta")
        return p.beta
    return skew_tent_step(x, p.alpha, backend)


def derive_x0(t: int, gamma, n: int, backend):
    """Initial condition from a public timestamp t.

    s = 10**floor(log10 t) / t is in (0.1, 1]; the plain skew tent map with
    peak gamma is then applied 4n times.  Powers of ten give s = 1, which the
    map sends to 0 on the first step; that degenerate chain is allowed.
    """
    if t < 1:
        raise DomainError(f"timestamp must be a positive integer, got {t}")
    _check_open_unit(gamma, backend, "gamma")
    k = len(str(t)) - 1  # floor(log10 t), exact over integers
    x = backend.from_ratio(10 ** k, t)
    for _ in range(4 * n):
        x = skew_tent_step(x, gamma, backend)
    return x


def iterate_orbit(x0, p: TentParams, count: int, backend):
    """The first `count` iterates [x_1, ..., x_count] of G from x0."""
    out = []
    x = x0
    for _ in range(count):
        x = extended_step(x, p, backend)
        out.append(x)
    return out


def orbit_stream(x0, p: TentParams, backend):
    """Infinite generator x0, x1, x2, ... (includes the initial state)."""
    x = x0
    while True:
        yield x
        x = extended_step(x, p, backend)


def binary_precision(x, backend) -> int:
    """Position of the least significant set bit after the binary point."""
    return backend.binary_precision(x)


def analyze_orbit(x0, p: TentParams, max_iter: int, backend,
                  sample_limit: int = 64) -> OrbitReport:
    """Detect the eventual cycle of the orbit of G from x0.

    State equality is exact (ints or floats), so a visited-state map gives
    the transient length and period directly.  If no state repeats within
    max_iter steps the report is flagged inconclusive.
    """
    seen = {}
    samples = []
    hit = None
    x = x0
    for i in range(max_iter + 1):
        if x in seen:
            first = seen[x]
            return OrbitReport(transient_len=first, period=i - first,
                              hit_boundary_at=hit, samples=samples)
        seen[x] = i
        if len(samples) < sample_limit:
            samples.append(x)
        if hit is None and i > 0 and (x == backend.zero or x == backend.one):
            hit = i
        x = extended_step(x, p, backend)
    return OrbitReport(transient_len=0, period=1, hit_boundary_at=hit,
                       samples=samples, conclusive=False)


def first_hit_boundary(x0, p: TentParams, max_iter: int, backend) -> int | None:
    """Index of the first iterate landing exactly on 0 or 1, if any."""
    x = x0
    for i in range(1, max_iter + 1):
        x = extended_step(x, p, backend)
        if x == backend.zero or x == backend.one:
            return i
    return None
