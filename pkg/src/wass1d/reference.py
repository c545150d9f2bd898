"""Analytic true distributions, their quantile-grid discretizations, and
the discretization error bound.

The six study distributions (standard uniform, standard normal, Laplace,
Student's t with 20/10/5 degrees of freedom) expose quantile, CDF, density
and the truncated upper moment T(t, p) = int_t^inf (x - t)^p dP0.  The
discretization ``Q_M`` places the grid x_k = q(1/2 + k/M) and its mirror
image about the median, with mass 2/M at the centre atom and 1/M elsewhere;
``approx_error_bound`` evaluates the corresponding upper bound

    W_p^p(P0, Q_M) <= 2 T(x_{M/2-1}, p)
                      + (2/(M/2-1)) * sum_{k=1}^{M/2-1} |x_k - x_{k-1}|^p,

returning +inf whenever the tail moment diverges (Student's t with p >= df).
"""

from __future__ import annotations

import csv
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special
from scipy.integrate import quad

from .measures import DiscreteMeasure, SortedSample, abs_pow

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class ReferenceDistribution(ABC):
    """A true distribution P0 with analytic quantile/CDF/density access."""

    name: str

    @property
    @abstractmethod
    def median(self) -> float: ...

    @abstractmethod
    def quantile(self, u): ...

    @abstractmethod
    def cdf(self, x): ...

    @abstractmethod
    def pdf(self, x): ...

    def truncated_upper_moment(self, t: float, p: float) -> float:
        """T(t, p) = int_t^inf (x - t)^p dP0(x); +inf when divergent."""
        if p < 1.0:
            raise ValueError("order p must be >= 1")
        return self._tail_moment_quad(t, p)

    def _tail_moment_quad(self, t: float, p: float) -> float:
        # absolute tolerance 1e-10; quad's transform handles the infinite limit
        value, _ = quad(
            lambda x: (x - t) ** p * float(self.pdf(x)),
            t,
            np.inf,
            epsabs=1e-10,
            epsrel=1e-10,
            limit=200,
        )
        return value

    @staticmethod
    def _check_u(u):
        arr = np.asarray(u, dtype=float)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise ValueError("quantile argument must lie in (0, 1)")
        return arr

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Uniform01(ReferenceDistribution):
    name = "uniform"

    @property
    def median(self) -> float:
        return 0.5

    def quantile(self, u):
        return self._check_u(u) + 0.0

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        return np.where((arr > 0.0) & (arr < 1.0), 1.0, 0.0)

    def truncated_upper_moment(self, t: float, p: float) -> float:
        if p < 1.0:
            raise ValueError("order p must be >= 1")
        if t >= 1.0:
            return 0.0
        a = max(t, 0.0)
        return ((1.0 - t) ** (p + 1.0) - (a - t) ** (p + 1.0)) / (p + 1.0)


class StandardNormal(ReferenceDistribution):
    name = "normal"

    @property
    def median(self) -> float:
        return 0.0

    def quantile(self, u):
        return special.ndtri(self._check_u(u))

    def cdf(self, x):
        return special.ndtr(np.asarray(x, dtype=float))

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        return np.exp(-0.5 * arr * arr) / _SQRT_2PI

    def truncated_upper_moment(self, t: float, p: float) -> float:
        if p < 1.0:
            raise ValueError("order p must be >= 1")
        sf = float(special.ndtr(-t))  # survival, accurate deep in the tail
        phi = math.exp(-0.5 * t * t) / _SQRT_2PI
        if p == 1.0:
            return phi - t * sf
        if p == 2.0:
            return (1.0 + t * t) * sf - t * phi
        return self._tail_moment_quad(t, p)


class Laplace(ReferenceDistribution):
    name = "laplace"

    @property
    def median(self) -> float:
        return 0.0

    def quantile(self, u):
        arr = self._check_u(u)
        return np.where(arr < 0.5, np.log(2.0 * arr), -np.log(2.0 * (1.0 - arr)))

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        return np.where(arr < 0.0, 0.5 * np.exp(arr), 1.0 - 0.5 * np.exp(-arr))

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        return 0.5 * np.exp(-np.abs(arr))

    def truncated_upper_moment(self, t: float, p: float) -> float:
        if p < 1.0:
            raise ValueError("order p must be >= 1")
        if t >= 0.0:
            # substitute u = x - t: (1/2) e^{-t} Gamma(p+1)
            return 0.5 * math.exp(-t) * float(special.gamma(p + 1.0))
        return self._tail_moment_quad(t, p)


class StudentT(ReferenceDistribution):
    """Student's t with df degrees of freedom; T(t, p) = +inf for p >= df."""

    def __init__(self, df: float):
        if df <= 0:
            raise ValueError("degrees of freedom must be positive")
        self.df = float(df)
        self.name = f"t{df:g}"
        self._log_norm = (
            special.gammaln((self.df + 1.0) / 2.0)
            - special.gammaln(self.df / 2.0)
            - 0.5 * math.log(self.df * math.pi)
        )

    @property
    def median(self) -> float:
        return 0.0

    def quantile(self, u):
        return special.stdtrit(self.df, self._check_u(u))

    def cdf(self, x):
        return special.stdtr(self.df, np.asarray(x, dtype=float))

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        return np.exp(
            self._log_norm - 0.5 * (self.df + 1.0) * np.log1p(arr * arr / self.df)
        )

    def truncated_upper_moment(self, t: float, p: float) -> float:
        if p < 1.0:
            raise ValueError("order p must be >= 1")
        if p >= self.df:
            return math.inf
        return self._tail_moment_quad(t, p)

    def __repr__(self) -> str:
        return f"StudentT(df={self.df:g})"


DISTRIBUTION_NAMES = ("uniform", "normal", "laplace", "t20", "t10", "t5")


def by_name(name: str) -> ReferenceDistribution:
    """Resolve a CLI/config distribution name."""
    table = {
        "uniform": Uniform01,
        "normal": StandardNormal,
        "laplace": Laplace,
    }
    if name in table:
        return table[name]()
    if name.startswith("t"):
        try:
            df = float(name[1:])
        except ValueError:
            pass
        else:
            return StudentT(df)
    raise ValueError(
        f"unknown distribution {name!r}; expected one of {', '.join(DISTRIBUTION_NAMES)}"
    )


# ---------------------------------------------------------------------------
# Quantile-grid discretization and its error bound
# ---------------------------------------------------------------------------

def _quantile_grid(dist: ReferenceDistribution, M: int) -> np.ndarray:
    if M % 2 != 0 or M < 4:
        raise ValueError("M must be an even integer >= 4")
    half = M // 2
    us = 0.5 + np.arange(half) / M
    return np.asarray(dist.quantile(us), dtype=float)


def discretize(dist: ReferenceDistribution, M: int) -> DiscreteMeasure:
    """The M-atom quantile-grid approximation Q_M of the distribution.

    Atoms are x_k = q(1/2 + k/M) for k = 0..M/2-1 together with their
    reflections 2c - x_k about the median c; the centre atom carries mass
    2/M and every other atom 1/M.
    """
    xs = _quantile_grid(dist, M)
    c = dist.median
    atoms = np.concatenate([(2.0 * c - xs[1:])[::-1], xs])
    weights = np.full(atoms.size, 1.0 / M)
    weights[xs.size - 1] = 2.0 / M
    return DiscreteMeasure(atoms, weights)


def approx_error_bound(dist: ReferenceDistribution, M: int, p: float) -> float:
    """Upper bound on W_p^p(P0, Q_M); +inf when the tail moment diverges."""
    if p < 1.0:
        raise ValueError("order p must be >= 1")
    xs = _quantile_grid(dist, M)
    tail = dist.truncated_upper_moment(float(xs[-1]), p)
    if math.isinf(tail):
        return math.inf
    diffs = np.diff(xs).tolist()
    spacing = (2.0 / (xs.size - 1)) * math.fsum(abs_pow(d, p) for d in diffs)
    return 2.0 * tail + spacing


def sample(dist: ReferenceDistribution, n: int, seed: int) -> SortedSample:
    """n inverse-CDF draws from a seeded PCG64 stream, sorted.

    Uniforms are (k + 1/2) / 2^53 with k a 53-bit integer draw, so they are
    strictly inside (0, 1) and the output is reproducible bit for bit.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    k = rng.integers(0, 1 << 53, size=n, dtype=np.int64)
    u = (k + 0.5) * 2.0 ** -53
    return SortedSample(np.sort(np.asarray(dist.quantile(u), dtype=float)))


def error_bound_table(
    dist_names: Sequence[str],
    p_values: Sequence[float],
    m_values: Sequence[int],
) -> list[dict]:
    """Rows (dist, p, M, error_bound) for the discretization-error figure."""
    rows = []
    for name in dist_names:
        dist = by_name(name)
        for p in p_values:
            for m in m_values:
                rows.append(
                    {
                        "dist": name,
                        "p": p,
                        "M": m,
                        "error_bound": approx_error_bound(dist, m, p),
                    }
                )
    return rows


def write_error_bound_csv(path: str | Path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dist", "p", "M", "error_bound"])
        for row in rows:
            bound = row["error_bound"]
            writer.writerow(
                [row["dist"], repr(float(row["p"])), row["M"],
                 "inf" if math.isinf(bound) else repr(float(bound))]
            )
