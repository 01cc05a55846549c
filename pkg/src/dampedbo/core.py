"""Shared data model: Birkhoff states, Fourier representations, norms and run configuration.

Inner products follow <f|g> = (1/2pi) int f conj(g) dx, so the Fourier
coefficients are u_hat(n) = <u|e^{inx}> and Parseval reads
||u||^2 = sum |u_hat(n)|^2.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


class InvalidInputError(ValueError):
    """Input data violating a documented precondition."""


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Actions:
    """Actions gamma_1..gamma_N, with the convention gamma_0 = 1.

    ``gamma[k]`` holds gamma_{k+1}; use :meth:`at` for one-based indexing.
    """

    gamma: np.ndarray

    def __post_init__(self):
        g = _frozen(self.gamma, float).reshape(-1)
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise InvalidInputError("actions must be finite and nonnegative")
        object.__setattr__(self, "gamma", g)

    @property
    def N(self):
        return self.gamma.size

    def at(self, n):
        """gamma_n for 0 <= n, zero beyond the truncation."""
        if n == 0:
            return 1.0
        if n < 0:
            raise IndexError(n)
        return float(self.gamma[n - 1]) if n <= self.N else 0.0

    def extended(self):
        """Array (gamma_0, gamma_1, ..., gamma_N) with gamma_0 = 1."""
        return np.concatenate([[1.0], self.gamma])


def as_gamma(gamma):
    """Plain float array gamma_1..gamma_N from an ``Actions`` or array-like."""
    if isinstance(gamma, Actions):
        return gamma.gamma
    g = np.asarray(gamma, dtype=float).reshape(-1)
    if np.any(g < 0):
        raise InvalidInputError("actions must be nonnegative")
    return g


@dataclass(frozen=True)
class BirkhoffState:
    """Truncated Birkhoff coordinates zeta_1..zeta_N at time t.

    ``zeta[k]`` holds zeta_{k+1}. The convention zeta_0 = 1 is implicit.
    """

    t: float
    zeta: np.ndarray

    def __post_init__(self):
        z = _frozen(self.zeta, complex).reshape(-1)
        if z.size < 1:
            raise InvalidInputError("a Birkhoff state needs N >= 1")
        if not np.all(np.isfinite(z)):
            raise InvalidInputError("Birkhoff coordinates must be finite")
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def N(self):
        return self.zeta.size

    @property
    def actions(self):
        return Actions(np.abs(self.zeta) ** 2)

    @property
    def gamma(self):
        return np.abs(self.zeta) ** 2

    def padded(self):
        """Array (zeta_0, ..., zeta_N) with zeta_0 = 1."""
        return np.concatenate([[1.0 + 0j], self.zeta])


@dataclass(frozen=True)
class FourierFunction:
    """Real zero-mean function on the torus sampled on M points.

    Only the nonnegative half of the spectrum is stored: ``coeff[n]`` is
    u_hat(n) for n = 0..M/2, and u_hat(-n) = conj(u_hat(n)) is implied, which
    makes the reality invariant hold by construction.
    """

    coeff: np.ndarray
    M: int

    def __post_init__(self):
        M = int(self.M)
        if M < 2 or M & (M - 1):
            raise InvalidInputError(f"grid size must be a power of two, got {M}")
        c = np.zeros(M // 2 + 1, complex)
        src = np.asarray(self.coeff, complex).reshape(-1)
        if src.size > c.size:
            if np.any(src[c.size:] != 0):
                raise InvalidInputError("coefficients beyond M/2 do not fit the grid")
            src = src[: c.size]
        c[: src.size] = src
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("Fourier coefficients must be finite")
        c[0] = 0.0
        # the Nyquist mode of a real signal is real
        c[-1] = c[-1].real
        object.__setattr__(self, "coeff", _frozen(c, complex))
        object.__setattr__(self, "M", M)

    def full(self):
        """Signed spectrum u_hat(n), n = -M/2..M/2."""
        c = self.coeff
        return np.concatenate([np.conj(c[:0:-1]), c])

    def mode(self, n):
        """u_hat(n) for any integer n (zero outside the grid band)."""
        if abs(n) >= self.coeff.size:
            return 0j
        return self.coeff[n] if n >= 0 else np.conj(self.coeff[-n])

    def samples(self):
        return samples_from_fourier(self)

    @classmethod
    def zeros(cls, M):
        return cls(np.zeros(M // 2 + 1, complex), M)


def grid(M):
    """Collocation points x_j = 2 pi j / M."""
    return 2 * np.pi * np.arange(M) / M


def fourier_from_samples(samples):
    """Fourier coefficients u_hat(n) = (1/M) sum_j u(x_j) e^{-i n x_j}.

    The mean is removed so that u_hat(0) = 0.

    Parameters
    ----------
    samples : array_like, shape (M,)
        Real samples on the uniform grid, M a power of two.

    Returns
    -------
    FourierFunction
    """
    u = np.asarray(samples)
    if np.iscomplexobj(u):
        if np.any(np.abs(u.imag) > 0):
            raise InvalidInputError("samples must be real")
        u = u.real
    u = u.astype(float).reshape(-1)
    if not np.all(np.isfinite(u)):
        raise InvalidInputError("samples must be finite")
    return FourierFunction(np.fft.rfft(u) / u.size, u.size)


def samples_from_fourier(u):
    """Inverse of :func:`fourier_from_samples` on the same grid."""
    return np.fft.irfft(u.coeff * u.M, n=u.M)


def l2_norm_sq(u):
    """(1/2pi) int u^2 dx, i.e. sum over all n of |u_hat(n)|^2."""
    c = np.abs(u.coeff) ** 2
    # interior modes appear twice (n and -n); the Nyquist mode once
    return float(2 * c[1:-1].sum() + c[-1])


def sobolev_norm_sq(state, s=0.0):
    """sum_n n^{1+2s} |zeta_n|^2, the squared h^{1/2+s} norm of zeta."""
    if s < 0:
        raise InvalidInputError("s must be nonnegative")
    n = np.arange(1, state.N + 1, dtype=float)
    return float(np.sum(n ** (1 + 2 * s) * state.gamma))


def one_gap_potential(r, M):
    """Potential (1 - r^2)/(1 - 2 r cos x + r^2) - 1, whose coefficients are r^|n|.

    Built directly in coefficient space, so it is exact up to the grid band.
    """
    if not 0 <= r < 1:
        raise InvalidInputError(f"one-gap parameter must satisfy 0 <= r < 1, got {r}")
    n = np.arange(M // 2 + 1)
    c = np.power(float(r), n).astype(complex)
    c[0] = 0.0
    return FourierFunction(c, M)


def random_smooth_potential(M, rng, amplitude=0.3, decay=0.6):
    """Random real trigonometric polynomial with geometrically decaying modes."""
    n = np.arange(M // 2 + 1)
    c = (rng.normal(size=n.size) + 1j * rng.normal(size=n.size)) * amplitude * decay**n
    c[decay**n < 1e-18] = 0.0
    return FourierFunction(c, M)


_INITIAL_KINDS = ("one-gap", "fourier", "file", "random")


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one run.

    ``initial_data`` is a tagged dictionary, one of

    * ``{"kind": "one-gap", "r": 0.5}``
    * ``{"kind": "fourier", "coefficients": [[re, im], ...]}`` for n = 1, 2, ...
    * ``{"kind": "file", "path": "u0.json"}`` holding the same coefficient list,
      or a text file of M real samples
    * ``{"kind": "random", "seed": 0, "amplitude": 0.3, "decay": 0.6}``
    """

    alpha: float = 0.0
    N: int = 32
    M: int = 256
    t_end: float = 1.0
    sample_dt: float = 0.05
    tol: float = 1e-10
    initial_data: dict = field(default_factory=lambda: {"kind": "one-gap", "r": 0.5})
    M_cut: int | None = None
    pde_dt: float = 1e-3
    ps_values: tuple = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "initial_data", dict(self.initial_data))
        object.__setattr__(self, "ps_values", tuple(float(s) for s in self.ps_values))
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self):
        out = []
        if not np.isfinite(self.alpha) or self.alpha < 0:
            out.append(f"alpha must be >= 0 (got {self.alpha})")
        if int(self.N) != self.N or self.N < 1:
            out.append(f"N must be a positive integer (got {self.N})")
        if int(self.M) != self.M or self.M < 4 or int(self.M) & (int(self.M) - 1):
            out.append(f"M must be a power of two >= 4 (got {self.M})")
        if self.M_cut is not None and (int(self.M_cut) != self.M_cut or self.M_cut < 1):
            out.append(f"M_cut must be a positive integer (got {self.M_cut})")
        if not np.isfinite(self.t_end) or self.t_end < 0:
            out.append(f"t_end must be >= 0 (got {self.t_end})")
        if not self.sample_dt > 0:
            out.append(f"sample_dt must be > 0 (got {self.sample_dt})")
        if not self.tol > 0:
            out.append(f"tol must be > 0 (got {self.tol})")
        if not self.pde_dt > 0:
            out.append(f"pde_dt must be > 0 (got {self.pde_dt})")
        if any(s < 0 for s in self.ps_values):
            out.append("ps_values must be >= 0")
        kind = self.initial_data.get("kind")
        if kind not in _INITIAL_KINDS:
            out.append(f"initial_data.kind must be one of {_INITIAL_KINDS} (got {kind!r})")
        elif kind == "one-gap":
            r = self.initial_data.get("r")
            if not isinstance(r, (int, float)) or not 0 <= r < 1:
                out.append(f"initial_data.r must satisfy 0 <= r < 1 (got {r!r})")
        elif kind == "fourier":
            cs = self.initial_data.get("coefficients")
            if not isinstance(cs, list) or not all(
                isinstance(c, (list, tuple)) and len(c) == 2 for c in cs
            ):
                out.append("initial_data.coefficients must be a list of [re, im] pairs")
        elif kind == "file":
            if not isinstance(self.initial_data.get("path"), str):
                out.append("initial_data.path must be a string")
        return out

    @property
    def lax_cut(self):
        """Galerkin size used for the direct Birkhoff map."""
        return int(self.M_cut) if self.M_cut is not None else max(4 * int(self.N), self.M // 2)

    def to_dict(self):
        d = asdict(self)
        d["ps_values"] = list(self.ps_values)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]):
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError([f"unknown field {k!r}" for k in extra])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError([str(exc)]) from exc

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def initial_function(config, base_dir=None):
    """Build u_0 on the config's grid from its ``initial_data`` description."""
    data = config.initial_data
    kind = data["kind"]
    M = config.M
    if kind == "one-gap":
        return one_gap_potential(float(data["r"]), M)
    if kind == "random":
        rng = np.random.default_rng(int(data.get("seed", 0)))
        return random_smooth_potential(
            M, rng, float(data.get("amplitude", 0.3)), float(data.get("decay", 0.6))
        )
    if kind == "fourier":
        return _from_pairs(data["coefficients"], M)
    path = Path(data["path"])
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    if path.suffix == ".json":
        with open(path) as fh:
            data = json.load(fh)
        return _from_pairs(data["coefficients"], M)
    samples = np.loadtxt(path, dtype=float).reshape(-1)
    if samples.size != M:
        raise InvalidInputError(f"{path} holds {samples.size} samples, expected M = {M}")
    return fourier_from_samples(samples)


def _from_pairs(pairs, M):
    c = np.zeros(M // 2 + 1, complex)
    vals = np.array([complex(a, b) for a, b in pairs])
    if vals.size > M // 2:
        raise InvalidInputError("more coefficients than the grid can hold")
    c[1 : 1 + vals.size] = vals
    return FourierFunction(c, M)
