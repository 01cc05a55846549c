"""Adaptive time stepping of the Birkhoff-coordinate system and trajectory I/O.

The flow is integrated for z_n = e^{-i n^2 t} zeta_n, which removes the
fast linear rotation, with the Dormand-Prince 5(4) pair. Local errors are
measured in the h^{1/2} norm sqrt(sum n |e_n|^2) and sample times are hit
by the pair's continuous extension.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .core import BirkhoffState, FourierFunction, InvalidInputError, RunConfig, l2_norm_sq
from .spectral import spectral_params
from .vector_field import vector_field_gauge

# Dormand-Prince 5(4) tableau with its 4th-order continuous extension
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th- and 4th-order weights, last entry for the FSAL stage
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

MIN_STEP = 1e-12
MAX_H_HALF_NORM = 10.0


class StiffnessError(RuntimeError):
    """Step size fell below ``MIN_STEP``; ``last_state`` is the last accepted state."""

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class DivergenceError(RuntimeError):
    """The state became non-finite."""

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


def _weights(N):
    return np.arange(1, N + 1, dtype=float)


def h_half_norm(v):
    """sqrt(sum_n n |v_n|^2)."""
    v = np.asarray(v)
    return float(np.sqrt(np.sum(_weights(v.size) * np.abs(v) ** 2)))


def _rot(t, N):
    n2 = _weights(N) ** 2
    return np.exp(1j * np.mod(n2 * t, 2 * np.pi))


def _dp_step(fun, t, y, f0, h):
    """One Dormand-Prince step; returns (y_new, f_new, stages, error_vector)."""
    K = np.empty((7, y.size), complex)
    K[0] = f0
    for s in range(1, 6):
        dy = h * np.dot(_A[s], K[:s])
        K[s] = fun(t + _C[s] * h, y + dy)
    y_new = y + h * np.dot(_B, K[:6])
    K[6] = fun(t + h, y_new)
    err = h * np.dot(_E, K)
    return y_new, K[6], K, err


def _check_finite(y, t, z_prev, t_prev):
    if not np.all(np.isfinite(y)):
        raise DivergenceError(
            f"non-finite state at t = {t:.6g}",
            last_state=BirkhoffState(t_prev, _rot(t_prev, z_prev.size) * z_prev),
        )


def step(state, dt, alpha=0.0):
    """One embedded step of size ``dt`` from ``state``.

    Returns
    -------
    new_state : BirkhoffState
    error_estimate : float
        h^{1/2} norm of the difference between the embedded solutions.
    """
    N = state.N
    t = state.t
    z = np.conj(_rot(t, N)) * state.zeta

    def fun(s, y):
        return vector_field_gauge(s, y, alpha)

    y_new, _, _, err = _dp_step(fun, t, z, fun(t, z), dt)
    _check_finite(y_new, t + dt, z, t)
    return BirkhoffState(t + dt, _rot(t + dt, N) * y_new), h_half_norm(err)


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostic channels.

    Attributes
    ----------
    times : ndarray, shape (S,)
    data : ndarray, shape (S, K)
        zeta_1..zeta_N per sample (``kind == "birkhoff"``) or the Fourier
        coefficients u_hat(0..M/2) (``kind == "fourier"``).
    diagnostics : dict of ndarray
        Channels of length S.
    config : RunConfig
    kind : str
    stats : dict
        Step counts and similar bookkeeping.
    """

    times: np.ndarray
    data: np.ndarray
    diagnostics: dict
    config: RunConfig
    kind: str = "birkhoff"
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    @property
    def zeta(self):
        if self.kind != "birkhoff":
            raise AttributeError("Fourier trajectories carry no Birkhoff coordinates")
        return self.data

    @property
    def gamma(self):
        return np.abs(self.zeta) ** 2

    def state(self, i):
        return BirkhoffState(self.times[i], self.zeta[i])

    def function(self, i):
        if self.kind != "fourier":
            raise AttributeError("Birkhoff trajectories carry no Fourier coefficients")
        return FourierFunction(self.data[i], self.config.M)

    def columns(self):
        prefix = "zeta" if self.kind == "birkhoff" else "u"
        start = 1 if self.kind == "birkhoff" else 0
        cols = ["t", *self.diagnostics]
        for n in range(start, start + self.data.shape[1]):
            cols += [f"re_{prefix}_{n}", f"im_{prefix}_{n}"]
        return cols

    def to_csv(self, path):
        """One header line, then t, the diagnostic channels and Re/Im pairs per row."""
        S = len(self)
        table = np.empty((S, 1 + len(self.diagnostics) + 2 * self.data.shape[1]))
        table[:, 0] = self.times
        for j, v in enumerate(self.diagnostics.values()):
            table[:, 1 + j] = v
        off = 1 + len(self.diagnostics)
        table[:, off::2] = self.data.real
        table[:, off + 1 :: 2] = self.data.imag
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for row in table:
                w.writerow([repr(float(x)) for x in row])

    def to_dict(self):
        return {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "times": self.times.tolist(),
            "diagnostics": {k: np.asarray(v).tolist() for k, v in self.diagnostics.items()},
            "data": {"re": self.data.real.tolist(), "im": self.data.imag.tolist()},
            "stats": self.stats,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, d):
        data = np.array(d["data"]["re"]) + 1j * np.array(d["data"]["im"])
        return cls(
            times=np.array(d["times"], float),
            data=data.reshape(len(d["times"]), -1),
            diagnostics={k: np.array(v, float) for k, v in d["diagnostics"].items()},
            config=RunConfig.from_dict(d["config"]),
            kind=d["kind"],
            stats=d.get("stats", {}),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_csv(cls, path, config):
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        first = next(i for i, c in enumerate(header) if c.startswith("re_"))
        kind = "birkhoff" if header[first].startswith("re_zeta") else "fourier"
        diags = {c: table[:, i] for i, c in enumerate(header[1:first], start=1)}
        data = table[:, first::2] + 1j * table[:, first + 1 :: 2]
        return cls(table[:, 0].copy(), data, diags, config, kind)


def birkhoff_diagnostics(times, zeta, ps_values=(0.0, 1.0)):
    """Per-sample channels: ||u||^2, |<u|e^{ix}>|^2, sum_{n>=0} gamma_n gamma_{n+1}, P_s."""
    from .diagnostics import ps_functional

    S, N = zeta.shape
    n = _weights(N)
    out = {
        "l2_norm_sq": np.empty(S),
        "mode1_sq": np.empty(S),
        "gap_product_sum": np.empty(S),
    }
    for s in ps_values:
        out[f"P_{s:g}"] = np.empty(S)
    for i in range(S):
        g = np.abs(zeta[i]) ** 2
        params = spectral_params(g)
        z = np.concatenate([[1.0], zeta[i]])
        w = -np.sum(params.a_star * np.conj(z[:-1]) * z[1:])
        ge = np.concatenate([[1.0], g])
        out["l2_norm_sq"][i] = 2 * np.sum(n * g)
        out["mode1_sq"][i] = abs(w) ** 2
        out["gap_product_sum"][i] = np.sum(ge[:-1] * ge[1:])
        st = BirkhoffState(times[i], zeta[i])
        for s in ps_values:
            out[f"P_{s:g}"][i] = ps_functional(st, s)
    return out


def fourier_diagnostics(coeffs, M):
    S = coeffs.shape[0]
    out = {"l2_norm_sq": np.empty(S), "mode1_sq": np.empty(S)}
    for i in range(S):
        u = FourierFunction(coeffs[i], M)
        out["l2_norm_sq"][i] = l2_norm_sq(u)
        out["mode1_sq"][i] = abs(coeffs[i][1]) ** 2
    return out


def sample_times(t0, t_end, dt):
    k = int(np.floor((t_end - t0) / dt + 1e-9))
    ts = t0 + dt * np.arange(k + 1)
    if t_end - ts[-1] > 1e-9 * max(1.0, abs(t_end)):
        ts = np.append(ts, t_end)
    return ts


def evolve(initial, config, h0=None):
    """Integrate the damped flow from ``initial`` to ``config.t_end``.

    Parameters
    ----------
    initial : BirkhoffState
    config : RunConfig
        Uses ``alpha``, ``t_end``, ``sample_dt``, ``tol`` and ``ps_values``.
    h0 : float, optional
        First trial step.

    Returns
    -------
    Trajectory
    """
    if h_half_norm(initial.zeta) > MAX_H_HALF_NORM:
        raise InvalidInputError("initial state outside the h^{1/2} ball of radius 10")
    alpha, tol = float(config.alpha), float(config.tol)
    N = initial.N
    t = initial.t
    ts = sample_times(t, t + config.t_end, config.sample_dt)
    out = np.empty((ts.size, N), complex)
    out[0] = initial.zeta

    def fun(s, y):
        return vector_field_gauge(s, y, alpha)

    y = np.conj(_rot(t, N)) * initial.zeta
    f = fun(t, y)
    h = h0 if h0 is not None else min(config.sample_dt, 0.01)
    nacc = nrej = 0
    j = 1
    t_final = ts[-1]
    while j < ts.size:
        h = min(h, t_final - t)
        if h < MIN_STEP and t_final - t > MIN_STEP:
            raise StiffnessError(
                f"step size underflow at t = {t:.6g}", last_state=BirkhoffState(t, _rot(t, N) * y)
            )
        y_new, f_new, K, err_vec = _dp_step(fun, t, y, f, h)
        _check_finite(y_new, t + h, y, t)
        err = h_half_norm(err_vec)
        if err <= tol or h <= MIN_STEP:
            t_new = t + h
            # dense output for every sample in (t, t_new]
            while j < ts.size and ts[j] <= t_new + 1e-12:
                theta = (ts[j] - t) / h
                if abs(ts[j] - t_new) <= 1e-12:
                    yj = y_new
                else:
                    Q = K.T @ _P
                    yj = y + h * (Q @ theta ** np.arange(1, 5))
                out[j] = _rot(ts[j], N) * yj
                j += 1
            t, y, f = t_new, y_new, f_new
            nacc += 1
            fac = 5.0 if err == 0 else min(5.0, 0.9 * (tol / err) ** 0.2)
            h *= max(fac, 0.2)
        else:
            nrej += 1
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
    diags = birkhoff_diagnostics(ts, out, config.ps_values)
    return Trajectory(
        ts, out, diags, config, "birkhoff", {"accepted": nacc, "rejected": nrej}
    )
