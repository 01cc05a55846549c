"""Pseudospectral solver of the damped Benjamin-Ono equation

    u_t + alpha(<u|cos> cos + <u|sin> sin) = H u_xx - (u^2)_x

used as an independent reference for the Birkhoff-coordinate evolution.
In coefficients: u_hat(n)' = i n^2 u_hat(n) - i n (u^2)^(n) - (alpha/2) u_hat(n) 1_{n=1}
for n >= 0 (negative modes follow by conjugation).
"""

from __future__ import annotations

import numpy as np

from .birkhoff import birkhoff_forward
from .core import FourierFunction
from .integrator import DivergenceError, Trajectory, evolve, fourier_diagnostics, sample_times

BLOWUP = 1e6


def _symbol(M, alpha):
    n = np.arange(M // 2 + 1, dtype=float)
    L = 1j * n**2 + 0j
    L[1] -= alpha / 2
    return L


def _dealias_mask(M):
    # 2/3 rule: keep |n| <= M/3
    return np.arange(M // 2 + 1) <= M // 3


def _nonlinear(c, M, mask):
    n = np.arange(M // 2 + 1)
    u = np.fft.irfft(np.where(mask, c, 0) * M, n=M)
    sq = np.fft.rfft(u * u) / M
    return np.where(mask, -1j * n * sq, 0)


def pde_rhs(u, alpha):
    """Time derivative of ``u`` under the damped flow, as a FourierFunction."""
    M = u.M
    c = np.array(u.coeff)
    rhs = _symbol(M, alpha) * c + _nonlinear(c, M, _dealias_mask(M))
    return FourierFunction(rhs, M)


def _stable_dt(c, M, requested):
    u = np.fft.irfft(c * M, n=M)
    umax = float(np.max(np.abs(u)))
    if umax == 0:
        return requested
    return min(requested, 0.5 / ((M // 3) * umax))


def pde_evolve(u0, config):
    """Integrating-factor RK4 with fixed step and 2/3 dealiasing.

    The step is min(config.pde_dt, 0.5/(n_max max|u_0|)), shortened so that
    it divides ``config.sample_dt``.

    Returns
    -------
    Trajectory
        ``kind == "fourier"``; rows hold u_hat(0..M/2).
    """
    M = u0.M
    if M != config.M:
        raise ValueError(f"initial grid M = {M} differs from config.M = {config.M}")
    mask = _dealias_mask(M)
    c = np.where(mask, np.array(u0.coeff), 0)
    ts = sample_times(0.0, config.t_end, config.sample_dt)
    dt_max = _stable_dt(c, M, config.pde_dt)
    L = _symbol(M, config.alpha)
    out = np.empty((ts.size, c.size), complex)
    out[0] = c
    steps = 0
    cache = {}

    def factors(h):
        if h not in cache:
            cache[h] = (np.exp(L * h / 2), np.exp(L * h))
        return cache[h]

    def nl(v):
        return _nonlinear(v, M, mask)

    for j in range(1, ts.size):
        span = ts[j] - ts[j - 1]
        nsub = max(1, int(np.ceil(span / dt_max - 1e-9)))
        h = span / nsub
        E, E2 = factors(h)
        for _ in range(nsub):
            k1 = nl(c)
            k2 = nl(E * (c + h / 2 * k1))
            k3 = nl(E * c + h / 2 * k2)
            k4 = nl(E2 * c + h * E * k3)
            c = E2 * c + h / 6 * (E2 * k1 + 2 * E * (k2 + k3) + k4)
            c[0] = 0.0
            c[-1] = c[-1].real
            steps += 1
        umax = np.max(np.abs(np.fft.irfft(c * M, n=M)))
        if not np.isfinite(umax) or umax > BLOWUP:
            raise DivergenceError(f"solution blew up near t = {ts[j]:.6g}")
        out[j] = c
    diags = fourier_diagnostics(out, M)
    return Trajectory(ts, out, diags, config, "fourier", {"steps": steps, "dt_max": dt_max})


def cross_validate(u0, config, birkhoff_traj=None, pde_traj=None):
    """Evolve ``u0`` with both engines and compare in Birkhoff coordinates.

    The PDE samples are mapped through the direct Birkhoff map; the
    Birkhoff run starts from the image of ``u0``. Discrepancies are taken
    over n <= N/2 and all sample times.

    Returns
    -------
    dict
        ``max_action_discrepancy``, ``max_zeta_discrepancy``, per-sample
        arrays ``action_discrepancy`` and ``zeta_discrepancy``, ``times``.
    """
    N = config.N
    half = max(1, N // 2)
    M_cut = config.lax_cut
    if pde_traj is None:
        pde_traj = pde_evolve(u0, config)
    if birkhoff_traj is None:
        state0, _ = birkhoff_forward(u0, N, M_cut)
        birkhoff_traj = evolve(state0, config)
    S = len(pde_traj)
    act = np.empty(S)
    zdiff = np.empty(S)
    for i in range(S):
        st, _ = birkhoff_forward(pde_traj.function(i), half, M_cut)
        zb = birkhoff_traj.zeta[i, :half]
        act[i] = np.max(np.abs(st.gamma - np.abs(zb) ** 2))
        zdiff[i] = np.max(np.abs(st.zeta - zb))
    return {
        "times": pde_traj.times.tolist(),
        "action_discrepancy": act.tolist(),
        "zeta_discrepancy": zdiff.tolist(),
        "max_action_discrepancy": float(act.max()),
        "max_zeta_discrepancy": float(zdiff.max()),
        "compared_modes": half,
        "pde_steps": pde_traj.stats.get("steps"),
        "birkhoff_steps": birkhoff_traj.stats.get("accepted"),
    }
