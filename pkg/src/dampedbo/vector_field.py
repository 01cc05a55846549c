"""Damped Benjamin-Ono flow written in Birkhoff coordinates.

The damping -alpha(<u|cos>cos + <u|sin>sin) only sees the first Fourier
mode, so in Birkhoff coordinates the flow reads

    zeta_n' = i omega_n zeta_n - alpha(<u|cos> dzeta_n.cos + <u|sin> dzeta_n.sin)

and everything on the right is an explicit function of zeta. The
derivatives dzeta_n.cos and dzeta_n.sin are assembled from coefficient
tables p*, q*, A*, A+-, B* that depend on the actions only; they multiply
the quadratic blocks beta_k = conj(zeta_k) zeta_{k+1}.

Indexing: tables are zero-based with row n = 0..N and column k = 0..N-1
(block beta_k, the last block beta_N vanishes under the truncation).
Sign conventions were fixed against central finite differences of the
direct Birkhoff map; see tests/test_vector_field.py.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BirkhoffState, as_gamma
from .spectral import SpectralParams, spectral_params


@dataclass(frozen=True)
class FieldWorkspace:
    """Per-evaluation cache shared by every piece of the field.

    ``m`` holds the diagonal entries m_n = -a_n^* conj(zeta_n) zeta_{n+1}
    (n = 0..N-1); their sum ``sum_m`` equals <u|e^{ix}>.
    """

    state: BirkhoffState
    params: SpectralParams
    zeta: np.ndarray  # zeta_0..zeta_N with zeta_0 = 1
    beta: np.ndarray  # conj(zeta_k) zeta_{k+1}, k = 0..N-1
    m: np.ndarray
    sum_m: complex
    p_star: np.ndarray  # n = 0..N, p*_0 = 0
    q_star: np.ndarray  # n = 0..N, q*_N unused (multiplies zeta_{N+1} = 0)
    A_star: np.ndarray  # (N+1, N)
    A_plus: np.ndarray  # (N+1, N), column j multiplies beta_j
    A_minus: np.ndarray  # (N+1, N), column k multiplies conj(beta_k)
    B_star: np.ndarray  # (N+1, N), column k multiplies conj(beta_k)


def frequencies(gamma):
    """omega_n = n^2 - 2 sum_k min(k, n) gamma_k, n = 1..N, via prefix sums."""
    g = as_gamma(gamma)
    N = g.size
    n = np.arange(1, N + 1)
    # sum_k min(k,n) g_k = sum_{k<=n} k g_k + n sum_{k>n} g_k
    head = np.cumsum(n * g)
    tail = np.concatenate([np.cumsum(g[::-1])[::-1][1:], [0.0]])
    return n.astype(float) ** 2 - 2 * (head + n * tail)


def _sqrt_tables(params):
    N = params.N
    g = np.concatenate([[1.0], params.gamma])  # gamma_0 = 1
    lam = params.lam
    kap = params.kappa
    mu = np.concatenate([[np.nan], params.mu])  # mu_1..mu_N at their own index
    return N, g, lam, kap, mu, np.sqrt(kap), np.sqrt(mu)


def _tables(params):
    """Action-only coefficient tables p*, q*, A*, A+, A-, B*."""
    N, g, lam, kap, mu, sk, sm = _sqrt_tables(params)
    a = params.a_star
    idx = np.arange(N + 1)
    col = np.arange(N)
    D = lam[:, None] - lam[None, :]  # D[p, n] = lambda_p - lambda_n
    off = idx[:, None] != idx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(off, 1.0 / D, 0.0)
        # R[p, n] = 1/(1 - gamma_p/(lambda_p - lambda_n)) = D/(D - gamma_p)
        R = np.where(off, D / (D - g[:, None]), 0.0)
    R[0, :] = 0.0  # the p sums below start at p = 1

    # A*: derivative of ln kappa_n along the block beta_k
    n_ = idx[:, None]
    k_ = col[None, :]
    Rt, It = R.T, inv.T  # index as [n, p]
    gk = g[:N][None, :]
    ak = a[None, :]
    A = np.zeros((N + 1, N))
    generic = (k_ != 0) & (k_ != n_)
    A += np.where(generic, Rt[:, :N] * ak * (gk * It[:, :N] ** 2 - It[:, :N]), 0.0)
    nxt = (k_ + 1 != n_) & (k_ != n_)
    A += np.where(nxt, Rt[:, 1:] * ak * It[:, 1:], 0.0)
    first = (k_ == 0) & (n_ >= 1)
    A += np.where(first, a[0] / (lam[:, None] - lam[0] + (n_ == 0)), 0.0)
    diag = np.zeros(N + 1)
    sum_p = np.sum(Rt[:, 1:] * g[None, 1:] * It[:, 1:] ** 2, axis=1)  # sum over p >= 1, p != n
    diag[:N] = -a * sum_p[:N]
    diag[1:N] -= a[1:] / (lam[1:N] - lam[0])
    diag[:N] += a * R[idx[1:], idx[:-1]] * inv[idx[1:], idx[:-1]]
    A[idx[:N], idx[:N]] = diag[:N]

    # A+: coefficient of beta_{k-1}, k = 1..N, stored at column k-1
    Ap = np.zeros((N + 1, N))
    tail0 = np.sum(kap[2:] * g[2:] / ((lam[2:] - lam[0]) * (lam[2:] - lam[0] - 1)))
    Ap[:, 0] += sm[1] * sk[1] / sk[0] / (1 + g[1]) + sm[1] / (sk[0] * sk[1]) * tail0
    k = np.arange(1, N + 1)
    blue = sm[k] / (1 + g[k]) * sk[k - 1] / sk[k]
    k2 = k[k >= 2]
    blue[k >= 2] += mu[k2 - 1] / (sm[k2] * (1 + g[k2 - 1]) * (1 + g[k2] + g[k2 - 1])) * sk[k2] / sk[k2 - 1]
    p = np.arange(N)[:, None]  # p = 0..N-1
    kk = k[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        term = (
            mu[p + 1] / sm[kk] * sk[kk] * sk[kk - 1] / (kap[p + 1] * (lam[p] - lam[kk - 1]))
            * g[p + 1] / ((lam[kk] - lam[p] - 1) * (lam[kk - 1] - lam[p] - 1))
        )
    term = np.where((p != kk - 2) & (p != kk - 1), term, 0.0)
    blue -= term.sum(axis=0)
    # the band 1 <= k <= n enters with a minus sign
    band = (kk <= n_) & (kk >= 1)
    Ap -= np.where(band, blue[None, :], 0.0)
    l = np.arange(1, N + 1)[:, None]  # l = 1..N
    with np.errstate(divide="ignore", invalid="ignore"):
        vio = (
            sm[kk] * sk[kk - 1] / sk[kk] * g[l]
            / ((lam[kk - 1] - lam[l]) * (lam[kk - 1] - lam[l - 1] - 1) * (lam[l] - lam[kk - 1] - 1))
        )
    vio = np.where((l != kk) & (l != kk - 1), vio, 0.0)
    # cumulative over l <= n
    cum = np.vstack([np.zeros((1, N)), np.cumsum(vio, axis=0)])
    Ap -= cum

    # A-: coefficient of conj(beta_k), k = 0..N-1
    Am = np.zeros((N + 1, N))
    k = col
    k1 = k[1:]
    Am[:, 1:] += (sm[k1 + 1] * sk[k1] / sk[k1 + 1] / ((lam[k1] - lam[0]) * (lam[0] - lam[k1] - 1)))[None, :]
    blue = np.zeros(N)
    blue[1:] = (
        sm[k1 + 1] / ((1 + g[k1 + 1] + g[k1]) * (1 + g[k1 + 1])) * sk[k1 + 1] / sk[k1]
        + sm[k1 + 1] / (1 + g[k1]) * sk[k1] / sk[k1 + 1]
    )
    p = idx[:, None]  # p = 0..N
    kk = k1[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        term = (
            sm[kk + 1] * kap[p] / (sk[kk] * sk[kk + 1] * (lam[p] - lam[kk]))
            * g[p] / ((lam[p] - lam[kk - 1] - 1) * (lam[p] - lam[kk] - 1))
        )
    term = np.where((p != kk) & (p != kk + 1), term, 0.0)
    blue[1:] += term.sum(axis=0)
    kk = k[None, :]
    band = (kk <= n_) & (kk >= 1)
    Am -= np.where(band, blue[None, :], 0.0)
    l = np.arange(1, N + 1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        vio = (
            sm[kk + 1] * sk[kk] / sk[kk + 1] * g[l]
            / ((lam[kk] - lam[l - 1]) * (lam[l] - lam[kk] - 1) * (lam[kk] - lam[l - 1] - 1))
        )
    vio = np.where((l != kk) & (l != kk + 1), vio, 0.0)
    cum = np.vstack([np.zeros((1, N)), np.cumsum(vio, axis=0)])
    Am += cum

    # p*, q*, B*
    ps = np.zeros(N + 1)
    ps[1:] = -sm[1:] * sk[:-1] / (sk[1:] * (1 + g[1:]))
    qs = np.zeros(N + 1)
    n = idx[:N]
    with np.errstate(divide="ignore", invalid="ignore"):
        S = kap[:, None] * g[:, None] / (D[:, :N] * (D[:, :N] - 1))
    S = np.where((p != n[None, :]) & (p != n[None, :] + 1), S, 0.0)
    qs[:N] = sm[n + 1] / sk[n] * (sk[n + 1] / (1 + g[n + 1]) + S.sum(axis=0) / sk[n + 1])
    kk = col[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        B = sm[kk + 1] / ((lam[kk] - lam[n_]) * (lam[n_] - lam[kk] - 1)) * sk[kk] / sk[kk + 1]
    B = np.where((kk != n_) & (kk != n_ - 1), B, 0.0)
    return ps, qs, A, Ap, Am, B


def build_workspace(state, params=None):
    """Evaluate every action-only table and the blocks for ``state``."""
    if params is None:
        params = spectral_params(state.gamma)
    z = state.padded()
    beta = np.conj(z[:-1]) * z[1:]
    m = -params.a_star * beta
    ps, qs, A, Ap, Am, B = _tables(params)
    return FieldWorkspace(
        state=state, params=params, zeta=z, beta=beta, m=m, sum_m=complex(m.sum()),
        p_star=ps, q_star=qs, A_star=A, A_plus=Ap, A_minus=Am, B_star=B,
    )


def _ws(state, params):
    if isinstance(state, FieldWorkspace):
        return state
    return build_workspace(state, params)


def mode_one_projection(state, params=None):
    """<u|e^{ix}> = -sum_{k=0}^{N-1} a_k^* conj(zeta_k) zeta_{k+1}, zeta_0 = 1."""
    if isinstance(state, FieldWorkspace):
        return state.sum_m
    if params is None:
        params = spectral_params(state.gamma)
    z = state.padded()
    return complex(-np.sum(params.a_star * np.conj(z[:-1]) * z[1:]))


def delta_kappa(state, params=None):
    """d ln kappa_n.cos - i d ln kappa_n.sin for n = 0..N."""
    ws = _ws(state, params)
    return ws.A_star @ ws.beta


def c_plus_minus(state, params=None, n=None):
    """c_n^+ = sum A+ beta and c_n^- = sum A- conj(beta); arrays over n = 0..N or one index."""
    ws = _ws(state, params)
    cp = ws.A_plus @ ws.beta
    cm = ws.A_minus @ np.conj(ws.beta)
    if n is None:
        return cp, cm
    return complex(cp[n]), complex(cm[n])


def b_perp(state, params=None, n=None):
    """(b_n^+/sqrt(kappa_n), b_n^-/sqrt(kappa_n)); arrays over n = 0..N or one index."""
    ws = _ws(state, params)
    z = ws.zeta
    N = z.size - 1
    up = np.zeros(N + 1, complex)
    up[:N] = ws.q_star[:N] * z[1:]
    down = np.zeros(N + 1, complex)
    down[1:] = ws.p_star[1:] * z[:-1]
    down += (ws.B_star @ np.conj(ws.beta)) * z
    if n is None:
        return up, down
    return complex(up[n]), complex(down[n])


def _dzeta(ws):
    z = ws.zeta
    dk = delta_kappa(ws)
    cp, cm = c_plus_minus(ws)
    bp, bm = b_perp(ws)
    xi_cos = (cp + cm) / 2
    # <xi|sin> = i(c+ - c-)/2, the sign checked against finite differences
    xi_sin = 1j * (cp - cm) / 2
    dcos = z * (-1j * xi_cos.imag - dk.real / 2) + (bp + bm) / 2
    dsin = z * (-1j * xi_sin.imag + dk.imag / 2) + 1j * (bp - bm) / 2
    return dcos[1:], dsin[1:]


def dzeta_cos(state, params=None):
    """dzeta_n[u].cos for n = 1..N."""
    return _dzeta(_ws(state, params))[0]


def dzeta_sin(state, params=None):
    """dzeta_n[u].sin for n = 1..N."""
    return _dzeta(_ws(state, params))[1]


def _damping(ws):
    # <u|cos> = Re <u|e^{ix}>, <u|sin> = -Im <u|e^{ix}>
    w = ws.sum_m
    dcos, dsin = _dzeta(ws)
    return w.real * dcos - w.imag * dsin


def vector_field(state, alpha):
    """d zeta_n / dt for n = 1..N."""
    ws = build_workspace(state)
    out = 1j * frequencies(ws.params.gamma) * state.zeta
    if alpha:
        out -= alpha * _damping(ws)
    return out


def vector_field_gauge(t, z, alpha):
    """Field of z_n = e^{-i n^2 t} zeta_n, free of the fast n^2 rotation.

    F_n = i omega~_n z_n - alpha e^{-i n^2 t} Z_n(zeta), with
    omega~_n = omega_n - n^2 = -2 sum_k min(k, n) |z_k|^2.
    """
    z = np.asarray(z, complex)
    N = z.size
    n2 = np.arange(1, N + 1, dtype=float) ** 2
    gamma = np.abs(z) ** 2
    out = 1j * (frequencies(gamma) - n2) * z
    if alpha and np.any(z != 0):
        rot = np.exp(1j * np.mod(n2 * t, 2 * np.pi))
        ws = build_workspace(BirkhoffState(t, rot * z))
        out -= alpha * np.conj(rot) * _damping(ws)
    return out


def dgamma_dt(state, params=None, alpha=0.0):
    """d gamma_n / dt = -alpha Re((m_{n-1} - m_n) conj(sum_p m_p)) for n = 1..N."""
    if isinstance(state, FieldWorkspace):
        params, state = state.params, state.state
    if params is None:
        params = spectral_params(state.gamma)
    z = state.padded()
    m = np.concatenate([-params.a_star * np.conj(z[:-1]) * z[1:], [0.0]])
    w = m.sum()
    return -alpha * np.real((m[:-1] - m[1:]) * np.conj(w))
