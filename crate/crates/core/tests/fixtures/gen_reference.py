"""Regenerate reference.json: samples plus values from scipy/statsmodels.

Run from this directory: python3 gen_reference.py
"""
import json

import numpy as np
from scipy import stats
from statsmodels.tsa.arima.model import ARIMA
from statsmodels.tsa.stattools import adfuller


def normality_case(kind, seed, n):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) if kind == "normal" else rng.exponential(1.0, n)
    w, sw_p = stats.shapiro(x)
    jb = stats.jarque_bera(x)
    return {
        "kind": kind,
        "seed": seed,
        "values": x.tolist(),
        "shapiro_w": float(w),
        "shapiro_p": float(sw_p),
        "jarque_bera": float(jb.statistic),
        "jarque_bera_p": float(jb.pvalue),
    }


def df_case(kind, seed, n):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.cumsum(e) if kind == "random_walk" else e
    out = {"kind": kind, "seed": seed, "values": x.tolist()}
    for mode, reg in (("none", "n"), ("constant", "c"), ("constant_trend", "ct")):
        stat, p, _, nobs, crit = adfuller(x, maxlag=0, regression=reg, autolag=None)[:5]
        out[mode] = {"statistic": float(stat), "p_value": float(p), "nobs": int(nobs),
                     "crit_1": crit["1%"], "crit_5": crit["5%"], "crit_10": crit["10%"]}
    return out


def simulate_arima(seed, n, phi, theta, burn=200):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n + burn)
    w = np.zeros(n + burn)
    p, q = len(phi), len(theta)
    for t in range(n + burn):
        acc = e[t]
        for i in range(p):
            if t - 1 - i >= 0:
                acc += phi[i] * w[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= 0:
                acc += theta[j] * e[t - 1 - j]
        w[t] = acc
    w = w[burn:]
    return np.concatenate([[100.0], 100.0 + np.cumsum(w)])


def arima_case(seed, n, phi, theta):
    y = simulate_arima(seed, n, phi, theta)
    res = ARIMA(y, order=(len(phi), 1, len(theta)), trend="n",
                enforce_stationarity=True, enforce_invertibility=True).fit()
    params = res.params
    p, q = len(phi), len(theta)
    return {
        "seed": seed,
        "p": p,
        "q": q,
        "true_ar": phi,
        "true_ma": theta,
        "values": y.tolist(),
        "ar": [float(v) for v in params[:p]],
        "ma": [float(v) for v in params[p:p + q]],
        "sigma2": float(params[-1]),
        "loglik": float(res.llf),
    }


def main():
    normality = []
    for i in range(10):
        normality.append(normality_case("normal", 1000 + i, 100))
    for i in range(10):
        normality.append(normality_case("exponential", 2000 + i, 100))
    normality.append(normality_case("normal", 3000, 1000))

    dickey_fuller = [df_case("random_walk", 4002, 200), df_case("white_noise", 4001, 200)]

    arima = [
        arima_case(5000, 500, [0.7], [0.4]),
        arima_case(5001, 300, [0.5, -0.3], []),
        arima_case(5002, 300, [], [0.6, 0.2]),
        arima_case(5003, 400, [0.6], [-0.3]),
    ]

    with open("reference.json", "w") as fh:
        json.dump({"normality": normality, "dickey_fuller": dickey_fuller, "arima": arima},
                  fh, indent=1)


if __name__ == "__main__":
    main()
