#!/usr/bin/env python3
"""Independent reference values for the ssrcps test suite.

Straight-line transcriptions of the bounds and of the stage-1 screening rule,
written without looking at the Rust code paths they check. Root finding uses
scipy's brentq rather than bisection, binomial quantities come from
scipy.stats, and the normal quantile from scipy.special.

Regenerate with:

    python3 scripts/reference_values.py > crates/core/tests/data/reference.json
"""

import json
import math

import numpy as np
from scipy.optimize import brentq
from scipy.stats import beta, binom, norm


def wsr_reference(w, lo, hi, delta):
    n = len(w)
    mu = []
    sig2 = []
    nu = []
    s = 0.0
    ss = 0.0
    prev_sig2 = 0.25
    for i in range(1, n + 1):
        s += w[i - 1]
        mu_i = (0.5 + s) / (1 + i)
        ss += (w[i - 1] - mu_i) ** 2
        sig2_i = (0.25 + ss) / (1 + i)
        nu_i = min(1.0 / (hi - lo), math.sqrt(2.0 * math.log(1.0 / delta) / (n * prev_sig2)))
        mu.append(mu_i)
        sig2.append(sig2_i)
        nu.append(nu_i)
        prev_sig2 = sig2_i

    def excess(r):
        k = 1.0
        best = -math.inf
        for j in range(n):
            k *= 1.0 - nu[j] * (w[j] - r)
            best = max(best, k)
        return best - 1.0 / delta

    if excess(hi) <= 0.0:
        return hi
    if excess(lo) > 0.0:
        return lo
    return brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def wsr_scaled_reference(w, lo, hi, delta):
    v = [(x - lo) / (hi - lo) for x in w]
    return lo + (hi - lo) * wsr_reference(v, 0.0, 1.0, delta)


def pinned_wsr_samples():
    out = []

    def add(name, values, lo, hi, delta):
        values = [float(x) for x in values]
        out.append(
            {
                "name": name,
                "values": values,
                "lo": lo,
                "hi": hi,
                "delta": delta,
                "wsr": wsr_reference(values, lo, hi, delta),
                "wsr_scaled": wsr_scaled_reference(values, lo, hi, delta),
            }
        )

    add("uniform01_seed0", np.random.default_rng(0).uniform(0, 1, 50), 0.0, 1.0, 0.1)
    add("uniform_m1_2_seed0", np.random.default_rng(0).uniform(-1, 2, 50), -1.0, 2.0, 0.1)
    add("bernoulli03_seed1", np.random.default_rng(1).binomial(1, 0.3, 100), 0.0, 1.0, 0.1)

    rng = np.random.default_rng(2)
    n, b = 130, 38
    lab = rng.binomial(1, 0.15, n).astype(float)
    correct = rng.binomial(1, 0.81, n)
    imp = lab * correct
    unl = rng.binomial(1, 0.12, n * b).astype(float)
    w = unl.reshape(n, b).mean(axis=1) + lab - imp
    add("pp_blocks_seed2", w, -1.0, 2.0, 0.1)

    add("beta25_seed3", np.random.default_rng(3).beta(2, 5, 200), 0.0, 1.0, 0.05)

    rng = np.random.default_rng(4)
    mix = np.where(rng.uniform(size=80) < 0.7, rng.uniform(-1, 0.5, 80), rng.uniform(0.5, 2, 80))
    add("mixture_m1_2_seed4", mix, -1.0, 2.0, 0.2)

    add("uniform01_small_seed5", np.random.default_rng(5).uniform(0, 1, 20), 0.0, 1.0, 0.01)
    add("uniform_2_5_seed6", np.random.default_rng(6).uniform(2, 5, 60), 2.0, 5.0, 0.1)
    add("bernoulli005_seed7", np.random.default_rng(7).binomial(1, 0.05, 300), 0.0, 1.0, 0.1)

    rng = np.random.default_rng(8)
    n, b, lam = 100, 10, 0.5
    lab = rng.binomial(1, 0.2, n).astype(float)
    imp = np.where(rng.uniform(size=n) < 0.7, lab, 1 - lab)
    unl = rng.binomial(1, 0.3, n * b).astype(float)
    w = lam * unl.reshape(n, b).mean(axis=1) + lab - lam * imp
    add("pp_lambda_half_seed8", w, -0.5, 1.5, 0.1)
    return out


def closed_form_cases():
    rng = np.random.default_rng(2024)
    hoeffding = []
    clt = []
    for case in range(20):
        n = int(rng.integers(5, 300))
        lo = float(rng.choice([0.0, -1.0, -0.5, 2.0]))
        width = float(rng.choice([1.0, 3.0, 2.0, 0.5]))
        hi = lo + width
        values = [float(x) for x in rng.uniform(lo, hi, n)]
        delta = float(rng.uniform(0.005, 0.6))
        mean = math.fsum(values) / n
        hoeffding.append(
            {
                "values": values,
                "lo": lo,
                "hi": hi,
                "delta": delta,
                "ucb": mean + (hi - lo) * math.sqrt(math.log(1.0 / delta) / (2.0 * n)),
            }
        )
        var = math.fsum((x - mean) ** 2 for x in values) / (n - 1)
        clt.append(
            {
                "values": values,
                "lo": lo,
                "hi": hi,
                "delta": delta,
                "ucb": mean + float(norm.ppf(1.0 - delta)) * math.sqrt(var / n),
            }
        )
    return hoeffding, clt


def clopper_pearson_cases():
    rng = np.random.default_rng(7)
    cases = []
    for _ in range(30):
        n = int(rng.integers(1, 3000))
        k = int(rng.integers(0, n + 1))
        delta = float(rng.uniform(0.001, 0.5))
        ucb = 1.0 if k == n else float(beta.ppf(1.0 - delta, k + 1, n - k))
        cases.append({"n": n, "k": k, "delta": delta, "ucb": ucb})
    return cases


def binomial_cdf_cases():
    rng = np.random.default_rng(11)
    cases = []
    for _ in range(40):
        n = int(rng.integers(1, 20000))
        p = float(rng.uniform(0, 1))
        centre = n * p
        k = int(min(n, max(0, round(centre + rng.normal(0, 2 * math.sqrt(n * p * (1 - p)) + 1)))))
        cases.append({"n": n, "k": k, "p": p, "cdf": float(binom.cdf(k, n, p))})
    return cases


def normal_quantiles():
    probs = [0.001, 0.01, 0.025, 0.1, 0.5, 0.9, 0.95, 0.975, 0.999]
    return [{"p": p, "z": float(norm.ppf(p))} for p in probs]


def halt_time(conf, q):
    t_max = len(conf)
    for t in range(t_max):
        if conf[t] >= q[t]:
            return t + 1
    return t_max


def gap_loss(sample, tau):
    y = sample["true_label"]
    full = 1 if y == sample["full_pred"] else 0
    early = 1 if y == sample["early_pred"][tau - 1] else 0
    return max(full - early, 0)


def screening_reference(samples, alpha, resolution):
    t_max = len(samples[0]["confidence"])
    eta_hat = [math.inf] * t_max
    steps = int(round(1.0 / resolution))
    for t in range(1, t_max + 1):
        eta = list(eta_hat)
        for s in range(steps + 1):
            xi = min(s * resolution, 1.0)
            eta[t - 1] = xi
            halted = []
            for smp in samples:
                tau = halt_time(smp["confidence"], eta)
                if tau <= t:
                    halted.append(gap_loss(smp, tau))
            if not halted:
                eta_hat[t - 1] = math.inf
                break
            if sum(halted) / len(halted) <= alpha:
                eta_hat[t - 1] = xi
                break
    return ["inf" if math.isinf(x) else x for x in eta_hat]


def screening_cases():
    four = [
        {"confidence": [0.6, 0.9], "early_pred": [0, 0], "full_pred": 0, "true_label": 0},
        {"confidence": [0.3, 0.7], "early_pred": [0, 0], "full_pred": 0, "true_label": 0},
        {"confidence": [0.8, 0.95], "early_pred": [1, 1], "full_pred": 1, "true_label": 1},
        {"confidence": [0.4, 0.2], "early_pred": [0, 1], "full_pred": 1, "true_label": 1},
    ]
    cases = [
        {"samples": four, "alpha": 0.2, "resolution": 0.5,
         "expected": screening_reference(four, 0.2, 0.5)},
        {"samples": four, "alpha": 0.3, "resolution": 0.5,
         "expected": screening_reference(four, 0.3, 0.5)},
    ]
    rng = np.random.default_rng(99)
    for _ in range(3):
        samples = []
        for _ in range(40):
            t_max = 4
            y = int(rng.integers(0, 2))
            full = y if rng.uniform() < 0.85 else 1 - y
            switch = int(rng.integers(1, t_max + 1))
            early = [full if (t + 1) >= switch or rng.uniform() < 0.5 else 1 - full for t in range(t_max)]
            conf = [float(round(rng.uniform(0.2, 1.0), 3)) for _ in range(t_max)]
            samples.append({"confidence": conf, "early_pred": early, "full_pred": full, "true_label": y})
        cases.append({"samples": samples, "alpha": 0.1, "resolution": 0.05,
                      "expected": screening_reference(samples, 0.1, 0.05)})
    return cases


def main():
    hoeffding, clt = closed_form_cases()
    out = {
        "wsr": pinned_wsr_samples(),
        "hoeffding": hoeffding,
        "clt": clt,
        "clopper_pearson": clopper_pearson_cases(),
        "binomial_cdf": binomial_cdf_cases(),
        "normal_quantiles": normal_quantiles(),
        "screening": screening_cases(),
    }
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
