"""Simulates the CUSUM-of-squares bound c0 under iid normal recursive residuals.

For m = n - k residuals, S_r = sum_{j<=r} w_j^2 / sum_j w_j^2 and the
statistic is max_r (S_r - r/m). Prints the upper alpha quantiles used for
two-sided bounds at 1%, 5% and 10% (alpha = 0.005, 0.025, 0.05).
"""
import numpy as np

GRID = [5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20, 25, 30, 35, 40, 50, 60, 70, 80,
        90, 100, 120, 140, 160, 180, 200, 250, 300, 400, 500]
REPS = 400_000
ALPHAS = [0.005, 0.025, 0.05]


def upper_quantiles(m, rng):
    out = np.empty(REPS)
    chunk = max(1, 20_000_000 // m)
    done = 0
    r = np.arange(1, m + 1) / m
    while done < REPS:
        b = min(chunk, REPS - done)
        w2 = rng.standard_normal((b, m)) ** 2
        s = np.cumsum(w2, axis=1)
        s /= s[:, -1:]
        out[done:done + b] = (s - r).max(axis=1)
        done += b
    return [float(np.quantile(out, 1 - a)) for a in ALPHAS]


def main():
    rng = np.random.default_rng(20260101)
    for m in GRID:
        q = upper_quantiles(m, rng)
        print(f"    ({m}, [{q[0]:.4f}, {q[1]:.4f}, {q[2]:.4f}]),")


if __name__ == "__main__":
    main()
