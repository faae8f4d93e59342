"""Pilot runs behind the empirical constants frozen in the test suite.

Seeds here start at 10_000 so they never overlap the seeds used by tests.
Run with ``python scripts/pilot.py``; takes about a minute.
"""
import numpy as np

from eigsketch import baseline_gah, estimate_spectrum, singular_value_concentration
from eigsketch.bench import SpectrumSpec, generate_matrix

PILOT = 10_000


def concentration_constant(B, k, ell, trials):
    rec = singular_value_concentration(B, k, ell, trials, PILOT)
    per = rec.per_trial * np.sqrt(k)
    return np.quantile(per, 0.95), per.max()


def main():
    spec = SpectrumSpec("power-law", 64)
    A = generate_matrix(spec, PILOT)
    lam = spec.spectrum()
    errs = [np.max(np.abs(estimate_spectrum(A, 256, PILOT + s).values - lam)) for s in range(50)]
    print(f"d=64 power-law, k=256: median max-error {np.median(errs):.4f}")

    e1 = np.zeros((256, 256))
    e1[0, 0] = 1.0
    q95, mx = concentration_constant(e1, 400, 1, 50)
    print(f"e1e1^T, k=400, ell=1: sqrt(k)*dev q95={q95:.3f} max={mx:.3f}")

    B = generate_matrix(SpectrumSpec("power-law", 256), PILOT).to_dense()
    q95, mx = concentration_constant(B, 400, 5, 100)
    print(f"power-law B (d=256), k=400, max over j<=5: sqrt(k)*dev q95={q95:.3f} max={mx:.3f}")
    for k in (400, 1600):
        rec = singular_value_concentration(B, k, 5, 100, PILOT)
        fifth = rec.deviations[:, 4]
        print(f"power-law B (d=256), k={k}, j=5 only: median dev {np.median(fifth):.5f}, "
              f"sqrt(k)*dev q95={np.quantile(fifth, 0.95) * np.sqrt(k):.3f} max={fifth.max() * np.sqrt(k):.3f}")

    R = generate_matrix(SpectrumSpec("rank-one", 256), PILOT)
    tops = np.array([baseline_gah(R, 400, PILOT + s).values[0] for s in range(50)])
    print(f"rank-one baseline top, k=400: fraction within 0.2 of 1 = {np.mean(np.abs(tops - 1) <= 0.2):.2f}"
          f", max |top-1| = {np.max(np.abs(tops - 1)):.3f}")


if __name__ == "__main__":
    main()
