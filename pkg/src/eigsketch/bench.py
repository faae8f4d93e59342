"""Spectrum generators, error sweeps and the lower-bound experiment driver.

Seed splitting: trial ``t`` of a sweep with master seed ``s`` builds its
matrix from ``sub_seed(s, 0, t)`` and sketches it with ``sub_seed(s, 1, t, j)``
for the j-th entry of the k list.  The matrix of trial t is therefore shared
by every k, and results do not depend on worker count or scheduling.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .fastpsd import FastSketchConfig, fast_psd_spectrum
from .lowerbound import (
    DEFAULT_TV_SAMPLES,
    adaptive_power_advantage,
    advantage_curve,
    tv_limit,
    tv_monte_carlo,
)
from .matrix import SymmetricMatrix, haar_orthogonal, rng_from_seed, sort_descending, sub_seed
from .sketch import baseline_gah, estimate_spectrum

KINDS = ("power-law", "flat", "rank-one", "signed-mix", "custom-list")
ESTIMATORS = ("corrected", "baseline", "fast-psd")


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a test spectrum.

    ``negative`` is the magnitude of the single negative eigenvalue of a
    signed-mix spectrum, in units of ||A||_F once normalized.  ``scale``
    multiplies the spectrum after normalization.  ``block`` > 0 builds a
    sparse block-diagonal matrix with dense ``block`` x ``block`` rotated
    blocks instead of one dense Haar rotation.
    """

    kind: str
    d: int
    normalize: bool = True
    negative: float = 0.3
    values: tuple = ()
    scale: float = 1.0
    diagonal: bool = False
    block: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}; expected one of {KINDS}")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.kind == "custom-list" and len(self.values) != self.d:
            raise ValueError(f"custom-list needs exactly d={self.d} values, got {len(self.values)}")
        if self.kind == "signed-mix" and not 0 < self.negative < 1:
            raise ValueError("signed-mix negative magnitude must lie in (0, 1)")
        if self.kind == "signed-mix" and self.d < 2:
            raise ValueError("signed-mix needs d >= 2")
        if self.block < 0:
            raise ValueError("block must be >= 0")

    @property
    def is_psd(self) -> bool:
        return bool(np.all(self.spectrum() >= 0))

    def spectrum(self) -> np.ndarray:
        d = self.d
        if self.kind == "power-law":
            lam = 1.0 / np.sqrt(np.arange(1, d + 1))
            if self.normalize:
                lam = lam * (1.0 / math.sqrt(np.sum(1.0 / np.arange(1, d + 1))))
        elif self.kind == "flat":
            lam = np.ones(d) / (math.sqrt(d) if self.normalize else 1.0)
        elif self.kind == "rank-one":
            lam = np.zeros(d)
            lam[0] = 1.0
        elif self.kind == "signed-mix":
            pos = 1.0 / np.sqrt(np.arange(1, d))
            if self.normalize:
                pos *= math.sqrt(1.0 - self.negative**2) / np.linalg.norm(pos)
                neg = self.negative
            else:
                neg = self.negative * math.sqrt(np.sum(pos**2) / (1.0 - self.negative**2))
            lam = np.concatenate([pos, [-neg]])
        else:
            lam = np.asarray(self.values, dtype=float)
            if self.normalize:
                norm = np.linalg.norm(lam)
                if norm == 0:
                    raise ValueError("cannot normalize an all-zero custom spectrum")
                lam = lam / norm
        return sort_descending(lam * self.scale)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_spec_text(text: str) -> SpectrumSpec:
    """Parse the ``key = value`` spectrum spec format.

    Recognized keys: kind, d, normalize, negative, values (comma separated),
    scale, diagonal, block.  ``#`` starts a comment.
    """
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        fields[key] = value
    converters = {
        "kind": str,
        "d": int,
        "normalize": _parse_bool,
        "negative": float,
        "values": lambda v: tuple(float(x) for x in v.replace(",", " ").split()),
        "scale": float,
        "diagonal": _parse_bool,
        "block": int,
    }
    unknown = set(fields) - set(converters)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    if "kind" not in fields or "d" not in fields:
        raise ValueError("spec needs at least 'kind' and 'd'")
    try:
        kwargs = {key: converters[key](value) for key, value in fields.items()}
    except ValueError as exc:
        raise ValueError(f"bad spec value: {exc}") from exc
    return SpectrumSpec(**kwargs)


def load_spec(path) -> SpectrumSpec:
    return parse_spec_text(Path(path).read_text())


def generate_matrix(spec: SpectrumSpec, seed: int) -> SymmetricMatrix:
    """Symmetric matrix Q diag(lambda) Q^T with the spectrum described by ``spec``."""
    lam = spec.spectrum()
    d = spec.d
    if spec.diagonal:
        return SymmetricMatrix.from_triples(np.arange(d), np.arange(d), lam, d)
    rng = rng_from_seed(seed)
    if spec.block:
        order = rng.permutation(d)
        blocks = []
        for start in range(0, d, spec.block):
            vals = lam[order[start:start + spec.block]]
            Q = haar_orthogonal(vals.size, rng)
            blocks.append((Q * vals) @ Q.T)
        return SymmetricMatrix.from_scipy(sp.block_diag(blocks, format="csr"))
    Q = haar_orthogonal(d, rng)
    return SymmetricMatrix.from_dense((Q * lam) @ Q.T)


@dataclass
class TrialReport:
    seed: int
    trial: int
    d: int
    k: int
    epsilon: float
    kind: str
    max_abs_error: float
    frobenius: float
    success: bool
    estimator: str
    wall_time: float
    min_estimate: float = field(default=0.0)

    def recompute_success(self) -> bool:
        return self.max_abs_error <= self.epsilon * self.frobenius

    def to_dict(self) -> dict:
        return asdict(self)


def _run_estimator(estimator: str, A: SymmetricMatrix, k: int, seed: int, fast_m: int | None, fast_s: int):
    if estimator == "corrected":
        return estimate_spectrum(A, k, seed)
    if estimator == "baseline":
        return baseline_gah(A, k, seed)
    m = fast_m if fast_m is not None else 2 * k
    return fast_psd_spectrum(A, FastSketchConfig(m=m, k=k, seed=seed, s=fast_s))


def _trial(args) -> list[TrialReport]:
    spec, k_list, estimator, seed, t, epsilon, fast_m, fast_s = args
    A = generate_matrix(spec, sub_seed(seed, 0, t))
    lam = spec.spectrum()
    fro = float(np.linalg.norm(lam))
    out = []
    for j, k in enumerate(k_list):
        eps = epsilon if epsilon is not None else math.sqrt(4.0 / k)
        start = time.perf_counter()
        est = _run_estimator(estimator, A, k, sub_seed(seed, 1, t, j), fast_m, fast_s)
        elapsed = time.perf_counter() - start
        err = float(np.max(np.abs(est.values - lam)))
        out.append(TrialReport(
            seed=seed, trial=t, d=spec.d, k=int(k), epsilon=float(eps), kind=spec.kind,
            max_abs_error=err, frobenius=fro, success=err <= eps * fro, estimator=estimator,
            wall_time=elapsed, min_estimate=float(est.values[-1]),
        ))
    return out


def run_error_sweep(spec: SpectrumSpec, k_list, trials: int, estimator: str = "corrected", seed: int = 0,
                    epsilon: float | None = None, workers: int = 1, fast_m: int | None = None,
                    fast_s: int = 4) -> list[TrialReport]:
    """Estimate the spectrum of ``trials`` random matrices at every k in ``k_list``.

    The error is max_i |mu_i - lambda_i| against the exact spectrum from
    ``spec``.  ``epsilon`` sets the success threshold; when omitted each k
    uses its own sqrt(4 / k).  Reports come back ordered by (trial, k).
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")
    if estimator == "fast-psd" and not spec.is_psd:
        raise ValueError("the fast-psd estimator requires a PSD spectrum")
    if trials < 1 or not k_list:
        raise ValueError("need at least one trial and one k")
    jobs = [(spec, list(k_list), estimator, seed, t, epsilon, fast_m, fast_s) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = [_trial(job) for job in jobs]
    return [rep for batch in results for rep in batch]


def summarize(reports) -> list[dict]:
    """Per-(estimator, k) median error and success rate."""
    groups = {}
    for rep in reports:
        groups.setdefault((rep.estimator, rep.k), []).append(rep)
    rows = []
    for (estimator, k), reps in sorted(groups.items()):
        errs = np.array([r.max_abs_error for r in reps])
        rows.append({
            "estimator": estimator,
            "k": k,
            "trials": len(reps),
            "median_error": float(np.median(errs)),
            "mean_error": float(errs.mean()),
            "success_rate": float(np.mean([r.success for r in reps])),
        })
    return rows


def write_jsonl(path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict() if hasattr(rec, "to_dict") else rec, sort_keys=True) + "\n")


def write_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def run_lowerbound_suite(r: int, k_list, trials: int = 2000, seed: int = 0,
                         samples: int = DEFAULT_TV_SAMPLES, adaptive: bool = True) -> dict:
    """LR advantage curve, TV estimates and the limiting constant in one report."""
    k_list = sorted({int(k) for k in k_list})
    if not k_list or k_list[0] < 1 or k_list[-1] > r:
        raise ValueError(f"every k must lie in [1, r={r}]")
    curve = advantage_curve(r, k_list, trials, sub_seed(seed, 0))
    k_tenth = max(r // 10, 1)
    tv_tenth = tv_monte_carlo(k_tenth, r, samples, sub_seed(seed, 1))
    by_k = {o.k: o.advantage for o in curve}
    report = {
        "r": r,
        "trials": trials,
        "samples": samples,
        "seed": seed,
        "tv_limit_0.1": tv_limit(0.1),
        "tv_monte_carlo": {"n": k_tenth, "r": r, "value": tv_tenth.value, "stderr": tv_tenth.stderr},
        "curve": [o.to_dict() for o in curve],
        "checks": {},
    }
    checks = report["checks"]
    if k_tenth in by_k:
        checks["advantage_at_r_over_10_le_0.25"] = by_k[k_tenth] <= 0.25
    if len(k_list) > 1:
        checks["advantage_increases_first_to_last"] = by_k[k_list[-1]] > by_k[k_list[0]]
    if adaptive:
        budget = k_tenth
        adv = adaptive_power_advantage(r, budget, trials, sub_seed(seed, 2))
        report["adaptive"] = adv.to_dict()
        if budget in by_k:
            checks["adaptive_within_0.05_of_lr"] = adv.advantage <= by_k[budget] + 0.05
    return report
