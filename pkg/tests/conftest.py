"""Shared test helpers: tone builders, error-vector power, and the
brute-force sequence-detection oracle."""
import numpy as np
import pytest


def make_tone(freq_hz: float, fs_hz: float, n: int, complex_valued: bool = False):
    t = np.arange(n) / fs_hz
    if complex_valued:
        return np.exp(2j * np.pi * freq_hz * t)
    return np.cos(2 * np.pi * freq_hz * t)


def evp_db(reference: np.ndarray, estimate: np.ndarray, guard: int = 256) -> float:
    """Error-vector power in dB after optimal complex scalar alignment,
    relative to the reference's zero-mean (signal) power."""
    ref = reference[guard:-guard]
    est = estimate[guard:-guard]
    scale = np.vdot(est, ref) / np.vdot(est, est)
    err = ref - scale * est
    sig = ref - np.mean(ref)
    return 10.0 * np.log10(np.mean(np.abs(err) ** 2) / np.mean(np.abs(sig) ** 2))


_PATH_CACHE: dict = {}


def _all_paths(n: int) -> np.ndarray:
    """All 4**n level-index sequences, lexicographic, cached (int8)."""
    if n not in _PATH_CACHE:
        idx = np.arange(4**n)
        _PATH_CACHE[n] = np.stack(
            [(idx >> (2 * (n - 1 - k))) & 3 for k in range(n)], axis=1
        ).astype(np.int8)
    return _PATH_CACHE[n]


def mlsd_brute(y: np.ndarray, alpha: float, levels=(-3.0, -1.0, 1.0, 3.0)) -> np.ndarray:
    """Exhaustive minimum-metric search over all 4**N symbol paths.

    Independent oracle for the Viterbi detector: predicted[k] = s[k] +
    alpha*s[k-1] with s[-1] = 0, total squared error minimized globally.
    Per-stage costs are gathered from 4x4 branch tables so the full float
    path matrix is never materialized.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    levels = np.asarray(levels, dtype=np.float64)
    paths = _all_paths(n)
    cost = (y[0] - levels[paths[:, 0]]) ** 2
    for k in range(1, n):
        table = (y[k] - (levels[None, :] + alpha * levels[:, None])) ** 2
        cost += table[paths[:, k - 1], paths[:, k]]
    return levels[paths[int(np.argmin(cost))]]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
