import numpy as np

import nexus_opt._kernels as kernels


def _covered_oracle(cand, archive_sorted, cutoffs):
    out = np.zeros(len(cand), dtype=bool)
    for i, c in enumerate(cand):
        for j in range(cutoffs[i]):
            if np.all(archive_sorted[j] <= c):
                out[i] = True
                break
    return out


def _evicted_oracle(rows, by):
    out = np.zeros(len(rows), dtype=bool)
    for i, r in enumerate(rows):
        for e in by:
            if np.all(e <= r) and np.any(e < r):
                out[i] = True
                break
    return out


def test_dominance_kernels_match_oracle_and_fallback(monkeypatch):
    rng = np.random.default_rng(0)
    cases = []
    for _ in range(20):
        archive = rng.random((int(rng.integers(1, 60)), 5))
        order = np.argsort(archive.sum(axis=1), kind="stable")
        archive = archive[order]
        cand = rng.random((int(rng.integers(1, 25)), 5))
        if len(cand) > 2:
            cand[0] = archive[0]  # exact duplicate exercises weak dominance
        cutoffs = np.searchsorted(archive.sum(axis=1), cand.sum(axis=1), side="right")
        cases.append((cand, archive, cutoffs))
    active = [
        (kernels.weakly_covered(c, a, cut), kernels.strictly_dominated(a, c))
        for c, a, cut in cases
    ]
    monkeypatch.setattr(kernels, "HAVE_NUMBA", False)
    fallback = [
        (kernels.weakly_covered(c, a, cut), kernels.strictly_dominated(a, c))
        for c, a, cut in cases
    ]
    for (cand, archive, cutoffs), (cov_a, ev_a), (cov_f, ev_f) in zip(
        cases, active, fallback
    ):
        assert np.array_equal(cov_a, _covered_oracle(cand, archive, cutoffs))
        assert np.array_equal(ev_a, _evicted_oracle(archive, cand))
        assert np.array_equal(cov_a, cov_f)
        assert np.array_equal(ev_a, ev_f)


def test_weakly_covered_respects_cutoffs():
    archive = np.array([[0.0, 0.0], [0.1, 0.1]])
    cand = np.array([[0.5, 0.5]])
    # Cutoff zero means no archive row may be considered a dominator.
    assert not kernels.weakly_covered(cand, archive, np.array([0]))[0]
    assert kernels.weakly_covered(cand, archive, np.array([2]))[0]
