import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdlhist.conditioning import is_pich, pich_bins
from mdlhist.dataset import DataSet
from mdlhist.exceptions import EmptyInputError, InvalidArgumentsError, InvariantViolationError, NotPichError, UnsplittableDegenerateError
from mdlhist.optimizer import BuildOptions, build_standard
from mdlhist.synthlab import GeneratorSpec, generate
from mdlhist.twolevel import (
    GlobalHistogram,
    Interval,
    Subset,
    SubsetPartition,
    _first_bin_count,
    _predicate,
    _Record,
    build_boundary,
    build_two_level,
    first_level_partition,
    from_standard,
    merge_adjacent_pwch,
    plan_split,
    split_pich_subset,
)

OPTS = BuildOptions()


@pytest.fixture(scope="module")
def outlier_data():
    spec = GeneratorSpec("gaussian", 10_000, 0, {"mu": 1.0, "sigma": 0.1}, {"count": 1, "value": 2.0**34})
    return generate(spec)


@pytest.fixture(scope="module")
def spike_data():
    spec = GeneratorSpec("gaussian", 10_000, 0, {"mu": 1.0, "sigma": 0.1}, {"count": 100, "mu": 1.0, "sigma": 1e-10})
    return generate(spec)


def _subset(d, a, b, origin="log-interval"):
    data = d.take(a, b)
    return Subset(a, b, data, not is_pich(data), origin)


def check_global(h: GlobalHistogram, d: DataSet):
    h.validate()
    assert int(h.counts.sum()) == d.n
    bounds = h.bounds
    assert np.all(np.diff(bounds) > 0)
    assert bounds[0] < d.min_value and d.max_value < bounds[-1]
    widths = np.diff(bounds)
    assert math.fsum(h.densities * widths) == pytest.approx(1.0, abs=1e-9)
    # every entry falls in an interval whose count accounts for it
    idx = np.clip(np.searchsorted(bounds, d.values, side="right") - 1, 0, h.K - 1)
    assert np.bincount(idx, weights=d.freqs, minlength=h.K).astype(int).tolist() == h.counts.tolist()


# first level -----------------------------------------------------------------


def test_first_level_isolates_outlier(outlier_data):
    p = first_level_partition(outlier_data, OPTS)
    assert p.covering and len(p) >= 2
    assert p.subsets[-1].data.entries == [(2.0**34, 1)]


def test_first_level_single_subset_on_easy_data():
    d = DataSet.from_values([1.0, 2.0, 3.0, 4.0, 5.0])
    p = first_level_partition(d, OPTS)
    assert len(p) == 1 and p.covering and p.subsets[0].pwch


def test_merge_rejoins_gaussian_side(outlier_data):
    merged = merge_adjacent_pwch(first_level_partition(outlier_data, OPTS), OPTS)
    assert len(merged) == 2 and merged.covering
    assert merged.subsets[0].pwch and merged.subsets[0].data.max_value < 3.0


def test_merge_full_union_and_fixpoint():
    d = generate(GeneratorSpec("uniform", 500, 4))
    pieces = SubsetPartition(d, [_subset(d, a, a + 100) for a in range(0, 500, 100)])
    merged = merge_adjacent_pwch(pieces, OPTS)
    assert len(merged) == 1 and merged.subsets[0].data == d
    assert merge_adjacent_pwch(merged, OPTS).subsets == merged.subsets


def test_merge_fixpoint_on_outlier(outlier_data):
    once = merge_adjacent_pwch(first_level_partition(outlier_data, OPTS), OPTS)
    twice = merge_adjacent_pwch(once, OPTS)
    assert [(s.start, s.stop) for s in twice.subsets] == [(s.start, s.stop) for s in once.subsets]


# splitting -------------------------------------------------------------------


triples = st.tuples(st.floats(1e-6, 1e6), st.floats(1.001, 1e12), st.integers(4, 10_000), st.integers(10, 10**6))


@given(triples)
def test_first_bin_count_non_increasing_in_k(t):
    a, ratio, n, t_E = t
    ks = np.arange(2, n + 1)
    counts = _first_bin_count(n, math.log(ratio), ks, t_E)
    assert np.all(np.diff(counts) <= 1e-9 * counts[:-1])


@given(triples)
def test_plan_picks_smallest_k(t):
    a, ratio, n, t_E = t
    plan = plan_split(a, a * ratio, n, t_E)
    ks = np.arange(2, n + 1)
    ok = ks[_predicate(n, math.log(ratio), ks, t_E)]
    if ok.size:
        assert plan.k == ok[0] and not plan.forced
        assert plan.predicted_first_bin_count < math.log(plan.predicted_piece_count)
    else:
        assert plan.k == n and plan.forced


@given(triples)
def test_cut_points_geometric(t):
    a, ratio, n, t_E = t
    plan = plan_split(a, a * ratio, n, t_E)
    cuts = plan.cut_points
    assert cuts.size == plan.k + 1 and cuts[0] == a and cuts[-1] == a * ratio
    assert np.all(np.diff(cuts) > 0)
    np.testing.assert_allclose(cuts[1:] / cuts[:-1], ratio ** (1.0 / plan.k), rtol=1e-9)


def test_powers_of_e_cut_ratio():
    n, t_E = 5000, 1000
    for k in range(2, 30):
        plan = plan_split(1.0, math.e**k, n, t_E)
        if plan.k == k:
            np.testing.assert_allclose(plan.cut_points[1:] / plan.cut_points[:-1], math.e, rtol=1e-12)
            return
    pytest.fail("no k in [2, 30) selected for [1, e**k]")


def test_plan_rejects_bad_interval():
    with pytest.raises(InvalidArgumentsError):
        plan_split(-1.0, 2.0, 10, 100)


def test_split_pieces_cover_input():
    d = DataSet.from_values(np.concatenate([1.0 + np.arange(2000) * 1e-12, [2.0**30]]))
    assert is_pich(d)
    plan, pieces = split_pich_subset(d)
    assert len(pieces) >= 2 and plan.k >= 2
    assert [p[0] for p in pieces][0] == 0 and pieces[-1][1] == d.distinct_count
    assert all(p[1] == q[0] for p, q in zip(pieces[:-1], pieces[1:]))
    assert sum(p[2].n for p in pieces) == d.n
    edges = plan.cut_points
    for _, _, piece in pieces:
        j = np.searchsorted(edges[1:-1], piece.values, side="right")
        assert np.all(j == j[0])


def test_split_negative_side_mirrors():
    pos = DataSet.from_values(np.concatenate([1.0 + np.arange(2000) * 1e-12, [2.0**30]]))
    neg = DataSet.from_pairs(-pos.values, pos.freqs)
    p_plan, p_pieces = split_pich_subset(pos)
    n_plan, n_pieces = split_pich_subset(neg)
    assert p_plan.k == n_plan.k
    np.testing.assert_array_equal(n_plan.cut_points, -p_plan.cut_points[::-1])
    assert sorted(p[2].n for p in p_pieces) == sorted(p[2].n for p in n_pieces)


def test_split_errors():
    with pytest.raises(UnsplittableDegenerateError):
        split_pich_subset(DataSet.from_values([3.0, 3.0]))
    with pytest.raises(InvalidArgumentsError):
        split_pich_subset(DataSet.from_values([-1.0, 1.0]))
    with pytest.raises(NotPichError):
        split_pich_subset(DataSet.from_values([1.0, 2.0, 3.0]))


def test_pich_bins_default():
    assert pich_bins(10**9) == 655_327


# boundary seams ----------------------------------------------------------------


def test_boundary_far_singletons():
    d = DataSet.from_pairs([1.0, 1000.0], [3, 4])
    left = _Record(0.5, 1.5, 3, 0, 1, 0, False)
    right = _Record(999.5, 1000.5, 4, 1, 2, 1, False)
    out = build_boundary(d, left, right, OPTS)
    assert 1 <= len(out) <= 3
    assert sum(r.count for r in out) == 7
    assert out[0].lower == 0.5 and out[-1].upper == 1000.5
    assert all(a.upper == b.lower for a, b in zip(out[:-1], out[1:]))
    seam = [r for r in out if r.boundary]
    assert len(seam) == 1 and seam[0].lower < 500.5 < seam[0].upper


def test_boundary_rejects_non_adjacent():
    d = DataSet.from_values([1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgumentsError):
        build_boundary(d, _Record(0, 1, 1, 0, 1, 0, False), _Record(2, 3, 1, 2, 3, 1, False), OPTS)


# global builds -----------------------------------------------------------------


def test_outlier_two_level(outlier_data):
    h = build_two_level(outlier_data, OPTS)
    assert h.two_level_triggered and h.subset_count == 2
    assert 14 <= h.K <= 22
    check_global(h, outlier_data)
    gap = [iv for iv in h.intervals if iv.lower < 2.0**33 < iv.upper]
    assert gap and gap[0].boundary


def test_spike_gives_three_subsets(spike_data):
    h = build_two_level(spike_data, OPTS)
    assert h.two_level_triggered and h.subset_count == 3
    lo, mid, hi = h.subset_ranges
    assert lo[1] < mid[0] and mid[1] < hi[0]
    assert mid[1] - mid[0] < 1e-6
    check_global(h, spike_data)


def test_heavy_tail_two_subsets():
    comps = [[0.5, 1.0, 0.1], [0.5, 2.0**20, 2.0**20 / 10]]
    d = generate(GeneratorSpec("gaussian_mixture", 20_000, 0, {"components": comps}))
    h = build_two_level(d, OPTS)
    assert h.subset_count == 2 and 28 <= h.K <= 40
    assert build_standard(d).model.K < h.K
    check_global(h, d)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_pass_through_on_pwch(values):
    d = DataSet.from_values(values)
    if is_pich(d):
        return
    h = build_two_level(d, OPTS)
    ref = from_standard(d, build_standard(d, OPTS))
    assert not h.two_level_triggered
    assert h.intervals == ref.intervals
    check_global(h, d)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=150).filter(lambda v: len(set(v)) > 1))
def test_forced_two_level_keeps_invariants(values):
    d = DataSet.from_values(values)
    h = build_two_level(d, OPTS, force=True)
    assert h.two_level_triggered
    check_global(h, d)


def test_deterministic(outlier_data):
    a = build_two_level(outlier_data, OPTS)
    b = build_two_level(outlier_data, OPTS)
    assert a == b


def test_mixed_sign_pich():
    rng = np.random.default_rng(3)
    core = rng.normal(0.0, 1.0, 5000)
    d = DataSet.from_values(np.concatenate([core, [-(2.0**40), 2.0**40]]))
    assert is_pich(d)
    h = build_two_level(d, OPTS)
    assert h.two_level_triggered and h.subset_count >= 3
    check_global(h, d)


def test_empty_and_degenerate():
    with pytest.raises(EmptyInputError):
        build_two_level(None)
    h = build_two_level(DataSet.from_values([2.0, 2.0]))
    assert h.K == 1 and not h.two_level_triggered


def test_validate_detects_gaps():
    bad = GlobalHistogram(2, [Interval(0.0, 1.0, 1, 0.5, False, 0), Interval(1.5, 2.0, 1, 1.0, False, 0)], 1, False, [(1, 1)], [0.0])
    with pytest.raises(InvariantViolationError):
        bad.validate()


def test_json_shape(outlier_data):
    doc = build_two_level(outlier_data, OPTS).to_dict()
    assert set(doc["intervals"][0]) == {"lower", "upper", "count", "density", "boundary", "subset"}
    assert sum(iv["count"] for iv in doc["intervals"]) == doc["n"]
