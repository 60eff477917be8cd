import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mdlhist.criterion import (
    HistogramModel,
    enum_cost,
    genum_cost,
    level,
    log_binomial,
    merge_delta_cost,
    merge_delta_terms,
    null_cost,
    universal_code_length,
)
from mdlhist.exceptions import (
    InconsistentCountsError,
    InconsistentWidthsError,
    IndexOutOfRangeError,
    InvalidArgumentsError,
    NonPositiveIntegerError,
    NonPositiveNullCostError,
)


@st.composite
def models(draw, max_k=8, max_width=50, max_count=40):
    K = draw(st.integers(1, max_k))
    widths = draw(st.lists(st.integers(1, max_width), min_size=K, max_size=K))
    counts = draw(st.lists(st.integers(0, max_count), min_size=K, max_size=K))
    if sum(counts) == 0:
        counts[0] = 1
    G = sum(widths)
    E = G * draw(st.integers(1, 1000))
    return HistogramModel(E, G, widths, counts)


# log* -----------------------------------------------------------------------


def test_logstar_frozen_values():
    # frozen from the explicit series in oracles.logstar; ln ln 2 < 0 ends the k=2 series
    assert universal_code_length(1) == pytest.approx(1.0525906884861362, rel=1e-15)
    assert universal_code_length(2) == pytest.approx(1.7457378690460816, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 15, 16, 1000, 10**6, 2**30])
def test_logstar_matches_series(k):
    assert universal_code_length(k) == pytest.approx(oracles.logstar(k), rel=1e-15)


def test_logstar_monotone_to_a_million():
    values = np.array([universal_code_length(k) for k in range(1, 10**6 + 1)])
    assert np.all(np.diff(values) >= 0)


@pytest.mark.parametrize("k", [0, -3, 2.5])
def test_logstar_domain(k):
    with pytest.raises(NonPositiveIntegerError):
        universal_code_length(k)


# binomials ------------------------------------------------------------------


def test_log_binomial_zero():
    assert log_binomial(0, 0) == 0.0


@pytest.mark.parametrize("n, k", [(4, 2), (10, 3), (12, 6), (9, 0), (9, 9), (7, 1)])
def test_log_binomial_against_subset_enumeration(n, k):
    assert log_binomial(n, k) == pytest.approx(math.log(oracles.count_subsets(n, k)), rel=1e-12, abs=1e-15)


def test_log_binomial_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentsError):
        log_binomial(3, 4)


# G-Enum and Enum ------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 10, 10**6])
@pytest.mark.parametrize("E", [10, 10**9])
def test_null_model_reduction(n, E):
    model = HistogramModel(E, 1, [1], [n])
    cost = genum_cost(model, n)
    assert cost.total == pytest.approx(2 * math.log(2.865064) + n * math.log(E), rel=1e-12)
    assert cost.total == pytest.approx(null_cost(n, E), rel=1e-12)


def test_two_interval_hand_evaluation():
    cost = genum_cost(HistogramModel(2, 2, [1, 1], [1, 1]), 2)
    assert cost.num_intervals_prior == pytest.approx(oracles.logstar(2), rel=1e-14)
    assert cost.granularity_prior == pytest.approx(oracles.logstar(2), rel=1e-14)
    assert cost.boundary_prior == pytest.approx(math.log(3), rel=1e-14)
    assert cost.multinomial_choice == pytest.approx(math.log(3), rel=1e-14)
    assert cost.multinomial_factorial == pytest.approx(math.log(2), rel=1e-14)
    assert cost.bin_index == 0.0


def test_enum_small_instance():
    cost = enum_cost(HistogramModel(4, 4, [2, 2], [3, 1]), 4)
    expected = oracles.logstar(2) + math.log(5) + math.log(5) + math.log(4) + 3 * math.log(2) + math.log(2)
    assert cost.total == pytest.approx(expected, rel=1e-13)


def test_enum_null_model():
    cost = enum_cost(HistogramModel(50, 50, [50], [7]), 7)
    assert cost.total == pytest.approx(oracles.logstar(1) + 7 * math.log(50), rel=1e-13)


@given(models())
def test_genum_minus_enum_is_granularity_prior_at_full_resolution(model):
    full = HistogramModel(model.G, model.G, model.widths, model.counts)
    diff = genum_cost(full, full.n).total - enum_cost(full, full.n).total
    assert diff == pytest.approx(universal_code_length(full.G), rel=1e-9, abs=1e-9)


@given(models())
def test_genum_matches_term_oracle(model):
    terms = genum_cost(model, model.n)
    ref = oracles.genum_terms(model.widths.tolist(), model.counts.tolist(), model.G, model.E)
    got = [
        terms.num_intervals_prior,
        terms.granularity_prior,
        terms.boundary_prior,
        terms.multinomial_choice,
        terms.multinomial_factorial,
        terms.bin_index,
    ]
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-9)


@given(models())
def test_total_is_sum_of_fields(model):
    c = genum_cost(model, model.n)
    fields = c.as_dict()
    total = fields.pop("total")
    assert total == c.total
    assert c.total == (
        c.num_intervals_prior + c.granularity_prior + c.boundary_prior + c.multinomial_choice + c.multinomial_factorial + c.bin_index
    )
    assert len(fields) == 6


@given(models(), st.floats(-1e6, 1e6), st.floats(1e-6, 1e6))
def test_cost_ignores_domain_placement(model, lo, span):
    moved = HistogramModel(model.E, model.G, model.widths, model.counts, lo, span)
    assert genum_cost(moved, moved.n) == genum_cost(model, model.n)


@given(st.integers(1, 2**30), st.integers(1, 10**9), st.sampled_from([1, 3, 10**9]))
def test_single_interval_telescopes(G, n, E_factor):
    E = max(G, 10**9) * E_factor
    cost = genum_cost(HistogramModel(E, G, [G], [n]), n).total
    expected = universal_code_length(1) + universal_code_length(G) + n * math.log(E)
    assert cost == pytest.approx(expected, rel=1e-12)


def test_terms_finite_at_scale():
    G = 2**30
    model = HistogramModel(10**9 * 2, G, [G // 2, G // 2], [10**9, 10**9 - 1])
    c = genum_cost(model, model.n)
    assert all(math.isfinite(v) for v in c.as_dict().values())


def test_inconsistent_inputs():
    with pytest.raises(InconsistentCountsError):
        genum_cost(HistogramModel(4, 2, [1, 1], [1, 1]), 3)
    with pytest.raises(InconsistentWidthsError):
        HistogramModel(4, 3, [1, 1], [1, 1])
    with pytest.raises(InvalidArgumentsError):
        HistogramModel(2, 4, [2, 2], [1, 1])


# merge deltas ---------------------------------------------------------------


@given(models(max_k=10, max_width=2**17, max_count=10**6), st.data())
def test_merge_delta_matches_recomputation(model, data):
    if model.K < 2:
        return
    k = data.draw(st.integers(0, model.K - 2))
    n = model.n
    full = genum_cost(model.merged(k), n).total - genum_cost(model, n).total
    assert math.isclose(merge_delta_cost(model, k, n), full, rel_tol=1e-9, abs_tol=1e-9)


def test_merge_to_null_model():
    model = HistogramModel(100, 8, [3, 5], [10, 4])
    delta = merge_delta_cost(model, 0, 14)
    assert delta == pytest.approx(genum_cost(model.merged(0), 14).total - genum_cost(model, 14).total, rel=1e-12)
    assert model.merged(0).K == 1


@pytest.mark.parametrize("w, h", [(10, 7), (1000, 500), (10**6, 123), (2**29, 10**6)])
def test_width_delta_for_singleton_extension(w, h):
    model = HistogramModel(2**31, w + 1, [w, 1], [h, 0])
    delta = merge_delta_terms(model, 0, h).bin_index
    assert delta == pytest.approx(h * math.log1p(1.0 / w), rel=1e-12)
    assert delta > 0


def test_merge_index_out_of_range():
    model = HistogramModel(10, 2, [1, 1], [1, 1])
    with pytest.raises(IndexOutOfRangeError):
        merge_delta_cost(model, 1, 2)
    with pytest.raises(IndexOutOfRangeError):
        model.merged(-1)


# level ----------------------------------------------------------------------


def test_level_values():
    assert level(50.0, 50.0) == 0.0
    assert level(25.0, 50.0) == 0.5
    with pytest.raises(NonPositiveNullCostError):
        level(1.0, 0.0)


def test_level_positive_on_two_spikes():
    from mdlhist.dataset import DataSet
    from mdlhist.optimizer import build_standard

    d = DataSet.from_pairs([0.0, 0.001, 0.999, 1.0], [500, 500, 500, 500])
    res = build_standard(d)
    assert level(res.cost.total, null_cost(d.n, res.model.E)) > 0
