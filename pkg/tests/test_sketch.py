import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expander_cs import (
    DimensionMismatchError,
    InvalidParametersError,
    ParseError,
    Sketch,
    SparseSignal,
    ValidationError,
    check_expansion,
    encode,
    gen_random_graph,
    load_signal,
    load_sketch,
    nullspace_sparse_search,
    rip1_bounds,
    save_signal,
    save_sketch,
)
from expander_cs._rand import make_rng, randbelow, sample_sorted


def random_int_signal(n, k, seed):
    rng = make_rng(seed)
    entries = {}
    for idx in sample_sorted(rng, n, k):
        r = randbelow(rng, 18)
        entries[idx] = float(r - 9 if r < 9 else r - 8)
    return SparseSignal(n, entries)


class TestSparseSignal:
    def test_rejects_zero_entry(self):
        with pytest.raises(InvalidParametersError):
            SparseSignal(4, {1: 0.0})

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidParametersError):
            SparseSignal(4, {4: 1.0})

    def test_sparsity_and_norm(self):
        x = SparseSignal(4, {0: 3.0, 1: -2.0})
        assert x.sparsity == 2
        assert x.norm1() == 5.0


class TestEncode:
    def test_single_column(self, disjoint_graph):
        y = encode(disjoint_graph, SparseSignal(4, {0: 1.0}))
        assert y.values == [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]

    def test_zero_signal(self, disjoint_graph):
        y = encode(disjoint_graph, SparseSignal(4, {}))
        assert y.values == [0.0] * 8

    def test_two_columns(self, disjoint_graph):
        y = encode(disjoint_graph, SparseSignal(4, {0: 3.0, 1: -2.0}))
        assert y.values == [3.0, 3.0, -2.0, -2.0, 0.0, 0.0, 0.0, 0.0]

    def test_dimension_mismatch(self, disjoint_graph):
        with pytest.raises(DimensionMismatchError):
            encode(disjoint_graph, SparseSignal(5, {0: 1.0}))

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        a=st.integers(-5, 5),
        b=st.integers(-5, 5),
    )
    def test_linearity(self, seed, a, b):
        g = gen_random_graph(10, 8, 3, seed)
        x1 = random_int_signal(10, 3, seed + 1)
        x2 = random_int_signal(10, 3, seed + 2)
        combined = {}
        for j in range(10):
            v = a * x1.entries.get(j, 0.0) + b * x2.entries.get(j, 0.0)
            if v != 0:
                combined[j] = v
        lhs = encode(g, SparseSignal(10, combined)).values
        y1 = encode(g, x1).values
        y2 = encode(g, x2).values
        assert lhs == [a * u + b * v for u, v in zip(y1, y2)]


class TestRip1Bounds:
    def test_hand_example(self, disjoint_graph):
        x = SparseSignal(4, {0: 3.0, 1: -2.0})
        lower, value, upper, holds = rip1_bounds(disjoint_graph, x, 1 / 8)
        assert (lower, value, upper, holds) == (7.5, 10.0, 10.0, True)

    def test_zero_signal(self, disjoint_graph):
        assert rip1_bounds(disjoint_graph, SparseSignal(4, {}), 1 / 8) == (
            0.0,
            0.0,
            0.0,
            True,
        )

    def test_collision_cancellation_flags_failure(self, colliding_graph):
        x = SparseSignal(2, {0: 1.0, 1: -1.0})
        lower, value, upper, holds = rip1_bounds(colliding_graph, x, 0.0)
        assert lower == 4.0
        assert value == 0.0
        assert not holds

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.integers(0, 10))
    def test_upper_bound_unconditional(self, seed, k):
        g = gen_random_graph(12, 9, 3, seed)
        x = random_int_signal(12, k, seed + 7)
        _, value, upper, _ = rip1_bounds(g, x, 1 / 8)
        assert value <= upper

    def test_lower_bound_on_certified_graph(self):
        from expander_cs import suggest_params

        d, m = suggest_params(16, 3, 1 / 8)
        g = gen_random_graph(16, m, d, 3)
        report = check_expansion(g, 3, 1 / 8)
        assert report.verified
        for seed in range(50):
            x = random_int_signal(16, 3, seed)
            _, _, _, holds = rip1_bounds(g, x, 1 / 8)
            assert holds


class TestNullspaceSearch:
    def test_disjoint_has_none(self, disjoint_graph):
        assert nullspace_sparse_search(disjoint_graph, 4) is None

    def test_identical_columns_witness(self, colliding_graph):
        z = nullspace_sparse_search(colliding_graph, 2)
        assert z is not None
        assert z.entries == {0: 1.0, 1: -1.0}

    def test_s_zero(self, disjoint_graph):
        assert nullspace_sparse_search(disjoint_graph, 0) is None

    def test_witness_actually_in_nullspace(self):
        # duplicate a column inside a bigger random graph
        g0 = gen_random_graph(8, 6, 2, 4)
        rows = list(g0.adjacency)
        rows[5] = rows[2]
        from expander_cs import BipartiteGraph

        g = BipartiteGraph(8, 6, 2, tuple(rows))
        z = nullspace_sparse_search(g, 3)
        assert z is not None
        assert encode(g, z).values == [0.0] * g.m

    def test_verified_graph_theorem5(self):
        # full-recovery consistency: certified (3k, 1-eps) expander has no
        # 3k-sparse null vector
        from expander_cs import suggest_params

        d, m = suggest_params(16, 3, 1 / 8)
        g = gen_random_graph(16, m, d, 3)
        assert check_expansion(g, 3, 1 / 8).verified
        assert nullspace_sparse_search(g, 3) is None


class TestSignalIO:
    def test_round_trip(self, tmp_path):
        x = SparseSignal(10, {1: -2.5, 7: 3.0})
        path = tmp_path / "x.txt"
        save_signal(x, path)
        assert load_signal(path) == x

    def test_format(self, tmp_path):
        x = SparseSignal(10, {1: -2.5, 7: 3.0})
        path = tmp_path / "x.txt"
        save_signal(x, path)
        assert path.read_text() == "SIGNAL 1 10\n1 -2.5\n7 3\n"

    def test_rejects_descending_indices(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("SIGNAL 1 10\n7 3\n1 -2.5\n")
        with pytest.raises(ValidationError) as info:
            load_signal(path)
        assert info.value.line == 3

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("SIGNAL 1 10\n1 2\nwat is this\n")
        with pytest.raises(ParseError) as info:
            load_signal(path)
        assert info.value.line == 3

    def test_sketch_round_trip(self, tmp_path):
        y = Sketch(3, [1.0, -0.5, 0.0])
        path = tmp_path / "y.txt"
        save_sketch(y, path)
        assert load_sketch(path) == y

    def test_sketch_wrong_count(self, tmp_path):
        path = tmp_path / "y.txt"
        path.write_text("SKETCH 1 3\n1\n2\n")
        with pytest.raises(ParseError):
            load_sketch(path)

    def test_sketch_trailing_garbage(self, tmp_path):
        path = tmp_path / "y.txt"
        path.write_text("SKETCH 1 2\n1\n2\n3\n")
        with pytest.raises(ParseError):
            load_sketch(path)
