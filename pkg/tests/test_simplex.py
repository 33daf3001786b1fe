import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from signsym.simplex import (
    SimplexError,
    SimplexGrid,
    default_resolution,
    face_projection,
    from_prime_domain,
    make_point,
    to_prime_domain,
    vertex,
)


class TestMakePoint:
    def test_valid_point_passthrough(self):
        t = make_point([0.5, 0.5])
        assert t.coords == (0.5, 0.5)
        assert t.n == 2

    def test_vertex_case(self):
        t = make_point([1.0, 0.0, 0.0])
        assert t.coords == (1.0, 0.0, 0.0)

    def test_renormalizes_slightly_off_sum(self):
        t = make_point([0.3, 0.7000000001])
        assert math.isclose(sum(t.coords), 1.0, abs_tol=1e-15)

    def test_clamps_tiny_negative(self):
        t = make_point([1.0, -1e-13])
        assert t.coords[1] == 0.0

    def test_rejects_dimension_one(self):
        with pytest.raises(SimplexError):
            make_point([1.0])

    def test_rejects_real_negative(self):
        with pytest.raises(SimplexError):
            make_point([1.1, -0.1])

    def test_rejects_bad_sum(self):
        with pytest.raises(SimplexError):
            make_point([0.5, 0.6])

    @given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=6))
    def test_normalized_input_always_valid(self, raw):
        c = np.array(raw) / np.sum(raw)
        t = make_point(c)
        assert all(v >= 0 for v in t.coords)
        assert math.isclose(sum(t.coords), 1.0, abs_tol=1e-12)


class TestVertex:
    @pytest.mark.parametrize(
        "i,n,expected",
        [(1, 2, (1.0, 0.0)), (3, 3, (0.0, 0.0, 1.0)), (2, 4, (0.0, 1.0, 0.0, 0.0))],
    )
    def test_examples(self, i, n, expected):
        assert vertex(i, n).coords == expected

    def test_out_of_range(self):
        with pytest.raises(SimplexError):
            vertex(0, 3)
        with pytest.raises(SimplexError):
            vertex(4, 3)

    def test_not_interior(self):
        assert not vertex(1, 2).interior
        assert make_point([0.5, 0.5]).interior


class TestFaceProjection:
    def test_rescale_example(self):
        out = face_projection(make_point([0.2, 0.3, 0.5]), 3)
        assert np.allclose(out.as_array(), [0.4, 0.6, 0.0])

    def test_two_dim_example(self):
        out = face_projection(make_point([0.5, 0.5]), 1)
        assert out.coords == (0.0, 1.0)

    def test_undefined_at_vertex(self):
        with pytest.raises(SimplexError):
            face_projection(make_point([1.0, 0.0]), 1)

    def test_output_is_valid_and_zeroed(self):
        t = make_point([0.1, 0.2, 0.3, 0.4])
        for i in range(1, 5):
            out = face_projection(t, i)
            assert out.coords[i - 1] == 0.0
            assert math.isclose(sum(out.coords), 1.0, abs_tol=1e-12)


class TestPrimeDomain:
    def test_examples(self):
        assert to_prime_domain(make_point([0.2, 0.3, 0.5])) == [0.2, 0.3]
        assert np.allclose(from_prime_domain([0.2, 0.3]).as_array(), [0.2, 0.3, 0.5])

    def test_round_trip_on_grid(self):
        for t in SimplexGrid(3, 8):
            back = from_prime_domain(to_prime_domain(t))
            assert np.allclose(back.as_array(), t.as_array(), atol=1e-15)

    def test_rejects_oversum(self):
        with pytest.raises(SimplexError):
            from_prime_domain([0.7, 0.7])

    def test_rejects_negative(self):
        with pytest.raises(SimplexError):
            from_prime_domain([-0.2, 0.5])


class TestSimplexGrid:
    @pytest.mark.parametrize("n,K", [(2, 5), (3, 7), (4, 4)])
    def test_size_formula(self, n, K):
        grid = SimplexGrid(n, K)
        assert len(grid) == math.comb(K + n - 1, n - 1)
        assert len({p.coords for p in grid}) == len(grid)

    def test_contains_vertices(self):
        grid = SimplexGrid(3, 6)
        pts = {p.coords for p in grid}
        for i in range(1, 4):
            assert vertex(i, 3).coords in pts

    def test_lexicographic_enumeration(self):
        grid = SimplexGrid(2, 3)
        assert [tuple(r) for r in grid.lattice] == [(0, 3), (1, 2), (2, 1), (3, 0)]

    def test_index_lookup(self):
        grid = SimplexGrid(3, 4)
        for k, row in enumerate(grid.lattice):
            assert grid.index[tuple(row)] == k

    def test_invalid_parameters(self):
        with pytest.raises(SimplexError):
            SimplexGrid(1, 4).lattice
        with pytest.raises(SimplexError):
            SimplexGrid(3, 0).lattice


def test_default_resolution_schedule():
    assert default_resolution(2) == 64
    assert default_resolution(3) == 64
    assert default_resolution(4) == 24
    assert default_resolution(5) == 12
    assert default_resolution(9) == 12
