"""Space invariants, measurability, and exact conditional expectations."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stopgame import (
    FilteredSpace,
    cond_exp,
    constant,
    expectation,
    is_measurable,
    validate_space,
)

from conftest import random_variables, spaces

F = Fraction


class TestValidateSpace:
    def test_degenerate_space_is_valid(self, single_t1):
        assert validate_space(single_t1) == []

    def test_coarsening_filtration_is_flagged(self):
        space = FilteredSpace(
            1,
            (("h", F(1, 2)), ("t", F(1, 2))),
            (((0,), (1,)), ((0, 1),)),
        )
        violations = validate_space(space)
        assert [v.code for v in violations] == ["FILTRATION_REFINEMENT"]

    def test_mass_violation(self):
        space = FilteredSpace(
            0,
            (("a", F(1, 3)), ("b", F(1, 3))),
            (((0, 1),),),
        )
        violations = validate_space(space)
        assert [v.code for v in violations] == ["PROBABILITY_MASS"]

    def test_nonpositive_probability(self):
        space = FilteredSpace(0, (("a", F(0)), ("b", F(1))), (((0, 1),),))
        codes = {v.code for v in validate_space(space)}
        assert "PROBABILITY_POSITIVE" in codes

    def test_cover_violation(self):
        space = FilteredSpace(0, (("a", F(1, 2)), ("b", F(1, 2))), (((0,),),))
        codes = {v.code for v in validate_space(space)}
        assert "FILTRATION_COVER" in codes

    def test_violations_carry_location(self):
        space = FilteredSpace(
            1,
            (("h", F(1, 2)), ("t", F(1, 2))),
            (((0,), (1,)), ((0, 1),)),
        )
        (violation,) = validate_space(space)
        assert "t=1" in violation.location
        assert str(violation).startswith("FILTRATION_REFINEMENT")


class TestIsMeasurable:
    def test_constants_measurable_everywhere(self, two_coin):
        for t in (0, 1):
            assert is_measurable(constant(two_coin, 3), two_coin, t)

    def test_nonconstant_on_trivial_atom(self, two_coin):
        assert not is_measurable((F(0), F(1)), two_coin, 0)

    def test_singleton_atoms_admit_everything(self, two_coin):
        assert is_measurable((F(0), F(1)), two_coin, 1)

    def test_out_of_range_time(self, two_coin):
        with pytest.raises(ValueError):
            is_measurable((F(0), F(1)), two_coin, 2)


class TestCondExp:
    def test_identity_on_singleton_atoms(self, two_coin):
        x = (F(3, 7), F(-2))
        assert cond_exp(x, two_coin, 1) == x

    def test_symmetric_average(self, two_coin):
        assert cond_exp((F(0), F(1)), two_coin, 0) == (F(1, 2), F(1, 2))

    def test_weighted_mean_on_atoms(self, three_outcomes):
        # atom {1,2}: (2*(1/4) + 6*(1/4)) / (1/2) = 4, checked by hand
        assert cond_exp((F(5), F(2), F(6)), three_outcomes, 1) == (F(5), F(4), F(4))

    def test_out_of_range_time(self, three_outcomes):
        with pytest.raises(ValueError):
            cond_exp((F(5), F(2), F(6)), three_outcomes, 5)


class TestExpectation:
    def test_constant(self, two_coin):
        assert expectation(constant(two_coin, F(5, 3)), two_coin) == F(5, 3)

    def test_coin(self, two_coin):
        assert expectation((F(0), F(1)), two_coin) == F(1, 2)

    def test_three_outcome_sum(self, three_outcomes):
        # 5/2 + 2/4 + 6/4 = 9/2, cross-checked against the trivial-level
        # conditional expectation
        x = (F(5), F(2), F(6))
        assert expectation(x, three_outcomes) == F(9, 2)
        assert cond_exp(x, three_outcomes, 0) == (F(9, 2),) * 3


class TestProperties:
    @given(data=st.data(), space=spaces())
    @settings(max_examples=60, deadline=None)
    def test_tower_property(self, data, space):
        x = data.draw(random_variables(space))
        s = data.draw(st.integers(0, space.horizon))
        t = data.draw(st.integers(s, space.horizon))
        assert cond_exp(cond_exp(x, space, t), space, s) == cond_exp(x, space, s)

    @given(data=st.data(), space=spaces())
    @settings(max_examples=60, deadline=None)
    def test_linearity(self, data, space):
        x = data.draw(random_variables(space))
        y = data.draw(random_variables(space))
        a = F(data.draw(st.integers(-3, 3)))
        b = F(data.draw(st.integers(-3, 3)), 2)
        t = data.draw(st.integers(0, space.horizon))
        combo = tuple(a * xi + b * yi for xi, yi in zip(x, y))
        cx, cy = cond_exp(x, space, t), cond_exp(y, space, t)
        assert cond_exp(combo, space, t) == tuple(a * ci + b * di for ci, di in zip(cx, cy))

    @given(data=st.data(), space=spaces())
    @settings(max_examples=60, deadline=None)
    def test_cond_exp_is_measurable(self, data, space):
        x = data.draw(random_variables(space))
        t = data.draw(st.integers(0, space.horizon))
        assert is_measurable(cond_exp(x, space, t), space, t)

    @given(data=st.data(), space=spaces())
    @settings(max_examples=60, deadline=None)
    def test_expectation_of_cond_exp(self, data, space):
        x = data.draw(random_variables(space))
        t = data.draw(st.integers(0, space.horizon))
        assert expectation(cond_exp(x, space, t), space) == expectation(x, space)

    @given(space=spaces())
    @settings(max_examples=60, deadline=None)
    def test_generated_spaces_are_valid(self, space):
        assert validate_space(space) == []
