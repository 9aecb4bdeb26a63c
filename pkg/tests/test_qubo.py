"""QUBO model construction, evaluation, spin-form conversion, text format."""

import itertools
import random

import numpy as np
import pytest

from qubostream.qubo import (
    IsingModel,
    QuboModel,
    from_ising,
    ising_energy,
    read_qubo_text,
    spins_from_bits,
    to_ising,
    write_qubo_text,
)


def random_model(rng, n, density=1.0, scale=1.0, offset=True):
    m = QuboModel(n, offset=rng.uniform(-scale, scale) if offset else 0.0)
    for i in range(n):
        for j in range(i, n):
            if rng.random() <= density:
                m.add_term(i, j, rng.uniform(-scale, scale))
    return m


def all_assignments(n):
    return itertools.product((0, 1), repeat=n)


class TestConstruction:
    def test_accumulation(self):
        m = QuboModel(1).add_term(0, 0, 1.5).add_term(0, 0, 0.5)
        assert m.coefficient(0, 0) == 2.0

    def test_index_normalization(self):
        m = QuboModel(3).add_term(2, 1, 3.0)
        assert m.terms == {(1, 2): 3.0}
        assert m.coefficient(2, 1) == 3.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            QuboModel(3).add_term(0, 3, 1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            QuboModel(1).add_term(0, 0, float("nan"))
        with pytest.raises(ValueError):
            QuboModel(1).add_term(0, 0, float("inf"))

    def test_accumulation_equivalence(self):
        # add(c1) then add(c2) behaves like a single add(c1+c2) everywhere
        rng = random.Random(1)
        for _ in range(20):
            n = rng.randint(1, 6)
            i, j = rng.randrange(n), rng.randrange(n)
            c1, c2 = rng.uniform(-3, 3), rng.uniform(-3, 3)
            base = random_model(rng, n)
            split = QuboModel(n, base.offset)
            joint = QuboModel(n, base.offset)
            for key, c in base.terms.items():
                split.add_term(*key, c)
                joint.add_term(*key, c)
            split.add_term(i, j, c1).add_term(i, j, c2)
            joint.add_term(i, j, c1 + c2)
            for x in all_assignments(n):
                assert split.energy(x) == pytest.approx(joint.energy(x), abs=1e-12)


class TestEnergy:
    def test_examples(self):
        m = QuboModel(2).add_term(0, 0, 1).add_term(0, 1, -2).add_term(1, 1, 1)
        assert m.energy((1, 1)) == 0.0
        assert m.energy((1, 0)) == 1.0
        assert QuboModel(4, offset=0.0).energy((0, 0, 0, 0)) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            QuboModel(2).energy((1,))

    def test_invalid_bit(self):
        with pytest.raises(ValueError):
            QuboModel(2).energy((1, 2))

    def test_integer_exactness(self):
        # integer-scaled coefficients must evaluate without rounding error
        big = 2**50
        m = QuboModel(2, offset=3.0)
        m.add_term(0, 0, big).add_term(0, 1, -big).add_term(1, 1, 17)
        assert m.energy((1, 1)) == 3.0 + 17
        assert m.energy((1, 0)) == 3.0 + big

    def test_positive_scaling(self):
        rng = random.Random(2)
        for _ in range(10):
            n = rng.randint(1, 6)
            m = random_model(rng, n)
            k = rng.uniform(0.1, 5.0)
            scaled = m.scaled(k)
            energies = {x: m.energy(x) for x in all_assignments(n)}
            for x, e in energies.items():
                assert scaled.energy(x) == pytest.approx(k * e, rel=1e-12, abs=1e-12)
            lo = min(energies.values())
            argmin = {x for x, e in energies.items() if e <= lo + 1e-12}
            lo_s = min(scaled.energy(x) for x in all_assignments(n))
            argmin_s = {
                x for x in all_assignments(n) if scaled.energy(x) <= lo_s + 1e-12 * max(1, abs(lo_s))
            }
            assert argmin == argmin_s


class TestIsing:
    def test_single_diagonal(self):
        ising = to_ising(QuboModel(1).add_term(0, 0, 4))
        assert ising.fields == [-2.0]
        assert ising.offset == 2.0
        assert ising_energy(ising, [-1]) == 0.0
        assert ising_energy(ising, [1]) == 4.0

    def test_single_pair(self):
        ising = to_ising(QuboModel(2).add_term(0, 1, 4))
        assert ising.couplings == {(0, 1): -1.0}
        assert ising.fields == [-1.0, -1.0]
        assert ising.offset == 1.0
        assert ising_energy(ising, [1, 1]) == 4.0

    def test_empty_model(self):
        ising = to_ising(QuboModel(3))
        assert ising.couplings == {}
        assert ising.fields == [0.0, 0.0, 0.0]
        assert ising.offset == 0.0

    def test_ising_energy_examples(self):
        assert ising_energy(IsingModel(2), [1, -1]) == 0.0
        m = IsingModel(1, fields=[-2.0], offset=2.0)
        assert ising_energy(m, [-1]) == 0.0
        assert ising_energy(m, [1]) == 4.0

    def test_invalid_spin(self):
        with pytest.raises(ValueError):
            ising_energy(IsingModel(1), [0])
        with pytest.raises(ValueError):
            ising_energy(IsingModel(2), [1])

    def test_roundtrip_equivalence(self):
        # sigma = 2x - 1 preserves the energy of every assignment
        rng = random.Random(3)
        for _ in range(20):
            n = rng.randint(1, 8)
            m = random_model(rng, n, density=0.7)
            ising = to_ising(m)
            for x in all_assignments(n):
                assert ising_energy(ising, spins_from_bits(x)) == pytest.approx(
                    m.energy(x), abs=1e-9
                )

    def test_argmin_preservation(self):
        rng = random.Random(4)
        for _ in range(10):
            n = rng.randint(1, 6)
            m = random_model(rng, n)
            ising = to_ising(m)
            q_energies = {x: m.energy(x) for x in all_assignments(n)}
            lo = min(q_energies.values())
            q_argmin = {x for x, e in q_energies.items() if abs(e - lo) < 1e-9}
            s_energies = {
                x: ising_energy(ising, spins_from_bits(x)) for x in all_assignments(n)
            }
            s_lo = min(s_energies.values())
            s_argmin = {x for x, e in s_energies.items() if abs(e - s_lo) < 1e-9}
            assert q_argmin == s_argmin

    def test_from_ising_inverts(self):
        rng = random.Random(5)
        for _ in range(10):
            n = rng.randint(1, 6)
            m = random_model(rng, n, density=0.6)
            back = from_ising(to_ising(m))
            for x in all_assignments(n):
                assert back.energy(x) == pytest.approx(m.energy(x), abs=1e-9)


class TestTextFormat:
    def test_roundtrip_integer_exact(self):
        m = QuboModel(4, offset=7.0)
        m.add_term(0, 0, 3).add_term(1, 3, -12345678901).add_term(2, 2, 1)
        text = write_qubo_text(m)
        back = read_qubo_text(text)
        assert back.num_vars == m.num_vars
        assert back.offset == m.offset
        assert back.terms == m.terms

    def test_roundtrip_float(self):
        m = QuboModel(2)
        m.add_term(0, 1, 0.1).add_term(0, 0, -2.5e-7)
        assert read_qubo_text(write_qubo_text(m)).terms == m.terms

    def test_deterministic_order(self):
        m = QuboModel(3)
        m.add_term(2, 2, 1).add_term(0, 1, 2).add_term(0, 0, 3)
        lines = write_qubo_text(m).strip().splitlines()
        assert lines == ["nvars 3", "0 0 3", "0 1 2", "2 2 1"]

    def test_comments_and_offset(self):
        text = "# comment\nnvars 2\noffset 5\n0 1 -3 # trailing\n"
        m = read_qubo_text(text)
        assert m.offset == 5.0
        assert m.terms == {(0, 1): -3.0}

    def test_errors(self):
        with pytest.raises(ValueError):
            read_qubo_text("")
        with pytest.raises(ValueError):
            read_qubo_text("0 0 1\n")  # term before header
        with pytest.raises(ValueError):
            read_qubo_text("nvars 2\nnvars 2\n")
        with pytest.raises(ValueError):
            read_qubo_text("nvars 2\n0 1\n")
        with pytest.raises(ValueError):
            read_qubo_text("nvars 2\n0 5 1.0\n")  # out of range
