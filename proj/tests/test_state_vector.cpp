#include <doctest.h>

#include <cmath>

#include "qkr/state_vector.hpp"

using namespace qkr;

TEST_CASE("basis state has one unit amplitude") {
    StateVector s = StateVector::basis_state(3, 5);
    CHECK(s.dim() == 8);
    CHECK(s.n_qubits() == 3);
    for (std::size_t n = 0; n < 8; ++n) CHECK(s.probability(n) == (n == 5 ? 1.0 : 0.0));
    CHECK(s.norm_squared() == 1.0);
}

TEST_CASE("qubit 1 is the most significant bit") {
    StateVector s(3);
    CHECK(s.qubit_mask(1) == 4);
    CHECK(s.qubit_mask(2) == 2);
    CHECK(s.qubit_mask(3) == 1);
    CHECK(s.bit(0b100, 1) == 1);
    CHECK(s.bit(0b100, 2) == 0);
    CHECK(s.bit(0b011, 3) == 1);
}

TEST_CASE("register size limits") {
    CHECK_THROWS_AS(StateVector(1), IndexOutOfRange);
    CHECK_THROWS_AS(StateVector(27), IndexOutOfRange);
    CHECK_THROWS_AS(StateVector::basis_state(2, 4), IndexOutOfRange);
}

TEST_CASE("random states are normalized and reproducible") {
    StateVector a = random_normalized_state(6, 99);
    StateVector b = random_normalized_state(6, 99);
    CHECK(a.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 0; n < a.dim(); ++n) CHECK(a[n] == b[n]);

    double total = 0.0;
    for (double p : a.probabilities()) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlap and fidelity") {
    StateVector zero = StateVector::basis_state(2, 0);
    StateVector one = StateVector::basis_state(2, 1);
    CHECK(overlap(zero, one) == Complex{0.0, 0.0});
    CHECK(fidelity(zero, zero) == 1.0);
    CHECK(fidelity(zero, one) == 0.0);

    StateVector small(2), big(3);
    CHECK_THROWS_AS((void)overlap(small, big), SizeMismatch);
}

TEST_CASE("single-qubit marginals") {
    StateVector s = StateVector::basis_state(3, 0b100);
    CHECK(marginal_one_probability(s, 1) == 1.0);
    CHECK(marginal_one_probability(s, 2) == 0.0);
    CHECK(marginal_one_probability(s, 3) == 0.0);
    CHECK_THROWS_AS((void)marginal_one_probability(s, 0), IndexOutOfRange);
    CHECK_THROWS_AS((void)marginal_one_probability(s, 4), IndexOutOfRange);
}
