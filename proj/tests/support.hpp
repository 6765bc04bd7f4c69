#pragma once

// Instance generators shared by the unit suites.

#include <random>

#include "ndlab/instances.hpp"

namespace ndlab::testing {

using ndlab::diagonal_triple;
using ndlab::diagonal_units;
using ndlab::random_matrix;
using ndlab::random_order_zero;
using ndlab::random_positive;
using ndlab::random_unitary;
using ndlab::triple_with_bad_block;
using ndlab::unit;

}  // namespace ndlab::testing
