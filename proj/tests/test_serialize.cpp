#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ndlab/serialize.hpp"
#include "support.hpp"

using namespace ndlab;
using namespace ndlab::testing;

TEST_CASE("triple round trip is bit faithful") {
  std::mt19937_64 rng(derive_seed(0, 30));
  auto inst = random_order_zero(rng, 12);
  Json j = to_json(inst.phi);
  CpMap back = cpmap_from_json(Json::parse(j.dump()));
  CHECK(back.domain() == inst.phi.domain());
  for (Index b = 0; b < inst.F.num_blocks(); ++b)
    for (Index s = 0; s < inst.F.block_size(b); ++s)
      for (Index t = 0; t < inst.F.block_size(b); ++t)
        CHECK((back.image(b, s, t).to_dense() - inst.phi.image(b, s, t).to_dense()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(to_json(back).dump() == j.dump());

  ApproxTriple t = triple_with_bad_block({0, 1, 0}, 2, 1e-7);
  ApproxTriple tb = triple_from_json(Json::parse(to_json(t).dump()));
  CHECK(to_json(tb) == to_json(t));
  CHECK(tb.colors() == 2);
}

TEST_CASE("rational matrices round trip exactly") {
  RationalMatrix m(2, 2);
  m(0, 0) = Rational(1, 3);
  m(0, 1) = Rational(-7, 12);
  m(1, 0) = Rational(123456789, 1000000007);
  m(1, 1) = 2;
  CHECK(rational_matrix_from_json(Json::parse(to_json(m).dump())) == m);
}

TEST_CASE("malformed documents are input errors") {
  CHECK_THROWS_AS(fdalgebra_from_json(Json::parse(R"({"block_sizes":[1]})")), InputError);
  CHECK_THROWS_AS(cpmap_from_json(Json::parse(
                      R"({"domain":{"block_sizes":[1],"colors":[0],"num_colors":1},"codomain_dim":1,"choi":[[[5,0,[1,0]]]]})")),
                  InputError);
}
