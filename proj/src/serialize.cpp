#include "ndlab/serialize.hpp"

namespace ndlab {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const FdAlgebra& F) {
  return Json{{"block_sizes", F.block_sizes()}, {"colors", F.colors()}, {"num_colors", F.num_colors()}};
}

FdAlgebra fdalgebra_from_json(const Json& j) {
  return guarded("FdAlgebra", [&] {
    return FdAlgebra(j.at("block_sizes").get<std::vector<Index>>(), j.at("colors").get<std::vector<int>>(),
                     j.at("num_colors").get<int>());
  });
}

// Choi coordinates: entry (a, b) of phi(e^{(j)}_st) sits at (s D + a, t D + b).
Json to_json(const CpMap& map) {
  const Index D = map.codomain_dim();
  Json choi = Json::array();
  for (Index j = 0; j < map.domain().num_blocks(); ++j) {
    Json entries = Json::array();
    const Index r = map.domain().block_size(j);
    for (Index s = 0; s < r; ++s)
      for (Index t = 0; t < r; ++t)
        map.image(j, s, t).for_each([&](Index a, Index b, Complex v) {
          entries.push_back(Json::array({s * D + a, t * D + b, Json::array({v.real(), v.imag()})}));
        });
    choi.push_back(std::move(entries));
  }
  Json out{{"domain", to_json(map.domain())}, {"codomain_dim", D}, {"choi", std::move(choi)}};
  if (map.codomain_algebra()) out["codomain_algebra"] = to_json(*map.codomain_algebra());
  return out;
}

CpMap cpmap_from_json(const Json& j) {
  return guarded("CpMap", [&] {
    FdAlgebra domain = fdalgebra_from_json(j.at("domain"));
    const Index D = j.at("codomain_dim").get<Index>();
    std::optional<FdAlgebra> codomain;
    if (j.contains("codomain_algebra")) codomain = fdalgebra_from_json(j.at("codomain_algebra"));
    const Json& choi = j.at("choi");
    if (static_cast<Index>(choi.size()) != domain.num_blocks()) throw InputError("CpMap: one Choi block per domain block required");
    std::vector<std::vector<SparseOp>> images;
    for (Index b = 0; b < domain.num_blocks(); ++b) {
      const Index r = domain.block_size(b);
      std::vector<std::vector<Triplet>> trip(static_cast<std::size_t>(r * r));
      for (const auto& e : choi[static_cast<std::size_t>(b)]) {
        const Index row = e.at(0).get<Index>(), col = e.at(1).get<Index>();
        if (row < 0 || col < 0 || row >= r * D || col >= r * D) throw InputError("CpMap: Choi entry out of range");
        const Complex v(e.at(2).at(0).get<double>(), e.at(2).at(1).get<double>());
        trip[static_cast<std::size_t>((row / D) * r + col / D)].push_back({row % D, col % D, v});
      }
      std::vector<SparseOp> tab;
      for (auto& t : trip) tab.emplace_back(D, D, std::move(t));
      images.push_back(std::move(tab));
    }
    return CpMap(domain, D, std::move(images), codomain);
  });
}

Json to_json(const ApproxTriple& t) {
  return Json{{"ambient_dim", t.ambient_dim}, {"F", to_json(t.F)}, {"psi", to_json(t.psi)}, {"phi", to_json(t.phi)}};
}

ApproxTriple triple_from_json(const Json& j) {
  return guarded("ApproxTriple", [&] {
    ApproxTriple t = make_triple(fdalgebra_from_json(j.at("F")), cpmap_from_json(j.at("psi")), cpmap_from_json(j.at("phi")));
    if (t.ambient_dim != j.at("ambient_dim").get<Index>()) throw InputError("ApproxTriple: ambient dimension mismatch");
    return t;
  });
}

Json to_json(const RationalMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

RationalMatrix rational_matrix_from_json(const Json& j) {
  return guarded("RationalMatrix", [&] {
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows == 0 ? 0 : static_cast<Index>(j.at(0).size());
    RationalMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      if (static_cast<Index>(j.at(static_cast<std::size_t>(r)).size()) != cols) throw InputError("RationalMatrix: ragged rows");
      for (Index c = 0; c < cols; ++c) m(r, c) = parse_rational(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<std::string>());
    }
    return m;
  });
}

}  // namespace ndlab
