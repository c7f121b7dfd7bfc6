#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "linkpred/encoding.hpp"

using namespace linkpred;

namespace {

BinSpec fit_single(HeuristicKind kind, const std::vector<double>& values,
                   EncoderConfig cfg = {}, HeuristicConfig hcfg = {}) {
  const HeuristicKind kinds[1] = {kind};
  const std::vector<double> cols[1] = {values};
  return fit_bin_specs(kinds, cols, cfg, hcfg)[0];
}

}  // namespace

TEST_CASE("integer kinds get identity vocabularies", "[encoding]") {
  BinSpec spec = fit_single(HeuristicKind::CN, {0, 1, 3, 7});
  CHECK(spec.mode == BinMode::Integer);
  CHECK(spec.int_cap == 64);
  CHECK(spec.vocab_size == 66);
  CHECK(spec.encode(3.0) == 3);
  CHECK(spec.encode(0.0) == 0);
  CHECK(spec.encode(64.0) == 64);
  CHECK(spec.encode(200.0) == 65);  // overflow index
}

TEST_CASE("float kinds get equal-width bins over the observed range", "[encoding]") {
  std::vector<double> values{0.0, 1.3, 5.2, 2.6};
  BinSpec spec = fit_single(HeuristicKind::AA, values);
  CHECK(spec.mode == BinMode::Float);
  REQUIRE(spec.boundaries.size() == 63);
  for (std::size_t k = 1; k < 64; ++k) {
    CHECK(spec.boundaries[k - 1] ==
          Catch::Approx(5.2 * static_cast<double>(k) / 64.0));
  }
  CHECK(spec.vocab_size == 65);
  CHECK(spec.encode(0.0) == 0);
  // the train max lands in the last regular bin, not out-of-range
  CHECK(spec.encode(5.2) == 63);
  // outside the fitted range
  CHECK(spec.encode(-0.1) == 64);
  CHECK(spec.encode(5.3) == 64);
}

TEST_CASE("constant float column degenerates to a single bin", "[encoding]") {
  BinSpec spec = fit_single(HeuristicKind::JA, {0.5, 0.5, 0.5});
  CHECK(spec.boundaries.empty());
  CHECK(spec.vocab_size == 2);
  CHECK(spec.encode(0.5) == 0);
  CHECK(spec.encode(0.4) == 1);
  CHECK(spec.encode(0.6) == 1);
}

TEST_CASE("empty value array is rejected naming the kind", "[encoding]") {
  const HeuristicKind kinds[1] = {HeuristicKind::RA};
  const std::vector<double> cols[1] = {{}};
  CHECK_THROWS_WITH(fit_bin_specs(kinds, cols, {}, {}),
                    Catch::Matchers::ContainsSubstring("'ra'"));
}

TEST_CASE("spd sentinel keeps a dedicated index", "[encoding]") {
  HeuristicConfig hcfg;
  hcfg.spd_cap = 6;
  EncoderConfig cfg;
  cfg.int_cap = 4;  // smaller than the sentinel
  BinSpec spec = fit_single(HeuristicKind::SPD, {1, 2, 7}, cfg, hcfg);
  CHECK(spec.int_cap == 7);  // raised to spd_cap + 1
  CHECK(spec.encode(7.0) == 7);
  CHECK(spec.encode(6.0) == 6);
}

TEST_CASE("encode is total and monotone", "[encoding]") {
  BinSpec spec = fit_single(HeuristicKind::AA, {0.0, 10.0});
  Rng rng(5, "encode");
  double prev_value = 0.0;
  std::uint32_t prev_index = 0;
  for (int i = 0; i < 2000; ++i) {
    const double value = rng.uniform(-5.0, 15.0);
    const std::uint32_t index = spec.encode(value);
    CHECK(index < spec.vocab_size);
    if (i > 0 && value >= 0.0 && value <= 10.0 && prev_value >= 0.0 &&
        prev_value <= 10.0 && prev_value <= value) {
      CHECK(prev_index <= index);
    }
    prev_value = value;
    prev_index = index;
  }
  CHECK(spec.encode(std::nan("")) == spec.bin_count());
}

TEST_CASE("refitting identical data yields identical specs", "[encoding]") {
  std::vector<double> values;
  Rng rng(6, "refit");
  for (int i = 0; i < 500; ++i) values.push_back(rng.uniform(0.0, 3.0));
  BinSpec a = fit_single(HeuristicKind::Katz, values);
  BinSpec b = fit_single(HeuristicKind::Katz, values);
  CHECK(a.boundaries == b.boundaries);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.vocab_size == b.vocab_size);
}

TEST_CASE("bin spec json round trip is bit-exact", "[encoding]") {
  std::vector<double> values{0.1, 2.7, 0.33, 1.9};
  BinSpec spec = fit_single(HeuristicKind::Salton, values);
  const nlohmann::json j = bin_spec_to_json(spec, 32);
  BinSpec back = bin_spec_from_json(j);
  CHECK(back.kind == spec.kind);
  CHECK(back.boundaries == spec.boundaries);
  CHECK(back.lo == spec.lo);
  CHECK(back.hi == spec.hi);
  CHECK(back.vocab_size == spec.vocab_size);
  Rng rng(7, "roundtrip");
  for (int i = 0; i < 500; ++i) {
    const double v = rng.uniform(-1.0, 4.0);
    CHECK(spec.encode(v) == back.encode(v));
  }
}

TEST_CASE("embed_pair concatenates table rows in spec order", "[encoding]") {
  const std::vector<HeuristicKind> kinds{HeuristicKind::CN, HeuristicKind::AA};
  const std::vector<std::vector<double>> cols{{0, 1, 2}, {0.0, 1.0}};
  EncoderConfig cfg;
  cfg.int_cap = 4;
  cfg.float_bins = 8;
  cfg.dim_h = 4;
  auto specs = fit_bin_specs(kinds, cols, cfg, {});
  Rng rng(8, "enc-init");
  HeuristicEncoder enc = HeuristicEncoder::create(specs, cfg.dim_h, rng);

  const std::vector<double> values{2.0, 0.5};
  const auto vec = enc.embed_pair(values);
  REQUIRE(vec.size() == 8);
  const auto idx = enc.encode_row(values);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(vec[c] == enc.tables[0].at(idx[0], c));
    CHECK(vec[4 + c] == enc.tables[1].at(idx[1], c));
  }
  // identical inputs, identical vectors
  CHECK(enc.embed_pair(values) == vec);
}

TEST_CASE("selected table rows receive gradient via finite differences",
          "[encoding]") {
  const std::vector<HeuristicKind> kinds{HeuristicKind::CN};
  const std::vector<std::vector<double>> cols{{0, 1, 2, 3}};
  EncoderConfig cfg;
  cfg.int_cap = 4;
  cfg.dim_h = 3;
  auto specs = fit_bin_specs(kinds, cols, cfg, {});
  Rng rng(9, "enc-grad");
  HeuristicEncoder enc = HeuristicEncoder::create(specs, cfg.dim_h, rng);

  // loss = sum of squares of the selected row
  const std::vector<double> values{2.0};
  const std::uint32_t row = enc.encode_row(values)[0];
  auto loss = [&]() {
    const auto vec = enc.embed_pair(values);
    double acc = 0.0;
    for (double v : vec) acc += v * v;
    return acc;
  };
  // analytic: dL/dw = 2w on the selected row, 0 elsewhere
  const double eps = 1e-6;
  Matrix& table = enc.tables[0];
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.cols; ++c) {
      const double saved = table.at(r, c);
      table.at(r, c) = saved + eps;
      const double up = loss();
      table.at(r, c) = saved - eps;
      const double down = loss();
      table.at(r, c) = saved;
      const double fd = (up - down) / (2 * eps);
      const double analytic = r == row ? 2.0 * saved : 0.0;
      CHECK(fd == Catch::Approx(analytic).margin(1e-5));
    }
  }
}
