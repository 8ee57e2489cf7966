#include "doctest.h"

#include <cmath>
#include <numbers>

#include "../support/synth_checks.hpp"
#include "roman/errors.hpp"
#include "roman/synth.hpp"

using namespace roman::synth;

namespace {

constexpr Family kFamilies[] = {Family::position, Family::longrange, Family::multiscale, Family::invariance};

SynthTaskSpec spec_for(Family family, std::uint64_t seed = 0) {
  SynthTaskSpec spec;
  spec.family = family;
  spec.seed = seed;
  return spec;
}

roman::ErrorKind error_kind(const SynthTaskSpec& spec) {
  try {
    (void)generate(spec);
  } catch (const roman::Error& e) {
    return e.kind();
  }
  FAIL("generation unexpectedly succeeded");
  return roman::ErrorKind::invalid_argument;
}

std::vector<double> row(const roman::Series& s) {
  auto r = s.channel(0);
  return {r.begin(), r.end()};
}

// Least-squares fit of a*template + b with a >= 0 (z-normalisation keeps the
// sign); returns the residual sum of squares.
double affine_residual(const std::vector<double>& y, const std::vector<double>& tmpl) {
  const double n = static_cast<double>(y.size());
  double my = 0, mt = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    my += y[i] / n;
    mt += tmpl[i] / n;
  }
  double sty = 0, stt = 0, syy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sty += (tmpl[i] - mt) * (y[i] - my);
    stt += (tmpl[i] - mt) * (tmpl[i] - mt);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy - (stt > 0 && sty > 0 ? sty * sty / stt : 0.0);
}

}  // namespace

TEST_CASE("default sets have the documented shape and pass geometry checks") {
  for (Family f : kFamilies) {
    CAPTURE(to_string(f));
    const auto spec = spec_for(f);
    const auto data = generate(spec);
    CHECK(data.train.data.size() == 500);
    CHECK(data.test.data.size() == 250);
    CHECK(data.train.data.length() == 512);
    CHECK(data.train.data.channels() == 1);
    CHECK(roman::testing::geometry_violation(spec, data) == "");
    CHECK(data.metadata.at("family") == std::string(to_string(f)));
  }
}

TEST_CASE("generation is deterministic and independent of the thread count") {
  for (Family f : kFamilies) {
    CAPTURE(to_string(f));
    auto spec = spec_for(f, 12);
    spec.n_train = 60;
    spec.n_test = 30;
    const auto a = generate(spec);
    spec.threads = 4;
    const auto b = generate(spec);
    CHECK(roman::testing::bit_identical(a, b));
    spec.seed = 13;
    CHECK_FALSE(roman::testing::bit_identical(a, generate(spec)));
  }
}

TEST_CASE("family names round-trip") {
  for (Family f : kFamilies) CHECK(family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(family_from_string("wavelet"), roman::Error);
}

TEST_CASE("position class ranges and spike placement") {
  const auto [near, far] = position_class_ranges(PositionParams{});
  CHECK(near.lo == 32);
  CHECK(near.hi == 72);
  CHECK(far.lo == 88);
  CHECK(far.hi == 128);

  auto spec = spec_for(Family::position, 3);
  spec.position.noise = 0.0;
  spec.position.amplitude_lo = spec.position.amplitude_hi = 4.0;
  spec.normalize = false;
  const auto data = generate(spec);
  for (std::size_t i = 0; i < data.train.data.size(); ++i) {
    const auto x = row(data.train.data.series[i]);
    const std::size_t d = data.train.info[i].distance;
    std::vector<std::size_t> nonzero;
    for (std::size_t t = 0; t < x.size(); ++t) {
      if (x[t] != 0.0) nonzero.push_back(t);
    }
    REQUIRE(nonzero == std::vector<std::size_t>{d, 511 - d});
    CHECK(x[d] == 4.0);
  }
  CHECK(data.metadata.at("class_ranges").at("0") == nlohmann::json::array({32, 72}));
}

TEST_CASE("long-range: noiseless matched filter separates the classes") {
  CHECK(longrange_centers(512) == std::pair<std::size_t, std::size_t>{85, 426});
  auto spec = spec_for(Family::longrange, 5);
  spec.longrange.noise = 0.0;
  const auto data = generate(spec);
  for (const auto* set : {&data.train, &data.test}) {
    for (std::size_t i = 0; i < set->data.size(); ++i) {
      const auto x = row(set->data.series[i]);
      // Zero-lag Pearson correlation between the two burst windows.
      std::vector<double> a(x.begin() + 85 - 16, x.begin() + 85 + 17);
      std::vector<double> b(x.begin() + 426 - 16, x.begin() + 426 + 17);
      double ma = 0, mb = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k] / 33.0;
        mb += b[k] / 33.0;
      }
      double sab = 0, saa = 0, sbb = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
      }
      const int predicted = sab / std::sqrt(saa * sbb) > 1.0 - 1e-9 ? 0 : 1;
      CHECK(predicted == set->data.labels[i]);
    }
  }
}

TEST_CASE("multiscale: least-squares phase oracle labels the noiseless set") {
  auto spec = spec_for(Family::multiscale, 2);
  spec.multiscale.noise = 0.0;
  const auto data = generate(spec);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < data.train.data.size(); ++i) {
    const auto x = row(data.train.data.series[i]);
    int best_coarse = -1, best_fine = -1;
    double coarse_rss = 1e300, fine_rss = 1e300;
    for (int k = 0; k < 4; ++k) {
      std::vector<double> y, tmpl;
      for (std::size_t t = 0; t < 512; ++t) {
        if (t >= 208 && t < 304) continue;
        y.push_back(x[t]);
        tmpl.push_back(std::cos(two_pi * t / 512.0 + two_pi * k / 4.0));
      }
      if (const double r = affine_residual(y, tmpl); r < coarse_rss) {
        coarse_rss = r;
        best_coarse = k;
      }
      y.clear();
      tmpl.clear();
      for (std::size_t j = 0; j < 32; ++j) {
        y.push_back(x[240 + j]);
        tmpl.push_back(std::cos(two_pi * 4.0 * j / 32.0 + two_pi * k / 4.0));
      }
      if (const double r = affine_residual(y, tmpl); r < fine_rss) {
        fine_rss = r;
        best_fine = k;
      }
    }
    CHECK(best_coarse == data.train.info[i].phases[0]);
    CHECK(best_fine == data.train.info[i].phases[1]);
    CHECK((best_coarse == best_fine ? 0 : 1) == data.train.data.labels[i]);
  }
}

TEST_CASE("invariance: target matched filter peaks at the planted start") {
  auto spec = spec_for(Family::invariance, 4);
  spec.invariance.noise = 0.0;
  const auto data = generate(spec);
  const auto target = data.metadata.at("library").at(0).get<std::vector<std::size_t>>();
  std::size_t positives = 0;
  for (std::size_t i = 0; i < data.train.data.size(); ++i) {
    if (data.train.data.labels[i] != 1) continue;
    ++positives;
    const auto x = row(data.train.data.series[i]);
    double best = -1e300;
    for (std::size_t s = 0; s + 33 <= x.size(); ++s) {
      double score = 0;
      for (auto o : target) score += x[s + o];
      best = std::max(best, score);
    }
    const std::size_t planted = data.train.info[i].positions[0];
    double at_planted = 0;
    for (auto o : target) at_planted += x[planted + o];
    CHECK(at_planted == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(positives == 250);
}

TEST_CASE("invariance separation holds over 10,000 series") {
  auto spec = spec_for(Family::invariance, 9);
  spec.n_train = 10000;
  spec.n_test = 2;
  const auto data = generate(spec);
  std::size_t checked = 0;
  for (const auto& info : data.train.info) {
    REQUIRE(info.positions.size() == 2);
    const auto a = info.positions[0], b = info.positions[1];
    CHECK((a > b ? a - b : b - a) >= 16);
    CHECK(std::max(a, b) <= 512 - 33);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("pattern distance") {
  CHECK(pattern_distance({0, 6, 12, 18}, {0, 6, 12, 18}) == 0);
  CHECK(pattern_distance({0, 6, 12, 18}, {1, 8, 12, 21}) == 6);
}

TEST_CASE("infeasible geometries are rejected") {
  auto lr = spec_for(Family::longrange);
  lr.longrange.library_size = 1;
  CHECK(error_kind(lr) == roman::ErrorKind::infeasible_geometry);

  lr = spec_for(Family::longrange);
  lr.longrange.spikes = 7;  // 7 spikes 6 apart need 37 samples
  CHECK(error_kind(lr) == roman::ErrorKind::infeasible_geometry);

  auto ms = spec_for(Family::multiscale);
  ms.multiscale.mask_length = 16;
  CHECK(error_kind(ms) == roman::ErrorKind::infeasible_geometry);
  ms = spec_for(Family::multiscale);
  ms.multiscale.phases = 1;
  CHECK(error_kind(ms) == roman::ErrorKind::infeasible_geometry);

  auto inv = spec_for(Family::invariance);
  inv.length = 40;
  CHECK(error_kind(inv) == roman::ErrorKind::infeasible_geometry);

  auto pos = spec_for(Family::position);
  pos.position.gap = 96;
  CHECK(error_kind(pos) == roman::ErrorKind::infeasible_geometry);
  pos = spec_for(Family::position);
  pos.length = 200;  // far class would cross the centre
  CHECK(error_kind(pos) == roman::ErrorKind::infeasible_geometry);
}

TEST_CASE("odd split sizes stay balanced") {
  for (Family f : kFamilies) {
    auto spec = spec_for(f, 1);
    spec.n_train = 11;
    spec.n_test = 7;
    const auto data = generate(spec);
    CHECK(roman::testing::geometry_violation(spec, data) == "");
  }
}
