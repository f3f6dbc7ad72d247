#include <cmath>
#include <algorithm>
#include <complex>
#include <cstring>
#include <map>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "disent/errors.hpp"
#include "disent/synthgen/dataset.hpp"
#include "disent/synthgen/oracle.hpp"
#include "disent/synthgen/synth.hpp"

using namespace disent;

namespace {

// Naive complex DFT of one 64-sample frame; independent of featurize().
std::vector<double> frame_power(const Segment& s, std::size_t frame) {
  std::vector<double> p(kFrameLength / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc{};
    for (std::size_t n = 0; n < kFrameLength; ++n)
      acc += s.samples[frame * kFrameLength + n] *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k * n) / double(kFrameLength));
    p[k] = std::norm(acc);
  }
  return p;
}

std::size_t dominant_bin(const Segment& s) {
  std::vector<double> avg(kFrameLength / 2 + 1, 0.0);
  for (std::size_t t = 0; t < kFrames; ++t) {
    const auto p = frame_power(s, t);
    for (std::size_t k = 0; k < p.size(); ++k) avg[k] += p[k] / kFrames;
  }
  return static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin());
}

double mutual_information(const std::vector<std::size_t>& a, std::size_t ca,
                          const std::vector<std::size_t>& b, std::size_t cb) {
  std::vector<double> joint(ca * cb, 0.0), pa(ca, 0.0), pb(cb, 0.0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[a[i] * cb + b[i]] += 1.0 / n;
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
  }
  double mi = 0.0;
  for (std::size_t x = 0; x < ca; ++x)
    for (std::size_t y = 0; y < cb; ++y)
      if (joint[x * cb + y] > 0) mi += joint[x * cb + y] * std::log(joint[x * cb + y] / (pa[x] * pb[y]));
  return mi;
}

}  // namespace

TEST_CASE("synth_segment") {
  SUBCASE("deterministic per (assignment, nuisance seed)") {
    const Segment a = synth_segment({2, 1, 0}, 77);
    const Segment b = synth_segment({2, 1, 0}, 77);
    CHECK(std::memcmp(a.samples.data(), b.samples.data(), sizeof(a.samples)) == 0);
  }
  SUBCASE("peak normalised to 0.9") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Segment s = synth_segment({1, 0, 2}, seed);
      double peak = 0;
      for (double v : s.samples) peak = std::max(peak, std::fabs(v));
      CHECK(peak == doctest::Approx(kPeakLevel).epsilon(1e-12));
    }
  }
  SUBCASE("pitch class 0 vs 3: dominant DFT bin is the fundamental, mapped to distinct bands") {
    for (std::size_t timbre = 0; timbre < 3; ++timbre) {
      const Segment low = synth_segment({0, 1, timbre}, 5);
      const Segment high = synth_segment({3, 1, timbre}, 5);
      const std::size_t lb = dominant_bin(low), hb = dominant_bin(high);
      CHECK(lb == 2);  // 250 Hz at 125 Hz/bin
      CHECK(hb == 5);  // 625 Hz
      CHECK(band_of_bin(lb) == harmonic_band(0, 1));
      CHECK(band_of_bin(hb) == harmonic_band(3, 1));
      CHECK(band_of_bin(lb) != band_of_bin(hb));
    }
  }
  SUBCASE("rising envelope gives strictly increasing per-frame RMS") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Segment s = synth_segment({seed % 4, envelope_class::rising, seed % 3}, seed);
      double prev = -1.0;
      for (std::size_t t = 0; t < kFrames; ++t) {
        double sq = 0;
        for (std::size_t n = 0; n < kFrameLength; ++n) sq += std::pow(s.samples[t * kFrameLength + n], 2);
        const double rms = std::sqrt(sq / kFrameLength);
        CHECK(rms > prev);
        prev = rms;
      }
    }
  }
  SUBCASE("invalid class index is rejected") {
    CHECK_THROWS_AS(synth_segment({4, 0, 0}, 1), ArgumentError);
    CHECK_THROWS_AS(synth_segment({0, 3, 0}, 1), ArgumentError);
    CHECK_THROWS_AS(synth_segment({0, 0}, 1), ArgumentError);
  }
}

TEST_CASE("featurize") {
  SUBCASE("silence maps to all-zero features") {
    const FeatureVector f = featurize(Segment{});
    for (double v : f.values) CHECK(v == 0.0);
  }
  SUBCASE("a pure 500 Hz tone concentrates in the 500 Hz band") {
    Segment tone;
    for (std::size_t n = 0; n < kSegmentLength; ++n)
      tone.samples[n] = 0.9 * std::sin(2.0 * std::numbers::pi * 500.0 * double(n) / kSampleRate + 0.3);
    const FeatureVector f = featurize(tone);
    const std::size_t band = band_of_bin(4);
    double in_band = 0, total = 0, e_in = 0, e_total = 0;
    for (std::size_t t = 0; t < kFrames; ++t)
      for (std::size_t b = 0; b < kBands; ++b) {
        total += f.at(t, b);
        e_total += std::expm1(f.at(t, b));
        if (b == band) {
          in_band += f.at(t, b);
          e_in += std::expm1(f.at(t, b));
        }
      }
    CHECK(in_band / total >= 0.8);
    CHECK(e_in / e_total >= 0.8);
    // Analytic DFT: |X_4| = A * N / 2 per frame.
    CHECK(std::expm1(f.at(0, band)) == doctest::Approx(std::pow(0.9 * 32.0, 2)).epsilon(1e-9));
  }
  SUBCASE("deterministic and non-negative") {
    const Segment s = synth_segment({1, 2, 1}, 9);
    const FeatureVector a = featurize(s), b = featurize(s);
    CHECK(std::memcmp(a.values.data(), b.values.data(), sizeof(a.values)) == 0);
    for (double v : a.values) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
  SUBCASE("wrong length is rejected") {
    std::vector<double> short_seg(100, 0.0);
    CHECK_THROWS_AS(featurize(short_seg), DimensionError);
  }
}

TEST_CASE("oracle_factors") {
  SUBCASE("exhaustive round trip over all 36 cells x 50 nuisance seeds") {
    std::size_t failures = 0;
    for (std::size_t p = 0; p < 4; ++p)
      for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t t = 0; t < 3; ++t)
          for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const FactorAssignment a{p, e, t};
            if (oracle_factors(featurize(synth_segment(a, seed * 7919 + 13))) != a) ++failures;
          }
    CHECK(failures == 0);
  }
  SUBCASE("all-zero features read as flat") {
    OracleReading r;
    const auto out = oracle_factors(FeatureVector{}, &r);
    CHECK(out[factor::envelope] == envelope_class::flat);
    CHECK(r.envelope_slope == 0.0);
  }
  SUBCASE("nuisance seed does not change the reading") {
    for (std::uint64_t s = 1; s < 30; ++s)
      CHECK(oracle_factors(featurize(synth_segment({2, 0, 1}, s))) ==
            oracle_factors(featurize(synth_segment({2, 0, 1}, s + 1000))));
  }
  SUBCASE("negative entries are treated as silence") {
    FeatureVector f = featurize(synth_segment({1, 1, 1}, 3));
    const auto ref = oracle_factors(f);
    for (std::size_t t = 0; t < kFrames; ++t) f.values[t * kBands + 15] = -0.5;
    CHECK(oracle_factors(f) == ref);
  }
}

TEST_CASE("make_dataset") {
  SUBCASE("full policy makes every label visible") {
    const Dataset ds = make_dataset(50, MaskPolicy::full(), 3);
    for (const auto& s : ds.samples) CHECK(s.fully_labeled());
    CHECK(ds.visibility_counts() == std::vector<std::size_t>{50, 50, 50});
  }
  SUBCASE("only(f) exposes one factor") {
    const Dataset ds = make_dataset(20, MaskPolicy::only(1), 3);
    CHECK(ds.visibility_counts() == std::vector<std::size_t>{0, 20, 0});
  }
  SUBCASE("3600 samples: pitch classes within 5% of 900") {
    const Dataset ds = make_dataset(3600, MaskPolicy::full(), 1);
    std::array<std::size_t, 4> counts{};
    for (const auto& s : ds.samples) ++counts[s.labels[factor::pitch]];
    for (std::size_t c : counts) {
      CHECK(c >= 855);
      CHECK(c <= 945);
    }
  }
  SUBCASE("same seed gives the same dataset") {
    CHECK(make_dataset(40, MaskPolicy::only(2), 17) == make_dataset(40, MaskPolicy::only(2), 17));
    CHECK_FALSE(make_dataset(40, MaskPolicy::only(2), 17) == make_dataset(40, MaskPolicy::only(2), 18));
  }
  SUBCASE("pairwise label mutual information stays below 0.02 nats") {
    const Dataset ds = make_dataset(10000, MaskPolicy::full(), 2);
    std::vector<std::vector<std::size_t>> cols(3);
    for (const auto& s : ds.samples)
      for (std::size_t f = 0; f < 3; ++f) cols[f].push_back(s.labels[f]);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b)
        CHECK(mutual_information(cols[a], ds.factors[a].cardinality, cols[b], ds.factors[b].cardinality) <= 0.02);
  }
  CHECK_THROWS_AS(make_dataset(0, MaskPolicy::full(), 1), ArgumentError);
}

TEST_CASE("MaskPolicy parsing") {
  CHECK(MaskPolicy::parse("full") == MaskPolicy::full());
  CHECK(MaskPolicy::parse("only(2)") == MaskPolicy::only(2));
  CHECK(MaskPolicy::only(2).to_string() == "only(2)");
  CHECK_THROWS_AS(MaskPolicy::parse("only(x)"), ArgumentError);
  CHECK_THROWS_AS(MaskPolicy::only(5).mask_for(3), ArgumentError);
}

TEST_CASE("dataset file round-trips exactly") {
  const Dataset ds = make_dataset(25, MaskPolicy::only(0), 5);
  std::stringstream buf;
  write_dataset(buf, ds);
  const std::string text = buf.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 26);
  const Dataset back = read_dataset(buf);
  CHECK(back == ds);

  std::stringstream bad(R"({"version":2,"factors":[],"seed":0})");
  CHECK_THROWS_AS(read_dataset(bad), FormatError);
  std::stringstream empty;
  CHECK_THROWS_AS(read_dataset(empty), FormatError);
}
