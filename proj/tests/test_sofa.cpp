#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "sofanet/errors.hpp"
#include "sofanet/sofa.hpp"

using namespace sofanet;

TEST_CASE("coagulation thresholds, both sides of every boundary") {
  CHECK(score_coagulation(160.0) == 0);
  CHECK(score_coagulation(150.0) == 0);
  CHECK(score_coagulation(149.999) == 1);
  CHECK(score_coagulation(100.0) == 1);
  CHECK(score_coagulation(99.999) == 2);
  CHECK(score_coagulation(90.0) == 2);
  CHECK(score_coagulation(50.0) == 2);
  CHECK(score_coagulation(49.999) == 3);
  CHECK(score_coagulation(20.0) == 3);
  CHECK(score_coagulation(19.999) == 4);
  CHECK(score_coagulation(15.0) == 4);
  CHECK_THROWS_AS(score_coagulation(-1.0), NegativeInput);
}

TEST_CASE("liver thresholds") {
  CHECK(score_liver(1.0) == 0);
  CHECK(score_liver(1.199) == 0);
  CHECK(score_liver(1.2) == 1);
  CHECK(score_liver(1.999) == 1);
  CHECK(score_liver(2.0) == 2);
  CHECK(score_liver(3.0) == 2);
  CHECK(score_liver(5.999) == 2);
  CHECK(score_liver(6.0) == 3);
  CHECK(score_liver(11.999) == 3);
  CHECK(score_liver(12.0) == 4);
  CHECK(score_liver(13.0) == 4);
  CHECK_THROWS_AS(score_liver(-0.1), NegativeInput);
}

TEST_CASE("cardiovascular: MAP-only results are capped at 1") {
  CHECK(score_cardiovascular(75.0) == 0);
  CHECK(score_cardiovascular(70.0) == 0);
  CHECK(score_cardiovascular(69.999) == 1);
  CHECK(score_cardiovascular(65.0) == 1);
  CHECK(score_cardiovascular(0.0) == 1);
}

TEST_CASE("cardiovascular with vasopressor doses") {
  CHECK(score_cardiovascular(65.0, {}, {}, {}, 0.2) == 4);
  CHECK(score_cardiovascular(80.0, {}, {}, 0.11, {}) == 4);
  CHECK(score_cardiovascular(80.0, 15.001, {}, {}, {}) == 4);
  CHECK(score_cardiovascular(80.0, 15.0, {}, {}, {}) == 3);
  CHECK(score_cardiovascular(80.0, 5.001, {}, {}, {}) == 3);
  CHECK(score_cardiovascular(80.0, {}, {}, 0.1, {}) == 3);
  CHECK(score_cardiovascular(80.0, {}, {}, {}, 0.1) == 3);
  CHECK(score_cardiovascular(80.0, 5.0, {}, {}, {}) == 2);
  CHECK(score_cardiovascular(80.0, 0.1, {}, {}, {}) == 2);
  CHECK(score_cardiovascular(80.0, {}, 2.0, {}, {}) == 2);
  CHECK(score_cardiovascular(80.0, {}, 0.001, {}, {}) == 2);
  CHECK(score_cardiovascular(80.0, 0.0, 0.0, 0.0, 0.0) == 0);
  CHECK(score_cardiovascular(65.0, 0.0, 0.0, 0.0, 0.0) == 1);
  CHECK_THROWS_AS(score_cardiovascular(80.0, -1.0, {}, {}, {}), NegativeInput);
}

TEST_CASE("renal thresholds and urine override") {
  CHECK(score_renal(1.0) == 0);
  CHECK(score_renal(1.199) == 0);
  CHECK(score_renal(1.2) == 1);
  CHECK(score_renal(1.999) == 1);
  CHECK(score_renal(2.0) == 2);
  CHECK(score_renal(2.5) == 2);
  CHECK(score_renal(3.499) == 2);
  CHECK(score_renal(3.5) == 3);
  CHECK(score_renal(4.999) == 3);
  CHECK(score_renal(5.0) == 4);
  CHECK(score_renal(5.5) == 4);
  CHECK(score_renal(1.0, 150.0) == 4);
  CHECK(score_renal(1.0, 199.999) == 4);
  CHECK(score_renal(1.0, 200.0) == 3);
  CHECK(score_renal(1.0, 499.999) == 3);
  CHECK(score_renal(1.0, 500.0) == 0);
  CHECK(score_renal(2.5, 500.0) == 2);  // creatinine dominates
  CHECK_THROWS_AS(score_renal(-2.0), NegativeInput);
}

TEST_CASE("respiration thresholds, support gating and the no-support cap") {
  CHECK(score_respiration(450.0, false) == 0);
  CHECK(score_respiration(400.0, false) == 0);
  CHECK(score_respiration(399.999, false) == 1);
  CHECK(score_respiration(300.0, false) == 1);
  CHECK(score_respiration(299.999, false) == 2);
  CHECK(score_respiration(250.0, false) == 2);
  CHECK(score_respiration(200.0, true) == 2);
  CHECK(score_respiration(199.999, true) == 3);
  CHECK(score_respiration(100.0, true) == 3);
  CHECK(score_respiration(99.999, true) == 4);
  CHECK(score_respiration(90.0, true) == 4);
  CHECK(score_respiration(90.0, false) == 2);  // capped without support evidence
  CHECK(score_respiration(150.0, false) == 2);
  CHECK_THROWS_AS(score_respiration(-5.0, false), NegativeInput);
}

TEST_CASE("cns thresholds") {
  CHECK(score_cns(15) == 0);
  CHECK(score_cns(14) == 1);
  CHECK(score_cns(13) == 1);
  CHECK(score_cns(12) == 2);
  CHECK(score_cns(10) == 2);
  CHECK(score_cns(9) == 3);
  CHECK(score_cns(6) == 3);
  CHECK(score_cns(5) == 4);
  CHECK(score_cns(4) == 4);
  CHECK(score_cns(3) == 4);
  CHECK_THROWS_AS(score_cns(2), OutOfRange);
  CHECK_THROWS_AS(score_cns(16), OutOfRange);
}

TEST_CASE("monotonicity over random input pairs") {
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> plt(0.0, 300.0), bili(0.0, 15.0), cr(0.0, 6.0);
  for (int t = 0; t < 500; ++t) {
    double a = plt(rng), b = plt(rng);
    if (a > b) std::swap(a, b);
    CHECK(score_coagulation(a) >= score_coagulation(b));
    a = bili(rng), b = bili(rng);
    if (a > b) std::swap(a, b);
    CHECK(score_liver(a) <= score_liver(b));
    a = cr(rng), b = cr(rng);
    if (a > b) std::swap(a, b);
    CHECK(score_renal(a) <= score_renal(b));
  }
  for (int g = 3; g < 15; ++g) CHECK(score_cns(g) >= score_cns(g + 1));
}

TEST_CASE("totality: a dense grid maps every input to exactly one score in 0..4") {
  for (double v = 0.0; v <= 400.0; v += 0.25) {
    const int c = score_coagulation(v);
    CHECK(c >= 0);
    CHECK(c <= 4);
  }
  for (double v = 0.0; v <= 20.0; v += 0.01) {
    CHECK(score_liver(v) >= 0);
    CHECK(score_liver(v) <= 4);
    CHECK(score_renal(v) >= 0);
    CHECK(score_renal(v) <= 4);
  }
}

TEST_CASE("score_series: healthy and deranged hours") {
  const FeatureSchema& schema = standard_schema();
  PatientSeries s;
  s.rows.resize(2, schema.size());
  auto set = [&](std::size_t t, const char* name, double v) {
    s.rows[t][schema.index_of(name)] = v;
  };
  set(0, "Platelets", 160.0);
  set(0, "TotalBilirubin", 1.0);
  set(0, "MAP", 75.0);
  set(0, "Creatinine", 1.0);
  set(1, "Platelets", 15.0);
  set(1, "TotalBilirubin", 13.0);
  set(1, "MAP", 65.0);
  set(1, "Creatinine", 5.5);

  const auto scores = score_series(s, schema);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].mandatory() == std::array<int, 4>{0, 0, 0, 0});
  CHECK(scores[1].mandatory() == std::array<int, 4>{4, 4, 1, 4});
  // the 27-feature schema has no PF ratio or GCS columns
  CHECK_FALSE(scores[0].respiration.has_value());
  CHECK_FALSE(scores[0].cns.has_value());
}

TEST_CASE("score_series rejects schemas lacking a mandatory variable") {
  FeatureSchema broken;
  broken.names = {"HR", "MAP"};
  broken.units = {"bpm", "mmHg"};
  broken.kinds = {FeatureKind::Vital, FeatureKind::Vital};
  PatientSeries s;
  s.rows.resize(1, 2);
  CHECK_THROWS_AS(score_series(s, broken), MissingFeature);
}

TEST_CASE("score_series matches an independent flat if-chain oracle over 1000 hours") {
  const FeatureSchema& schema = standard_schema();
  std::mt19937_64 rng(307);
  std::uniform_real_distribution<double> plt(0.0, 350.0), bili(0.0, 16.0), map(40.0, 100.0),
      cr(0.0, 7.0);
  PatientSeries s;
  s.rows.resize(1000, schema.size());
  const int i_plt = schema.index_of("Platelets");
  const int i_bili = schema.index_of("TotalBilirubin");
  const int i_map = schema.index_of("MAP");
  const int i_cr = schema.index_of("Creatinine");
  for (std::size_t t = 0; t < 1000; ++t) {
    s.rows[t][i_plt] = plt(rng);
    s.rows[t][i_bili] = bili(rng);
    s.rows[t][i_map] = map(rng);
    s.rows[t][i_cr] = cr(rng);
  }

  const auto scores = score_series(s, schema);
  for (std::size_t t = 0; t < 1000; ++t) {
    // flat if-chains, written out independently of the implementation
    const double p = s.rows[t][i_plt];
    int coag;
    if (p >= 150) coag = 0;
    else if (p >= 100) coag = 1;
    else if (p >= 50) coag = 2;
    else if (p >= 20) coag = 3;
    else coag = 4;

    const double b = s.rows[t][i_bili];
    int liver;
    if (b < 1.2) liver = 0;
    else if (b < 2.0) liver = 1;
    else if (b < 6.0) liver = 2;
    else if (b < 12.0) liver = 3;
    else liver = 4;

    const int cardio = s.rows[t][i_map] < 70.0 ? 1 : 0;

    const double c = s.rows[t][i_cr];
    int renal;
    if (c < 1.2) renal = 0;
    else if (c < 2.0) renal = 1;
    else if (c < 3.5) renal = 2;
    else if (c < 5.0) renal = 3;
    else renal = 4;

    CHECK(scores[t].mandatory() == std::array<int, 4>{coag, liver, cardio, renal});
  }
}
