/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <cmath>

#include "cpapprox/error.hpp"
#include "cpapprox/obstruction.hpp"
#include "cpapprox/sampling.hpp"

using namespace cpapprox;

namespace {

std::string precondition_tag(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Precondition) return e.tag();
    return std::string("other:") + error_code_name(e.code());
  }
  return "none";
}

struct Fixture {
  PatternSet x = balanced_pattern(8, 4);
  State phi = rudin_state(x);
  BlockFormMap s0 = expectation_family_blocks(phi, 4, 0.0);
};

}  // namespace

TEST_CASE("expectation family is UCP, and preserves phi only at lambda = 0") {
  Fixture fx;
  const double d1 = preservation_defect(expectation_family_blocks(fx.phi, 4, 1.0), fx.phi);
  CHECK(d1 > 0.0);
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
    const BlockFormMap s = expectation_family_blocks(fx.phi, 4, lambda);
    CHECK(verify_ucp(s, 1e-12).is_ucp);
    // phi o S_lambda - phi = lambda (phi o M - phi) because D preserves phi.
    CHECK(preservation_defect(s, fx.phi) == doctest::Approx(lambda * d1).scale(1e-12));
    const GridMap g = expectation_family(fx.phi, 4, lambda);
    CHECK(preservation_defect(g, fx.phi) == doctest::Approx(lambda * d1).scale(1e-12));
  }
}

TEST_CASE("range basis dimension") {
  Fixture fx;
  const RangeBasis b = range_basis({&fx.s0.corner(0, 0), &fx.s0.corner(1, 1)}, 16, 7);
  CHECK_FALSE(b.exceeds);
  CHECK(b.dim == 16);  // one averaging functional per level-4 cell
  CHECK(b.residual < 1e-12);
  CHECK((b.q.adjoint() * b.q - CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  const CMatrix id = CMatrix::Identity(256, 256);
  const RangeBasis full = range_basis({&id}, 16, 7);
  CHECK(full.exceeds);
}

TEST_CASE("span oscillation bounds every function in the span") {
  Rng rng(71);
  const Grid grid(64);
  CMatrix a(64, 3);
  const auto presets = function_presets({"linear", "cosine", "chebyshev3"}, grid);
  for (int c = 0; c < 3; ++c) a.col(c) = presets[c];
  const CMatrix sq = a * a.adjoint();
  const RangeBasis b = range_basis({&sq}, 8, 3);
  REQUIRE(b.dim == 3);
  for (const IndexRange r : {IndexRange{0, 8}, IndexRange{10, 30}, IndexRange{0, 64}}) {
    const double bound = span_oscillation(b, r);
    for (int t = 0; t < 50; ++t) {
      const GridFunction f = a * random_gaussian(rng, 3, 1).col(0);
      CHECK(family_oscillation({f}, r) <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("cover structure") {
  Fixture fx;
  const RangeBasis b = range_basis({&fx.s0.corner(0, 0), &fx.s0.corner(1, 1)}, 16, 7);
  for (int theta : {0, 17, 128, 255}) {
    const CoverSpec c = build_cover(b, fx.phi.grid(), theta, 0.1);
    CHECK(c.intervals[0].contains(theta));
    CHECK(c.j_interval.contains(theta));
    CHECK(c.j_interval.begin >= c.intervals[0].begin);
    CHECK(c.j_interval.end <= c.intervals[0].end);
    RVector total = RVector::Zero(256);
    for (std::size_t i = 0; i < c.intervals.size(); ++i) {
      total += c.rho[i];
      for (int j = 0; j < 256; ++j) {
        if (c.rho[i](j) != 0.0) CHECK(c.intervals[i].contains(j));
      }
      if (i == 0) continue;
      CHECK((c.intervals[i].end <= c.j_interval.begin || c.intervals[i].begin >= c.j_interval.end));
      for (std::size_t k = 0; k < c.intervals.size(); ++k) {
        CHECK((k == i) == c.intervals[k].contains(c.samples[i]));
      }
    }
    CHECK((total - RVector::Ones(256)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(c.oscillation < 0.1);
  }
}

TEST_CASE("averaging maps are unital and positive") {
  Fixture fx;
  const RangeBasis b = range_basis({&fx.s0.corner(0, 0), &fx.s0.corner(1, 1)}, 16, 7);
  const CoverSpec c = build_cover(b, fx.phi.grid(), 100, 0.1);
  const auto [t1, t2] = build_averaging_pair(c, fx.x);
  const GridFunction one = GridFunction::Ones(256);
  CHECK((t1.apply(one) - one).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((t2.apply(one) - one).cwiseAbs().maxCoeff() < 1e-14);
  const GridFunction f = function_preset("cosine", fx.phi.grid());
  CHECK(t1.apply(f).real().minCoeff() >= 0.0);
  // T_1 only sees X on the first interval, T_2 only X^c.
  GridFunction gamma = GridFunction::Zero(256);
  for (int j : fx.x.members()) gamma(j) = 1.0;
  for (int j = c.j_interval.begin; j < c.j_interval.end; ++j) {
    CHECK(std::abs(t1.apply(gamma)(j) - 1.0) < 1e-14);
    CHECK(std::abs(t2.apply(gamma)(j)) < 1e-14);
  }
}

TEST_CASE("certificates for the phi-preserving member") {
  Fixture fx;
  for (double eps : {0.4, 0.2, 0.1}) {
    const ChainVerifier v(fx.s0, fx.phi, fx.x, eps);
    CHECK(v.preconditions().ucp.is_ucp);
    CHECK(v.preconditions().range_dim == 16);
    for (const char* name : {"constant", "linear", "quadratic", "cosine", "chebyshev4"}) {
      for (int theta : {0, 77, 128, 255}) {
        const Certificate cert = v.verify(function_preset(name, fx.phi.grid()), theta);
        CHECK(cert.pass);
        CHECK(cert.final_average <= 8 * eps);
        CHECK(cert.final_bound == doctest::Approx(8 * eps));
        CHECK(cert.retention == 0.0);
        for (const auto& step : cert.steps) {
          INFO(step.name);
          CHECK(step.pass);
        }
      }
    }
  }
}

TEST_CASE("maps violating a hypothesis are rejected with its name") {
  Fixture fx;
  const BlockFormMap id = BlockFormMap::from_grid_map(GridMap::identity(2, fx.phi.grid()));
  try {
    ChainVerifier v(id, fx.phi, fx.x, 0.1);
    FAIL("identity accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Precondition);
    CHECK(e.tag() == "RangeSmoothness");
    CHECK(e.witness() > 16);
  }
  CHECK(precondition_tag([&] { ChainVerifier(expectation_family_blocks(fx.phi, 4, 0.5), fx.phi, fx.x, 0.1); }) ==
        "phi-preservation");
  BlockFormMap half = fx.s0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) half.corner(a, b) *= 0.5;
  CHECK(precondition_tag([&] { ChainVerifier(half, fx.phi, fx.x, 0.1); }) == "UCP");
  CHECK_THROWS_AS(ChainVerifier(fx.s0, fx.phi, fx.x, 1.5), Error);
  const ChainVerifier v(fx.s0, fx.phi, fx.x, 0.2);
  GridFunction big = GridFunction::Constant(256, 2.0);
  CHECK_THROWS_AS(v.verify(big, 0), Error);
}

TEST_CASE("trade-off scan") {
  Fixture fx;
  const std::vector<double> lambdas{0.0, 0.25, 0.5, 1.0};
  const GridFunction f = GridFunction::Ones(256);
  const auto rows = defect_tradeoff_scan(fx.phi, fx.x, 4, lambdas, f, {0.4, 0.1}, 128);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].eps == (i < 4 ? 0.4 : 0.1));
    CHECK(rows[i].lambda == lambdas[i % 4]);
    if (rows[i].lambda == 0.0) {
      CHECK(rows[i].status == CertificateStatus::Pass);
      CHECK(rows[i].retention == 0.0);
      CHECK(rows[i].identity_defect == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      CHECK(rows[i].status == CertificateStatus::Ineligible);
      CHECK(rows[i].reason == "phi-preservation");
      CHECK(rows[i].retention > 0.0);
      CHECK(rows[i].preservation_defect > 0.0);
      CHECK_FALSE(rows[i].final_average.has_value());
    }
  }
  CHECK(std::string(certificate_status_name(CertificateStatus::Ineligible)) == "ineligible");
}
