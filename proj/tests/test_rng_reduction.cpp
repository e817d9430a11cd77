#include <doctest.h>

#include <cmath>
#include <vector>

#include "sedsim/reduction.hpp"
#include "sedsim/rng.hpp"

using namespace sedsim;

TEST_CASE("counter stream is random access and reproducible") {
  CounterRng a(42);
  std::vector<double> first;
  for (int i = 0; i < 10; ++i) first.push_back(a.uniform());
  for (int i = 0; i < 10; ++i) CHECK(CounterRng::uniform_at(42, i) == first[i]);
  CounterRng b(42, 5);
  CHECK(b.uniform() == first[5]);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("uniforms lie strictly inside (0,1) with the right moments") {
  CounterRng r(7);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("normals and unit vectors") {
  CounterRng r(9);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.normal();
    s += g;
    s2 += g * g;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  for (int i = 0; i < 100; ++i) CHECK(std::abs(norm(r.unit_vector()) - 1.0) < 1e-14);
}

TEST_CASE("256 unit terms sum exactly") {
  std::vector<Vec3> t(256, Vec3{1, 0, 0});
  const Vec3 s = chunked_sum(t);
  CHECK(s.x == 256.0);
  CHECK(s.y == 0.0);
  CHECK(s.z == 0.0);
}

TEST_CASE("empty input and bad plans are rejected") {
  std::vector<Vec3> none;
  CHECK_THROWS_AS(chunked_sum(none), std::invalid_argument);
  ReductionPlan p;
  p.chunk_size = 100;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.chunk_size = 256;
  CHECK(p.tree_depth() == 8);
}

TEST_CASE("zero padding to a chunk multiple changes nothing") {
  CounterRng r(3);
  std::vector<Vec3> t(1000);
  for (auto& v : t) v = {r.normal(), r.normal(), r.normal()};
  std::vector<Vec3> padded = t;
  padded.resize(1024, Vec3{});
  const Vec3 a = chunked_sum(t);
  const Vec3 b = chunked_sum(padded);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
}

TEST_CASE("chunk sizes agree on smooth spectra") {
  std::vector<Vec3> t(100000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = (i + 1) * 1e-4;
    t[i] = {std::exp(-w) * std::cos(3 * w), std::sin(w) / (1 + w), w * std::exp(-2 * w)};
  }
  const Vec3 ref = serial_sum_reference(t);
  for (std::size_t cs : {128u, 256u, 512u}) {
    ReductionPlan p;
    p.chunk_size = cs;
    const Vec3 s = chunked_sum(t, p);
    CHECK(norm(s - ref) / norm(ref) < 1e-10);
  }
}

TEST_CASE("precision audit") {
  std::vector<Vec3> zeros(1000, Vec3{});
  const PrecisionAudit z = precision_audit(zeros, {}, 10);
  CHECK(z.discrepancy == 0.0);

  // Alternating +-1e8 summing to 1: float chunk interiors drop the 1.
  std::vector<Vec3> bad;
  for (int i = 0; i < 512; ++i) {
    bad.push_back({i == 100 ? 1e8 + 1.0 : 1e8, 0, 0});
    bad.push_back({-1e8, 0, 0});
  }
  ReductionPlan mixed;
  mixed.precision = Precision::mixed_float;
  const PrecisionAudit a = precision_audit(bad, mixed, 2);
  CHECK(a.reference.x == 1.0);
  CHECK(a.relative_discrepancy > 1e-10);
  const PrecisionAudit e = precision_audit(bad, {}, 2);
  CHECK(e.discrepancy == 0.0);
}
