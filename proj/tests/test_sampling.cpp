#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aerial/sampling.hpp"
#include "oracles.hpp"

using namespace aerial;

namespace {

SceneFrame nadir_frame() {
  SceneFrame f;
  f.earth_center = Vec3::Zero();
  f.earth_radius = 1000.0;
  f.building_height = 50.0;
  f.foreground_radius = 100.0;
  return f;
}

Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v(2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    if (v.norm() > 0.1 && v.norm() <= 1.0) return v.normalized();
  }
}

}  // namespace

TEST_CASE("ray-sphere roots on the axis and on a miss") {
  const auto hit = ray_sphere_roots(Ray{Vec3(0, 0, 1200), Vec3(0, 0, -1)}, Vec3::Zero(), 1050.0);
  REQUIRE(hit);
  CHECK(hit->first == doctest::Approx(150.0).epsilon(1e-15));
  CHECK(hit->second == doctest::Approx(2250.0).epsilon(1e-15));
  CHECK_FALSE(ray_sphere_roots(Ray{Vec3(0, 0, 1200), Vec3(1, 0, 0)}, Vec3::Zero(), 1000.0));
  CHECK_THROWS_AS(ray_sphere_roots(Ray{}, Vec3::Zero(), 0.0), std::invalid_argument);
}

TEST_CASE("tangent rays miss") {
  CHECK_FALSE(ray_sphere_roots(Ray{Vec3(-5, 0, 1000), Vec3(1, 0, 0)}, Vec3::Zero(), 1000.0));
  CHECK(ray_sphere_roots(Ray{Vec3(-5, 0, 999), Vec3(1, 0, 0)}, Vec3::Zero(), 1000.0));
}

TEST_CASE("ray-sphere roots satisfy the sphere equation") {
  Rng rng(11);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 center(100 * rng.uniform() - 50, 100 * rng.uniform() - 50, 100 * rng.uniform() - 50);
    const double radius = 1.0 + 2000.0 * rng.uniform();
    const Vec3 origin = center + (0.2 + 3.0 * rng.uniform()) * radius * random_unit(rng);
    // Scaled directions exercise A != 1.
    const Vec3 dir = (0.5 + rng.uniform()) * random_unit(rng);
    const auto roots = ray_sphere_roots(Ray{origin, dir}, center, radius);
    if (!roots) continue;
    ++hits;
    CHECK(roots->first <= roots->second);
    for (double t : {roots->first, roots->second})
      CHECK(std::abs((origin + t * dir - center).norm() - radius) <= 1e-6 * radius);
  }
  CHECK(hits > 3000);
}

TEST_CASE("bounded range cases") {
  const SceneFrame f = nadir_frame();
  SUBCASE("nadir") {
    const RayRange r = bounded_range(Ray{Vec3(0, 0, 1200), Vec3(0, 0, -1)}, f);
    CHECK(r.mode == SampleMode::bounded);
    CHECK(std::abs(r.near - 150.0) <= 1e-9);
    CHECK(std::abs(r.far - 200.0) <= 1e-9);
  }
  SUBCASE("horizontal miss") {
    CHECK(bounded_range(Ray{Vec3(0, 0, 1200), Vec3(1, 0, 0)}, f).mode == SampleMode::unbounded);
  }
  SUBCASE("pointing away from the scene") {
    CHECK(bounded_range(Ray{Vec3(0, 0, 1200), Vec3(0, 0, 1)}, f).mode == SampleMode::unbounded);
  }
  SUBCASE("inside the shell") {
    const RayRange r = bounded_range(Ray{Vec3(0, 0, 1020), Vec3(0, 0, -1)}, f);
    CHECK(r.mode == SampleMode::inside_shell);
    CHECK(r.near == 0.0);
    CHECK(r.far == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("inside the shell looking up exits the outer sphere") {
    const RayRange r = bounded_range(Ray{Vec3(0, 0, 1020), Vec3(0, 0, 1)}, f);
    CHECK(r.mode == SampleMode::inside_shell);
    CHECK(r.far == doctest::Approx(30.0).epsilon(1e-12));
  }
  SUBCASE("grazing ray crosses the shell only") {
    const RayRange r = bounded_range(Ray{Vec3(-2000, 0, 1030), Vec3(1, 0, 0)}, f);
    const double half = std::sqrt(1050.0 * 1050.0 - 1030.0 * 1030.0);
    CHECK(r.mode == SampleMode::bounded);
    CHECK(r.near == doctest::Approx(2000.0 - half).epsilon(1e-12));
    CHECK(r.far == doctest::Approx(2000.0 + half).epsilon(1e-12));
  }
  SUBCASE("camera below the surface") {
    CHECK_THROWS_AS(bounded_range(Ray{Vec3(0, 0, 990), Vec3(0, 0, -1)}, f), DataError);
  }
}

TEST_CASE("bounded near and far lie on their spheres") {
  Rng rng(5);
  int bounded = 0;
  for (int i = 0; i < 10000; ++i) {
    SceneFrame f;
    f.earth_center = Vec3(200 * rng.uniform() - 100, 200 * rng.uniform() - 100, -1000 * rng.uniform());
    f.earth_radius = 100.0 + 5000.0 * rng.uniform();
    f.building_height = 1.0 + 100.0 * rng.uniform();
    const double alt = f.outer_radius() * (1.0 + 0.5 * rng.uniform());
    const Vec3 origin = f.earth_center + alt * random_unit(rng);
    const Vec3 dir = random_unit(rng);
    const RayRange r = bounded_range(Ray{origin, dir}, f);
    if (r.mode != SampleMode::bounded) continue;
    CHECK(r.near < r.far);
    CHECK(r.near >= 0.0);
    const double dn = (origin + r.near * dir - f.earth_center).norm();
    CHECK(std::abs(dn - f.outer_radius()) <= 1e-6 * f.outer_radius());
    const double df = (origin + r.far * dir - f.earth_center).norm();
    const bool on_earth = std::abs(df - f.earth_radius) <= 1e-6 * f.earth_radius;
    const bool on_outer = std::abs(df - f.outer_radius()) <= 1e-6 * f.outer_radius();
    CHECK((on_earth || on_outer));
    if (ray_sphere_roots(Ray{origin, dir}, f.earth_center, f.earth_radius)) {
      CHECK(on_earth);
      ++bounded;
    }
  }
  CHECK(bounded > 1000);
}

TEST_CASE("nadir range approaches the flat-Earth limit") {
  SceneFrame f;
  f.earth_radius = 6.371e6;
  f.earth_center = Vec3(0, 0, -f.earth_radius);
  f.building_height = 50.0;
  const double altitude = 200.0;
  const RayRange r = bounded_range(Ray{Vec3(30, -20, altitude), Vec3(0.001, 0.0005, -1).normalized()}, f);
  REQUIRE(r.mode == SampleMode::bounded);
  CHECK(std::abs(r.near - (altitude - 50.0)) <= 1e-3 * (altitude - 50.0));
  CHECK(std::abs(r.far - altitude) <= 1e-3 * altitude);
}

TEST_CASE("coarse samples") {
  Rng rng(1);
  SamplingParams p;
  p.n_coarse = 4;
  CHECK(coarse_samples(0.0, 4.0, p, rng) == std::vector<double>{0.5, 1.5, 2.5, 3.5});

  p.jitter = true;
  p.n_coarse = 16;
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = coarse_samples(10.0, 26.0, p, rng);
    for (int i = 0; i < 16; ++i) {
      CHECK(t[i] >= 10.0 + i);
      CHECK(t[i] <= 10.0 + i + 1);
    }
    CHECK(std::is_sorted(t.begin(), t.end()));
  }

  p.n_coarse = 64;
  const auto t = coarse_samples(150.0, 200.0, p, rng);
  double max_gap = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) max_gap = std::max(max_gap, t[i] - t[i - 1]);
  CHECK(max_gap <= 2.0 * 50.0 / 64.0);
  CHECK_THROWS_AS(coarse_samples(2.0, 2.0, p, rng), std::invalid_argument);
}

TEST_CASE("fine samples follow degenerate and two-bin targets") {
  const std::vector<double> coarse{0.5, 1.5, 2.5, 3.5, 4.5};
  const std::vector<double> one_hot{0, 0, 1, 0, 0};
  const auto f = fine_samples(coarse, one_hot, 128, 3);
  CHECK(f.size() == 128);
  CHECK(std::is_sorted(f.begin(), f.end()));
  for (double t : f) {
    CHECK(t >= 2.0);
    CHECK(t <= 3.0);
  }

  // Weights (1, 3): binomial standard error at 10^4 draws is 0.0043.
  Rng rng(9);
  const std::vector<double> edges{0.0, 1.0, 2.0};
  const std::vector<double> w{1.0, 3.0};
  int in_second = 0;
  for (int k = 0; k < 10000; ++k)
    if (fine_samples_in_bins(edges, w, 1, true, rng)[0] >= 1.0) ++in_second;
  CHECK(std::abs(in_second / 10000.0 - 0.75) <= 0.02);
}

TEST_CASE("fine samples pass a chi-squared test against the weights") {
  Rng rng(21);
  const std::vector<double> edges{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> uniform(8, 1.0);
  CHECK(oracle::fine_sampling_p(edges, uniform, 10000, rng) > 0.01);

  const std::vector<double> skewed{0.1, 0.0, 2.0, 5.0, 0.3, 0.0, 1.0, 0.6};
  CHECK(oracle::fine_sampling_p(edges, skewed, 10000, rng) > 0.01);

  // Stratified draws in a single call are at least as close to the target.
  const auto t = fine_samples_in_bins(edges, skewed, 10000, true, rng);
  std::vector<long> counts(8, 0);
  for (double x : t) ++counts[std::min<std::size_t>(static_cast<std::size_t>(x), 7)];
  std::vector<double> prob(8);
  for (int i = 0; i < 8; ++i) prob[i] = skewed[i] / 9.0;
  CHECK(oracle::chi_squared_p(counts, prob) > 0.01);
}

TEST_CASE("fine sample edge cases") {
  Rng rng(2);
  const std::vector<double> edges{0, 1, 2};
  const std::vector<double> zeros{0, 0};
  const auto t = fine_samples_in_bins(edges, zeros, 1000, false, rng);
  const auto below_one = std::count_if(t.begin(), t.end(), [](double x) { return x < 1.0; });
  CHECK(below_one == 500);
  const std::vector<double> negative{1.0, -0.5};
  CHECK_THROWS_AS(fine_samples_in_bins(edges, negative, 10, true, rng), std::invalid_argument);
  const std::vector<double> nan{1.0, std::nan("")};
  CHECK_THROWS_AS(fine_samples_in_bins(edges, nan, 10, true, rng), std::invalid_argument);
  CHECK(fine_samples_in_bins(edges, std::vector<double>{1, 1}, 0, true, rng).empty());
  CHECK(fine_samples(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}, 50, 77) ==
        fine_samples(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}, 50, 77));
}

TEST_CASE("bin edges around coarse samples") {
  const std::vector<double> t{1.0, 2.0, 4.0};
  CHECK(bin_edges_around(t) == std::vector<double>{0.5, 1.5, 3.0, 5.0});
}

TEST_CASE("contraction examples") {
  CHECK(contract(100.0, 100.0) == 100.0);
  CHECK(contract(200.0, 100.0) == doctest::Approx(100.005).epsilon(1e-15));
  CHECK(contract(1e300, 100.0) == doctest::Approx(100.01).epsilon(1e-15));
  CHECK(contract(1e6, 100.0) < 100.0 + 1.0 / 100.0);
  CHECK(uncontract(100.005, 100.0) == doctest::Approx(200.0).epsilon(1e-9));
  CHECK(uncontract(50.0, 100.0) == 50.0);
  CHECK_THROWS_AS(uncontract(100.01, 100.0), std::domain_error);
  CHECK_THROWS_AS(uncontract(101.0, 100.0), std::domain_error);
}

TEST_CASE("contraction round trip") {
  Rng rng(4);
  double worst_double = 0.0;
  double worst_long = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = 1e6 * rng.uniform();
    // In double the contracted gap to the asymptote keeps ~1e-10 relative
    // precision only when R1 is of order one.
    worst_double = std::max(worst_double, std::abs(uncontract(contract(t, 1.0), 1.0) - t) / std::max(t, 1e-300));
    const long double tl = t;
    const long double back = uncontract<long double>(contract<long double>(tl, 100.0L), 100.0L);
    worst_long = std::max(worst_long, static_cast<double>(std::abs(back - tl) / std::max(tl, 1e-300L)));
  }
  CHECK(worst_double <= 1e-9);
  CHECK(worst_long <= 1e-9);
}

TEST_CASE("contraction is strictly monotone") {
  for (double r1 : {1.0, 100.0}) {
    double prev_s = -1.0;
    for (double t = 0.0; t < 1e6; t = t * 1.01 + 0.01) {
      const double s = contract(t, r1);
      CHECK(s > prev_s);
      prev_s = s;
    }
    double prev_t = -1.0;
    const double limit = r1 + 1.0 / r1;
    for (int i = 0; i < 1000; ++i) {
      const double t = uncontract(limit * i / 1000.0, r1);
      CHECK(t > prev_t);
      prev_t = t;
    }
  }
}

TEST_CASE("unbounded samples") {
  SceneFrame f = nadir_frame();
  f.foreground_radius = 100.0;
  SamplingParams p;
  p.n_coarse = 64;
  Rng rng(0);
  const SampleSpec s = unbounded_samples(Ray{}, f, p, rng);
  CHECK(s.mode == SampleMode::unbounded);
  REQUIRE(s.coarse_t.size() == 64);
  for (double t : s.coarse_t) {
    CHECK(std::isfinite(t));
    CHECK(t > 0.0);
  }
  for (int i = 33; i < 64; ++i)
    if (i + 1 < 64) CHECK(s.coarse_t[i + 1] - s.coarse_t[i] > s.coarse_t[i] - s.coarse_t[i - 1]);
  for (int i = 0; i < 32; ++i) CHECK(s.coarse_t[i] <= 100.0);
  for (int i = 32; i < 64; ++i) CHECK(s.coarse_t[i] > 100.0);
  CHECK(s.deltas.back() == kUnboundedTailDelta);
  CHECK(uncontract(100.0 + 1.0 / 200.0, 100.0) == doctest::Approx(200.0).epsilon(1e-9));

  p.jitter = true;
  for (int trial = 0; trial < 100; ++trial) {
    const SampleSpec j = unbounded_samples(Ray{}, f, p, rng);
    CHECK(std::is_sorted(j.coarse_t.begin(), j.coarse_t.end()));
    CHECK(j.coarse_t.front() >= kUnboundedEpsilon);
    for (double t : j.coarse_t) CHECK(std::isfinite(t));
  }
}

TEST_CASE("hierarchical plans stay inside the range with positive deltas") {
  Rng rng(8);
  const SceneFrame f = nadir_frame();
  SamplingParams p;
  p.n_coarse = 32;
  p.n_fine = 64;
  p.jitter = true;
  for (int i = 0; i < 500; ++i) {
    const Vec3 origin(200 * rng.uniform() - 100, 200 * rng.uniform() - 100, 1020 + 400 * rng.uniform());
    const Vec3 dir = random_unit(rng);
    SampleSpec s = plan_coarse(Ray{origin, dir}, f, p, rng);
    std::vector<double> w(s.coarse_t.size());
    for (auto& x : w) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    add_fine(s, w, p, rng);
    CHECK(s.fine_t.size() == 64);
    CHECK(std::is_sorted(s.coarse_t.begin(), s.coarse_t.end()));
    CHECK(std::is_sorted(s.fine_t.begin(), s.fine_t.end()));
    for (std::size_t k = 0; k + 1 < s.t.size(); ++k) CHECK(s.deltas[k] == s.t[k + 1] - s.t[k]);
    for (double d : s.deltas) CHECK(d >= 0.0);
    for (std::size_t k = 0; k + 1 < s.t.size(); ++k) CHECK(s.deltas[k] > 0.0);
    if (s.mode == SampleMode::unbounded) {
      CHECK(s.deltas.back() == kUnboundedTailDelta);
      for (double t : s.t) CHECK(std::isfinite(t));
    } else {
      CHECK(s.near < s.far);
      for (double t : s.t) {
        CHECK(t >= s.near);
        CHECK(t <= s.far);
      }
      CHECK(s.deltas.back() == s.far - s.t.back());
    }
  }
}

TEST_CASE("plans are reproducible from the seed") {
  const SceneFrame f = nadir_frame();
  SamplingParams p;
  p.jitter = true;
  const Ray ray{Vec3(10, 0, 1200), Vec3(0.1, 0, -1).normalized()};
  Rng a(123), b(123);
  SampleSpec sa = plan_coarse(ray, f, p, a);
  SampleSpec sb = plan_coarse(ray, f, p, b);
  std::vector<double> w(p.n_coarse, 1.0);
  add_fine(sa, w, p, a);
  add_fine(sb, w, p, b);
  CHECK(sa.t == sb.t);
}
