#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fdapower/linalg.hpp"
#include "fdapower/process.hpp"
#include "fdapower/rng.hpp"

using namespace fdapower;

TEST_CASE("mean difference shapes evaluate and scale correctly") {
  CHECK(MeanDiff::zero().is_zero());
  CHECK(MeanDiff::zero()(0.3) == 0.0);

  const MeanDiff cubic = MeanDiff::polynomial({0.0, 0.0, 0.0, 1.0});
  CHECK(cubic(0.5) == doctest::Approx(0.125));
  CHECK(cubic.scaled(2.0)(0.5) == doctest::Approx(0.25));
  CHECK(cubic.scaled(0.0).is_zero());
  CHECK_FALSE(cubic.is_zero());

  const MeanDiff pl = MeanDiff::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  CHECK(pl(0.25) == doctest::Approx(0.5));
  CHECK(pl(0.5) == doctest::Approx(1.0));
  CHECK(pl(-1.0) == doctest::Approx(0.0));  // flat outside the grid
  CHECK(pl(2.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(MeanDiff::piecewise_linear({0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeanDiff::piecewise_linear({0.5, 0.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("covariance kernels evaluate to their closed forms") {
  const CovarianceKernel cs = CovarianceKernel::compound_symmetry(1.5, 0.3);
  CHECK(cs(0.2, 0.2) == doctest::Approx(1.5));
  CHECK(cs(0.2, 0.8) == doctest::Approx(0.45));

  const CovarianceKernel ar = CovarianceKernel::car1(2.0, 0.5);
  CHECK(ar(0.3, 0.3) == doctest::Approx(2.0));
  CHECK(ar(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(ar(0.25, 0.75) == doctest::Approx(2.0 * std::sqrt(0.5)));

  const CovarianceKernel r2 = CovarianceKernel::nonstationary_rank2();
  const double pi = 3.14159265358979323846;
  auto exact = [&](double s, double t) {
    return 2.0 * std::sin(2 * pi * s) * std::sin(2 * pi * t) +
           std::cos(2 * pi * s) * std::cos(2 * pi * t);
  };
  for (double s : {0.0, 0.25, 0.4})
    for (double t : {0.1, 0.75}) CHECK(r2(s, t) == doctest::Approx(exact(s, t)));

  CHECK_THROWS_AS(cs(1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(CovarianceKernel::car1(1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(CovarianceKernel::compound_symmetry(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("grid kernel interpolates bilinearly and validates its input") {
  Matrix vals(2, 2);
  vals(0, 0) = 1.0;
  vals(0, 1) = vals(1, 0) = 0.5;
  vals(1, 1) = 2.0;
  const CovarianceKernel g = CovarianceKernel::from_grid({0.0, 1.0}, vals);
  CHECK(g(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(g(1.0, 1.0) == doctest::Approx(2.0));
  CHECK(g(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(g(0.5, 0.5) == doctest::Approx(0.25 * (1.0 + 0.5 + 0.5 + 2.0)));

  Matrix bad = vals;
  bad(0, 1) = 0.9;  // asymmetric
  CHECK_THROWS_AS(CovarianceKernel::from_grid({0.0, 1.0}, bad), std::invalid_argument);
  CHECK_THROWS_AS(CovarianceKernel::from_grid({0.0}, Matrix(1, 1, 1.0)), std::invalid_argument);

  CHECK(CovarianceKernel::car1(1.0, 0.5).describe() == "car1");
  CHECK(CovarianceKernel::nonstationary_rank2().describe() == "nonstationary-rank2");
}

TEST_CASE("kernel matrices are symmetric and car1 is positive definite") {
  RngStream rng(3);
  std::vector<double> times(20);
  for (double& t : times) t = rng.uniform();
  std::sort(times.begin(), times.end());

  const Matrix m = CovarianceKernel::car1(1.0, 0.5).matrix_at(times);
  CHECK(m.asymmetry() == 0.0);
  CHECK_NOTHROW(chol_spd(m));  // CAR(1) correlation matrices are SPD

  // Compound symmetry puts the nugget only on the exact diagonal.
  const Matrix cs = CovarianceKernel::compound_symmetry(1.0, 0.4).matrix_at({0.1, 0.1 + 1e-9});
  CHECK(cs(0, 0) == doctest::Approx(1.0));
  CHECK(cs(0, 1) == doctest::Approx(0.4));
}

TEST_CASE("sampling designs validate, schedules pass through, counts stay in range") {
  SamplingDesign bad;
  bad.count_min = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SamplingDesign{};
  bad.missing = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SamplingDesign{};
  bad.schedule = {0.5, 0.25};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SamplingDesign{};
  bad.schedule = {0.5, 1.25};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SamplingDesign{};
  bad.min_observations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  SamplingDesign sched;
  sched.schedule = {0.1, 0.4, 0.9};
  RngStream rng(1);
  CHECK(sched.draw_times(rng) == std::vector<double>{0.1, 0.4, 0.9});

  SamplingDesign rand;
  rand.count_min = 3;
  rand.count_max = 6;
  bool saw_min = false, saw_max = false;
  for (int i = 0; i < 300; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    const std::vector<double> t = rand.draw_times(sub);
    CHECK(t.size() >= 3);
    CHECK(t.size() <= 6);
    CHECK(std::is_sorted(t.begin(), t.end()));
    CHECK(t.front() >= 0.0);
    CHECK(t.back() <= 1.0);
    saw_min = saw_min || t.size() == 3;
    saw_max = saw_max || t.size() == 6;
  }
  CHECK(saw_min);
  CHECK(saw_max);
}

TEST_CASE("missingness thins at the right rate and respects the keep floor") {
  RngStream rng(17);
  std::vector<double> schedule(1000);
  for (std::size_t i = 0; i < schedule.size(); ++i) schedule[i] = i / 999.0;

  CHECK(apply_missingness(rng, schedule, 0.0) == schedule);

  const std::vector<double> kept = apply_missingness(rng, schedule, 0.3);
  // Binomial(1000, 0.7): 4 sigma is about 58.
  CHECK(kept.size() > 640);
  CHECK(kept.size() < 760);

  const std::vector<double> tiny_schedule = {0.2, 0.5, 0.8};
  for (int i = 0; i < 200; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    CHECK(apply_missingness(sub, tiny_schedule, 0.9, 2).size() >= 2);
  }

  CHECK_THROWS_AS(apply_missingness(rng, schedule, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(apply_missingness(rng, schedule, 0.5, 0), std::invalid_argument);
}

TEST_CASE("generated datasets are reproducible and carry the group mean difference") {
  const MeanDiff eta = MeanDiff::polynomial({0.7});  // constant offset
  const CovarianceKernel kernel = CovarianceKernel::car1(1.0, 0.5);
  SamplingDesign design;
  design.schedule = {0.125, 0.375, 0.625, 0.875};

  const RngStream root(23);
  const SparseDataset a = generate_dataset(root, 400, 400, eta, kernel, design, 0.01);
  const SparseDataset b = generate_dataset(root, 400, 400, eta, kernel, design, 0.01);
  REQUIRE(a.subjects.size() == 800);
  CHECK(a.n1 == 400);
  CHECK(a.n2 == 400);
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    CHECK(a.subjects[i].group == b.subjects[i].group);
    CHECK(a.subjects[i].times == b.subjects[i].times);
    CHECK(a.subjects[i].values == b.subjects[i].values);
  }

  // Subject draws come from per-index substreams: the first n1 + n2 subjects
  // are unchanged when more are appended.
  const SparseDataset wider = generate_dataset(root, 400, 500, eta, kernel, design, 0.01);
  for (std::size_t i = 0; i < 400; ++i)
    CHECK(wider.subjects[i].values == a.subjects[i].values);

  double mean1 = 0.0, mean2 = 0.0;
  std::size_t c1 = 0, c2 = 0;
  for (const Subject& subj : a.subjects)
    for (double v : subj.values) {
      if (subj.group == 1) {
        mean1 += v;
        ++c1;
      } else {
        mean2 += v;
        ++c2;
      }
    }
  mean1 /= static_cast<double>(c1);
  mean2 /= static_cast<double>(c2);
  // Each group mean has sd ~ sqrt(1/400) = 0.05; the difference detects 0.7.
  CHECK(mean1 == doctest::Approx(0.0).epsilon(1).scale(0.2));
  CHECK(mean2 - mean1 == doctest::Approx(0.7).epsilon(0.35));
}

TEST_CASE("rank-2 latent paths live in the two-dimensional eigenspace") {
  const CovarianceKernel kernel = CovarianceKernel::nonstationary_rank2();
  SamplingDesign design;
  design.count_min = design.count_max = 7;
  const SparseDataset data =
      generate_dataset(RngStream(31), 3, 3, MeanDiff::zero(), kernel, design, 0.0);

  const double pi = 3.14159265358979323846;
  for (const Subject& subj : data.subjects) {
    const std::size_t m = subj.times.size();
    // Least squares onto the (sin, cos) pair must be an exact fit.
    Matrix x(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
      x(j, 0) = std::sin(2 * pi * subj.times[j]);
      x(j, 1) = std::cos(2 * pi * subj.times[j]);
    }
    Matrix xtx = x.transpose() * x;
    std::vector<double> xty(2, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      xty[0] += x(j, 0) * subj.values[j];
      xty[1] += x(j, 1) * subj.values[j];
    }
    const std::vector<double> beta = spd_solve(xtx, xty);
    for (std::size_t j = 0; j < m; ++j) {
      const double fitted = beta[0] * x(j, 0) + beta[1] * x(j, 1);
      CHECK(subj.values[j] == doctest::Approx(fitted).epsilon(1e-8));
    }
  }

  CHECK_THROWS_AS(generate_dataset(RngStream(1), 0, 2, MeanDiff::zero(), kernel, design, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_dataset(RngStream(1), 2, 2, MeanDiff::zero(), kernel, design, -1.0),
                  std::invalid_argument);
}
