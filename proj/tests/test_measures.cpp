#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "normot/error.hpp"
#include "normot/measures.hpp"

using namespace normot;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("normot_test_" + name)).string();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InternalConsistency;
}

}  // namespace

TEST(LoadMeasure, CsvTwoPoints) {
  const DiscreteMeasure m = parse_measure_csv("0,0,0.5\n1,0,0.5");
  EXPECT_EQ(m.dim, 2);
  ASSERT_EQ(m.size(), 2);
  EXPECT_EQ(m.points[0], v2(0, 0));
  EXPECT_EQ(m.points[1], v2(1, 0));
  EXPECT_EQ(m.weights[0], 0.5);
  EXPECT_EQ(m.weights[1], 0.5);
}

TEST(LoadMeasure, RejectsBadWeightSum) {
  EXPECT_EQ(kind_of([] { parse_measure_csv("0,0.3\n1,0.3\n2,0.3\n"); }), ErrorKind::InvalidInput);
}

TEST(LoadMeasure, RejectsNegativeAndGarbage) {
  EXPECT_EQ(kind_of([] { parse_measure_csv("0,1.5\n1,-0.5\n"); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { parse_measure_csv("0,abc\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_measure_csv("0,0,0.5\n1,0.5\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_measure_json("{\"dim\":2,\"points\":[[0]],\"weights\":[1]}"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { load_measure(temp_path("does_not_exist.csv")); }), ErrorKind::Io);
}

TEST(LoadMeasure, RenormalizesNearOne) {
  const DiscreteMeasure m = parse_measure_csv("0,0.5000004\n1,0.5\n");
  EXPECT_NEAR(m.total_mass(), 1.0, 1e-15);
}

TEST(LoadMeasure, MergesDuplicates) {
  const DiscreteMeasure m = DiscreteMeasure::make({v2(0, 0), v2(1, 0), v2(0, 1e-13)}, {0.25, 0.5, 0.25});
  ASSERT_EQ(m.size(), 2);
  EXPECT_EQ(m.weights[0], 0.5);
}

TEST(LoadMeasure, JsonRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<Vec> pts;
  std::vector<double> w;
  for (int i = 0; i < 17; ++i) {
    pts.push_back(Vec::NullaryExpr(3, [&] { return g(rng); }));
    w.push_back(1.0 / 17);
  }
  const DiscreteMeasure m = DiscreteMeasure::make(pts, w);
  for (auto fmt : {MeasureFormat::Json, MeasureFormat::Csv}) {
    const std::string path = temp_path(fmt == MeasureFormat::Json ? "rt.json" : "rt.csv");
    save_measure(m, path, fmt);
    const DiscreteMeasure back = load_measure(path);
    ASSERT_EQ(back.size(), m.size());
    for (int i = 0; i < m.size(); ++i) {
      EXPECT_EQ(back.points[i], m.points[i]);
      EXPECT_EQ(back.weights[i], m.weights[i]);
    }
    std::filesystem::remove(path);
  }
}

TEST(GridSample, UniformSquare) {
  const DiscreteMeasure m = grid_sample(parse_density("uniform", 2), Box::unit(2), 2);
  ASSERT_EQ(m.size(), 4);
  const std::vector<Vec> expect{v2(0.25, 0.25), v2(0.75, 0.25), v2(0.25, 0.75), v2(0.75, 0.75)};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(m.points[i], expect[i]);
    EXPECT_EQ(m.weights[i], 0.25);
  }
}

TEST(GridSample, UniformLine) {
  const DiscreteMeasure m = grid_sample(parse_density("uniform", 1), Box::unit(1), 3);
  ASSERT_EQ(m.size(), 3);
  EXPECT_DOUBLE_EQ(m.points[0](0), 1.0 / 6);
  EXPECT_DOUBLE_EQ(m.points[1](0), 0.5);
  EXPECT_DOUBLE_EQ(m.points[2](0), 5.0 / 6);
  for (double w : m.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3);
}

// Centres x1 = 1/4, 3/4 give raw weights 1/4, 3/4, 1/4, 3/4 summing to 2.
TEST(GridSample, LinearDensity) {
  const DiscreteMeasure m = grid_sample(parse_density("x1", 2), Box::unit(2), 2);
  const double expect[] = {1.0 / 8, 3.0 / 8, 1.0 / 8, 3.0 / 8};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m.weights[i], expect[i]);
}

TEST(GridSample, ZeroDensityIsEmpty) {
  EXPECT_EQ(kind_of([] { grid_sample([](const Vec&) { return 0.0; }, Box::unit(2), 3); }), ErrorKind::EmptyMeasure);
  EXPECT_EQ(kind_of([] { grid_sample(parse_density("uniform", 2), Box::unit(2), 0); }), ErrorKind::InvalidInput);
}

TEST(GridSample, RefinementSumsChildren) {
  for (int d = 1; d <= 3; ++d) {
    for (int n : {2, 3, 4}) {
      const DiscreteMeasure coarse = grid_sample(parse_density("uniform", d), Box::unit(d), n);
      const DiscreteMeasure fine = grid_sample(parse_density("uniform", d), Box::unit(d), 2 * n);
      std::vector<double> sums(coarse.size(), 0.0);
      for (int i = 0; i < fine.size(); ++i) {
        int idx = 0, stride = 1;
        for (int k = 0; k < d; ++k) {
          idx += static_cast<int>(fine.points[i](k) * n) * stride;
          stride *= n;
        }
        sums[idx] += fine.weights[i];
      }
      for (int c = 0; c < coarse.size(); ++c) {
        if ((n & (n - 1)) == 0) EXPECT_EQ(sums[c], coarse.weights[c]);
        else EXPECT_DOUBLE_EQ(sums[c], coarse.weights[c]);
      }
    }
  }
}

TEST(ShiftMeasure, Examples) {
  const DiscreteMeasure m = grid_sample(parse_density("uniform", 2), Box::unit(2), 2);
  const DiscreteMeasure s = shift_measure(m, v2(2, 1));
  for (int i = 0; i < m.size(); ++i) {
    EXPECT_EQ(s.points[i], m.points[i] + v2(2, 1));
    EXPECT_EQ(s.weights[i], m.weights[i]);
  }
  const DiscreteMeasure z = shift_measure(m, v2(0, 0));
  EXPECT_EQ(z.points, m.points);
  const DiscreteMeasure back = shift_measure(shift_measure(m, v2(0.5, -0.25)), v2(-0.5, 0.25));
  EXPECT_EQ(back.points, m.points);
  EXPECT_EQ(kind_of([&] { shift_measure(m, Vec::Zero(3)); }), ErrorKind::InvalidInput);
}

TEST(Measures, MassPreserved) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int t = 0; t < 20; ++t) {
    const double a = u(rng), b = u(rng);
    const DiscreteMeasure m = grid_sample([&](const Vec& x) { return a + b * x(0) * x(1); }, Box::unit(2), 5 + t);
    EXPECT_NEAR(m.total_mass(), 1.0, 1e-12);
    EXPECT_NEAR(shift_measure(m, v2(a, b)).total_mass(), 1.0, 1e-12);
  }
}
