#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "embstab/funcsim.hpp"
#include "embstab/rng.hpp"
#include "oracles.hpp"

using namespace embstab;
namespace fs = std::filesystem;

namespace {

OutputMatrix om(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return OutputMatrix{std::move(m)};
}

// One-hot-ish output matrix predicting the given classes with confidence p.
OutputMatrix predicting(const std::vector<int>& classes, Index num_classes,
                        double p = 0.9) {
  Matrix m(static_cast<Index>(classes.size()), num_classes);
  const double rest = (1.0 - p) / static_cast<double>(num_classes - 1);
  m.setConstant(rest);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    m(static_cast<Index>(i), classes[i]) = p;
  }
  return OutputMatrix{std::move(m)};
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("embstab_test_" + name);
}

}  // namespace

TEST_CASE("hard predictions and the tie rule") {
  OutputMatrix o = om({{0.2, 0.5, 0.3}, {0.5, 0.5, 0.0}, {0.1, 0.2, 0.7}});
  CHECK(hard_predictions(o) == std::vector<int>{1, 0, 2});

  OutputMatrix eye = om({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(hard_predictions(eye) == std::vector<int>{0, 1, 2});
}

TEST_CASE("disagreement fixtures") {
  OutputMatrix a = predicting({0, 1, 0, 1}, 2);
  CHECK(disagreement(a, a) == 0.0);

  OutputMatrix flipped = predicting({1, 0, 1, 0}, 2);
  CHECK(disagreement(a, flipped) == 1.0);

  OutputMatrix half = predicting({0, 0, 0, 0}, 2);  // differs on rows 1 and 3
  CHECK(disagreement(a, half) == 0.5);

  OutputMatrix wrong_shape = predicting({0, 1}, 2);
  CHECK_THROWS_AS(disagreement(a, wrong_shape), DataError);
}

TEST_CASE("error_rate fixtures") {
  LabelVector labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  OutputMatrix perfect = predicting(labels, 2);
  CHECK(error_rate(perfect, labels) == 0.0);

  std::vector<int> inverted;
  for (int c : labels) inverted.push_back(1 - c);
  CHECK(error_rate(predicting(inverted, 2), labels) == 1.0);

  std::vector<int> two_wrong = labels;
  two_wrong[0] = 1 - two_wrong[0];
  two_wrong[5] = 1 - two_wrong[5];
  CHECK(error_rate(predicting(two_wrong, 2), labels) == 0.2);

  CHECK_THROWS_AS(error_rate(perfect, LabelVector{0, 1}), DataError);
  CHECK_THROWS_AS(error_rate(perfect, LabelVector(10, 7)), DataError);
}

TEST_CASE("minmax normalized disagreement fixture evaluates to 0.5") {
  // e1 = 0.2, e2 = 0.3, observed disagreement 0.3:
  // (0.3 - |0.2-0.3|) / (min(0.5,1) - 0.1) = 0.2/0.4.
  LabelVector labels(10, 0);
  std::vector<int> pa(10, 0), pb(10, 0);
  pa[0] = pa[1] = 1;
  pb[0] = pb[3] = pb[4] = 1;
  OutputMatrix a = predicting(pa, 2);
  OutputMatrix b = predicting(pb, 2);
  CHECK(error_rate(a, labels) == 0.2);
  CHECK(error_rate(b, labels) == 0.3);
  CHECK(disagreement(a, b) == 0.3);
  CHECK(minmax_normalized_disagreement(a, b, labels) == 0.5);
}

TEST_CASE("minmax normalized disagreement degenerate cases") {
  LabelVector labels = {0, 1, 0, 1};
  OutputMatrix one_off = predicting({1, 1, 0, 1}, 2);  // e = 0.25
  CHECK(minmax_normalized_disagreement(one_off, one_off, labels) == 0.0);

  OutputMatrix perfect = predicting({0, 1, 0, 1}, 2);
  CHECK_THROWS_AS(minmax_normalized_disagreement(perfect, perfect, labels),
                  NumericError);
}

TEST_CASE("stable core fixtures") {
  OutputMatrix a = predicting({0, 1, 0, 1}, 2);
  CHECK(stable_core({a, a, a}) == 1.0);

  // Agreement pattern {all, all, one-off, all} over 4 rows.
  OutputMatrix c = predicting({0, 1, 1, 1}, 2);
  CHECK(stable_core({a, a, c}) == 0.75);

  OutputMatrix flipped = predicting({1, 0, 1, 0}, 2);
  CHECK(stable_core({a, flipped}) == 0.0);

  CHECK_THROWS_AS(stable_core({a}), DataError);
}

TEST_CASE("mean JSD fixtures") {
  OutputMatrix a = om({{1.0, 0.0}});
  CHECK(mean_jsd(a, a) == 0.0);

  OutputMatrix b = om({{0.0, 1.0}});
  CHECK(mean_jsd(a, b) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  OutputMatrix c = om({{0.5, 0.5}});
  CHECK(mean_jsd(a, c) == doctest::Approx(0.21576155433883565).epsilon(1e-9));
  CHECK(mean_jsd(a, c) == doctest::Approx(0.215762).epsilon(1e-5));
}

TEST_CASE("mean JSD matches the analytic oracle and stays bounded") {
  Rng rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(12));
    const Index c = 2 + static_cast<Index>(rng.uniform_int(5));
    Matrix p = oracle::random_output(n, c, rng);
    Matrix q = oracle::random_output(n, c, rng);
    OutputMatrix op{p}, oq{q};
    const double got = mean_jsd(op, oq);
    CHECK(got == doctest::Approx(oracle::mean_jsd(p, q)).epsilon(1e-10));
    CHECK(got >= 0.0);
    CHECK(got <= std::log(2.0) + 1e-12);
    CHECK(got == doctest::Approx(mean_jsd(oq, op)).epsilon(1e-12));
  }
}

TEST_CASE("mean JSD rejects non-stochastic rows") {
  OutputMatrix bad = om({{0.5, 0.6}});
  OutputMatrix good = om({{0.5, 0.5}});
  CHECK_THROWS_AS(mean_jsd(bad, good), DataError);
  CHECK_THROWS_AS(validate_output(bad), DataError);
  OutputMatrix negative = om({{1.5, -0.5}});
  CHECK_THROWS_AS(validate_output(negative), DataError);
}

TEST_CASE("functional measure interplay properties") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.uniform_int(20));
    const Index c = 2 + static_cast<Index>(rng.uniform_int(3));
    OutputMatrix a{oracle::random_output(n, c, rng)};
    OutputMatrix b{oracle::random_output(n, c, rng)};
    OutputMatrix d{oracle::random_output(n, c, rng)};
    LabelVector labels;
    for (Index i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.uniform_int(c)));

    // Triangle-type bound.
    CHECK(disagreement(a, d) <= disagreement(a, b) + disagreement(b, d) + 1e-15);

    // Group agreement can never beat any pair.
    const double core = stable_core({a, b, d});
    CHECK(core <= 1.0 - disagreement(a, b) + 1e-15);
    CHECK(core <= 1.0 - disagreement(a, d) + 1e-15);
    CHECK(core <= 1.0 - disagreement(b, d) + 1e-15);

    // Error rates sandwich disagreement.
    const double e1 = error_rate(a, labels);
    const double e2 = error_rate(b, labels);
    const double dis = disagreement(a, b);
    CHECK(std::abs(e1 - e2) <= dis + 1e-15);
    CHECK(dis <= e1 + e2 + 1e-15);

    CHECK(disagreement(a, b) == disagreement(b, a));
    CHECK(disagreement(a, b) == doctest::Approx(oracle::disagreement(a.values, b.values)));
    CHECK(stable_core({a, b, d}) ==
          doctest::Approx(oracle::stable_core({a.values, b.values, d.values})));
  }
}

TEST_CASE("output file round trip and validation") {
  Rng rng(22);
  OutputMatrix o{oracle::random_output(6, 3, rng)};
  auto p = temp_file("round.out");
  write_output(o, p.string());
  OutputMatrix back = read_output(p.string());
  CHECK(back.values == o.values);

  auto bad = temp_file("bad.out");
  std::ofstream(bad) << "OUT1 2 2\n0.5 0.5\n";
  CHECK_THROWS_AS(read_output(bad.string()), DataError);
  std::ofstream(bad) << "NOPE 1 2\n0.5 0.5\n";
  CHECK_THROWS_AS(read_output(bad.string()), DataError);
  std::ofstream(bad) << "OUT1 1 2\n0.9 0.9\n";
  CHECK_THROWS_AS(read_output(bad.string()), DataError);
}

TEST_CASE("eval label file round trip") {
  auto p = temp_file("eval.labels");
  write_eval_labels({4, 7, 9}, {0, 2, 1}, p.string());
  CHECK(read_eval_labels(p.string(), 3) == LabelVector{0, 2, 1});
  CHECK_THROWS_AS(read_eval_labels(p.string(), 5), DataError);
  CHECK_THROWS_AS(write_eval_labels({1, 2}, {0}, p.string()), DataError);
}
