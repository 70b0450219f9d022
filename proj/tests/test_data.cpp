#include "oracles.hpp"
#include "rankprox/data.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace rankprox;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rankprox_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("dims parsing") {
    CHECK(parse_dims("30x40").rows == 30);
    CHECK(parse_dims("30,40").cols == 40);
    CHECK_THROWS(parse_dims("30"));
    CHECK_THROWS(parse_dims("0x5"));
    CHECK(guess_format("a/b.mtx") == TripletFormat::MatrixMarket);
    CHECK(guess_format("a/b.csv") == TripletFormat::Csv);
  }

  TEST_CASE("triplet files round trip in both formats") {
    const fs::path dir = scratch("roundtrip");
    const Observations o(4, 5, {{0, 0, 1.25}, {3, 4, -2.0 / 3.0}, {2, 1, 1e-17}});
    for (auto fmt : {TripletFormat::MatrixMarket, TripletFormat::Csv}) {
      const std::string path = (dir / (fmt == TripletFormat::Csv ? "o.csv" : "o.mtx")).string();
      write_triplets(path, o, fmt);
      const Observations back = load_triplets(path, fmt, Dims{4, 5});
      REQUIRE(back.size() == o.size());
      for (std::size_t k = 0; k < o.samples().size(); ++k) {
        CHECK(back.samples()[k].row == o.samples()[k].row);
        CHECK(back.samples()[k].col == o.samples()[k].col);
        CHECK(back.samples()[k].value == o.samples()[k].value);
      }
    }
  }

  TEST_CASE("CSV shape is inferred and comments skipped") {
    const fs::path p = scratch("infer") / "t.csv";
    write_text(p, "# header\n1,2,0.5\n\n3,1,1.5\n");
    const Observations o = load_triplets(p.string(), TripletFormat::Csv);
    CHECK(o.rows() == 3);
    CHECK(o.cols() == 2);
    CHECK(o.samples()[1].row == 2);
  }

  TEST_CASE("parse errors carry line numbers") {
    const fs::path dir = scratch("errors");
    write_text(dir / "bad.csv", "1,1,2\n2,x,3\n");
    try {
      load_triplets((dir / "bad.csv").string(), TripletFormat::Csv);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    write_text(dir / "dup.csv", "1,1,2\n1,1,3\n");
    CHECK_THROWS_AS(load_triplets((dir / "dup.csv").string(), TripletFormat::Csv), ParseError);
    write_text(dir / "range.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    try {
      load_triplets((dir / "range.mtx").string(), TripletFormat::MatrixMarket);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS(load_triplets((dir / "missing.csv").string(), TripletFormat::Csv));
  }

  TEST_CASE("split partitions the samples") {
    std::vector<Sample> s;
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 10; ++j) s.push_back({i, j, static_cast<double>(i * 10 + j)});
    const Observations o(10, 10, s);
    const Dataset d = split(o, 0.8, 7);
    REQUIRE(d.test.has_value());
    CHECK(d.train.size() == 80);
    CHECK(d.test->size() == 20);
    std::set<double> seen;
    for (const auto& x : d.train.samples()) seen.insert(x.value);
    for (const auto& x : d.test->samples()) seen.insert(x.value);
    CHECK(seen.size() == 100);
    const Dataset again = split(o, 0.8, 7);
    CHECK(again.train.samples()[5].value == d.train.samples()[5].value);
  }

  TEST_CASE("synthetic completion data follows the protocol") {
    SyntheticParams p;
    p.m = 40;
    p.n = 30;
    p.r = 3;
    p.omega = 2.0;
    p.noise_scale = 0.01;
    p.outlier_fraction = 0.05;
    p.outlier_range = 10.0;
    p.seed = 5;
    const SyntheticData data = gen_synthetic(p);
    const Index l = std::llround(2.0 * 3 * (40 + 30 - 3));
    CHECK(data.dataset.train.size() == l);
    CHECK(data.dataset.test->size() == std::llround(0.25 * static_cast<double>(l)));
    CHECK(data.truth.rank() == 3);
    CHECK(data.outliers.size() == static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(l))));

    std::set<std::pair<Index, Index>> train_pos;
    for (const auto& s : data.dataset.train.samples()) train_pos.insert({s.row, s.col});
    for (const auto& s : data.dataset.test->samples()) CHECK(train_pos.count({s.row, s.col}) == 0);

    // Noise magnitude relative to the clean observations, outliers excluded.
    std::set<Index> out(data.outliers.begin(), data.outliers.end());
    double clean = 0.0, noise = 0.0;
    for (Index k = 0; k < data.dataset.train.size(); ++k) {
      const auto& s = data.dataset.train.samples()[static_cast<std::size_t>(k)];
      const double t = data.truth.entry(s.row, s.col);
      clean += t * t;
      if (!out.count(k)) noise += (s.value - t) * (s.value - t);
    }
    CHECK(std::sqrt(noise) <= 0.0101 * std::sqrt(clean));
    CHECK(data.noise_level == doctest::Approx(0.01 * std::sqrt(clean / static_cast<double>(l))).epsilon(1e-9));
    CHECK(gen_synthetic(p).dataset.train.samples()[3].value == data.dataset.train.samples()[3].value);
  }

  TEST_CASE("rmse of the truth on clean data is zero") {
    SyntheticParams p;
    p.m = 20;
    p.r = 2;
    p.seed = 2;
    const SyntheticData data = gen_synthetic(p);
    CHECK(rmse(data.truth, data.dataset.train) < 1e-10);
    CHECK(rmse(FixedRankMatrix::zero(20, 20), data.dataset.train) > 0.0);
  }

  TEST_CASE("dense CSV and factor files round trip") {
    const fs::path dir = scratch("factors");
    std::mt19937_64 rng(8);
    const DenseMatrix a = oracle::gaussian(3, 4, rng);
    write_dense_csv((dir / "a.csv").string(), a);
    CHECK(read_dense_csv((dir / "a.csv").string()) == a);
    const FixedRankMatrix x = oracle::random_point(6, 5, 2, rng);
    write_factors((dir / "x").string(), x);
    const FixedRankMatrix y = read_factors((dir / "x").string());
    CHECK(y.sigma() == x.sigma());
    CHECK((y.to_dense() - x.to_dense()).norm() == 0.0);
  }

  TEST_CASE("subspace data lies on the subspaces except corrupted columns") {
    SubspaceParams p;
    p.seed = 3;
    const SubspaceData s = gen_subspaces(p);
    CHECK(s.d.rows() == 20);
    CHECK(s.d.cols() == 80);
    CHECK(s.labels.size() == 80);
    CHECK(s.corrupted.size() == 4);
    std::set<Index> bad(s.corrupted.begin(), s.corrupted.end());
    for (int g = 0; g < 2; ++g) {
      std::vector<Index> cols;
      for (Index j = 0; j < 80; ++j)
        if (s.labels[static_cast<std::size_t>(j)] == g && !bad.count(j)) cols.push_back(j);
      DenseMatrix block(20, static_cast<Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) block.col(static_cast<Index>(k)) = s.d.col(cols[k]);
      const Vector sv = oracle::singular_values(block);
      CHECK(sv[3] < 1e-10 * sv[0]);
    }
  }
}
