#include "rankprox/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace rankprox {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Splits on commas and/or whitespace.
std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool to_index(const std::string& s, long long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

struct RawEntry {
  long long row;
  long long col;
  double value;
  std::size_t line;
};

Observations build_observations(const std::string& path, Index rows, Index cols,
                                const std::vector<RawEntry>& raw) {
  std::vector<Sample> samples;
  samples.reserve(raw.size());
  std::set<std::pair<long long, long long>> seen;
  for (const auto& e : raw) {
    if (e.row < 1 || e.row > rows || e.col < 1 || e.col > cols)
      throw ParseError(path, e.line,
                       "index (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                           ") out of range for a " + std::to_string(rows) + "x" +
                           std::to_string(cols) + " matrix");
    if (!seen.emplace(e.row, e.col).second)
      throw ParseError(path, e.line,
                       "duplicate index (" + std::to_string(e.row) + ", " + std::to_string(e.col) + ")");
    if (!std::isfinite(e.value)) throw ParseError(path, e.line, "non-finite value");
    samples.push_back({static_cast<Index>(e.row - 1), static_cast<Index>(e.col - 1), e.value});
  }
  if (samples.empty()) throw ParseError(path, 0, "no entries");
  return Observations(rows, cols, std::move(samples));
}

Observations load_matrix_market(const std::string& path, const std::optional<Dims>& dims) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  const auto header = fields(lower(line));
  if (header.size() < 5 || header[0] != "%%matrixmarket" || header[1] != "matrix" ||
      header[2] != "coordinate" || header[3] != "real" || header[4] != "general")
    throw ParseError(path, lineno, "expected '%%MatrixMarket matrix coordinate real general'");

  long long rows = -1, cols = -1, nnz = -1;
  std::vector<RawEntry> raw;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    const auto f = fields(t);
    if (rows < 0) {
      if (f.size() != 3 || !to_index(f[0], rows) || !to_index(f[1], cols) || !to_index(f[2], nnz) ||
          rows <= 0 || cols <= 0 || nnz < 0)
        throw ParseError(path, lineno, "malformed size line '" + t + "'");
      raw.reserve(static_cast<std::size_t>(nnz));
      continue;
    }
    RawEntry e{0, 0, 0.0, lineno};
    if (f.size() != 3 || !to_index(f[0], e.row) || !to_index(f[1], e.col) || !to_double(f[2], e.value))
      throw ParseError(path, lineno, "malformed entry '" + t + "'");
    raw.push_back(e);
  }
  if (rows < 0) throw ParseError(path, lineno, "missing size line");
  if (static_cast<long long>(raw.size()) != nnz)
    throw ParseError(path, lineno,
                     "expected " + std::to_string(nnz) + " entries, found " + std::to_string(raw.size()));
  if (dims && (dims->rows != rows || dims->cols != cols))
    throw std::invalid_argument("dimensions given for '" + path + "' disagree with its header");
  return build_observations(path, static_cast<Index>(rows), static_cast<Index>(cols), raw);
}

Observations load_csv(const std::string& path, const std::optional<Dims>& dims) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<RawEntry> raw;
  long long max_row = 0, max_col = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '%') continue;
    const auto f = fields(t);
    RawEntry e{0, 0, 0.0, lineno};
    if (f.size() != 3 || !to_index(f[0], e.row) || !to_index(f[1], e.col) || !to_double(f[2], e.value))
      throw ParseError(path, lineno, "expected 'row,col,value', got '" + t + "'");
    max_row = std::max(max_row, e.row);
    max_col = std::max(max_col, e.col);
    raw.push_back(e);
  }
  const Index rows = dims ? dims->rows : static_cast<Index>(max_row);
  const Index cols = dims ? dims->cols : static_cast<Index>(max_col);
  if (rows <= 0 || cols <= 0) throw ParseError(path, lineno, "no entries");
  return build_observations(path, rows, cols, raw);
}

Vector uniform_sigma(Index r, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1000.0);
  Vector sigma(r);
  for (Index i = 0; i < r; ++i) {
    do sigma[i] = unif(rng);
    while (!(sigma[i] > 0.0));
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

// `count` distinct integers from [0, total), in random order (Floyd's algorithm).
std::vector<long long> sample_without_replacement(long long total, long long count, Rng& rng) {
  std::unordered_set<long long> chosen;
  chosen.reserve(static_cast<std::size_t>(count) * 2);
  std::vector<long long> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long j = total - count; j < total; ++j) {
    std::uniform_int_distribution<long long> pick(0, j);
    const long long t = pick(rng);
    const long long v = chosen.insert(t).second ? t : j;
    if (v == j) chosen.insert(j);
    out.push_back(v);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

TripletFormat guess_format(const std::string& path) {
  const std::string ext = lower(std::filesystem::path(path).extension().string());
  return (ext == ".mtx" || ext == ".mm") ? TripletFormat::MatrixMarket : TripletFormat::Csv;
}

Dims parse_dims(const std::string& text) {
  const std::string t = lower(trim(text));
  const auto sep = t.find_first_of("x,");
  long long rows = 0, cols = 0;
  if (sep == std::string::npos || !to_index(t.substr(0, sep), rows) ||
      !to_index(t.substr(sep + 1), cols) || rows <= 0 || cols <= 0)
    throw std::invalid_argument("dimensions must look like 300x200, got '" + text + "'");
  return {static_cast<Index>(rows), static_cast<Index>(cols)};
}

Observations load_triplets(const std::string& path, TripletFormat format,
                           const std::optional<Dims>& dims) {
  return format == TripletFormat::MatrixMarket ? load_matrix_market(path, dims) : load_csv(path, dims);
}

void write_triplets(const std::string& path, const Observations& obs, TripletFormat format) {
  auto out = open_out(path);
  if (format == TripletFormat::MatrixMarket) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << obs.rows() << ' ' << obs.cols() << ' ' << obs.size() << '\n';
    for (const auto& s : obs.samples()) out << s.row + 1 << ' ' << s.col + 1 << ' ' << s.value << '\n';
  } else {
    for (const auto& s : obs.samples()) out << s.row + 1 << ',' << s.col + 1 << ',' << s.value << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Dataset split(const Observations& obs, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split: fraction must lie in (0, 1)");
  const Index total = obs.size();
  const auto n_train = static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
  if (n_train <= 0 || n_train >= total) throw std::invalid_argument("split: one side would be empty");

  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_train(static_cast<std::size_t>(total), false);
  for (Index k = 0; k < n_train; ++k) is_train[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;

  std::vector<Sample> train, test;
  for (Index k = 0; k < total; ++k)
    (is_train[static_cast<std::size_t>(k)] ? train : test).push_back(obs.samples()[static_cast<std::size_t>(k)]);
  Dataset ds{Observations(obs.rows(), obs.cols(), std::move(train)),
             Observations(obs.rows(), obs.cols(), std::move(test)),
             {}};
  ds.provenance["split_fraction"] = std::to_string(fraction);
  ds.provenance["split_seed"] = std::to_string(seed);
  return ds;
}

DenseMatrix random_orthonormal(Index m, Index k, Rng& rng) {
  std::normal_distribution<double> gauss;
  DenseMatrix g(m, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < m; ++i) g(i, j) = gauss(rng);
  return thin_qr(g).q;
}

SyntheticData gen_synthetic(const SyntheticParams& p) {
  const Index m = p.m;
  const Index n = p.n > 0 ? p.n : p.m;
  if (m <= 0 || p.r <= 0 || p.r > std::min(m, n))
    throw std::invalid_argument("gen_synthetic: need 0 < r <= min(m, n)");
  if (!(p.omega > 0.0)) throw std::invalid_argument("gen_synthetic: omega must be positive");
  if (!(p.noise_scale >= 0.0) || !(p.test_fraction >= 0.0) || !(p.outlier_range >= 0.0) ||
      !(p.outlier_fraction >= 0.0 && p.outlier_fraction <= 1.0))
    throw std::invalid_argument("gen_synthetic: noise, outlier and test parameters out of range");

  const double total = static_cast<double>(m) * static_cast<double>(n);
  const auto l = static_cast<long long>(std::llround(p.omega * static_cast<double>(p.r * (m + n - p.r))));
  const auto l_test = static_cast<long long>(std::llround(p.test_fraction * static_cast<double>(l)));
  if (l < 1 || static_cast<double>(l + l_test) > total)
    throw std::invalid_argument("gen_synthetic: oversampling infeasible, l = " + std::to_string(l) +
                                " (+" + std::to_string(l_test) + " test) exceeds " +
                                std::to_string(static_cast<long long>(total)) + " entries");

  Rng rng(p.seed);
  DenseMatrix u = random_orthonormal(m, p.r, rng);
  DenseMatrix v = random_orthonormal(n, p.r, rng);
  Vector sigma = uniform_sigma(p.r, rng);
  FixedRankMatrix truth(std::move(u), std::move(sigma), std::move(v));

  const auto positions = sample_without_replacement(static_cast<long long>(total), l + l_test, rng);
  auto make_samples = [&](std::size_t from, std::size_t to) {
    std::vector<Sample> out;
    out.reserve(to - from);
    for (std::size_t k = from; k < to; ++k) {
      const Index i = static_cast<Index>(positions[k] / n);
      const Index j = static_cast<Index>(positions[k] % n);
      out.push_back({i, j, truth.entry(i, j)});
    }
    return out;
  };
  auto train = make_samples(0, static_cast<std::size_t>(l));
  auto test = make_samples(static_cast<std::size_t>(l), positions.size());

  double noise_level = 0.0;
  std::vector<Index> outliers;
  std::normal_distribution<double> gauss;
  if (p.noise_scale > 0.0) {
    Vector d(static_cast<Index>(train.size()));
    Vector noise(d.size());
    for (Index k = 0; k < d.size(); ++k) {
      d[k] = train[static_cast<std::size_t>(k)].value;
      noise[k] = gauss(rng);
    }
    noise *= p.noise_scale * d.norm() / noise.norm();
    for (Index k = 0; k < d.size(); ++k) train[static_cast<std::size_t>(k)].value += noise[k];
    noise_level = noise.norm() / std::sqrt(static_cast<double>(l));
    for (auto& s : test) s.value += noise_level * gauss(rng);
  }

  const auto n_out = static_cast<long long>(std::llround(p.outlier_fraction * static_cast<double>(l)));
  if (n_out > 0 && p.outlier_range > 0.0) {
    std::uniform_real_distribution<double> unif(-p.outlier_range, p.outlier_range);
    for (long long k : sample_without_replacement(l, n_out, rng)) {
      train[static_cast<std::size_t>(k)].value += unif(rng);
      outliers.push_back(static_cast<Index>(k));
    }
    std::sort(outliers.begin(), outliers.end());
  }

  std::optional<Observations> test_obs;
  if (!test.empty()) test_obs.emplace(m, n, std::move(test));
  SyntheticData out{Dataset{Observations(m, n, std::move(train)), std::move(test_obs), {}},
                    std::move(truth), noise_level, std::move(outliers)};
  auto& prov = out.dataset.provenance;
  prov["generator"] = "synthetic";
  prov["m"] = std::to_string(m);
  prov["n"] = std::to_string(n);
  prov["r"] = std::to_string(p.r);
  prov["omega"] = std::to_string(p.omega);
  prov["noise_scale"] = std::to_string(p.noise_scale);
  prov["outlier_fraction"] = std::to_string(p.outlier_fraction);
  prov["outlier_range"] = std::to_string(p.outlier_range);
  prov["seed"] = std::to_string(p.seed);
  return out;
}

double rmse(const FixedRankMatrix& x, const Observations& obs) {
  if (x.rows() != obs.rows() || x.cols() != obs.cols())
    throw std::invalid_argument("rmse: dimension mismatch");
  if (obs.size() == 0) throw std::invalid_argument("rmse: empty sample set");
  double acc = 0.0;
  for (const auto& s : obs.samples()) {
    const double d = x.entry(s.row, s.col) - s.value;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(obs.size()));
}

DenseMatrix read_dense_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    for (const auto& f : fields(t)) {
      double v = 0.0;
      if (!to_double(f, v) || !std::isfinite(v)) throw ParseError(path, lineno, "bad number '" + f + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path, lineno, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ParseError(path, lineno, "no data");
  DenseMatrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return a;
}

void write_dense_csv(const std::string& path, const DenseMatrix& a) {
  auto out = open_out(path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << a(i, j);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_factors(const std::string& dir, const FixedRankMatrix& x) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_dense_csv((base / "U.csv").string(), x.u());
  write_dense_csv((base / "sigma.csv").string(), x.sigma());
  write_dense_csv((base / "V.csv").string(), x.v());
}

FixedRankMatrix read_factors(const std::string& dir) {
  const std::filesystem::path base(dir);
  DenseMatrix u = read_dense_csv((base / "U.csv").string());
  DenseMatrix s = read_dense_csv((base / "sigma.csv").string());
  DenseMatrix v = read_dense_csv((base / "V.csv").string());
  if (s.cols() != 1) throw std::invalid_argument("read_factors: sigma.csv must hold one value per line");
  return FixedRankMatrix(std::move(u), Vector(s.col(0)), std::move(v));
}

SubspaceData gen_subspaces(const SubspaceParams& p) {
  if (p.ambient <= 0 || p.dim <= 0 || p.dim > p.ambient || p.per_subspace <= 0 || p.subspaces <= 0)
    throw std::invalid_argument("gen_subspaces: invalid sizes");
  if (!(p.corrupt_fraction >= 0.0 && p.corrupt_fraction <= 1.0) || !(p.corrupt_scale >= 0.0))
    throw std::invalid_argument("gen_subspaces: invalid corruption parameters");

  Rng rng(p.seed);
  std::normal_distribution<double> gauss;
  const Index total = p.subspaces * p.per_subspace;
  SubspaceData out;
  out.d.resize(p.ambient, total);
  out.labels.resize(static_cast<std::size_t>(total));
  for (Index s = 0; s < p.subspaces; ++s) {
    const DenseMatrix basis = random_orthonormal(p.ambient, p.dim, rng);
    DenseMatrix coeff(p.dim, p.per_subspace);
    for (Index j = 0; j < p.per_subspace; ++j)
      for (Index i = 0; i < p.dim; ++i) coeff(i, j) = gauss(rng);
    out.d.middleCols(s * p.per_subspace, p.per_subspace) = basis * coeff;
    for (Index j = 0; j < p.per_subspace; ++j)
      out.labels[static_cast<std::size_t>(s * p.per_subspace + j)] = static_cast<int>(s);
  }

  const auto n_bad = static_cast<long long>(std::llround(p.corrupt_fraction * static_cast<double>(total)));
  for (long long c : sample_without_replacement(total, n_bad, rng)) {
    const double scale = p.corrupt_scale * out.d.col(static_cast<Index>(c)).norm();
    for (Index i = 0; i < p.ambient; ++i) out.d(i, static_cast<Index>(c)) += scale * gauss(rng);
    out.corrupted.push_back(static_cast<Index>(c));
  }
  std::sort(out.corrupted.begin(), out.corrupted.end());
  return out;
}

}  // namespace rankprox
