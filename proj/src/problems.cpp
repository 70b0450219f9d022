#include "rankprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rankprox {

Observations::Observations(Index rows, Index cols, std::vector<Sample> samples)
    : rows_(rows), cols_(cols), samples_(std::move(samples)) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("Observations: dimensions must be positive");
  if (samples_.empty()) throw std::invalid_argument("Observations: need at least one sample");
  std::vector<std::pair<Index, Index>> keys;
  keys.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (s.row < 0 || s.row >= rows || s.col < 0 || s.col >= cols)
      throw std::invalid_argument("Observations: index out of range");
    if (!std::isfinite(s.value)) throw std::invalid_argument("Observations: non-finite value");
    keys.emplace_back(s.row, s.col);
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw std::invalid_argument("Observations: duplicate index");
}

Vector Observations::values() const {
  Vector out(size());
  for (Index k = 0; k < size(); ++k) out[k] = samples_[k].value;
  return out;
}

ProblemSpec::ProblemSpec(std::shared_ptr<const Data> data, ShrinkKind robust, double gamma,
                         double lambda)
    : data_(std::move(data)), robust_(robust), gamma_(gamma), lambda_(lambda) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("ProblemSpec: gamma must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ProblemSpec: lambda must be non-negative");
}

ProblemSpec ProblemSpec::completion(Observations obs, ShrinkKind robust, double gamma,
                                    double lambda) {
  if (robust == ShrinkKind::ColumnwiseL21)
    throw std::invalid_argument("ProblemSpec: completion supports only the entrywise l1 error term");
  Measurement d = obs.values();
  auto data = std::make_shared<const Data>(Completion{std::move(obs), std::move(d)});
  return ProblemSpec(std::move(data), robust, gamma, lambda);
}

ProblemSpec ProblemSpec::lrr(DenseMatrix d, ShrinkKind robust, double gamma, double lambda) {
  if (robust == ShrinkKind::EntrywiseL1)
    throw std::invalid_argument("ProblemSpec: LRR supports only the column-wise l21 error term");
  if (d.size() == 0 || !d.allFinite()) throw std::invalid_argument("ProblemSpec: invalid LRR data");
  auto data = std::make_shared<const Data>(Lrr{std::move(d)});
  return ProblemSpec(std::move(data), robust, gamma, lambda);
}

ProblemSpec ProblemSpec::with_parameters(double gamma, double lambda) const {
  return ProblemSpec(data_, robust_, gamma, lambda);
}

ProblemSpec ProblemSpec::with_robust(ShrinkKind robust) const {
  if (is_completion() ? robust == ShrinkKind::ColumnwiseL21 : robust == ShrinkKind::EntrywiseL1)
    throw std::invalid_argument("ProblemSpec: error term kind does not fit the problem");
  return ProblemSpec(data_, robust, gamma_, lambda_);
}

bool ProblemSpec::is_completion() const { return std::holds_alternative<Completion>(*data_); }

const Observations& ProblemSpec::observations() const {
  if (!is_completion()) throw std::logic_error("ProblemSpec: not a completion problem");
  return std::get<Completion>(*data_).obs;
}

const DenseMatrix& ProblemSpec::lrr_dictionary() const {
  if (is_completion()) throw std::logic_error("ProblemSpec: not an LRR problem");
  return std::get<Lrr>(*data_).d;
}

Index ProblemSpec::x_rows() const {
  return is_completion() ? observations().rows() : lrr_dictionary().cols();
}

Index ProblemSpec::x_cols() const {
  return is_completion() ? observations().cols() : lrr_dictionary().cols();
}

const Measurement& ProblemSpec::data() const {
  if (is_completion()) return std::get<Completion>(*data_).d;
  return std::get<Lrr>(*data_).d;
}

ErrorTerm ProblemSpec::zero_error() const {
  if (!has_error_term()) return ErrorTerm();
  return ErrorTerm::Zero(data().rows(), data().cols());
}

Measurement apply_A(const ProblemSpec& spec, const FixedRankMatrix& x) {
  if (x.rows() != spec.x_rows() || x.cols() != spec.x_cols())
    throw std::invalid_argument("apply_A: dimension mismatch");
  if (spec.is_completion()) {
    const auto& samples = spec.observations().samples();
    Measurement out = Measurement::Zero(static_cast<Index>(samples.size()), 1);
    if (x.rank() == 0) return out;
    // Column-major s x m and s x n copies make each sample a contiguous dot product.
    const DenseMatrix us_t = (x.u() * x.sigma().asDiagonal()).transpose();
    const DenseMatrix v_t = x.v().transpose();
    for (std::size_t k = 0; k < samples.size(); ++k)
      out(static_cast<Index>(k), 0) = us_t.col(samples[k].row).dot(v_t.col(samples[k].col));
    return out;
  }
  const DenseMatrix& d = spec.lrr_dictionary();
  if (x.rank() == 0) return Measurement::Zero(d.rows(), d.cols());
  return (d * x.u()) * x.sigma().asDiagonal() * x.v().transpose();
}

std::unique_ptr<LinearMap> apply_A_adjoint(const ProblemSpec& spec, const Measurement& y) {
  if (y.rows() != spec.data().rows() || y.cols() != spec.data().cols())
    throw std::invalid_argument("apply_A_adjoint: dimension mismatch");
  if (spec.is_completion()) {
    const Observations& obs = spec.observations();
    std::vector<Triplet> triplets;
    triplets.reserve(obs.samples().size());
    for (std::size_t k = 0; k < obs.samples().size(); ++k) {
      const auto& s = obs.samples()[k];
      triplets.push_back({s.row, s.col, y(static_cast<Index>(k), 0)});
    }
    return std::make_unique<SparseMatrix>(obs.rows(), obs.cols(), std::move(triplets));
  }
  return std::make_unique<DenseOperator>(spec.lrr_dictionary().transpose() * y);
}

Measurement residual(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e) {
  Measurement r = apply_A(spec, x) - spec.data();
  if (e.size() > 0) {
    if (e.rows() != r.rows() || e.cols() != r.cols())
      throw std::invalid_argument("residual: error term shape mismatch");
    r += e;
  }
  return r;
}

Objective objective(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e) {
  return objective(spec, x, e, spec.lambda());
}

Objective objective(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e,
                    double lambda) {
  Objective out;
  out.trace_norm = x.trace_norm();
  out.reg_e = e.size() > 0 ? lambda * regularizer(e, spec.robust()) : 0.0;
  out.penalty = 0.5 * spec.gamma() * residual(spec, x, e).squaredNorm();
  out.psi = out.trace_norm + out.reg_e + out.penalty;
  return out;
}

std::unique_ptr<LinearMap> euclid_grad(const ProblemSpec& spec, const FixedRankMatrix& x,
                                       const ErrorTerm& e) {
  return apply_A_adjoint(spec, spec.gamma() * residual(spec, x, e));
}

}  // namespace rankprox
