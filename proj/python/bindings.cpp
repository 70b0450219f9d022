// Python bindings. Observations are passed as parallel (rows, cols, values)
// arrays; factors come back as numpy arrays.

#include "rankprox/cluster.hpp"
#include "rankprox/data.hpp"
#include "rankprox/solvers.hpp"
#include "rankprox/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rankprox;

namespace {

Observations make_observations(Index rows, Index cols, const std::vector<Index>& r,
                               const std::vector<Index>& c, const std::vector<double>& v) {
  if (r.size() != c.size() || r.size() != v.size())
    throw std::invalid_argument("rows, cols and values must have the same length");
  std::vector<Sample> samples(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) samples[i] = {r[i], c[i], v[i]};
  return Observations(rows, cols, std::move(samples));
}

py::dict trace_record(const TraceRecord& t) {
  py::dict d;
  d["kind"] = to_string(t.kind);
  d["outer"] = t.outer;
  d["inner"] = t.inner;
  d["wall_time"] = t.wall_time;
  d["psi"] = t.psi;
  d["trace_norm"] = t.trace_norm;
  d["rank"] = t.rank;
  d["L"] = t.L;
  d["lambda"] = t.lambda;
  d["grad_norm"] = t.grad_norm;
  d["xi_norm"] = t.xi_norm;
  d["test_rmse"] = t.test_rmse ? py::cast(*t.test_rmse) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_rankprox, m) {
  m.doc() = "Trace-norm regularized low-rank solvers on the rank-r variety";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<LineSearchError>(m, "LineSearchError", PyExc_RuntimeError);

  py::enum_<ShrinkKind>(m, "ShrinkKind")
      .value("NONE", ShrinkKind::None)
      .value("L1", ShrinkKind::EntrywiseL1)
      .value("L21", ShrinkKind::ColumnwiseL21);

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("CONVERGED_INNER", SolveStatus::ConvergedInner)
      .value("CONVERGED_OUTER", SolveStatus::ConvergedOuter)
      .value("RANK_DEFICIENT_GLOBAL", SolveStatus::RankDeficientGlobal)
      .value("MAX_ITERATIONS", SolveStatus::MaxIterations)
      .def("__str__", [](SolveStatus s) { return std::string(to_string(s)); });

  py::class_<FixedRankMatrix>(m, "FixedRankMatrix")
      .def(py::init<DenseMatrix, Vector, DenseMatrix>(), py::arg("u"), py::arg("sigma"), py::arg("v"))
      .def_property_readonly("u", &FixedRankMatrix::u)
      .def_property_readonly("sigma", &FixedRankMatrix::sigma)
      .def_property_readonly("v", &FixedRankMatrix::v)
      .def_property_readonly("rank", &FixedRankMatrix::rank)
      .def_property_readonly("shape", [](const FixedRankMatrix& x) { return py::make_tuple(x.rows(), x.cols()); })
      .def("entry", &FixedRankMatrix::entry)
      .def("to_dense", &FixedRankMatrix::to_dense)
      .def("trace_norm", &FixedRankMatrix::trace_norm);

  py::class_<Observations>(m, "Observations")
      .def(py::init(&make_observations), py::arg("n_rows"), py::arg("n_cols"), py::arg("rows"),
           py::arg("cols"), py::arg("values"))
      .def_property_readonly("shape", [](const Observations& o) { return py::make_tuple(o.rows(), o.cols()); })
      .def_property_readonly("rows", [](const Observations& o) {
        std::vector<Index> r;
        for (const auto& s : o.samples()) r.push_back(s.row);
        return r;
      })
      .def_property_readonly("cols", [](const Observations& o) {
        std::vector<Index> c;
        for (const auto& s : o.samples()) c.push_back(s.col);
        return c;
      })
      .def_property_readonly("values", &Observations::values)
      .def("__len__", &Observations::size);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def_static("completion", &ProblemSpec::completion, py::arg("obs"), py::arg("robust") = ShrinkKind::None,
                  py::arg("gamma") = 1.0, py::arg("lam") = 0.0)
      .def_static("lrr", &ProblemSpec::lrr, py::arg("d"), py::arg("robust") = ShrinkKind::None,
                  py::arg("gamma") = 1.0, py::arg("lam") = 0.0)
      .def("with_parameters", &ProblemSpec::with_parameters, py::arg("gamma"), py::arg("lam"))
      .def("with_robust", &ProblemSpec::with_robust)
      .def_property_readonly("gamma", &ProblemSpec::gamma)
      .def_property_readonly("lam", &ProblemSpec::lambda)
      .def_property_readonly("is_completion", &ProblemSpec::is_completion);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("beta", &SolverConfig::beta)
      .def_readwrite("eps_inner", &SolverConfig::eps_inner)
      .def_readwrite("eps_outer", &SolverConfig::eps_outer)
      .def_readwrite("rho", &SolverConfig::rho)
      .def_readwrite("chi", &SolverConfig::chi)
      .def_readwrite("lambda0", &SolverConfig::lambda0)
      .def_readwrite("kappa", &SolverConfig::kappa)
      .def_readwrite("max_inner", &SolverConfig::max_inner)
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("L_init", &SolverConfig::L_init)
      .def_readwrite("L_grow", &SolverConfig::L_grow)
      .def_readwrite("L_shrink", &SolverConfig::L_shrink)
      .def("validate", &SolverConfig::validate);

  py::class_<Solution>(m, "Solution")
      .def_readonly("x", &Solution::x)
      .def_readonly("e", &Solution::e)
      .def_readonly("status", &Solution::status)
      .def_readonly("psi", &Solution::psi)
      .def_readonly("lam", &Solution::lambda)
      .def_readonly("outer_iterations", &Solution::outer_iterations)
      .def_readonly("inner_iterations", &Solution::inner_iterations)
      .def_property_readonly("trace", [](const Solution& s) {
        py::list out;
        for (const auto& t : s.trace.records) out.append(trace_record(t));
        return out;
      })
      .def_property_readonly("svd_stats", [](const Solution& s) {
        py::dict d;
        d["max_truncated_rank"] = s.svd.max_truncated_rank;
        d["truncated_calls"] = s.svd.truncated_calls;
        d["max_dense_dim"] = s.svd.max_dense_dim;
        d["dense_calls"] = s.svd.dense_calls;
        return d;
      })
      .def("validate_trace", [](const Solution& s, double beta) {
        const TraceCheck c = validate_trace(s.trace, beta);
        return py::make_tuple(c.ok, c.violations);
      }, py::arg("beta"));

  // The GIL is released while solving; the monitor callback re-acquires it.
  m.def("prg_solve", [](const ProblemSpec& spec, Index r, const SolverConfig& cfg, const Monitor& monitor) {
    py::gil_scoped_release release;
    return prg_solve(spec, r, cfg, std::nullopt, monitor);
  }, py::arg("spec"), py::arg("r"), py::arg("config") = SolverConfig{}, py::arg("monitor") = Monitor{});
  m.def("rprg_solve", [](const ProblemSpec& spec, Index r, const SolverConfig& cfg, const Monitor& monitor) {
    py::gil_scoped_release release;
    return rprg_solve(spec, r, cfg, {}, monitor);
  }, py::arg("spec"), py::arg("r"), py::arg("config") = SolverConfig{}, py::arg("monitor") = Monitor{});
  m.def("sp_solve", [](const ProblemSpec& spec, const SolverConfig& cfg, const Monitor& monitor) {
    py::gil_scoped_release release;
    return sp_solve(spec, cfg, monitor);
  }, py::arg("spec"), py::arg("config") = SolverConfig{}, py::arg("monitor") = Monitor{});

  m.def("heuristics", [](const ProblemSpec& spec, double nu, double delta, double eta, Index kappa_max) {
    const HeuristicParameters hp = heuristics(spec, nu, delta, eta, kappa_max);
    py::dict d;
    d["gamma"] = hp.gamma;
    d["lam"] = hp.lambda;
    d["kappa"] = hp.kappa;
    d["data_mean"] = hp.data_mean;
    d["sigma"] = hp.sigma;
    return d;
  }, py::arg("spec"), py::arg("nu") = 0.005, py::arg("delta") = 0.1, py::arg("eta") = 0.65,
     py::arg("kappa_max") = 10);

  m.def("rmse", &rmse, py::arg("x"), py::arg("obs"));

  m.def("gen_synthetic", [](Index m_, Index r, double omega, double noise, double outlier_fraction,
                            double outlier_range, Index n, double test_fraction, std::uint64_t seed) {
    SyntheticParams p;
    p.m = m_;
    p.n = n;
    p.r = r;
    p.omega = omega;
    p.noise_scale = noise;
    p.outlier_fraction = outlier_fraction;
    p.outlier_range = outlier_range;
    p.test_fraction = test_fraction;
    p.seed = seed;
    const SyntheticData s = gen_synthetic(p);
    py::dict d;
    d["train"] = s.dataset.train;
    d["test"] = *s.dataset.test;
    d["truth"] = s.truth;
    d["noise_level"] = s.noise_level;
    d["outliers"] = s.outliers;
    return d;
  }, py::arg("m") = 300, py::arg("r") = 5, py::arg("omega") = 3.0, py::arg("noise") = 0.0,
     py::arg("outlier_fraction") = 0.0, py::arg("outlier_range") = 0.0, py::arg("n") = 0,
     py::arg("test_fraction") = 0.25, py::arg("seed") = 1);

  m.def("gen_subspaces", [](Index ambient, Index dim, Index per_subspace, Index subspaces,
                            double corrupt_fraction, std::uint64_t seed) {
    SubspaceParams p;
    p.ambient = ambient;
    p.dim = dim;
    p.per_subspace = per_subspace;
    p.subspaces = subspaces;
    p.corrupt_fraction = corrupt_fraction;
    p.seed = seed;
    SubspaceData s = gen_subspaces(p);
    return py::make_tuple(s.d, s.labels);
  }, py::arg("ambient") = 20, py::arg("dim") = 3, py::arg("per_subspace") = 40, py::arg("subspaces") = 2,
     py::arg("corrupt_fraction") = 0.05, py::arg("seed") = 1);

  m.def("cluster", [](const FixedRankMatrix& x, int k, std::uint64_t seed,
                      const std::optional<std::vector<int>>& truth) {
    ClusterOptions o;
    o.seed = seed;
    const ClusterResult c = lrr_affinity_cluster(x, k, o, truth);
    return py::make_tuple(c.labels, c.accuracy ? py::cast(*c.accuracy) : py::none());
  }, py::arg("x"), py::arg("k"), py::arg("seed") = 1, py::arg("truth") = std::nullopt);

  m.def("load_triplets", [](const std::string& path) { return load_triplets(path, guess_format(path)); },
        py::arg("path"));
}
