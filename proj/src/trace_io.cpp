#include "rankprox/trace_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rankprox {

namespace {

using nlohmann::json;

RecordKind kind_from_string(const std::string& s) {
  if (s == "init") return RecordKind::Init;
  if (s == "inner") return RecordKind::Inner;
  if (s == "outer") return RecordKind::Outer;
  throw std::invalid_argument("trace: unknown record kind '" + s + "'");
}

json to_json(const TraceRecord& r) {
  json j;
  j["kind"] = to_string(r.kind);
  j["outer"] = r.outer;
  j["inner"] = r.inner;
  j["wall_time"] = r.wall_time;
  j["psi"] = r.psi;
  j["trace_norm"] = r.trace_norm;
  j["rank"] = r.rank;
  j["L"] = r.L;
  j["lambda"] = r.lambda;
  j["grad_norm"] = r.grad_norm;
  j["xi_norm"] = r.xi_norm;
  j["test_rmse"] = r.test_rmse ? json(*r.test_rmse) : json(nullptr);
  return j;
}

TraceRecord from_json(const json& j) {
  TraceRecord r;
  r.kind = kind_from_string(j.at("kind").get<std::string>());
  r.outer = j.at("outer").get<Index>();
  r.inner = j.at("inner").get<Index>();
  r.wall_time = j.at("wall_time").get<double>();
  r.psi = j.at("psi").get<double>();
  r.trace_norm = j.at("trace_norm").get<double>();
  r.rank = j.at("rank").get<Index>();
  r.L = j.at("L").get<double>();
  r.lambda = j.at("lambda").get<double>();
  r.grad_norm = j.at("grad_norm").get<double>();
  r.xi_norm = j.at("xi_norm").get<double>();
  if (j.contains("test_rmse") && !j.at("test_rmse").is_null()) r.test_rmse = j.at("test_rmse").get<double>();
  return r;
}

}  // namespace

void write_trace(std::ostream& out, const SolverTrace& trace) {
  for (const auto& r : trace.records) out << to_json(r).dump() << '\n';
}

void write_trace(const std::string& path, const SolverTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace(out, trace);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SolverTrace read_trace(std::istream& in) {
  SolverTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.records.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

SolverTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_trace(in);
}

TraceCheck validate_trace(const SolverTrace& trace, double beta, double rel_tol) {
  TraceCheck check;
  auto fail = [&](std::size_t i, const std::string& what) {
    check.ok = false;
    std::ostringstream msg;
    msg << "record " << i << ": " << what;
    check.violations.push_back(msg.str());
  };
  auto slack = [&](double psi) { return rel_tol * std::max(1.0, std::abs(psi)); };

  const auto& recs = trace.records;
  double last_anchor = 0.0;  // psi of the latest init/outer record
  bool have_anchor = false;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (i > 0) {
      const auto& p = recs[i - 1];
      if (r.psi > p.psi + slack(p.psi)) {
        std::ostringstream msg;
        msg << "psi increased from " << p.psi << " to " << r.psi;
        fail(i, msg.str());
      }
      if (r.wall_time < p.wall_time) fail(i, "wall_time decreased");
    }
    if (r.kind == RecordKind::Inner) ++check.inner_checked;
    if (r.kind == RecordKind::Outer) {
      ++check.outer_checked;
      if (!have_anchor) {
        fail(i, "outer record without a preceding init record");
      } else if (!(r.L > 0.0)) {
        fail(i, "outer record with non-positive L");
      } else {
        const double bound = last_anchor - beta * r.xi_norm * r.xi_norm / r.L;
        if (r.psi > bound + slack(last_anchor)) {
          std::ostringstream msg;
          msg << "outer decrease bound violated: psi " << r.psi << " > " << bound;
          fail(i, msg.str());
        }
      }
    }
    if (r.kind == RecordKind::Init || r.kind == RecordKind::Outer) {
      last_anchor = r.psi;
      have_anchor = true;
    }
  }
  return check;
}

}  // namespace rankprox
