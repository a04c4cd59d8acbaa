#pragma once

// File formats.
//
//   operator files (JSON)   dim, hamiltonian, collapse_ops, optional tcl and
//                           kraus_ops; matrices are row lists of [re, im] pairs
//   circuit files (JSON)    qubits, param_count, gate records
//   parameter files (text)  "#" header lines with the conventions, then one
//                           value per line
//   dilation results (text) keyword lines followed by %.17g numbers
//   CSV                     header row plus data rows
//
// Every writer goes through write_atomic (temp file, then rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include "vqaud/circuit.hpp"
#include "vqaud/dilation.hpp"
#include "vqaud/lindblad.hpp"

namespace vqaud {

using Json = nlohmann::json;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kConventionNote =
    "R_A(theta) = exp(-i theta A / 2); gates in application order; qubit 0 is the most significant bit";

// ---------------------------------------------------------------------------
// Plain files

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON matrices

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Accepts rows of [re, im] pairs or of plain reals.
inline ComplexMatrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().is_array() ? j.front().size() : 0);
  if (cols == 0) throw FormatError(what + ": rows must be non-empty arrays");
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw FormatError(what + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(i, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw FormatError(what + ": entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Operator files

struct OperatorFile {
  std::optional<LindbladModel> model;
  std::optional<TclParams> tcl;
  std::vector<ComplexMatrix> kraus_ops;
};

inline OperatorFile operator_file_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("operator file: top level must be an object");
  OperatorFile out;
  const auto dim = j.value("dim", 0);
  if (dim < 1) throw FormatError("operator file: 'dim' must be a positive integer");
  auto check_shape = [dim](const ComplexMatrix& m, const std::string& what) {
    if (m.rows() != dim || m.cols() != dim) throw FormatError(what + ": expected " + std::to_string(dim) + "x" + std::to_string(dim));
  };
  if (j.contains("hamiltonian")) {
    LindbladModel model;
    model.dim = static_cast<std::size_t>(dim);
    model.hamiltonian = matrix_from_json(j["hamiltonian"], "hamiltonian");
    check_shape(model.hamiltonian, "hamiltonian");
    for (const auto& c : j.value("collapse_ops", Json::array())) {
      if (!c.contains("op") || !c.contains("rate")) throw FormatError("collapse_ops: entries need 'op' and 'rate'");
      CollapseTerm t{matrix_from_json(c["op"], "collapse op"), c["rate"].get<double>()};
      check_shape(t.op, "collapse op");
      model.collapse_ops.push_back(std::move(t));
    }
    try {
      model.validate();
    } catch (const std::exception& e) {
      throw FormatError(std::string("operator file: ") + e.what());
    }
    out.model = std::move(model);
  }
  if (j.contains("tcl")) {
    TclParams p;
    p.gamma0 = j["tcl"].value("gamma0", p.gamma0);
    p.spectral_width = j["tcl"].value("spectral_width", p.spectral_width);
    p.detuning = j["tcl"].value("detuning", p.detuning);
    try {
      p.validate();
    } catch (const std::exception& e) {
      throw FormatError(std::string("operator file: ") + e.what());
    }
    out.tcl = p;
  }
  for (const auto& k : j.value("kraus_ops", Json::array())) {
    out.kraus_ops.push_back(matrix_from_json(k, "kraus op"));
    check_shape(out.kraus_ops.back(), "kraus op");
  }
  if (!out.model && !out.tcl && out.kraus_ops.empty()) throw FormatError("operator file: no hamiltonian, tcl or kraus_ops");
  return out;
}

inline Json operator_file_to_json(const OperatorFile& f) {
  Json j;
  j["format"] = "vqaud-operators";
  j["version"] = kFormatVersion;
  std::size_t dim = 0;
  if (f.model) {
    dim = f.model->dim;
    j["hamiltonian"] = matrix_to_json(f.model->hamiltonian);
    Json ops = Json::array();
    for (const auto& c : f.model->collapse_ops) ops.push_back({{"op", matrix_to_json(c.op)}, {"rate", c.rate}});
    j["collapse_ops"] = std::move(ops);
  }
  if (f.tcl) {
    dim = 2;
    j["tcl"] = {{"gamma0", f.tcl->gamma0}, {"spectral_width", f.tcl->spectral_width}, {"detuning", f.tcl->detuning}};
  }
  if (!f.kraus_ops.empty()) {
    dim = static_cast<std::size_t>(f.kraus_ops.front().rows());
    Json ops = Json::array();
    for (const auto& k : f.kraus_ops) ops.push_back(matrix_to_json(k));
    j["kraus_ops"] = std::move(ops);
  }
  j["dim"] = dim;
  return j;
}

inline OperatorFile load_operator_file(const std::filesystem::path& path) {
  try {
    return operator_file_from_json(Json::parse(read_text(path)));
  } catch (const Json::exception& e) {
    throw FormatError("operator file '" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Circuit files

inline Json circuit_to_json(const ParamCircuit& c) {
  Json gates = Json::array();
  for (const auto& g : c.gates()) {
    Json rec = {{"kind", std::string(gate_name(g.kind))}, {"targets", g.targets}};
    if (g.slot) rec["slot"] = *g.slot;
    gates.push_back(std::move(rec));
  }
  return {{"format", "vqaud-circuit"},
          {"version", kFormatVersion},
          {"conventions", kConventionNote},
          {"qubits", c.qubits()},
          {"param_count", c.param_count()},
          {"gates", std::move(gates)}};
}

inline ParamCircuit circuit_from_json(const Json& j) {
  try {
    ParamCircuit c(j.at("qubits").get<std::size_t>());
    for (const auto& rec : j.at("gates")) {
      const GateKind kind = parse_gate_kind(rec.at("kind").get<std::string>());
      auto targets = rec.at("targets").get<std::vector<std::size_t>>();
      if (is_rotation(kind)) {
        if (targets.size() != 1) throw FormatError("circuit file: rotation gates take one target");
        c.add_rotation(kind, targets[0], rec.at("slot").get<std::size_t>());
      } else {
        if (rec.contains("slot")) throw FormatError("circuit file: fixed gate with a slot");
        c.add(kind, std::move(targets));
      }
    }
    if (j.contains("param_count") && j["param_count"].get<std::size_t>() != c.param_count())
      throw FormatError("circuit file: param_count does not match the gate records");
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  } catch (const CircuitError& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  }
}

inline ParamCircuit load_circuit(const std::filesystem::path& path) {
  try {
    return circuit_from_json(Json::parse(read_text(path)));
  } catch (const Json::parse_error& e) {
    throw FormatError("circuit file '" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Parameter files

inline std::string parameters_to_text(std::span<const double> theta) {
  std::string out = "# vqaud parameters v1\n# ";
  out += kConventionNote;
  out += "\n# count " + std::to_string(theta.size()) + "\n";
  for (double v : theta) out += format_double(v) + "\n";
  return out;
}

inline std::vector<double> parameters_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<std::size_t> declared;
  bool saw_header = false;
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# vqaud parameters", 0) == 0) saw_header = true;
      if (line.rfind("# count ", 0) == 0) declared = std::stoul(line.substr(8));
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw FormatError("parameter file: bad value '" + line + "'");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw FormatError("parameter file: trailing text on '" + line + "'");
    out.push_back(v);
  }
  if (!saw_header) throw FormatError("parameter file: missing '# vqaud parameters' header");
  if (declared && *declared != out.size()) throw FormatError("parameter file: count header does not match values");
  return out;
}

// ---------------------------------------------------------------------------
// Dilation results

inline std::string dilation_to_text(const DilationResult& d) {
  std::ostringstream o;
  o << "vqaud-dilation " << kFormatVersion << "\n";
  o << "method " << method_name(d.method) << "\n";
  o << "alpha " << format_double(d.alpha) << "\n";
  o << "block_dim " << d.block_dim << "\n";
  o << "residual " << format_double(d.residual) << "\n";
  o << "converged " << (d.converged ? 1 : 0) << "\n";
  o << "iterations " << d.iterations << "\n";
  if (d.counts) o << "counts " << d.counts->single << " " << d.counts->two_qubit << " " << d.counts->qubits << "\n";
  o << "theta " << d.theta.size() << "\n";
  for (double v : d.theta) o << format_double(v) << "\n";
  o << "unitary " << d.unitary.rows() << " " << d.unitary.cols() << "\n";
  for (Eigen::Index i = 0; i < d.unitary.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.unitary.cols(); ++j) {
      if (j) o << " ";
      o << format_double(d.unitary(i, j).real()) << " " << format_double(d.unitary(i, j).imag());
    }
    o << "\n";
  }
  return o.str();
}

inline DilationResult dilation_from_text(const std::string& text) {
  std::istringstream in(text);
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw FormatError("dilation file: expected '" + key + "'");
  };
  auto number = [&]() {
    std::string tok;
    if (!(in >> tok)) throw FormatError("dilation file: truncated");
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw FormatError("dilation file: bad number '" + tok + "'");
    }
  };
  auto count = [&]() {
    const double v = number();
    if (v < 0 || v != std::floor(v)) throw FormatError("dilation file: expected a count");
    return static_cast<std::size_t>(v);
  };
  DilationResult d;
  expect("vqaud-dilation");
  if (count() != kFormatVersion) throw FormatError("dilation file: unsupported version");
  expect("method");
  std::string m;
  in >> m;
  try {
    d.method = parse_method(m);
  } catch (const std::exception& e) {
    throw FormatError(std::string("dilation file: ") + e.what());
  }
  expect("alpha");
  d.alpha = number();
  expect("block_dim");
  d.block_dim = count();
  expect("residual");
  d.residual = number();
  expect("converged");
  d.converged = count() != 0;
  expect("iterations");
  d.iterations = count();
  std::string key;
  in >> key;
  if (key == "counts") {
    GateCounts gc;
    gc.single = count();
    gc.two_qubit = count();
    gc.qubits = count();
    d.counts = gc;
    in >> key;
  }
  if (key != "theta") throw FormatError("dilation file: expected 'theta'");
  d.theta.resize(count());
  for (auto& v : d.theta) v = number();
  expect("unitary");
  const auto rows = static_cast<Eigen::Index>(count());
  const auto cols = static_cast<Eigen::Index>(count());
  d.unitary.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = number();
      const double im = number();
      d.unitary(i, j) = cplx(re, im);
    }
  return d;
}

// ---------------------------------------------------------------------------
// CSV

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace vqaud
