#include "cmc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "cmc/errors.hpp"

namespace cmc {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  return s;
}

// Whole-string strtod; nullopt when anything is left over.
std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::InvalidConfig, msg); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

double real_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) bad(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(where + "." + key + " must be finite");
  return x;
}

int int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) bad(where + "." + key + " must be a string");
  return v.get<std::string>();
}

void emit(std::ostream& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) out << ",\n";
        first = false;
        out << pad_in << json(key).dump() << ": ";
        emit(out, val, indent + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out << (flat ? "[" : "[\n");
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",\n");
        first = false;
        if (!flat) out << pad_in;
        emit(out, e, indent + 1);
      }
      if (!flat) out << "\n" << pad;
      out << "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out << (std::isfinite(v) ? format_real(v) : "null");
      return;
    }
    default: out << j.dump();
  }
}

double json_real(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) bad("table value must be a number or null");
  return v.get<double>();
}

}  // namespace

double parse_angle(const std::string& text) {
  const std::string s = trim(text);
  const auto pos = s.find("pi");
  if (pos == std::string::npos) {
    const auto v = parse_number(s);
    if (!v) bad("cannot parse angle '" + text + "'");
    return *v;
  }
  std::string before = s.substr(0, pos);
  const std::string after = s.substr(pos + 2);
  if (!before.empty() && before.back() == '*') before.pop_back();
  double coef = 1.0;
  if (before == "-") {
    coef = -1.0;
  } else if (!before.empty() && before != "+") {
    const auto v = parse_number(before);
    if (!v) bad("cannot parse angle '" + text + "'");
    coef = *v;
  }
  double den = 1.0;
  if (!after.empty()) {
    if (after[0] != '/') bad("cannot parse angle '" + text + "'");
    const auto v = parse_number(after.substr(1));
    if (!v || *v == 0.0) bad("cannot parse angle '" + text + "'");
    den = *v;
  }
  return coef * std::numbers::pi / den;
}

double parse_angle(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_angle(value.get<std::string>());
  bad("angle must be a number or an expression string");
}

TMode parse_t_mode(const std::string& s) {
  if (s == "dirichlet") return TMode::DirichletEnds;
  if (s == "periodic") return TMode::Periodic;
  if (s == "half_period_neumann") return TMode::HalfPeriodNeumann;
  bad("unknown t_mode '" + s + "'");
}

RunConfig parse_run_config(const json& doc) {
  RunConfig rc;
  try {
    reject_unknown(doc, {"scenario", "numerics", "task", "output"}, "config");
    if (!doc.contains("scenario")) bad("missing scenario block");

    const json& sc = doc.at("scenario");
    reject_unknown(sc, {"type", "r", "gamma", "beta", "convexity"}, "scenario");
    const std::string type = sc.contains("type") ? string_field(sc, "type", "scenario") : "planar";
    if (!sc.contains("gamma")) bad("scenario.gamma is required");
    const double r = sc.contains("r") ? real_field(sc, "r", "scenario") : 1.0;
    const double gamma = parse_angle(sc.at("gamma"));
    if (type == "planar") {
      if (sc.contains("beta") || sc.contains("convexity")) {
        bad("beta/convexity only apply to the wedge scenario");
      }
      rc.scenario = CylinderConfig::planar(r, gamma);
    } else if (type == "wedge") {
      if (!sc.contains("beta")) bad("scenario.beta is required for the wedge");
      Convexity cv = Convexity::Convex;
      if (sc.contains("convexity")) {
        const std::string c = string_field(sc, "convexity", "scenario");
        if (c == "concave") {
          cv = Convexity::Concave;
        } else if (c != "convex") {
          bad("scenario.convexity must be convex or concave");
        }
      }
      rc.scenario = CylinderConfig::wedge(r, gamma, parse_angle(sc.at("beta")), cv);
    } else {
      bad("scenario.type must be planar or wedge");
    }
    rc.scenario.validate();

    if (doc.contains("numerics")) {
      const json& nu = doc.at("numerics");
      reject_unknown(nu, {"nt", "ns", "oracle_ns", "newton_tol", "max_newton_iter"}, "numerics");
      auto& n = rc.numerics;
      if (nu.contains("nt")) n.nt = int_field(nu, "nt", "numerics");
      if (nu.contains("ns")) n.ns = int_field(nu, "ns", "numerics");
      if (nu.contains("oracle_ns")) n.oracle_ns = int_field(nu, "oracle_ns", "numerics");
      if (nu.contains("newton_tol")) n.newton_tol = real_field(nu, "newton_tol", "numerics");
      if (nu.contains("max_newton_iter")) n.max_newton_iter = int_field(nu, "max_newton_iter", "numerics");
      if (n.nt < 4 || n.ns < 4) bad("numerics.nt and numerics.ns must be >= 4");
      if (n.oracle_ns < 64) bad("numerics.oracle_ns must be >= 64");
      if (!(n.newton_tol > 0.0)) bad("numerics.newton_tol must be positive");
      if (n.max_newton_iter < 1) bad("numerics.max_newton_iter must be >= 1");
    }

    if (doc.contains("task")) {
      const json& tk = doc.at("task");
      reject_unknown(tk, {"h", "m", "t_mode", "steps", "ds", "epsilon0", "obj", "sweep"}, "task");
      auto& t = rc.task;
      if (tk.contains("h")) {
        t.h = real_field(tk, "h", "task");
        if (!(*t.h > 0.0)) bad("task.h must be positive");
      }
      if (tk.contains("m")) t.m = int_field(tk, "m", "task");
      if (tk.contains("t_mode")) t.t_mode = parse_t_mode(string_field(tk, "t_mode", "task"));
      if (tk.contains("steps")) t.steps = int_field(tk, "steps", "task");
      if (tk.contains("ds")) t.ds = real_field(tk, "ds", "task");
      if (tk.contains("epsilon0")) t.epsilon0 = real_field(tk, "epsilon0", "task");
      if (tk.contains("obj")) {
        if (!tk.at("obj").is_boolean()) bad("task.obj must be a boolean");
        t.write_obj = tk.at("obj").get<bool>();
      }
      if (t.m < 1) bad("task.m must be >= 1");
      if (t.steps < 0) bad("task.steps must be >= 0");
      if (t.ds == 0.0) bad("task.ds must be nonzero");
      if (tk.contains("sweep")) {
        const json& sw = tk.at("sweep");
        reject_unknown(sw, {"command", "axis", "values"}, "task.sweep");
        auto& s = t.sweep;
        if (sw.contains("command")) s.command = string_field(sw, "command", "task.sweep");
        if (sw.contains("axis")) s.axis = string_field(sw, "axis", "task.sweep");
        if (s.command != "critical" && s.command != "stability") {
          bad("task.sweep.command must be critical or stability");
        }
        if (s.axis != "gamma" && s.axis != "beta" && s.axis != "r" && s.axis != "h") {
          bad("task.sweep.axis must be gamma, beta, r or h");
        }
        if (sw.contains("values")) {
          const json& vals = sw.at("values");
          if (!vals.is_array()) bad("task.sweep.values must be an array");
          const bool angle = s.axis == "gamma" || s.axis == "beta";
          for (const json& v : vals) {
            if (angle) {
              s.values.push_back(parse_angle(v));
            } else {
              if (!v.is_number()) bad("task.sweep.values entries must be numbers");
              s.values.push_back(v.get<double>());
            }
          }
        }
      }
    }

    if (doc.contains("output")) {
      const json& out = doc.at("output");
      reject_unknown(out, {"dir", "format"}, "output");
      if (out.contains("dir")) rc.output.dir = string_field(out, "dir", "output");
      if (out.contains("format")) rc.output.format = string_field(out, "format", "output");
      if (rc.output.format != "csv" && rc.output.format != "json") {
        bad("output.format must be csv or json");
      }
    }
  } catch (const json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

// ---------------------------------------------------------------------------

DiagramTable::DiagramTable(std::vector<std::string> columns, std::vector<bool> optional,
                           bool with_status)
    : columns_(std::move(columns)), optional_(std::move(optional)), with_status_(with_status) {
  if (optional_.empty()) optional_.assign(columns_.size(), false);
  if (optional_.size() != columns_.size()) bad("optional flags do not match the columns");
}

double DiagramTable::at(std::size_t i, const std::string& column) const {
  const auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) bad("no column named " + column);
  return rows_.at(i)[static_cast<std::size_t>(it - columns_.begin())];
}

void DiagramTable::add_row(std::vector<double> values, std::string status) {
  if (values.size() != columns_.size()) bad("row width does not match the table");
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!optional_[c] && !std::isfinite(values[c])) {
      bad("non-finite value in required column " + columns_[c]);
    }
  }
  rows_.push_back(std::move(values));
  status_.push_back(std::move(status));
}

void DiagramTable::append(const DiagramTable& other) {
  if (other.columns_ != columns_ || other.with_status_ != with_status_) {
    bad("cannot append tables with different schemas");
  }
  for (std::size_t i = 0; i < other.rows(); ++i) add_row(other.rows_[i], other.status_[i]);
}

void DiagramTable::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  if (with_status_) out << (columns_.empty() ? "" : ",") << "status";
  out << "\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << format_real(rows_[i][c]);
    if (with_status_) out << (columns_.empty() ? "" : ",") << status_[i];
    out << "\n";
  }
}

json DiagramTable::to_json() const {
  json j;
  j["columns"] = columns_;
  j["optional"] = optional_;
  json rows = json::array();
  for (const auto& r : rows_) {
    json row = json::array();
    for (double v : r) row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  if (with_status_) j["status"] = status_;
  return j;
}

DiagramTable DiagramTable::read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) parts.push_back(cur);
    if (!line.empty() && line.back() == ',') parts.emplace_back();
    return parts;
  };
  std::string line;
  if (!std::getline(in, line)) bad("empty CSV");
  std::vector<std::string> header = split(line);
  const bool with_status = !header.empty() && header.back() == "status";
  if (with_status) header.pop_back();
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts = split(line);
    if (parts.size() != header.size() + (with_status ? 1 : 0)) bad("CSV row width mismatch");
    std::vector<double> vals;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto v = parse_number(parts[c]);
      if (!v) bad("bad CSV number '" + parts[c] + "'");
      vals.push_back(*v);
    }
    rows.push_back(std::move(vals));
    status.push_back(with_status ? parts.back() : std::string());
  }
  // A column is optional in the reread table when any entry is not finite.
  std::vector<bool> optional(header.size(), false);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) optional[c] = optional[c] || !std::isfinite(r[c]);
  }
  DiagramTable t(header, optional, with_status);
  for (std::size_t i = 0; i < rows.size(); ++i) t.add_row(rows[i], status[i]);
  return t;
}

DiagramTable DiagramTable::from_json(const json& j) {
  try {
    const auto cols = j.at("columns").get<std::vector<std::string>>();
    std::vector<bool> opt(cols.size(), false);
    if (j.contains("optional")) opt = j.at("optional").get<std::vector<bool>>();
    const bool with_status = j.contains("status");
    DiagramTable t(cols, opt, with_status);
    const json& rows = j.at("rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<double> vals;
      for (const json& v : rows[i]) vals.push_back(json_real(v));
      t.add_row(std::move(vals), with_status ? j.at("status").at(i).get<std::string>() : "");
    }
    return t;
  } catch (const json::exception& e) {
    bad(std::string("malformed table JSON: ") + e.what());
  }
}

bool DiagramTable::operator==(const DiagramTable& o) const {
  if (columns_ != o.columns_ || with_status_ != o.with_status_ || rows_.size() != o.rows_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (status_[i] != o.status_[i]) return false;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const double a = rows_[i][c], b = o.rows_[i][c];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
  }
  return true;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(std::ostream& out, const json& j) {
  emit(out, j, 0);
  out << "\n";
}

void write_branch_svg(std::ostream& out, const std::vector<BranchState>& states, double H0) {
  const double W = 640, Ht = 420, ml = 80, mr = 20, mt = 20, mb = 60;
  double xlo = H0, xhi = H0, ylo = 0.0, yhi = 0.0;
  for (const auto& s : states) {
    xlo = std::min(xlo, s.H);
    xhi = std::max(xhi, s.H);
    ylo = std::min(ylo, s.epsilon);
    yhi = std::max(yhi, s.epsilon);
  }
  auto widen = [](double& lo, double& hi) {
    double span = hi - lo;
    if (span <= 0.0) span = std::max(1e-6, std::abs(hi) * 1e-3);
    lo -= 0.05 * span;
    hi += 0.05 * span;
  };
  widen(xlo, xhi);
  widen(ylo, yhi);
  auto X = [&](double h) { return ml + (h - xlo) / (xhi - xlo) * (W - ml - mr); };
  auto Y = [&](double e) { return Ht - mb - (e - ylo) / (yhi - ylo) * (Ht - mt - mb); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(W) << "\" height=\"" << f(Ht)
      << "\" viewBox=\"0 0 " << f(W) << " " << f(Ht) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << f(W) << "\" height=\"" << f(Ht) << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << f(ml) << "\" y1=\"" << f(Ht - mb) << "\" x2=\"" << f(W - mr) << "\" y2=\""
      << f(Ht - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << f(ml) << "\" y1=\"" << f(mt) << "\" x2=\"" << f(ml) << "\" y2=\""
      << f(Ht - mb) << "\" stroke=\"black\"/>\n";
  // trivial branch
  out << "<line x1=\"" << f(ml) << "\" y1=\"" << f(Y(0.0)) << "\" x2=\"" << f(W - mr) << "\" y2=\""
      << f(Y(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  out << "<circle cx=\"" << f(X(H0)) << "\" cy=\"" << f(Y(0.0))
      << "\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n";
  if (!states.empty()) {
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < states.size(); ++i) {
      out << (i ? " " : "") << f(X(states[i].H)) << "," << f(Y(states[i].epsilon));
    }
    out << "\"/>\n";
    for (const auto& s : states) {
      out << "<circle cx=\"" << f(X(s.H)) << "\" cy=\"" << f(Y(s.epsilon))
          << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
  }
  out << "<text x=\"" << f(0.5 * (ml + W - mr)) << "\" y=\"" << f(Ht - 15)
      << "\" text-anchor=\"middle\" font-size=\"14\">H</text>\n";
  out << "<text x=\"20\" y=\"" << f(0.5 * (mt + Ht - mb))
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << f(0.5 * (mt + Ht - mb)) << ")\">epsilon</text>\n";
  out << "<text x=\"" << f(ml) << "\" y=\"" << f(Ht - mb + 18) << "\" font-size=\"11\">" << f(xlo)
      << "</text>\n";
  out << "<text x=\"" << f(W - mr) << "\" y=\"" << f(Ht - mb + 18)
      << "\" text-anchor=\"end\" font-size=\"11\">" << f(xhi) << "</text>\n";
  out << "<text x=\"" << f(ml - 6) << "\" y=\"" << f(Ht - mb)
      << "\" text-anchor=\"end\" font-size=\"11\">" << f(ylo) << "</text>\n";
  out << "<text x=\"" << f(ml - 6) << "\" y=\"" << f(mt + 10)
      << "\" text-anchor=\"end\" font-size=\"11\">" << f(yhi) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace cmc
