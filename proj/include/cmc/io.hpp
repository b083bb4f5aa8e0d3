#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmc/bifurcation.hpp"
#include "cmc/geometry.hpp"

namespace cmc {

// "3pi/4", "pi", "-pi/2", "2*pi/3", "0.25pi", or a plain number. Radians.
double parse_angle(const std::string& text);
double parse_angle(const nlohmann::json& value);
inline double parse_angle(const char* text) { return parse_angle(std::string(text)); }

struct NumericsBlock {
  int nt = 64;
  int ns = 64;
  int oracle_ns = 1001;
  double newton_tol = 1e-10;
  int max_newton_iter = 30;
};

struct SweepBlock {
  std::string command = "critical";  // critical | stability
  std::string axis = "gamma";        // gamma | beta | r | h
  std::vector<double> values;
};

struct TaskBlock {
  std::optional<double> h;  // truncation length (spectrum, stability)
  int m = 5;
  TMode t_mode = TMode::HalfPeriodNeumann;
  int steps = 20;
  double ds = 0.01;
  double epsilon0 = 0.01;
  bool write_obj = false;
  SweepBlock sweep;
};

struct OutputBlock {
  std::string dir = ".";
  std::string format = "csv";  // csv | json
};

struct RunConfig {
  CylinderConfig scenario;
  NumericsBlock numerics;
  TaskBlock task;
  OutputBlock output;
};

// Throws InvalidConfig on unknown keys, wrong types or violated invariants.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

TMode parse_t_mode(const std::string& s);

// Rows of named real columns plus an optional per-row status label.
class DiagramTable {
 public:
  DiagramTable() = default;
  DiagramTable(std::vector<std::string> columns, std::vector<bool> optional, bool with_status);

  const std::vector<std::string>& columns() const { return columns_; }
  bool optional(std::size_t c) const { return optional_[c]; }
  bool has_status() const { return with_status_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<double>& row(std::size_t i) const { return rows_[i]; }
  const std::string& status(std::size_t i) const { return status_[i]; }
  double at(std::size_t i, const std::string& column) const;

  // Non-optional columns must be finite.
  void add_row(std::vector<double> values, std::string status = {});
  void append(const DiagramTable& other);

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;

  static DiagramTable read_csv(std::istream& in);
  static DiagramTable from_json(const nlohmann::json& j);

  bool operator==(const DiagramTable& o) const;

 private:
  std::vector<std::string> columns_;
  std::vector<bool> optional_;
  bool with_status_ = false;
  std::vector<std::vector<double>> rows_;
  std::vector<std::string> status_;
};

// %.17g, with "nan"/"inf" spelled out.
std::string format_real(double v);

// JSON with every number printed at 17 significant digits; NaN becomes null.
void write_json(std::ostream& out, const nlohmann::json& j);

// Branch diagram: H on x, epsilon on y, trivial branch drawn at epsilon = 0.
void write_branch_svg(std::ostream& out, const std::vector<BranchState>& states, double H0);

}  // namespace cmc
