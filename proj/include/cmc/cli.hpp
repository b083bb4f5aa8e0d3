#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmc/bifurcation.hpp"
#include "cmc/errors.hpp"
#include "cmc/io.hpp"

namespace cmc {

// 0 success, 2 config, 3 solver, 4 no bifurcation, 5 continuation stalled.
int exit_code_for(ErrorCode code) noexcept;

// k, n, lambda_closed, lambda_oracle, rel_err for the m smallest modes on a
// truncation of length task.h. Wedge rows past the first arc mode have no
// closed form (NaN).
DiagramTable cmd_spectrum(const RunConfig& rc);

nlohmann::json cmd_stability(const RunConfig& rc);

// {h0, T, theorem_case, ...}; throws NoCriticalLength / NoBifurcation.
nlohmann::json cmd_critical(const RunConfig& rc);

struct BifurcateResult {
  BifurcationPoint point;
  nlohmann::json report;
  DiagramTable kernel;  // i, j, t, s, value
};
BifurcateResult cmd_bifurcate(const RunConfig& rc);

struct TraceResult {
  BifurcationPoint point;
  std::vector<BranchState> states;
  DiagramTable table;  // step, arclength, epsilon, H, residual_norm, symmetry_defect, non_rotationality
  nlohmann::json summary;
};
TraceResult cmd_trace(const RunConfig& rc);

// One row per value along task.sweep.axis, computed by a pool of `threads`
// workers and merged in input order. Failures become the row status.
DiagramTable cmd_sweep(const RunConfig& rc, int threads);

// Runs a subcommand and writes its files into out_dir. Returns the exit code;
// errors are reported on err.
int run_command(const std::string& name, const RunConfig& rc, const std::string& out_dir,
                const std::string& format, int threads, std::ostream& out, std::ostream& err);

// --threads, else CMC_BIFURCATE_THREADS, else 1.
int resolve_threads(int flag_value);

}  // namespace cmc
