#pragma once

#include "cavsched/scenario.hpp"
#include "cavsched/scheduler.hpp"
#include "cavsched/simulator.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cavsched {

struct ResultRow
{
  std::string algorithm;
  std::uint64_t seed = 0;
  int n = 0;
  double lambda = 0.0;
  std::string mode;
  double t_evc = 0.0;
  double t_attd = 0.0;
  int d_all = 0;
};

ResultRow make_row(const SimConfig& cfg, const Metrics& m);

std::string csv_field(const std::string& value);
std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_json(const std::vector<ResultRow>& rows);

struct SweepSpec
{
  IntersectionConfig scenario = default_intersection();
  std::vector<Algorithm> algorithms{Algorithm::Dfst, Algorithm::Idfst, Algorithm::MccGreedy};
  std::vector<int> vehicle_counts{30};
  std::vector<double> lambdas{3.0};
  int repetitions = 1;
  std::uint64_t base_seed = 1;
  Mode mode = Mode::Online;
  std::optional<double> leader_start;
};

/// Runs every (vehicles, lambda) cell for every repetition; all algorithms in
/// a repetition see the same arrivals (seed = base_seed + repetition). Rows
/// come back in (cell, repetition, algorithm) order regardless of `jobs`.
std::vector<ResultRow> run_sweep(const SweepSpec& spec, int jobs = 1);

struct Quartiles
{
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics.
Quartiles describe(std::vector<double> values);

struct SummaryRow
{
  std::string algorithm;
  int n = 0;
  double lambda = 0.0;
  std::string mode;
  int count = 0;
  Quartiles t_evc;
  Quartiles t_attd;
  Quartiles d_all;
};

/// One row per (algorithm, n, lambda, mode), in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);

/// Exit codes: 0 ok, 1 usage, 2 invalid input, 3 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cavsched
