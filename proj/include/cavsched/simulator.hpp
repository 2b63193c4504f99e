#pragma once

#include "cavsched/conflict_graph.hpp"
#include "cavsched/platoon.hpp"
#include "cavsched/scenario.hpp"
#include "cavsched/scheduler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cavsched {

enum class Mode
{
  Batch,
  Online
};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

struct SimConfig
{
  IntersectionConfig scenario = default_intersection();
  Algorithm algorithm = Algorithm::Idfst;
  int n_vehicles = 30;
  double lambda = 3.0; // s, mean headway per lane
  std::uint64_t seed = 1;
  Mode mode = Mode::Online;
  ControllerGains gains;
  /// Leader remaining distance at t = 0; unset means the default below.
  std::optional<double> leader_start;
  double horizon = 3600.0; // simulated s
  bool record_trace = false;
  int brute_force_cap = kDefaultBruteForceCap;
};

void validate(const SimConfig& cfg);

/// Places the first layer's slot exactly at the reachability threshold, so a
/// vehicle entering at t = 0 can still make it.
double default_leader_start(const IntersectionConfig& scenario);
double leader_start_of(const SimConfig& cfg);

struct Arrival
{
  int id = 0;
  int movement = 0; // one movement per approach lane
  double t_in = 0.0;

  bool operator==(const Arrival&) const = default;
};

/// Per-lane Poisson arrivals with mean gap lambda, snapped up to the time
/// grid (at most one entry per lane and step), merged, truncated to
/// n_vehicles and numbered in entry order. Same-step ties follow the
/// scenario's lane order.
std::vector<Arrival> sample_arrivals(const SimConfig& cfg);

/// Lane label such as "E3": leg initial followed by the approach lane index.
std::string lane_label(const Movement& m);
int movement_for_lane(std::string_view label, const IntersectionConfig& scenario);

/// Rows "id,lane,t_in"; blank lines, '#' comments and a header row are skipped.
std::vector<Arrival> parse_arrivals(std::string_view text, const IntersectionConfig& scenario);
std::vector<Arrival> load_arrivals_file(const std::string& path, const IntersectionConfig& scenario);
std::string format_arrivals(const std::vector<Arrival>& arrivals, const IntersectionConfig& scenario);

std::vector<VehicleRecord> to_vehicle_records(const std::vector<Arrival>& arrivals,
                                              const IntersectionConfig& scenario);

/// Conflict graph of a whole arrival list, using predicted distances.
ConflictDirectedGraph batch_cdg(const std::vector<Arrival>& arrivals, const IntersectionConfig& scenario);

struct CompletionRecord
{
  int id = 0;
  double t_in = 0.0;
  double t_out = 0.0;
  int depth = 0;
};

struct TraceRow
{
  long step = 0;
  int vehicle = 0;
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
  int depth = 0;
};

struct Metrics
{
  double t_evc = 0.0;
  double t_attd = 0.0;
  int d_all = 0;
  std::vector<CompletionRecord> records; // by id
};

struct RunResult
{
  Metrics metrics;
  std::vector<Arrival> arrivals;
  SpanningTree tree; // depths and parents at crossing time
  std::vector<TraceRow> trace;
};

double evacuation_time(const std::vector<CompletionRecord>& records);
double attd(const std::vector<CompletionRecord>& records, const IntersectionConfig& scenario);

/// Mean time between the first and the last layer's crossings per layer step.
double discharge_interval(const std::vector<CompletionRecord>& records);

RunResult run(const SimConfig& cfg);
RunResult run_with_arrivals(const SimConfig& cfg, const std::vector<Arrival>& arrivals);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

} // namespace cavsched
