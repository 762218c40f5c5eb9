#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowrl/agent.hpp"
#include "flowrl/env.hpp"
#include "flowrl/qmodel.hpp"
#include "flowrl/topology.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

enum class AgentKind { Dgcnn, Mlp, Ospf };
std::string toString(AgentKind kind);
AgentKind agentKindFromString(const std::string& s);

struct TopologySource {
  enum class Kind { Random, Nsfnet, File };
  Kind kind = Kind::Random;
  int nodes = 9;
  int links = 16;
  std::string file;
};

// Parsed scenario: topology source, traffic profile(s) with shift schedule,
// agent kind, episode budget, hyper-parameters, seed.
struct ScenarioSpec {
  TopologySource topology;
  AgentKind agent = AgentKind::Dgcnn;
  int episodes = 2000;
  int flowsPerEpisode = 100;
  int candidateK = 3;
  TrafficProfile traffic;
  std::map<int, TrafficProfile> shifts;
  DqnHyper hyper;
  DgcnnConfig dgcnn;
  MlpConfig mlp;
  std::uint64_t seed = 1;
};

// Key = value text format, `#` comments. See scenarios/ for samples.
ScenarioSpec parseScenario(std::istream& in);
ScenarioSpec loadScenarioFile(const std::string& path);
void writeScenario(const ScenarioSpec& spec, std::ostream& out);

struct MetricSeries {
  std::vector<EpisodeRecord> perEpisode;
  std::vector<EpisodeRecord> smoothed;  // non-overlapping means of 10 episodes
  int excludedFlows = 0;                // trailing records not forming a full episode
};

// Groups per-flow records into episodes of flowsPerEpisode, takes per-episode
// means, then means of every 10 episode values. A trailing partial episode is
// excluded and counted in excludedFlows.
MetricSeries aggregateMetrics(const std::vector<FlowRecord>& flows, int flowsPerEpisode);
std::vector<EpisodeRecord> smoothSeries(const std::vector<EpisodeRecord>& raw, int window = 10);

// Minimum-hop path with deterministic lexicographic tie-break; ignores load.
Path ospfRoute(const Topology& topo, NodeId src, NodeId dst);

struct ScenarioResult {
  Topology topology;
  MetricSeries metrics;
  RunResult run;
  std::optional<QModel> model;  // trained main model for DRL agents
};

// Executes the scenario; when outDir is non-empty writes metrics.csv,
// metrics_smoothed.csv, scenario.echo.scn, and checkpoint.bin (DRL agents).
ScenarioResult runScenario(const ScenarioSpec& spec, const std::string& outDir = "",
                           const ProgressFn& progress = nullptr);

struct StressSpec {
  Scalar startRateMin = 40;
  Scalar startRateMax = 60;
  Scalar stepMbps = 5;       // added to both endpoints every block
  Scalar finalRateMin = 80;  // schedule stops once the range reaches this
  Scalar finalRateMax = 100;
  int episodesPerBlock = 10;
  int flowsPerEpisode = 100;
  int concurrentMin = 10;
  int concurrentMax = 20;
  int candidateK = 3;
};

struct StressPolicySeries {
  std::string name;
  std::vector<Scalar> throughputMbps;  // per block, mean over flows
  std::vector<Scalar> delayMs;
};

struct StressTable {
  std::vector<Scalar> rateMinMbps;
  std::vector<Scalar> rateMaxMbps;
  std::vector<Scalar> centralRateMbps;
  std::vector<StressPolicySeries> policies;  // ospf first, then the given models
};

// Replays one seeded request sequence against OSPF and each frozen model
// (greedy, no learning) while the offered rate escalates per block. Models
// must match the topology's node count.
StressTable runFrozenStressTest(const Topology& topo,
                                std::vector<std::pair<std::string, QModel>> models,
                                std::uint64_t seed, const StressSpec& spec = {});

void writeMetricsCsv(const std::vector<EpisodeRecord>& series, bool includeEpsilon,
                     std::ostream& out, const std::string& indexName = "episode");
void writeStressCsv(const StressTable& table, std::ostream& out);

}  // namespace flowrl
