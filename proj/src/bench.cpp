#include "flowrl/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "flowrl/graph.hpp"

namespace flowrl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Shortest decimal form that parses back to the same double.
std::string fmtNum(Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

long parseLong(const std::string& v, const std::string& key) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  requireInput(res.ec == std::errc{} && res.ptr == v.data() + v.size(),
               "scenario: bad integer for " + key + ": '" + v + "'");
  return out;
}

int parseInt(const std::string& v, const std::string& key) {
  return static_cast<int>(parseLong(v, key));
}

std::uint64_t parseU64(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  requireInput(res.ec == std::errc{} && res.ptr == v.data() + v.size(),
               "scenario: bad unsigned integer for " + key + ": '" + v + "'");
  return out;
}

Scalar parseNum(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const Scalar out = std::stod(v, &pos);
    requireInput(pos == v.size(), "scenario: bad number for " + key + ": '" + v + "'");
    return out;
  } catch (const std::logic_error&) {
    throw InputError("scenario: bad number for " + key + ": '" + v + "'");
  }
}

std::vector<std::string> splitList(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

std::vector<int> parseIntList(const std::string& v, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : splitList(v)) out.push_back(parseInt(part, key));
  requireInput(!out.empty(), "scenario: empty list for " + key);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> parsePairList(const std::string& v, const std::string& key) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& part : splitList(v)) {
    const auto dash = part.find('-');
    requireInput(dash != std::string::npos, "scenario: expected src-dst pairs for " + key);
    out.emplace_back(parseInt(trim(part.substr(0, dash)), key),
                     parseInt(trim(part.substr(dash + 1)), key));
  }
  return out;
}

bool applyTrafficKey(TrafficProfile& profile, const std::string& field, const std::string& value,
                     const std::string& key) {
  if (field == "rate_min") {
    profile.rateMinMbps = parseNum(value, key);
  } else if (field == "rate_max") {
    profile.rateMaxMbps = parseNum(value, key);
  } else if (field == "concurrent_min") {
    profile.concurrentMin = parseInt(value, key);
  } else if (field == "concurrent_max") {
    profile.concurrentMax = parseInt(value, key);
  } else if (field == "pairs") {
    profile.pairs = value == "all" ? std::vector<std::pair<NodeId, NodeId>>{}
                                   : parsePairList(value, key);
  } else {
    return false;
  }
  return true;
}

std::string pairsToString(const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  if (pairs.empty()) return "all";
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(pairs[i].first) + '-' + std::to_string(pairs[i].second);
  }
  return out;
}

}  // namespace

std::string toString(AgentKind kind) {
  switch (kind) {
    case AgentKind::Dgcnn: return "dgcnn";
    case AgentKind::Mlp: return "mlp";
    case AgentKind::Ospf: return "ospf";
  }
  return "?";
}

AgentKind agentKindFromString(const std::string& s) {
  if (s == "dgcnn") return AgentKind::Dgcnn;
  if (s == "mlp") return AgentKind::Mlp;
  if (s == "ospf") return AgentKind::Ospf;
  throw InputError("unknown agent kind: '" + s + "'");
}

ScenarioSpec parseScenario(std::istream& in) {
  ScenarioSpec spec;
  // shift episode -> raw field overrides, applied cumulatively in episode order
  std::map<int, std::map<std::string, std::string>> shiftKeys;

  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    requireInput(eq != std::string::npos,
                 "scenario: expected key = value on line " + std::to_string(lineNo));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    requireInput(!key.empty() && !value.empty(),
                 "scenario: empty key or value on line " + std::to_string(lineNo));

    if (key == "topology.kind") {
      if (value == "random") {
        spec.topology.kind = TopologySource::Kind::Random;
      } else if (value == "nsfnet") {
        spec.topology.kind = TopologySource::Kind::Nsfnet;
      } else if (value == "file") {
        spec.topology.kind = TopologySource::Kind::File;
      } else {
        throw InputError("scenario: unknown topology.kind '" + value + "'");
      }
    } else if (key == "topology.nodes") {
      spec.topology.nodes = parseInt(value, key);
    } else if (key == "topology.links") {
      spec.topology.links = parseInt(value, key);
    } else if (key == "topology.file") {
      spec.topology.file = value;
    } else if (key == "agent") {
      spec.agent = agentKindFromString(value);
    } else if (key == "episodes") {
      spec.episodes = parseInt(value, key);
    } else if (key == "flows_per_episode") {
      spec.flowsPerEpisode = parseInt(value, key);
    } else if (key == "candidate_k") {
      spec.candidateK = parseInt(value, key);
    } else if (key == "seed") {
      spec.seed = parseU64(value, key);
    } else if (key.rfind("traffic.", 0) == 0) {
      requireInput(applyTrafficKey(spec.traffic, key.substr(8), value, key),
                   "scenario: unknown key '" + key + "'");
    } else if (key.rfind("shift.", 0) == 0) {
      const std::string rest = key.substr(6);
      const auto dot = rest.find('.');
      requireInput(dot != std::string::npos, "scenario: expected shift.<episode>.<field>");
      const int episode = parseInt(rest.substr(0, dot), key);
      shiftKeys[episode][rest.substr(dot + 1)] = value;
    } else if (key == "hyper.learning_rate") {
      spec.hyper.learningRate = parseNum(value, key);
    } else if (key == "hyper.gamma") {
      spec.hyper.gamma = parseNum(value, key);
    } else if (key == "hyper.batch_size") {
      spec.hyper.batchSize = parseInt(value, key);
    } else if (key == "hyper.updates_per_session") {
      spec.hyper.updatesPerSession = parseInt(value, key);
    } else if (key == "hyper.target_sync_interval") {
      spec.hyper.targetSyncInterval = parseInt(value, key);
    } else if (key == "hyper.replay_capacity") {
      spec.hyper.replayCapacity = parseInt(value, key);
    } else if (key == "hyper.priority_beta") {
      spec.hyper.priorityBeta = parseNum(value, key);
    } else if (key == "hyper.epsilon_initial") {
      spec.hyper.epsilonInitial = parseNum(value, key);
    } else if (key == "hyper.epsilon_decay") {
      spec.hyper.epsilonDecay = parseNum(value, key);
    } else if (key == "hyper.epsilon_floor") {
      spec.hyper.epsilonFloor = parseNum(value, key);
    } else if (key == "hyper.grad_clip_norm") {
      spec.hyper.gradClipNorm = parseNum(value, key);
    } else if (key == "hyper.monitor_window") {
      spec.hyper.monitorWindow = parseInt(value, key);
    } else if (key == "hyper.monitor_band") {
      spec.hyper.monitorBand = parseNum(value, key);
    } else if (key == "dgcnn.graph_conv_sizes") {
      spec.dgcnn.graphConvSizes = parseIntList(value, key);
    } else if (key == "dgcnn.conv_channels") {
      const auto channels = parseIntList(value, key);
      requireInput(channels.size() == 2, "scenario: dgcnn.conv_channels needs exactly 2 entries");
      spec.dgcnn.conv1Channels = channels[0];
      spec.dgcnn.conv2Channels = channels[1];
    } else if (key == "dgcnn.conv2_width") {
      spec.dgcnn.conv2Width = parseInt(value, key);
    } else if (key == "dgcnn.pool_width") {
      spec.dgcnn.poolWidth = parseInt(value, key);
    } else if (key == "dgcnn.pool_stride") {
      spec.dgcnn.poolStride = parseInt(value, key);
    } else if (key == "dgcnn.dense_size") {
      spec.dgcnn.denseSize = parseInt(value, key);
    } else if (key == "mlp.hidden_sizes") {
      spec.mlp.hiddenSizes = parseIntList(value, key);
    } else {
      throw InputError("scenario: unknown key '" + key + "'");
    }
  }

  TrafficProfile cursor = spec.traffic;
  for (const auto& [episode, fields] : shiftKeys) {
    requireInput(episode >= 0, "scenario: negative shift episode");
    TrafficProfile profile = cursor;
    for (const auto& [field, value] : fields) {
      requireInput(applyTrafficKey(profile, field, value, "shift." + std::to_string(episode) + "." + field),
                   "scenario: unknown shift field '" + field + "'");
    }
    spec.shifts[episode] = profile;
    cursor = profile;
  }
  for (const auto& [episode, profile] : spec.shifts) {
    requireInput(episode < spec.episodes, "scenario: shift episode beyond the run");
    (void)profile;
  }
  return spec;
}

ScenarioSpec loadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  requireInput(in.good(), "cannot open scenario file: " + path);
  return parseScenario(in);
}

void writeScenario(const ScenarioSpec& spec, std::ostream& out) {
  switch (spec.topology.kind) {
    case TopologySource::Kind::Random:
      out << "topology.kind = random\n";
      out << "topology.nodes = " << spec.topology.nodes << "\n";
      out << "topology.links = " << spec.topology.links << "\n";
      break;
    case TopologySource::Kind::Nsfnet:
      out << "topology.kind = nsfnet\n";
      break;
    case TopologySource::Kind::File:
      out << "topology.kind = file\n";
      out << "topology.file = " << spec.topology.file << "\n";
      break;
  }
  out << "agent = " << toString(spec.agent) << "\n";
  out << "episodes = " << spec.episodes << "\n";
  out << "flows_per_episode = " << spec.flowsPerEpisode << "\n";
  out << "candidate_k = " << spec.candidateK << "\n";
  out << "seed = " << spec.seed << "\n";
  auto writeProfile = [&out](const std::string& prefix, const TrafficProfile& p) {
    out << prefix << "rate_min = " << fmtNum(p.rateMinMbps) << "\n";
    out << prefix << "rate_max = " << fmtNum(p.rateMaxMbps) << "\n";
    out << prefix << "concurrent_min = " << p.concurrentMin << "\n";
    out << prefix << "concurrent_max = " << p.concurrentMax << "\n";
    out << prefix << "pairs = " << pairsToString(p.pairs) << "\n";
  };
  writeProfile("traffic.", spec.traffic);
  for (const auto& [episode, profile] : spec.shifts) {
    writeProfile("shift." + std::to_string(episode) + ".", profile);
  }
  out << "hyper.learning_rate = " << fmtNum(spec.hyper.learningRate) << "\n";
  out << "hyper.gamma = " << fmtNum(spec.hyper.gamma) << "\n";
  out << "hyper.batch_size = " << spec.hyper.batchSize << "\n";
  out << "hyper.updates_per_session = " << spec.hyper.updatesPerSession << "\n";
  out << "hyper.target_sync_interval = " << spec.hyper.targetSyncInterval << "\n";
  out << "hyper.replay_capacity = " << spec.hyper.replayCapacity << "\n";
  out << "hyper.priority_beta = " << fmtNum(spec.hyper.priorityBeta) << "\n";
  out << "hyper.epsilon_initial = " << fmtNum(spec.hyper.epsilonInitial) << "\n";
  out << "hyper.epsilon_decay = " << fmtNum(spec.hyper.epsilonDecay) << "\n";
  out << "hyper.epsilon_floor = " << fmtNum(spec.hyper.epsilonFloor) << "\n";
  out << "hyper.grad_clip_norm = " << fmtNum(spec.hyper.gradClipNorm) << "\n";
  out << "hyper.monitor_window = " << spec.hyper.monitorWindow << "\n";
  out << "hyper.monitor_band = " << fmtNum(spec.hyper.monitorBand) << "\n";
  if (spec.agent == AgentKind::Dgcnn) {
    out << "dgcnn.graph_conv_sizes =";
    for (std::size_t i = 0; i < spec.dgcnn.graphConvSizes.size(); ++i) {
      out << (i ? "," : " ") << spec.dgcnn.graphConvSizes[i];
    }
    out << "\n";
    out << "dgcnn.conv_channels = " << spec.dgcnn.conv1Channels << "," << spec.dgcnn.conv2Channels
        << "\n";
    out << "dgcnn.conv2_width = " << spec.dgcnn.conv2Width << "\n";
    out << "dgcnn.pool_width = " << spec.dgcnn.poolWidth << "\n";
    out << "dgcnn.pool_stride = " << spec.dgcnn.poolStride << "\n";
    out << "dgcnn.dense_size = " << spec.dgcnn.denseSize << "\n";
  }
  if (spec.agent == AgentKind::Mlp) {
    out << "mlp.hidden_sizes =";
    for (std::size_t i = 0; i < spec.mlp.hiddenSizes.size(); ++i) {
      out << (i ? "," : " ") << spec.mlp.hiddenSizes[i];
    }
    out << "\n";
  }
}

MetricSeries aggregateMetrics(const std::vector<FlowRecord>& flows, int flowsPerEpisode) {
  require(flowsPerEpisode >= 1, "aggregateMetrics: flows per episode must be positive");
  MetricSeries series;
  const int episodes = static_cast<int>(flows.size()) / flowsPerEpisode;
  series.excludedFlows = static_cast<int>(flows.size()) % flowsPerEpisode;
  series.perEpisode.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeRecord record;
    record.episode = ep;
    record.epsilon = std::numeric_limits<Scalar>::quiet_NaN();
    int congested = 0;
    for (int f = 0; f < flowsPerEpisode; ++f) {
      const FlowRecord& flow = flows[static_cast<std::size_t>(ep) * flowsPerEpisode + f];
      record.meanReward += flow.reward;
      record.meanThroughputMbps += flow.rateAllocMbps;
      record.meanDelayMs += flow.delayMs;
      congested += flow.congestion ? 1 : 0;
    }
    record.meanReward /= flowsPerEpisode;
    record.meanThroughputMbps /= flowsPerEpisode;
    record.meanDelayMs /= flowsPerEpisode;
    record.congestionRate = static_cast<Scalar>(congested) / flowsPerEpisode;
    series.perEpisode.push_back(record);
  }
  series.smoothed = smoothSeries(series.perEpisode);
  return series;
}

std::vector<EpisodeRecord> smoothSeries(const std::vector<EpisodeRecord>& raw, int window) {
  require(window >= 1, "smoothSeries: window must be positive");
  std::vector<EpisodeRecord> out;
  const int blocks = static_cast<int>(raw.size()) / window;
  out.reserve(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    EpisodeRecord record;
    record.episode = b;
    for (int i = 0; i < window; ++i) {
      const EpisodeRecord& r = raw[static_cast<std::size_t>(b) * window + i];
      record.meanReward += r.meanReward;
      record.meanThroughputMbps += r.meanThroughputMbps;
      record.meanDelayMs += r.meanDelayMs;
      record.epsilon += r.epsilon;
      record.congestionRate += r.congestionRate;
    }
    record.meanReward /= window;
    record.meanThroughputMbps /= window;
    record.meanDelayMs /= window;
    record.epsilon /= window;
    record.congestionRate /= window;
    out.push_back(record);
  }
  return out;
}

Path ospfRoute(const Topology& topo, NodeId src, NodeId dst) {
  Path path = shortestPath(topo, src, dst);
  requireInput(!path.empty(), "ospfRoute: destination unreachable");
  return path;
}

namespace {

Topology buildTopology(const ScenarioSpec& spec) {
  switch (spec.topology.kind) {
    case TopologySource::Kind::Random:
      return generateRandomTopology(spec.topology.nodes, spec.topology.links,
                                    deriveSeed(spec.seed, seedstream::kTopology));
    case TopologySource::Kind::Nsfnet:
      return nsfnet();
    case TopologySource::Kind::File:
      return loadTopologyFile(spec.topology.file);
  }
  throw InputError("scenario: bad topology source");
}

void validateFlowRecords(const std::vector<FlowRecord>& flows) {
  for (const FlowRecord& f : flows) {
    const Scalar expected = f.rateAllocMbps / f.request.rateReqMbps + 1.0 / f.delayMs;
    if (std::abs(expected - f.reward) > 1e-9) {
      throw DivergenceError("flow log inconsistent: reward does not match its components");
    }
  }
}

}  // namespace

ScenarioResult runScenario(const ScenarioSpec& spec, const std::string& outDir,
                           const ProgressFn& progress) {
  requireInput(spec.episodes >= 1, "scenario: episodes must be positive");
  requireInput(spec.flowsPerEpisode >= 1, "scenario: flows per episode must be positive");

  Topology topo = buildTopology(spec);
  Environment env(std::move(topo), spec.candidateK);
  TrafficGenerator traffic(spec.traffic, env.topology().nodeCount(),
                           deriveSeed(spec.seed, seedstream::kTraffic));
  const ShiftSchedule shifts{spec.shifts};

  RunResult run;
  std::optional<QModel> model;
  if (spec.agent == AgentKind::Ospf) {
    // Static minimum-hop policy: the first candidate path shares the OSPF
    // metric and tie-break.
    const PolicyFn policy = [](const NetworkState&, const FlowRequest&) { return 0; };
    run = runPolicy(env, traffic, policy, spec.episodes, spec.flowsPerEpisode, shifts, progress);
  } else {
    QModel main = spec.agent == AgentKind::Dgcnn
                      ? QModel::dgcnn(env.topology().nodeCount(), spec.candidateK, spec.dgcnn,
                                      deriveSeed(spec.seed, seedstream::kInit))
                      : QModel::mlp(env.topology().nodeCount(), spec.candidateK, spec.mlp,
                                    deriveSeed(spec.seed, seedstream::kInit));
    DqnAgent agent(std::move(main), spec.hyper, env.candidates(),
                   deriveSeed(spec.seed, seedstream::kPolicy),
                   deriveSeed(spec.seed, seedstream::kReplay));
    run = runTraining(env, traffic, agent, spec.episodes, spec.flowsPerEpisode, shifts, progress);
    model = agent.model();
  }

  validateFlowRecords(run.flows);

  ScenarioResult result{env.topology(), MetricSeries{}, std::move(run), std::move(model)};
  result.metrics.perEpisode = result.run.episodes;
  result.metrics.smoothed = smoothSeries(result.run.episodes);

  if (!outDir.empty()) {
    std::filesystem::create_directories(outDir);
    const auto dir = std::filesystem::path(outDir);
    {
      std::ofstream echo(dir / "scenario.echo.scn");
      requireInput(echo.good(), "cannot write scenario echo in " + outDir);
      writeScenario(spec, echo);
    }
    {
      std::ofstream metrics(dir / "metrics.csv");
      writeMetricsCsv(result.metrics.perEpisode, spec.agent != AgentKind::Ospf, metrics);
    }
    {
      std::ofstream smoothed(dir / "metrics_smoothed.csv");
      writeMetricsCsv(result.metrics.smoothed, spec.agent != AgentKind::Ospf, smoothed, "block");
    }
    if (result.model) result.model->saveFile((dir / "checkpoint.bin").string());
  }
  return result;
}

StressTable runFrozenStressTest(const Topology& topo,
                                std::vector<std::pair<std::string, QModel>> models,
                                std::uint64_t seed, const StressSpec& spec) {
  for (const auto& [name, model] : models) {
    requireInput(model.nodeCount() == topo.nodeCount(),
                 "stress test: checkpoint '" + name + "' does not match the topology");
    requireInput(model.k() == spec.candidateK,
                 "stress test: checkpoint '" + name + "' action width differs from candidate_k");
  }

  StressTable table;
  for (Scalar lo = spec.startRateMin, hi = spec.startRateMax;;) {
    table.rateMinMbps.push_back(lo);
    table.rateMaxMbps.push_back(hi);
    table.centralRateMbps.push_back((lo + hi) / 2);
    if (lo >= spec.finalRateMin || hi >= spec.finalRateMax) break;
    lo += spec.stepMbps;
    hi += spec.stepMbps;
  }
  const int blocks = static_cast<int>(table.centralRateMbps.size());
  const int episodes = blocks * spec.episodesPerBlock;

  auto makeProfile = [&spec, &table](int block) {
    TrafficProfile profile;
    profile.rateMinMbps = table.rateMinMbps[static_cast<std::size_t>(block)];
    profile.rateMaxMbps = table.rateMaxMbps[static_cast<std::size_t>(block)];
    profile.concurrentMin = spec.concurrentMin;
    profile.concurrentMax = spec.concurrentMax;
    return profile;
  };
  ShiftSchedule shifts;
  for (int b = 1; b < blocks; ++b) shifts.atEpisode[b * spec.episodesPerBlock] = makeProfile(b);

  const long flowsPerBlock = static_cast<long>(spec.episodesPerBlock) * spec.flowsPerEpisode;
  auto collect = [&](const std::string& name, const RunResult& run) {
    StressPolicySeries series;
    series.name = name;
    series.throughputMbps.assign(static_cast<std::size_t>(blocks), 0.0);
    series.delayMs.assign(static_cast<std::size_t>(blocks), 0.0);
    for (std::size_t i = 0; i < run.flows.size(); ++i) {
      const auto block = static_cast<std::size_t>(static_cast<long>(i) / flowsPerBlock);
      series.throughputMbps[block] += run.flows[i].rateAllocMbps;
      series.delayMs[block] += run.flows[i].delayMs;
    }
    for (auto& v : series.throughputMbps) v /= static_cast<Scalar>(flowsPerBlock);
    for (auto& v : series.delayMs) v /= static_cast<Scalar>(flowsPerBlock);
    return series;
  };

  {
    Environment env(topo, spec.candidateK);
    TrafficGenerator traffic(makeProfile(0), topo.nodeCount(), seed);
    const PolicyFn policy = [](const NetworkState&, const FlowRequest&) { return 0; };
    table.policies.push_back(
        collect("ospf", runPolicy(env, traffic, policy, episodes, spec.flowsPerEpisode, shifts)));
  }
  for (auto& [name, model] : models) {
    Environment env(topo, spec.candidateK);
    const CandidatePathTable& candidates = env.candidates();
    TrafficGenerator traffic(makeProfile(0), topo.nodeCount(), seed);
    QModel* frozen = &model;
    const PolicyFn policy = [frozen, &candidates](const NetworkState& state,
                                                  const FlowRequest& request) {
      const Vector q = frozen->forward(state);
      return greedyAction(q, candidates.validPathCount(request.src, request.dst));
    };
    table.policies.push_back(
        collect(name, runPolicy(env, traffic, policy, episodes, spec.flowsPerEpisode, shifts)));
  }
  return table;
}

void writeMetricsCsv(const std::vector<EpisodeRecord>& series, bool includeEpsilon,
                     std::ostream& out, const std::string& indexName) {
  out << "# flowrl-metrics-v1\n";
  out << indexName << ",mean_reward,mean_throughput_mbps,mean_delay_ms";
  if (includeEpsilon) out << ",epsilon";
  out << ",congestion_rate\n";
  for (const EpisodeRecord& r : series) {
    out << r.episode << ',' << fmtNum(r.meanReward) << ',' << fmtNum(r.meanThroughputMbps) << ','
        << fmtNum(r.meanDelayMs);
    if (includeEpsilon) out << ',' << fmtNum(r.epsilon);
    out << ',' << fmtNum(r.congestionRate) << '\n';
  }
}

void writeStressCsv(const StressTable& table, std::ostream& out) {
  out << "# flowrl-stress-v1\n";
  out << "block,rate_min_mbps,rate_max_mbps,central_rate_mbps";
  for (const auto& policy : table.policies) {
    out << ',' << policy.name << "_throughput_mbps," << policy.name << "_delay_ms";
  }
  out << '\n';
  for (std::size_t b = 0; b < table.centralRateMbps.size(); ++b) {
    out << b << ',' << fmtNum(table.rateMinMbps[b]) << ',' << fmtNum(table.rateMaxMbps[b]) << ','
        << fmtNum(table.centralRateMbps[b]);
    for (const auto& policy : table.policies) {
      out << ',' << fmtNum(policy.throughputMbps[b]) << ',' << fmtNum(policy.delayMs[b]);
    }
    out << '\n';
  }
}

}  // namespace flowrl
