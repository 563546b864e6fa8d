#include "manet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "manet/rng.hpp"

namespace manet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view what) {
  throw ConfigError(std::string(key) + ": " + std::string(what));
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) bad(key, "'" + std::string(v) + "' is not a valid number");
  return out;
}

Range<double> parse_range(std::string_view key, std::string_view v) {
  std::string s(v);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string a, b, extra;
  if (!(in >> a >> b) || (in >> extra)) bad(key, "expected two numbers");
  return {parse_number<double>(key, a), parse_number<double>(key, b)};
}

struct Line {
  int number;
  std::string key;
  std::string value;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": missing key");
    if (value.empty()) bad(key, "missing value");
    out.push_back({number, std::string(key), std::string(value)});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Setter = void (*)(ScenarioConfig&, std::string_view, std::string_view);

struct Key {
  const char* name;
  Setter set;
};

#define MANET_NUM(field, type) \
  {#field, [](ScenarioConfig& c, std::string_view k, std::string_view v) { c.field = parse_number<type>(k, v); }}
#define MANET_RANGE(field) \
  {#field, [](ScenarioConfig& c, std::string_view k, std::string_view v) { c.field = parse_range(k, v); }}

const Key kKeys[] = {
    MANET_NUM(area_x, double),
    MANET_NUM(area_y, double),
    MANET_NUM(node_count, int),
    MANET_RANGE(speed_range),
    MANET_RANGE(radio_range_range),
    MANET_RANGE(initial_energy_range),
    MANET_RANGE(tx_power_range),
    MANET_RANGE(rx_power_range),
    MANET_NUM(hello_interval, SimTime),
    MANET_NUM(packet_size, int),
    MANET_NUM(channel_capacity, double),
    MANET_NUM(pause_time, SimTime),
    MANET_NUM(packet_load, int),
    MANET_NUM(session_arrival_rate, double),
    MANET_NUM(medium_constant_C, double),
    MANET_NUM(ttl, SimTime),
    MANET_NUM(queue_capacity, int),
    {"seed", [](ScenarioConfig& c, std::string_view k, std::string_view v) { c.rng_seed = parse_number<std::uint64_t>(k, v); }},
    {"protocol", [](ScenarioConfig& c, std::string_view, std::string_view v) { c.protocol = parse_protocol(v); }},
    {"variant", [](ScenarioConfig& c, std::string_view, std::string_view v) { c.variant = parse_variant(v); }},
    MANET_NUM(sim_time, SimTime),
    MANET_NUM(cbr_gap_factor, int),
    MANET_NUM(max_attempts, int),
    MANET_NUM(max_discoveries, int),
    MANET_NUM(mac_backoff_window, int),
    MANET_NUM(link_margin_m, double),
    MANET_NUM(cone_half_angle_deg, double),
    MANET_NUM(carrier_sense_factor, double),
};

#undef MANET_NUM
#undef MANET_RANGE

}  // namespace

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : kKeys) {
    if (key == k.name) {
      k.set(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : kKeys) out.emplace_back(k.name);
  return out;
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  for (const auto& l : split_lines(text)) apply_setting(cfg, l.key, l.value);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string_view to_string(SweepAxis a) { return a == SweepAxis::NodeCount ? "node_count" : "packet_load"; }

void SweepSpec::validate() const {
  base.validate();
  if (axis_values.empty()) throw ConfigError("value: at least one axis value is required");
  if (protocols.empty()) throw ConfigError("protocol: at least one protocol is required");
  if (variants.empty()) throw ConfigError("variant: at least one variant is required");
  if (seeds.empty()) throw ConfigError("seed: at least one seed is required");
  if (repetitions < 1) throw ConfigError("repetitions: must be at least 1");
  for (int v : axis_values) {
    ScenarioConfig c = base;
    (axis == SweepAxis::NodeCount ? c.node_count : c.packet_load) = v;
    try {
      c.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("value ") + std::to_string(v) + ": " + e.what());
    }
  }
}

std::vector<ScenarioConfig> SweepSpec::expand() const {
  std::vector<ScenarioConfig> out;
  for (Protocol p : protocols) {
    for (Variant var : variants) {
      for (int v : axis_values) {
        for (std::uint64_t s : seeds) {
          for (int r = 0; r < repetitions; ++r) {
            ScenarioConfig c = base;
            c.protocol = p;
            c.variant = var;
            (axis == SweepAxis::NodeCount ? c.node_count : c.packet_load) = v;
            c.rng_seed = r == 0 ? s : splitmix64(s ^ (static_cast<std::uint64_t>(r) << 40));
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

SweepSpec parse_sweep(std::string_view text) {
  SweepSpec spec;
  bool have_axis = false;
  bool seeds_given = false;
  bool variants_given = false;
  for (const auto& l : split_lines(text)) {
    if (l.key == "axis") {
      if (l.value == "node_count") {
        spec.axis = SweepAxis::NodeCount;
      } else if (l.value == "packet_load") {
        spec.axis = SweepAxis::PacketLoad;
      } else {
        bad("axis", "expected node_count or packet_load, got '" + l.value + "'");
      }
      have_axis = true;
    } else if (l.key == "value") {
      spec.axis_values.push_back(parse_number<int>(l.key, l.value));
    } else if (l.key == "protocol") {
      spec.protocols.push_back(parse_protocol(l.value));
    } else if (l.key == "variant") {
      if (!variants_given) spec.variants.clear();
      variants_given = true;
      spec.variants.push_back(parse_variant(l.value));
    } else if (l.key == "seed") {
      if (!seeds_given) spec.seeds.clear();
      seeds_given = true;
      spec.seeds.push_back(parse_number<std::uint64_t>(l.key, l.value));
    } else if (l.key == "repetitions") {
      spec.repetitions = parse_number<int>(l.key, l.value);
    } else {
      apply_setting(spec.base, l.key, l.value);
    }
  }
  if (!have_axis) throw ConfigError("axis: required field missing");
  if (spec.protocols.empty()) spec.protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
  spec.validate();
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) { return parse_sweep(read_file(path)); }

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) {
    s.mean = std::nan("");
    s.stddev = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

std::optional<double> metric_value(const MetricsReport& r, std::string_view m) {
  if (m == kEnergy) return r.energy_total;
  if (m == kLifetime) return static_cast<double>(r.first_node_death);
  if (m == kDelay) return r.delay_samples > 0 ? std::optional<double>(r.mean_delay) : std::nullopt;
  if (m == kThroughput) return r.throughput;
  if (m == "energy_hello") return r.energy_hello;
  if (m == "partition") return static_cast<double>(r.partition_time);
  if (m == "dead_nodes") return r.dead_nodes;
  if (m == "delivered") return static_cast<double>(r.delivered);
  if (m == "offered") return static_cast<double>(r.offered);
  if (m == "hello") return static_cast<double>(r.hello_sent);
  if (m == "rreq") return static_cast<double>(r.rreq_sent);
  if (m == "collisions") return static_cast<double>(r.collisions);
  throw InvalidParameter("unknown metric '" + std::string(m) + "'");
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{kEnergy,    kLifetime, kDelay,     kThroughput, "energy_hello", "partition",
                                              "dead_nodes", "delivered", "offered", "hello",       "rreq",         "collisions"};
  return names;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  spec.validate();
  const auto configs = spec.expand();
  SweepResult res;
  res.runs.resize(configs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      RunRecord& rec = res.runs[i];
      rec.config = configs[i];
      try {
        rec.report = run_scenario(configs[i]);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(configs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const std::size_t per_cell = spec.seeds.size() * static_cast<std::size_t>(spec.repetitions);
  for (std::size_t start = 0; start < res.runs.size(); start += per_cell) {
    const ScenarioConfig& c = res.runs[start].config;
    AggregateRow row;
    row.protocol = c.protocol;
    row.variant = c.variant;
    row.value = spec.axis == SweepAxis::NodeCount ? c.node_count : c.packet_load;
    std::map<std::string, std::vector<double>> samples;
    for (std::size_t i = start; i < start + per_cell; ++i) {
      const RunRecord& rec = res.runs[i];
      if (opts.on_run) opts.on_run(rec);
      if (!rec.report) {
        res.failures.push_back(std::string(to_string(c.protocol)) + "/" + std::string(to_string(c.variant)) + " " +
                               std::string(to_string(spec.axis)) + "=" + std::to_string(row.value) +
                               " seed=" + std::to_string(rec.config.rng_seed) + ": " + rec.error);
        continue;
      }
      ++row.runs;
      for (const auto& m : metric_names()) {
        if (auto v = metric_value(*rec.report, m)) samples[m].push_back(*v);
      }
    }
    for (const auto& m : metric_names()) row.metrics[m] = summarize(samples[m]);
    res.rows.push_back(std::move(row));
  }
  return res;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows, SweepAxis axis, std::string_view metric) {
  std::string out = "protocol,variant,axis,value,metric,mean,stddev,n\n";
  for (const auto& r : rows) {
    const auto it = r.metrics.find(std::string(metric));
    const Stat s = it == r.metrics.end() ? Stat{std::nan(""), std::nan(""), 0} : it->second;
    out += std::string(to_string(r.protocol)) + "," + std::string(to_string(r.variant)) + "," +
           std::string(to_string(axis)) + "," + std::to_string(r.value) + "," + std::string(metric) + "," +
           format_number(s.mean) + "," + format_number(s.stddev) + "," + std::to_string(s.n) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_csvs(const std::vector<AggregateRow>& rows, SweepAxis axis,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const char* m : kCsvMetrics) {
    const auto path = dir / (std::string(m) + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << aggregate_csv(rows, axis, m);
    out.push_back(path);
  }
  return out;
}

double improvement_percent(std::string_view metric, double classical, double minus_hello) {
  if (metric == kEnergy || metric == kDelay) return (classical - minus_hello) / classical * 100.0;
  return (minus_hello - classical) / classical * 100.0;
}

std::vector<Improvement> improvement_table(const std::vector<AggregateRow>& rows) {
  std::vector<Improvement> out;
  for (const auto& c : rows) {
    if (c.variant != Variant::Classical) continue;
    const auto m = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) {
      return r.variant == Variant::MinusHello && r.protocol == c.protocol && r.value == c.value;
    });
    for (const char* metric : kCsvMetrics) {
      Improvement imp{c.protocol, c.value, metric, std::nullopt};
      const auto a = c.metrics.find(metric);
      if (m != rows.end() && a != c.metrics.end()) {
        const auto b = m->metrics.find(metric);
        if (b != m->metrics.end() && std::isfinite(a->second.mean) && std::isfinite(b->second.mean) &&
            a->second.mean != 0.0) {
          imp.percent = improvement_percent(metric, a->second.mean, b->second.mean);
        }
      }
      out.push_back(imp);
    }
  }
  return out;
}

std::string improvement_csv(const std::vector<Improvement>& table, SweepAxis axis) {
  std::string out = "protocol,axis,value,metric,improvement_percent\n";
  for (const auto& i : table) {
    out += std::string(to_string(i.protocol)) + "," + std::string(to_string(axis)) + "," + std::to_string(i.value) + "," +
           i.metric + "," + (i.percent ? format_number(*i.percent) : std::string("NA")) + "\n";
  }
  return out;
}

}  // namespace manet
