// manet: run scenarios, sweeps and the analytic/size tables from the shell.
//
// Exit codes: 0 ok, 1 usage, 2 config error, 3 invalid parameter,
// 4 other library or I/O error, 5 a validation check failed.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "manet/analytics.hpp"
#include "manet/engine.hpp"
#include "manet/harness.hpp"
#include "manet/messages.hpp"
#include "manet/validation.hpp"

using namespace manet;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kParam = 3, kOther = 4, kCheckFailed = 5 };

int run_cmd(const std::string& config_path, const std::map<std::string, std::string>& overrides,
            const std::string& trace_path, const std::string& json_path) {
  ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  cfg.validate();

  Simulator sim(cfg);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error("cannot write '" + trace_path + "'");
    sim.set_trace(&trace);
  }
  const std::string json = sim.run().to_json();
  if (json_path.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream out(json_path);
    if (!out) throw Error("cannot write '" + json_path + "'");
    out << json << "\n";
  }
  return kOk;
}

int sweep_cmd(const std::string& spec_path, const std::string& out_dir, unsigned threads, bool quiet) {
  const SweepSpec spec = load_sweep(spec_path);
  SweepOptions opts;
  opts.threads = threads;
  if (!quiet) {
    opts.on_run = [](const RunRecord& r) {
      std::fprintf(stderr, "%s/%s nodes=%d load=%d seed=%llu %s\n", std::string(to_string(r.config.protocol)).c_str(),
                   std::string(to_string(r.config.variant)).c_str(), r.config.node_count, r.config.packet_load,
                   static_cast<unsigned long long>(r.config.rng_seed), r.report ? "ok" : r.error.c_str());
    };
  }
  const SweepResult res = run_sweep(spec, opts);
  for (const auto& p : write_csvs(res.rows, spec.axis, out_dir)) std::cout << "wrote " << p.string() << "\n";
  const auto imp = improvement_csv(improvement_table(res.rows), spec.axis);
  std::ofstream(std::filesystem::path(out_dir) / "improvement.txt") << imp;
  std::cout << imp;
  for (const auto& f : res.failures) std::cerr << "failed: " << f << "\n";
  return kOk;
}

void print_lifetime_table() {
  std::cout << "max_eng_J,hello_per_ms,broad_J,rt_per_ms,avg_trans_J,lifetime_classical_ms,lifetime_minus_hello_ms,gain_ms\n";
  for (double y : {0.01, 0.1}) {
    for (double rt : {0.001, 0.01}) {
      LifetimeParams p{5.0, y, 1e-4, rt, 1e-3, 0.0};
      std::cout << format_number(p.max_eng) << "," << format_number(y) << "," << format_number(p.broad) << ","
                << format_number(rt) << "," << format_number(p.avg_trans) << "," << format_number(lifetime_classical(p))
                << "," << format_number(lifetime_minus_hello(p)) << "," << format_number(lifetime_gain(p)) << "\n";
    }
  }
}

void print_queue_table() {
  std::cout << "lambda,mu,delta_lambda,wait_minus_hello,wait_classical,req_minus_hello,req_classical\n";
  for (double rho : {0.2, 0.5, 0.8}) {
    for (double dl : {0.0, 0.05}) {
      const QueueParams q{rho, 1.0, dl};
      std::cout << format_number(q.lambda) << "," << format_number(q.mu) << "," << format_number(dl) << ","
                << format_number(avg_wait(q.lambda, q.mu)) << "," << format_number(avg_wait(q.lambda + dl, q.mu)) << ","
                << format_number(avg_req(q.lambda, q.mu)) << "," << format_number(avg_req(q.lambda + dl, q.mu)) << "\n";
    }
  }
}

void print_hop_table() {
  std::cout << "N,X,Y,R_min,xi,expected_hops,log2_expansion,printed_log2\n";
  for (double n : {20.0, 60.0, 100.0, 200.0}) {
    const double x = 500, y = 500, r = 50;
    std::cout << n << "," << x << "," << y << "," << r << "," << format_number(neighbor_density(n, x, y, r)) << ","
              << format_number(expected_hop_count(n, x, y, r)) << ","
              << format_number(expected_hop_count_log2(n, x, y, r)) << ","
              << format_number(printed_hop_count_log2(n, x, y, r)) << "\n";
  }
}

int analytics_cmd(const std::string& table) {
  if (table == "lifetime" || table == "all") print_lifetime_table();
  if (table == "queue" || table == "all") print_queue_table();
  if (table == "hops" || table == "all") print_hop_table();
  return kOk;
}

int sizes_cmd(const BitParams& p) {
  const BitBudget b = BitBudget::from(p);
  std::cout << "quantity,bits\n"
            << "id," << b.id_bits << "\n"
            << "x," << b.x_bits << "\n"
            << "y," << b.y_bits << "\n"
            << "range," << b.range_bits << "\n"
            << "time," << b.time_bits << "\n"
            << "pac," << b.pac_bits << "\n"
            << "hello," << bits_hello(p) << "\n"
            << "add_rreq," << bits_add_rreq(p) << "\n"
            << "link_fail_delta," << bits_link_fail_delta(p) << "\n"
            << "repair_permission," << bits_repair_permission(p) << "\n";
  return kOk;
}

int validate_cmd(int graphs, int sets, std::uint64_t seed) {
  const auto routes = check_route_selection(graphs, 8, seed);
  const auto sizes = check_size_bounds(sets, seed);
  std::cout << "route selection: " << routes.cases - routes.failures << "/" << routes.cases << " agree\n";
  for (const auto& e : routes.examples) std::cout << "  " << e << "\n";
  std::cout << "size bounds: " << sizes.cases - sizes.failures << "/" << sizes.cases << " hold\n";
  for (const auto& e : sizes.examples) std::cout << "  " << e << "\n";
  return routes.ok() && sizes.ok() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MANET routing simulator with and without HELLO messages"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one scenario and print its metrics as JSON");
  std::string config_path, trace_path, json_path;
  run->add_option("-c,--config", config_path, "key = value config file");
  run->add_option("--trace", trace_path, "write the event trace here");
  run->add_option("-o,--output", json_path, "write the JSON report here instead of stdout");
  std::map<std::string, std::string> overrides;
  for (const auto& key : config_keys()) {
    run->add_option_function<std::string>("--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                          "config override");
  }

  auto* sweep = app.add_subcommand("sweep", "run a sweep spec and write per-metric CSVs");
  std::string spec_path, out_dir = "sweep_out";
  unsigned threads = 1;
  bool quiet = false;
  sweep->add_option("spec", spec_path, "sweep spec file")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out_dir, "output directory");
  sweep->add_option("-j,--threads", threads, "parallel runs")->check(CLI::PositiveNumber);
  sweep->add_flag("-q,--quiet", quiet, "no per-run progress");

  auto* analytics = app.add_subcommand("analytics", "print closed-form tables as CSV");
  std::string table = "all";
  analytics->add_option("-t,--table", table, "lifetime, queue, hops or all")
      ->check(CLI::IsMember({"lifetime", "queue", "hops", "all"}));

  auto* sizes = app.add_subcommand("sizes", "print message bit budgets as CSV");
  BitParams bp{60, 500, 500, 50, 100, 30'000, 10};
  sizes->add_option("--nodes", bp.N, "N");
  sizes->add_option("--area-x", bp.X, "X, m");
  sizes->add_option("--area-y", bp.Y, "Y, m");
  sizes->add_option("--range-min", bp.R_min, "smallest radio range, m");
  sizes->add_option("--range-max", bp.R_max, "largest radio range, m");
  sizes->add_option("--time", bp.TM, "simulated time, ms");
  sizes->add_option("--packets", bp.PAC, "most data packets per session");

  auto* validate = app.add_subcommand("validate", "check route selection and message-size inequalities");
  int graphs = 500, sets = 10'000;
  std::uint64_t seed = 1;
  validate->add_option("--graphs", graphs, "random graphs");
  validate->add_option("--sets", sets, "random parameter sets");
  validate->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return run_cmd(config_path, overrides, trace_path, json_path);
    if (*sweep) return sweep_cmd(spec_path, out_dir, threads, quiet);
    if (*analytics) return analytics_cmd(table);
    if (*sizes) return sizes_cmd(bp);
    if (*validate) return validate_cmd(graphs, sets, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kParam;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
