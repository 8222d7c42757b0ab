// qacme: offline replay, mixture enumeration, synthetic runs and the live
// suggestion service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qacme/config.hpp"
#include "qacme/errors.hpp"
#include "qacme/experiment.hpp"
#include "qacme/http_service.hpp"
#include "qacme/replay.hpp"
#include "qacme/service.hpp"
#include "qacme/synthetic.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config, "JSON experiment config");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out", args.out, "Output file (stdout when omitted)");
}

qacme::ExperimentConfig load(const CommonArgs& args) {
  auto config = qacme::load_config(args.config);
  if (args.seed) config.seed = *args.seed;
  return config;
}

// Writes through `fn` to --out, or to stdout.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
}

qacme::HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query auto-completion with a bandit-learned mixture of engines"};
  app.require_subcommand(1);

  CommonArgs ingest_args;
  std::string log_override;
  auto* ingest = app.add_subcommand("ingest", "Split a query log into (prefix, query) tuples");
  add_common(ingest, ingest_args);
  ingest->add_option("--log", log_override, "Query log (overrides the config)");

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "Replay every configured strategy (results table)");
  add_common(run, run_args);

  CommonArgs enum_args;
  auto* enumerate = app.add_subcommand("enumerate", "Replay every fixed engine-to-position mixture");
  add_common(enumerate, enum_args);

  CommonArgs plot_args;
  std::string plot_in;
  auto* plot = app.add_subcommand("plot", "Decreasing-clicks curve data from an enumeration file");
  add_common(plot, plot_args, false);
  plot->add_option("--in", plot_in, "Output of `enumerate`")->required()->check(CLI::ExistingFile);

  CommonArgs synth_args;
  auto* synthetic = app.add_subcommand("synthetic", "Run strategies in the synthetic click environment");
  add_common(synthetic, synth_args);

  CommonArgs serve_args;
  std::optional<int> port;
  std::optional<std::string> static_dir;
  auto* serve = app.add_subcommand("serve", "Start the HTTP suggestion service");
  add_common(serve, serve_args);
  serve->add_option("--port", port, "Listen port (overrides the config)");
  serve->add_option("--static-dir", static_dir, "Directory of static UI assets to serve at /");

  CommonArgs gen_args;
  std::size_t records = 20000;
  std::string gen_mode = "generic";
  auto* gen = app.add_subcommand("gen-log", "Write a synthetic query log (CSV)");
  add_common(gen, gen_args, false);
  gen->add_option("--records", records, "Number of records / sessions");
  gen->add_option("--mode", gen_mode, "generic | logged-policy")
      ->check(CLI::IsMember({"generic", "logged-policy"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto config = load(ingest_args);
      const auto log = qacme::load_query_log(log_override.empty() ? config.log_path : log_override);
      const auto tuples = qacme::build_tuples(log, config.min_prefix_len);
      std::cerr << "ingest: " << log.size() << " records, " << tuples.tuples.size()
                << " tuples, " << tuples.skipped_records << " records skipped (too short)\n";
      emit(ingest_args.out, [&](std::ostream& os) { qacme::write_tuples(os, tuples.tuples); });
    } else if (*run) {
      auto config = load(run_args);
      auto data = qacme::prepare_replay(config);
      const auto results = qacme::run_configured(config, data);
      emit(run_args.out, [&](std::ostream& os) {
        qacme::write_results_table(os, results, "single:" + config.basic_engine);
      });
    } else if (*enumerate) {
      auto config = load(enum_args);
      auto data = qacme::prepare_replay(config);
      const auto result = qacme::enumerate_configured(config, data);
      std::cerr << "enumerate: " << result.mixtures.size() << " mixtures, basic rank "
                << result.basic_rank << "\n";
      emit(enum_args.out, [&](std::ostream& os) { qacme::write_enumeration(os, result); });
    } else if (*plot) {
      std::ifstream in(plot_in);
      const auto result = qacme::read_enumeration(in);
      emit(plot_args.out, [&](std::ostream& os) { qacme::write_curve_plot(os, result); });
    } else if (*synthetic) {
      auto config = load(synth_args);
      const auto results = qacme::run_synthetic_configured(config);
      emit(synth_args.out, [&](std::ostream& os) {
        qacme::write_results_table(os, results, "single:" + config.basic_engine);
      });
    } else if (*serve) {
      auto config = load(serve_args);
      if (port) config.service.port = *port;
      auto log = config.log_path.empty() ? std::vector<qacme::QueryLogRecord>{}
                                         : qacme::load_query_log(config.log_path);
      auto pool = qacme::build_engines(log, config.engine_config()).select(config.engines);
      qacme::ServiceOptions options;
      options.ttl_seconds = config.service.ttl_seconds;
      options.silent_intermediate_expiry = config.service.silent_intermediate_expiry;
      options.token_seed = config.seed;
      qacme::QacService service(std::move(pool), config.mixture(config.service.strategy), options);
      if (!serve_args.out.empty()) {
        std::ifstream existing(serve_args.out);
        if (existing) service.restore(nlohmann::json::parse(existing));
      }
      qacme::HttpOptions http;
      http.host = config.service.host;
      http.port = config.service.port;
      http.static_dir = static_dir;
      if (!serve_args.out.empty()) http.snapshot_path = serve_args.out;
      qacme::HttpFrontend frontend(service, http);
      const int bound = frontend.bind();
      std::cerr << "serving " << service.stats().strategy << " on " << http.host << ':' << bound
                << "\n";
      g_frontend = &frontend;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      frontend.serve();
      g_frontend = nullptr;
      if (!serve_args.out.empty()) {
        std::ofstream out(serve_args.out);
        out << service.snapshot().dump(2) << '\n';
      }
    } else if (*gen) {
      const std::uint64_t seed = gen_args.seed.value_or(1);
      std::vector<qacme::QueryLogRecord> log;
      if (gen_mode == "generic") {
        qacme::QueryLogSpec spec;
        spec.records = records;
        spec.seed = seed;
        log = qacme::generate_query_log(spec);
      } else {
        // The deployed engine is a popularity engine trained on a generic log;
        // users then type under its suggestions.
        qacme::QueryLogSpec base;
        base.seed = seed;
        const auto history = qacme::generate_query_log(base);
        qacme::PopularityEngine deployed;
        for (const auto& r : history) deployed.observe(r);
        const auto intents = qacme::generate_catalog(base.catalog_size, qacme::derive_seed(seed, 1));
        qacme::LoggedPolicySpec spec;
        spec.sessions = records;
        spec.seed = qacme::derive_seed(seed, 9);
        log = qacme::simulate_logged_policy(deployed, intents, spec);
      }
      emit(gen_args.out, [&](std::ostream& os) { qacme::write_query_log(os, log); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
