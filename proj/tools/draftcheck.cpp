// draftcheck: operator CLI for the feedback service.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "draftcheck/analytics/analytics.hpp"
#include "draftcheck/analytics/export.hpp"
#include "draftcheck/service/config.hpp"
#include "draftcheck/service/feedback_service.hpp"
#include "draftcheck/service/http_server.hpp"
#include "draftcheck/store/event_store.hpp"
#include "draftcheck/synth/cohort.hpp"

namespace {

using namespace draftcheck;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExportOptions {
  std::string store;
  std::string round;
  std::string out;
  bool json{false};
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << content;
  f.flush();
  if (!f) throw DataError("failed writing " + path);
}

std::vector<InteractionRecord> load_records(const ExportOptions& opt) {
  if (!std::filesystem::is_directory(opt.store)) throw DataError("store directory " + opt.store + " not found");
  JsonlEventStore store(opt.store);
  return store.load_round(opt.round);
}

void emit(const ExportOptions& opt, const nlohmann::ordered_json& json, const std::string& human,
          const std::string& csv) {
  if (!opt.out.empty()) write_file(opt.out, csv);
  if (opt.json) {
    std::cout << json.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

std::string fmt_attrition(const std::optional<double>& v) {
  return v ? fmt::format("{:5.1f}%", *v * 100.0) : std::string("    -");
}

int cmd_funnel(const ExportOptions& opt) {
  const auto records = load_records(opt);
  const auto s = analytics::compute_funnel(records, opt.round);
  std::string human = fmt::format("funnel for round {}\n", opt.round);
  human += fmt::format("  {:<11} {:>5}   attrition\n", "stage", "count");
  human += fmt::format("  {:<11} {:>5}\n", "submitted", s.submitted);
  human += fmt::format("  {:<11} {:>5}   {}\n", "used", s.used, fmt_attrition(s.attrition[0]));
  human += fmt::format("  {:<11} {:>5}   {}\n", "interacted", s.interacted, fmt_attrition(s.attrition[1]));
  human += fmt::format("  {:<11} {:>5}   {}\n", "corrected", s.corrected, fmt_attrition(s.attrition[2]));
  if (s.used_without_submitting > 0) {
    human += fmt::format("  ({} student(s) used feedback without submitting)\n", s.used_without_submitting);
  }
  emit(opt, analytics::funnel_json(s), human, analytics::funnel_csv(s));
  return kExitOk;
}

int cmd_histogram(const ExportOptions& opt, bool normalized) {
  const auto records = load_records(opt);
  const auto h = analytics::interaction_histogram(records, opt.round, normalized);
  std::string human = fmt::format("feedback requests per student, round {}{}\n", opt.round,
                                  normalized ? " (relative to submissions)" : "");
  for (const auto& [bucket, value] : h) human += fmt::format("  {:>3}  {:g}\n", bucket, value);
  if (h.empty()) human += "  (no feedback users)\n";
  emit(opt, analytics::histogram_json(h), human, analytics::histogram_csv(h));
  return kExitOk;
}

int cmd_tasks(const ExportOptions& opt) {
  const auto records = load_records(opt);
  const auto d = analytics::task_distribution(records, opt.round);
  std::string human = fmt::format("tasks per student, round {}\n", opt.round);
  for (const auto& [count, students] : d.histogram) human += fmt::format("  {:>3} tasks: {}\n", count, students);
  if (d.outliers.empty()) {
    human += "no outliers\n";
  } else {
    human += "outliers:\n";
    for (const auto& o : d.outliers) {
      human += fmt::format("  {:<10} {:>3} tasks  {}\n", o.student_id, o.count, analytics::to_string(o.reason));
    }
  }
  if (!d.uncovered.empty()) human += fmt::format("{} submitter(s) without feedback tables\n", d.uncovered.size());
  emit(opt, analytics::tasks_json(d), human, analytics::tasks_csv(d));
  return kExitOk;
}

int cmd_categories(const ExportOptions& opt) {
  const auto records = load_records(opt);
  const auto d = analytics::category_distribution(records, opt.round);
  std::string human = fmt::format("distinct task categories per student, round {}\n", opt.round);
  for (const auto& [count, students] : d.histogram) {
    human += fmt::format("  {} categor{}: {}\n", count, count == 1 ? "y" : "ies", students);
  }
  if (!d.uncovered.empty()) human += fmt::format("{} submitter(s) without feedback tables\n", d.uncovered.size());
  emit(opt, analytics::categories_json(d), human, analytics::categories_csv(d));
  return kExitOk;
}

synth::RoundSpec parse_round_spec(const std::string& text) {
  // id:submitted:version
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw CLI::ValidationError("--round", "expected id:submitted:version, got " + text);
  }
  synth::RoundSpec r;
  r.round_id = text.substr(0, a);
  try {
    r.submitted = std::stoul(text.substr(a + 1, b - a - 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--round", "bad submission count in " + text);
  }
  const auto version = parse_prompt_version(text.substr(b + 1));
  if (!version) throw CLI::ValidationError("--round", "bad prompt version in " + text);
  r.prompt_version = *version;
  return r;
}

int cmd_synth(synth::SyntheticCohortSpec spec, const std::vector<std::string>& round_args,
              const std::vector<double>& mix, const std::string& out, bool json) {
  if (!round_args.empty()) {
    spec.rounds.clear();
    for (const auto& r : round_args) spec.rounds.push_back(parse_round_spec(r));
  }
  if (!mix.empty()) {
    if (mix.size() != 4) throw CLI::ValidationError("--mix", "expected four fractions");
    spec.mix = {mix[0], mix[1], mix[2], mix[3]};
  }
  try {
    spec.validate();
  } catch (const synth::InfeasibleSpec& e) {
    throw DataError(std::string("infeasible cohort: ") + e.what());
  }

  JsonlEventStore store(out, /*durable=*/false);
  for (const auto& r : spec.rounds) {
    if (std::filesystem::exists(store.round_path(r.round_id))) {
      throw DataError("refusing to overwrite existing " + store.round_path(r.round_id).string());
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create " + out + ": " + ec.message());
  for (const auto& r : spec.rounds) write_file(store.round_path(r.round_id).string(), "");

  const auto summaries = synth::generate_cohort(spec, store);
  auto doc = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    doc.push_back({{"round_id", s.round_id},
                   {"never_use", s.engagement[0]},
                   {"single_use", s.engagement[1]},
                   {"multi_use", s.engagement[2]},
                   {"correcting", s.engagement[3]},
                   {"records", s.records},
                   {"too_many_task_students", s.too_many_task_students},
                   {"too_few_task_students", s.too_few_task_students}});
    if (!json) {
      std::cout << fmt::format("{}: {} records (never {}, single {}, multi {}, correcting {})\n", s.round_id,
                               s.records, s.engagement[0], s.engagement[1], s.engagement[2], s.engagement[3]);
    }
  }
  if (json) std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_check_config(const std::string& path) {
  const auto config = service::load_service_config(path);
  std::cout << fmt::format("{}: ok, listen {}:{}, store {}, {} round(s)\n", path, config.listen_host,
                           config.listen_port, config.store_dir.string(), config.rounds.size());
  for (const auto& [id, round] : config.rounds) {
    std::cout << fmt::format("  round {}: prompt {}, provider {} ({})\n", id,
                             to_string(round.provider.prompt_version), to_string(round.provider.provider_kind),
                             round.provider.provider_id());
  }
  return kExitOk;
}

int cmd_serve(const std::string& config_path, std::string listen) {
  auto config = service::load_service_config(config_path);
  if (listen.empty()) {
    if (const char* env = std::getenv("DRAFTCHECK_LISTEN")) listen = env;
  }
  if (!listen.empty()) {
    try {
      std::tie(config.listen_host, config.listen_port) = service::parse_listen_address(listen);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--listen", e.what());
    }
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  JsonlEventStore store(config.store_dir);
  service::FeedbackService svc(config, store);
  service::HttpServer server(svc);
  if (!server.bind(config.listen_host, config.listen_port)) {
    throw DataError(fmt::format("cannot bind {}:{} (address in use or not permitted)", config.listen_host,
                                config.listen_port));
  }
  spdlog::info("listening on http://{}:{} ({} round(s), store {})", config.listen_host, server.port(),
               config.rounds.size(), config.store_dir.string());

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    server.stop();
  });
  const bool ok = server.serve();
  ::kill(::getpid(), SIGTERM);  // release the waiter if serve() returned on its own
  waiter.join();
  return ok ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"draftcheck: formative feedback service for short reports"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path;
  std::string listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("-c,--config", config_path, "Configuration file")->envname("DRAFTCHECK_CONFIG")->required();
  serve->add_option("--listen", listen, "host:port, overrides the config (env DRAFTCHECK_LISTEN)");

  std::string check_path;
  auto* check = app.add_subcommand("check-config", "Validate a configuration file");
  check->add_option("config", check_path, "Configuration file")->required();

  const auto add_export = [&](CLI::App* cmd, ExportOptions& opt) {
    cmd->add_option("-s,--store", opt.store, "Store directory")->required();
    cmd->add_option("-r,--round", opt.round, "Round id")->required();
    cmd->add_option("-o,--out", opt.out, "Write CSV here");
    cmd->add_flag("--json", opt.json, "Print JSON instead of a table");
  };
  ExportOptions funnel_opt, hist_opt, tasks_opt, cat_opt;
  bool normalized = false;
  auto* funnel = app.add_subcommand("funnel", "Usage funnel and attrition for a round");
  add_export(funnel, funnel_opt);
  auto* histogram = app.add_subcommand("histogram", "Feedback requests per student");
  add_export(histogram, hist_opt);
  histogram->add_flag("--normalized", normalized, "Divide by the number of submissions");
  auto* tasks = app.add_subcommand("tasks", "Task counts and outliers");
  add_export(tasks, tasks_opt);
  auto* categories = app.add_subcommand("categories", "Distinct task categories per student");
  add_export(categories, cat_opt);

  synth::SyntheticCohortSpec spec = synth::default_cohort_spec();
  std::vector<std::string> round_args;
  std::vector<double> mix;
  std::string synth_out;
  bool synth_json = false;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort store");
  synth_cmd->add_option("-o,--out", synth_out, "Store directory to create")->required();
  synth_cmd->add_option("--students", spec.n_students, "Cohort size")->capture_default_str();
  synth_cmd->add_option("--round", round_args, "id:submitted:version, repeatable (default round1:69:v1 round2:49:v2)");
  synth_cmd->add_option("--mix", mix, "never,single,multi,correcting fractions")->delimiter(',')->expected(4);
  synth_cmd->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--too-many", spec.too_many_task_students, "Students with 9 tasks per round")->capture_default_str();
  synth_cmd->add_option("--too-few", spec.too_few_task_students, "Students with 1 task per round")->capture_default_str();
  synth_cmd->add_flag("--json", synth_json, "Print the summary as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  spdlog::set_default_logger(spdlog::default_logger()->clone("draftcheck"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e [%l] %v");
  // Keep stdout clean for --json consumers.
  spdlog::default_logger()->sinks().clear();
  spdlog::default_logger()->sinks().push_back(std::make_shared<spdlog::sinks::stderr_color_sink_mt>());

  try {
    if (*serve) return cmd_serve(config_path, listen);
    if (*check) return cmd_check_config(check_path);
    if (*funnel) return cmd_funnel(funnel_opt);
    if (*histogram) return cmd_histogram(hist_opt, normalized);
    if (*tasks) return cmd_tasks(tasks_opt);
    if (*categories) return cmd_categories(cat_opt);
    if (*synth_cmd) return cmd_synth(spec, round_args, mix, synth_out, synth_json);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
