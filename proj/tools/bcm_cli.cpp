// Command-line front end; talks to the library only through bcm.h.
#include <charconv>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bcm/bcm.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<double> lambda;
  std::optional<long long> seed;
  std::optional<int> threads;
  bool dense_oracle = false;
};

std::string exact(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

int report(bcm_status status, char* summary) {
  if (summary) {
    std::puts(summary);
    bcm_string_free(summary);
  }
  if (status != BCM_OK) std::fprintf(stderr, "error (%s): %s\n", bcm_status_name(status), bcm_last_error());
  return static_cast<int>(status);
}

bcm_status apply(bcm_config* cfg, const Flags& f) {
  bcm_status s = BCM_OK;
  const auto set = [&](const char* key, const std::string& value) {
    if (s == BCM_OK) s = bcm_config_set(cfg, key, value.c_str());
  };
  if (!f.out.empty()) set("out", f.out);
  if (f.lambda) set("lambda", exact(*f.lambda));
  if (f.seed) set("seed", std::to_string(*f.seed));
  if (f.threads) set("threads", std::to_string(*f.threads));
  if (f.dense_oracle) set("dense_oracle", "true");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary control method: Gram assembly, block-Toeplitz solves, verification"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "experiment config (YAML key: value)")->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--lambda", flags.lambda, "Tikhonov shift added to G")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", flags.seed, "random seed");
  app.add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--dense-oracle", flags.dense_oracle, "solve with dense elimination instead of Levinson");

  using Runner = bcm_status (*)(const bcm_config*, char**);
  Runner runner = nullptr;
  const auto sub = [&](const char* name, const char* help, Runner fn) {
    app.add_subcommand(name, help)->callback([&runner, fn] { runner = fn; });
  };
  sub("forward", "simulate a test pulse; write trace and wavefield frames", bcm_run_forward);
  sub("gram", "assemble the block-Toeplitz Gram system G, B", bcm_run_gram);
  sub("solve", "solve C G = B from the stored system", bcm_run_solve);
  sub("verify", "run the invariant checks", bcm_run_verify);
  sub("bench", "time Levinson against dense elimination", bcm_run_bench);
  sub("all", "forward, boundary control problem, verify and bench", bcm_run_all);

  CLI11_PARSE(app, argc, argv);

  bcm_config* cfg = nullptr;
  bcm_status s = flags.config.empty() ? bcm_config_default(&cfg) : bcm_config_load(flags.config.c_str(), &cfg);
  if (s != BCM_OK) return report(s, nullptr);
  s = apply(cfg, flags);
  char* summary = nullptr;
  if (s == BCM_OK) s = runner(cfg, &summary);
  bcm_config_destroy(cfg);
  return report(s, summary);
}
