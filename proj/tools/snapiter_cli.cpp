#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "snapiter/harness/bench.hpp"
#include "snapiter/harness/lincheck.hpp"
#include "snapiter/harness/local_suite.hpp"
#include "snapiter/harness/stress.hpp"

namespace {

using namespace snapiter;
using namespace snapiter::harness;

std::pair<Key, Key> parse_range(const std::string& s) {
  Key lo = 0;
  Key hi = 0;
  if (std::sscanf(s.c_str(), "%ld:%ld", &lo, &hi) != 2 || lo > hi) {
    throw CLI::ValidationError("range must be LO:HI with LO <= HI");
  }
  return {lo, hi};
}

int cmd_bench(const WorkloadConfig& cfg, const std::string& out_path,
              bool csv) {
  BenchReport report = run_benchmark(cfg);
  const std::string text =
      csv ? report_to_csv(report) : report_to_json(report);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot open " << out_path << "\n";
      return 1;
    }
    out << text << "\n";
  }
  std::cerr << "slowdown " << report.slowdown << " (woi "
            << report.woi.updater_throughput << " ops/s, wi "
            << report.wi.updater_throughput << " ops/s)\n";
  return 0;
}

int cmd_stress(const StressConfig& cfg) {
  StressResult r = global_consistency_stress(cfg);
  std::cout << "snapshots " << r.snapshots << " violations " << r.violations
            << " updater_ops " << r.updater_ops << "\n";
  return r.violations == 0 ? 0 : 1;
}

int cmd_check_local(Backend backend, int bound, std::uint64_t seed,
                    bool rotation_demo) {
  if (rotation_demo) {
    auto violation = run_rotation_counterexample();
    if (!violation) {
      std::cout << "rotation mutator wrongly accepted\n";
      return 1;
    }
    std::cout << "rotation mutator rejected: position "
              << violation->position << " loses node "
              << violation->node_id << "\n";
    return 0;
  }
  LocalSuiteResult r = backend == Backend::kUbst
                           ? run_ubst_local_suite(bound, seed)
                           : run_hashset_local_suite(bound, 12, seed);
  std::cout << r.scenarios << " scenarios, " << r.failures.size()
            << " failures\n";
  for (const auto& f : r.failures) {
    std::cout << "FAIL " << f.description << " at position " << f.position
              << " node " << f.node_id << "\n";
  }
  return r.ok() ? 0 : 1;
}

int cmd_lincheck(const std::string& corpus_path) {
  std::ifstream in(corpus_path);
  if (!in) {
    std::cerr << "cannot open " << corpus_path << "\n";
    return 1;
  }
  std::vector<History> corpus = load_corpus(in);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool verdict = check_linearizable(corpus[i]);
    const bool expected = corpus[i].expected.value_or(true);
    if (verdict != expected) {
      ++mismatches;
      std::cout << "history " << i << ": got "
                << (verdict ? "linearizable" : "non-linearizable")
                << ", expected "
                << (expected ? "linearizable" : "non-linearizable") << "\n";
    }
  }
  std::cout << corpus.size() << " histories, " << mismatches
            << " mismatches\n";
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concurrent sets with linearizable snapshot iterators"};
  app.require_subcommand(1);

  std::string structure = "ubst";
  auto structure_opt = [&](CLI::App* cmd) {
    cmd->add_option("--structure", structure, "ubst or hashset")
        ->check(CLI::IsMember({"ubst", "hashset"}));
  };

  // bench
  WorkloadConfig bench_cfg;
  std::string mix = "25-25-50";
  std::string out_path;
  bool csv = false;
  auto* bench = app.add_subcommand("bench", "updater/iterator throughput");
  structure_opt(bench);
  bench->add_option("--updaters", bench_cfg.updaters)->check(CLI::Range(1, 64));
  bench->add_option("--iterators", bench_cfg.iterators)
      ->check(CLI::Range(0, 64));
  bench->add_option("--range", bench_cfg.range_bits, "key range exponent")
      ->check(CLI::IsMember({12u, 14u, 16u}));
  bench->add_option("--mix", mix, "insert-delete-contains percentages");
  bench->add_option("--seconds", bench_cfg.seconds)
      ->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bench_cfg.warmup)
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bench_cfg.seed);
  bench->add_flag("--sorted-append", bench_cfg.sorted_append);
  bench->add_option("--out", out_path, "report path (stdout when absent)");
  bench->add_flag("--csv", csv, "CSV instead of JSON");

  // stress-global
  StressConfig stress_cfg;
  std::string cold = "1:100";
  std::string hot = "200:300";
  auto* stress =
      app.add_subcommand("stress-global", "cold-range containment oracle");
  structure_opt(stress);
  stress->add_option("--cold", cold, "preloaded untouched range LO:HI");
  stress->add_option("--hot", hot, "updater range LO:HI");
  stress->add_option("--updaters", stress_cfg.updaters)
      ->check(CLI::Range(0, 64));
  stress->add_option("--iterators", stress_cfg.iterators)
      ->check(CLI::Range(1, 64));
  stress->add_option("--seconds", stress_cfg.seconds)
      ->check(CLI::PositiveNumber);
  stress->add_option("--seed", stress_cfg.seed);

  // check-local
  int bound = 5;
  std::uint64_t local_seed = 1;
  bool rotation_demo = false;
  auto* local = app.add_subcommand("check-local",
                                   "single-step view-preservation checker");
  structure_opt(local);
  local->add_option("--exhaustive-bound", bound,
                    "max leaves (ubst) or buckets (hashset)")
      ->check(CLI::Range(1, 8));
  local->add_option("--seed", local_seed);
  local->add_flag("--rotation-demo", rotation_demo,
                  "run the adversarial rotation mutator instead");

  // lincheck
  std::string corpus_path;
  auto* lin = app.add_subcommand("lincheck", "history linearizability check");
  lin->add_option("--corpus", corpus_path, "JSONL history file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      bench_cfg.structure = backend_from_string(structure);
      bench_cfg.mix = mix_from_string(mix);
      return cmd_bench(bench_cfg, out_path, csv);
    }
    if (*stress) {
      stress_cfg.backend = backend_from_string(structure);
      stress_cfg.cold = parse_range(cold);
      stress_cfg.hot = parse_range(hot);
      return cmd_stress(stress_cfg);
    }
    if (*local) {
      return cmd_check_local(backend_from_string(structure), bound,
                             local_seed, rotation_demo);
    }
    if (*lin) return cmd_lincheck(corpus_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
