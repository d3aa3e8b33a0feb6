#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drq/config.hpp"
#include "drq/drq.hpp"
#include "drq/toybench.hpp"

namespace drq {

// Bounded worker pool over [0, n); every fn(i) must be independent so the
// schedule can never change results.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Plain-text portable graymap; labels scaled onto 0..255.
void write_pgm(const std::vector<int>& labels, int resolution, int classes,
               const std::string& path);

// Per-run DRQ dispatch: gradient phases by default, random phases when the
// ablation modes are selected.
struct DrqRunner {
    DrqConfig config;
    SearchMode explore_mode = SearchMode::Gradient;
    SearchMode quantify_mode = SearchMode::Gradient;
    int n_random = 20;

    DrqResult run(const Classifier& net, const std::vector<double>& x) const;
};

// CLI subcommands; each returns a process exit code and writes its outputs
// under out_dir.
int cmd_train(const Config& cfg, const std::string& out_dir);
int cmd_eval(const Config& cfg, const std::string& out_dir);
int cmd_verify_theory(const Config& cfg, const std::string& out_dir);
int cmd_figure1(const Config& cfg, const std::string& out_dir);
int cmd_sweep(const Config& cfg, const std::string& parameter, const std::string& out_dir);

// Argument parsing + dispatch for the `drq` binary.
int run_cli(int argc, char** argv);

}  // namespace drq
