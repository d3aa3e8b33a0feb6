#include "drq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "drq/attacks.hpp"
#include "drq/fields.hpp"
#include "drq/rng.hpp"

namespace drq {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

void write_pgm(const std::vector<int>& labels, int resolution, int classes,
               const std::string& path) {
    if (static_cast<int>(labels.size()) != resolution * resolution) {
        throw std::invalid_argument("write_pgm: label grid size mismatch");
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "P2\n" << resolution << " " << resolution << "\n255\n";
    const int denom = std::max(1, classes - 1);
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            if (j) f << " ";
            f << labels[static_cast<std::size_t>(i) * resolution + j] * 255 / denom;
        }
        f << "\n";
    }
}

DrqResult DrqRunner::run(const Classifier& net, const std::vector<double>& x) const {
    if (explore_mode == SearchMode::Gradient && quantify_mode == SearchMode::Gradient) {
        return drq_predict(net, x, config);
    }
    return drq_predict_ablated(net, x, config, explore_mode, quantify_mode, n_random, config.seed);
}

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---- config -> domain objects ----

std::uint64_t global_seed(const Config& cfg) { return cfg.get_seed("seed", 7); }

int worker_count(const Config& cfg) { return cfg.get_int("workers", 4); }

std::optional<SpuriousSpec> island_from_config(const Config& cfg, bool enabled_default) {
    if (!cfg.get_bool("dataset.island.enable", enabled_default)) return std::nullopt;
    SpuriousSpec island;
    island.center = cfg.get_double_list("dataset.island.center", {-1.2, 0.9});
    island.count = cfg.get_int("dataset.island.count", 8);
    island.stddev = cfg.get_double("dataset.island.stddev", 0.1);
    island.label = cfg.get_int("dataset.island.label", 1);
    return island;
}

Dataset dataset_from_config(const Config& cfg, std::uint64_t seed, int count_override,
                            bool island_default) {
    const std::string kind = cfg.get_string("dataset.kind", "toy_images");
    if (kind == "two_gaussians") {
        const int n = count_override > 0 ? count_override : cfg.get_int("dataset.count", 200);
        return make_two_gaussians(cfg.get_double("dataset.separation", 4.0),
                                  island_from_config(cfg, island_default), n, seed);
    }
    if (kind == "toy_images") {
        const int n = count_override > 0 ? count_override : cfg.get_int("dataset.count", 2000);
        return make_toy_images(cfg.get_int("dataset.grid", 8), cfg.get_int("dataset.classes", 4), n,
                               seed, cfg.get_double("dataset.noise", 0.15));
    }
    if (kind == "csv") {
        Dataset data = load_dataset(cfg.get_string("dataset.csv"));
        data.grid = cfg.get_int("dataset.grid", 0);
        return data;
    }
    throw std::runtime_error("unknown dataset.kind: " + kind);
}

Dataset test_dataset_from_config(const Config& cfg, int count) {
    if (cfg.get_string("dataset.kind", "toy_images") == "csv" && cfg.has("dataset.test_csv")) {
        Dataset data = load_dataset(cfg.get_string("dataset.test_csv"));
        data.grid = cfg.get_int("dataset.grid", 0);
        return data;
    }
    return dataset_from_config(cfg, mix_key(global_seed(cfg), 0x74657374ULL), count, false);
}

Architecture arch_from_config(const Config& cfg) {
    Architecture arch;
    arch.hidden.clear();
    for (double h : cfg.get_double_list("model.hidden", {32, 32})) {
        arch.hidden.push_back(static_cast<int>(h));
    }
    arch.activation = activation_from_string(cfg.get_string("model.activation", "relu"));
    return arch;
}

TrainOptions train_options_from_config(const Config& cfg) {
    TrainOptions opts;
    const std::string mode = cfg.get_string("train.mode", "standard");
    if (mode == "standard") {
        opts.mode = TrainMode::Standard;
    } else if (mode == "adversarial") {
        opts.mode = TrainMode::Adversarial;
    } else {
        throw std::runtime_error("unknown train.mode: " + mode);
    }
    opts.epsilon_train = cfg.get_double("train.epsilon", 0.1);
    opts.inner_iterations = cfg.get_int("train.inner_iterations", 7);
    opts.epochs = cfg.get_int("train.epochs", 20);
    opts.learning_rate = cfg.get_double("train.lr", 0.05);
    opts.batch_size = cfg.get_int("train.batch", 32);
    opts.seed = global_seed(cfg);
    return opts;
}

DenseNetwork model_from_config(const Config& cfg, const Dataset& train_data) {
    if (cfg.has("model.path")) return load_network(cfg.get_string("model.path"));
    return train_classifier(train_data, arch_from_config(cfg), train_options_from_config(cfg));
}

std::optional<DomainBox> domain_for(const Dataset& data) {
    if (data.grid > 0) return DomainBox{0.0, 1.0};
    return std::nullopt;
}

DrqRunner drq_runner_from_config(const Config& cfg, Norm p, const Dataset& data) {
    DrqRunner runner;
    DrqConfig& d = runner.config;
    d.alpha = cfg.get_double("drq.alpha", 0.5);
    if (cfg.has("drq.confidence")) d.confidence_threshold = cfg.get_double("drq.confidence");
    const std::string eps_key = p == Norm::Linf ? "drq.epsilon_linf" : "drq.epsilon_l2";
    if (cfg.has(eps_key)) d.fixed_epsilon_p = cfg.get_double(eps_key);
    d.p = p;
    if (cfg.has("drq.top_k")) d.top_k = cfg.get_int("drq.top_k");
    d.exploration_iterations = cfg.get_int("drq.exploration_iterations", 20);
    d.quantification_iterations = cfg.get_int("drq.quantification_iterations", 20);
    d.calibration_max_iterations = cfg.get_int("drq.calibration_iterations", 200);
    d.calibration_max_radius = cfg.get_double("drq.calibration_max_radius", 1e3);
    d.domain = domain_for(data);
    d.seed = global_seed(cfg);

    auto mode = [&](const std::string& key) {
        const std::string v = cfg.get_string(key, "gradient");
        if (v == "gradient") return SearchMode::Gradient;
        if (v == "random") return SearchMode::Random;
        throw std::runtime_error(key + " must be gradient or random");
    };
    runner.explore_mode = mode("drq.explore_mode");
    runner.quantify_mode = mode("drq.quantify_mode");
    runner.n_random = cfg.get_int("drq.n_random", 20);
    return runner;
}

// ---- the attack suite (section 4.1.3 members that are in scope) ----

struct SuiteAttack {
    std::string name;
    std::function<std::vector<double>(const Classifier&, const std::vector<double>&, int,
                                      std::uint64_t)>
        run;
};

std::vector<SuiteAttack> attack_suite_from_config(const Config& cfg, const Dataset& data) {
    const double eps = cfg.get_double("attack.epsilon", 0.1);
    const int iters = cfg.get_int("attack.iterations", 100);
    const Norm p = norm_from_string(cfg.get_string("attack.norm", "linf"));
    const auto domain = domain_for(data);
    const int noise_samples = cfg.get_int("attack.noise_samples", 10);
    const int attack_samples = cfg.get_int("attack.attack_samples", 4);
    const int inner_iters = cfg.get_int("attack.inner_iterations", 7);
    const int random_samples = cfg.get_int("attack.random_samples", 1000);

    auto base_config = [=](std::uint64_t seed) {
        AttackConfig a;
        a.iterations = iters;
        a.p = p;
        a.domain = domain;
        a.seed = seed;
        return a;
    };

    std::vector<SuiteAttack> suite;
    for (const std::string& name :
         cfg.get_list("attack.suite", {"pgd", "pgd_noise", "pgd_attack", "random_noise"})) {
        if (name == "pgd") {
            suite.push_back({name, [=](const Classifier& net, const std::vector<double>& x, int y,
                                       std::uint64_t seed) {
                                 return pgd_untargeted(net, x, y, NormBall{p, x, eps},
                                                       base_config(seed));
                             }});
        } else if (name == "pgd_noise") {
            suite.push_back({name, [=](const Classifier& net, const std::vector<double>& x, int y,
                                       std::uint64_t seed) {
                                 return pgd_eot(net, x, y, NormBall{p, x, eps}, base_config(seed),
                                                EotConfig{noise_samples, 0, std::nullopt},
                                                EotMode::Untargeted);
                             }});
        } else if (name == "pgd_attack") {
            suite.push_back({name, [=](const Classifier& net, const std::vector<double>& x, int y,
                                       std::uint64_t seed) {
                                 return pgd_eot(net, x, y, NormBall{p, x, eps}, base_config(seed),
                                                EotConfig{attack_samples, inner_iters, std::nullopt},
                                                EotMode::Untargeted);
                             }});
        } else if (name == "random_noise") {
            suite.push_back({name, [=](const Classifier& net, const std::vector<double>& x, int y,
                                       std::uint64_t seed) {
                                 (void)y;
                                 return random_noise_attack(net, x, NormBall{p, x, eps},
                                                            random_samples, seed)
                                     .worst_point;
                             }});
        } else {
            throw std::runtime_error("unknown attack.suite member: " + name);
        }
    }
    return suite;
}

// ---- evaluation primitives ----

struct EvalCounts {
    int n = 0;
    int std_ok = 0;
    int linf_ok = 0;
    int l2_ok = 0;
};

EvalCounts evaluate_dataset(const Classifier& net, const Dataset& data, const DrqRunner& drq_linf,
                            const DrqRunner& drq_l2, int workers) {
    const int n = data.size();
    std::vector<int> std_ok(n), linf_ok(n), l2_ok(n);
    parallel_for(n, workers, [&](int i) {
        const auto x = data.row(i);
        const int y = data.labels[i];
        std_ok[i] = predict(net, x) == y;
        linf_ok[i] = drq_linf.run(net, x).label == y;
        l2_ok[i] = drq_l2.run(net, x).label == y;
    });
    EvalCounts counts;
    counts.n = n;
    for (int i = 0; i < n; ++i) {
        counts.std_ok += std_ok[i];
        counts.linf_ok += linf_ok[i];
        counts.l2_ok += l2_ok[i];
    }
    return counts;
}

}  // namespace

// ---- commands ----

int cmd_train(const Config& cfg, const std::string& out_dir) {
    const Dataset train_data = dataset_from_config(cfg, global_seed(cfg), -1, false);
    const int test_count = cfg.get_int("dataset.test_count", std::max(50, train_data.size() / 4));
    const Dataset test_data = test_dataset_from_config(cfg, test_count);

    const DenseNetwork net =
        train_classifier(train_data, arch_from_config(cfg), train_options_from_config(cfg));

    const std::string model_file = join_path(out_dir, cfg.get_string("train.output", "model.txt"));
    save_network(net, model_file);

    const double train_acc = accuracy(net, train_data);
    const double test_acc = accuracy(net, test_data);
    std::cout << "train_accuracy=" << pct(train_acc) << " test_accuracy=" << pct(test_acc) << "\n";

    std::ofstream summary(join_path(out_dir, "train_summary.csv"));
    summary << "split,accuracy\n";
    summary << "train," << pct(train_acc) << "\n";
    summary << "test," << pct(test_acc) << "\n";
    return 0;
}

int cmd_eval(const Config& cfg, const std::string& out_dir) {
    const std::uint64_t seed = global_seed(cfg);
    const int workers = worker_count(cfg);
    const Dataset train_data = dataset_from_config(cfg, seed, -1, false);
    const DenseNetwork net = model_from_config(cfg, train_data);
    const Dataset test_data = test_dataset_from_config(cfg, cfg.get_int("eval.samples", 500));

    const DrqRunner drq_linf = drq_runner_from_config(cfg, Norm::Linf, test_data);
    const DrqRunner drq_l2 = drq_runner_from_config(cfg, Norm::L2, test_data);

    std::ostringstream report;
    report << "condition,standard,drq_linf,drq_l2\n";
    auto add_row = [&](const std::string& name, const EvalCounts& c) {
        const double n = std::max(1, c.n);
        report << name << "," << pct(c.std_ok / n) << "," << pct(c.linf_ok / n) << ","
               << pct(c.l2_ok / n) << "\n";
        std::cout << name << " standard=" << pct(c.std_ok / n) << " drq_linf=" << pct(c.linf_ok / n)
                  << " drq_l2=" << pct(c.l2_ok / n) << "\n";
    };

    std::ostringstream cosine_csv;
    cosine_csv << "attack,mean_cosine,corrected\n";
    bool have_attacks = false;

    for (const std::string& condition : cfg.get_list("eval.conditions", {"clean"})) {
        if (condition == "clean") {
            add_row("clean", evaluate_dataset(net, test_data, drq_linf, drq_l2, workers));
        } else if (condition == "noise" || condition == "rotation" || condition == "translation") {
            CorruptionSpec spec;
            spec.kind = corruption_from_string(condition == "noise" ? "gaussian_noise" : condition);
            if (condition == "noise") {
                spec.magnitude = cfg.get_double("eval.noise_sigma", 0.3);
            } else if (condition == "rotation") {
                spec.magnitude = cfg.get_double("eval.rotation_degrees", 20.0);
            } else {
                spec.magnitude = cfg.get_double("eval.translation_pixels", 1.0);
            }
            spec.seed = mix_key(seed, 0x636f7272ULL);
            add_row(condition, evaluate_dataset(net, corrupt(test_data, spec), drq_linf, drq_l2,
                                                workers));
        } else if (condition == "attack") {
            have_attacks = true;
            const auto suite = attack_suite_from_config(cfg, test_data);
            if (suite.empty()) throw std::runtime_error("attack condition with empty attack.suite");
            const int n = test_data.size();
            const Norm attack_norm = norm_from_string(cfg.get_string("attack.norm", "linf"));
            const DrqRunner& cosine_runner = attack_norm == Norm::Linf ? drq_linf : drq_l2;

            // per-sample AND over the suite, per inference method
            std::vector<int> worst_std(n, 1), worst_linf(n, 1), worst_l2(n, 1);
            for (std::size_t a = 0; a < suite.size(); ++a) {
                std::vector<int> std_ok(n), linf_ok(n), l2_ok(n);
                std::vector<double> cosines(n, 2.0);  // 2.0 = not corrected
                parallel_for(n, workers, [&](int i) {
                    const auto x = test_data.row(i);
                    const int y = test_data.labels[i];
                    const auto adv = suite[a].run(net, x, y, mix_key(seed, i, a));
                    std_ok[i] = predict(net, adv) == y;
                    const DrqResult linf_res = drq_linf.run(net, adv);
                    const DrqResult l2_res = drq_l2.run(net, adv);
                    linf_ok[i] = linf_res.label == y;
                    l2_ok[i] = l2_res.label == y;
                    const DrqResult& corrected =
                        attack_norm == Norm::Linf ? linf_res : l2_res;
                    const bool was_corrected = !std_ok[i] && corrected.label == y &&
                                               corrected.quantified.count(corrected.label);
                    if (was_corrected) {
                        try {
                            cosines[i] = drq_cosine_diagnostic(
                                x, corrected.quantified.at(corrected.label), adv);
                        } catch (const DegenerateDirection&) {
                        }
                    }
                });
                EvalCounts counts;
                counts.n = n;
                double cos_sum = 0.0;
                int cos_count = 0;
                for (int i = 0; i < n; ++i) {
                    counts.std_ok += std_ok[i];
                    counts.linf_ok += linf_ok[i];
                    counts.l2_ok += l2_ok[i];
                    worst_std[i] &= std_ok[i];
                    worst_linf[i] &= linf_ok[i];
                    worst_l2[i] &= l2_ok[i];
                    if (cosines[i] <= 1.0) {
                        cos_sum += cosines[i];
                        ++cos_count;
                    }
                }
                add_row(suite[a].name, counts);
                cosine_csv << suite[a].name << ","
                           << (cos_count ? fmt(cos_sum / cos_count) : "nan") << "," << cos_count
                           << "\n";
                (void)cosine_runner;
            }
            EvalCounts worst;
            worst.n = n;
            for (int i = 0; i < n; ++i) {
                worst.std_ok += worst_std[i];
                worst.linf_ok += worst_linf[i];
                worst.l2_ok += worst_l2[i];
            }
            add_row("worst_case", worst);
        } else {
            throw std::runtime_error("unknown eval condition: " + condition);
        }
    }

    std::ofstream out(join_path(out_dir, "eval_report.csv"));
    out << report.str();
    if (have_attacks) {
        std::ofstream cos_out(join_path(out_dir, "eval_cosine.csv"));
        cos_out << cosine_csv.str();
    }
    return 0;
}

int cmd_verify_theory(const Config& cfg, const std::string& out_dir) {
    const std::uint64_t seed = global_seed(cfg);
    const int random_fields = cfg.get_int("verify.random_fields", 200);

    std::ostringstream csv;
    csv << "field,x,epsilon,alpha,check,bound,measured,tolerance,pass\n";
    int violations = 0;
    int total_rows = 0;
    bool negate = cfg.get_bool("verify.negate", false);

    auto emit = [&](const std::string& field, const std::string& x, double eps,
                    const std::string& alpha, const VerificationReport& report) {
        for (const CheckRow& row : report.rows) {
            bool pass = row.pass;
            if (negate) {  // self-test hook: corrupt exactly one check
                pass = !pass;
                negate = false;
            }
            if (!pass) ++violations;
            ++total_rows;
            csv << field << "," << x << "," << fmt(eps) << "," << alpha << "," << row.check << ","
                << fmt(row.bound) << "," << fmt(row.measured) << "," << fmt(row.tolerance) << ","
                << (pass ? 1 : 0) << "\n";
        }
    };

    // randomized monotonicity sweep over mixture fields in d = 1 and 2
    for (int i = 0; i < random_fields; ++i) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(i), 0x766699ULL));
        const int d = 1 + static_cast<int>(i % 2);
        const int bumps = 1 + static_cast<int>(rng.next_below(3));
        const double base = rng.next_uniform(0.35, 0.65);
        const double amp_budget = 0.3 / bumps;
        std::vector<GaussianBump> mixture;
        for (int b = 0; b < bumps; ++b) {
            GaussianBump bump;
            bump.amplitude = rng.next_uniform(-amp_budget, amp_budget);
            bump.sigma = rng.next_uniform(0.1, 0.6);
            for (int k = 0; k < d; ++k) bump.center.push_back(rng.next_uniform(-1.0, 1.0));
            mixture.push_back(std::move(bump));
        }
        const ScalarField field = ScalarField::gaussian_mixture(base, std::move(mixture));
        std::vector<double> x;
        for (int k = 0; k < d; ++k) x.push_back(rng.next_uniform(-0.5, 0.5));
        const double eps = rng.next_uniform(0.05, 0.5);
        const double a_low = rng.next_double();
        const double a_high = a_low + (1.0 - a_low) * rng.next_double();

        std::ostringstream xs;
        xs.precision(6);
        for (int k = 0; k < d; ++k) xs << (k ? ";" : "") << x[k];
        emit(field.describe(), xs.str(), eps, fmt(a_low) + std::string(";") + fmt(a_high),
             verify_monotonicity(field, x, eps, a_low, a_high));
    }

    // quadratic grid, closed-form route and lattice route
    const std::vector<double> mus = cfg.get_double_list("verify.mu_grid", {0.25, 0.5, 1.0, 2.0});
    const std::vector<double> epss = cfg.get_double_list("verify.eps_grid", {0.1, 0.2, 0.4});
    const std::vector<double> alphas =
        cfg.get_double_list("verify.alpha_grid", {0.0, 0.25, 0.5, 0.75, 1.0});
    const double u0 = cfg.get_double("verify.u0", 0.3);
    for (double mu : mus) {
        for (double eps : epss) {
            const ScalarField field = ScalarField::quadratic(u0, mu, {0.0});
            for (double alpha : alphas) {
                emit(field.describe(), "0", eps, fmt(alpha),
                     verify_strong_convexity_bound(field, {0.0}, eps, alpha, false));
                emit(field.describe() + "[grid]", "0", eps, fmt(alpha),
                     verify_strong_convexity_bound(field, {0.0}, eps, alpha, true));
            }
        }
    }

    std::ofstream out(join_path(out_dir, "verify_report.csv"));
    out << csv.str();
    std::cout << "checks=" << total_rows << " violations=" << violations << "\n";
    if (violations > 0) {
        std::cout << "violating rows are marked pass=0 in verify_report.csv\n";
        return 2;
    }
    return 0;
}

int cmd_figure1(const Config& cfg, const std::string& out_dir) {
    const std::uint64_t seed = global_seed(cfg);
    const int workers = worker_count(cfg);

    Config fig_cfg = cfg;
    if (!cfg.has("dataset.kind")) fig_cfg.set("dataset.kind", "two_gaussians");
    if (!cfg.has("model.hidden")) fig_cfg.set("model.hidden", "16,16");
    if (!cfg.has("model.activation")) fig_cfg.set("model.activation", "tanh");
    if (!cfg.has("train.epochs")) fig_cfg.set("train.epochs", "3000");
    if (!cfg.has("train.lr")) fig_cfg.set("train.lr", "0.1");

    const auto island = island_from_config(fig_cfg, true);
    Dataset data = dataset_from_config(fig_cfg, seed, -1, true);
    if (data.d != 2) throw std::runtime_error("figure1 needs a 2-d dataset");
    const DenseNetwork net = model_from_config(fig_cfg, data);

    const int island_label = island ? island->label : 1;
    const int enclosing_label = fig_cfg.get_int("figure1.expected_label", island_label == 1 ? 0 : 1);
    std::vector<double> probe = fig_cfg.get_double_list(
        "figure1.probe", island ? island->center : std::vector<double>{0.0, 0.0});

    DrqRunner runner =
        drq_runner_from_config(fig_cfg, norm_from_string(fig_cfg.get_string("drq.norm", "l2")), data);

    const DrqResult probe_result = runner.run(net, probe);

    const int res = fig_cfg.get_int("figure1.resolution", 128);
    const auto region_vals =
        fig_cfg.get_double_list("figure1.region", {-4.0, 4.0, -4.0, 4.0});
    const Region region{region_vals[0], region_vals[1], region_vals[2], region_vals[3]};

    std::vector<int> raster_std(static_cast<std::size_t>(res) * res);
    std::vector<int> raster_drq(static_cast<std::size_t>(res) * res);
    const double dx = (region.xmax - region.xmin) / res;
    const double dy = (region.ymax - region.ymin) / res;
    parallel_for(res * res, workers, [&](int cell) {
        const int i = cell / res, j = cell % res;
        const std::vector<double> p{region.xmin + (j + 0.5) * dx, region.ymax - (i + 0.5) * dy};
        raster_std[cell] = predict(net, p);
        raster_drq[cell] = runner.run(net, p).label;
    });
    write_pgm(raster_std, res, data.classes, join_path(out_dir, "raster_standard.pgm"));
    write_pgm(raster_drq, res, data.classes, join_path(out_dir, "raster_drq.pgm"));

    // spurious-island cells inside a window around the planted cluster
    const std::vector<double> window_center =
        fig_cfg.get_double_list("figure1.window", island ? island->center
                                                         : std::vector<double>{0.0, 0.0});
    const double window_half = fig_cfg.get_double("figure1.window_half", 0.75);
    int island_std = 0, island_drq = 0;
    for (int i = 0; i < res; ++i) {
        const double y = region.ymax - (i + 0.5) * dy;
        for (int j = 0; j < res; ++j) {
            const double x = region.xmin + (j + 0.5) * dx;
            if (std::abs(x - window_center[0]) > window_half ||
                std::abs(y - window_center[1]) > window_half) {
                continue;
            }
            const int cell = i * res + j;
            if (raster_std[cell] == island_label) ++island_std;
            if (raster_drq[cell] == island_label) ++island_drq;
        }
    }

    {
        std::ofstream f(join_path(out_dir, "figure1_probe.csv"));
        f << "probe_x,probe_y,standard_label,drq_label,epsilon_p,robust_confidence_0,robust_"
             "confidence_1\n";
        auto rconf = [&](int cls) {
            const auto it = probe_result.robust_confidence.find(cls);
            return it == probe_result.robust_confidence.end() ? std::string("nan")
                                                              : fmt(it->second);
        };
        f << fmt(probe[0]) << "," << fmt(probe[1]) << "," << probe_result.standard_label << ","
          << probe_result.label << "," << fmt(probe_result.epsilon_p) << "," << rconf(0) << ","
          << rconf(1) << "\n";
    }
    {
        std::ofstream f(join_path(out_dir, "figure1_summary.csv"));
        f << "standard_island_cells,drq_island_cells,probe_standard,probe_drq,flipped\n";
        const bool flipped = probe_result.standard_label == island_label &&
                             probe_result.label == enclosing_label;
        f << island_std << "," << island_drq << "," << probe_result.standard_label << ","
          << probe_result.label << "," << (flipped ? 1 : 0) << "\n";
    }

    std::cout << "probe standard=" << probe_result.standard_label
              << " drq=" << probe_result.label << " epsilon_p=" << fmt(probe_result.epsilon_p)
              << "\n";
    std::cout << "island_cells standard=" << island_std << " drq=" << island_drq << "\n";

    const bool expect_flip = fig_cfg.get_bool("figure1.expect_flip", island.has_value());
    if (expect_flip) {
        if (probe_result.standard_label != island_label || probe_result.label != enclosing_label) {
            std::cout << "figure1: probe was not flipped from " << island_label << " to "
                      << enclosing_label << "\n";
            return 2;
        }
    }
    return 0;
}

int cmd_sweep(const Config& cfg, const std::string& parameter, const std::string& out_dir) {
    const std::uint64_t seed = global_seed(cfg);
    const int workers = worker_count(cfg);
    const Dataset train_data = dataset_from_config(cfg, seed, -1, false);
    const DenseNetwork net = model_from_config(cfg, train_data);
    const Dataset test_data = test_dataset_from_config(cfg, cfg.get_int("sweep.samples", 200));
    const Norm p = norm_from_string(cfg.get_string("drq.norm", "linf"));
    const int n = test_data.size();

    std::map<std::string, std::vector<double>> default_values = {
        {"iterations", {1, 5, 10, 20}},
        {"confidence_threshold", {0.1, 0.3, 0.5, 0.7, 0.9}},
        {"alpha", {0.0, 0.25, 0.5, 0.75, 1.0}},
        {"epsilon", {0.05, 0.1, 0.2, 0.3, 0.5}},
    };
    if (!default_values.count(parameter)) {
        throw std::runtime_error("unknown sweep parameter: " + parameter);
    }
    const std::vector<double> values = cfg.get_double_list("sweep.values", default_values[parameter]);
    if (values.empty()) throw std::runtime_error("sweep.values is empty");

    const double attack_eps = cfg.get_double("attack.epsilon", 0.1);
    const int attack_iters = cfg.get_int("attack.iterations", 100);
    const auto domain = domain_for(test_data);

    auto attacked_inputs = [&](double eps) {
        std::vector<std::vector<double>> adv(n);
        parallel_for(n, workers, [&](int i) {
            AttackConfig a;
            a.iterations = attack_iters;
            a.p = p;
            a.domain = domain;
            a.seed = mix_key(seed, i, 0x617476ULL);
            const auto x = test_data.row(i);
            adv[i] = pgd_untargeted(net, x, test_data.labels[i], NormBall{p, x, eps}, a);
        });
        return adv;
    };

    std::ostringstream csv;
    std::ostringstream summary;

    if (parameter == "confidence_threshold") {
        csv << "value,mean_epsilon_p\n";
        for (double c : values) {
            DrqRunner runner = drq_runner_from_config(cfg, p, test_data);
            runner.config.confidence_threshold = c;
            runner.config.fixed_epsilon_p.reset();
            std::vector<double> eps(n);
            parallel_for(n, workers, [&](int i) {
                try {
                    eps[i] = calibrate(net, test_data.row(i), runner.config);
                } catch (const SearchFailure&) {
                    eps[i] = runner.config.calibration_max_radius;
                }
            });
            double mean = 0.0;
            for (double e : eps) mean += e;
            mean /= std::max(1, n);
            csv << fmt(c) << "," << fmt(mean) << "\n";
            summary << "c=" << fmt(c) << " mean_epsilon_p=" << fmt(mean) << "\n";
        }
    } else if (parameter == "epsilon") {
        csv << "value,standard,drq\n";
        const DrqRunner runner = drq_runner_from_config(cfg, p, test_data);
        for (double eps : values) {
            const auto adv = attacked_inputs(eps);
            std::vector<int> std_ok(n), drq_ok(n);
            parallel_for(n, workers, [&](int i) {
                std_ok[i] = predict(net, adv[i]) == test_data.labels[i];
                drq_ok[i] = runner.run(net, adv[i]).label == test_data.labels[i];
            });
            int s = 0, d = 0;
            for (int i = 0; i < n; ++i) {
                s += std_ok[i];
                d += drq_ok[i];
            }
            csv << fmt(eps) << "," << pct(static_cast<double>(s) / n) << ","
                << pct(static_cast<double>(d) / n) << "\n";
            summary << "eps=" << fmt(eps) << " standard=" << pct(static_cast<double>(s) / n)
                    << " drq=" << pct(static_cast<double>(d) / n) << "\n";
        }
    } else {
        csv << "value,clean,attacked\n";
        const auto adv = attacked_inputs(attack_eps);
        for (double v : values) {
            DrqRunner runner = drq_runner_from_config(cfg, p, test_data);
            if (parameter == "iterations") {
                runner.config.exploration_iterations = static_cast<int>(v);
                runner.config.quantification_iterations = static_cast<int>(v);
            } else {
                runner.config.alpha = v;
            }
            std::vector<int> clean_ok(n), adv_ok(n);
            parallel_for(n, workers, [&](int i) {
                clean_ok[i] = runner.run(net, test_data.row(i)).label == test_data.labels[i];
                adv_ok[i] = runner.run(net, adv[i]).label == test_data.labels[i];
            });
            int c = 0, a = 0;
            for (int i = 0; i < n; ++i) {
                c += clean_ok[i];
                a += adv_ok[i];
            }
            csv << fmt(v) << "," << pct(static_cast<double>(c) / n) << ","
                << pct(static_cast<double>(a) / n) << "\n";
            summary << parameter << "=" << fmt(v) << " clean=" << pct(static_cast<double>(c) / n)
                    << " attacked=" << pct(static_cast<double>(a) / n) << "\n";
        }
    }

    std::ofstream out(join_path(out_dir, "sweep_" + parameter + ".csv"));
    out << csv.str();
    std::cout << summary.str();
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Decision-region quantification toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string sweep_parameter;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--workers", workers_override, "worker pool size");
    };

    CLI::App* train = app.add_subcommand("train", "train a classifier and write the model file");
    CLI::App* eval = app.add_subcommand("eval", "accuracy report for standard and DRQ inference");
    CLI::App* verify =
        app.add_subcommand("verify-theory", "run the binary-classification theory sweep");
    CLI::App* figure1 =
        app.add_subcommand("figure1", "two-Gaussian spurious-island demonstration rasters");
    CLI::App* sweep = app.add_subcommand("sweep", "hyperparameter sweep report");
    for (CLI::App* sub : {train, eval, verify, figure1, sweep}) add_common(sub);
    sweep->add_option("--parameter", sweep_parameter,
                      "iterations | confidence_threshold | alpha | epsilon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        Config cfg = Config::from_file(config_path);
        if (seed_override) cfg.set("seed", std::to_string(*seed_override));
        if (workers_override) cfg.set("workers", std::to_string(*workers_override));
        fs::create_directories(out_dir);

        if (train->parsed()) return cmd_train(cfg, out_dir);
        if (eval->parsed()) return cmd_eval(cfg, out_dir);
        if (verify->parsed()) return cmd_verify_theory(cfg, out_dir);
        if (figure1->parsed()) return cmd_figure1(cfg, out_dir);
        if (sweep->parsed()) {
            const std::string parameter =
                !sweep_parameter.empty() ? sweep_parameter : cfg.get_string("sweep.parameter");
            return cmd_sweep(cfg, parameter, out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace drq
