#include "drq/toybench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "drq/attacks.hpp"
#include "drq/rng.hpp"

namespace drq {

Dataset make_two_gaussians(double separation, const std::optional<SpuriousSpec>& spurious, int n,
                           std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_two_gaussians: n must be >= 2");
    if (separation <= 0.0) throw std::invalid_argument("make_two_gaussians: separation must be > 0");
    Dataset data;
    data.name = "two_gaussians";
    data.d = 2;
    data.classes = 2;
    data.seed = seed;

    const double half = separation / 2.0;
    for (int i = 0; i < n; ++i) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(i), 0x3267ULL));
        const int label = i % 2;
        const double cx = label == 0 ? -half : half;
        data.features.push_back(cx + rng.next_gaussian());
        data.features.push_back(rng.next_gaussian());
        data.labels.push_back(label);
    }
    if (spurious) {
        if (spurious->center.size() != 2) {
            throw std::invalid_argument("make_two_gaussians: spurious center must be 2-d");
        }
        for (int i = 0; i < spurious->count; ++i) {
            SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(i), 0x7370ULL));
            data.features.push_back(spurious->center[0] + spurious->stddev * rng.next_gaussian());
            data.features.push_back(spurious->center[1] + spurious->stddev * rng.next_gaussian());
            data.labels.push_back(spurious->label);
        }
    }
    return data;
}

namespace {

std::vector<double> class_template(int grid, int label) {
    const double bg = 0.15, fg = 0.85;
    std::vector<double> img(static_cast<std::size_t>(grid) * grid, bg);
    const int mid = grid / 2;
    auto at = [&](int r, int c) -> double& { return img[static_cast<std::size_t>(r) * grid + c]; };
    switch (label) {
        case 0:  // horizontal bar
            for (int c = 0; c < grid; ++c) {
                at(mid - 1, c) = fg;
                at(mid, c) = fg;
            }
            break;
        case 1:  // vertical bar
            for (int r = 0; r < grid; ++r) {
                at(r, mid - 1) = fg;
                at(r, mid) = fg;
            }
            break;
        case 2:  // main diagonal
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    if (std::abs(r - c) <= 1) at(r, c) = fg;
                }
            }
            break;
        case 3:  // centered blob
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    const double dr = r - (grid - 1) / 2.0, dc = c - (grid - 1) / 2.0;
                    if (std::sqrt(dr * dr + dc * dc) <= grid / 4.0) at(r, c) = fg;
                }
            }
            break;
        case 4:  // anti-diagonal
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    if (std::abs(r + c - (grid - 1)) <= 1) at(r, c) = fg;
                }
            }
            break;
        case 5:  // frame
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    if (r == 0 || c == 0 || r == grid - 1 || c == grid - 1) at(r, c) = fg;
                }
            }
            break;
        case 6:  // checkerboard
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    if ((r / 2 + c / 2) % 2 == 0) at(r, c) = fg;
                }
            }
            break;
        default:  // bright top half
            for (int r = 0; r < grid / 2; ++r) {
                for (int c = 0; c < grid; ++c) at(r, c) = fg;
            }
            break;
    }
    return img;
}

}  // namespace

Dataset make_toy_images(int grid_size, int classes, int n, std::uint64_t seed, double noise_sigma) {
    if (grid_size < 4 || grid_size > 16) {
        throw std::invalid_argument("make_toy_images: grid_size must be in [4,16]");
    }
    if (classes < 2 || classes > 8) {
        throw std::invalid_argument("make_toy_images: classes must be in [2,8]");
    }
    Dataset data;
    data.name = "toy_images";
    data.d = grid_size * grid_size;
    data.classes = classes;
    data.seed = seed;
    data.grid = grid_size;

    std::vector<std::vector<double>> templates;
    for (int c = 0; c < classes; ++c) templates.push_back(class_template(grid_size, c));

    for (int i = 0; i < n; ++i) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(i), 0x696dULL));
        const int label = i % classes;
        for (double v : templates[label]) {
            const double pixel = v + noise_sigma * rng.next_gaussian();
            data.features.push_back(std::clamp(pixel, 0.0, 1.0));
        }
        data.labels.push_back(label);
    }
    return data;
}

namespace {

std::vector<DenseLayer> init_layers(int input_dim, int classes, const Architecture& arch,
                                    std::uint64_t seed) {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : arch.hidden) dims.push_back(h);
    dims.push_back(classes);

    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        DenseLayer l;
        l.in = dims[k];
        l.out = dims[k + 1];
        l.activation = k + 2 == dims.size() ? Activation::Identity : arch.activation;
        const double scale = std::sqrt(6.0 / (l.in + l.out));
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(k), 0x696eULL));
        l.weights.resize(static_cast<std::size_t>(l.out) * l.in);
        for (double& w : l.weights) w = rng.next_uniform(-scale, scale);
        l.bias.assign(l.out, 0.0);
        layers.push_back(std::move(l));
    }
    return layers;
}

std::vector<int> epoch_permutation(int n, std::uint64_t seed, int epoch) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(epoch), 0x7065ULL));
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    return order;
}

}  // namespace

DenseNetwork train_classifier(const Dataset& data, const Architecture& arch,
                              const TrainOptions& opts) {
    if (data.size() < 1) throw std::invalid_argument("train_classifier: empty dataset");
    std::vector<DenseLayer> layers = init_layers(data.d, data.classes, arch, opts.seed);
    if (opts.epochs == 0) return DenseNetwork(data.d, std::move(layers));

    std::optional<DomainBox> domain;
    if (data.grid > 0) domain = DomainBox{0.0, 1.0};

    AttackConfig attack;
    attack.iterations = opts.inner_iterations;
    attack.p = Norm::Linf;
    attack.domain = domain;

    const int n = data.size();
    const int batch = std::max(1, opts.batch_size);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const auto order = epoch_permutation(n, opts.seed, epoch);
        for (int start = 0; start < n; start += batch) {
            const int end = std::min(n, start + batch);
            const DenseNetwork net(data.d, layers);

            std::vector<std::vector<double>> grad_w(layers.size());
            std::vector<std::vector<double>> grad_b(layers.size());
            for (std::size_t k = 0; k < layers.size(); ++k) {
                grad_w[k].assign(layers[k].weights.size(), 0.0);
                grad_b[k].assign(layers[k].bias.size(), 0.0);
            }

            double loss = 0.0;
            for (int idx = start; idx < end; ++idx) {
                const int sample = order[idx];
                std::vector<double> x = data.row(sample);
                const int y = data.labels[sample];
                if (opts.mode == TrainMode::Adversarial && opts.epsilon_train > 0.0) {
                    const NormBall ball{Norm::Linf, x, opts.epsilon_train};
                    x = pgd_untargeted(net, x, y, ball, attack);
                }
                const NetworkGradients g = backward(net, x, y);
                loss += g.loss;
                for (std::size_t k = 0; k < layers.size(); ++k) {
                    for (std::size_t i = 0; i < grad_w[k].size(); ++i) grad_w[k][i] += g.weight[k][i];
                    for (std::size_t i = 0; i < grad_b[k].size(); ++i) grad_b[k][i] += g.bias[k][i];
                }
            }
            const double inv = 1.0 / (end - start);
            if (!std::isfinite(loss)) {
                throw TrainingDivergence("train_classifier: non-finite loss at epoch " +
                                         std::to_string(epoch));
            }
            for (std::size_t k = 0; k < layers.size(); ++k) {
                for (std::size_t i = 0; i < grad_w[k].size(); ++i) {
                    layers[k].weights[i] -= opts.learning_rate * inv * grad_w[k][i];
                }
                for (std::size_t i = 0; i < grad_b[k].size(); ++i) {
                    layers[k].bias[i] -= opts.learning_rate * inv * grad_b[k][i];
                }
            }
        }
    }
    return DenseNetwork(data.d, std::move(layers));
}

double accuracy(const Classifier& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    int correct = 0;
    for (int i = 0; i < data.size(); ++i) {
        if (predict(net, data.row(i)) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / data.size();
}

CorruptionKind corruption_from_string(const std::string& s) {
    if (s == "gaussian_noise" || s == "noise") return CorruptionKind::GaussianNoise;
    if (s == "rotation") return CorruptionKind::Rotation;
    if (s == "translation") return CorruptionKind::Translation;
    throw std::invalid_argument("unknown corruption kind: " + s);
}

std::string to_string(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::GaussianNoise: return "gaussian_noise";
        case CorruptionKind::Rotation: return "rotation";
        case CorruptionKind::Translation: return "translation";
    }
    return "gaussian_noise";
}

namespace {

std::vector<double> rotate_image(const std::vector<double>& img, int grid, double degrees) {
    const double theta = degrees * 3.14159265358979323846 / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double center = (grid - 1) / 2.0;
    std::vector<double> out(img.size(), 0.0);
    for (int r = 0; r < grid; ++r) {
        for (int col = 0; col < grid; ++col) {
            // inverse-rotate the target cell into the source image
            const double dr = r - center, dc = col - center;
            const double sr = c * dr + s * dc + center;
            const double sc = -s * dr + c * dc + center;
            const int r0 = static_cast<int>(std::floor(sr));
            const int c0 = static_cast<int>(std::floor(sc));
            const double fr = sr - r0, fc = sc - c0;
            double v = 0.0;
            for (int br = 0; br <= 1; ++br) {
                for (int bc = 0; bc <= 1; ++bc) {
                    const int rr = r0 + br, cc = c0 + bc;
                    if (rr < 0 || rr >= grid || cc < 0 || cc >= grid) continue;  // zero padding
                    const double w = (br ? fr : 1.0 - fr) * (bc ? fc : 1.0 - fc);
                    v += w * img[static_cast<std::size_t>(rr) * grid + cc];
                }
            }
            out[static_cast<std::size_t>(r) * grid + col] = v;
        }
    }
    return out;
}

std::vector<double> translate_image(const std::vector<double>& img, int grid, int dr, int dc) {
    std::vector<double> out(img.size(), 0.0);
    for (int r = 0; r < grid; ++r) {
        for (int c = 0; c < grid; ++c) {
            const int sr = r - dr, sc = c - dc;
            if (sr < 0 || sr >= grid || sc < 0 || sc >= grid) continue;
            out[static_cast<std::size_t>(r) * grid + c] = img[static_cast<std::size_t>(sr) * grid + sc];
        }
    }
    return out;
}

}  // namespace

Dataset corrupt(const Dataset& data, const CorruptionSpec& spec) {
    if (spec.kind != CorruptionKind::GaussianNoise && data.grid <= 0) {
        throw std::invalid_argument("corrupt: spatial corruption needs an image-grid dataset");
    }
    Dataset out = data;
    out.name = data.name + "+" + to_string(spec.kind);
    for (int i = 0; i < data.size(); ++i) {
        SplitMix64 rng(mix_key(spec.seed, static_cast<std::uint64_t>(i), 0x636fULL));
        std::vector<double> x = data.row(i);
        switch (spec.kind) {
            case CorruptionKind::GaussianNoise:
                for (double& v : x) {
                    v += spec.magnitude * rng.next_gaussian();
                    if (data.grid > 0) v = std::clamp(v, 0.0, 1.0);
                }
                break;
            case CorruptionKind::Rotation: {
                const double angle = rng.next_uniform(-spec.magnitude, spec.magnitude);
                x = rotate_image(x, data.grid, angle);
                break;
            }
            case CorruptionKind::Translation: {
                const int m = static_cast<int>(std::floor(spec.magnitude));
                const int dr = m == 0 ? 0 : static_cast<int>(rng.next_below(2 * m + 1)) - m;
                const int dc = m == 0 ? 0 : static_cast<int>(rng.next_below(2 * m + 1)) - m;
                x = translate_image(x, data.grid, dr, dc);
                break;
            }
        }
        std::copy(x.begin(), x.end(), out.features.begin() + static_cast<std::size_t>(i) * data.d);
    }
    return out;
}

std::vector<int> decision_boundary_raster(const std::function<int(const std::vector<double>&)>& label_fn,
                                          const Region& region, int resolution) {
    if (resolution < 16) throw std::invalid_argument("decision_boundary_raster: resolution >= 16");
    std::vector<int> grid(static_cast<std::size_t>(resolution) * resolution, 0);
    const double dx = (region.xmax - region.xmin) / resolution;
    const double dy = (region.ymax - region.ymin) / resolution;
    for (int i = 0; i < resolution; ++i) {
        const double y = region.ymax - (i + 0.5) * dy;
        for (int j = 0; j < resolution; ++j) {
            const double x = region.xmin + (j + 0.5) * dx;
            grid[static_cast<std::size_t>(i) * resolution + j] = label_fn({x, y});
        }
    }
    return grid;
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int j = 0; j < data.d; ++j) f << "f" << j << ",";
    f << "label\n";
    for (int i = 0; i < data.size(); ++i) {
        for (int j = 0; j < data.d; ++j) f << data.features[static_cast<std::size_t>(i) * data.d + j] << ",";
        f << data.labels[i] << "\n";
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(f, header)) throw std::runtime_error("empty dataset file: " + path);
    int d = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col == "label") break;
            ++d;
        }
    }
    if (d < 1) throw std::runtime_error("bad dataset header: " + header);
    Dataset data;
    data.name = path;
    data.d = d;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (int j = 0; j < d; ++j) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("short dataset row: " + line);
            data.features.push_back(std::stod(cell));
        }
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("missing label: " + line);
        data.labels.push_back(std::stoi(cell));
    }
    if (data.labels.empty()) throw std::runtime_error("dataset has no rows: " + path);
    data.classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
    data.classes = std::max(data.classes, 2);
    return data;
}

}  // namespace drq
