#include "ultrav/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ultrav/linalg.hpp"

namespace ultrav {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * half + 1));
    double total = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + half)] = v;
        total += v;
    }
    for (double& v : k) v /= total;
    return k;
}

Index reflect(Index i, Index n) {
    if (n == 1) return 0;
    const Index period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

// Blurs along one axis of a column-major n_rows x n_cols matrix.
Eigen::MatrixXd blur(const Eigen::MatrixXd& in, double sigma, bool along_rows) {
    const auto k = gaussian_kernel(sigma);
    const auto half = static_cast<Index>(k.size() / 2);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(in.rows(), in.cols());
    for (Index i = 0; i < in.rows(); ++i) {
        for (Index j = 0; j < in.cols(); ++j) {
            double acc = 0.0;
            for (Index t = -half; t <= half; ++t) {
                const double w = k[static_cast<std::size_t>(t + half)];
                acc += along_rows ? w * in(reflect(i + t, in.rows()), j)
                                  : w * in(i, reflect(j + t, in.cols()));
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// Zero-mean, unit-variance smoothed white-noise field.
Eigen::MatrixXd smooth_field(Index n1, Index n2, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd f(n1, n2);
    for (Index i = 0; i < n1; ++i) {
        for (Index j = 0; j < n2; ++j) f(i, j) = normal(rng);
    }
    f = blur(blur(f, sigma, true), sigma, false);
    f.array() -= f.mean();
    const double sd = std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
    if (sd > 0.0) f /= sd;
    return f;
}

// Smooth curve over `bands` samples with unit RMS.
Eigen::VectorXd smooth_curve(Index bands, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd c(bands, 1);
    for (Index l = 0; l < bands; ++l) c(l, 0) = normal(rng);
    c = blur(c, std::max(2.0, static_cast<double>(bands) / 20.0), true);
    Eigen::VectorXd v = c.col(0);
    v.array() -= v.mean();
    const double rms = std::sqrt(v.squaredNorm() / static_cast<double>(bands));
    if (rms > 0.0) v /= rms;
    return v;
}

Tensor3 gaussian_field_abundances(const SceneSpec& spec, double len, std::mt19937_64& rng) {
    const Index r = spec.library.cols();
    Tensor3 a({spec.n1, spec.n2, r});
    std::vector<Eigen::MatrixXd> fields;
    for (Index k = 0; k < r; ++k) fields.push_back(smooth_field(spec.n1, spec.n2, len, rng));
    constexpr double gain = 0.35;
    Eigen::VectorXd v(r);
    for (Index i = 0; i < spec.n1; ++i) {
        for (Index j = 0; j < spec.n2; ++j) {
            for (Index k = 0; k < r; ++k) v(k) = 1.0 / static_cast<double>(r) + gain * fields[static_cast<std::size_t>(k)](i, j);
            const Eigen::VectorXd p = project_to_simplex(v);
            for (Index k = 0; k < r; ++k) a(i, j, k) = p(k);
        }
    }
    return a;
}

Tensor3 patch_abundances(const SceneSpec& spec, double len, std::mt19937_64& rng) {
    const Index r = spec.library.cols();
    const Index seeds = 3 * r;
    std::uniform_real_distribution<double> u1(0.0, static_cast<double>(spec.n1));
    std::uniform_real_distribution<double> u2(0.0, static_cast<double>(spec.n2));
    std::vector<std::array<double, 2>> centers;
    for (Index s = 0; s < seeds; ++s) centers.push_back({u1(rng), u2(rng)});
    Tensor3 a({spec.n1, spec.n2, r});
    Eigen::VectorXd w(r);
    for (Index i = 0; i < spec.n1; ++i) {
        for (Index j = 0; j < spec.n2; ++j) {
            w.setZero();
            for (Index s = 0; s < seeds; ++s) {
                const double di = static_cast<double>(i) - centers[static_cast<std::size_t>(s)][0];
                const double dj = static_cast<double>(j) - centers[static_cast<std::size_t>(s)][1];
                w(s % r) += std::exp(-0.5 * (di * di + dj * dj) / (len * len));
            }
            const double total = w.sum();
            for (Index k = 0; k < r; ++k) {
                a(i, j, k) = total > 0.0 ? w(k) / total : 1.0 / static_cast<double>(r);
            }
        }
    }
    return a;
}

} // namespace

SceneTruth generate_scene(const SceneSpec& spec) {
    const Eigen::MatrixXd& lib = spec.library;
    const Index bands = lib.rows();
    const Index r = lib.cols();
    if (spec.n1 < 1 || spec.n2 < 1) throw SpecError("generate_scene: scene dims must be positive");
    if (bands < 1 || r < 1) throw SpecError("generate_scene: empty endmember library");
    if (!lib.allFinite() || lib.minCoeff() < 0.0) {
        throw SpecError("generate_scene: library spectra must be finite and nonnegative");
    }
    for (Index k = 0; k < r; ++k) {
        if (lib.col(k).norm() == 0.0) {
            throw SpecError("generate_scene: library column " + std::to_string(k) + " is zero");
        }
    }
    if (std::isnan(spec.snr_db) || spec.snr_db == -kNoiseless) {
        throw SpecError("generate_scene: snr_db must be finite or +inf");
    }
    const double len = spec.correlation_length > 0.0
                           ? spec.correlation_length
                           : static_cast<double>(std::max(spec.n1, spec.n2)) / 8.0;

    std::mt19937_64 rng(spec.seed);
    SceneTruth truth;
    truth.abundances = spec.abundance_style == AbundanceStyle::GaussianFields
                           ? gaussian_field_abundances(spec, len, rng)
                           : patch_abundances(spec, len, rng);

    const Index pixels = spec.n1 * spec.n2;
    truth.endmembers = Tensor4({spec.n1, spec.n2, bands, r});
    auto em_slab = [&](Index p) {
        return Eigen::Map<RowMajorMatrix>(truth.endmembers.data().data() + p * bands * r, bands, r);
    };
    for (Index p = 0; p < pixels; ++p) em_slab(p) = lib;

    if (const auto* mult = std::get_if<MultiplicativeVariability>(&spec.variability)) {
        if (!(mult->sigma >= 0.0)) throw SpecError("generate_scene: sigma must be >= 0");
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index p = 0; p < pixels; ++p) {
            auto s = em_slab(p);
            for (Index k = 0; k < r; ++k) s.col(k) *= std::max(0.1, 1.0 + mult->sigma * normal(rng));
        }
    } else if (const auto* add = std::get_if<AdditiveVariability>(&spec.variability)) {
        if (!(add->sigma >= 0.0)) throw SpecError("generate_scene: sigma must be >= 0");
        constexpr int components = 3;
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index k = 0; k < r; ++k) {
            const double amp = add->sigma * lib.col(k).mean() / std::sqrt(static_cast<double>(components));
            for (int c = 0; c < components; ++c) {
                const Eigen::VectorXd curve = smooth_curve(bands, rng);
                for (Index p = 0; p < pixels; ++p) em_slab(p).col(k) += (amp * normal(rng)) * curve;
            }
        }
        for (double& v : truth.endmembers.data()) v = std::max(v, 0.0);
    }

    truth.clean_cube = Tensor3({spec.n1, spec.n2, bands});
    for (Index p = 0; p < pixels; ++p) {
        Eigen::Map<Eigen::VectorXd> dst(truth.clean_cube.data().data() + p * bands, bands);
        Eigen::Map<const Eigen::VectorXd> a(truth.abundances.data().data() + p * r, r);
        dst.noalias() = em_slab(p) * a;
    }

    truth.cube = truth.clean_cube;
    if (std::isfinite(spec.snr_db)) {
        const double signal = truth.clean_cube.squared_norm() / static_cast<double>(truth.clean_cube.size());
        truth.noise_sigma = std::sqrt(signal / std::pow(10.0, spec.snr_db / 10.0));
        std::normal_distribution<double> normal(0.0, truth.noise_sigma);
        for (double& v : truth.cube.data()) v += normal(rng);
    }
    return truth;
}

double empirical_snr_db(const Tensor3& clean, const Tensor3& noisy) {
    const double noise = squared_distance(noisy, clean);
    if (noise == 0.0) return kNoiseless;
    return 10.0 * std::log10(clean.squared_norm() / noise);
}

Eigen::MatrixXd synthetic_library(Index bands, Index members, std::uint64_t seed) {
    if (bands < 2 || members < 1) throw SpecError("synthetic_library: need bands >= 2, members >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd lib(bands, members);
    for (Index k = 0; k < members; ++k) {
        // Distinct continua: level, tilt and a broad hump, then absorption bands.
        const double level = 0.15 + 0.55 * unif(rng);
        const double tilt = (unif(rng) - 0.5) * 0.6;
        const double hump_center = unif(rng);
        const double hump_height = (unif(rng) - 0.3) * 0.4;
        const int features = 2 + static_cast<int>(unif(rng) * 4.0);
        std::vector<std::array<double, 3>> feat;
        for (int f = 0; f < features; ++f) {
            feat.push_back({unif(rng), 0.01 + 0.05 * unif(rng), 0.05 + 0.35 * unif(rng)});
        }
        for (Index l = 0; l < bands; ++l) {
            const double x = static_cast<double>(l) / static_cast<double>(bands - 1);
            double v = level + tilt * (x - 0.5) +
                       hump_height * std::exp(-0.5 * std::pow((x - hump_center) / 0.2, 2.0));
            for (const auto& [c, w, depth] : feat) {
                v *= 1.0 - depth * std::exp(-0.5 * std::pow((x - c) / w, 2.0));
            }
            lib(l, k) = std::clamp(v, 0.02, 1.0);
        }
    }
    return lib;
}

Variability parse_variability(const std::string& text) {
    if (text == "none") return NoVariability{};
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw SpecError("variability must be none, mult:<sigma> or add:<sigma>; got '" + text + "'");
    }
    const std::string kind = text.substr(0, colon);
    double sigma = 0.0;
    try {
        std::size_t used = 0;
        sigma = std::stod(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw SpecError("variability sigma is not a number: '" + text + "'");
    }
    if (!(sigma >= 0.0)) throw SpecError("variability sigma must be >= 0");
    if (kind == "mult") return MultiplicativeVariability{sigma};
    if (kind == "add") return AdditiveVariability{sigma};
    throw SpecError("unknown variability kind '" + kind + "'");
}

std::string to_string(const Variability& v) {
    auto shortest = [](double x) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, res.ptr);
    };
    if (const auto* m = std::get_if<MultiplicativeVariability>(&v)) return "mult:" + shortest(m->sigma);
    if (const auto* a = std::get_if<AdditiveVariability>(&v)) return "add:" + shortest(a->sigma);
    return "none";
}

AbundanceStyle parse_abundance_style(const std::string& text) {
    if (text == "gaussian") return AbundanceStyle::GaussianFields;
    if (text == "patches") return AbundanceStyle::SmoothPatches;
    throw SpecError("abundance style must be 'gaussian' or 'patches'; got '" + text + "'");
}

std::string to_string(AbundanceStyle style) {
    return style == AbundanceStyle::GaussianFields ? "gaussian" : "patches";
}

} // namespace ultrav
