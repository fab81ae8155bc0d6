#pragma once

// Synthetic hyperspectral scenes with known ground truth: spatially
// correlated abundance maps, per-pixel endmember variability and white
// Gaussian noise at a prescribed SNR.

#include <cstdint>
#include <limits>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "ultrav/tensor.hpp"

namespace ultrav {

enum class AbundanceStyle {
    /// Gaussian-weighted Voronoi-like patches; already on the simplex.
    SmoothPatches,
    /// Smoothed white-noise fields, one per endmember, projected onto the simplex.
    GaussianFields,
};

struct NoVariability {};

/// Endmember k at pixel n scaled by max(0.1, 1 + sigma * z), z ~ N(0, 1) i.i.d.
struct MultiplicativeVariability {
    double sigma = 0.2;
};

/// Endmember k at pixel n perturbed by a sum of three spectrally smooth curves
/// (shared by all pixels) with independent Gaussian per-pixel amplitudes. The
/// per-band standard deviation is sigma times the mean of the k-th library
/// spectrum; negative results are clipped to zero.
struct AdditiveVariability {
    double sigma = 0.05;
};

using Variability = std::variant<NoVariability, MultiplicativeVariability, AdditiveVariability>;

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct SceneSpec {
    Index n1 = 50;
    Index n2 = 50;
    /// L x R, nonnegative, no zero columns.
    Eigen::MatrixXd library;
    AbundanceStyle abundance_style = AbundanceStyle::GaussianFields;
    Variability variability = NoVariability{};
    /// kNoiseless disables the noise.
    double snr_db = 30.0;
    std::uint64_t seed = 0;
    /// Spatial correlation length in pixels; <= 0 selects max(n1, n2) / 8.
    double correlation_length = 0.0;
};

struct SceneTruth {
    Tensor3 cube;
    Tensor3 clean_cube;
    Tensor3 abundances;
    Tensor4 endmembers;
    double noise_sigma = 0.0;
};

[[nodiscard]] SceneTruth generate_scene(const SceneSpec& spec);

/// 10 log10(||clean||^2 / ||noisy - clean||^2); +inf when they coincide.
[[nodiscard]] double empirical_snr_db(const Tensor3& clean, const Tensor3& noisy);

/// Smooth, strictly positive reflectance-like spectra (continuum plus a few
/// Gaussian absorption features), L x R. Stands in for a spectral library.
[[nodiscard]] Eigen::MatrixXd synthetic_library(Index bands, Index members, std::uint64_t seed);

/// Parses "none", "mult:<sigma>" or "add:<sigma>".
[[nodiscard]] Variability parse_variability(const std::string& text);
[[nodiscard]] std::string to_string(const Variability& v);

[[nodiscard]] AbundanceStyle parse_abundance_style(const std::string& text);
[[nodiscard]] std::string to_string(AbundanceStyle style);

} // namespace ultrav
