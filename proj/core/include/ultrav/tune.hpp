#pragma once

// Grid search over (lambda_A, lambda_M) against a scene with known truth.

#include <string>
#include <vector>

#include "ultrav/metrics.hpp"
#include "ultrav/synth.hpp"
#include "ultrav/unmixing.hpp"

namespace ultrav {

inline const std::vector<double> kDefaultLambdaAGrid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
inline const std::vector<double> kDefaultLambdaMGrid{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};

enum class TuneObjective { MseA, MseR, SamR };

[[nodiscard]] TuneObjective parse_tune_objective(const std::string& text);
[[nodiscard]] std::string to_string(TuneObjective objective);

struct GridPoint {
    double lambda_a = 0.0;
    double lambda_m = 0.0;
    MetricsReport metrics;
    int iters = 0;
    /// Value of the selection objective.
    double score = 0.0;
};

struct TuneResult {
    /// Row-major over (lambda_a, lambda_m): lambda_m varies fastest.
    std::vector<GridPoint> grid;
    GridPoint best;
};

/// Runs ultra_v for every grid pair (other settings from `base`) and picks
/// the pair minimizing `objective`; ties keep the earliest grid point.
[[nodiscard]] TuneResult grid_search(const SceneTruth& truth, const Eigen::MatrixXd& m0,
                                     const std::vector<double>& grid_a,
                                     const std::vector<double>& grid_m, const UnmixConfig& base,
                                     TuneObjective objective = TuneObjective::MseA);

} // namespace ultrav
