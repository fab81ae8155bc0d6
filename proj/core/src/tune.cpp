#include "ultrav/tune.hpp"

namespace ultrav {

TuneObjective parse_tune_objective(const std::string& text) {
    if (text == "mse_a") return TuneObjective::MseA;
    if (text == "mse_r") return TuneObjective::MseR;
    if (text == "sam_r") return TuneObjective::SamR;
    throw SpecError("tune objective must be mse_a, mse_r or sam_r; got '" + text + "'");
}

std::string to_string(TuneObjective objective) {
    switch (objective) {
    case TuneObjective::MseA: return "mse_a";
    case TuneObjective::MseR: return "mse_r";
    case TuneObjective::SamR: return "sam_r";
    }
    return "mse_a";
}

TuneResult grid_search(const SceneTruth& truth, const Eigen::MatrixXd& m0,
                       const std::vector<double>& grid_a, const std::vector<double>& grid_m,
                       const UnmixConfig& base, TuneObjective objective) {
    if (grid_a.empty() || grid_m.empty()) throw SpecError("grid_search: empty grid");
    TuneResult out;
    for (double la : grid_a) {
        for (double lm : grid_m) {
            UnmixConfig cfg = base;
            cfg.lambda_a = la;
            cfg.lambda_m = lm;
            const UnmixResult res = ultra_v(truth.cube, m0, cfg);
            GridPoint pt{la, lm, evaluate(truth, res), res.iters, 0.0};
            switch (objective) {
            case TuneObjective::MseA: pt.score = pt.metrics.mse_a; break;
            case TuneObjective::MseR: pt.score = pt.metrics.mse_r; break;
            case TuneObjective::SamR: pt.score = pt.metrics.sam_r; break;
            }
            if (out.grid.empty() || pt.score < out.best.score) out.best = pt;
            out.grid.push_back(std::move(pt));
        }
    }
    return out;
}

} // namespace ultrav
