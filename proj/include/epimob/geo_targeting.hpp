#pragma once

#include "epimob/mobility.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace epimob {

// Origin-destination counts over the training window (self-flows included).
struct FlowTable {
    Eigen::MatrixXd flows; // E_ij >= 0

    static FlowTable from_counts(const TransitionCounts& counts);
    int size() const { return static_cast<int>(flows.rows()); }
    Eigen::VectorXd origin_totals() const { return flows.rowwise().sum(); }
    void validate() const;
};

struct AreaScores {
    Eigen::VectorXd scores;
    std::string method;
    int iterations  = 0;
    bool converged  = false;
    bool degenerate = false;
};

// Flow-based inward accessibility. Starting from total inflows, each sweep
// feeds every zone the ranks of its contributors scaled by their origin
// powers R_i / O_i (zones without outflow contribute nothing), averaged with
// the previous iterate so cyclic tables settle instead of oscillating.
// Stops when the relative L-inf change drops below tolerance.
AreaScores compute_place_rank(const FlowTable& table, double tolerance = 1e-9, int max_iters = 10000);

// Power iteration on the transpose (inbound importance), L1-normalized.
// An identity matrix is degenerate (every vector is fixed): returns the
// uniform vector flagged as such.
AreaScores compute_eigenvector_centrality(const Eigen::MatrixXd& matrix, double tolerance = 1e-9,
                                          int max_iters = 10000);

// k areas with the greatest scores; ties to the lowest area index (areas are
// indexed in ascending area_id order).
std::vector<int> select_top_areas(const AreaScores& scores, int k);

// CSV `area_id,score,rank,method,converged`, one block per method.
void save_scores_csv(const std::string& path, const std::vector<AreaScores>& score_sets, const AreaRegistry& areas);

} // namespace epimob
