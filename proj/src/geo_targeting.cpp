#include "epimob/geo_targeting.hpp"

#include "epimob/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace epimob {

FlowTable FlowTable::from_counts(const TransitionCounts& counts)
{
    FlowTable t;
    t.flows = Eigen::MatrixXd::Zero(counts.n_areas, counts.n_areas);
    for (const auto& [ij, c] : counts.counts)
        t.flows(ij.first, ij.second) = static_cast<double>(c);
    t.validate();
    return t;
}

void FlowTable::validate() const
{
    if (flows.rows() != flows.cols())
        throw std::invalid_argument("flow table must be square");
    for (int i = 0; i < flows.rows(); ++i)
        for (int j = 0; j < flows.cols(); ++j)
            if (!(flows(i, j) >= 0.0) || !std::isfinite(flows(i, j)))
                throw std::invalid_argument("flow table entries must be finite and non-negative");
}

AreaScores compute_place_rank(const FlowTable& table, double tolerance, int max_iters)
{
    table.validate();
    const int n = table.size();
    const Eigen::VectorXd origin = table.origin_totals();
    Eigen::VectorXd rank = table.flows.colwise().sum(); // total inflow
    if (rank.sum() <= 0.0)
        throw std::invalid_argument("place rank needs at least one positive flow");

    AreaScores out;
    out.method = "placerank";

    constexpr double eps = 1e-300;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd power(n);
        for (int i = 0; i < n; ++i)
            power(i) = origin(i) > 0.0 ? rank(i) / origin(i) : 0.0;
        const Eigen::VectorXd swept = table.flows.transpose() * power;
        const Eigen::VectorXd next  = 0.5 * (rank + swept);

        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(next(i) - rank(i)) / std::max(rank(i), eps));
        rank           = next;
        out.iterations = it;
        if (worst < tolerance) {
            out.converged = true;
            break;
        }
    }
    out.scores = std::move(rank);
    return out;
}

AreaScores compute_eigenvector_centrality(const Eigen::MatrixXd& matrix, double tolerance, int max_iters)
{
    const int n = static_cast<int>(matrix.rows());
    if (matrix.cols() != n)
        throw std::invalid_argument("centrality needs a square matrix");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(matrix(i, j) >= 0.0) || !std::isfinite(matrix(i, j)))
                throw std::invalid_argument("centrality matrix entries must be finite and non-negative");
    if (matrix.sum() <= 0.0)
        throw std::invalid_argument("cannot compute centrality of a zero matrix");

    AreaScores out;
    out.method = "centrality";

    if (matrix.isApprox(Eigen::MatrixXd::Identity(n, n), 0.0)) {
        out.scores     = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        out.degenerate = true;
        out.converged  = true;
        return out;
    }

    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd next = matrix.transpose() * v;
        const double norm    = next.lpNorm<1>();
        if (norm <= 0.0)
            throw std::runtime_error("centrality iteration collapsed to the zero vector");
        next /= norm;
        const double diff = (next - v).lpNorm<Eigen::Infinity>();
        v                 = std::move(next);
        out.iterations    = it;
        if (diff < tolerance) {
            out.converged = true;
            break;
        }
    }
    out.scores = std::move(v);
    return out;
}

std::vector<int> select_top_areas(const AreaScores& scores, int k)
{
    const int n = static_cast<int>(scores.scores.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("top-k selection needs 1 <= k <= area count");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.scores(a) != scores.scores(b))
            return scores.scores(a) > scores.scores(b);
        return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

void save_scores_csv(const std::string& path, const std::vector<AreaScores>& score_sets, const AreaRegistry& areas)
{
    std::ostringstream out;
    out << "area_id,score,rank,method,converged\n";
    for (const AreaScores& s : score_sets) {
        const std::vector<int> order = select_top_areas(s, static_cast<int>(s.scores.size()));
        std::vector<int> rank_of(order.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            rank_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) + 1;
        for (int a = 0; a < areas.size(); ++a)
            out << areas.id_of(a) << ',' << format_double(s.scores(a)) << ',' << rank_of[static_cast<std::size_t>(a)]
                << ',' << s.method << ',' << (s.converged ? "true" : "false") << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace epimob
