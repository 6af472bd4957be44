#pragma once

#include "epimob/cdr.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace epimob {

// Pooled counts of observed area-to-area transitions between consecutive
// visits, self-transitions included. A transition is classified by the local
// date of its destination visit.
struct TransitionCounts {
    int n_areas = 0;
    std::map<std::pair<int, int>, std::int64_t> counts;

    std::int64_t total() const;
};

TransitionCounts count_transitions(const std::vector<Trajectory>& trajectories, std::optional<DayClass> filter,
                                   int n_areas, const std::set<std::string>* excluded_users = nullptr);

// Row-stochastic transition probabilities. Rows without any observed outflow
// are identity rows so the matrix stays a valid kernel everywhere.
struct MobilityMatrix {
    Eigen::MatrixXd m;
    std::optional<DayClass> day_class; // nullopt = all days pooled

    int size() const { return static_cast<int>(m.rows()); }
    // Throws when any row sum strays from 1 by more than tol or any entry
    // leaves [0, 1].
    void check_row_stochastic(double tol = 1e-12) const;

    static MobilityMatrix identity(int n, std::optional<DayClass> day_class = std::nullopt);
};

MobilityMatrix matrix_from_counts(const TransitionCounts& counts, std::optional<DayClass> day_class);

MobilityMatrix estimate_matrix(const std::vector<Trajectory>& trajectories, std::optional<DayClass> filter,
                               int n_areas);

// Isolates the given areas: their rows become identity rows, their columns
// are zeroed elsewhere, and the removed column mass is added to each origin's
// diagonal so every row still sums to 1.
MobilityMatrix quarantine_areas(const MobilityMatrix& matrix, const std::vector<int>& areas);

MobilityMatrix reestimate_without_users(const std::vector<Trajectory>& trajectories,
                                        const std::set<std::string>& excluded_users, std::optional<DayClass> filter,
                                        int n_areas);

// N_i(0) proportional to the number of users homed in area i, scaled to sum
// exactly to total_population via largest-remainder rounding (remainder ties
// to the lowest area index).
std::vector<std::int64_t> allocate_population(const std::vector<HomeAssignment>& homes, int n_areas,
                                              std::int64_t total_population);

// Triplet CSV `origin_area,dest_area,probability` (nonzero entries, row-major
// order) plus a JSON sidecar with day_class, area count and a source digest.
void save_matrix_csv(const MobilityMatrix& matrix, const AreaRegistry& areas, const std::string& csv_path,
                     const std::string& meta_path, const std::string& source_digest);
MobilityMatrix load_matrix_csv(const std::string& csv_path, const std::string& meta_path, const AreaRegistry& areas);

} // namespace epimob
