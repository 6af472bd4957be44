#include "epimob/mobility.hpp"

#include "epimob/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace epimob {

std::int64_t TransitionCounts::total() const
{
    std::int64_t t = 0;
    for (const auto& [_, c] : counts)
        t += c;
    return t;
}

TransitionCounts count_transitions(const std::vector<Trajectory>& trajectories, std::optional<DayClass> filter,
                                   int n_areas, const std::set<std::string>* excluded_users)
{
    TransitionCounts tc;
    tc.n_areas = n_areas;
    for (const Trajectory& traj : trajectories) {
        if (excluded_users && excluded_users->count(traj.user_id))
            continue;
        for (std::size_t k = 1; k < traj.visits.size(); ++k) {
            const Visit& from = traj.visits[k - 1];
            const Visit& to   = traj.visits[k];
            if (from.area < 0 || from.area >= n_areas || to.area < 0 || to.area >= n_areas)
                throw std::invalid_argument("trajectory visit references an area outside the registry");
            if (filter && day_class_of(to.timestamp) != *filter)
                continue;
            ++tc.counts[{from.area, to.area}];
        }
    }
    return tc;
}

void MobilityMatrix::check_row_stochastic(double tol) const
{
    const int n = size();
    if (m.cols() != n)
        throw std::invalid_argument("mobility matrix must be square");
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = m(i, j);
            if (v < 0.0 || v > 1.0 + tol)
                throw std::runtime_error("mobility matrix entry outside [0, 1] at row " + std::to_string(i));
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::runtime_error("mobility matrix row " + std::to_string(i) +
                                     " sums to " + format_double(sum));
    }
}

MobilityMatrix MobilityMatrix::identity(int n, std::optional<DayClass> day_class)
{
    return MobilityMatrix{Eigen::MatrixXd::Identity(n, n), day_class};
}

MobilityMatrix matrix_from_counts(const TransitionCounts& counts, std::optional<DayClass> day_class)
{
    if (counts.counts.empty())
        throw std::invalid_argument("no transitions observed; cannot estimate a mobility matrix");
    const int n = counts.n_areas;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::int64_t> row_totals(static_cast<std::size_t>(n), 0);
    for (const auto& [ij, c] : counts.counts)
        row_totals[static_cast<std::size_t>(ij.first)] += c;
    for (const auto& [ij, c] : counts.counts)
        m(ij.first, ij.second) = static_cast<double>(c) / static_cast<double>(row_totals[static_cast<std::size_t>(ij.first)]);
    for (int i = 0; i < n; ++i)
        if (row_totals[static_cast<std::size_t>(i)] == 0)
            m(i, i) = 1.0;
    MobilityMatrix out{std::move(m), day_class};
    out.check_row_stochastic(1e-12);
    return out;
}

MobilityMatrix estimate_matrix(const std::vector<Trajectory>& trajectories, std::optional<DayClass> filter,
                               int n_areas)
{
    if (trajectories.empty())
        throw std::invalid_argument("cannot estimate a mobility matrix from zero trajectories");
    return matrix_from_counts(count_transitions(trajectories, filter, n_areas), filter);
}

MobilityMatrix quarantine_areas(const MobilityMatrix& matrix, const std::vector<int>& areas)
{
    if (areas.empty())
        throw std::invalid_argument("quarantine area set must not be empty");
    const int n = matrix.size();
    std::vector<bool> quarantined(static_cast<std::size_t>(n), false);
    for (int a : areas) {
        if (a < 0 || a >= n)
            throw std::invalid_argument("unknown area index in quarantine set: " + std::to_string(a));
        quarantined[static_cast<std::size_t>(a)] = true;
    }

    MobilityMatrix out = matrix;
    for (int i = 0; i < n; ++i) {
        if (quarantined[static_cast<std::size_t>(i)]) {
            out.m.row(i).setZero();
            out.m(i, i) = 1.0;
            continue;
        }
        double removed = 0.0;
        for (int j = 0; j < n; ++j) {
            if (quarantined[static_cast<std::size_t>(j)]) {
                removed += out.m(i, j);
                out.m(i, j) = 0.0;
            }
        }
        out.m(i, i) += removed; // travellers towards closed areas stay put
    }
    out.check_row_stochastic(1e-12);
    return out;
}

MobilityMatrix reestimate_without_users(const std::vector<Trajectory>& trajectories,
                                        const std::set<std::string>& excluded_users, std::optional<DayClass> filter,
                                        int n_areas)
{
    std::size_t surviving = 0;
    for (const Trajectory& t : trajectories)
        if (!excluded_users.count(t.user_id))
            ++surviving;
    if (surviving == 0)
        throw std::invalid_argument("user exclusion removed every trajectory");
    return matrix_from_counts(count_transitions(trajectories, filter, n_areas, &excluded_users), filter);
}

std::vector<std::int64_t> allocate_population(const std::vector<HomeAssignment>& homes, int n_areas,
                                              std::int64_t total_population)
{
    if (homes.empty())
        throw std::invalid_argument("population allocation needs at least one home assignment");
    if (total_population <= 0)
        throw std::invalid_argument("total population must be positive");

    std::vector<std::int64_t> homed(static_cast<std::size_t>(n_areas), 0);
    for (const HomeAssignment& h : homes) {
        if (h.home_area < 0 || h.home_area >= n_areas)
            throw std::invalid_argument("home assignment references an unknown area");
        ++homed[static_cast<std::size_t>(h.home_area)];
    }
    const double total_homed = static_cast<double>(homes.size());

    std::vector<std::int64_t> out(static_cast<std::size_t>(n_areas), 0);
    std::vector<std::pair<double, int>> remainders; // (fraction, area), ties to lower index
    std::int64_t assigned = 0;
    for (int i = 0; i < n_areas; ++i) {
        const double quota = static_cast<double>(total_population) *
                             static_cast<double>(homed[static_cast<std::size_t>(i)]) / total_homed;
        const std::int64_t base = static_cast<std::int64_t>(std::floor(quota));
        out[static_cast<std::size_t>(i)] = base;
        assigned += base;
        if (homed[static_cast<std::size_t>(i)] > 0)
            remainders.emplace_back(quota - static_cast<double>(base), i);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    std::int64_t leftover = total_population - assigned;
    for (std::size_t k = 0; leftover > 0; k = (k + 1) % remainders.size(), --leftover)
        ++out[static_cast<std::size_t>(remainders[k].second)];
    return out;
}

void save_matrix_csv(const MobilityMatrix& matrix, const AreaRegistry& areas, const std::string& csv_path,
                     const std::string& meta_path, const std::string& source_digest)
{
    if (matrix.size() != areas.size())
        throw std::invalid_argument("matrix dimension does not match the area registry");
    std::ostringstream out;
    out << "origin_area,dest_area,probability\n";
    for (int i = 0; i < matrix.size(); ++i)
        for (int j = 0; j < matrix.size(); ++j)
            if (matrix.m(i, j) != 0.0)
                out << areas.id_of(i) << ',' << areas.id_of(j) << ',' << format_double(matrix.m(i, j)) << '\n';
    write_text_file(csv_path, out.str());

    nlohmann::json meta;
    meta["day_class"]     = matrix.day_class ? to_string(*matrix.day_class) : "all";
    meta["area_count"]    = matrix.size();
    meta["source_digest"] = source_digest;
    write_text_file(meta_path, meta.dump(2) + "\n");
}

MobilityMatrix load_matrix_csv(const std::string& csv_path, const std::string& meta_path, const AreaRegistry& areas)
{
    const nlohmann::json meta = nlohmann::json::parse(read_text_file(meta_path));
    const int n               = meta.at("area_count").get<int>();
    if (n != areas.size())
        throw std::runtime_error("matrix metadata area count does not match the area registry");
    std::optional<DayClass> day_class;
    const std::string dc = meta.at("day_class").get<std::string>();
    if (dc != "all") {
        day_class = day_class_from_string(dc);
        if (!day_class)
            throw std::runtime_error("bad day_class in matrix metadata: " + dc);
    }

    std::ifstream in(csv_path);
    if (!in)
        throw std::runtime_error("cannot open matrix file: " + csv_path);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) != std::vector<std::string>{"origin_area", "dest_area", "probability"})
        throw std::runtime_error("matrix file has unexpected header: " + csv_path);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error("malformed matrix row: " + line);
        const int i = areas.index_of(fields[0]);
        const int j = areas.index_of(fields[1]);
        if (i < 0 || j < 0)
            throw std::runtime_error("matrix row references unknown area: " + line);
        m(i, j) = std::stod(fields[2]);
    }
    MobilityMatrix out{std::move(m), day_class};
    out.check_row_stochastic(1e-12);
    return out;
}

} // namespace epimob
