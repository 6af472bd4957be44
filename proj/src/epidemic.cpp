#include "epimob/epidemic.hpp"

#include "epimob/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace epimob {

void EpidemicParams::validate() const
{
    if (beta < 0.0 || sigma < 0.0 || gamma < 0.0 || nu < 0.0 || mu < 0.0)
        throw std::invalid_argument("epidemic rates must be non-negative");
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("infection mortality probability must lie in [0, 1)");
    if (infectious_outflow() > 1.0)
        throw std::invalid_argument("(mu + gamma) / (1 - rho) must not exceed 1");
    for (int i = 0; i < nu_per_area.size(); ++i)
        if (nu_per_area(i) < 0.0)
            throw std::invalid_argument("per-area birth counts must be non-negative");
}

MetaPopState MetaPopState::from_population(const std::vector<std::int64_t>& per_area)
{
    const int n = static_cast<int>(per_area.size());
    MetaPopState s;
    s.susceptible = Eigen::VectorXd::Zero(n);
    s.exposed     = Eigen::VectorXd::Zero(n);
    s.infected    = Eigen::VectorXd::Zero(n);
    s.recovered   = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (per_area[static_cast<std::size_t>(i)] < 0)
            throw std::invalid_argument("negative initial population");
        s.susceptible(i) = static_cast<double>(per_area[static_cast<std::size_t>(i)]);
    }
    return s;
}

bool MetaPopState::is_integral() const
{
    const auto integral = [](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i)
            if (v(i) != std::floor(v(i)))
                return false;
        return true;
    };
    return integral(susceptible) && integral(exposed) && integral(infected) && integral(recovered);
}

void MetaPopState::check_valid() const
{
    const auto ok = [](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i)
            if (!(v(i) >= 0.0) || !std::isfinite(v(i)))
                return false;
        return true;
    };
    if (!ok(susceptible) || !ok(exposed) || !ok(infected) || !ok(recovered))
        throw std::runtime_error("meta-population state contains a negative or non-finite compartment");
}

SeedReport seed_outbreak(MetaPopState& state, std::optional<int> seed_area, double seed_fraction,
                         std::mt19937_64& rng)
{
    if (seed_fraction < 0.0 || seed_fraction >= 1.0)
        throw std::invalid_argument("seed fraction must lie in [0, 1)");
    const int n = state.n_areas();

    int area = -1;
    if (seed_area) {
        if (*seed_area < 0 || *seed_area >= n)
            throw std::invalid_argument("seed area index out of range");
        area = *seed_area;
    } else {
        std::vector<int> populated;
        const Eigen::VectorXd pop = state.population();
        for (int i = 0; i < n; ++i)
            if (pop(i) > 0.0)
                populated.push_back(i);
        if (populated.empty())
            throw std::invalid_argument("no populated area to seed");
        std::uniform_int_distribution<std::size_t> pick(0, populated.size() - 1);
        area = populated[pick(rng)];
    }
    if (state.population()(area) <= 0.0)
        throw std::invalid_argument("seed area has zero population");

    SeedReport report;
    report.area      = area;
    report.requested = std::llround(seed_fraction * state.total_population());
    report.realized  = std::min<std::int64_t>(report.requested,
                                              static_cast<std::int64_t>(std::floor(state.susceptible(area))));
    state.susceptible(area) -= static_cast<double>(report.realized);
    state.infected(area) += static_cast<double>(report.realized);
    state.cum_infections += static_cast<double>(report.realized);
    return report;
}

StepStats step_deterministic(MetaPopState& state, const MobilityMatrix& matrix, const EpidemicParams& params)
{
    params.validate();
    const int n = state.n_areas();
    if (matrix.size() != n)
        throw std::invalid_argument("mobility matrix dimension does not match the state");
    if (params.nu_per_area.size() > 0 && params.nu_per_area.size() != n)
        throw std::invalid_argument("per-area birth vector does not match the state");

    Eigen::VectorXd bracket_s(n), bracket_e(n), bracket_i(n), bracket_r(n);
    StepStats stats;
    const double i_out = params.infectious_outflow();

    for (int j = 0; j < n; ++j) {
        const double s = state.susceptible(j);
        const double e = state.exposed(j);
        const double i = state.infected(j);
        const double r = state.recovered(j);
        const double pop = s + e + i + r;
        const double foi = pop > 0.0 ? params.beta * s * i / pop : 0.0; // 0/0 -> 0

        bracket_s(j) = s + params.births_in(j) - foi - params.mu * s;
        bracket_e(j) = e + foi - params.sigma * e - params.mu * e;
        bracket_i(j) = i + params.sigma * e - i_out * i;
        bracket_r(j) = r + params.gamma * i - params.mu * r;
        stats.new_exposures += foi;
    }

    for (Eigen::VectorXd* v : {&bracket_s, &bracket_e, &bracket_i, &bracket_r}) {
        for (int j = 0; j < n; ++j) {
            if ((*v)(j) < 0.0) {
                (*v)(j) = 0.0;
                ++stats.clamped;
            }
        }
    }

    // Relocation: x'_i = sum_j m_ji * bracket_j.
    state.susceptible = matrix.m.transpose() * bracket_s;
    state.exposed     = matrix.m.transpose() * bracket_e;
    state.infected    = matrix.m.transpose() * bracket_i;
    state.recovered   = matrix.m.transpose() * bracket_r;
    state.cum_infections += stats.new_exposures;
    ++state.step;
    return stats;
}

namespace {

std::int64_t draw_binomial(std::mt19937_64& rng, std::int64_t count, double p)
{
    if (count <= 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return count;
    std::binomial_distribution<std::int64_t> dist(count, p);
    return dist(rng);
}

// Conditional-binomial multinomial split of `count` over the row's
// destinations. The final nonzero destination absorbs the remainder so
// counts are conserved exactly.
void relocate_row(std::mt19937_64& rng, std::int64_t count, const Eigen::MatrixXd& m, int row,
                  std::vector<std::int64_t>& dest)
{
    if (count == 0)
        return;
    const int n = static_cast<int>(m.cols());
    int last = -1;
    for (int j = n - 1; j >= 0; --j) {
        if (m(row, j) > 0.0) {
            last = j;
            break;
        }
    }
    if (last < 0)
        throw std::runtime_error("mobility matrix row " + std::to_string(row) + " is all zero");

    double mass_left       = 1.0;
    std::int64_t remaining = count;
    for (int j = 0; j < n && remaining > 0; ++j) {
        const double p = m(row, j);
        if (p <= 0.0)
            continue;
        if (j == last) {
            dest[static_cast<std::size_t>(j)] += remaining;
            remaining = 0;
            break;
        }
        const std::int64_t moved = draw_binomial(rng, remaining, std::min(1.0, p / mass_left));
        dest[static_cast<std::size_t>(j)] += moved;
        remaining -= moved;
        mass_left -= p;
        if (mass_left <= 0.0)
            mass_left = std::numeric_limits<double>::min();
    }
}

} // namespace

StepStats step_stochastic(MetaPopState& state, const MobilityMatrix& matrix, const EpidemicParams& params,
                          std::mt19937_64& rng)
{
    params.validate();
    if (!state.is_integral())
        throw std::invalid_argument("stochastic stepping requires an integer-valued state");
    const int n = state.n_areas();
    if (matrix.size() != n)
        throw std::invalid_argument("mobility matrix dimension does not match the state");
    if (params.nu_per_area.size() > 0 && params.nu_per_area.size() != n)
        throw std::invalid_argument("per-area birth vector does not match the state");

    const double p_infect  = 1.0 - std::exp(-params.sigma);
    const double p_iout    = std::min(1.0, params.infectious_outflow());
    const double p_recover = params.mu + params.gamma > 0.0
                                 ? params.gamma * (1.0 - params.rho) / (params.mu + params.gamma)
                                 : 0.0;
    const double p_die     = 1.0 - std::exp(-params.mu);

    std::vector<std::int64_t> s_after(static_cast<std::size_t>(n)), e_after(static_cast<std::size_t>(n)),
        i_after(static_cast<std::size_t>(n)), r_after(static_cast<std::size_t>(n));
    StepStats stats;

    for (int j = 0; j < n; ++j) {
        const std::int64_t s = static_cast<std::int64_t>(state.susceptible(j));
        const std::int64_t e = static_cast<std::int64_t>(state.exposed(j));
        const std::int64_t i = static_cast<std::int64_t>(state.infected(j));
        const std::int64_t r = static_cast<std::int64_t>(state.recovered(j));
        const std::int64_t pop = s + e + i + r;

        const double foi_rate  = pop > 0 ? params.beta * static_cast<double>(i) / static_cast<double>(pop) : 0.0;
        const std::int64_t n_expose = draw_binomial(rng, s, 1.0 - std::exp(-foi_rate));
        const std::int64_t n_infect = draw_binomial(rng, e, p_infect);
        const std::int64_t n_iout   = draw_binomial(rng, i, p_iout);
        const std::int64_t n_recover = draw_binomial(rng, n_iout, p_recover);
        const std::int64_t d_s = draw_binomial(rng, s - n_expose, p_die);
        const std::int64_t d_e = draw_binomial(rng, e - n_infect, p_die);
        const std::int64_t d_r = draw_binomial(rng, r, p_die);
        std::int64_t births = 0;
        if (params.births_in(j) > 0.0) {
            std::poisson_distribution<std::int64_t> birth_dist(params.births_in(j));
            births = birth_dist(rng);
        }

        s_after[static_cast<std::size_t>(j)] = s - n_expose - d_s + births;
        e_after[static_cast<std::size_t>(j)] = e + n_expose - n_infect - d_e;
        i_after[static_cast<std::size_t>(j)] = i + n_infect - n_iout;
        r_after[static_cast<std::size_t>(j)] = r + n_recover - d_r;
        stats.new_exposures += static_cast<double>(n_expose);
    }

    std::vector<std::int64_t> s_new(static_cast<std::size_t>(n), 0), e_new(static_cast<std::size_t>(n), 0),
        i_new(static_cast<std::size_t>(n), 0), r_new(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        relocate_row(rng, s_after[static_cast<std::size_t>(j)], matrix.m, j, s_new);
        relocate_row(rng, e_after[static_cast<std::size_t>(j)], matrix.m, j, e_new);
        relocate_row(rng, i_after[static_cast<std::size_t>(j)], matrix.m, j, i_new);
        relocate_row(rng, r_after[static_cast<std::size_t>(j)], matrix.m, j, r_new);
    }

    for (int j = 0; j < n; ++j) {
        state.susceptible(j) = static_cast<double>(s_new[static_cast<std::size_t>(j)]);
        state.exposed(j)     = static_cast<double>(e_new[static_cast<std::size_t>(j)]);
        state.infected(j)    = static_cast<double>(i_new[static_cast<std::size_t>(j)]);
        state.recovered(j)   = static_cast<double>(r_new[static_cast<std::size_t>(j)]);
    }
    state.cum_infections += stats.new_exposures;
    ++state.step;
    return stats;
}

SimulationCalendar SimulationCalendar::from_start(Instant start, int horizon_days)
{
    SimulationCalendar c;
    c.classes_.reserve(static_cast<std::size_t>(horizon_days));
    for (int d = 0; d < horizon_days; ++d)
        c.classes_.push_back(day_class_of(start + static_cast<Instant>(d) * 86400));
    return c;
}

SimulationCalendar SimulationCalendar::uniform(DayClass day_class, int horizon_days)
{
    SimulationCalendar c;
    c.classes_.assign(static_cast<std::size_t>(horizon_days), day_class);
    return c;
}

SimulationCalendar SimulationCalendar::from_sequence(std::vector<DayClass> classes)
{
    SimulationCalendar c;
    c.classes_ = std::move(classes);
    return c;
}

RunResult run(const MetaPopState& initial, const SimulationCalendar& calendar, const MobilityMatrix& weekday,
              const MobilityMatrix& weekend, const EpidemicParams& params, int horizon_days, SimMode mode,
              std::mt19937_64& rng, const std::optional<InterventionSchedule>& intervention)
{
    if (horizon_days < 1)
        throw std::invalid_argument("horizon must be at least one day");
    if (calendar.horizon() < horizon_days)
        throw std::invalid_argument("calendar shorter than the simulation horizon");
    if (intervention && (intervention->start_day < 0 || intervention->start_day > horizon_days))
        throw std::invalid_argument("intervention day lies beyond the simulation horizon");

    RunResult result;
    result.series.reserve(static_cast<std::size_t>(horizon_days) + 1);
    result.series.push_back(initial);

    MetaPopState state = initial;
    for (int day = 0; day < horizon_days; ++day) {
        const bool intervened = intervention && day >= intervention->start_day;
        const DayClass dc     = calendar.at(day);
        const MobilityMatrix& m = intervened ? (dc == DayClass::weekday ? intervention->weekday : intervention->weekend)
                                             : (dc == DayClass::weekday ? weekday : weekend);
        const StepStats stats = mode == SimMode::deterministic ? step_deterministic(state, m, params)
                                                               : step_stochastic(state, m, params, rng);
        result.clamp_events += stats.clamped;
        result.series.push_back(state);
    }
    return result;
}

void write_timeseries_csv(const std::string& path, const std::vector<std::pair<int, const RunResult*>>& runs,
                          const AreaRegistry& areas)
{
    std::ostringstream out;
    out << "run_id,day,area_id,S,E,I,R,cum_infections\n";
    for (const auto& [run_id, rr] : runs) {
        for (std::size_t day = 0; day < rr->series.size(); ++day) {
            const MetaPopState& st = rr->series[day];
            for (int a = 0; a < st.n_areas(); ++a)
                out << run_id << ',' << day << ',' << areas.id_of(a) << ',' << format_double(st.susceptible(a))
                    << ',' << format_double(st.exposed(a)) << ',' << format_double(st.infected(a)) << ','
                    << format_double(st.recovered(a)) << ',' << format_double(st.cum_infections) << '\n';
        }
    }
    write_text_file(path, out.str());
}

void write_aggregated_timeseries_csv(const std::string& path,
                                     const std::vector<std::pair<int, const RunResult*>>& runs)
{
    std::ostringstream out;
    out << "run_id,day,S,E,I,R,cum_infections\n";
    for (const auto& [run_id, rr] : runs) {
        for (std::size_t day = 0; day < rr->series.size(); ++day) {
            const MetaPopState& st = rr->series[day];
            out << run_id << ',' << day << ',' << format_double(st.susceptible.sum()) << ','
                << format_double(st.exposed.sum()) << ',' << format_double(st.infected.sum()) << ','
                << format_double(st.recovered.sum()) << ',' << format_double(st.cum_infections) << '\n';
        }
    }
    write_text_file(path, out.str());
}

} // namespace epimob
