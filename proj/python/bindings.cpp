#include "epimob/config.hpp"
#include "epimob/io_util.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <set>

namespace py = pybind11;
using namespace epimob;

namespace {

std::optional<DayClass> day_class_arg(const std::string& s)
{
    if (s == "all")
        return std::nullopt;
    const auto dc = day_class_from_string(s);
    if (!dc)
        throw std::invalid_argument("day_class must be weekday, weekend or all");
    return dc;
}

struct PyDataset {
    Dataset data;
    std::optional<TrainingArtifacts> art;

    const TrainingArtifacts& artifacts(const std::string& split_iso, std::int64_t total_population)
    {
        const auto split = parse_iso8601(split_iso);
        if (!split)
            throw std::invalid_argument("bad split instant: " + split_iso);
        std::int64_t total = total_population;
        if (total <= 0) {
            total = 0;
            for (const Area& a : data.areas.entries())
                total += a.base_population;
        }
        art = build_training_artifacts(data, *split, NightWindow{}, total);
        return *art;
    }
};

py::dict aggregate_to_dict(const AggregateSeries& agg)
{
    py::dict d;
    d["mean"]      = agg.mean;
    d["ci_lo"]     = agg.ci_lo;
    d["ci_hi"]     = agg.ci_hi;
    d["run_count"] = agg.run_count;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "CDR-driven meta-population epidemic simulation toolkit";

    m.def(
        "generate_synthetic",
        [](const std::string& config_json, std::uint64_t seed, const std::string& out_dir) {
            const SynthConfig cfg  = SynthConfig::from_json_text(config_json);
            const SynthOutput data = generate_synthetic_cdr(cfg, seed);
            write_synth_dataset(data, out_dir);
            py::dict d;
            d["records"] = data.records.size();
            d["users"]   = cfg.users;
            d["areas"]   = cfg.areas;
            return d;
        },
        py::arg("config_json"), py::arg("seed"), py::arg("out_dir"),
        "Generate a synthetic CDR dataset (cdr.csv, towers.csv, areas.csv, homes_truth.csv).");

    py::class_<PyDataset>(m, "Dataset")
        .def_static(
            "load",
            [](const std::string& cdr, const std::string& towers, const std::string& areas) {
                PyDataset d;
                d.data = load_dataset(cdr, towers, areas);
                return d;
            },
            py::arg("cdr"), py::arg("towers"), py::arg("areas"))
        .def_property_readonly("n_areas", [](const PyDataset& d) { return d.data.areas.size(); })
        .def_property_readonly("n_records", [](const PyDataset& d) { return d.data.records.size(); })
        .def_property_readonly("area_ids",
                               [](const PyDataset& d) {
                                   std::vector<std::string> ids;
                                   for (const Area& a : d.data.areas.entries())
                                       ids.push_back(a.area_id);
                                   return ids;
                               })
        .def(
            "estimate_matrix",
            [](PyDataset& d, const std::string& day_class, const std::string& split_iso,
               std::int64_t total_population) {
                const auto& art = d.artifacts(split_iso, total_population);
                const auto dc   = day_class_arg(day_class);
                if (!dc)
                    return estimate_matrix(art.trajectories, std::nullopt, art.n_areas).m;
                return (*dc == DayClass::weekday ? art.weekday : art.weekend).m;
            },
            py::arg("day_class"), py::arg("split"), py::arg("total_population") = 0,
            "Row-stochastic mobility matrix estimated from the training window.")
        .def(
            "flow_table",
            [](PyDataset& d, const std::string& split_iso, std::int64_t total_population) {
                return d.artifacts(split_iso, total_population).flows.flows;
            },
            py::arg("split"), py::arg("total_population") = 0,
            "Origin-destination transition counts over the training window.")
        .def(
            "population",
            [](PyDataset& d, const std::string& split_iso, std::int64_t total_population) {
                return d.artifacts(split_iso, total_population).population;
            },
            py::arg("split"), py::arg("total_population") = 0,
            "Per-area initial population allocated from detected homes.")
        .def(
            "indicators",
            [](PyDataset& d, const std::string& split_iso, std::int64_t total_population) {
                const auto& art = d.artifacts(split_iso, total_population);
                py::list rows;
                for (const IndicatorSet& s : art.indicators) {
                    py::dict r;
                    r["user_id"]      = s.user_id;
                    r["radius_km"]    = s.radius_km;
                    r["entropy_nats"] = s.entropy_nats;
                    r["home_staying"] = s.home_staying;
                    r["home_area"]    = d.data.areas.id_of(s.home_area);
                    rows.append(r);
                }
                return rows;
            },
            py::arg("split"), py::arg("total_population") = 0,
            "Per-user mobility indicators over the training window (risk column excluded; "
            "it needs an epidemic snapshot).");

    m.def(
        "quarantine",
        [](const Eigen::MatrixXd& matrix, const std::vector<int>& areas) {
            return quarantine_areas(MobilityMatrix{matrix, std::nullopt}, areas).m;
        },
        py::arg("matrix"), py::arg("areas"),
        "Isolate areas: identity rows, zeroed columns, removed mass folded onto each origin diagonal.");

    m.def(
        "place_rank",
        [](const Eigen::MatrixXd& flows, double tolerance, int max_iters) {
            const AreaScores s = compute_place_rank(FlowTable{flows}, tolerance, max_iters);
            return py::make_tuple(s.scores, s.iterations, s.converged);
        },
        py::arg("flows"), py::arg("tolerance") = 1e-9, py::arg("max_iters") = 10000,
        "Flow-based inward accessibility scores; returns (scores, iterations, converged).");

    m.def(
        "eigenvector_centrality",
        [](const Eigen::MatrixXd& matrix, double tolerance, int max_iters) {
            const AreaScores s = compute_eigenvector_centrality(matrix, tolerance, max_iters);
            return py::make_tuple(s.scores, s.iterations, s.converged, s.degenerate);
        },
        py::arg("matrix"), py::arg("tolerance") = 1e-9, py::arg("max_iters") = 10000,
        "L1-normalized inbound eigenvector centrality; returns (scores, iterations, converged, degenerate).");

    m.def(
        "select_top_areas",
        [](const Eigen::VectorXd& scores, int k) {
            AreaScores s;
            s.scores = scores;
            return select_top_areas(s, k);
        },
        py::arg("scores"), py::arg("k"), "Indices of the k greatest scores, ties to the lowest index.");

    py::class_<EpidemicParams>(m, "EpidemicParams")
        .def(py::init([](double beta, double sigma, double gamma, double rho, double nu, double mu) {
                 EpidemicParams p;
                 p.beta  = beta;
                 p.sigma = sigma;
                 p.gamma = gamma;
                 p.rho   = rho;
                 p.nu    = nu;
                 p.mu    = mu;
                 p.validate();
                 return p;
             }),
             py::arg("beta") = 0.45, py::arg("sigma") = 0.18, py::arg("gamma") = 0.2, py::arg("rho") = 0.48,
             py::arg("nu") = 0.0, py::arg("mu") = 0.0)
        .def_readwrite("beta", &EpidemicParams::beta)
        .def_readwrite("sigma", &EpidemicParams::sigma)
        .def_readwrite("gamma", &EpidemicParams::gamma)
        .def_readwrite("rho", &EpidemicParams::rho)
        .def_readwrite("nu", &EpidemicParams::nu)
        .def_readwrite("mu", &EpidemicParams::mu);

    m.def(
        "step_deterministic",
        [](Eigen::VectorXd s, Eigen::VectorXd e, Eigen::VectorXd i, Eigen::VectorXd r,
           const Eigen::MatrixXd& matrix, const EpidemicParams& params) {
            MetaPopState state;
            state.susceptible = std::move(s);
            state.exposed     = std::move(e);
            state.infected    = std::move(i);
            state.recovered   = std::move(r);
            const StepStats st = step_deterministic(state, MobilityMatrix{matrix, std::nullopt}, params);
            return py::make_tuple(state.susceptible, state.exposed, state.infected, state.recovered,
                                  st.new_exposures);
        },
        py::arg("S"), py::arg("E"), py::arg("I"), py::arg("R"), py::arg("matrix"), py::arg("params"),
        "One mean-field day step; returns (S, E, I, R, new_exposures).");

    m.def(
        "step_stochastic",
        [](Eigen::VectorXd s, Eigen::VectorXd e, Eigen::VectorXd i, Eigen::VectorXd r,
           const Eigen::MatrixXd& matrix, const EpidemicParams& params, std::uint64_t seed) {
            MetaPopState state;
            state.susceptible = std::move(s);
            state.exposed     = std::move(e);
            state.infected    = std::move(i);
            state.recovered   = std::move(r);
            std::mt19937_64 rng(seed);
            const StepStats st = step_stochastic(state, MobilityMatrix{matrix, std::nullopt}, params, rng);
            return py::make_tuple(state.susceptible, state.exposed, state.infected, state.recovered,
                                  st.new_exposures);
        },
        py::arg("S"), py::arg("E"), py::arg("I"), py::arg("R"), py::arg("matrix"), py::arg("params"),
        py::arg("seed"), "One chain-binomial day step; returns (S, E, I, R, new_exposures).");

    m.def(
        "run_scenario",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
            if (!cfg.dataset)
                throw std::invalid_argument("config needs a dataset section");
            const Dataset data = load_dataset(cfg.dataset->cdr, cfg.dataset->towers, cfg.dataset->areas);
            if (!cfg.split_instant)
                throw std::invalid_argument("config needs split_instant");
            std::int64_t total = cfg.total_population;
            if (total <= 0) {
                total = 0;
                for (const Area& a : data.areas.entries())
                    total += a.base_population;
            }
            const TrainingArtifacts art =
                build_training_artifacts(data, *cfg.split_instant, cfg.night, total);
            const ScenarioResult res = run_scenario(cfg.scenario, art, cfg.params, cfg.sim);
            py::dict d;
            d["scenario"]  = res.spec.name();
            d["aggregate"] = aggregate_to_dict(res.aggregate);
            return d;
        },
        py::arg("config_json"),
        "Run one scenario end to end from a config document; returns the aggregate series.");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
