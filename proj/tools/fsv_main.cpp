#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsv/data_io.hpp"
#include "fsv/errors.hpp"
#include "fsv/estimator.hpp"
#include "fsv/iv_moments.hpp"
#include "fsv/kernel.hpp"
#include "fsv/measurement.hpp"
#include "fsv/montecarlo.hpp"
#include "fsv/simulate.hpp"
#include "fsv/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitNumeric = 4;

std::string fnv1a64_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fsv::DataError("cannot open '" + path.string() + "' for hashing");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& path, const std::string& subcommand, const json& config,
                    const json& inputs, const json& outputs) {
    json doc;
    doc["subcommand"] = subcommand;
    doc["version"] = fsv::kVersion;
    doc["timestamp"] = iso_timestamp();
    doc["config"] = config;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw fsv::DataError("cannot write manifest '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

fs::path sibling_manifest(const fs::path& output_file) {
    fs::path p = output_file;
    p.replace_extension();
    p += ".manifest.json";
    return p;
}

int default_jobs() {
    if (const char* env = std::getenv("FSV_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    return 1;
}

// Shared --panel/--params/--xi... parameter group; panel wins, then file,
// then the four explicit flags.
struct ParamArgs {
    std::string panel;
    std::string file;
    double xi = 0.0;
    double lambda = 0.0;
    double nu = 0.0;
    double hurst = 0.0;
    bool has_explicit = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--panel", panel, "simulation panel preset (A-E)");
        cmd->add_option("--params", file, "JSON file with xi/lambda/nu/hurst");
        auto* xi_opt = cmd->add_option("--xi", xi, "mean spot variance");
        auto* la_opt = cmd->add_option("--lambda", lambda, "mean reversion rate");
        auto* nu_opt = cmd->add_option("--nu", nu, "volatility of volatility");
        auto* h_opt = cmd->add_option("--hurst", hurst, "Hurst exponent");
        xi_opt->needs(la_opt)->needs(nu_opt)->needs(h_opt);
        cmd->callback([this, xi_opt]() { has_explicit = xi_opt->count() > 0; });
    }

    fsv::FsvParams resolve(json* echo) const {
        if (!panel.empty()) {
            if (panel.size() != 1) {
                throw std::invalid_argument("--panel expects a single letter A-E");
            }
            if (echo) (*echo)["panel"] = panel;
            return fsv::panel_params(panel[0]);
        }
        if (!file.empty()) {
            std::ifstream in(file, std::ios::binary);
            if (!in) throw fsv::DataError("cannot open parameter file '" + file + "'");
            json doc;
            try {
                in >> doc;
            } catch (const json::exception& e) {
                throw fsv::DataError("cannot parse '" + file + "': " + e.what());
            }
            if (echo) (*echo)["params_file"] = file;
            return fsv::FsvParams(doc.at("xi").get<double>(), doc.at("lambda").get<double>(),
                                  doc.at("nu").get<double>(), doc.at("hurst").get<double>());
        }
        if (has_explicit) {
            if (echo) (*echo)["params_flags"] = true;
            return fsv::FsvParams(xi, lambda, nu, hurst);
        }
        throw std::invalid_argument("no parameters given: use --panel, --params, or --xi/--lambda/--nu/--hurst");
    }
};

json theta_json(const fsv::FsvParams& p) {
    return {{"xi", p.xi}, {"lambda", p.lambda}, {"nu", p.nu}, {"hurst", p.hurst}};
}

int run_simulate(const ParamArgs& pargs, int days, int steps, int n, std::uint64_t seed,
                 const std::string& out_dir) {
    json config;
    const fsv::FsvParams params = pargs.resolve(&config);
    config["theta"] = theta_json(params);
    config["days"] = days;
    config["steps_per_day"] = steps;
    config["n_intraday"] = n;
    config["seed"] = seed;

    fsv::SimConfig sim_config{params, days, steps, n, seed, false, 0.0};
    sim_config.validate();
    const fsv::SimOutput out = fsv::simulate_fsv(sim_config);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    fsv::write_series(dir / "iv.csv", out.iv);
    fsv::write_series(dir / "rv.csv", out.rv);
    fsv::write_series(dir / "bv.csv", out.bv);
    write_manifest(dir / "manifest.json", "simulate", config, json::object(),
                   json::array({"iv.csv", "rv.csv", "bv.csv"}));
    return kExitOk;
}

int run_estimate(const std::string& input, const std::string& correction, int n,
                 std::vector<int> lags, bool no_filter, const std::string& out_file) {
    json config;
    config["input"] = input;
    config["correction"] = correction;
    config["lags"] = lags;
    config["no_filter"] = no_filter;

    fsv::VolSeries series = fsv::load_series(input);
    // Checked before filtering so an undersized file reports its real problem.
    if (!lags.empty()) {
        const int max_lag = *std::max_element(lags.begin(), lags.end());
        if (series.values.size() < static_cast<std::size_t>(max_lag) + 2) {
            throw fsv::DataError("series shorter than maximum lag plus two: " +
                                 std::to_string(series.values.size()) + " rows, max lag " +
                                 std::to_string(max_lag));
        }
    }
    json filter_echo = json::object();
    if (!no_filter) {
        auto [cleaned, report] = fsv::filter_outliers(series);
        filter_echo["removed_zero"] = report.removed_zero;
        filter_echo["removed_mad"] = report.removed_mad;
        filter_echo["kept"] = report.kept;
        series = std::move(cleaned);
    }
    config["filter"] = filter_echo;

    fsv::GmmConfig gmm;
    gmm.spec.lags = std::move(lags);
    gmm.spec.correction = fsv::correction_from_string(correction);
    gmm.spec.n_intraday = n;
    const fsv::GmmFit fit = fsv::fit_gmm(series, gmm);

    const fs::path out_path(out_file);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    fsv::write_fit(out_path, fit);
    write_manifest(sibling_manifest(out_path), "estimate", config,
                   json{{input, fnv1a64_hex(input)}}, json::array({out_path.filename().string()}));

    const auto ci = fsv::hurst_ci_log(fit.theta.hurst, fit.se[3], 0.90);
    std::cout << "theta: xi=" << fit.theta.xi << " lambda=" << fit.theta.lambda
              << " nu=" << fit.theta.nu << " hurst=" << fit.theta.hurst << "\n"
              << "se:    xi=" << fit.se[0] << " lambda=" << fit.se[1] << " nu=" << fit.se[2]
              << " hurst=" << fit.se[3] << "\n"
              << "hurst 90% CI: [" << ci.first << ", " << ci.second << "]\n";
    if (fit.j_dof >= 1) {
        std::cout << "J-test: stat=" << fit.j_stat << " dof=" << fit.j_dof
                  << " pvalue=" << fit.j_pvalue << "\n";
    }
    std::cout << "converged: " << (fit.converged ? "yes" : "no") << "\n";
    return fit.converged ? kExitOk : kExitNoConvergence;
}

int run_moments(const ParamArgs& pargs, const std::string& correction, int n,
                std::vector<int> lags) {
    const fsv::FsvParams params = pargs.resolve(nullptr);
    fsv::MomentSpec spec;
    spec.lags = std::move(lags);
    spec.correction = fsv::correction_from_string(correction);
    spec.n_intraday = n;
    const fsv::MomentVector mv =
        fsv::model_moment_vector(fsv::CovKernel::fsv(params), params.xi, spec);
    std::cout << "moment,value\n";
    std::cout.precision(17);
    std::cout << "mean," << mv.values[0] << "\n";
    for (std::size_t j = 0; j < spec.lags.size(); ++j) {
        std::cout << "raw2_lag" << spec.lags[j] << "," << mv.values[j + 1] << "\n";
    }
    return kExitOk;
}

int run_montecarlo_cmd(const std::string& panel, int reps, const std::string& input_kind,
                       const std::string& correction, std::uint64_t seed, int days, int steps,
                       int n, int jobs, const std::string& out_dir) {
    if (panel.size() != 1) throw std::invalid_argument("--panel expects a single letter A-E");

    fsv::McConfig config{fsv::panel_params(panel[0])};
    config.reps = reps;
    config.days = days;
    config.steps_per_day = steps;
    config.intraday_n = n;
    config.seed = seed;
    config.jobs = jobs;
    config.tracks.push_back(fsv::McTrack{fsv::input_kind_from_string(input_kind),
                                         fsv::correction_from_string(correction)});
    const fsv::McResult result = fsv::run_montecarlo(config);
    const fsv::McTrackResult& track = result.tracks.front();
    const fsv::McSummary summary = fsv::summarize(track);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "fits.csv", std::ios::binary | std::ios::trunc);
        if (!out) throw fsv::DataError("cannot write '" + (dir / "fits.csv").string() + "'");
        out.precision(17);
        out << "rep,xi,lambda,nu,hurst,se_xi,se_lambda,se_nu,se_hurst,j_stat,j_pvalue,"
               "converged,init_xi,init_lambda,init_nu,init_hurst\n";
        for (std::size_t r = 0; r < track.fits.size(); ++r) {
            const fsv::GmmFit& f = track.fits[r];
            const fsv::FsvParams& i = track.initials[r];
            out << r + 1 << ',' << f.theta.xi << ',' << f.theta.lambda << ',' << f.theta.nu << ','
                << f.theta.hurst << ',' << f.se[0] << ',' << f.se[1] << ',' << f.se[2] << ','
                << f.se[3] << ',' << f.j_stat << ',' << f.j_pvalue << ',' << (f.converged ? 1 : 0)
                << ',' << i.xi << ',' << i.lambda << ',' << i.nu << ',' << i.hurst << "\n";
        }
    }
    json summary_doc = {{"panel", panel},
                        {"reps", summary.reps},
                        {"input_kind", input_kind},
                        {"correction", correction},
                        {"mean", summary.mean},
                        {"sd", summary.sd},
                        {"initial_mean", summary.initial_mean},
                        {"j_rejection_rate", summary.j_rejection_rate},
                        {"converged", summary.converged}};
    {
        std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
        if (!out) throw fsv::DataError("cannot write '" + (dir / "summary.json").string() + "'");
        out << summary_doc.dump(2) << "\n";
    }
    json config_echo = {{"panel", panel},     {"reps", reps},   {"input_kind", input_kind},
                        {"correction", correction}, {"seed", seed},   {"days", days},
                        {"steps_per_day", steps},   {"n_intraday", n}, {"jobs", jobs}};
    write_manifest(dir / "manifest.json", "montecarlo", config_echo, json::object(),
                   json::array({"fits.csv", "summary.json"}));

    std::cout << "mean:  xi=" << summary.mean[0] << " lambda=" << summary.mean[1]
              << " nu=" << summary.mean[2] << " hurst=" << summary.mean[3] << "\n"
              << "sd:    xi=" << summary.sd[0] << " lambda=" << summary.sd[1]
              << " nu=" << summary.sd[2] << " hurst=" << summary.sd[3] << "\n"
              << "J rejection rate (5%): " << summary.j_rejection_rate << "\n"
              << "converged: " << summary.converged << "/" << summary.reps << "\n";
    return kExitOk;
}

int run_filter(const std::string& input, const std::string& out_file,
               const std::string& report_file) {
    const fsv::VolSeries series = fsv::load_series(input);
    const auto [cleaned, report] = fsv::filter_outliers(series);

    const fs::path out_path(out_file);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    fsv::write_series(out_path, cleaned);

    json report_doc = {{"input", input},
                       {"removed_zero", report.removed_zero},
                       {"removed_mad", report.removed_mad},
                       {"kept", report.kept}};
    if (!report_file.empty()) {
        const fs::path report_path(report_file);
        if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        if (!out) throw fsv::DataError("cannot write '" + report_file + "'");
        out << report_doc.dump(2) << "\n";
    }
    write_manifest(sibling_manifest(out_path), "filter", json{{"input", input}},
                   json{{input, fnv1a64_hex(input)}}, json::array({out_path.filename().string()}));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional stochastic volatility: simulation and GMM estimation"};
    app.set_version_flag("--version", fsv::kVersion);
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate IV/RV/BV series from the model");
    ParamArgs sim_params;
    sim_params.attach(sim);
    int sim_days = 1;
    int sim_steps = 23400;
    int sim_n = 78;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    sim->add_option("--days", sim_days, "number of days")->check(CLI::PositiveNumber);
    sim->add_option("--steps", sim_steps, "Euler steps per day")->check(CLI::PositiveNumber);
    sim->add_option("--n", sim_n, "intraday sampling frequency")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--out", sim_out, "output directory")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "fit the model to a volatility-proxy CSV");
    std::string est_input;
    std::string est_correction = "none";
    int est_n = 78;
    std::vector<int> est_lags{0, 1, 2, 3, 5, 20, 50};
    bool est_no_filter = false;
    std::string est_out;
    est->add_option("--input", est_input, "input CSV (date,value)")->required();
    est->add_option("--correction", est_correction, "none|clt-rv|exact-rv|clt-bv");
    est->add_option("--n", est_n, "intraday frequency behind the proxy");
    est->add_option("--lags", est_lags, "moment lags")->delimiter(',');
    est->add_flag("--no-filter", est_no_filter, "skip the outlier filter");
    est->add_option("--out", est_out, "output fit JSON")->required();

    // moments
    auto* mom = app.add_subcommand("moments", "print model moment vector as CSV");
    ParamArgs mom_params;
    mom_params.attach(mom);
    std::string mom_correction = "none";
    int mom_n = 78;
    std::vector<int> mom_lags{0, 1, 2, 3, 5, 20, 50};
    mom->add_option("--correction", mom_correction, "none|clt-rv|exact-rv|clt-bv");
    mom->add_option("--n", mom_n, "intraday frequency for corrections");
    mom->add_option("--lags", mom_lags, "moment lags")->delimiter(',');

    // montecarlo
    auto* mc = app.add_subcommand("montecarlo", "replicate a simulation-study row");
    std::string mc_panel = "B";
    int mc_reps = 100;
    std::string mc_kind = "rv";
    std::string mc_correction = "none";
    std::uint64_t mc_seed = 1;
    int mc_days = 4000;
    int mc_steps = 4680;
    int mc_n = 78;
    int mc_jobs = default_jobs();
    std::string mc_out;
    mc->add_option("--panel", mc_panel, "panel preset A-E")->required();
    mc->add_option("--reps", mc_reps, "replications")->check(CLI::PositiveNumber);
    mc->add_option("--input-kind", mc_kind, "iv|rv");
    mc->add_option("--correction", mc_correction, "none|clt-rv|exact-rv|clt-bv");
    mc->add_option("--seed", mc_seed, "RNG seed");
    mc->add_option("--days", mc_days, "days per replication")->check(CLI::PositiveNumber);
    mc->add_option("--steps", mc_steps, "Euler steps per day")->check(CLI::PositiveNumber);
    mc->add_option("--n", mc_n, "intraday sampling frequency")->check(CLI::PositiveNumber);
    mc->add_option("--jobs", mc_jobs, "parallel replications (default $FSV_JOBS or 1)")
        ->check(CLI::PositiveNumber);
    mc->add_option("--out", mc_out, "output directory")->required();

    // filter
    auto* fil = app.add_subcommand("filter", "standalone outlier filtering");
    std::string fil_input;
    std::string fil_out;
    std::string fil_report;
    fil->add_option("--input", fil_input, "input CSV")->required();
    fil->add_option("--out", fil_out, "cleaned CSV")->required();
    fil->add_option("--report", fil_report, "filter report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) {
            return run_simulate(sim_params, sim_days, sim_steps, sim_n, sim_seed, sim_out);
        }
        if (est->parsed()) {
            return run_estimate(est_input, est_correction, est_n, est_lags, est_no_filter,
                                est_out);
        }
        if (mom->parsed()) {
            return run_moments(mom_params, mom_correction, mom_n, mom_lags);
        }
        if (mc->parsed()) {
            return run_montecarlo_cmd(mc_panel, mc_reps, mc_kind, mc_correction, mc_seed, mc_days,
                                      mc_steps, mc_n, mc_jobs, mc_out);
        }
        if (fil->parsed()) {
            return run_filter(fil_input, fil_out, fil_report);
        }
    } catch (const fsv::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fsv::QuadratureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const fsv::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
