// lipro: Lipschitz-Prokhorov distance toolkit.
//
// Subcommands: dl, dp, dlp, verify, compose, simulate, tightness, mosco,
// fdd, converge, cauchy-limit. JSON in, JSON/CSV/SVG out; every run with an
// --out target also writes a reproducibility manifest next to it.
// Exit codes: 0 success, 2 validation error, 3 check failure, 64 usage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipro/cauchy_limit.hpp"
#include "lipro/circle_model.hpp"
#include "lipro/dirichlet_form.hpp"
#include "lipro/heat_kernel.hpp"
#include "lipro/io.hpp"
#include "lipro/isometry_search.hpp"
#include "lipro/lp_metric.hpp"
#include "lipro/manifest.hpp"
#include "lipro/mosco.hpp"
#include "lipro/prokhorov.hpp"
#include "lipro/sampling.hpp"
#include "lipro/svg.hpp"
#include "lipro/torus_model.hpp"
#include "lipro/transfer.hpp"

namespace {

using lipro::io::json;

/// Raised when a computation succeeds but the checked property fails
/// (a violated bound, a rejected certificate, an oracle mismatch).
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("LIPRO_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return cli_seed;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> out;
    for (double v : parse_doubles(csv)) out.push_back(static_cast<std::size_t>(v));
    return out;
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        lipro::io::save_json(out_path, j);
    }
}

struct RunContext {
    lipro::ExperimentManifest manifest;

    void input(const std::string& path) { manifest.inputs[path] = lipro::file_digest(path); }
    void arg(const std::string& key, const std::string& value) { manifest.args[key] = value; }
    void finish(const std::string& out_path) {
        if (out_path.empty()) return;
        manifest.outputs.push_back(out_path);
        manifest.write(out_path + ".manifest.json");
    }
};

std::vector<double> bounded_mode(std::size_t n, int k) {
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        g[j] = 1.0 + 0.5 * std::cos(2.0 * M_PI * k * static_cast<double>(j) / static_cast<double>(n));
    }
    return g;
}

// ---------------------------------------------------------------------------
// subcommand bodies

int run_dl(const std::string& x_path, const std::string& y_path, unsigned jobs,
           std::size_t exhaustive_limit, const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "dl";
    ctx.input(x_path);
    ctx.input(y_path);
    ctx.arg("jobs", std::to_string(jobs));
    ctx.arg("exhaustive-limit", std::to_string(exhaustive_limit));
    const auto X = lipro::io::space_from_json(lipro::io::load_json(x_path));
    const auto Y = lipro::io::space_from_json(lipro::io::load_json(y_path));
    const auto res = lipro::lipschitz_distance(X, Y, exhaustive_limit, jobs);
    json j;
    j["schema"] = lipro::io::kSchemaVersion;
    j["method"] = res.method;
    if (res.witness) {
        j["value"] = res.value;
        j["witness"] = res.witness->assignment();
    } else {
        j["value"] = nullptr;  // infinite: no bi-Lipschitz bijection exists
    }
    emit(j, out);
    ctx.finish(out);
    return 0;
}

int run_dp(const std::string& p_path, const std::string& q_path, bool oracle, bool with_coupling,
           const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "dp";
    ctx.input(p_path);
    ctx.input(q_path);
    const auto P = lipro::io::measure_from_json(lipro::io::load_json(p_path));
    const auto Q = lipro::io::measure_from_json(lipro::io::load_json(q_path));
    const auto res = lipro::prokhorov_distance(P, Q);
    json j;
    j["schema"] = lipro::io::kSchemaVersion;
    j["value"] = res.value;
    if (with_coupling) j["coupling"] = lipro::io::coupling_to_json(res.witness);
    if (oracle) {
        const double o = lipro::prokhorov_bruteforce(P, Q);
        j["oracle"] = o;
        if (std::abs(o - res.value) > 1e-9) {
            emit(j, out);
            throw CheckFailure("flow value and subset oracle disagree beyond 1e-9");
        }
    }
    emit(j, out);
    ctx.finish(out);
    return 0;
}

int run_dlp(const std::string& a_path, const std::string& b_path, bool exact,
            const std::string& maps_path, std::size_t size_limit, unsigned jobs,
            const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "dlp";
    ctx.input(a_path);
    ctx.input(b_path);
    const auto A = lipro::io::instance_from_json(lipro::io::load_json(a_path));
    const auto B = lipro::io::instance_from_json(lipro::io::load_json(b_path));

    lipro::DlpResult res;
    if (!maps_path.empty()) {
        ctx.input(maps_path);
        const json mj = lipro::io::load_json(maps_path);
        std::vector<lipro::MetricMap> candidates;
        for (const auto& a : mj.at("maps")) {
            candidates.emplace_back(A.space, B.space, a.get<std::vector<std::size_t>>());
        }
        res = lipro::dlp_upper_bound(A, B, candidates, true);
    } else {
        if (!exact && A.space->size() > size_limit) {
            throw std::invalid_argument(
                "instance too large for the exact search; pass --maps for an upper bound");
        }
        res = lipro::dlp_exact(A, B, size_limit, jobs);
    }
    json j;
    j["schema"] = lipro::io::kSchemaVersion;
    j["mode"] = res.mode;
    if (res.certificate) {
        j["value"] = res.value;
        j["certificate"] = lipro::io::certificate_to_json(*res.certificate);
    } else {
        j["value"] = nullptr;  // infinite
    }
    emit(j, out);
    ctx.finish(out);
    return 0;
}

int run_verify(const std::string& cert_path, const std::string& a_path, const std::string& b_path,
               const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "verify";
    ctx.input(cert_path);
    ctx.input(a_path);
    ctx.input(b_path);
    const auto A = lipro::io::instance_from_json(lipro::io::load_json(a_path));
    const auto B = lipro::io::instance_from_json(lipro::io::load_json(b_path));
    const auto cert =
        lipro::io::certificate_from_json(lipro::io::load_json(cert_path), A.space, B.space);
    const auto rep = lipro::certificate_verify(cert, A, B);
    json j;
    j["schema"] = lipro::io::kSchemaVersion;
    j["accepted"] = rep.ok;
    j["defect"] = rep.defect;
    j["dp_forward"] = rep.dp_forward;
    j["dp_backward"] = rep.dp_backward;
    j["eps_slack"] = rep.eps_slack;
    j["delta_slack"] = rep.delta_slack;
    if (!rep.ok) j["reason"] = rep.reason;
    emit(j, out);
    ctx.finish(out);
    if (!rep.ok) throw CheckFailure("certificate rejected: " + rep.reason);
    return 0;
}

int run_compose(const std::string& c1_path, const std::string& c2_path,
                const std::vector<std::string>& check_paths, const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "compose";
    ctx.input(c1_path);
    ctx.input(c2_path);
    if (check_paths.size() != 3) {
        throw std::invalid_argument("compose needs --check A B C to resolve the spaces");
    }
    for (const auto& p : check_paths) ctx.input(p);
    const auto A = lipro::io::instance_from_json(lipro::io::load_json(check_paths[0]));
    const auto B = lipro::io::instance_from_json(lipro::io::load_json(check_paths[1]));
    const auto C = lipro::io::instance_from_json(lipro::io::load_json(check_paths[2]));
    const auto c1 =
        lipro::io::certificate_from_json(lipro::io::load_json(c1_path), A.space, B.space);
    const auto c2 =
        lipro::io::certificate_from_json(lipro::io::load_json(c2_path), B.space, C.space);
    const auto comp = lipro::certificate_compose(c1, c2);
    json j = lipro::io::certificate_to_json(comp);
    const auto rep = lipro::certificate_verify(comp, A, C);
    j["accepted"] = rep.ok;
    emit(j, out);
    ctx.finish(out);
    if (!rep.ok) throw CheckFailure("composed certificate rejected: " + rep.reason);
    return 0;
}

int run_simulate(const std::string& family, double L, std::size_t nodes, double Ly,
                 std::size_t nodes_y, double T, std::size_t m, std::size_t count,
                 std::uint64_t seed, double lambda_band, const std::string& profile_csv,
                 unsigned jobs, const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "simulate";
    ctx.arg("family", family);
    ctx.arg("L", std::to_string(L));
    ctx.arg("nodes", std::to_string(nodes));
    ctx.arg("T", std::to_string(T));
    ctx.arg("m", std::to_string(m));
    ctx.arg("count", std::to_string(count));
    ctx.manifest.seed = seed;
    ctx.manifest.seeded = true;

    const lipro::TimeGrid grid(T, m);
    lipro::SampleResult res = [&] {
        if (family == "torus") {
            const lipro::TorusModel model(L, Ly, nodes, nodes_y);
            return lipro::sample_bm_paths(model, grid, count, seed, jobs);
        }
        std::vector<double> profile;
        if (!profile_csv.empty()) profile = parse_doubles(profile_csv);
        const lipro::CircleModel model(L, nodes, lambda_band, profile);
        if (family == "elliptic") {
            return lipro::sample_elliptic_paths(model, grid, count, seed, jobs);
        }
        if (family != "circle") {
            throw std::invalid_argument("unknown family: " + family);
        }
        return lipro::sample_bm_paths(model, grid, count, seed, jobs);
    }();
    json j = lipro::io::measure_to_json(res.measure);
    emit(j, out);
    ctx.finish(out);
    return 0;
}

int run_tightness(const std::string& bound_path, const std::string& params_path, double gamma,
                  const std::string& lambda_csv, bool calibrate, double L, std::size_t nodes,
                  bool empirical, double T, std::size_t m, std::size_t count, std::uint64_t seed,
                  unsigned jobs, const std::string& out, const std::string& svg) {
    RunContext ctx;
    ctx.manifest.command = "tightness";
    ctx.arg("gamma", std::to_string(gamma));
    ctx.arg("lambda-grid", lambda_csv);
    ctx.manifest.seed = seed;
    ctx.manifest.seeded = empirical;

    const auto params = lipro::io::params_from_json(lipro::io::load_json(params_path));
    ctx.input(params_path);
    lipro::HeatKernelBound bound = lipro::io::bound_from_json(lipro::io::load_json(bound_path));
    ctx.input(bound_path);

    const lipro::CircleModel model(L, nodes);
    if (calibrate) {
        std::vector<double> t_grid;
        for (int i = 0; i <= 60; ++i) t_grid.push_back(0.01 * std::pow(100.0, i / 60.0));
        const auto cal = lipro::kernel_domination_check(model, bound, t_grid);
        bound = lipro::HeatKernelBound(cal.minimal_Cprime, bound.nu, bound.tau);
        const auto recheck = lipro::kernel_domination_check(model, bound, t_grid);
        if (!recheck.pass) throw CheckFailure("calibration failed to dominate the kernel");
    }

    const std::vector<double> lambdas = parse_doubles(lambda_csv);
    std::vector<lipro::GridPath> paths;
    if (empirical) {
        const lipro::TimeGrid grid(T, m);
        paths = lipro::sample_bm_paths(model, grid, count, seed, jobs).raw;
    }

    std::ofstream csv;
    if (!out.empty()) {
        csv.open(out);
        csv << "lambda,modulus_bound";
        if (empirical) csv << ",empirical,ci_lower,ci_upper";
        csv << "\n";
    }
    bool violated = false;
    lipro::SvgSeries bound_series{"modulus bound", {}};
    lipro::SvgSeries emp_series{"empirical upper CI", {}};
    for (double lambda : lambdas) {
        const double mb = lipro::modulus_bound(bound, params, lambda, gamma);
        bound_series.points.emplace_back(lambda, mb);
        std::ostringstream row;
        row << lambda << "," << mb;
        if (empirical) {
            const auto est = lipro::empirical_modulus(*model.space(), paths, 0.0, lambda, gamma);
            row << "," << est.estimate << "," << est.lower << "," << est.upper;
            emp_series.points.emplace_back(lambda, est.upper);
            if (est.upper > mb) violated = true;
        }
        if (csv.is_open()) csv << row.str() << "\n";
        if (out.empty()) std::cout << row.str() << "\n";
    }
    csv.close();
    if (!svg.empty()) {
        std::vector<lipro::SvgSeries> series{bound_series};
        if (empirical) series.push_back(emp_series);
        lipro::write_svg_lines(svg, "modulus of continuity vs lambda", "lambda", "probability",
                               series, true, true);
        ctx.manifest.outputs.push_back(svg);
    }
    ctx.arg("Cprime", std::to_string(bound.Cprime));
    ctx.finish(out);
    if (violated) throw CheckFailure("empirical modulus exceeded the bound");
    return 0;
}

int run_mosco(double L, const std::string& resolutions_csv, std::size_t limit_n, double alpha,
              const std::string& modes_csv, bool l_drift, const std::string& out,
              const std::string& svg) {
    RunContext ctx;
    ctx.manifest.command = "mosco";
    ctx.arg("L", std::to_string(L));
    ctx.arg("resolutions", resolutions_csv);
    ctx.arg("limit", std::to_string(limit_n));
    ctx.arg("alpha", std::to_string(alpha));
    ctx.arg("modes", modes_csv);
    ctx.arg("l-drift", l_drift ? "true" : "false");

    const auto resolutions = parse_sizes(resolutions_csv);
    const auto modes = parse_sizes(modes_csv);
    const lipro::CircleModel fine(L, limit_n);
    const auto limit = lipro::GraphDirichletForm::circle(fine);
    std::vector<lipro::CircleModel> models;
    std::vector<lipro::GraphDirichletForm> forms;
    std::vector<lipro::MatchedSubsetTransfer> transfers;
    for (std::size_t n : resolutions) {
        const double Ln = l_drift ? L * (1.0 + 1.0 / static_cast<double>(n)) : L;
        models.emplace_back(Ln, n);
    }
    for (const auto& mcirc : models) {
        forms.push_back(lipro::GraphDirichletForm::circle(mcirc));
        transfers.push_back(
            lipro::MatchedSubsetTransfer::nested_circles(mcirc.space(), fine.space()));
    }
    std::vector<lipro::MoscoStage> stages;
    for (std::size_t i = 0; i < forms.size(); ++i) stages.push_back({&forms[i], &transfers[i]});

    std::vector<std::vector<double>> test_functions;
    for (std::size_t k : modes) {
        std::vector<double> u(limit_n);
        for (std::size_t j = 0; j < limit_n; ++j) {
            u[j] = std::cos(2.0 * M_PI * static_cast<double>(k) * static_cast<double>(j) /
                            static_cast<double>(limit_n));
        }
        test_functions.push_back(std::move(u));
    }
    const auto res = lipro::mosco_resolvent_test(stages, limit, alpha, test_functions);

    std::ostringstream csv;
    csv << "resolution,defect";
    for (std::size_t k : modes) csv << ",mode_" << k;
    csv << "\n";
    std::vector<lipro::SvgSeries> series(modes.size());
    for (std::size_t t = 0; t < modes.size(); ++t) {
        series[t].label = "mode " + std::to_string(modes[t]);
    }
    for (const auto& row : res.rows) {
        csv << row.resolution << "," << row.defect;
        for (std::size_t t = 0; t < row.errors.size(); ++t) {
            csv << "," << row.errors[t];
            series[t].points.emplace_back(static_cast<double>(row.resolution), row.errors[t]);
        }
        csv << "\n";
    }
    csv << "# transfer: matched-subset\n";
    for (std::size_t t = 0; t < modes.size(); ++t) {
        csv << "# slope mode_" << modes[t] << ": " << res.slopes[t] << "\n";
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        f << csv.str();
    }
    if (!svg.empty()) {
        lipro::write_svg_lines(svg, "resolvent convergence (matched-subset transfer)",
                               "resolution", "L2 error", series, true, true);
        ctx.manifest.outputs.push_back(svg);
    }
    ctx.finish(out);
    return 0;
}

int run_fdd(double L, std::size_t nodes, const std::string& resolutions_csv, std::size_t limit_n,
            bool l_drift, const std::string& times_csv, const std::string& obs_path,
            const std::string& modes_csv, const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "fdd";
    ctx.arg("L", std::to_string(L));
    ctx.arg("times", times_csv);
    const auto times = parse_doubles(times_csv);

    auto observables_for = [&](std::size_t n) {
        std::vector<std::vector<double>> obs;
        if (!obs_path.empty()) {
            const json oj = lipro::io::load_json(obs_path);
            for (const auto& g : oj.at("observables")) {
                obs.push_back(g.get<std::vector<double>>());
            }
        } else {
            for (std::size_t k : parse_sizes(modes_csv)) {
                obs.push_back(bounded_mode(n, static_cast<int>(k)));
            }
        }
        return obs;
    };
    if (!obs_path.empty()) ctx.input(obs_path);

    if (resolutions_csv.empty()) {
        // single form evaluation
        const lipro::CircleModel model(L, nodes);
        const auto form = lipro::GraphDirichletForm::circle(model);
        const auto value = lipro::fdd_recursion(form, lipro::InitialDensity::uniform(form), times,
                                                observables_for(nodes));
        json j;
        j["schema"] = lipro::io::kSchemaVersion;
        j["value"] = value;
        emit(j, out);
        ctx.finish(out);
        return 0;
    }

    // refinement study against the limit resolution
    const lipro::CircleModel fine(L, limit_n);
    const auto limit = lipro::GraphDirichletForm::circle(fine);
    const auto limit_density = lipro::InitialDensity::uniform(limit);
    const auto obs = observables_for(limit_n);
    std::vector<lipro::CircleModel> models;
    std::vector<lipro::GraphDirichletForm> forms;
    std::vector<lipro::MatchedSubsetTransfer> transfers;
    std::vector<lipro::InitialDensity> densities;
    for (std::size_t n : parse_sizes(resolutions_csv)) {
        const double Ln = l_drift ? L * (1.0 + 1.0 / static_cast<double>(n)) : L;
        models.emplace_back(Ln, n);
    }
    for (const auto& mcirc : models) {
        forms.push_back(lipro::GraphDirichletForm::circle(mcirc));
        transfers.push_back(
            lipro::MatchedSubsetTransfer::nested_circles(mcirc.space(), fine.space()));
    }
    std::vector<lipro::MoscoStage> stages;
    for (std::size_t i = 0; i < forms.size(); ++i) {
        stages.push_back({&forms[i], &transfers[i]});
        densities.push_back(lipro::InitialDensity::uniform(forms[i]));
    }
    const auto res = lipro::fdd_convergence_test(stages, limit, densities, limit_density, times, obs);
    std::ostringstream csv;
    csv << "resolution,value,error,density_gap\n";
    for (const auto& row : res.rows) {
        csv << row.resolution << "," << row.value << "," << row.error << "," << row.density_gap
            << "\n";
    }
    csv << "# limit value: " << res.limit_value << "\n# transfer: matched-subset\n";
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        f << csv.str();
    }
    ctx.finish(out);
    return 0;
}

int run_converge(double L, std::size_t nodes, const std::string& indices_csv, std::size_t count,
                 std::uint64_t seed, double T, std::size_t m, unsigned jobs,
                 const std::string& out, const std::string& svg) {
    RunContext ctx;
    ctx.manifest.command = "converge";
    ctx.arg("L", std::to_string(L));
    ctx.arg("nodes", std::to_string(nodes));
    ctx.arg("indices", indices_csv);
    ctx.arg("count", std::to_string(count));
    ctx.manifest.seed = seed;
    ctx.manifest.seeded = true;

    const lipro::CircleModel target(L, nodes);
    const lipro::TimeGrid grid(T, m);
    std::vector<lipro::CoupledEntry> entries;
    const auto indices = parse_sizes(indices_csv);
    for (std::size_t idx = 0; idx < indices.size(); ++idx) {
        const double ratio = 1.0 + 1.0 / static_cast<double>(indices[idx]);
        const lipro::CircleModel source(L * ratio, nodes);
        const auto coupled = lipro::sample_bm_paths_coupled(
            source, target, grid, count, lipro::detail::splitmix64(seed ^ indices[idx]), jobs);
        lipro::CoupledEntry e;
        e.eps = 2.0 * std::log(ratio);  // defect of the index bijection
        e.dp_bound = lipro::coupled_prokhorov_bound(coupled.paired_dc, 1.959963984540054);
        entries.push_back(e);
    }
    const auto rep = lipro::convergence_report_coupled(entries);
    std::ostringstream csv;
    csv << "index,eps,dp_bound,value,mode\n";
    lipro::SvgSeries series{"certified d_LP upper bound", {}};
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& row = rep.rows[i];
        csv << indices[i] << "," << row.eps << "," << row.dp << "," << row.value << "," << row.mode
            << "\n";
        series.points.emplace_back(static_cast<double>(indices[i]), row.value);
    }
    csv << "# log-slope: " << rep.log_slope << "\n";
    for (std::size_t i : rep.non_monotone) csv << "# non-monotone at row " << i << "\n";
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        f << csv.str();
    }
    if (!svg.empty()) {
        lipro::write_svg_lines(svg, "certified d_LP upper bounds", "family index", "value",
                               {series}, true, true);
        ctx.manifest.outputs.push_back(svg);
    }
    ctx.finish(out);
    return 0;
}

int run_cauchy_limit(const std::string& chain_path, const std::string& out) {
    RunContext ctx;
    ctx.manifest.command = "cauchy-limit";
    ctx.input(chain_path);
    const json cj = lipro::io::load_json(chain_path);
    lipro::io::check_schema(cj, "chain");
    lipro::CauchyInput input;
    for (const auto& s : cj.at("spaces")) input.spaces.push_back(lipro::io::space_from_json(s));
    if (cj.contains("links")) {
        const auto& links = cj.at("links");
        for (std::size_t i = 0; i < links.size(); ++i) {
            input.links.emplace_back(input.spaces.at(i), input.spaces.at(i + 1),
                                     links[i].get<std::vector<std::size_t>>());
        }
    }
    if (cj.contains("defects")) input.defects = cj.at("defects").get<std::vector<double>>();
    const auto res = lipro::cauchy_limit(input);
    json j;
    j["schema"] = lipro::io::kSchemaVersion;
    j["limit"] = lipro::io::space_to_json(*res.limit);
    j["eps"] = res.eps;
    j["truncation_index"] = res.truncation_index;
    json maps = json::array();
    for (const auto& f : res.to_limit) maps.push_back(f.assignment());
    j["maps"] = maps;
    emit(j, out);
    ctx.finish(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lipschitz-Prokhorov distances between metric spaces with path laws"};
    app.require_subcommand(1);

    // dl
    std::string dl_x, dl_y, dl_out;
    unsigned dl_jobs = 1;
    std::size_t dl_limit = 8;
    auto* dl = app.add_subcommand("dl", "Lipschitz distance between two finite metric spaces");
    dl->add_option("X", dl_x, "space JSON")->required();
    dl->add_option("Y", dl_y, "space JSON")->required();
    dl->add_option("--jobs", dl_jobs, "parallel search width");
    dl->add_option("--exhaustive-limit", dl_limit, "exhaustive search up to this many points");
    dl->add_option("--out", dl_out, "write the result JSON here");

    // dp
    std::string dp_p, dp_q, dp_out;
    bool dp_oracle = false, dp_no_coupling = false;
    auto* dp = app.add_subcommand("dp", "Prokhorov distance between two path measures");
    dp->add_option("P", dp_p)->required();
    dp->add_option("Q", dp_q)->required();
    dp->add_flag("--oracle", dp_oracle, "cross-check against the subset-enumeration oracle");
    dp->add_flag("--no-coupling", dp_no_coupling, "omit the witness coupling from the output");
    dp->add_option("--out", dp_out);

    // dlp
    std::string dlp_a, dlp_b, dlp_maps, dlp_out;
    bool dlp_exact_flag = false;
    std::size_t dlp_limit = 8;
    unsigned dlp_jobs = 1;
    auto* dlp = app.add_subcommand("dlp", "Lipschitz-Prokhorov distance between two instances");
    dlp->add_option("A", dlp_a)->required();
    dlp->add_option("B", dlp_b)->required();
    dlp->add_flag("--exact", dlp_exact_flag, "force the exhaustive search");
    dlp->add_option("--maps", dlp_maps, "candidate maps JSON for a certified upper bound");
    dlp->add_option("--size-limit", dlp_limit, "exhaustive search size cap");
    dlp->add_option("--jobs", dlp_jobs, "parallel search width");
    dlp->add_option("--out", dlp_out);

    // verify
    std::string v_cert, v_a, v_b, v_out;
    auto* verify = app.add_subcommand("verify", "verify an (eps,delta)-isomorphism certificate");
    verify->add_option("cert", v_cert)->required();
    verify->add_option("A", v_a)->required();
    verify->add_option("B", v_b)->required();
    verify->add_option("--out", v_out);

    // compose
    std::string comp_c1, comp_c2, comp_out;
    std::vector<std::string> comp_check;
    auto* compose = app.add_subcommand("compose", "compose two certificates");
    compose->add_option("c1", comp_c1)->required();
    compose->add_option("c2", comp_c2)->required();
    compose->add_option("--check", comp_check, "instances A B C to verify against")->expected(3);
    compose->add_option("--out", comp_out);

    // simulate
    std::string sim_family = "circle", sim_profile, sim_out;
    double sim_L = 2.0 * M_PI, sim_Ly = 2.0 * M_PI, sim_T = 1.0, sim_band = 1.0;
    std::size_t sim_nodes = 64, sim_nodes_y = 16, sim_m = 50, sim_count = 1000;
    std::uint64_t sim_seed = 0;
    unsigned sim_jobs = 1;
    auto* sim = app.add_subcommand("simulate",
                                   "sample diffusion paths on a discretized circle or torus");
    sim->add_option("--family", sim_family, "circle | elliptic | torus");
    sim->add_option("--L", sim_L, "circumference (x side for the torus)");
    sim->add_option("--nodes", sim_nodes);
    sim->add_option("--Ly", sim_Ly, "torus y side");
    sim->add_option("--nodes-y", sim_nodes_y, "torus y resolution");
    sim->add_option("--T", sim_T);
    sim->add_option("--m", sim_m, "grid steps");
    sim->add_option("--count", sim_count);
    sim->add_option("--seed", sim_seed);
    sim->add_option("--lambda-band", sim_band, "ellipticity band");
    sim->add_option("--profile", sim_profile, "comma-separated per-edge conductance profile");
    sim->add_option("--jobs", sim_jobs);
    sim->add_option("--out", sim_out);

    // tightness
    std::string t_bound, t_params, t_lambdas = "0.1,0.05,0.01", t_out, t_svg;
    double t_gamma = 0.8, t_L = 2.0 * M_PI, t_T = 1.0;
    std::size_t t_nodes = 64, t_m = 50, t_count = 10000;
    std::uint64_t t_seed = 0;
    bool t_cal = false, t_emp = false;
    unsigned t_jobs = 1;
    auto* tight = app.add_subcommand("tightness", "modulus-of-continuity bounds and estimates");
    tight->add_option("--bound", t_bound, "phi-bound JSON")->required();
    tight->add_option("--params", t_params, "family params JSON")->required();
    tight->add_option("--gamma", t_gamma);
    tight->add_option("--lambda-grid", t_lambdas);
    tight->add_flag("--calibrate", t_cal, "fit C' by kernel domination on the circle");
    tight->add_flag("--empirical", t_emp, "compare against sampled paths");
    tight->add_option("--L", t_L);
    tight->add_option("--nodes", t_nodes);
    tight->add_option("--T", t_T);
    tight->add_option("--m", t_m);
    tight->add_option("--count", t_count);
    tight->add_option("--seed", t_seed);
    tight->add_option("--jobs", t_jobs);
    tight->add_option("--out", t_out);
    tight->add_option("--svg", t_svg);

    // mosco
    std::string mo_res = "16,32,64,128", mo_modes = "1,2,3", mo_out, mo_svg;
    double mo_L = 2.0 * M_PI, mo_alpha = 1.0;
    std::size_t mo_limit = 512;
    bool mo_drift = false;
    auto* mosco = app.add_subcommand("mosco", "resolvent convergence study on circle families");
    mosco->add_option("--L", mo_L);
    mosco->add_option("--resolutions", mo_res);
    mosco->add_option("--limit", mo_limit);
    mosco->add_option("--alpha", mo_alpha);
    mosco->add_option("--modes", mo_modes);
    mosco->add_flag("--l-drift", mo_drift, "use circumferences L(1+1/n)");
    mosco->add_option("--out", mo_out);
    mosco->add_option("--svg", mo_svg);

    // fdd
    std::string f_res, f_times = "0.2,0.5,0.9", f_obs, f_modes = "1,2,3", f_out;
    double f_L = 2.0 * M_PI;
    std::size_t f_nodes = 64, f_limit = 512;
    bool f_drift = false;
    auto* fdd = app.add_subcommand("fdd", "finite-dimensional distribution values and studies");
    fdd->add_option("--L", f_L);
    fdd->add_option("--nodes", f_nodes);
    fdd->add_option("--resolutions", f_res, "run a refinement study over these resolutions");
    fdd->add_option("--limit", f_limit);
    fdd->add_flag("--l-drift", f_drift);
    fdd->add_option("--times", f_times);
    fdd->add_option("--obs", f_obs, "observables JSON");
    fdd->add_option("--modes", f_modes, "bounded Fourier observables when no --obs");
    fdd->add_option("--out", f_out);

    // converge
    std::string cv_indices = "16,32,64,128,256,512", cv_out, cv_svg;
    double cv_L = 2.0 * M_PI, cv_T = 1.0;
    std::size_t cv_nodes = 128, cv_m = 50, cv_count = 100000;
    std::uint64_t cv_seed = 0;
    unsigned cv_jobs = 1;
    auto* converge = app.add_subcommand(
        "converge", "certified d_LP upper bounds along a circle family shrinking onto a target");
    converge->add_option("--L", cv_L);
    converge->add_option("--nodes", cv_nodes);
    converge->add_option("--indices", cv_indices, "family indices i with L_i = L (1 + 1/i)");
    converge->add_option("--count", cv_count);
    converge->add_option("--seed", cv_seed);
    converge->add_option("--T", cv_T);
    converge->add_option("--m", cv_m);
    converge->add_option("--jobs", cv_jobs);
    converge->add_option("--out", cv_out);
    converge->add_option("--svg", cv_svg);

    // cauchy-limit
    std::string cl_chain, cl_out;
    auto* cauchy = app.add_subcommand("cauchy-limit", "truncated limit of a Cauchy chain");
    cauchy->add_option("chain", cl_chain)->required();
    cauchy->add_option("--out", cl_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << "\n" << e.what() << "\n";
        return 64;
    }

    try {
        if (dl->parsed()) return run_dl(dl_x, dl_y, dl_jobs, dl_limit, dl_out);
        if (dp->parsed()) return run_dp(dp_p, dp_q, dp_oracle, !dp_no_coupling, dp_out);
        if (dlp->parsed()) {
            return run_dlp(dlp_a, dlp_b, dlp_exact_flag, dlp_maps, dlp_limit, dlp_jobs, dlp_out);
        }
        if (verify->parsed()) return run_verify(v_cert, v_a, v_b, v_out);
        if (compose->parsed()) return run_compose(comp_c1, comp_c2, comp_check, comp_out);
        if (sim->parsed()) {
            return run_simulate(sim_family, sim_L, sim_nodes, sim_Ly, sim_nodes_y, sim_T, sim_m,
                                sim_count, resolve_seed(sim_seed), sim_band, sim_profile,
                                sim_jobs, sim_out);
        }
        if (tight->parsed()) {
            return run_tightness(t_bound, t_params, t_gamma, t_lambdas, t_cal, t_L, t_nodes, t_emp,
                                 t_T, t_m, t_count, resolve_seed(t_seed), t_jobs, t_out, t_svg);
        }
        if (mosco->parsed()) {
            return run_mosco(mo_L, mo_res, mo_limit, mo_alpha, mo_modes, mo_drift, mo_out, mo_svg);
        }
        if (fdd->parsed()) {
            return run_fdd(f_L, f_nodes, f_res, f_limit, f_drift, f_times, f_obs, f_modes, f_out);
        }
        if (converge->parsed()) {
            return run_converge(cv_L, cv_nodes, cv_indices, cv_count, resolve_seed(cv_seed), cv_T,
                                cv_m, cv_jobs, cv_out, cv_svg);
        }
        if (cauchy->parsed()) return run_cauchy_limit(cl_chain, cl_out);
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 64;
}
