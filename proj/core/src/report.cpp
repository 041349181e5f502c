#include "qmbp/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qmbp/bounds.hpp"
#include "qmbp/ctmc.hpp"
#include "qmbp/errors.hpp"
#include "qmbp/hardy.hpp"
#include "qmbp/sl_eigen.hpp"

namespace qmbp {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr double kEigenSandwichRelSlack = 1e-6;
constexpr double kBoundsContainmentSlack = 1e-9;
constexpr double kCtmcHardySlack = 0.02;
constexpr double kCtmcEigenRelTol = 0.05;

std::string decimal17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> expand_law_spec(const json& cfg) {
    int forms = cfg.contains("rates") + cfg.contains("birth_death") + cfg.contains("skip2");
    if (forms != 1)
        throw Error(errc::config_parse,
                    "config must contain exactly one of rates / birth_death / skip2");
    if (cfg.contains("rates")) {
        if (!cfg["rates"].is_array()) throw Error(errc::config_parse, "rates must be an array");
        return cfg["rates"].get<std::vector<double>>();
    }
    if (cfg.contains("birth_death")) {
        const json& fam = cfg["birth_death"];
        if (!fam.is_object() || !fam.contains("a") || !fam.contains("b"))
            throw Error(errc::config_parse, "birth_death needs fields a and b");
        const double a = fam["a"].get<double>(), b = fam["b"].get<double>();
        return {a, -(a + b), b};
    }
    const json& fam = cfg["skip2"];
    if (!fam.is_object() || !fam.contains("b0") || !fam.contains("b2") || !fam.contains("b3"))
        throw Error(errc::config_parse, "skip2 needs fields b0, b2 and b3");
    const double b0 = fam["b0"].get<double>(), b2 = fam["b2"].get<double>(),
                 b3 = fam["b3"].get<double>();
    return {b0, -(b0 + b2 + b3), b2, b3};
}

json entry_to_json(const BoundsEntry& e) {
    json j;
    j["name"] = e.name;
    j["d2_lo"] = e.d2_lo ? json(*e.d2_lo) : json(nullptr);
    j["d2_hi"] = e.d2_hi ? json(*e.d2_hi) : json(nullptr);
    j["lambda_lo"] = e.lambda_lo ? json(*e.lambda_lo) : json(nullptr);
    j["lambda_hi"] = e.lambda_hi ? json(*e.lambda_hi) : json(nullptr);
    j["applicable"] = e.applicable;
    j["notes"] = e.notes;
    return j;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw Error(errc::io_error, "cannot open " + path.string());
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << decimal17(row[i]);
        }
        out << '\n';
    }
    if (!out) throw Error(errc::io_error, "write failed for " + path.string());
}

struct Consistency {
    json checks = json::array();
    int n_run = 0;
    bool all_pass = true;

    void add(const std::string& name, bool pass, json detail) {
        json c;
        c["name"] = name;
        c["pass"] = pass;
        c["detail"] = std::move(detail);
        checks.push_back(std::move(c));
        ++n_run;
        all_pass = all_pass && pass;
    }
};

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(errc::config_parse, e.what());
    }
    try {
        RunConfig out;
        out.rates = expand_law_spec(cfg);
        if (cfg.contains("pipelines")) {
            for (const auto& p : cfg["pipelines"]) out.pipelines.insert(p.get<std::string>());
        } else {
            out.pipelines.insert("all");
        }
        static const std::set<std::string> known = {"all", "validate", "hardy",
                                                    "bounds", "eigen", "ctmc"};
        for (const auto& p : out.pipelines)
            if (!known.count(p)) throw Error(errc::config_parse, "unknown pipeline: " + p);
        if (out.pipelines.count("all")) out.pipelines = {"validate", "hardy", "bounds", "eigen", "ctmc"};
        out.pipelines.insert("validate");

        if (cfg.contains("tolerances")) {
            const json& t = cfg["tolerances"];
            if (t.contains("hardy_rel_tol")) out.tolerances.hardy_rel_tol = t["hardy_rel_tol"];
            if (t.contains("eigen_rel_tol")) out.tolerances.eigen_rel_tol = t["eigen_rel_tol"];
            if (t.contains("ctmc_tol")) out.tolerances.ctmc_tol = t["ctmc_tol"];
        }
        if (cfg.contains("output")) {
            const json& o = cfg["output"];
            if (o.contains("dir")) out.out_dir = o["dir"].get<std::string>();
            if (o.contains("phi_csv")) out.phi_csv = o["phi_csv"].get<std::string>();
            if (o.contains("eigenfunction_csv"))
                out.eigenfunction_csv = o["eigenfunction_csv"].get<std::string>();
            if (o.contains("survival_csv")) out.survival_csv = o["survival_csv"].get<std::string>();
            if (o.contains("generator_dump"))
                out.generator_dump = o["generator_dump"].get<std::string>();
            if (o.contains("phi_samples")) out.phi_samples = o["phi_samples"].get<int>();
        }
        if (cfg.contains("seed")) out.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("ctmc")) {
            const json& c = cfg["ctmc"];
            if (c.contains("cap")) out.ctmc_cap = c["cap"].get<int>();
            if (c.contains("mc_paths")) out.mc_paths = c["mc_paths"].get<int>();
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(errc::config_parse, e.what());
    }
}

RunReport run(const RunConfig& config) {
    json rep;
    rep["schema"] = kSchemaVersion;
    rep["seed"] = config.seed;

    const auto wants = [&](const char* p) { return config.pipelines.count(p) > 0; };

    BranchingLaw law = [&] {
        try {
            return BranchingLaw::validate(config.rates);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("pipeline validate: ") + e.what());
        }
    }();
    {
        json j;
        j["rates"] = config.rates;
        j["j_max"] = law.max_index();
        j["m_d"] = law.mean_death();
        j["m_b"] = law.mean_birth();
        j["bprime1"] = law.bprime1();
        j["bsecond1"] = law.bsecond1();
        j["subcritical"] = law.subcritical();
        j["critical"] = law.critical();
        rep["law"] = std::move(j);
    }

    std::optional<HardyResult> hardy;
    std::optional<BoundsReport> bounds;
    std::optional<BoundsComparison> comparison;
    std::optional<EigenResult> eigen;
    std::optional<DecayEstimate> decay;
    std::optional<GillespieCurve> mc;

    const bool need_hardy = wants("hardy") || wants("ctmc");
    if (need_hardy) {
        try {
            hardy = hardy_index(law, config.tolerances.hardy_rel_tol);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("pipeline hardy: ") + e.what());
        }
    }
    if (wants("hardy")) {
        json j;
        j["d2"] = hardy->d2;
        j["s_star"] = hardy->s_star;
        j["quad_err"] = hardy->quad_err;
        j["lambda_lo"] = hardy->lambda_lo;
        j["lambda_hi"] = hardy->lambda_hi;
        j["rival_maxima"] = hardy->rival_maxima;
        rep["hardy"] = std::move(j);
    }

    if (wants("bounds")) {
        try {
            bounds = all_bounds(law);
            comparison = compare_bounds(law, *bounds);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("pipeline bounds: ") + e.what());
        }
        json j;
        j["entries"] = json::array();
        for (const auto& e : bounds->entries) j["entries"].push_back(entry_to_json(e));
        j["kappa1"] = bounds->kappa1;
        j["kappa2"] = bounds->kappa2;
        j["s0"] = bounds->s0;
        j["kappa1p"] = bounds->kappa1p;
        j["kappa2p"] = bounds->kappa2p;
        j["s1"] = bounds->s1;
        j["s2"] = std::isnan(bounds->s2) ? json(nullptr) : json(bounds->s2);
        json cmp;
        cmp["best_lambda_lo"] = comparison->best_lambda_lo;
        cmp["best_lambda_hi"] = comparison->best_lambda_hi;
        cmp["best_d2_lo"] = comparison->best_d2_lo;
        cmp["best_d2_hi"] = comparison->best_d2_hi;
        cmp["line_upper_criterion"] = comparison->line_upper_criterion;
        cmp["line_upper_observed"] = comparison->line_upper_observed;
        cmp["criterion_matches"] = comparison->criterion_matches;
        cmp["pairs"] = json::array();
        for (const auto& p : comparison->pairs) {
            json pj;
            pj["first"] = p.first;
            pj["second"] = p.second;
            pj["tighter_lambda_upper"] = p.tighter_lambda_upper;
            pj["tighter_lambda_lower"] = p.tighter_lambda_lower;
            cmp["pairs"].push_back(std::move(pj));
        }
        j["comparison"] = std::move(cmp);
        rep["bounds"] = std::move(j);
    }

    if (wants("eigen")) {
        try {
            eigen = refine(law, config.tolerances.eigen_rel_tol);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("pipeline eigen: ") + e.what());
        }
        json j;
        j["ell0"] = eigen->ell0;
        j["eps_left"] = eigen->eps_left;
        j["eps_right"] = eigen->eps_right;
        j["n_grid"] = eigen->n_grid;
        j["converged"] = eigen->converged;
        j["history"] = json::array();
        for (const auto& h : eigen->history) {
            json hj;
            hj["eps_left"] = h.eps_left;
            hj["eps_right"] = h.eps_right;
            hj["n"] = h.n_grid;
            hj["ell0"] = h.ell;
            j["history"].push_back(std::move(hj));
        }
        rep["eigen"] = std::move(j);
    }

    std::vector<double> t_grid;
    if (wants("ctmc")) {
        try {
            const double t_max = 20.0 * hardy->d2;  // ten mean lifetimes of the midpoint rate
            const double t_min = t_max / 200.0;
            const int n_pts = 64;
            for (int i = 0; i < n_pts; ++i)
                t_grid.push_back(t_min * std::pow(t_max / t_min, i / double(n_pts - 1)));
            decay = estimate_decay_uniformization(law, config.ctmc_cap, t_grid,
                                                  config.tolerances.ctmc_tol);
            if (config.mc_paths > 0)
                mc = gillespie_paths(law, 1, t_grid, config.mc_paths, config.seed);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("pipeline ctmc: ") + e.what());
        }
        json j;
        j["lambda_hat"] = decay->lambda_hat;
        j["method"] = "uniformization";
        j["window"] = {decay->window_lo, decay->window_hi};
        j["cap"] = decay->cap;
        j["lambda_hat_coarse"] = decay->lambda_hat_coarse;
        j["cap_converged"] = decay->cap_converged;
        j["stable_window"] = decay->stable_window;
        json slopes = json::array();
        for (const auto& s : decay->slope_series) slopes.push_back({s.t, s.slope});
        j["slope_series"] = std::move(slopes);
        if (mc) {
            json m;
            m["n_paths"] = mc->n_paths;
            m["seed"] = mc->seed;
            m["state_cap_hit"] = mc->state_cap_hit;
            rep["ctmc_monte_carlo"] = std::move(m);
        }
        rep["ctmc"] = std::move(j);
    }

    // Cross-pipeline consistency checks; all executed checks must pass for
    // exit code zero.
    Consistency checks;
    if (hardy && wants("hardy") && bounds) {
        for (const auto& e : bounds->entries) {
            json detail;
            detail["d2"] = hardy->d2;
            detail["entry"] = e.name;
            bool pass = true;
            if (e.d2_lo) pass = pass && hardy->d2 >= *e.d2_lo - kBoundsContainmentSlack;
            if (e.d2_hi) pass = pass && hardy->d2 <= *e.d2_hi + kBoundsContainmentSlack;
            checks.add("d2_within_" + e.name, pass, std::move(detail));
        }
        json detail;
        detail["best_lambda_lo"] = comparison->best_lambda_lo;
        detail["best_lambda_hi"] = comparison->best_lambda_hi;
        checks.add("lambda_intervals_overlap",
                   comparison->best_lambda_lo <= comparison->best_lambda_hi * (1.0 + 1e-12),
                   std::move(detail));
    }
    if (hardy && wants("hardy") && eigen) {
        json detail;
        detail["ell0"] = eigen->ell0;
        detail["lambda_lo"] = hardy->lambda_lo;
        detail["lambda_hi"] = hardy->lambda_hi;
        const double slack = kEigenSandwichRelSlack * eigen->ell0;
        checks.add("ell0_within_hardy_interval",
                   eigen->ell0 >= hardy->lambda_lo - slack &&
                       eigen->ell0 <= hardy->lambda_hi + slack,
                   std::move(detail));
    }
    if (bounds && eigen) {
        json detail;
        detail["ell0"] = eigen->ell0;
        detail["best_lambda_lo"] = comparison->best_lambda_lo;
        detail["best_lambda_hi"] = comparison->best_lambda_hi;
        const double slack = kEigenSandwichRelSlack * eigen->ell0;
        checks.add("ell0_within_intersected_bounds",
                   eigen->ell0 >= comparison->best_lambda_lo - slack &&
                       eigen->ell0 <= comparison->best_lambda_hi + slack,
                   std::move(detail));
    }
    if (decay && hardy) {
        json detail;
        detail["lambda_hat"] = decay->lambda_hat;
        detail["lambda_lo"] = hardy->lambda_lo;
        detail["lambda_hi"] = hardy->lambda_hi;
        checks.add("lambda_hat_within_hardy_interval",
                   decay->lambda_hat >= hardy->lambda_lo * (1.0 - kCtmcHardySlack) &&
                       decay->lambda_hat <= hardy->lambda_hi * (1.0 + kCtmcHardySlack),
                   std::move(detail));
    }
    if (decay && eigen) {
        json detail;
        detail["lambda_hat"] = decay->lambda_hat;
        detail["ell0"] = eigen->ell0;
        checks.add("lambda_hat_matches_ell0",
                   std::abs(decay->lambda_hat - eigen->ell0) <= kCtmcEigenRelTol * eigen->ell0,
                   std::move(detail));
    }
    rep["consistency"] = checks.checks;
    rep["all_checks_pass"] = checks.all_pass;

    // Requested curve files.
    if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);
    if (config.phi_csv && hardy) {
        std::vector<std::vector<double>> rows;
        if (config.phi_samples && *config.phi_samples > 1) {
            const int n = *config.phi_samples;
            for (int i = 0; i < n; ++i) {
                const double s = (i + 1) / static_cast<double>(n + 1);
                rows.push_back({s, phi(law, s, config.tolerances.hardy_rel_tol)});
            }
        } else {
            for (const auto& pt : hardy->curve) rows.push_back({pt.s, pt.phi});
        }
        write_csv(config.out_dir / *config.phi_csv, "s,phi", rows);
    }
    if (config.eigenfunction_csv && eigen) {
        std::vector<std::vector<double>> rows;
        for (const auto& pt : eigen->eigfun) rows.push_back({pt.s, pt.phi});
        write_csv(config.out_dir / *config.eigenfunction_csv, "s,phi0", rows);
    }
    if (config.survival_csv && wants("ctmc")) {
        std::vector<std::vector<double>> rows;
        if (mc) {
            for (const auto& s : mc->samples) rows.push_back({s.t, s.survival, s.stderr_est});
        } else {
            for (double t : t_grid)
                rows.push_back({t, survival(law, config.ctmc_cap, t, config.tolerances.ctmc_tol),
                                0.0});
        }
        write_csv(config.out_dir / *config.survival_csv, "t,survival,stderr", rows);
    }
    if (config.generator_dump && wants("ctmc")) {
        std::ofstream out(config.out_dir / *config.generator_dump, std::ios::binary);
        if (!out) throw Error(errc::io_error, "cannot open generator dump file");
        dump_coordinate_list(build_generator(law, config.ctmc_cap), out);
    }

    RunReport result;
    result.json = rep.dump(2);
    result.json.push_back('\n');
    result.all_checks_pass = checks.all_pass;
    result.checks_run = checks.n_run;
    return result;
}

std::filesystem::path write_report(const RunReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(".") : out_dir;
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / "report.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_error, "cannot open " + path.string());
    out << report.json;
    if (!out) throw Error(errc::io_error, "write failed for " + path.string());
    return path;
}

}  // namespace qmbp
