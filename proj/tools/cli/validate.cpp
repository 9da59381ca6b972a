#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "dtunnel/errors.hpp"
#include "dtunnel/fokker_planck.hpp"
#include "dtunnel/moment_ode.hpp"

namespace dtunnel::cli {

namespace {

constexpr double kOdeTolerance = 1e-8;
constexpr double kFokkerPlanckTolerance = 1e-2;
constexpr std::size_t kMaxListedFailures = 10;

std::string describe(const ValidationCase& c)
{
    const auto& p = c.params;
    const auto& s = c.initial;
    return fmt::format("m={:.17g} omega={:.17g} lambda={:.17g} mu={:.17g} hbar={:.17g} D_qq={:.17g} D_pp={:.17g} "
                       "state=({:.17g}, {:.17g}, {:.17g}, {:.17g}, {:.17g})",
                       p.m, p.omega, p.lambda, p.mu, p.hbar, p.D_qq, p.D_pp, s.sigma_q, s.sigma_p, s.sigma_qq,
                       s.sigma_pp, s.sigma_pq);
}

nlohmann::ordered_json case_json(const ValidationCase& c)
{
    const auto& p = c.params;
    const auto& s = c.initial;
    return {{"m", p.m},         {"omega", p.omega}, {"lambda", p.lambda},
            {"mu", p.mu},       {"hbar", p.hbar},   {"D_qq", p.D_qq},
            {"D_pp", p.D_pp},   {"D_pq", p.D_pq},   {"state", {s.sigma_q, s.sigma_p, s.sigma_qq, s.sigma_pp, s.sigma_pq}}};
}

} // namespace

ValidationCase random_case(std::mt19937_64& rng, bool above_nu)
{
    ValidationCase c;
    auto& p = c.params;
    p.m = uniform(rng, 0.5, 2);
    p.omega = uniform(rng, 0.5, 2);
    p.hbar = uniform(rng, 0.5, 2);
    p.mu = p.omega * uniform(rng, 0, 1);
    const double nu = p.nu();
    p.lambda = above_nu ? nu * uniform(rng, 1.05, 2.5) : p.mu + (nu - p.mu) * uniform(rng, 0.05, 0.95);
    const double theta_min = p.lambda / std::sqrt(p.lambda * p.lambda - p.mu * p.mu);
    const auto d = thermal_coefficients(p.m, p.omega, p.lambda, p.mu, p.hbar, theta_min * uniform(rng, 1, 3));
    p.D_qq = d.D_qq;
    p.D_pp = d.D_pp;
    p.D_pq = d.D_pq;

    const double length = std::sqrt(p.hbar / (p.m * p.omega));
    const double momentum = std::sqrt(p.hbar * p.m * p.omega);
    auto& s = c.initial;
    s.sigma_qq = length * length * uniform(rng, 0.1, 2);
    const double rho = uniform(rng, -0.5, 0.5);
    s.sigma_pp = p.hbar * p.hbar / (4 * s.sigma_qq * (1 - rho * rho)) * uniform(rng, 1, 2);
    s.sigma_pq = rho * std::sqrt(s.sigma_qq * s.sigma_pp);
    s.sigma_q = length * uniform(rng, -5, 5);
    s.sigma_p = momentum * uniform(rng, -3, 3);
    return c;
}

ValidationOutcome run_validation(const ValidationOptions& options)
{
    std::mt19937_64 rng(options.seed);
    ErrorReport worst;
    int worst_index = -1;
    double worst_dev = -1;
    std::vector<ValidationCase> cases;
    std::vector<std::pair<int, double>> failures;
    for (int k = 0; k < options.cases; ++k) {
        cases.push_back(random_case(rng, k % 2 == 1));
        const auto& c = cases.back();
        const auto grid = uniform_time_grid(10 / c.params.omega, 50);
        ErrorReport r;
        try {
            r = compare_with_analytic<double>(c.params, c.initial, grid);
        } catch (const Error&) {
            r.max_error.fill(std::numeric_limits<double>::infinity());
        }
        for (std::size_t i = 0; i < 5; ++i)
            worst.max_error[i] = std::max(worst.max_error[i], r.max_error[i]);
        if (r.max() > worst_dev) {
            worst_dev = r.max();
            worst_index = k;
        }
        if (!(r.max() < kOdeTolerance))
            failures.emplace_back(k, r.max());
    }
    const double ode_max = worst.max();
    const bool ode_pass = failures.empty();

    bool fp_pass = true;
    std::array<double, 5> fp_dev{};
    std::string fp_error;
    if (options.fokker_planck) {
        const auto res = dimensionless_to_dimensional(DimensionlessConfigd{-3, -0.5, 0.5, 0.5, 0, 1});
        const double t = 1 / res.params.omega;
        try {
            const auto domain = auto_domain(res.params, res.initial, t);
            const auto g0 = sample_wigner(res.initial, domain, options.grid, options.grid);
            const auto g = fokker_planck_evolve(res.params, g0, t);
            fp_dev = moment_deviation(grid_moments(g), propagate(res.params, res.initial, t));
        } catch (const Error& e) {
            fp_dev.fill(std::numeric_limits<double>::infinity());
            fp_error = e.what();
        }
        fp_pass = *std::max_element(fp_dev.begin(), fp_dev.end()) < kFokkerPlanckTolerance;
    }
    const double fp_max = *std::max_element(fp_dev.begin(), fp_dev.end());

    ValidationOutcome outcome;
    outcome.passed = ode_pass && fp_pass;
    if (options.json) {
        nlohmann::ordered_json j;
        j["version"] = std::string(kVersion);
        j["seed"] = options.seed;
        j["cases"] = options.cases;
        nlohmann::ordered_json ode;
        ode["tolerance"] = kOdeTolerance;
        ode["max_deviation"] = {{"q", worst.max_error[0]},
                                {"p", worst.max_error[1]},
                                {"qq", worst.max_error[2]},
                                {"pp", worst.max_error[3]},
                                {"pq", worst.max_error[4]}};
        ode["max"] = ode_max;
        if (worst_index >= 0)
            ode["worst_case"] = {{"index", worst_index}, {"config", case_json(cases[worst_index])}};
        nlohmann::ordered_json failed = nlohmann::ordered_json::array();
        for (const auto& [k, dev] : failures)
            failed.push_back({{"index", k}, {"deviation", dev}, {"config", case_json(cases[k])}});
        ode["failures"] = failed;
        ode["pass"] = ode_pass;
        j["analytic_vs_ode"] = ode;
        if (options.fokker_planck) {
            j["fokker_planck"] = {{"grid", options.grid},
                                  {"tolerance", kFokkerPlanckTolerance},
                                  {"max_deviation", fp_max},
                                  {"pass", fp_pass}};
            if (!fp_error.empty())
                j["fokker_planck"]["error"] = fp_error;
        }
        j["pass"] = outcome.passed;
        outcome.report = j.dump(2) + "\n";
        return outcome;
    }

    std::ostringstream os;
    const auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    os << fmt::format("dtunnel validate {}\n", kVersion);
    os << fmt::format("seed {}, cases {}\n", options.seed, options.cases);
    os << "analytic vs moment ODE (RK45, rtol 1e-10), t in [0, 10/omega], lambda < nu and lambda > nu alternating\n";
    os << fmt::format("  max deviation  q {:.3e}  p {:.3e}  qq {:.3e}  pp {:.3e}  pq {:.3e}\n", worst.max_error[0],
                      worst.max_error[1], worst.max_error[2], worst.max_error[3], worst.max_error[4]);
    if (worst_index >= 0)
        os << fmt::format("  worst case {}: {}\n", worst_index, describe(cases[worst_index]));
    for (std::size_t i = 0; i < std::min(failures.size(), kMaxListedFailures); ++i)
        os << fmt::format("  failed case {} (deviation {:.3e}): {}\n", failures[i].first, failures[i].second,
                          describe(cases[failures[i].first]));
    os << fmt::format("  {} (max {:.3e}, tolerance {:.0e})\n", verdict(ode_pass), ode_max, kOdeTolerance);
    if (options.fokker_planck) {
        os << fmt::format("fokker-planck: reference packet, {}x{} grid, t = 1/omega\n", options.grid, options.grid);
        os << fmt::format("  max deviation  q {:.3e}  p {:.3e}  qq {:.3e}  pp {:.3e}  pq {:.3e}\n", fp_dev[0],
                          fp_dev[1], fp_dev[2], fp_dev[3], fp_dev[4]);
        if (!fp_error.empty())
            os << "  error: " << fp_error << '\n';
        if (!fp_pass)
            os << "  failed config: z=-3 v=-0.5 eps=0.5 r=0.5 gamma=0 theta=1 (m=omega=hbar=1)\n";
        os << fmt::format("  {} (max {:.3e}, tolerance {:.0e})\n", verdict(fp_pass), fp_max, kFokkerPlanckTolerance);
    }
    os << "overall " << verdict(outcome.passed) << '\n';
    outcome.report = os.str();
    return outcome;
}

int cmd_validate(const ValidationOptions& options, const OutputFlags& output, std::ostream& out, std::ostream& err)
{
    const ValidationOutcome outcome = run_validation(options);
    auto manifest = manifest_base("validate");
    manifest["config"] = {{"seed", options.seed},
                          {"cases", options.cases},
                          {"fp", options.fokker_planck},
                          {"grid", options.grid}};
    manifest["constraint"] = {{"note", "all cases use Gibbs coefficients that satisfy the positivity constraint"}};
    manifest["pass"] = outcome.passed;
    emit(outcome.report, output, manifest, out);
    if (!outcome.passed) {
        err << "validation failed\n";
        return kExitValidation;
    }
    return kExitOk;
}

} // namespace dtunnel::cli
