#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "dtunnel/errors.hpp"
#include "dtunnel/moment_ode.hpp"
#include "dtunnel/tunneling.hpp"

namespace dtunnel::cli {

namespace {

struct Resolved {
    DimensionlessConfigd cfg;
    Units<double> units;
    bool inside_window{true};
    std::optional<ConstraintReport<double>> constraint;
};

/// Window and constraint checks common to tunnel and evolve.
Resolved resolve(const PacketFlags& packet)
{
    Resolved r;
    r.cfg = resolve_config(packet);
    r.units = resolve_units(packet);
    try {
        check_window(r.cfg);
    } catch (const RegimeViolation&) {
        if (!packet.allow_violations)
            throw;
        r.inside_window = false;
    }
    try {
        r.constraint = dimensionless_to_dimensional(r.cfg, r.units, false).constraint;
    } catch (const InvalidParameters&) {
        if (r.inside_window)
            throw;
    }
    if (packet.strict) {
        if (!r.constraint)
            throw CliError(kExitRegime, "--strict: no thermal coefficients exist for this configuration");
        if (!r.constraint->satisfied)
            throw CliError(kExitRegime, fmt::format("--strict: positivity constraint violated (margin {:.6g})",
                                                    r.constraint->margin));
    }
    return r;
}

nlohmann::ordered_json constraint_json(const Resolved& r)
{
    nlohmann::ordered_json c;
    c["window"] = r.inside_window ? "inside" : "outside";
    if (r.constraint) {
        c["satisfied"] = r.constraint->satisfied;
        c["margin"] = r.constraint->margin;
    } else {
        c["satisfied"] = nullptr;
        c["note"] = "no thermal coefficients for lambda <= mu";
    }
    return c;
}

} // namespace

int cmd_tunnel(const PacketFlags& packet, const OutputFlags& output, std::ostream& out)
{
    const Resolved r = resolve(packet);
    const auto P = penetrability_dimensionless(r.cfg, false);
    const bool stuck = P.regime == Regime::Stuck;
    const double ratio = stuck ? 0.0 : r.cfg.gamma == 0 ? ratio_without_mu(r.cfg) : ratio_with_mu(r.cfg);
    const auto E = initial_energy(r.cfg, r.units);
    const std::string regime(to_string(*P.regime));

    std::ostringstream body;
    switch (output.format) {
    case Format::Text: {
        const auto line = [&](std::string_view key, const std::string& value) {
            body << fmt::format("{:<18}{}\n", key, value);
        };
        line("P", fmt17(P.value));
        line("argument", fmt17(P.argument));
        line("ratio", fmt17(ratio));
        line("regime", regime);
        line("energy", fmt17(E.E));
        line("sub_barrier", E.sub_barrier ? "true" : "false");
        line("classical_pass", E.classical_pass ? "true" : "false");
        line("window", r.inside_window ? "inside" : "outside");
        if (r.constraint) {
            line("constraint", r.constraint->satisfied ? "satisfied" : "violated");
            line("constraint_margin", fmt17(r.constraint->margin));
        } else {
            line("constraint", "undefined");
        }
        break;
    }
    case Format::Csv:
        body << "P,argument,ratio,regime,energy,sub_barrier,classical_pass,window,constraint_satisfied,"
                "constraint_margin\n";
        body << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", fmt17(P.value), fmt17(P.argument), fmt17(ratio), regime,
                            fmt17(E.E), E.sub_barrier, E.classical_pass, r.inside_window ? "inside" : "outside",
                            r.constraint ? (r.constraint->satisfied ? "true" : "false") : "",
                            r.constraint ? fmt17(r.constraint->margin) : "");
        break;
    case Format::Json: {
        nlohmann::ordered_json j;
        j["P"] = P.value;
        j["argument"] = P.argument;
        j["ratio"] = ratio;
        j["regime"] = regime;
        j["energy"] = {{"E", E.E}, {"sub_barrier", E.sub_barrier}, {"classical_pass", E.classical_pass}};
        j["constraint"] = constraint_json(r);
        j["config"] = config_json(r.cfg, r.units);
        body << j.dump(2) << '\n';
        break;
    }
    }

    auto manifest = manifest_base("tunnel");
    manifest["config"] = config_json(r.cfg, r.units);
    manifest["constraint"] = constraint_json(r);
    emit(body.str(), output, manifest, out);
    return kExitOk;
}

int cmd_evolve(const PacketFlags& packet, const EvolveFlags& evolve, const OutputFlags& output, std::ostream& out)
{
    const Resolved r = resolve(packet);
    ResolvedModel<double> model;
    try {
        model = dimensionless_to_dimensional(r.cfg, r.units, false);
    } catch (const InvalidParameters& e) {
        throw CliError(kExitRegime, e.what());
    }
    const auto grid = uniform_time_grid(evolve.t_max / r.units.omega, static_cast<std::size_t>(evolve.steps));

    std::vector<GaussianStated> states;
    if (evolve.ode) {
        states = integrate_moments<double>(model.params, kBarrier, model.initial, grid);
    } else {
        states.reserve(grid.size());
        for (const double t : grid)
            states.push_back(propagate(model.params, model.initial, t));
    }

    static constexpr const char* kColumns[] = {"t", "sigma_q", "sigma_p", "sigma_qq", "sigma_pp", "sigma_pq", "P"};
    const auto row = [](const GaussianStated& s) {
        const double P = tail_probability(-s.sigma_q / std::sqrt(2 * s.sigma_qq));
        return std::array<double, 7>{s.t, s.sigma_q, s.sigma_p, s.sigma_qq, s.sigma_pp, s.sigma_pq, P};
    };

    std::ostringstream body;
    if (output.format == Format::Json) {
        nlohmann::ordered_json j;
        j["columns"] = kColumns;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& s : states)
            j["rows"].push_back(row(s));
        body << j.dump(2) << '\n';
    } else {
        body << fmt::format("{}\n", fmt::join(kColumns, ","));
        for (const auto& s : states) {
            const auto values = row(s);
            body << fmt17(values[0]);
            for (std::size_t k = 1; k < values.size(); ++k)
                body << ',' << fmt17(values[k]);
            body << '\n';
        }
    }

    auto manifest = manifest_base("evolve");
    manifest["config"] = config_json(r.cfg, r.units);
    manifest["config"]["t_max"] = evolve.t_max;
    manifest["config"]["steps"] = evolve.steps;
    manifest["config"]["method"] = evolve.ode ? "ode" : "closed-form";
    manifest["constraint"] = constraint_json(r);
    emit(body.str(), output, manifest, out);
    return kExitOk;
}

} // namespace dtunnel::cli
