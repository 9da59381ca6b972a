#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "commands.hpp"
#include "dtunnel/errors.hpp"

namespace dtunnel::cli {

std::string fmt17(double x)
{
    return fmt::format("{:.17g}", x);
}

DimensionlessConfigd resolve_config(const PacketFlags& f, DimensionlessConfigd base)
{
    if (f.z)
        base.z = *f.z;
    if (f.v)
        base.v = *f.v;
    if (f.eps)
        base.eps = *f.eps;
    if (f.r)
        base.r = *f.r;
    if (f.theta)
        base.theta = *f.theta;
    if (f.gamma)
        base.gamma = *f.gamma;
    return base;
}

Units<double> resolve_units(const PacketFlags& f)
{
    if (f.units.empty())
        return {};
    if (f.units.size() != 3)
        throw CliError(kExitParse, "--units expects m,omega,hbar");
    return {f.units[0], f.units[1], f.units[2]};
}

nlohmann::ordered_json config_json(const DimensionlessConfigd& cfg, const Units<double>& units)
{
    nlohmann::ordered_json j;
    j["z"] = cfg.z;
    j["v"] = cfg.v;
    j["eps"] = cfg.eps;
    j["r"] = cfg.r;
    j["theta"] = cfg.theta;
    j["gamma"] = cfg.gamma;
    j["units"] = {{"m", units.m}, {"omega", units.omega}, {"hbar", units.hbar}};
    return j;
}

nlohmann::ordered_json manifest_base(const std::string& command)
{
    std::time_t stamp = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0')
        stamp = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    nlohmann::ordered_json m;
    m["tool"] = "dtunnel";
    m["version"] = std::string(kVersion);
    m["command"] = command;
    m["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(stamp));
    return m;
}

void emit(const std::string& body, const OutputFlags& flags, const nlohmann::ordered_json& manifest,
          std::ostream& out)
{
    if (flags.out.empty()) {
        out << body;
        return;
    }
    std::ofstream file(flags.out, std::ios::binary);
    if (!file)
        throw CliError(kExitParse, "cannot open " + flags.out + " for writing");
    file << body;
    std::ofstream side(flags.out + ".manifest.json", std::ios::binary);
    if (!side)
        throw CliError(kExitParse, "cannot write manifest for " + flags.out);
    side << manifest.dump(2) << '\n';
}

namespace {

/// Values for options not given on the command line, from a flat JSON object
/// whose keys are the long option names ('_' and '-' are interchangeable).
void apply_json_config(CLI::App& app, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw CliError(kExitParse, "cannot read config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CliError(kExitParse, "config file " + path + ": " + e.what());
    }
    if (!doc.is_object())
        throw CliError(kExitParse, "config file " + path + " must hold a JSON object");

    for (const auto& [key, value] : doc.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = app.get_option_no_throw(name.size() == 1 ? "-" + name : "--" + name);
        if (opt == nullptr || name == "config")
            throw CliError(kExitParse, "config file " + path + ": unknown key '" + key + "'");
        if (opt->count() > 0)
            continue; // the command line wins
        std::vector<std::string> inputs;
        const auto text = [](const nlohmann::json& v) {
            if (v.is_string())
                return v.get<std::string>();
            if (v.is_number_float())
                return fmt17(v.get<double>());
            return v.dump();
        };
        if (value.is_array())
            for (const auto& e : value)
                inputs.push_back(text(e));
        else
            inputs.push_back(text(value));
        for (const auto& s : inputs)
            opt->add_result(s);
        try {
            opt->run_callback();
        } catch (const CLI::ParseError& e) {
            throw CliError(kExitParse, "config file " + path + ": key '" + key + "': " + e.what());
        }
    }
}

const std::map<std::string, Format> kFormats{{"text", Format::Text}, {"csv", Format::Csv}, {"json", Format::Json}};

void add_packet_flags(CLI::App* sub, PacketFlags& f)
{
    sub->add_option("-z", f.z, "scaled initial position");
    sub->add_option("-v", f.v, "scaled initial momentum");
    sub->add_option("--eps", f.eps, "scaled dissipation lambda/omega");
    sub->add_option("-r", f.r, "scaled inverse packet width");
    sub->add_option("--theta", f.theta, "coth(hbar omega / 2kT), >= 1");
    sub->add_option("--gamma", f.gamma, "mu/omega");
    sub->add_option("--units", f.units, "m,omega,hbar")->delimiter(',')->expected(3);
    sub->add_flag("--allow-violations", f.allow_violations, "evaluate outside the admissible window");
    sub->add_flag("--strict", f.strict, "fail when the positivity constraint is violated");
}

void add_output_flags(CLI::App* sub, OutputFlags& o, const std::vector<std::string>& formats)
{
    sub->add_option("--out", o.out, "output file (a manifest is written next to it)");
    std::map<std::string, Format> allowed;
    for (const auto& name : formats)
        allowed.emplace(name, kFormats.at(name));
    sub->add_option("--format", o.format, "output format")->transform(CLI::CheckedTransformer(allowed));
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Dissipative tunneling through an inverted parabolic barrier", "dtunnel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    PacketFlags packet;
    OutputFlags output;
    EvolveFlags evolve;
    SweepFlags sweep;
    ValidationOptions validation;
    std::string config_path;

    auto* tunnel = app.add_subcommand("tunnel", "asymptotic penetrability of one configuration");
    add_packet_flags(tunnel, packet);
    add_output_flags(tunnel, output, {"text", "csv", "json"});

    auto* ev = app.add_subcommand("evolve", "moments and P(t) on a time grid");
    add_packet_flags(ev, packet);
    add_output_flags(ev, output, {"csv", "json"});
    ev->add_option("--t-max", evolve.t_max, "final time in units of 1/omega")->check(CLI::PositiveNumber);
    ev->add_option("--steps", evolve.steps, "number of intervals")->check(CLI::PositiveNumber);
    ev->add_flag("--ode", evolve.ode, "integrate the moment equations instead of the closed form");

    auto* sw = app.add_subcommand("sweep", "penetrability surface over two parameters");
    add_packet_flags(sw, packet);
    add_output_flags(sw, output, {"csv", "json"});
    sw->add_option("--fig", sweep.fig, "figure preset 1-6")->check(CLI::Range(1, 6));
    sw->add_option("--axis1", sweep.axis1, "name:min:max:n[:log], name in eps,theta,gamma,z,v,r");
    sw->add_option("--axis2", sweep.axis2, "second axis, same syntax");
    sw->add_option("--jobs", sweep.jobs, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

    auto* va = app.add_subcommand("validate", "compare the closed forms with independent oracles");
    add_output_flags(va, output, {"text", "json"});
    va->add_option("--seed", validation.seed, "random seed");
    va->add_option("--cases", validation.cases, "number of random configurations")->check(CLI::PositiveNumber);
    va->add_flag("--fp", validation.fokker_planck, "also run the Fokker-Planck comparison");
    va->add_option("--grid", validation.grid, "Fokker-Planck cells per axis")->check(CLI::Range(8, 4096));

    for (auto* sub : {tunnel, ev, sw, va})
        sub->add_option("--config", config_path, "flat JSON file of option values; flags override it");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        CLI::App* active = app.get_subcommands().front();
        if (!config_path.empty())
            apply_json_config(*active, config_path);

        // text is only offered by tunnel and validate; elsewhere the default is csv
        if ((active == ev || active == sw) && output.format == Format::Text)
            output.format = Format::Csv;

        if (active == tunnel)
            return cmd_tunnel(packet, output, out);
        if (active == ev)
            return cmd_evolve(packet, evolve, output, out);
        if (active == sw)
            return cmd_sweep(packet, sweep, output, out);
        validation.json = output.format == Format::Json;
        return cmd_validate(validation, output, out, err);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitParse;
    } catch (const CliError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    } catch (const RegimeViolation& e) {
        err << "error: " << e.what() << " (use --allow-violations to evaluate anyway)\n";
        return kExitRegime;
    } catch (const NegativeDelta& e) {
        err << "error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const SingularParameters& e) {
        err << "error: " << e.what() << " (try --ode)\n";
        return kExitSingular;
    } catch (const AmbiguousRegime& e) {
        err << "error: " << e.what() << '\n';
        return kExitSingular;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitParse;
    }
}

} // namespace dtunnel::cli
