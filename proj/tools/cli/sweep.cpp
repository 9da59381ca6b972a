#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "dtunnel/errors.hpp"
#include "dtunnel/tunneling.hpp"

namespace dtunnel::cli {

namespace {

enum class Param { Eps, Theta, Gamma, Z, V, R };

struct Axis {
    Param param{Param::Eps};
    std::string name;
    double min{0};
    double max{1};
    int n{41};
    bool log{false};

    double at(int k) const
    {
        const double f = static_cast<double>(k) / (n - 1);
        if (log)
            return min * std::pow(max / min, f);
        return min + (max - min) * f;
    }
};

Param parse_param(const std::string& name)
{
    static const std::pair<const char*, Param> names[] = {{"eps", Param::Eps}, {"theta", Param::Theta},
                                                           {"gamma", Param::Gamma}, {"z", Param::Z},
                                                           {"v", Param::V},     {"r", Param::R}};
    for (const auto& [key, p] : names)
        if (name == key)
            return p;
    throw CliError(kExitParse, "unknown sweep parameter '" + name + "' (expected eps, theta, gamma, z, v or r)");
}

void set(DimensionlessConfigd& c, Param p, double x)
{
    switch (p) {
    case Param::Eps:
        c.eps = x;
        break;
    case Param::Theta:
        c.theta = x;
        break;
    case Param::Gamma:
        c.gamma = x;
        break;
    case Param::Z:
        c.z = x;
        break;
    case Param::V:
        c.v = x;
        break;
    case Param::R:
        c.r = x;
        break;
    }
}

double parse_number(const std::string& text, const std::string& spec)
{
    double x = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(x))
        throw CliError(kExitParse, "bad number '" + text + "' in axis '" + spec + "'");
    return x;
}

/// name:min:max:n[:log|:lin]
Axis parse_axis(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');)
        parts.push_back(item);
    if (parts.size() < 4 || parts.size() > 5)
        throw CliError(kExitParse, "axis '" + spec + "' must look like name:min:max:n[:log]");
    Axis a;
    a.name = parts[0];
    a.param = parse_param(parts[0]);
    a.min = parse_number(parts[1], spec);
    a.max = parse_number(parts[2], spec);
    const double n = parse_number(parts[3], spec);
    if (n != std::floor(n) || n < 2 || n > 1e6)
        throw CliError(kExitParse, "axis '" + spec + "' needs an integer point count >= 2");
    a.n = static_cast<int>(n);
    if (parts.size() == 5) {
        if (parts[4] != "log" && parts[4] != "lin")
            throw CliError(kExitParse, "axis '" + spec + "': spacing must be log or lin");
        a.log = parts[4] == "log";
    }
    if (!(a.max > a.min))
        throw CliError(kExitParse, "axis '" + spec + "' needs max > min");
    if (a.log && !(a.min > 0))
        throw CliError(kExitParse, "axis '" + spec + "': log spacing needs min > 0");
    return a;
}

/// Admissible eps window with a 2% margin at both edges.
Axis eps_axis(double gamma)
{
    const auto [lo, hi] = admissible_eps_window(gamma);
    const double pad = 0.02 * (hi - lo);
    return {Param::Eps, "eps", lo + pad, hi - pad, 41, false};
}

struct Preset {
    DimensionlessConfigd fixed;
    Axis axis1;
    Axis axis2;
    /// The eps-gamma plane crosses the window edge, so those presets always
    /// emit out-of-window points as NaN.
    bool allow_violations{false};
};

Preset figure_preset(int fig)
{
    const Axis theta{Param::Theta, "theta", 1, 10, 41, false};
    // T = 0 plane: eps over (0, sqrt(5)), the window for gamma up to 2
    const Axis eps_wide{Param::Eps, "eps", 0.02 * std::sqrt(5.0), 0.98 * std::sqrt(5.0), 41, false};
    const Axis gamma{Param::Gamma, "gamma", 0, 2, 41, false};
    switch (fig) {
    case 1:
        return {{-3, -0.5, 0.5, 0.5, 0, 1}, eps_axis(0), theta};
    case 2:
        return {{-3, -0.5, 0.5, 0.1, 0, 1}, eps_axis(0), theta};
    case 3:
        return {{-3, -0.5, 0.5, 0.3, 0, 1}, eps_wide, gamma, true};
    case 4:
        return {{-9, -0.9, 0.5, 0.3, 0, 1}, eps_wide, gamma, true};
    case 5:
        return {{-3, -0.5, 8.02, 0.5, 7.99, 1}, eps_axis(7.99), theta};
    case 6:
        return {{-9, -0.9, 1.2, 0.5, 0.97, 1}, eps_axis(0.97), theta};
    default:
        throw CliError(kExitParse, fmt::format("no figure preset {}", fig));
    }
}

enum class Status { Ok, OutsideWindow, NegativeDelta, Invalid };

struct Point {
    double P{std::numeric_limits<double>::quiet_NaN()};
    Status status{Status::Ok};
    std::optional<double> margin;
    std::string message;
};

Point evaluate(const DimensionlessConfigd& cfg, const Units<double>& units)
{
    Point pt;
    try {
        check_window(cfg);
    } catch (const RegimeViolation& e) {
        pt.status = Status::OutsideWindow;
        pt.message = e.what();
        return pt;
    } catch (const InvalidParameters& e) {
        pt.status = Status::Invalid;
        pt.message = e.what();
        return pt;
    }
    try {
        pt.P = penetrability_dimensionless(cfg, false).value;
        pt.margin = dimensionless_to_dimensional(cfg, units, false).constraint.margin;
    } catch (const NegativeDelta& e) {
        pt.status = Status::NegativeDelta;
        pt.message = e.what();
    } catch (const std::exception& e) {
        pt.status = Status::Invalid;
        pt.message = e.what();
    }
    return pt;
}

} // namespace

int cmd_sweep(const PacketFlags& packet, const SweepFlags& sweep, const OutputFlags& output, std::ostream& out)
{
    DimensionlessConfigd fixed;
    std::optional<Axis> a1, a2;
    bool allow = packet.allow_violations;
    if (sweep.fig != 0) {
        const Preset preset = figure_preset(sweep.fig);
        fixed = preset.fixed;
        a1 = preset.axis1;
        a2 = preset.axis2;
        allow = allow || preset.allow_violations;
    }
    fixed = resolve_config(packet, fixed);
    const Units<double> units = resolve_units(packet);
    if (!sweep.axis1.empty())
        a1 = parse_axis(sweep.axis1);
    if (!sweep.axis2.empty())
        a2 = parse_axis(sweep.axis2);
    if (!a1 || !a2)
        throw CliError(kExitParse, "sweep needs --fig or both --axis1 and --axis2");
    if (a1->param == a2->param)
        throw CliError(kExitParse, "sweep axes must be different parameters");

    const std::size_t n1 = static_cast<std::size_t>(a1->n), n2 = static_cast<std::size_t>(a2->n);
    std::vector<Point> points(n1 * n2);
    const auto config_at = [&](std::size_t k) {
        DimensionlessConfigd c = fixed;
        set(c, a1->param, a1->at(static_cast<int>(k / n2)));
        set(c, a2->param, a2->at(static_cast<int>(k % n2)));
        return c;
    };

    // pure per-point work; results land at their grid index
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < points.size();)
            points[k] = evaluate(config_at(k), units);
    };
    unsigned jobs = sweep.jobs > 0 ? static_cast<unsigned>(sweep.jobs) : std::thread::hardware_concurrency();
    jobs = std::clamp(jobs, 1u, 256u);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < jobs; ++t)
            pool.emplace_back(worker);
        worker();
    }

    std::size_t outside = 0, negative = 0, violated = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Point& pt = points[k];
        const auto where = [&] {
            return fmt::format("{} = {}, {} = {}", a1->name, fmt17(a1->at(static_cast<int>(k / n2))), a2->name,
                               fmt17(a2->at(static_cast<int>(k % n2))));
        };
        switch (pt.status) {
        case Status::Invalid:
            throw CliError(kExitParse, "at " + where() + ": " + pt.message);
        case Status::OutsideWindow:
            if (!allow)
                throw CliError(kExitRegime,
                               "at " + where() + ": " + pt.message + " (use --allow-violations to emit NaN)");
            ++outside;
            break;
        case Status::NegativeDelta:
            ++negative;
            break;
        case Status::Ok:
            break;
        }
        if (pt.margin) {
            min_margin = std::min(min_margin, *pt.margin);
            if (*pt.margin < 0)
                ++violated;
        }
    }
    if (packet.strict && violated > 0)
        throw CliError(kExitRegime, fmt::format("--strict: {} points violate the positivity constraint", violated));

    std::ostringstream body;
    if (output.format == Format::Json) {
        nlohmann::ordered_json j;
        const auto axis_json = [](const Axis& a) {
            nlohmann::ordered_json values = nlohmann::ordered_json::array();
            for (int k = 0; k < a.n; ++k)
                values.push_back(a.at(k));
            return nlohmann::ordered_json{{"name", a.name}, {"values", values}};
        };
        j["axis1"] = axis_json(*a1);
        j["axis2"] = axis_json(*a2);
        j["P"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < n1; ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < n2; ++k)
                row.push_back(points[i * n2 + k].P); // NaN is written as null
            j["P"].push_back(row);
        }
        body << j.dump(2) << '\n';
    } else {
        body << a1->name << ',' << a2->name << ",P\n";
        for (std::size_t k = 0; k < points.size(); ++k)
            body << fmt17(a1->at(static_cast<int>(k / n2))) << ',' << fmt17(a2->at(static_cast<int>(k % n2))) << ','
                 << fmt17(points[k].P) << '\n';
    }

    auto manifest = manifest_base("sweep");
    manifest["config"] = config_json(fixed, units);
    if (sweep.fig != 0)
        manifest["config"]["fig"] = sweep.fig;
    for (const auto* a : {&*a1, &*a2}) {
        manifest["config"][a == &*a1 ? "axis1" : "axis2"] = {
            {"name", a->name}, {"min", a->min}, {"max", a->max}, {"n", a->n}, {"spacing", a->log ? "log" : "lin"}};
    }
    manifest["config"]["allow_violations"] = allow;
    nlohmann::ordered_json summary;
    summary["points"] = points.size();
    summary["window_violations"] = outside;
    summary["negative_delta"] = negative;
    summary["constraint_violations"] = violated;
    summary["min_margin"] = std::isfinite(min_margin) ? nlohmann::ordered_json(min_margin) : nullptr;
    manifest["constraint"] = summary;
    nlohmann::ordered_json notes = nlohmann::ordered_json::array();
    if (outside > 0)
        notes.push_back(fmt::format("{} points outside the admissible eps window are emitted as NaN", outside));
    if (negative > 0)
        notes.push_back(fmt::format("{} points with Delta <= 0 are emitted as NaN", negative));
    if (violated > 0)
        notes.push_back(fmt::format("{} of {} points use Gibbs coefficients that violate the positivity constraint "
                                    "(min margin {:.6g})",
                                    violated, points.size(), min_margin));
    manifest["notes"] = notes;
    emit(body.str(), output, manifest, out);
    return kExitOk;
}

} // namespace dtunnel::cli
