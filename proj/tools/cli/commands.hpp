#ifndef DTUNNEL_CLI_COMMANDS_HPP
#define DTUNNEL_CLI_COMMANDS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "dtunnel/model.hpp"

namespace dtunnel::cli {

enum class Format { Text, Csv, Json };

/// Packet and bath flags shared by tunnel, evolve and sweep.
struct PacketFlags {
    std::optional<double> z, v, eps, r, theta, gamma;
    std::vector<double> units;
    bool allow_violations{false};
    bool strict{false};
};

struct OutputFlags {
    std::string out;
    Format format{Format::Text};
};

struct EvolveFlags {
    double t_max{10};
    int steps{100};
    bool ode{false};
};

struct SweepFlags {
    int fig{0};
    std::string axis1;
    std::string axis2;
    int jobs{0};
};

/// Fills unset fields over `base`.
DimensionlessConfigd resolve_config(const PacketFlags& flags, DimensionlessConfigd base = {});
Units<double> resolve_units(const PacketFlags& flags);

nlohmann::ordered_json config_json(const DimensionlessConfigd& cfg, const Units<double>& units);

/// Sends `body` to `out`, or to `flags.out` plus its manifest when a path is set.
void emit(const std::string& body, const OutputFlags& flags, const nlohmann::ordered_json& manifest,
          std::ostream& out);

/// Manifest skeleton: tool, version, command and timestamp (SOURCE_DATE_EPOCH
/// when set, so reruns can be made byte-identical).
nlohmann::ordered_json manifest_base(const std::string& command);

std::string fmt17(double x);

int cmd_tunnel(const PacketFlags& packet, const OutputFlags& output, std::ostream& out);
int cmd_evolve(const PacketFlags& packet, const EvolveFlags& evolve, const OutputFlags& output, std::ostream& out);
int cmd_sweep(const PacketFlags& packet, const SweepFlags& sweep, const OutputFlags& output, std::ostream& out);
int cmd_validate(const ValidationOptions& options, const OutputFlags& output, std::ostream& out, std::ostream& err);

} // namespace dtunnel::cli

#endif // DTUNNEL_CLI_COMMANDS_HPP
