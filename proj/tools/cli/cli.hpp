#ifndef DTUNNEL_CLI_CLI_HPP
#define DTUNNEL_CLI_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtunnel/gaussian_state.hpp"
#include "dtunnel/model.hpp"

namespace dtunnel::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitParse = 1,
    kExitRegime = 2,
    kExitSingular = 3,
    kExitValidation = 4,
};

/// Error carrying the process exit code it should map to.
class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * unit_uniform(rng);
}

struct ValidationCase {
    ModelParamsd params;
    GaussianStated initial;
};

/// Random dimensional configuration with Gibbs coefficients that satisfy the
/// positivity constraint and a start state obeying the uncertainty relation.
/// lambda lies in [0.05, 0.95] nu above mu when `above_nu` is false, otherwise
/// in [1.05, 2.5] nu, so |lambda - nu| stays away from the degenerate point.
ValidationCase random_case(std::mt19937_64& rng, bool above_nu);

struct ValidationOptions {
    std::uint64_t seed{42};
    int cases{100};
    bool fokker_planck{false};
    int grid{256};
    bool json{false};
};

struct ValidationOutcome {
    std::string report;
    bool passed{true};
};

/// Analytic-vs-ODE comparison on `cases` random configurations (alternating
/// lambda < nu and lambda > nu) and optionally the Fokker-Planck comparison on
/// the reference packet. The report is a pure function of the options.
ValidationOutcome run_validation(const ValidationOptions& options);

} // namespace dtunnel::cli

#endif // DTUNNEL_CLI_CLI_HPP
