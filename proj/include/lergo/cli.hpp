#pragma once

// Command-line front end: configuration, the four commands and CSV/JSON output.

#include "lergo/model.hpp"
#include "lergo/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lergo::cli {

enum class ExitCode : int { Ok = 0, InvalidConfig = 1, VerificationFailed = 2, OracleCapExceeded = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { Distribution, Sweep, Dynamics, Verify };
enum class Format { Csv, Json };

struct CurrentSpec {
    int ell = 0;
};
struct SuperpositionSpec {
    WindingSet windings;
};
struct BellSpec {
    int i = 0;
    int j = 0;
};
struct AmplitudeSpec {
    std::string path;
    std::vector<cplx> raw; // as read, before normalization
};
using StateSpec = std::variant<CurrentSpec, SuperpositionSpec, BellSpec, AmplitudeSpec>;

/// start:stop:step, stop included within half a step.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    static Range parse(const std::string& text);
    std::vector<double> values() const;
    std::string str() const;
};

struct RunConfig {
    Command command = Command::Distribution;
    std::optional<int> L; // default 11, or the amplitude-file length
    double J = 1.0;
    std::optional<double> alpha; // set: power law, +inf allowed
    std::optional<double> R;
    std::optional<double> g; // power law only, defaults to J/2
    double Delta = 0.0;
    std::optional<StateSpec> state;
    std::optional<Range> delta_range;
    std::optional<Range> J_range;
    std::optional<double> t_max;
    double dt = 0.01;
    std::optional<int> S;
    bool components = false;
    Format format = Format::Csv;
    std::string output;
    std::uint64_t seed = verify::kDefaultSeed;
    int samples = 200;

    int sites() const;
    /// Ring for a given nearest-neighbour scale J (used by J sweeps).
    RingSpec ring(double J) const;
    RingSpec ring() const { return ring(J); }

    /// Throws ConfigError when the command's requirements are not met.
    void validate() const;
    nlohmann::ordered_json to_json() const;
};

/// Defaults, then the JSON config file, then explicit flags. Throws ConfigError.
RunConfig parse_command_line(int argc, const char* const* argv);
/// Apply a JSON object with flag-named keys on top of cfg.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct CommandOutput {
    Table table;
    nlohmann::ordered_json report = nlohmann::ordered_json::object();
    bool ok = true;
};

/// Builds the state; amplitude files are normalized, with a warning to `warn`
/// when the norm was off by more than 1e-8.
PureState1x build_state(const RunConfig& cfg, std::ostream* warn = nullptr);

CommandOutput cmd_distribution(const RunConfig& cfg, std::ostream* warn = nullptr);
CommandOutput cmd_sweep(const RunConfig& cfg, std::ostream* warn = nullptr);
CommandOutput cmd_dynamics(const RunConfig& cfg, std::ostream* warn = nullptr);
CommandOutput cmd_verify(const RunConfig& cfg);

/// 15 significant digits, "." separator, independent of the global locale.
std::string format_number(double v);

std::string to_csv(const Table& t);
std::string to_json(const RunConfig& cfg, const CommandOutput& out);

/// Runs the command and writes the encoded result to cfg.output or `out`.
ExitCode execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full entry point: parsing, execution and mapping of errors to exit codes.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lergo::cli
