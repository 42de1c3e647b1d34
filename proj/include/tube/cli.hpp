#pragma once

#include "tube/lab.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tube {

// Values of the configuration subset: numbers, strings, booleans and flat arrays of those.
struct TomlValue {
    std::variant<double, std::string, bool, std::vector<TomlValue>> v;
    bool isInteger = false;
};

using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::string& path);

struct CliConfig {
    StudyConfig study;
    std::optional<double> epsilon; // spectrum subcommand
};

// schema check: unknown sections or keys are rejected
CliConfig config_from_toml(const TomlTable& t);

std::string format_g17(double v);
void write_eigen_csv(const EigenStudy& st, const std::string& path);

// exit codes: 0 ok, 2 validation, 3 solver non-convergence, 4 contract violation, 1 anything else
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tube
