#pragma once

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dampkde {

enum class ParamType
{
  real,
  count,   //!< non-negative integer
  seed,    //!< unsigned 64-bit integer
  boolean, //!< true/false/1/0/yes/no
  text,
  choice,  //!< one of ParamSpec::choices
  point,   //!< "x,y"
  points,  //!< "x,y;x,y;..."
  list,    //!< "a,b,c" or linear "lo:hi:n"
  loglist, //!< "a,b,c" or log10 exponents "lo:hi:n"
  range    //!< "lo:hi:step"
};

struct ParamSpec
{
  std::string key;
  ParamType type = ParamType::text;
  std::optional<std::string> default_value; //!< absent: required
  std::string help;
  std::vector<std::string> choices;
};

struct CommandSpec
{
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

//! simulate, estimate, variance-sweep, rate-sweep, covariance-lag,
//! inverse-beta, prior-build, prior-verify, girsanov-check.
const std::vector<CommandSpec>&
command_specs();

//! Throws config for an unknown command.
const CommandSpec&
command_spec(const std::string& name);

using KeyValues = std::map<std::string, std::string>;

//! Flat "key = value" lines; '#' starts a comment; blank lines ignored.
//! Malformed lines throw config naming every offending line.
KeyValues
parse_key_values(std::istream& in, const std::string& source = "config");

//! Parameters resolved for one command: defaults < file values < flags.
struct RunConfig
{
  std::string command;
  KeyValues params; //!< every declared key, resolved

  double real(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  std::uint64_t seed() const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  bool has(const std::string& key) const; //!< set and non-empty
  std::array<double, 2> point(const std::string& key) const;
  std::vector<std::array<double, 2>> points(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  std::vector<double> range(const std::string& key) const;

  nlohmann::json to_json() const;
};

//! Merges the layers and validates the result. Unknown keys (from either
//! layer or `unknown_flags`), missing required keys and unparsable values
//! are gathered and thrown together as one config error whose context
//! "keys" lists them comma-separated.
RunConfig
resolve_config(const std::string& command,
               const KeyValues& file_values,
               const KeyValues& flag_values,
               const std::vector<std::string>& unknown_flags = {});

//! Parses one value per its type; returns an error message or nullopt.
std::optional<std::string>
check_value(const ParamSpec& spec, const std::string& value);

//! The output directory: explicit value, else $DAMPKDE_OUTPUT_DIR, else
//! "dampkde_out".
std::filesystem::path
default_output_dir(const std::optional<std::string>& explicit_dir);

//! {code, message, context} as written by the command-line tool.
nlohmann::json
error_json(const std::exception& e);

} // namespace dampkde
