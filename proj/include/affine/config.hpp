#ifndef AFFINE_CONFIG_HPP
#define AFFINE_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "affine/params.hpp"
#include "affine/types.hpp"

namespace affine {

/// Parsed value of one "key = value" line.
struct ConfigValue {
  std::variant<double, std::string, std::vector<double>, std::vector<std::vector<double>>,
               std::vector<std::string>>
      data;
  int line = 0;
};

/// Sectioned key/value text: '#' comments, "[section.path]" headers,
/// numbers, quoted or bare strings, and (nested) bracket arrays.
struct ConfigFile {
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::string origin;  // file name used in diagnostics

  bool has_section(const std::string& s) const { return sections.count(s) > 0; }
};

ConfigFile parse_config_text(const std::string& text, const std::string& origin);
ConfigFile parse_config_file(const std::string& path);

/// Builds the full parameter set; missing blocks default to zero.
AdmissibleParamSet params_from_config(const ConfigFile& cfg);

/// Canonical serialization; parsing it back reproduces the set bit for bit.
std::string params_to_config_text(const AdmissibleParamSet& p);

/// Companion record emitted by the reduction: whether an auxiliary coordinate
/// was added and which drift block the path transform removed.
struct ReductionSidecar {
  bool added_aux = false;
  StateDim original_dim;
  Mat frame;  // n x n (possibly 0 x 0)
};

ReductionSidecar sidecar_from_config(const ConfigFile& cfg);
std::string sidecar_to_config_text(const ReductionSidecar& s);

}  // namespace affine

#endif
