#pragma once

// Model files: strict JSON with 1-based frame indices.
//
//   {
//     "name": "...", "dim": 6,
//     "constants": {"lambda": "log((3+sqrt(5))/2)"},
//     "structure": [{"k": 1, "i": 1, "j": 5, "coeff": "-lambda"}],   de^k += coeff e^{ij}
//     "omega":     [{"i": 1, "j": 2, "coeff": 1}],
//     "offset":    [{"i": 1, "j": 3, "k": 5, "coeff": 1}],           optional
//     "ansatz":    [{"name": "a", "terms": [{"i": 1, "j": 3, "k": 5, "coeff": 1}]}],
//     "initial":   {"a": 0}
//   }
//
// Coefficients are numbers or expressions over + - * / ( ), log, sqrt, exp,
// numeric literals and previously defined constants.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tiia/homogeneous.hpp"

namespace tiia {

double evaluate_expression(const std::string& text, const std::map<std::string, double>& constants);

struct ModelFile {
  std::string name;
  std::string description;
  std::string path;
  std::vector<std::pair<std::string, double>> constants;
  InvariantModel model;
  Eigen::VectorXd initial;
  std::string source;  // the parsed document, re-serialized

  /// Throws Schema for an unknown parameter name.
  void set_initial(const std::string& param, double value);
};

/// Throws Error(Schema) on any schema violation, Error(Io) if unreadable.
ModelFile load_model_file(const std::string& path);
ModelFile parse_model(const std::string& json_text);

struct ModelCheck {
  std::string name;
  bool passed = false;
  bool warning_only = false;  // failure is reported but does not block runs
  double value = 0.0;
  std::string detail;
};

std::vector<ModelCheck> validate_model(const ModelFile& file);

/// First failing blocking check, or nullptr.
const ModelCheck* first_failure(const std::vector<ModelCheck>& checks);

}  // namespace tiia
