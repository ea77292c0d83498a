#include "tiia/model_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "log.hpp"
#include "tiia/errors.hpp"
#include "tiia/hitchin.hpp"

namespace tiia {

namespace {

using json = nlohmann::ordered_json;

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const std::map<std::string, double>& constants)
      : s_(text), constants_(constants) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    if (!std::isfinite(v)) fail("value is not finite");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::Schema, "bad expression \"" + s_ + "\": " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }
  double primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "log" || id == "sqrt" || id == "exp") {
        if (!eat('(')) fail("expected '(' after " + id);
        const double a = expr();
        if (!eat(')')) fail("missing ')'");
        if (id == "log") return std::log(a);
        if (id == "sqrt") return std::sqrt(a);
        return std::exp(a);
      }
      const auto it = constants_.find(id);
      if (it == constants_.end()) fail("unknown name '" + id + "'");
      return it->second;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  const std::map<std::string, double>& constants_;
  std::size_t pos_ = 0;
};

[[noreturn]] void schema(const std::string& why) { throw Error(ErrorCode::Schema, why); }

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) schema(where + " must be an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!obj.contains(k)) schema(where + " is missing \"" + k + "\"");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) schema(where + " has unknown key \"" + k + "\"");
  }
}

double number(const json& v, const std::map<std::string, double>& constants, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const double x = evaluate_expression(v.get<std::string>(), constants);
    if (!std::isfinite(x)) schema(where + " evaluates to a non-finite value");
    return x;
  }
  schema(where + " must be a number or an expression string");
}

int frame_index(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema(where + " must be an integer");
  const int i = v.get<int>();
  if (i < 1 || i > kDim) schema(where + " must be in 1..6");
  return i;
}

KForm read_form(const json& arr, int degree, const std::map<std::string, double>& constants, const std::string& where) {
  if (!arr.is_array()) schema(where + " must be an array");
  static const char* names[] = {"i", "j", "k"};
  KForm out(degree);
  std::size_t n = 0;
  for (const json& t : arr) {
    const std::string w = where + "[" + std::to_string(n++) + "]";
    if (degree == 2) {
      require_keys(t, w, {"i", "j", "coeff"});
    } else {
      require_keys(t, w, {"i", "j", "k", "coeff"});
    }
    int idx[3];
    for (int q = 0; q < degree; ++q) idx[q] = frame_index(t[names[q]], w + "." + names[q]);
    for (int a = 0; a < degree; ++a) {
      for (int b = a + 1; b < degree; ++b) {
        if (idx[a] == idx[b]) schema(w + " repeats a frame index");
      }
    }
    out += KForm::monomial(std::span<const int>(idx, static_cast<std::size_t>(degree)), number(t["coeff"], constants, w + ".coeff"));
  }
  return out;
}

std::string scientific(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

double evaluate_expression(const std::string& text, const std::map<std::string, double>& constants) {
  return ExpressionParser(text, constants).parse();
}

void ModelFile::set_initial(const std::string& param, double value) {
  for (std::size_t i = 0; i < model.names.size(); ++i) {
    if (model.names[i] == param) {
      initial[static_cast<Eigen::Index>(i)] = value;
      return;
    }
  }
  throw Error(ErrorCode::Schema, "model '" + name + "' has no parameter '" + param + "'");
}

ModelFile parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
  require_keys(doc, "model", {"name", "dim", "structure", "omega", "ansatz", "initial"},
               {"constants", "offset", "description"});
  ModelFile mf;
  if (!doc["name"].is_string()) schema("\"name\" must be a string");
  mf.name = doc["name"].get<std::string>();
  if (doc.contains("description")) {
    if (!doc["description"].is_string()) schema("\"description\" must be a string");
    mf.description = doc["description"].get<std::string>();
  }
  if (!doc["dim"].is_number_integer() || doc["dim"].get<int>() != kDim) schema("\"dim\" must be 6");

  std::map<std::string, double> constants;
  if (doc.contains("constants")) {
    if (!doc["constants"].is_object()) schema("\"constants\" must be an object");
    for (const auto& [k, v] : doc["constants"].items()) {
      if (k == "log" || k == "sqrt" || k == "exp") schema("constant name '" + k + "' is reserved");
      const double x = number(v, constants, "constants." + k);
      constants[k] = x;
      mf.constants.emplace_back(k, x);
    }
  }

  std::array<KForm, kDim> de{KForm(2), KForm(2), KForm(2), KForm(2), KForm(2), KForm(2)};
  if (!doc["structure"].is_array()) schema("\"structure\" must be an array");
  std::size_t n = 0;
  for (const json& t : doc["structure"]) {
    const std::string w = "structure[" + std::to_string(n++) + "]";
    require_keys(t, w, {"k", "i", "j", "coeff"});
    const int k = frame_index(t["k"], w + ".k");
    const int i = frame_index(t["i"], w + ".i");
    const int j = frame_index(t["j"], w + ".j");
    if (i == j) schema(w + " repeats a frame index");
    de[k - 1] += KForm::monomial({i, j}, number(t["coeff"], constants, w + ".coeff"));
  }
  mf.model.name = mf.name;
  mf.model.algebra = LieAlgebra6(de);
  mf.model.omega = read_form(doc["omega"], 2, constants, "omega");
  mf.model.offset = doc.contains("offset") ? read_form(doc["offset"], 3, constants, "offset") : KForm(3);

  const json& ansatz = doc["ansatz"];
  if (!ansatz.is_array() || ansatz.empty()) schema("\"ansatz\" must be a non-empty array");
  n = 0;
  for (const json& a : ansatz) {
    const std::string w = "ansatz[" + std::to_string(n++) + "]";
    require_keys(a, w, {"name", "terms"});
    if (!a["name"].is_string() || a["name"].get<std::string>().empty()) schema(w + ".name must be a non-empty string");
    const std::string pname = a["name"].get<std::string>();
    for (const auto& existing : mf.model.names) {
      if (existing == pname) schema("duplicate ansatz name '" + pname + "'");
    }
    mf.model.names.push_back(pname);
    mf.model.basis.push_back(read_form(a["terms"], 3, constants, w + ".terms"));
  }

  const json& init = doc["initial"];
  if (!init.is_object()) schema("\"initial\" must be an object");
  mf.initial = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mf.model.names.size()));
  for (const auto& [k, v] : init.items()) {
    const double x = number(v, constants, "initial." + k);
    bool found = false;
    for (std::size_t i = 0; i < mf.model.names.size(); ++i) {
      if (mf.model.names[i] == k) {
        mf.initial[static_cast<Eigen::Index>(i)] = x;
        found = true;
      }
    }
    if (!found) schema("\"initial\" names unknown parameter '" + k + "'");
  }
  for (const auto& pname : mf.model.names) {
    if (!init.contains(pname)) schema("\"initial\" is missing parameter '" + pname + "'");
  }
  mf.source = doc.dump();
  return mf;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ModelFile mf = parse_model(ss.str());
  mf.path = path;
  return mf;
}

std::vector<ModelCheck> validate_model(const ModelFile& file) {
  const InvariantModel& m = file.model;
  std::vector<ModelCheck> out;
  auto add = [&](std::string name, bool ok, double value, std::string detail, bool warning = false) {
    out.push_back(ModelCheck{std::move(name), ok, warning, value, std::move(detail)});
  };

  double scale = 1.0;
  for (int k = 0; k < kDim; ++k) scale = std::max(scale, m.algebra.de(k).max_abs());
  const double tol = 1e-12 * scale * scale;

  const double jac = m.algebra.jacobi_residual();
  add("d_squared_zero", jac <= tol, jac, "max |d(de^k)| = " + scientific(jac));

  const double uni = m.algebra.unimodularity_defect();
  add("unimodular", uni <= 1e-12 * scale, uni,
      uni <= 1e-12 * scale ? "trace of ad vanishes"
                           : "max |sum_i c^i_ij| = " + scientific(uni) + "; the codifferential is not the L2 adjoint",
      true);

  const double mu = top_coefficient(reference_volume(m.omega));
  const double wmax = m.omega.max_abs();
  const bool nondeg = wmax > 0.0 && std::abs(mu) > 1e-12 * wmax * wmax * wmax;
  add("omega_nondegenerate", nondeg, mu, "w^3/3! = " + scientific(mu) + " e^123456");

  const double dw = ce_differential(m.omega, m.algebra).max_abs();
  add("omega_closed", dw <= 1e-12 * std::max(1.0, wmax) * scale, dw, "max |d omega| = " + scientific(dw));

  double closed = ce_differential(m.offset, m.algebra).max_abs();
  double prim = wedge(m.omega, m.offset).max_abs();
  double bmax = std::max(1.0, m.offset.max_abs());
  for (const KForm& b : m.basis) {
    closed = std::max(closed, ce_differential(b, m.algebra).max_abs());
    prim = std::max(prim, wedge(m.omega, b).max_abs());
    bmax = std::max(bmax, b.max_abs());
  }
  add("ansatz_closed", closed <= 1e-12 * bmax * scale, closed, "max |d beta| = " + scientific(closed));
  add("ansatz_primitive", prim <= 1e-12 * bmax * std::max(1.0, wmax), prim, "max |omega ^ beta| = " + scientific(prim));

  const Eigen::MatrixXd b = m.basis_matrix();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  const auto rank = lu.rank();
  add("ansatz_independent", rank == b.cols(), static_cast<double>(rank),
      "rank " + std::to_string(rank) + " of " + std::to_string(b.cols()) + " basis forms");

  if (nondeg) {
    const KForm phi = m.phi(file.initial);
    const double lam = lambda_invariant(k_map(phi, reference_volume(m.omega)));
    const bool neg = lam < -1e-10 * std::pow(phi.max_abs(), 4) / (mu * mu);
    add("initial_nondegenerate", neg, lam, "lambda = " + scientific(lam) + (neg ? "" : " (need lambda < 0)"));
    if (neg) {
      bool ok = true;
      std::string why = "g positive definite";
      try {
        (void)metric_from(phi, m.omega);
      } catch (const Error& e) {
        ok = false;
        why = e.what();
      }
      add("initial_structure", ok, ok ? 1.0 : 0.0, why);
    }
  }
  for (const ModelCheck& c : out) {
    if (!c.passed && c.warning_only) log::warn(file.name + ": " + c.name + ": " + c.detail);
  }
  return out;
}

const ModelCheck* first_failure(const std::vector<ModelCheck>& checks) {
  for (const ModelCheck& c : checks) {
    if (!c.passed && !c.warning_only) return &c;
  }
  return nullptr;
}

}  // namespace tiia
