#include "tiia/run.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "log.hpp"
#include "tiia/errors.hpp"

namespace tiia {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kMonitorColumns[] = {"u", "abs_Rm", "N_sq", "H", "f"};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
  return out;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw Error(ErrorCode::Schema, "expected a number in report.json");
  return v.get<double>();
}

double parse_number(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Schema, where + ": not a number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

json integrate_options_json(const IntegrateOptions& o) {
  return json{{"rtol", o.rtol},
              {"atol", o.atol},
              {"h0", o.h0},
              {"h_min", o.h_min},
              {"max_step", o.max_step},
              {"blowup_threshold", o.blowup_threshold},
              {"growth_fraction", o.growth_fraction},
              {"max_steps", o.max_steps},
              {"t_est_points", o.t_est_points}};
}

IntegrateOptions integrate_options_from(const json& j) {
  IntegrateOptions o;
  o.rtol = j.at("rtol").get<double>();
  o.atol = j.at("atol").get<double>();
  o.h0 = j.at("h0").get<double>();
  o.h_min = j.at("h_min").get<double>();
  o.max_step = j.at("max_step").get<double>();
  o.blowup_threshold = j.at("blowup_threshold").get<double>();
  o.growth_fraction = j.at("growth_fraction").get<double>();
  o.max_steps = j.at("max_steps").get<std::size_t>();
  o.t_est_points = j.at("t_est_points").get<int>();
  return o;
}

json classify_options_json(const ClassifyOptions& o) {
  return json{{"unbounded_exponent", o.unbounded_exponent},
              {"phi_bounded_exponent", o.phi_bounded_exponent},
              {"none_exponent", o.none_exponent},
              {"min_window_samples", o.min_window_samples}};
}

ClassifyOptions classify_options_from(const json& j) {
  ClassifyOptions o;
  o.unbounded_exponent = j.at("unbounded_exponent").get<double>();
  o.phi_bounded_exponent = j.at("phi_bounded_exponent").get<double>();
  o.none_exponent = j.at("none_exponent").get<double>();
  o.min_window_samples = j.at("min_window_samples").get<std::size_t>();
  return o;
}

json fit_json(const GrowthFit& f) {
  return json{{"exponent", f.exponent}, {"intercept", f.intercept}, {"samples", f.samples}};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

RunRecord execute_run(const ModelFile& model, const RunConfig& config) {
  const auto checks = validate_model(model);
  if (const ModelCheck* bad = first_failure(checks)) {
    throw Error(ErrorCode::InvariantViolation, "check " + bad->name + " failed: " + bad->detail);
  }
  if (config.horizon > config.t_end) throw Error(ErrorCode::InvalidArgument, "horizon exceeds t_end");
  RunRecord run;
  run.model = model;
  run.config = config;
  run.trajectory = integrate(model.model, model.initial, config.t_end, config.integrate);
  return run;
}

void write_run(const RunRecord& run, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& names = run.model.model.names;
  const auto& samples = run.trajectory.samples;

  {
    auto out = open_out(dir / "trajectory.csv");
    out << "t";
    for (const auto& n : names) out << ',' << n;
    for (const char* c : kMonitorColumns) out << ',' << c;
    out << '\n';
    for (const Sample& s : samples) {
      out << format_number(s.t);
      for (Eigen::Index i = 0; i < s.coeffs.size(); ++i) out << ',' << format_number(s.coeffs[i]);
      const Monitors& m = s.monitors;
      for (double v : {m.u, m.abs_rm, m.n_sq, m.hitchin, m.f}) out << ',' << format_number(v);
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "monitors.dat");
    out << "# t u abs_Rm N_sq grad_N H f phi_norm u_plus_Rm lambda\n";
    for (const Sample& s : samples) {
      const Monitors& m = s.monitors;
      out << format_number(s.t);
      for (double v : {m.u, m.abs_rm, m.n_sq, m.grad_n, m.hitchin, m.f, m.phi_norm, m.u_plus_rm, m.lambda}) {
        out << ' ' << format_number(v);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "coeffs.dat");
    out << "# t";
    for (const auto& n : names) out << ' ' << n;
    out << '\n';
    for (const Sample& s : samples) {
      out << format_number(s.t);
      for (Eigen::Index i = 0; i < s.coeffs.size(); ++i) out << ' ' << format_number(s.coeffs[i]);
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "residuals.dat");
    out << "# t closed primitive\n";
    for (const Sample& s : samples) {
      out << format_number(s.t) << ' ' << format_number(s.monitors.closed_residual) << ' '
          << format_number(s.monitors.primitive_residual) << '\n';
    }
  }

  json initial = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) initial[names[i]] = run.model.initial[static_cast<Eigen::Index>(i)];
  json report;
  report["tool"] = "tiia";
  report["version"] = kVersion;
  report["config"] = json{{"model_path", run.model.path},
                          {"model", json::parse(run.model.source)},
                          {"initial", initial},
                          {"t_end", run.config.t_end},
                          {"horizon", run.config.horizon},
                          {"integrator", integrate_options_json(run.config.integrate)},
                          {"classifier", classify_options_json(run.config.classify)}};
  report["termination"] = to_string(run.trajectory.termination);
  report["t_est"] = finite_or_null(run.trajectory.t_est);
  report["message"] = run.trajectory.message;
  report["samples"] = samples.size();
  report["rejected_steps"] = run.trajectory.rejected_steps;
  report["rhs_evaluations"] = run.trajectory.rhs_evaluations;
  if (!samples.empty()) {
    report["t_final"] = samples.back().t;
    json fin = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) fin[names[i]] = samples.back().coeffs[static_cast<Eigen::Index>(i)];
    report["final_coeffs"] = fin;

    json ext = json::object();
    auto extrema = [&](const char* name, auto get) {
      double lo = get(samples.front().monitors), hi = lo;
      for (const Sample& s : samples) {
        lo = std::min(lo, get(s.monitors));
        hi = std::max(hi, get(s.monitors));
      }
      ext[name] = json{{"min", finite_or_null(lo)}, {"max", finite_or_null(hi)}};
    };
    extrema("u", [](const Monitors& m) { return m.u; });
    extrema("abs_Rm", [](const Monitors& m) { return m.abs_rm; });
    extrema("N_sq", [](const Monitors& m) { return m.n_sq; });
    extrema("grad_N", [](const Monitors& m) { return m.grad_n; });
    extrema("H", [](const Monitors& m) { return m.hitchin; });
    extrema("f", [](const Monitors& m) { return m.f; });
    extrema("u_plus_Rm", [](const Monitors& m) { return m.u_plus_rm; });
    report["monitor_extrema"] = ext;

    double closed = 0, prim = 0, drop = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      closed = std::max(closed, samples[i].monitors.closed_residual);
      prim = std::max(prim, samples[i].monitors.primitive_residual);
      if (i > 0) drop = std::max(drop, samples[i - 1].monitors.hitchin - samples[i].monitors.hitchin);
    }
    report["residuals"] = json{{"max_closed", closed}, {"max_primitive", prim}, {"max_hitchin_decrease", drop}};
  }
  json cols = json::array({"t"});
  for (const auto& n : names) cols.push_back(n);
  for (const char* c : kMonitorColumns) cols.push_back(c);
  report["columns"] = cols;
  write_json(dir / "report.json", report);
}

RunRecord load_run(const fs::path& dir) {
  const json report = read_json(dir / "report.json");
  RunRecord run;
  run.loaded = true;
  try {
    const json& cfg = report.at("config");
    run.model = parse_model(cfg.at("model").dump());
    run.model.path = cfg.at("model_path").get<std::string>();
    for (const auto& [k, v] : cfg.at("initial").items()) run.model.set_initial(k, v.get<double>());
    run.config.t_end = cfg.at("t_end").get<double>();
    run.config.horizon = cfg.at("horizon").get<double>();
    run.config.integrate = integrate_options_from(cfg.at("integrator"));
    run.config.classify = classify_options_from(cfg.at("classifier"));
    run.trajectory.termination = termination_from_string(report.at("termination").get<std::string>());
    run.trajectory.t_est = number_or_inf(report.at("t_est"));
    run.trajectory.message = report.at("message").get<std::string>();
    run.trajectory.t_end = run.config.t_end;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("report.json: ") + e.what());
  }

  std::ifstream in(dir / "trajectory.csv");
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + (dir / "trajectory.csv").string() + "'");
  const auto& names = run.model.model.names;
  std::vector<std::string> expected{"t"};
  expected.insert(expected.end(), names.begin(), names.end());
  for (const char* c : kMonitorColumns) expected.emplace_back(c);
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != expected) {
    throw Error(ErrorCode::Schema, "trajectory.csv header does not match the run's model");
  }
  const std::size_t nc = names.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != expected.size()) {
      throw Error(ErrorCode::Schema, "trajectory.csv row " + std::to_string(row) + " has the wrong column count");
    }
    const std::string where = "trajectory.csv row " + std::to_string(row);
    Sample s;
    s.t = parse_number(cells[0], where);
    s.coeffs.resize(static_cast<Eigen::Index>(nc));
    for (std::size_t i = 0; i < nc; ++i) s.coeffs[static_cast<Eigen::Index>(i)] = parse_number(cells[1 + i], where);
    Monitors& m = s.monitors;
    m.u = parse_number(cells[1 + nc], where);
    m.abs_rm = parse_number(cells[2 + nc], where);
    m.n_sq = parse_number(cells[3 + nc], where);
    m.hitchin = parse_number(cells[4 + nc], where);
    m.f = parse_number(cells[5 + nc], where);
    m.phi_norm = std::exp(m.u);
    m.u_plus_rm = std::abs(m.u) + m.abs_rm;
    m.grad_n = m.lambda = m.closed_residual = m.primitive_residual = nan;
    if (!run.trajectory.samples.empty() && !(s.t > run.trajectory.samples.back().t)) {
      throw Error(ErrorCode::Schema, where + ": times must increase");
    }
    run.trajectory.samples.push_back(std::move(s));
  }
  return run;
}

SingularityReport classify_run(const RunRecord& run) {
  const double horizon = run.config.horizon > 0.0 ? run.config.horizon : run.config.t_end;
  return classify(series_from(run.trajectory, horizon), run.config.classify);
}

std::string report_to_json(const SingularityReport& r) {
  json j;
  j["type"] = to_string(r.type);
  j["finite_time"] = r.finite_time;
  j["t_est"] = finite_or_null(r.t_est);
  j["horizon"] = r.horizon;
  j["phi_bounded"] = r.phi_bounded;
  j["sup"] = json{{"T_minus_t_f", finite_or_null(r.sup_T_minus_t_f)},
                  {"t_f", finite_or_null(r.sup_t_f)},
                  {"T_minus_t_Rm", finite_or_null(r.sup_T_minus_t_rm)},
                  {"t_Rm", finite_or_null(r.sup_t_rm)},
                  {"phi", finite_or_null(r.sup_phi)},
                  {"u_plus_Rm", finite_or_null(r.sup_u_plus_rm)}};
  j["fits"] = json{{"phi", fit_json(r.phi_fit)}, {"weighted", fit_json(r.weighted_fit)}, {"u_plus_Rm", fit_json(r.singular_fit)}};
  json seq = json::array();
  for (const SequenceEntry& e : r.sequence) {
    seq.push_back(json{{"j", e.j}, {"t", e.t}, {"C", e.C}, {"T_j", finite_or_null(e.T_j)}, {"sample", e.sample}});
  }
  j["sequence"] = seq;
  json bounds = json::array();
  for (const BoundRow& b : r.bounds) {
    bounds.push_back(json{{"j", b.j}, {"points", b.points}, {"max_ratio", b.max_ratio}, {"max_violation", b.max_violation}});
  }
  j["bounds"] = bounds;
  j["bound_constant"] = r.bound_constant;
  j["notes"] = r.notes;
  return j.dump();
}

void attach_report(const fs::path& dir, const SingularityReport& report) {
  json doc = read_json(dir / "report.json");
  doc["singularity"] = json::parse(report_to_json(report));
  write_json(dir / "report.json", doc);
}

RescaleResult rescale_run(const RunRecord& run, int count) {
  RescaleResult res;
  res.report = classify_run(run);
  const double horizon = run.config.horizon > 0.0 ? run.config.horizon : run.config.t_end;
  const MonitorSeries series = series_from(run.trajectory, horizon);
  res.report.sequence = select_sequence(series, res.report, count);
  verify_bounds(series, res.report);
  const InvariantModel& m = run.model.model;
  for (const SequenceEntry& e : res.report.sequence) {
    RescaledSnapshot snap;
    snap.entry = e;
    const KForm phi = m.phi(run.trajectory.samples[e.sample].coeffs);
    snap.u_original = metric_from(phi, m.omega).u;
    snap.structure = rescale_state(phi, m.omega, e.C, res.report.type);
    const Connection lc = koszul_connection(snap.structure.g, m.algebra);
    snap.abs_rm = riemann_curvature(lc, m.algebra, snap.structure.g).norm;
    snap.f = std::cbrt(std::exp(snap.structure.u)) + snap.abs_rm;
    const Monitors& mon = run.trajectory.samples[e.sample].monitors;
    snap.rescaled_F = (is_type_iv(res.report.type) ? mon.abs_rm : mon.f) / e.C;
    res.snapshots.push_back(snap);
  }
  if (is_type_iv(res.report.type)) {
    res.report.notes.push_back("Type IV rescaling: phi_j = C_j^{3/2} phi(t_j + t/C_j)");
  }
  return res;
}

void write_rescale(const RescaleResult& result, const RunRecord& run, const fs::path& dir) {
  {
    auto out = open_out(dir / "sequence.csv");
    out << "j,t_j,C_j\n";
    for (const SequenceEntry& e : result.report.sequence) {
      out << e.j << ',' << format_number(e.t) << ',' << format_number(e.C) << '\n';
    }
  }
  const fs::path snaps = dir / "rescaled";
  fs::remove_all(snaps);
  fs::create_directories(snaps);
  const auto& names = run.model.model.names;
  for (const RescaledSnapshot& s : result.snapshots) {
    auto form_json = [](const KForm& f) {
      json arr = json::array();
      for (unsigned m : masks_of_degree(f.degree())) {
        if (f.coeff(m) == 0.0) continue;
        json term;
        const auto ix = MultiIndex::from_mask(m).indices();
        static const char* keys[] = {"i", "j", "k"};
        for (std::size_t q = 0; q < ix.size(); ++q) term[keys[q]] = ix[q];
        term["coeff"] = f.coeff(m);
        arr.push_back(term);
      }
      return arr;
    };
    auto mat_json = [](const Mat6& m) {
      json rows = json::array();
      for (int i = 0; i < kDim; ++i) {
        json r = json::array();
        for (int j = 0; j < kDim; ++j) r.push_back(m(i, j));
        rows.push_back(r);
      }
      return rows;
    };
    json coeffs = json::object();
    const auto& c = run.trajectory.samples[s.entry.sample].coeffs;
    for (std::size_t i = 0; i < names.size(); ++i) coeffs[names[i]] = c[static_cast<Eigen::Index>(i)];
    json snap{{"j", s.entry.j},
              {"t_j", s.entry.t},
              {"C_j", s.entry.C},
              {"T_j", finite_or_null(s.entry.T_j)},
              {"type", to_string(result.report.type)},
              {"coeffs", coeffs},
              {"omega", form_json(s.structure.omega)},
              {"phi", form_json(s.structure.phi)},
              {"g", mat_json(s.structure.g.matrix())},
              {"J", mat_json(s.structure.J)},
              {"u", s.structure.u},
              {"u_original", s.u_original},
              {"abs_Rm", s.abs_rm},
              {"f", s.f},
              {"rescaled_F", s.rescaled_F}};
    write_json(snaps / ("snapshot_" + std::to_string(s.entry.j) + ".json"), snap);
  }
  attach_report(dir, result.report);
  log::info("wrote " + std::to_string(result.snapshots.size()) + " rescaled snapshots to " + snaps.string());
}

}  // namespace tiia
