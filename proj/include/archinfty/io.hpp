#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "archinfty/asymptotics.hpp"
#include "archinfty/autocovariance.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"
#include "archinfty/simulate.hpp"
#include "archinfty/stationarity.hpp"

namespace archinfty {

using json = nlohmann::json;

namespace detail {

inline void write_double(std::ostream& os, double v) {
  os << std::setprecision(17) << v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double_field(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": malformed " + what + " field '" + s + "'");
  }
}

inline std::int64_t parse_int_field(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": malformed " + what + " field '" + s + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Load a table kernel from CSV with header "index,value". Indices are
/// 1-based and must be strictly increasing; gaps are filled with zeros.
/// Malformed rows are hard errors identifying the line.
inline KernelSpec table_kernel_from_csv(std::istream& in, TableTail tail = TableTail::zero()) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: empty kernel CSV");
  ++line_no;
  if (line != "index,value" && line != "index,value\r")
    throw std::runtime_error("line 1: expected header 'index,value'");
  std::vector<double> values;
  std::int64_t last_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                               std::to_string(fields.size()));
    const std::int64_t idx = detail::parse_int_field(fields[0], line_no, "index");
    const double v = detail::parse_double_field(fields[1], line_no, "value");
    if (idx < 1) throw std::runtime_error("line " + std::to_string(line_no) + ": index must be >= 1");
    if (idx <= last_index)
      throw std::runtime_error("line " + std::to_string(line_no) + ": indices must be strictly increasing");
    if (v < 0.0) throw std::runtime_error("line " + std::to_string(line_no) + ": kernel values must be >= 0");
    values.resize(static_cast<std::size_t>(idx), 0.0);
    values[static_cast<std::size_t>(idx - 1)] = v;
    last_index = idx;
  }
  return KernelSpec::table(std::move(values), tail);
}

inline void resolvent_to_csv(const ResolventSeries& rs, std::ostream& os) {
  os << "n,z\n";
  for (std::size_t n = 0; n < rs.z.size(); ++n) {
    os << n << ',';
    detail::write_double(os, rs.z[n]);
    os << '\n';
  }
}

/// Read a "n,z" CSV back into a plain z array (n must run 0,1,2,...).
inline std::vector<double> resolvent_from_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: empty resolvent CSV");
  ++line_no;
  if (line != "n,z" && line != "n,z\r") throw std::runtime_error("line 1: expected header 'n,z'");
  std::vector<double> z;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 2 fields");
    const std::int64_t n = detail::parse_int_field(fields[0], line_no, "n");
    if (n != static_cast<std::int64_t>(z.size()))
      throw std::runtime_error("line " + std::to_string(line_no) + ": indices must run 0,1,2,...");
    z.push_back(detail::parse_double_field(fields[1], line_no, "z"));
  }
  if (z.empty()) throw std::runtime_error("resolvent CSV has no data rows");
  return z;
}

inline void autocov_to_csv(const AutocovReport& rep, std::ostream& os) {
  os << "lag,rho,chi,tail_flag\n";
  for (std::size_t k = 0; k < rep.rho.size(); ++k) {
    os << k << ',';
    detail::write_double(os, rep.rho[k]);
    os << ',';
    detail::write_double(os, rep.chi[k]);
    os << ',' << static_cast<int>(rep.tail_flag[k]) << '\n';
  }
}

inline void sim_result_to_csv(const SimResult& r, std::ostream& os) {
  os << "lag,rho_hat,se\n";
  for (std::size_t k = 0; k < r.rho_hat.size(); ++k) {
    os << k << ',';
    detail::write_double(os, r.rho_hat[k]);
    os << ',';
    detail::write_double(os, r.se[k]);
    os << '\n';
  }
}

inline void path_to_csv(std::span<const double> x, std::ostream& os) {
  os << "k,x\n";
  for (std::size_t k = 0; k < x.size(); ++k) {
    os << k + 1 << ',';
    detail::write_double(os, x[k]);
    os << '\n';
  }
}

inline void ratio_series_to_csv(const std::vector<std::pair<std::int64_t, double>>& series, std::ostream& os) {
  os << "n,ratio\n";
  for (const auto& [n, ratio] : series) {
    os << n << ',';
    detail::write_double(os, ratio);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(const Interval& iv) { return json{{"lower", iv.lower}, {"upper", iv.upper}}; }

inline json to_json(const KernelSpec& spec) {
  return std::visit(
      [](const auto& fam) -> json {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, detail::PowerLawFamily>) {
          return json{{"family", "power_law"}, {"scale", fam.scale}, {"exponent", fam.exponent}};
        } else if constexpr (std::is_same_v<T, detail::GeometricFamily>) {
          return json{{"family", "geometric"}, {"scale", fam.scale}, {"ratio", fam.ratio}};
        } else if constexpr (std::is_same_v<T, detail::PeriodicPowerLawFamily>) {
          return json{{"family", "periodic_power_law"}, {"scales", fam.scales}, {"exponent", fam.exponent}};
        } else if constexpr (std::is_same_v<T, detail::LogModulatedFamily>) {
          return json{{"family", "log_modulated_power_law"},
                      {"scale", fam.scale},
                      {"exponent", fam.exponent},
                      {"log_exponent", fam.log_exponent}};
        } else {
          json tail;
          switch (fam.tail.kind) {
            case TableTail::Kind::Zero: tail = json{{"kind", "zero"}}; break;
            case TableTail::Kind::PowerLaw: tail = json{{"kind", "power_law"}, {"exponent", fam.tail.exponent}}; break;
            case TableTail::Kind::Geometric: tail = json{{"kind", "geometric"}, {"ratio", fam.tail.ratio}}; break;
          }
          return json{{"family", "table"}, {"values", fam.values}, {"tail", tail}};
        }
      },
      spec.family());
}

inline KernelSpec kernel_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "power_law") return KernelSpec::power_law(j.at("scale").get<double>(), j.at("exponent").get<double>());
  if (family == "geometric") return KernelSpec::geometric(j.at("scale").get<double>(), j.at("ratio").get<double>());
  if (family == "periodic_power_law")
    return KernelSpec::periodic_power_law(j.at("scales").get<std::vector<double>>(), j.at("exponent").get<double>());
  if (family == "log_modulated_power_law")
    return KernelSpec::log_modulated_power_law(j.at("scale").get<double>(), j.at("exponent").get<double>(),
                                               j.at("log_exponent").get<double>());
  if (family == "table") {
    TableTail tail = TableTail::zero();
    if (j.contains("tail")) {
      const std::string kind = j.at("tail").at("kind").get<std::string>();
      if (kind == "power_law") tail = TableTail::power_law(j.at("tail").at("exponent").get<double>());
      else if (kind == "geometric") tail = TableTail::geometric(j.at("tail").at("ratio").get<double>());
      else if (kind != "zero") throw std::invalid_argument("unknown table tail kind '" + kind + "'");
    }
    return KernelSpec::table(j.at("values").get<std::vector<double>>(), tail);
  }
  throw std::invalid_argument("unknown kernel family '" + family + "'");
}

inline json to_json(const MomentSpec& m) {
  return json{{"lambda1", m.lambda1}, {"lambda2", m.lambda2}, {"a", m.intercept}};
}

inline MomentSpec moments_from_json(const json& j) {
  return MomentSpec(j.at("lambda1").get<double>(), j.at("lambda2").get<double>(), j.at("a").get<double>());
}

inline json to_json(const ShockSpec& s);  // defined below with the family switch

inline ShockSpec shocks_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "scaled_bernoulli")
    return ShockSpec::scaled_bernoulli(j.at("p").get<double>(), j.at("hi").get<double>(), j.at("lo").get<double>());
  if (family == "exponential") return ShockSpec::exponential(j.at("mean").get<double>());
  if (family == "log_normal") return ShockSpec::log_normal(j.at("mu").get<double>(), j.at("s").get<double>());
  if (family == "uniform") return ShockSpec::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (family == "gamma") return ShockSpec::gamma(j.at("shape").get<double>(), j.at("scale").get<double>());
  if (family == "deterministic") return ShockSpec::deterministic(j.at("value").get<double>());
  throw std::invalid_argument("unknown shock family '" + family + "'");
}

inline json to_json(const StationarityReport& r) {
  return json{{"s1", to_string(r.s1)},
              {"omega_lower", r.omega.lower},
              {"omega_upper", r.omega.upper},
              {"s2", to_string(r.s2)},
              {"con2", to_string(r.con2)},
              {"con3", to_string(r.con3)},
              {"newcondbetter", to_string(r.newcondbetter)},
              {"mean_x", r.mean_x},
              {"e_nu_sq", r.e_nu_sq},
              {"var_x", r.var_x}};
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "HOLDS") return Verdict::HOLDS;
  if (s == "FAILS") return Verdict::FAILS;
  if (s == "INDETERMINATE") return Verdict::INDETERMINATE;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

inline StationarityReport stationarity_report_from_json(const json& j) {
  // non-finite doubles serialize to null; omega endpoints are non-negative,
  // so null can only mean an unbounded endpoint
  const auto number_or_inf = [&](const char* field) {
    return j.at(field).is_null() ? kInf : j.at(field).get<double>();
  };
  StationarityReport r;
  r.s1 = verdict_from_string(j.at("s1").get<std::string>());
  r.omega = {number_or_inf("omega_lower"), number_or_inf("omega_upper")};
  r.s2 = verdict_from_string(j.at("s2").get<std::string>());
  r.con2 = verdict_from_string(j.at("con2").get<std::string>());
  r.con3 = verdict_from_string(j.at("con3").get<std::string>());
  r.newcondbetter = verdict_from_string(j.at("newcondbetter").get<std::string>());
  r.mean_x = j.at("mean_x").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("mean_x").get<double>();
  r.e_nu_sq = j.at("e_nu_sq").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("e_nu_sq").get<double>();
  r.var_x = j.at("var_x").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("var_x").get<double>();
  r.scalars_valid = r.s1 == Verdict::HOLDS && r.s2 == Verdict::HOLDS;
  return r;
}

inline json to_json(const AutocovReport& r) {
  return json{{"e_nu_sq", r.e_nu_sq},
              {"horizon", r.horizon},
              {"rho", r.rho},
              {"chi", r.chi},
              {"tail_flag", r.tail_flag}};
}

inline json to_json(const SimResult& r) {
  return json{{"empirical_mean", r.empirical_mean},
              {"rho_hat", r.rho_hat},
              {"se", r.se},
              {"sample_size", r.sample_size},
              {"batches", r.batches},
              {"seed", r.config.seed},
              {"truncation_lag", r.config.truncation_lag},
              {"burn_in", r.config.burn_in},
              {"length", r.config.length},
              {"n_paths", r.config.n_paths}};
}

inline json to_json(const WrReport& r) {
  return json{{"note", "finite-horizon heuristic; CONSISTENT is evidence, not a membership proof"},
              {"r", r.r},
              {"horizon", r.horizon},
              {"ratio_median", r.ratio_median},
              {"ratio_deviation", r.ratio_deviation},
              {"ratios_ok", r.ratios_ok},
              {"weighted_sum", r.weighted_sum},
              {"weighted_tail_fraction", r.weighted_tail_fraction},
              {"summable_ok", r.summable_ok},
              {"m_grid", r.m_grid},
              {"convolution_stat", r.convolution_stat},
              {"convolution_ok", r.convolution_ok},
              {"verdict", to_string(r.verdict)}};
}

inline json to_json(const RatioLimitResult& r) {
  json j{{"empirical", r.empirical}, {"target", r.target}, {"rel_err", r.rel_err}, {"points", r.points}};
  if (!r.class_medians.empty()) j["class_medians"] = r.class_medians;
  return j;
}

inline json to_json(const SlopeFit& f) {
  return json{{"slope", f.slope},
              {"rms_residual", f.rms_residual},
              {"sup_statistic", f.sup_statistic},
              {"excluded", f.excluded},
              {"points", f.points},
              {"superpolynomial", f.superpolynomial}};
}

inline json to_json(const GeometricFit& f) {
  return json{{"rate", f.rate},
              {"scale", f.scale},
              {"max_positive_residual", f.max_positive_residual},
              {"rms_residual", f.rms_residual},
              {"excluded", f.excluded},
              {"ok", f.ok}};
}

inline json to_json(const DecayDiagnostics& d) {
  json j{{"z_over_b", to_json(d.z_over_b)},
         {"chi_over_z", to_json(d.chi_over_z)},
         {"rho_over_b", to_json(d.rho_over_b)},
         {"z_over_b_ok", d.z_over_b_ok},
         {"chi_over_z_ok", d.chi_over_z_ok},
         {"rho_over_b_ok", d.rho_over_b_ok},
         {"rho_loglog", to_json(d.rho_loglog)},
         {"rho_geometric", to_json(d.rho_geometric)}};
  if (d.kernel_wr_valid) j["kernel_wr"] = to_json(d.kernel_wr);
  return j;
}

inline json to_json(const Periodic2Constants& p) {
  return json{{"a0", p.a0},           {"a1", p.a1},
              {"alpha", p.alpha},     {"lambda1", p.lambda1},
              {"s0", p.s0},           {"s1", p.s1},
              {"lambda_factor", p.lam}, {"t0", p.t0},
              {"t1", p.t1},           {"d0", p.d0},
              {"d1", p.d1},           {"sum_z_even", p.sum_z_even},
              {"sum_z_odd", p.sum_z_odd}, {"tau0", p.tau0},
              {"tau1", p.tau1},       {"ratio_even", p.ratio_even},
              {"ratio_odd", p.ratio_odd}};
}

inline json to_json(const Periodic3Constants& p) {
  return json{{"lambda1", p.lambda1},
              {"s0", p.s0},
              {"s1", p.s1},
              {"s2", p.s2},
              {"k_factor", p.k_factor},
              {"d", p.d},
              {"c", p.c},
              {"sum_z_class", p.sum_z_class},
              {"liminf_z_over_phi", p.liminf_z_over_phi},
              {"liminf_chi_over_phi", p.liminf_chi_over_phi},
              {"limsup_chi_over_phi", p.limsup_chi_over_phi}};
}

inline json to_json(const ShockSpec& s) {
  json j = std::visit(
      [](const auto& fam) -> json {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, detail::ScaledBernoulliShock>)
          return json{{"family", "scaled_bernoulli"}, {"p", fam.p}, {"hi", fam.hi}, {"lo", fam.lo}};
        else if constexpr (std::is_same_v<T, detail::ExponentialShock>)
          return json{{"family", "exponential"}, {"mean", fam.mean}};
        else if constexpr (std::is_same_v<T, detail::LogNormalShock>)
          return json{{"family", "log_normal"}, {"mu", fam.mu}, {"s", fam.s}};
        else if constexpr (std::is_same_v<T, detail::UniformShock>)
          return json{{"family", "uniform"}, {"lo", fam.lo}, {"hi", fam.hi}};
        else
          return json{{"family", "gamma"}, {"shape", fam.shape}, {"scale", fam.scale}};
      },
      s.law());
  j["lambda1"] = s.lambda1();
  j["lambda2"] = s.lambda2();
  return j;
}

}  // namespace archinfty
