#pragma once

// CSV / JSON outputs of the experiment drivers. Reals are printed with 17
// significant digits ("%.17g") so every value round-trips exactly.

#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "tikhreg/error.hpp"
#include "tikhreg/experiments.hpp"
#include "tikhreg/param_select.hpp"
#include "tikhreg/spectral.hpp"

namespace tikhreg {

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns) : os_(path) {
    if (!os_) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
  }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(fields), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double x) { return format_real(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  template <class Int>
    requires std::is_integral_v<Int>
  static std::string cell(Int v) {
    return std::to_string(v);
  }

  std::ofstream os_;
};

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

/// k,rho,envelope for the retained modes.
inline void write_spectrum_csv(const std::string& path, const SpectralDecomposition& d,
                               const AlphaFit* fit) {
  CsvWriter csv(path, {"k", "rho", "envelope"});
  for (Index k = 1; k <= d.m; ++k) {
    csv.row(static_cast<long long>(k), d.rho[k - 1], fit ? fit->envelope(k) : 0.0);
  }
}

inline nlohmann::json to_json(const AlphaFit& f) {
  return {{"alpha_hat", f.alpha_hat},
          {"log_c", f.log_c},
          {"c_upper", f.c_upper},
          {"fit_range", {f.k_lo, f.k_hi}},
          {"residual_rms", f.residual_rms}};
}

inline void write_trace_csv(const std::string& path, const AdaptiveTrace& t) {
  CsvWriter csv(path, {"k", "lambda", "scaled_residual", "scaled_wnorm"});
  for (std::size_t k = 0; k < t.lambdas.size(); ++k) {
    csv.row(k, t.lambdas[k], t.residuals[k], t.w_norms[k]);
  }
}

inline void write_sweep_csv(const std::string& path, const SweepResult& s) {
  CsvWriter csv(path, {"lambda", "error"});
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) csv.row(s.lambdas[i], s.output_errors[i]);
}

inline nlohmann::json to_json(const SweepResult& s) {
  return {{"sigma", s.sigma},         {"lambda_pred", s.lambda_pred},
          {"err_at_pred", s.err_at_pred}, {"err_min", s.err_min},
          {"argmin_lambda", s.argmin_lambda}, {"argmin_index", s.argmin_index}};
}

inline void write_mc_cells_csv(const std::string& path, const MonteCarloSummary& s) {
  CsvWriter csv(path, {"n", "delta", "lambda", "mean_out", "mean_b", "reps"});
  for (const auto& c : s.cells) {
    csv.row(static_cast<long long>(c.n), c.delta, c.lambda, c.mean_scaled_output, c.mean_scaled_b, c.reps);
  }
}

inline nlohmann::json mc_fit_json(const MonteCarloSummary& s) {
  return {{"slope_output", s.slope_output},
          {"intercept_output", s.intercept_output},
          {"slope_b", s.slope_b},
          {"intercept_b", s.intercept_b},
          {"cells", s.cells.size()}};
}

inline void write_study_csvs(const std::string& hist_path, const std::string& qq_path,
                             const SampleStudy& s) {
  {
    CsvWriter csv(hist_path, {"bin", "lo", "hi", "count"});
    for (std::size_t i = 0; i < s.bins.counts.size(); ++i) {
      csv.row(i, s.bins.edges[i], s.bins.edges[i + 1], s.bins.counts[i]);
    }
  }
  CsvWriter csv(qq_path, {"normal_quantile", "sample_quantile"});
  for (const auto& [q, z] : s.qq_pairs) csv.row(q, z);
}

inline void write_table_csv(const std::string& path, const std::vector<TableRow>& rows) {
  CsvWriter csv(path, {"delta", "n", "sigma", "lambda_final", "iters", "rel_x", "rel_Ax", "rel_res",
                       "terminated"});
  for (const auto& r : rows) {
    csv.row(r.delta, static_cast<long long>(r.n), r.sigma, r.lambda_final, r.iters, r.rel_x, r.rel_Ax,
            r.rel_res, to_string(r.terminated));
  }
}

}  // namespace tikhreg
