#pragma once

#include <string>
#include <vector>

#include "taxicab/calibration.hpp"
#include "taxicab/experiments.hpp"

namespace taxicab {

// Pinned CSV headers; golden-file tests keep them stable.
inline constexpr const char* kTraceCsvHeader =
    "sampler,chain,iteration,tv,tv_even,tv_odd,he,he_even,he_odd,largest_state";
inline constexpr const char* kUnivariateSummaryCsvHeader =
    "sampler,iteration,mean_tv,mean_tv_even,mean_tv_odd,mean_he,mean_he_even,mean_he_odd,"
    "mean_largest_state";
inline constexpr const char* kTreeSummaryCsvHeader =
    "method,n,m_lambda,m_k,lambda_radius,k_radius,c,runtime_sec,mae,mae_se,l2,l2_sd,"
    "modal_leaves,modal_vars,modal_share";
inline constexpr const char* kTentCsvHeader = "series,y,mass";

// Deterministic float formatting (shortest round-trip form).
std::string format_double(double v);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

void write_univariate_trace_csv(const std::string& path, const UnivariateResult& res);
void write_univariate_summary_csv(const std::string& path, const UnivariateResult& res);

struct TreeSummaryRow {
  std::string method;
  int n = 0;
  MoveRadii radii;
  const TreeFitResult* fit = nullptr;
};
void write_tree_summary_csv(const std::string& path, const std::vector<TreeSummaryRow>& rows);
void write_posterior_ndjson(const std::string& path, const TreeFitResult& fit, bool include_g_hat);

struct TentSeries {
  std::string name;
  long lambda = 0;
  long k_eff = 0;
  double t = 0.0;
};
void write_tent_pmf_csv(const std::string& path, const std::vector<TentSeries>& series, long lo,
                        long hi);

// Minimal standalone SVG renderers.
void write_svg_series(const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                      const std::string& x_label, const std::string& y_label, bool log_x);

// Reads one numeric column from a headerless CSV (or a plain list of numbers).
std::vector<long> read_response_column(const std::string& path, int column);

}  // namespace taxicab
