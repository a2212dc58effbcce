#include "taxicab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "taxicab/numeric.hpp"
#include "taxicab/tent.hpp"

namespace taxicab {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  // %.17g round-trips; trim to the shortest representation that still does
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_univariate_trace_csv(const std::string& path, const UnivariateResult& res) {
  std::vector<std::string> lines{kTraceCsvHeader};
  for (const auto& r : res.rows) {
    std::ostringstream os;
    os << r.sampler << ',' << r.chain << ',' << r.iteration << ',' << format_double(r.tv) << ','
       << format_double(r.tv_even) << ',' << format_double(r.tv_odd) << ',' << format_double(r.he)
       << ',' << format_double(r.he_even) << ',' << format_double(r.he_odd) << ',' << r.largest;
    lines.push_back(os.str());
  }
  write_lines(path, lines);
}

void write_univariate_summary_csv(const std::string& path, const UnivariateResult& res) {
  std::vector<std::string> lines{kUnivariateSummaryCsvHeader};
  for (const auto& s : res.summary) {
    std::ostringstream os;
    os << s.sampler << ',' << s.iteration << ',' << format_double(s.tv) << ','
       << format_double(s.tv_even) << ',' << format_double(s.tv_odd) << ',' << format_double(s.he)
       << ',' << format_double(s.he_even) << ',' << format_double(s.he_odd) << ','
       << format_double(s.largest_mean);
    lines.push_back(os.str());
  }
  write_lines(path, lines);
}

void write_tree_summary_csv(const std::string& path, const std::vector<TreeSummaryRow>& rows) {
  std::vector<std::string> lines{kTreeSummaryCsvHeader};
  for (const auto& row : rows) {
    const TreeFitResult& fit = *row.fit;
    long total = 0;
    for (const auto& [key, count] : fit.topology_counts) {
      (void)key;
      total += count;
    }
    double share = total > 0 ? static_cast<double>(fit.modal_count) / static_cast<double>(total) : 0.0;
    std::ostringstream vars;
    for (size_t i = 0; i < fit.modal_vars.size(); ++i) {
      if (i) vars << ' ';
      vars << fit.modal_vars[i];
    }
    std::ostringstream os;
    os << row.method << ',' << row.n << ',' << row.radii.m_lambda << ',' << row.radii.m_k << ','
       << row.radii.lambda << ',' << row.radii.k << ',' << row.radii.c << ','
       << format_double(fit.runtime_sec) << ',' << format_double(fit.mae_value) << ','
       << format_double(fit.mae_se) << ',' << format_double(fit.l2_value) << ','
       << format_double(fit.l2_sd) << ',' << fit.modal_leaves << ',' << vars.str() << ','
       << format_double(share);
    lines.push_back(os.str());
  }
  write_lines(path, lines);
}

void write_posterior_ndjson(const std::string& path, const TreeFitResult& fit, bool include_g_hat) {
  std::vector<std::string> lines;
  lines.reserve(fit.draws.size());
  for (const auto& d : fit.draws) {
    std::ostringstream os;
    os << "{\"chain\":" << d.chain << ",\"iter\":" << d.iter
       << ",\"log_post\":" << format_double(d.log_post) << ",\"leaves\":" << d.leaves
       << ",\"tree\":" << d.tree_json;
    if (include_g_hat) {
      os << ",\"g_hat\":[";
      for (size_t i = 0; i < d.g_hat.size(); ++i) {
        if (i) os << ',';
        os << d.g_hat[i];
      }
      os << ']';
    }
    os << '}';
    lines.push_back(os.str());
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
}

void write_tent_pmf_csv(const std::string& path, const std::vector<TentSeries>& series, long lo,
                        long hi) {
  std::vector<std::string> lines{kTentCsvHeader};
  for (const auto& s : series) {
    TentParams params{s.lambda, s.k_eff, s.t};
    for (long yv = lo; yv <= hi; ++yv) {
      double lp = tent_log_pmf(yv, params);
      std::ostringstream os;
      os << s.name << ',' << yv << ',' << format_double(lp == kNegInf ? 0.0 : std::exp(lp));
      lines.push_back(os.str());
    }
  }
  write_lines(path, lines);
}

void write_svg_series(
    const std::string& path,
    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
    const std::string& x_label, const std::string& y_label, bool log_x) {
  const double width = 720, height = 480, margin = 60;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 0.0, y_hi = -1e300;
  for (const auto& [name, pts] : series) {
    (void)name;
    for (auto [x, y] : pts) {
      double xv = log_x ? std::log10(x) : x;
      x_lo = std::min(x_lo, xv);
      x_hi = std::max(x_hi, xv);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  auto px = [&](double x) {
    double xv = log_x ? std::log10(x) : x;
    return margin + (xv - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  auto py = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

  static const char* colors[] = {"#c2352b", "#2b58c2", "#2ba02b", "#7a2bc2", "#c2852b", "#2bb5c2"};
  std::vector<std::string> lines;
  std::ostringstream head;
  head << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">";
  lines.push_back(head.str());
  lines.push_back("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
  {
    std::ostringstream axes;
    axes << "<path d=\"M " << margin << ' ' << margin << " L " << margin << ' ' << height - margin
         << " L " << width - margin << ' ' << height - margin
         << "\" fill=\"none\" stroke=\"black\"/>";
    lines.push_back(axes.str());
    std::ostringstream labels;
    labels << "<text x=\"" << width / 2 << "\" y=\"" << height - 14
           << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label << "</text>"
           << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\""
           << " transform=\"rotate(-90 16 " << height / 2 << ")\">" << y_label << "</text>";
    lines.push_back(labels.str());
  }
  int ci = 0;
  for (const auto& [name, pts] : series) {
    std::ostringstream poly;
    poly << "<polyline fill=\"none\" stroke=\"" << colors[ci % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : pts) poly << px(x) << ',' << py(y) << ' ';
    poly << "\"/>";
    lines.push_back(poly.str());
    std::ostringstream legend;
    legend << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 18 + 18 * ci
           << "\" font-size=\"13\" fill=\"" << colors[ci % 6] << "\">" << name << "</text>";
    lines.push_back(legend.str());
    ++ci;
  }
  lines.push_back("</svg>");
  write_lines(path, lines);
}

std::vector<long> read_response_column(const std::string& path, int column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<long> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string cell;
    std::istringstream ls(line);
    for (int c = 0; c <= column; ++c) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("missing column in " + path);
    }
    out.push_back(std::stol(cell));
  }
  if (out.empty()) throw std::runtime_error("no data rows in " + path);
  return out;
}

}  // namespace taxicab
