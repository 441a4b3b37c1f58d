#include "isac/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "isac/text.hpp"

namespace isac {

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{
      "seed",
      "axis_name",
      "axis_value",
      "method",
      "mean_sum_rate",
      "mean_crlb_theta",
      "sqrt_crlb_theta",
      "mean_crlb_dist",
      "sqrt_crlb_dist",
      "violation_rate_theta",
      "violation_rate_dist",
      "mean_power_w",
      "train_seconds"};
  return cols;
}

void write_results_csv(std::span<const ResultRow> rows,
                       const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << "# isac-results 1\n";
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const ResultRow& r : rows) {
    out << r.seed << "," << r.axis_name << "," << fmt(r.axis_value) << ","
        << r.method << "," << fmt(r.mean_sum_rate) << ","
        << fmt(r.mean_crlb_theta) << "," << fmt(r.sqrt_crlb_theta) << ","
        << fmt(r.mean_crlb_dist) << "," << fmt(r.sqrt_crlb_dist) << ","
        << fmt(r.violation_rate_theta) << "," << fmt(r.violation_rate_dist)
        << "," << fmt(r.mean_power_w) << "," << fmt(r.train_seconds) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# isac-results 1")
    throw std::runtime_error(file.string() +
                             ": missing results schema header");
  const auto& cols = result_columns();
  std::string expected_header;
  for (std::size_t i = 0; i < cols.size(); ++i)
    expected_header += (i ? "," : "") + cols[i];
  if (!std::getline(in, line) || trim(line) != expected_header)
    throw std::runtime_error(file.string() + ": column header mismatch");

  std::vector<ResultRow> rows;
  int ln = 2;
  while (std::getline(in, line)) {
    ++ln;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (pos <= sv.size()) {
      std::size_t end = sv.find(',', pos);
      if (end == std::string_view::npos) end = sv.size();
      f.emplace_back(trim(sv.substr(pos, end - pos)));
      pos = end + 1;
    }
    if (f.size() != cols.size())
      throw std::runtime_error(file.string() + ":" + std::to_string(ln) +
                               ": expected " + std::to_string(cols.size()) +
                               " fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.seed = static_cast<std::uint64_t>(parse_int(f[0]));
    r.axis_name = f[1];
    r.axis_value = parse_double(f[2]);
    r.method = f[3];
    r.mean_sum_rate = parse_double(f[4]);
    r.mean_crlb_theta = parse_double(f[5]);
    r.sqrt_crlb_theta = parse_double(f[6]);
    r.mean_crlb_dist = parse_double(f[7]);
    r.sqrt_crlb_dist = parse_double(f[8]);
    r.violation_rate_theta = parse_double(f[9]);
    r.violation_rate_dist = parse_double(f[10]);
    r.mean_power_w = parse_double(f[11]);
    r.train_seconds = parse_double(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void validate_results(std::span<const ResultRow> rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    auto fail = [&](const std::string& why) {
      return std::runtime_error("result row " + std::to_string(i) + ": " +
                                why);
    };
    if (r.method != "upper_bound" && r.method != "hcl" &&
        r.method != "naive" && r.method != "random")
      throw fail("unknown method '" + r.method + "'");
    auto check_sqrt = [&](double mean, double root, const char* what) {
      double expect = std::sqrt(mean);
      double tol = 1e-12 * std::max(1.0, std::abs(expect));
      if (!(std::abs(root - expect) <= tol))
        throw fail(std::string(what) +
                   " is not the square root of its mean column");
    };
    check_sqrt(r.mean_crlb_theta, r.sqrt_crlb_theta, "sqrt_crlb_theta");
    check_sqrt(r.mean_crlb_dist, r.sqrt_crlb_dist, "sqrt_crlb_dist");
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(r.violation_rate_theta) || !in01(r.violation_rate_dist))
      throw fail("violation rate outside [0, 1]");
    if (r.axis_name.empty()) throw fail("empty axis name");
  }
}

}  // namespace isac
