// SPDX-License-Identifier: Apache-2.0

// CSV ingestion, sample covariance, log returns and the JSON run report.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "spca/component.hpp"

namespace spca {

/// m observations (rows) of n variables (columns). Names are empty when the
/// source had no header row.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> names;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

struct CovarianceInput {
  SymmetricMatrix sigma;
  std::vector<std::string> names;
};

enum class MatrixKind { covariance, data };

using LoadedMatrix = std::variant<CovarianceInput, DataMatrix>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) return std::nullopt;
  return v;
}

inline std::string location(size_t row, size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses comma-separated numbers with an optional header of variable names.
/// Rows and columns in error messages are 1-based file positions.
inline DataMatrix parse_csv(std::string_view text) {
  std::vector<std::pair<size_t, std::string_view>> lines;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (!detail::trim(line).empty()) lines.emplace_back(line_no, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "no data rows");

  DataMatrix out;
  size_t first_data = 0;
  {
    const auto fields = detail::split_fields(lines.front().second);
    bool numeric = true;
    for (auto f : fields) numeric = numeric && detail::parse_number(f).has_value();
    if (!numeric) {
      for (auto f : fields) out.names.emplace_back(f);
      first_data = 1;
    }
  }
  if (first_data >= lines.size()) throw Error(ErrorCode::ParseError, "header without data rows");

  const size_t ncols = detail::split_fields(lines[first_data].second).size();
  if (!out.names.empty() && out.names.size() != ncols) {
    throw Error(ErrorCode::RaggedRows, "header has " + std::to_string(out.names.size()) + " names but row " +
                                           std::to_string(lines[first_data].first) + " has " +
                                           std::to_string(ncols) + " fields");
  }
  out.values.resize(static_cast<Index>(lines.size() - first_data), static_cast<Index>(ncols));
  for (size_t r = first_data; r < lines.size(); ++r) {
    const auto [row_no, line] = lines[r];
    const auto fields = detail::split_fields(line);
    if (fields.size() != ncols) {
      throw Error(ErrorCode::RaggedRows, "row " + std::to_string(row_no) + " has " + std::to_string(fields.size()) +
                                             " fields, expected " + std::to_string(ncols));
    }
    for (size_t c = 0; c < ncols; ++c) {
      const auto v = detail::parse_number(fields[c]);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    "cannot read '" + std::string(fields[c]) + "' at " + detail::location(row_no, c + 1));
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::ParseError, "non-finite value at " + detail::location(row_no, c + 1));
      }
      out.values(static_cast<Index>(r - first_data), static_cast<Index>(c)) = *v;
    }
  }
  return out;
}

/// Square table to covariance; rejects asymmetry above 1e-6 relative to the
/// largest entry, then symmetrizes.
inline CovarianceInput to_covariance(DataMatrix table) {
  if (table.rows() != table.cols()) {
    throw Error(ErrorCode::BadShape, "covariance must be square, got " + std::to_string(table.rows()) + "x" +
                                         std::to_string(table.cols()));
  }
  const double scale = std::max(1.0, table.values.cwiseAbs().maxCoeff());
  const double asym = (table.values - table.values.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-6 * scale) {
    throw Error(ErrorCode::AsymmetricInput, "max |M - M^T| = " + std::to_string(asym));
  }
  return {SymmetricMatrix(table.values), std::move(table.names)};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DataMatrix load_data(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

inline CovarianceInput load_covariance(const std::filesystem::path& path) { return to_covariance(load_data(path)); }

inline LoadedMatrix load_matrix(const std::filesystem::path& path, MatrixKind kind) {
  if (kind == MatrixKind::covariance) return load_covariance(path);
  return load_data(path);
}

/// Column-centered covariance normalized by 1/(m-1).
inline SymmetricMatrix sample_covariance(const DataMatrix& d) {
  if (d.rows() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 observations");
  const Matrix centered = d.values.rowwise() - d.values.colwise().mean();
  return SymmetricMatrix((centered.transpose() * centered) / static_cast<double>(d.rows() - 1));
}

/// r(t, i) = log(p(t+1, i) / p(t, i)).
inline DataMatrix log_returns(const DataMatrix& prices) {
  if (prices.rows() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 price rows");
  for (Index t = 0; t < prices.rows(); ++t) {
    for (Index i = 0; i < prices.cols(); ++i) {
      if (!(prices.values(t, i) > 0.0) || !std::isfinite(prices.values(t, i))) {
        throw Error(ErrorCode::NonPositivePrice,
                    "price at " + detail::location(static_cast<size_t>(t) + 1, static_cast<size_t>(i) + 1));
      }
    }
  }
  const Index m = prices.rows() - 1;
  DataMatrix out;
  out.names = prices.names;
  out.values = (prices.values.bottomRows(m).array() / prices.values.topRows(m).array()).log().matrix();
  return out;
}

/// Writes to a sibling temporary file and renames it over the target.
inline void atomic_write(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
  }
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(std::numeric_limits<double>::max_digits10);
  ss << v;
  return ss.str();
}

/// Plain CSV table with a header line; cells are written verbatim.
inline std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto append = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append(header);
  for (const auto& r : rows) append(r);
  return out;
}

// ---------------------------------------------------------------------------
// Run report

struct ComponentReport {
  std::vector<long> support;  // 1-based
  std::vector<double> loadings;
  double variance = 0.0;
  double penalized_objective = 0.0;
  std::vector<std::string> support_names;

  bool operator==(const ComponentReport&) const = default;
};

struct RunReport {
  std::string method;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<ComponentReport> components;
  nlohmann::json bounds = nlohmann::json::object();
  double timing_ms = 0.0;

  bool operator==(const RunReport&) const = default;
};

inline ComponentReport make_component_report(const SparseComponent& c, const std::vector<std::string>& names = {}) {
  ComponentReport r;
  r.support = c.support.one_based();
  r.loadings.assign(c.z.data(), c.z.data() + c.z.size());
  r.variance = c.variance;
  r.penalized_objective = c.penalized_objective;
  for (Index i : c.support.indices()) {
    r.support_names.push_back(static_cast<size_t>(i) < names.size() ? names[static_cast<size_t>(i)]
                                                                   : "x" + std::to_string(i + 1));
  }
  return r;
}

inline void to_json(nlohmann::json& j, const ComponentReport& c) {
  j = nlohmann::json{{"support", c.support},
                     {"loadings", c.loadings},
                     {"variance", c.variance},
                     {"penalized_objective", c.penalized_objective},
                     {"support_names", c.support_names}};
}

inline void from_json(const nlohmann::json& j, ComponentReport& c) {
  j.at("support").get_to(c.support);
  j.at("loadings").get_to(c.loadings);
  j.at("variance").get_to(c.variance);
  j.at("penalized_objective").get_to(c.penalized_objective);
  c.support_names = j.value("support_names", std::vector<std::string>{});
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
  j = nlohmann::json{{"method", r.method},
                     {"params", r.params},
                     {"components", r.components},
                     {"bounds", r.bounds},
                     {"timing_ms", r.timing_ms}};
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
  j.at("method").get_to(r.method);
  r.params = j.value("params", nlohmann::json::object());
  if (j.contains("seed") && !j.at("seed").is_null()) {
    r.seed = j.at("seed").get<std::uint64_t>();
  } else {
    r.seed.reset();
  }
  j.at("components").get_to(r.components);
  r.bounds = j.value("bounds", nlohmann::json::object());
  j.at("timing_ms").get_to(r.timing_ms);
}

inline std::string serialize(const RunReport& r) { return nlohmann::json(r).dump(2) + "\n"; }

inline RunReport parse_report(std::string_view text) {
  try {
    return nlohmann::json::parse(text).get<RunReport>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

}  // namespace spca
