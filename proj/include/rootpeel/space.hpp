#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rootpeel/error.hpp"
#include "rootpeel/rng.hpp"

namespace rootpeel {

/// A finite metric space together with a (co)density function f.
///
/// Lower f means denser. Points are either coordinate vectors in R^d with the
/// Euclidean metric, or the metric is an explicit symmetric matrix. Once a
/// density is attached the space carries its canonical total order: ascending
/// f, ties broken by point index. The object is immutable after construction.
class AugmentedMetricSpace {
 public:
  static AugmentedMetricSpace from_coordinates(std::vector<double> coords,
                                               std::size_t dim) {
    if (dim == 0) throw PreconditionError("coordinate dimension must be at least 1");
    if (coords.empty()) throw PreconditionError("a space needs at least one point");
    if (coords.size() % dim != 0)
      throw PreconditionError("coordinate count is not a multiple of the dimension");
    AugmentedMetricSpace s;
    s.n_ = coords.size() / dim;
    s.dim_ = dim;
    s.coords_ = std::move(coords);
    s.reset_order();
    return s;
  }

  static AugmentedMetricSpace from_points(const std::vector<std::vector<double>>& pts) {
    if (pts.empty()) throw PreconditionError("a space needs at least one point");
    const std::size_t dim = pts.front().size();
    std::vector<double> flat;
    flat.reserve(pts.size() * dim);
    for (const auto& p : pts) {
      if (p.size() != dim) throw PreconditionError("points have different dimensions");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return from_coordinates(std::move(flat), dim);
  }

  // Row-major n x n matrix; must be symmetric with a zero diagonal and
  // nonnegative entries. The triangle inequality is not required.
  static AugmentedMetricSpace from_matrix(std::vector<double> matrix, std::size_t n) {
    if (n == 0) throw PreconditionError("a space needs at least one point");
    if (matrix.size() != n * n) throw PreconditionError("distance matrix is not square");
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix[i * n + i] != 0.0)
        throw PreconditionError("distance matrix has a nonzero diagonal entry");
      for (std::size_t j = 0; j < n; ++j) {
        const double v = matrix[i * n + j];
        if (!(v >= 0.0) || !std::isfinite(v))
          throw PreconditionError("distance matrix entries must be finite and nonnegative");
        if (v != matrix[j * n + i]) throw PreconditionError("distance matrix is not symmetric");
      }
    }
    AugmentedMetricSpace s;
    s.n_ = n;
    s.matrix_ = std::move(matrix);
    s.reset_order();
    return s;
  }

  std::size_t size() const noexcept { return n_; }
  // 0 for matrix-backed spaces.
  std::size_t dimension() const noexcept { return dim_; }
  bool has_coordinates() const noexcept { return dim_ > 0; }

  std::span<const double> point(std::size_t i) const {
    check_index(i);
    if (!has_coordinates()) throw QueryError("space has no coordinates");
    return {coords_.data() + i * dim_, dim_};
  }

  double distance(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    return distance_unchecked(i, j);
  }

  double distance_unchecked(std::size_t i, std::size_t j) const noexcept {
    if (!has_coordinates()) return matrix_[i * n_ + j];
    if (i == j) return 0.0;
    // Summation order is fixed (by coordinate) and symmetric in i, j.
    const double* a = coords_.data() + i * dim_;
    const double* b = coords_.data() + j * dim_;
    double acc = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double diff = a[k] - b[k];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }

  bool has_density() const noexcept { return !density_.empty(); }

  std::span<const double> density() const noexcept { return density_; }

  double density(std::size_t i) const {
    check_index(i);
    if (!has_density()) throw PreconditionError("density has not been attached");
    return density_[i];
  }

  AugmentedMetricSpace with_density(std::vector<double> values) const {
    if (values.size() != n_)
      throw PreconditionError("density needs one value per point");
    for (double v : values)
      if (!std::isfinite(v)) throw PreconditionError("density values must be finite");
    AugmentedMetricSpace s = *this;
    s.density_ = std::move(values);
    s.reset_order();
    return s;
  }

  // Canonical order: point indices sorted by (f, index). Identity while no
  // density is attached.
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  // Position of point i in the canonical order.
  std::size_t rank(std::size_t i) const {
    check_index(i);
    return rank_[i];
  }

  std::span<const std::size_t> ranks() const noexcept { return rank_; }

  // x precedes y in the canonical total order.
  bool precedes(std::size_t x, std::size_t y) const { return rank(x) < rank(y); }

 private:
  AugmentedMetricSpace() = default;

  void check_index(std::size_t i) const {
    if (i >= n_)
      throw QueryError("point index " + std::to_string(i) + " out of range (n = " +
                       std::to_string(n_) + ")");
  }

  void reset_order() {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!density_.empty()) {
      std::stable_sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
        return density_[a] < density_[b];
      });
    }
    rank_.resize(n_);
    for (std::size_t r = 0; r < n_; ++r) rank_[order_[r]] = r;
  }

  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> matrix_;
  std::vector<double> density_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
};

inline double distance(const AugmentedMetricSpace& space, std::size_t i, std::size_t j) {
  return space.distance(i, j);
}

inline std::vector<std::size_t> canonical_order(const AugmentedMetricSpace& space) {
  if (!space.has_density()) throw PreconditionError("density has not been attached");
  return space.order();
}

// ---------------------------------------------------------------------------
// Density attachment

struct KdeDensity {
  // Common bandwidth for every coordinate; Scott's rule when unset.
  std::optional<double> bandwidth;
};

struct RandomDensity {
  std::uint64_t seed = 0;
};

struct ExplicitDensity {
  std::vector<double> values;
};

using DensityMode = std::variant<KdeDensity, RandomDensity, ExplicitDensity>;

// Per-coordinate Scott bandwidths n^(-1/(d+4)) * stddev_k. A coordinate with
// zero spread gets bandwidth 1 so the kernel stays well defined.
inline std::vector<double> scott_bandwidths(const AugmentedMetricSpace& space) {
  const std::size_t n = space.size();
  const std::size_t d = space.dimension();
  const double factor = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d + 4));
  std::vector<double> h(d, 1.0);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += space.point(i)[k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = space.point(i)[k] - mean;
      var += t * t;
    }
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) h[k] = factor * sd;
  }
  return h;
}

// Negated Gaussian product-kernel density estimate at every sample point.
inline std::vector<double> kde_codensity(const AugmentedMetricSpace& space,
                                         std::optional<double> bandwidth) {
  if (!space.has_coordinates())
    throw PreconditionError("kde density needs coordinates, not a distance matrix");
  const std::size_t n = space.size();
  const std::size_t d = space.dimension();
  std::vector<double> h;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw PreconditionError("kde bandwidth must be positive");
    h.assign(d, *bandwidth);
  } else {
    h = scott_bandwidths(space);
  }
  double norm = static_cast<double>(n);
  for (double hk : h) norm *= hk * std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = space.point(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = space.point(j);
      double expo = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double z = (xi[k] - xj[k]) / h[k];
        expo += z * z;
      }
      sum += std::exp(-0.5 * expo);
    }
    f[i] = -sum / norm;
  }
  return f;
}

inline AugmentedMetricSpace attach_density(const AugmentedMetricSpace& space,
                                           const DensityMode& mode) {
  return std::visit(
      [&](const auto& m) -> AugmentedMetricSpace {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KdeDensity>) {
          return space.with_density(kde_codensity(space, m.bandwidth));
        } else if constexpr (std::is_same_v<M, RandomDensity>) {
          Rng rng(m.seed);
          std::vector<double> f(space.size());
          for (auto& v : f) v = rng.uniform();
          return space.with_density(std::move(f));
        } else {
          return space.with_density(m.values);
        }
      },
      mode);
}

// ---------------------------------------------------------------------------
// Text ingestion

struct LoadOptions {
  // Column name (matched against a header row) or 0-based column index.
  std::optional<std::string> density_column;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string row_error(std::size_t line, const std::string& what) {
  return "row " + std::to_string(line) + ": " + what;
}

}  // namespace detail

/// Reads a point table or a distance matrix.
///
/// Point tables: one point per row, fields separated by ',' or ';' (detected
/// from the first row), an optional header row, and an optional density column
/// chosen by name or index (a header column named "density" or "f" is picked
/// up by default). Matrix input starts with the line "#matrix n"
/// followed by n rows of n entries; rows with n + 1 entries carry the density
/// in the last field. Errors name the 1-based line number of the bad row.
inline AugmentedMetricSpace load_points(std::istream& in, const LoadOptions& options = {}) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (detail::trim(raw).empty()) continue;
    lines.emplace_back(lineno, std::move(raw));
  }
  if (lines.empty()) throw ParseError("empty input");

  const std::string_view first = detail::trim(lines.front().second);
  const char delim = first.find(';') != std::string_view::npos ? ';' : ',';

  if (first.rfind("#matrix", 0) == 0) {
    const auto count = detail::parse_index(detail::trim(first.substr(7)));
    if (!count || *count == 0)
      throw ParseError(detail::row_error(lines.front().first, "bad matrix header"));
    const std::size_t n = *count;
    if (lines.size() != n + 1)
      throw ParseError("matrix header announces " + std::to_string(n) + " rows, found " +
                       std::to_string(lines.size() - 1));
    const char mdelim =
        lines[1].second.find(';') != std::string::npos ? ';' : ',';
    std::vector<double> matrix;
    std::vector<double> density;
    std::optional<std::size_t> width;
    for (std::size_t r = 1; r <= n; ++r) {
      const auto fields = detail::split_fields(lines[r].second, mdelim);
      if (fields.size() != n && fields.size() != n + 1)
        throw ParseError(detail::row_error(lines[r].first, "expected " + std::to_string(n) +
                                                              " entries"));
      if (width && *width != fields.size())
        throw ParseError(detail::row_error(lines[r].first, "ragged row"));
      width = fields.size();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const auto v = detail::parse_double(fields[c]);
        if (!v) throw ParseError(detail::row_error(lines[r].first, "non-numeric field"));
        (c < n ? matrix : density).push_back(*v);
      }
    }
    AugmentedMetricSpace space = [&] {
      try {
        return AugmentedMetricSpace::from_matrix(std::move(matrix), n);
      } catch (const PreconditionError& e) {
        throw ParseError(e.what());
      }
    }();
    return density.empty() ? space : space.with_density(std::move(density));
  }

  std::size_t begin = 0;
  std::vector<std::string_view> header;
  {
    const auto fields = detail::split_fields(lines.front().second, delim);
    const bool numeric = std::all_of(fields.begin(), fields.end(), [](std::string_view f) {
      return detail::parse_double(f).has_value();
    });
    if (!numeric) {
      header = fields;
      begin = 1;
    }
  }
  if (begin == lines.size()) throw ParseError("empty input");

  const std::size_t width = detail::split_fields(lines[begin].second, delim).size();
  if (!header.empty() && header.size() != width)
    throw ParseError(detail::row_error(lines[begin].first, "ragged row"));

  std::optional<std::size_t> dcol;
  if (!options.density_column) {
    // A header column literally named "density" or "f" is taken as the density.
    for (std::string_view name : {std::string_view("density"), std::string_view("f")}) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) {
        dcol = static_cast<std::size_t>(it - header.begin());
        break;
      }
    }
  } else {
    const std::string& key = *options.density_column;
    const auto it = std::find(header.begin(), header.end(), std::string_view(key));
    if (it != header.end()) {
      dcol = static_cast<std::size_t>(it - header.begin());
    } else if (const auto idx = detail::parse_index(key); idx && *idx < width) {
      dcol = *idx;
    } else {
      throw ParseError("density column '" + key + "' not found");
    }
  }
  if (width - (dcol ? 1 : 0) == 0) throw ParseError("rows have no coordinate fields");

  std::vector<double> coords;
  std::vector<double> density;
  for (std::size_t r = begin; r < lines.size(); ++r) {
    const auto fields = detail::split_fields(lines[r].second, delim);
    if (fields.size() != width) throw ParseError(detail::row_error(lines[r].first, "ragged row"));
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) throw ParseError(detail::row_error(lines[r].first, "non-numeric field"));
      (dcol && c == *dcol ? density : coords).push_back(*v);
    }
  }
  auto space = AugmentedMetricSpace::from_coordinates(std::move(coords), width - (dcol ? 1 : 0));
  return dcol ? space.with_density(std::move(density)) : space;
}

}  // namespace rootpeel
