#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "parahom/cell.hpp"
#include "parahom/errors.hpp"
#include "parahom/util.hpp"

namespace parahom {

namespace {

void check_axis(const std::vector<double>& axis, const char* what) {
  if (axis.empty()) throw InvalidInput(std::string(what) + " must not be empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) throw InvalidInput(std::string(what) + " has non-finite values");
    if (i > 0 && !(axis[i] > axis[i - 1]))
      throw InvalidInput(std::string(what) + " must be strictly ascending");
  }
}

struct Bracket {
  std::size_t lo = 0;
  double frac = 0.0;
};

Bracket locate(const std::vector<double>& axis, double v, const char* what) {
  const double span = axis.back() - axis.front();
  const double tol = 1e-12 * std::max({1.0, std::abs(axis.front()), std::abs(axis.back()), span});
  if (v < axis.front() - tol || v > axis.back() + tol) {
    std::ostringstream os;
    os << what << " " << format_double(v) << " outside sampled range [" << format_double(axis.front())
       << ", " << format_double(axis.back()) << "]";
    throw ExtrapolationError(os.str());
  }
  if (axis.size() == 1) return {0, 0.0};
  v = std::clamp(v, axis.front(), axis.back());
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  if (hi >= axis.size()) hi = axis.size() - 1;
  const std::size_t lo = hi - 1;
  return {lo, (v - axis[lo]) / (axis[hi] - axis[lo])};
}

bool is_uniform(const std::vector<double>& axis) {
  if (axis.size() < 3) return true;
  const double h = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (std::abs(axis[i] - axis[i - 1] - h) > 1e-9 * std::abs(h)) return false;
  return true;
}

void decompose(std::size_t index, const std::vector<std::vector<double>>& axes,
               std::vector<std::size_t>& multi) {
  multi.resize(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    multi[a] = index % axes[a].size();
    index /= axes[a].size();
  }
}

std::size_t compose(const std::vector<std::size_t>& multi,
                    const std::vector<std::vector<double>>& axes) {
  std::size_t index = 0, stride = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    index += multi[a] * stride;
    stride *= axes[a].size();
  }
  return index;
}

}  // namespace

// ---------------------------------------------------------------------------
// LambdaGrid
// ---------------------------------------------------------------------------

LambdaGrid LambdaGrid::tensor(int m, int n, std::vector<std::vector<double>> axes) {
  if (m < 1 || n < 1) throw InvalidInput("lambda grid dimensions must be positive");
  if (static_cast<int>(axes.size()) != m * n)
    throw DimensionMismatch("a tensor lambda grid needs one axis per matrix entry");
  for (const auto& axis : axes) check_axis(axis, "lambda axis");
  LambdaGrid g;
  g.kind_ = Kind::tensor;
  g.m_ = m;
  g.n_ = n;
  g.axes_ = std::move(axes);
  return g;
}

LambdaGrid LambdaGrid::ray(Matrix direction, std::vector<double> scales) {
  if (direction.size() == 0 || !direction.allFinite() || direction.norm() == 0.0)
    throw InvalidInput("ray direction must be a nonzero finite matrix");
  check_axis(scales, "ray scales");
  LambdaGrid g;
  g.kind_ = Kind::ray;
  g.m_ = static_cast<int>(direction.rows());
  g.n_ = static_cast<int>(direction.cols());
  g.direction_ = std::move(direction);
  g.axes_ = {std::move(scales)};
  return g;
}

LambdaGrid LambdaGrid::scalar(std::vector<double> values) {
  return tensor(1, 1, {std::move(values)});
}

std::size_t LambdaGrid::size() const {
  std::size_t s = 1;
  for (const auto& axis : axes_) s *= axis.size();
  return s;
}

Matrix LambdaGrid::point(std::size_t index) const {
  if (index >= size()) throw InvalidInput("lambda grid index out of range");
  if (kind_ == Kind::ray) return axes_[0][index] * direction_;
  Matrix out(m_, n_);
  std::vector<std::size_t> multi;
  decompose(index, axes_, multi);
  for (int e = 0; e < m_ * n_; ++e) out(e / n_, e % n_) = axes_[e][multi[e]];
  return out;
}

std::vector<double> LambdaGrid::coordinates(const Matrix& lambda) const {
  if (lambda.rows() != m_ || lambda.cols() != n_)
    throw DimensionMismatch("lambda does not match the table dimensions");
  if (kind_ == Kind::tensor) {
    std::vector<double> c(m_ * n_);
    for (int e = 0; e < m_ * n_; ++e) c[e] = lambda(e / n_, e % n_);
    return c;
  }
  const double dd = direction_.squaredNorm();
  const double s = (lambda.array() * direction_.array()).sum() / dd;
  const double off = (lambda - s * direction_).norm();
  if (off > 1e-9 * std::max(1.0, lambda.norm()))
    throw ExtrapolationError("lambda is not on the tabulated ray");
  return {s};
}

std::string LambdaGrid::canonical() const {
  std::ostringstream os;
  os << (kind_ == Kind::tensor ? "tensor" : "ray") << ";m=" << m_ << ";n=" << n_;
  if (kind_ == Kind::ray) {
    os << ";dir=";
    for (int e = 0; e < m_ * n_; ++e) os << format_double(direction_(e / n_, e % n_)) << ",";
  }
  for (const auto& axis : axes_) {
    os << ";axis=";
    for (double v : axis) os << format_double(v) << ",";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// DensityTable
// ---------------------------------------------------------------------------

TableLookup DensityTable::interpolate(double t, const Matrix& lambda) const {
  if (!std::isfinite(t) || !lambda.allFinite()) throw InvalidInput("non-finite table query");
  const auto coords = lambda_grid.coordinates(lambda);
  const auto& axes = lambda_grid.axes();

  std::vector<Bracket> br(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) br[a] = locate(axes[a], coords[a], "lambda");
  Bracket bt{0, 0.0};
  if (t_grid.size() > 1) bt = locate(t_grid, t, "t");

  // Multilinear blend over the corners with positive weight.
  const std::size_t dims = axes.size() + 1;
  TableLookup out;
  std::vector<std::size_t> multi(axes.size());
  for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
    double w = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const bool up = (corner >> a) & 1;
      w *= up ? br[a].frac : 1.0 - br[a].frac;
      multi[a] = br[a].lo + (up ? 1 : 0);
    }
    const bool tup = (corner >> axes.size()) & 1;
    w *= tup ? bt.frac : 1.0 - bt.frac;
    if (w == 0.0) continue;
    const std::size_t ti = bt.lo + (tup ? 1 : 0);
    const auto& entry = at(ti, compose(multi, axes));
    out.value += w * entry.value;
    if (!entry.stationary) out.touches_nonstationary = true;
  }
  return out;
}

std::uint64_t table_content_hash(const IntegrandSpec& spec, const std::vector<double>& t_grid,
                                 const LambdaGrid& lambda_grid, const std::vector<int>& k_list,
                                 int nodes_per_period, const CellSolveOptions& options) {
  std::ostringstream os;
  os << spec.canonical() << "|t=";
  for (double t : t_grid) os << format_double(t) << ",";
  os << "|" << lambda_grid.canonical() << "|k=";
  for (int k : k_list) os << k << ",";
  os << "|N=" << nodes_per_period << "|" << options.canonical();
  return fnv1a64(os.str());
}

DensityTable tabulate_density(const IntegrandSpec& spec, const std::vector<double>& t_grid,
                              const LambdaGrid& lambda_grid, const std::vector<int>& k_list,
                              const CellGridFactory& grid_factory, int nodes_per_period,
                              const CellSolveOptions& options, unsigned threads) {
  spec.validate();
  options.validate();
  check_axis(t_grid, "t grid");
  if (lambda_grid.rows() != spec.m || lambda_grid.cols() != spec.n)
    throw DimensionMismatch("lambda grid does not match the integrand dimensions");

  DensityTable table;
  table.t_grid = t_grid;
  table.lambda_grid = lambda_grid;
  table.content_hash =
      table_content_hash(spec, t_grid, lambda_grid, k_list, nodes_per_period, options);
  const std::size_t L = lambda_grid.size();
  table.entries.resize(t_grid.size() * L);

  parallel_for(table.entries.size(), threads, [&](std::size_t index) {
    CellSolveOptions local = options;
    local.seed = derive_seed(options.seed, index);
    const auto h = homogenized_density(spec, t_grid[index / L], lambda_grid.point(index % L),
                                       k_list, grid_factory, local);
    table.entries[index] = DensityEntry{h.value, h.best_k, h.stationary, h.best().residual};
  });
  return table;
}

DensityTable sample_raw_density(const IntegrandSpec& spec, std::span<const double> y0,
                                const std::vector<double>& t_grid, const LambdaGrid& lambda_grid) {
  spec.validate();
  check_axis(t_grid, "t grid");
  DensityTable table;
  table.t_grid = t_grid;
  table.lambda_grid = lambda_grid;
  const std::size_t L = lambda_grid.size();
  table.entries.resize(t_grid.size() * L);
  for (std::size_t i = 0; i < table.entries.size(); ++i)
    table.entries[i] =
        DensityEntry{evaluate(spec, y0, t_grid[i / L], lambda_grid.point(i % L)), 1, true, 0.0};
  return table;
}

std::string density_csv_header(int m, int n) {
  std::string h = "t";
  for (int e = 0; e < m * n; ++e) h += ",lambda_" + std::to_string(e);
  return h + ",value,k,stationary_flag";
}

void write_density_csv(std::ostream& os, const DensityTable& table) {
  const auto& g = table.lambda_grid;
  const int m = g.rows(), n = g.cols();
  os << density_csv_header(m, n) << "\n";
  for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
    for (std::size_t li = 0; li < g.size(); ++li) {
      const Matrix lambda = g.point(li);
      const auto& e = table.at(ti, li);
      os << format_double(table.t_grid[ti]);
      for (int k = 0; k < m * n; ++k) os << "," << format_double(lambda(k / n, k % n));
      os << "," << format_double(e.value) << "," << e.k << "," << (e.stationary ? 1 : 0) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Binary cache
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'P', 'H', 'D', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void u(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u32(std::uint32_t v) { u(v, 4); }
  void u64(std::uint64_t v) { u(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  std::uint64_t u(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = is_.get();
      if (c == std::char_traits<char>::eof()) throw Error("truncated cache");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> vec() {
    const std::uint32_t n = u32();
    if (n > (1u << 26)) throw Error("implausible cache vector length");
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_density_cache(const std::string& path, const DensityTable& table) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open cache file " + path);
  Writer w(os);
  os.write(kMagic, 4);
  w.u32(kVersion);
  w.u64(table.content_hash);
  const auto& g = table.lambda_grid;
  w.u32(static_cast<std::uint32_t>(g.rows()));
  w.u32(static_cast<std::uint32_t>(g.cols()));
  w.u32(g.kind() == LambdaGrid::Kind::tensor ? 0 : 1);
  w.vec(table.t_grid);
  w.u32(static_cast<std::uint32_t>(g.axes().size()));
  for (const auto& axis : g.axes()) w.vec(axis);
  if (g.kind() == LambdaGrid::Kind::ray)
    for (int e = 0; e < g.rows() * g.cols(); ++e) w.f64(g.direction()(e / g.cols(), e % g.cols()));
  w.u64(table.entries.size());
  for (const auto& e : table.entries) {
    w.f64(e.value);
    w.u32(static_cast<std::uint32_t>(e.k));
    w.u(e.stationary ? 1 : 0, 1);
    w.f64(e.residual);
  }
  if (!os) throw Error("failed writing cache file " + path);
}

std::optional<DensityTable> load_density_cache(const std::string& path,
                                               std::uint64_t expected_hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  try {
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) return std::nullopt;
    Reader r(is);
    if (r.u32() != kVersion) return std::nullopt;
    DensityTable table;
    table.content_hash = r.u64();
    if (table.content_hash != expected_hash) return std::nullopt;
    const int m = static_cast<int>(r.u32());
    const int n = static_cast<int>(r.u32());
    const std::uint32_t kind = r.u32();
    table.t_grid = r.vec();
    const std::uint32_t axis_count = r.u32();
    if (axis_count > 64) return std::nullopt;
    std::vector<std::vector<double>> axes(axis_count);
    for (auto& axis : axes) axis = r.vec();
    if (kind == 0) {
      table.lambda_grid = LambdaGrid::tensor(m, n, std::move(axes));
    } else {
      if (axis_count != 1 || m < 1 || n < 1 || m * n > 64) return std::nullopt;
      Matrix dir(m, n);
      for (int e = 0; e < m * n; ++e) dir(e / n, e % n) = r.f64();
      table.lambda_grid = LambdaGrid::ray(std::move(dir), std::move(axes[0]));
    }
    const std::uint64_t count = r.u64();
    if (count != table.t_grid.size() * table.lambda_grid.size()) return std::nullopt;
    table.entries.resize(count);
    for (auto& e : table.entries) {
      e.value = r.f64();
      e.k = static_cast<int>(r.u32());
      e.stationary = r.u(1) != 0;
      e.residual = r.f64();
    }
    return table;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Convexity probe
// ---------------------------------------------------------------------------

ConvexityReport convexity_probe(const DensityTable& table, int segment_samples, double tol) {
  if (segment_samples < 1) throw InvalidInput("segment_samples must be positive");
  const auto& g = table.lambda_grid;
  const auto& axes = g.axes();
  const std::size_t L = g.size();
  const int n = g.cols();
  if (L < 2) throw InsufficientSamples("convexity probe needs at least two lambda samples");

  std::vector<char> uniform(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) uniform[a] = is_uniform(axes[a]);

  // For n > 2 the probe is restricted to rank-one-compatible single-column
  // segments; a ray qualifies only if its direction occupies one column.
  bool ray_allowed = true;
  if (g.kind() == LambdaGrid::Kind::ray && n > 2) {
    int columns = 0;
    for (int j = 0; j < n; ++j)
      if (g.direction().col(j).norm() > 0.0) ++columns;
    ray_allowed = columns <= 1;
  }

  ConvexityReport report;
  const int S = segment_samples;
  std::vector<std::size_t> ma, mb, mid(axes.size());
  std::vector<std::size_t> diff_axes;
  for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
    const double t = table.t_grid[ti];
    for (std::size_t ia = 0; ia < L; ++ia) {
      decompose(ia, axes, ma);
      for (std::size_t ib = ia + 1; ib < L; ++ib) {
        decompose(ib, axes, mb);
        diff_axes.clear();
        for (std::size_t a = 0; a < axes.size(); ++a)
          if (ma[a] != mb[a]) diff_axes.push_back(a);
        if (g.kind() == LambdaGrid::Kind::ray) {
          if (!ray_allowed) continue;
        } else if (n > 2) {
          bool one_column = true;
          for (std::size_t a : diff_axes)
            if (static_cast<int>(a) % n != static_cast<int>(diff_axes.front()) % n)
              one_column = false;
          if (!one_column) continue;
        }
        const double fa = table.at(ti, ia).value;
        const double fb = table.at(ti, ib).value;
        const Matrix la = g.point(ia), lb = g.point(ib);
        bool used = false;
        for (int q = 1; q <= S; ++q) {
          const double s = static_cast<double>(q) / (S + 1);
          // Exact table node when every changed axis lands on a sample;
          // otherwise interpolate, but only along a single axis, where the
          // piecewise-linear interpolant inherits convexity from the samples.
          bool on_node = true;
          for (std::size_t a : diff_axes) {
            const long long delta = static_cast<long long>(mb[a]) - static_cast<long long>(ma[a]);
            if (!uniform[a] || (delta * q) % (S + 1) != 0) on_node = false;
          }
          double value;
          if (on_node) {
            mid = ma;
            for (std::size_t a : diff_axes) {
              const long long delta =
                  static_cast<long long>(mb[a]) - static_cast<long long>(ma[a]);
              mid[a] = static_cast<std::size_t>(static_cast<long long>(ma[a]) + delta * q / (S + 1));
            }
            value = table.at(ti, compose(mid, axes)).value;
          } else if (diff_axes.size() == 1) {
            value = table.interpolate(t, (1.0 - s) * la + s * lb).value;
          } else {
            continue;
          }
          used = true;
          ++report.points;
          const double chord = (1.0 - s) * fa + s * fb;
          if (value > chord + tol)
            report.violations.push_back(ConvexityViolation{t, la, lb, s, value, chord, value - chord});
        }
        if (used) ++report.segments;
      }
    }
  }
  if (report.points == 0)
    throw InsufficientSamples("no collinear sample triples for the convexity probe");
  return report;
}

}  // namespace parahom
