#include "quadforge/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace quadforge {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Grid::Grid(int m_, double R_) : m(m_), R(R_) {
  if (m < 33 || m % 2 == 0) {
    throw ValidationError("Grid: m must be odd and >= 33, got " + std::to_string(m));
  }
  if (!(R > 0.0)) throw ValidationError("Grid: R must be positive");
}

ScalarField ScalarField::box(const Grid& grid, double fill) {
  ScalarField f;
  f.grid_ = grid;
  f.values_.assign(grid.size(), fill);
  f.mask_.assign(grid.size(), 0);
  return f;
}

ScalarField ScalarField::ball(const Grid& grid, double fill) {
  ScalarField f;
  f.grid_ = grid;
  f.values_.assign(grid.size(), 0.0);
  f.mask_.assign(grid.size(), 0);
  const double R2 = grid.R * grid.R;
  for (int j = 0; j < grid.m; ++j) {
    const double y = grid.coord(j);
    for (int i = 0; i < grid.m; ++i) {
      const double x = grid.coord(i);
      const std::size_t idx = grid.index(i, j);
      if (x * x + y * y >= R2) {
        f.mask_[idx] = 1;
      } else {
        f.values_[idx] = fill;
      }
    }
  }
  return f;
}

void ScalarField::enforce_mask() {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (mask_[k]) values_[k] = 0.0;
  }
}

void ScalarField::validate(const char* what) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw ValidationError(std::string(what) + ": non-finite nodal value");
    }
    if (mask_[k] && values_[k] != 0.0) {
      throw ValidationError(std::string(what) + ": nonzero value on a masked node");
    }
  }
}

bool ScalarField::admissible() const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < 0.0) return false;
    if (mask_[k] && values_[k] != 0.0) return false;
  }
  return true;
}

double ScalarField::sample(double x, double y) const {
  const double h = grid_.h();
  const double rb = grid_.box_radius();
  double fx = (x + rb) / h;
  double fy = (y + rb) / h;
  fx = std::clamp(fx, 0.0, static_cast<double>(grid_.m - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(grid_.m - 1));
  int i = std::min(static_cast<int>(fx), grid_.m - 2);
  int j = std::min(static_cast<int>(fy), grid_.m - 2);
  const double tx = fx - i;
  const double ty = fy - j;
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
         (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

ScalarField laplacian(const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField out = u;  // keep the input mask; masked output nodes stay 0
  std::fill(out.values().begin(), out.values().end(), 0.0);
  const int m = g.m;
  const double inv_h2 = 1.0 / (g.h() * g.h());
  auto val = [&](int i, int j) -> double {
    if (i < 0 || i >= m || j < 0 || j >= m) return 0.0;
    return u.at(i, j);
  };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (u.masked(i, j)) continue;
      out.at(i, j) = (val(i + 1, j) + val(i - 1, j) + val(i, j + 1) + val(i, j - 1) -
                      4.0 * u.at(i, j)) *
                     inv_h2;
    }
  }
  return out;
}

double integrate(const ScalarField& u) {
  const Grid& g = u.grid();
  const double w = g.h() * g.h();
  double sum = 0.0, comp = 0.0;
  for (int j = 0; j < g.m; ++j) {
    for (int i = 0; i < g.m; ++i) {
      if (u.masked(i, j)) continue;
      const double term = u.at(i, j) * w;
      const double t = sum + term;  // Neumaier compensation
      if (std::fabs(sum) >= std::fabs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
    }
  }
  return sum + comp;
}

double BoundaryCurve::total_length() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.len;
  return s;
}

double BoundaryCurve::loop_turning(int loop_index) const {
  const auto& loop = loops.at(loop_index);
  double turning = 0.0;
  const int n = static_cast<int>(loop.size());
  for (int k = 0; k < n; ++k) {
    const auto& s0 = segments[loop[k]];
    const auto& s1 = segments[loop[(k + 1) % n]];
    const double ax = s0.p1[0] - s0.p0[0], ay = s0.p1[1] - s0.p0[1];
    const double bx = s1.p1[0] - s1.p0[0], by = s1.p1[1] - s1.p0[1];
    turning += std::atan2(ax * by - ay * bx, ax * bx + ay * by);
  }
  return turning;
}

namespace {

// Marching squares on the padded, box-smoothed indicator.
struct CrossPoint {
  double x, y;
  long edge_key;  // unique id of the grid edge carrying the crossing
};

struct RawSegment {
  CrossPoint a, b;
};

}  // namespace

BoundaryCurve extract_boundary(const Grid& grid, const std::vector<std::uint8_t>& mask) {
  const int m = grid.m;
  if (static_cast<std::size_t>(m) * m != mask.size()) {
    throw ValidationError("extract_boundary: mask size does not match the grid");
  }
  bool any = false;
  for (std::uint8_t v : mask) {
    if (v) { any = true; break; }
  }
  if (!any) throw ValidationError("empty-domain: mask has no true node");

  // Smoothed indicator on the padded node range [-1, m] (index shift +1):
  // two 3x3 box passes; the second pass tames the angular wobble of the
  // staircase normals without moving the symmetric-kernel 0.5-level.
  const int P = m + 2;
  std::vector<double> S(static_cast<std::size_t>(P) * P, 0.0);
  std::vector<double> S1(static_cast<std::size_t>(P) * P, 0.0);
  auto ind = [&](int i, int j) -> double {
    if (i < 0 || i >= m || j < 0 || j >= m) return 0.0;
    return mask[grid.index(i, j)] ? 1.0 : 0.0;
  };
  for (int pj = 0; pj < P; ++pj) {
    for (int pi = 0; pi < P; ++pi) {
      const int i = pi - 1, j = pj - 1;
      double s = 0.0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) s += ind(i + di, j + dj);
      S1[static_cast<std::size_t>(pj) * P + pi] = s / 9.0;
    }
  }
  auto s1 = [&](int pi, int pj) -> double {
    if (pi < 0 || pi >= P || pj < 0 || pj >= P) return 0.0;
    return S1[static_cast<std::size_t>(pj) * P + pi];
  };
  for (int pj = 0; pj < P; ++pj) {
    for (int pi = 0; pi < P; ++pi) {
      double s = 0.0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) s += s1(pi + di, pj + dj);
      S[static_cast<std::size_t>(pj) * P + pi] = s / 9.0;
    }
  }
  auto sval = [&](int pi, int pj) { return S[static_cast<std::size_t>(pj) * P + pi]; };
  const double h = grid.h();
  auto px = [&](int pi) { return grid.coord(pi - 1); };  // padded node -> physical

  // Bilinear interpolation of the smoothed indicator at a physical point.
  auto sinterp = [&](double x, double y) -> double {
    double fx = (x - px(0)) / h;
    double fy = (y - px(0)) / h;
    fx = std::clamp(fx, 0.0, static_cast<double>(P - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(P - 1));
    int i = std::min(static_cast<int>(fx), P - 2);
    int j = std::min(static_cast<int>(fy), P - 2);
    const double tx = fx - i, ty = fy - j;
    return (1 - tx) * (1 - ty) * sval(i, j) + tx * (1 - ty) * sval(i + 1, j) +
           (1 - tx) * ty * sval(i, j + 1) + tx * ty * sval(i + 1, j + 1);
  };

  std::vector<RawSegment> raw;
  // Edge keys: horizontal edge (pi,pj)-(pi+1,pj): 2*(pj*P+pi); vertical +1.
  auto hkey = [&](int pi, int pj) { return 2L * (static_cast<long>(pj) * P + pi); };
  auto vkey = [&](int pi, int pj) { return 2L * (static_cast<long>(pj) * P + pi) + 1L; };

  for (int pj = 0; pj + 1 < P; ++pj) {
    for (int pi = 0; pi + 1 < P; ++pi) {
      const double s00 = sval(pi, pj), s10 = sval(pi + 1, pj);
      const double s01 = sval(pi, pj + 1), s11 = sval(pi + 1, pj + 1);
      const int code = (s00 > 0.5 ? 1 : 0) | (s10 > 0.5 ? 2 : 0) |
                       (s11 > 0.5 ? 4 : 0) | (s01 > 0.5 ? 8 : 0);
      if (code == 0 || code == 15) continue;

      auto cross = [&](int edge) -> CrossPoint {
        switch (edge) {
          case 0: {  // bottom: (pi,pj)-(pi+1,pj)
            const double t = (0.5 - s00) / (s10 - s00);
            return {px(pi) + t * h, px(pj), hkey(pi, pj)};
          }
          case 1: {  // right: (pi+1,pj)-(pi+1,pj+1)
            const double t = (0.5 - s10) / (s11 - s10);
            return {px(pi + 1), px(pj) + t * h, vkey(pi + 1, pj)};
          }
          case 2: {  // top: (pi,pj+1)-(pi+1,pj+1)
            const double t = (0.5 - s01) / (s11 - s01);
            return {px(pi) + t * h, px(pj + 1), hkey(pi, pj + 1)};
          }
          default: {  // left: (pi,pj)-(pi,pj+1)
            const double t = (0.5 - s00) / (s01 - s00);
            return {px(pi), px(pj) + t * h, vkey(pi, pj)};
          }
        }
      };
      auto emit = [&](int e1, int e2) { raw.push_back({cross(e1), cross(e2)}); };

      switch (code) {
        case 1: case 14: emit(3, 0); break;
        case 2: case 13: emit(0, 1); break;
        case 4: case 11: emit(1, 2); break;
        case 8: case 7:  emit(2, 3); break;
        case 3: case 12: emit(3, 1); break;
        case 6: case 9:  emit(0, 2); break;
        case 5:   // saddle, positive corners 00 and 11: cut off 10 and 01
          emit(0, 1);
          emit(2, 3);
          break;
        case 10:  // saddle, positive corners 10 and 01: cut off 00 and 11
          emit(3, 0);
          emit(1, 2);
          break;
        default: break;
      }
    }
  }

  BoundaryCurve curve;
  curve.segments.resize(raw.size());
  // Edge key -> incident (segment, endpoint) pairs for loop chaining.
  std::map<long, std::vector<std::pair<int, int>>> incident;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    incident[raw[s].a.edge_key].push_back({static_cast<int>(s), 0});
    incident[raw[s].b.edge_key].push_back({static_cast<int>(s), 1});
  }

  std::vector<char> visited(raw.size(), 0);
  bool all_closed = true;
  for (std::size_t s0 = 0; s0 < raw.size(); ++s0) {
    if (visited[s0]) continue;
    std::vector<int> loop;
    int seg = static_cast<int>(s0);
    int entry = 0;  // walk from endpoint `entry` to the other one
    bool closed_loop = false;
    while (true) {
      visited[seg] = 1;
      loop.push_back(seg);
      const CrossPoint& from = entry == 0 ? raw[seg].a : raw[seg].b;
      const CrossPoint& to = entry == 0 ? raw[seg].b : raw[seg].a;
      BoundarySegment& out = curve.segments[seg];
      out.p0 = {from.x, from.y};
      out.p1 = {to.x, to.y};
      out.mid = {0.5 * (from.x + to.x), 0.5 * (from.y + to.y)};
      out.len = std::hypot(to.x - from.x, to.y - from.y);

      // next segment shares the exit edge
      const auto& inc = incident[to.edge_key];
      int nseg = -1, nend = -1;
      for (const auto& [cand, end] : inc) {
        if (cand == seg) continue;
        nseg = cand;
        nend = end;
      }
      if (nseg < 0) break;  // dangling (should not happen)
      if (visited[nseg]) {
        closed_loop = (nseg == static_cast<int>(s0));
        break;
      }
      seg = nseg;
      entry = nend;
    }
    all_closed = all_closed && closed_loop;
    curve.loops.push_back(std::move(loop));
  }
  curve.closed = all_closed;

  // Outward normals by sampling the smoothed indicator on both sides.
  const double eps = 0.3 * h;
  for (auto& seg : curve.segments) {
    double dx = seg.p1[0] - seg.p0[0], dy = seg.p1[1] - seg.p0[1];
    const double len = std::hypot(dx, dy);
    if (len <= 0.0) {
      seg.normal = {0.0, 0.0};
      continue;
    }
    dx /= len;
    dy /= len;
    double nx = dy, ny = -dx;
    const double plus = sinterp(seg.mid[0] + eps * nx, seg.mid[1] + eps * ny);
    const double minus = sinterp(seg.mid[0] - eps * nx, seg.mid[1] - eps * ny);
    if (plus > minus) {  // flip toward the false side
      nx = -nx;
      ny = -ny;
    }
    seg.normal = {nx, ny};
  }
  return curve;
}

namespace {

// 1-D squared-distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  static thread_local std::vector<int> v;
  static thread_local std::vector<double> z;
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = (q - p) * static_cast<double>(q - p) + f[p];
  }
}

}  // namespace

ScalarField distance_to_zero_set(const ScalarField& u, double threshold) {
  const Grid& g = u.grid();
  const int m = g.m;
  const double big = 4.0 * static_cast<double>(m) * m + 10.0;

  bool any_zero = false;
  std::vector<double> work(g.size());
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const bool zero = u.at(i, j) <= threshold;
      any_zero = any_zero || zero;
      work[g.index(i, j)] = zero ? 0.0 : big;
    }
  }
  if (!any_zero) {
    throw NumericalError("distance_to_zero_set: the zero set {u <= threshold} is empty");
  }

  std::vector<double> row(m), drow(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) row[i] = work[g.index(i, j)];
    dt_1d(row, drow, m);
    for (int i = 0; i < m; ++i) work[g.index(i, j)] = drow[i];
  }
  std::vector<double> col(m), dcol(m);
  ScalarField out = u;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) col[j] = work[g.index(i, j)];
    dt_1d(col, dcol, m);
    for (int j = 0; j < m; ++j) out.at(i, j) = g.h() * std::sqrt(dcol[j]);
  }
  out.enforce_mask();
  return out;
}

double discrete_fundamental_tone(const Grid& grid) {
  const int m = grid.m;
  const ScalarField shape = ScalarField::ball(grid);
  const auto& mask = shape.mask();
  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());

  auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const std::size_t idx = grid.index(i, j);
        if (mask[idx]) {
          out[idx] = 0.0;
          continue;
        }
        double s = 4.0 * x[idx];
        if (i > 0 && !mask[idx - 1]) s -= x[idx - 1];
        if (i + 1 < m && !mask[idx + 1]) s -= x[idx + 1];
        if (j > 0 && !mask[idx - m]) s -= x[idx - m];
        if (j + 1 < m && !mask[idx + m]) s -= x[idx + m];
        out[idx] = s * inv_h2;
      }
    }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };

  std::vector<double> b(n, 0.0), y(n, 0.0), r(n), p(n), ap(n);
  for (std::size_t k = 0; k < n; ++k) b[k] = mask[k] ? 0.0 : 1.0;
  double bn = std::sqrt(dot(b, b));
  for (std::size_t k = 0; k < n; ++k) b[k] /= bn;

  double lambda_prev = 0.0;
  const int max_outer = 500;
  for (int outer = 0; outer < max_outer; ++outer) {
    // CG solve A y = b, warm-started from the previous direction.
    apply(y, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
    p = r;
    double rs = dot(r, r);
    const double target = 1e-20 * dot(b, b);  // ~1e-10 relative residual
    for (int it = 0; it < 20000 && rs > target; ++it) {
      apply(p, ap);
      const double alpha = rs / dot(p, ap);
      for (std::size_t k = 0; k < n; ++k) {
        y[k] += alpha * p[k];
        r[k] -= alpha * ap[k];
      }
      const double rs_new = dot(r, r);
      const double beta = rs_new / rs;
      rs = rs_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
    }
    const double yy = dot(y, y);
    const double lambda = dot(y, b) / yy;
    if (outer > 0 && std::fabs(lambda - lambda_prev) <= 1e-8 * std::fabs(lambda)) {
      return lambda;
    }
    lambda_prev = lambda;
    const double yn = std::sqrt(yy);
    for (std::size_t k = 0; k < n; ++k) b[k] = y[k] / yn;
  }
  throw NumericalError("eig-no-converge: inverse power iteration stagnated");
}

}  // namespace quadforge
