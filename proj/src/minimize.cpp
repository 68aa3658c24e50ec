#include "quadforge/minimize.hpp"

#include <algorithm>
#include <utility>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "quadforge/scattering.hpp"

namespace quadforge {

namespace {

double sup_abs_unmasked(const ScalarField& f) {
  double s = 0.0;
  const Grid& g = f.grid();
  for (int j = 0; j < g.m; ++j)
    for (int i = 0; i < g.m; ++i)
      if (!f.masked(i, j)) s = std::max(s, std::fabs(f.at(i, j)));
  return s;
}

double sup_pos_unmasked(const ScalarField& f) {
  double s = 0.0;
  const Grid& g = f.grid();
  for (int j = 0; j < g.m; ++j)
    for (int i = 0; i < g.m; ++i)
      if (!f.masked(i, j)) s = std::max(s, f.at(i, j));
  return s;
}

// Working state for the sweep kernel: padded value arrays (one zero ring) and
// per-row active windows. Masked nodes carry fh2 = -inf-like so the pointwise
// update writes 0 there without a branch.
struct GsWork {
  int m = 0;
  int P = 0;  // m + 2
  double h = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;  // 4 - lambda h^2
  double inv_alpha = 0.0;
  double tau = 0.0;
  std::vector<double> u;
  std::vector<double> fh2;  // h^2 f (big negative on masked nodes)
  std::vector<double> gh2;  // h^2 g^2
  std::vector<std::uint8_t> open;

  // per-row index ranges (grid coordinates, inclusive; lo > hi means empty)
  std::vector<int> mask_lo, mask_hi;  // unmasked span
  std::vector<int> fpos_lo, fpos_hi;  // f > 0 span (always kept active)
  std::vector<int> win_lo, win_hi;    // current sweep window
  bool windows_enabled = false;
  double negf_min = 0.0;  // min of -f over unmasked nodes with f <= 0

  std::size_t pidx(int i, int j) const {
    return static_cast<std::size_t>(j + 1) * P + (i + 1);
  }
};

constexpr double kMaskedF = -1e300;

GsWork make_work(const EnergySpec& spec, const ScalarField& init) {
  const Grid& g = spec.f.grid();
  GsWork w;
  w.m = g.m;
  w.P = g.m + 2;
  w.h = g.h();
  w.lambda = spec.lambda;
  w.alpha = 4.0 - spec.lambda * w.h * w.h;
  w.inv_alpha = 1.0 / w.alpha;
  w.tau = spec.tau_pos();
  const std::size_t np = static_cast<std::size_t>(w.P) * w.P;
  w.u.assign(np, 0.0);
  w.fh2.assign(np, kMaskedF);
  w.gh2.assign(np, 0.0);
  w.open.assign(np, 0);
  w.mask_lo.assign(g.m, 1);
  w.mask_hi.assign(g.m, 0);
  w.fpos_lo.assign(g.m, 1);
  w.fpos_hi.assign(g.m, 0);
  const double h2 = w.h * w.h;
  w.negf_min = std::numeric_limits<double>::max();
  for (int j = 0; j < g.m; ++j) {
    for (int i = 0; i < g.m; ++i) {
      const std::size_t p = w.pidx(i, j);
      if (spec.f.masked(i, j)) continue;
      const double fv = spec.f.at(i, j);
      w.open[p] = 1;
      w.fh2[p] = h2 * fv;
      const double gv = spec.g.at(i, j);
      w.gh2[p] = h2 * gv * gv;
      w.u[p] = std::max(0.0, init.at(i, j));
      if (w.mask_lo[j] > w.mask_hi[j]) w.mask_lo[j] = i;
      w.mask_hi[j] = i;
      if (fv > 0.0) {
        if (w.fpos_lo[j] > w.fpos_hi[j]) w.fpos_lo[j] = i;
        w.fpos_hi[j] = i;
      } else {
        w.negf_min = std::min(w.negf_min, -fv);
      }
    }
  }
  // window shrinking is sound only if every non-source node has f strictly
  // negative (the positivity cascade then dies over a bounded number of cells)
  w.windows_enabled = w.negf_min > 0.0 &&
                      w.negf_min < std::numeric_limits<double>::max();
  w.win_lo = w.mask_lo;
  w.win_hi = w.mask_hi;
  return w;
}

// Exact minimizer of q(t) = alpha t^2 - 2 b2 t + gh2 * 1_{t > tau} over
// t >= 0, ties broken toward 0.
inline double node_update(double b2, double gh2, double inv_alpha, double tau) {
  const double th = b2 * inv_alpha;
  if (th <= 0.0) return 0.0;
  if (th <= tau || b2 * th > gh2) return th;
  return 0.0;
}

// Energy change of replacing `old` by `nu` at one node with its neighbors
// held fixed: q(nu) - q(old), q(t) = alpha t^2 - 2 b2 t + gh2 1_{t > tau}.
inline double node_delta(double old_v, double nu, double b2, double gh2,
                         double alpha, double tau) {
  double d = alpha * (nu * nu - old_v * old_v) - 2.0 * b2 * (nu - old_v);
  if (gh2 != 0.0) {
    d += gh2 * ((nu > tau ? 1.0 : 0.0) - (old_v > tau ? 1.0 : 0.0));
  }
  return d;
}

// Wavefront: kWave consecutive rows advance together with a one-column skew,
// so the update order and every read matches the plain lexicographic sweep
// exactly while the per-row dependency chains overlap. Inside the steady
// phase the west neighbor and the updated south neighbor travel in registers
// (slot r-1's previous output is exactly slot r's south value one step later).
constexpr int kWave = 4;

struct SweepStats {
  double delta = 0.0;   // exact energy change of the sweep
  long positive = 0;    // nodes above tau after the reverse pass
  bool changed = false; // any bitwise change (tracked sweeps only)
};

template <bool kHasG>
inline double update_value(double b2, double g2, double inv_alpha, double tau) {
  if constexpr (kHasG) {
    const double th = b2 * inv_alpha;
    if (th <= 0.0) return 0.0;
    return (th <= tau || b2 * th > g2) ? th : 0.0;
  } else {
    (void)g2;
    (void)tau;
    return std::max(b2 * inv_alpha, 0.0);
  }
}

// Energy change of replacing old_v by nu at one node with its neighbors held
// fixed: q(nu) - q(old), q(t) = alpha t^2 - 2 b2 t + g2 1_{t > tau}.
template <bool kHasG>
inline double update_delta(double old_v, double nu, double b2, double g2,
                           double alpha, double tau) {
  double d = alpha * (nu * nu - old_v * old_v) - 2.0 * b2 * (nu - old_v);
  if constexpr (kHasG) {
    d += g2 * ((nu > tau ? 1.0 : 0.0) - (old_v > tau ? 1.0 : 0.0));
  }
  return d;
}

struct RowSet {
  int lo[kWave];
  int hi[kWave];
  double* u[kWave];
  const double* f[kWave];
  const double* g[kWave];
};

template <bool kTrack, bool kHasG>
void pass_forward(GsWork& w, SweepStats& st) {
  const int P = w.P;
  const double inv_alpha = w.inv_alpha, alpha = w.alpha, tau = w.tau;
  double acc[kWave] = {};
  bool changed = false;
  for (int j0 = 0; j0 < w.m; j0 += kWave) {
    const int rows = std::min(kWave, w.m - j0);
    RowSet rs;
    int tmin = std::numeric_limits<int>::max();
    int tmax = std::numeric_limits<int>::min();
    int tfl = std::numeric_limits<int>::min();  // full-phase bounds
    int tfh = std::numeric_limits<int>::max();
    bool full_ok = rows == kWave;
    for (int r = 0; r < rows; ++r) {
      const int j = j0 + r;
      rs.lo[r] = w.win_lo[j];
      rs.hi[r] = w.win_hi[j];
      rs.u[r] = w.u.data() + w.pidx(0, j);
      rs.f[r] = w.fh2.data() + w.pidx(0, j);
      rs.g[r] = w.gh2.data() + w.pidx(0, j);
      if (rs.lo[r] > rs.hi[r]) {
        full_ok = false;
        continue;
      }
      tmin = std::min(tmin, rs.lo[r] + r);
      tmax = std::max(tmax, rs.hi[r] + r);
      tfl = std::max(tfl, rs.lo[r] + r);
      tfh = std::min(tfh, rs.hi[r] + r);
    }
    if (tmin > tmax) continue;
    full_ok = full_ok && tfl <= tfh;

    auto checked = [&](int ta, int tb) {
      for (int t = ta; t <= tb; ++t) {
        for (int r = 0; r < rows; ++r) {
          const int x = t - r;
          if (x < rs.lo[r] || x > rs.hi[r]) continue;
          double* uc = rs.u[r] + x;
          const double b2 = uc[-1] + uc[1] + uc[-P] + uc[P] + rs.f[r][x];
          const double g2 = kHasG ? rs.g[r][x] : 0.0;
          const double nu = update_value<kHasG>(b2, g2, inv_alpha, tau);
          const double old_v = *uc;
          acc[r] += update_delta<kHasG>(old_v, nu, b2, g2, alpha, tau);
          if constexpr (kTrack) {
            if (nu != old_v) changed = true;
          }
          *uc = nu;
        }
      }
    };

    if (!full_ok) {
      checked(tmin, tmax);
      continue;
    }
    checked(tmin, tfl - 1);
    // steady phase: all slots in range; west/south neighbors in registers
    double p[kWave];
    for (int r = 0; r < kWave; ++r) p[r] = rs.u[r][tfl - r - 1];
    auto slot = [&](auto rc, int t) {
      constexpr int r = rc();
      const int x = t - r;
      double* __restrict uc = rs.u[r] + x;
      const double south = r == 0 ? uc[-P] : p[r - 1];
      const double b2 = p[r] + uc[1] + south + uc[P] + rs.f[r][x];
      const double g2 = kHasG ? rs.g[r][x] : 0.0;
      const double nu = update_value<kHasG>(b2, g2, inv_alpha, tau);
      const double old_v = *uc;
      acc[r] += update_delta<kHasG>(old_v, nu, b2, g2, alpha, tau);
      if constexpr (kTrack) {
        if (nu != old_v) changed = true;
      }
      *uc = nu;
      p[r] = nu;
    };
    for (int t = tfl; t <= tfh; ++t) {
      // descending so each slot reads the south register before it advances
      slot(std::integral_constant<int, 3>{}, t);
      slot(std::integral_constant<int, 2>{}, t);
      slot(std::integral_constant<int, 1>{}, t);
      slot(std::integral_constant<int, 0>{}, t);
    }
    checked(tfh + 1, tmax);
  }
  for (int r = 0; r < kWave; ++r) st.delta += acc[r];
  if constexpr (kTrack) st.changed = st.changed || changed;
}

template <bool kTrack, bool kHasG>
void pass_reverse(GsWork& w, SweepStats& st, std::vector<int>& ext_lo,
                  std::vector<int>& ext_hi, double* umax_out) {
  const int P = w.P;
  const double inv_alpha = w.inv_alpha, alpha = w.alpha, tau = w.tau;
  double acc[kWave] = {};
  double umax[kWave] = {};
  bool changed = false;
  for (int j1 = w.m - 1; j1 >= 0; j1 -= kWave) {
    const int rows = std::min(kWave, j1 + 1);
    RowSet rs;
    int elo[kWave], ehi[kWave];
    long cnt[kWave];
    int tmin = std::numeric_limits<int>::max();
    int tmax = std::numeric_limits<int>::min();
    int tfl = std::numeric_limits<int>::min();
    int tfh = std::numeric_limits<int>::max();
    bool full_ok = rows == kWave;
    for (int r = 0; r < rows; ++r) {
      const int j = j1 - r;
      rs.lo[r] = w.win_lo[j];
      rs.hi[r] = w.win_hi[j];
      elo[r] = w.m;
      ehi[r] = -1;
      cnt[r] = 0;
      rs.u[r] = w.u.data() + w.pidx(0, j);
      rs.f[r] = w.fh2.data() + w.pidx(0, j);
      rs.g[r] = w.gh2.data() + w.pidx(0, j);
      if (rs.lo[r] > rs.hi[r]) {
        full_ok = false;
        continue;
      }
      tmin = std::min(tmin, rs.lo[r] - r);
      tmax = std::max(tmax, rs.hi[r] - r);
      tfl = std::max(tfl, rs.lo[r] - r);
      tfh = std::min(tfh, rs.hi[r] - r);
    }
    if (tmin > tmax) {
      for (int r = 0; r < rows; ++r) {
        const int j = j1 - r;
        ext_lo[j] = 1;
        ext_hi[j] = 0;
      }
      continue;
    }
    full_ok = full_ok && tfl <= tfh;

    auto track_pos = [&](int r, int x, double nu) {
      const bool pos = nu > 0.0;
      elo[r] = pos && x < elo[r] ? x : elo[r];
      ehi[r] = pos && x > ehi[r] ? x : ehi[r];
      umax[r] = std::max(umax[r], nu);
      cnt[r] += nu > tau ? 1 : 0;
    };
    auto checked = [&](int ta, int tb) {
      for (int t = ta; t >= tb; --t) {
        for (int r = 0; r < rows; ++r) {
          const int x = t + r;
          if (x < rs.lo[r] || x > rs.hi[r]) continue;
          double* uc = rs.u[r] + x;
          const double b2 = uc[-1] + uc[1] + uc[-P] + uc[P] + rs.f[r][x];
          const double g2 = kHasG ? rs.g[r][x] : 0.0;
          const double nu = update_value<kHasG>(b2, g2, inv_alpha, tau);
          const double old_v = *uc;
          acc[r] += update_delta<kHasG>(old_v, nu, b2, g2, alpha, tau);
          if constexpr (kTrack) {
            if (nu != old_v) changed = true;
          }
          *uc = nu;
          track_pos(r, x, nu);
        }
      }
    };

    if (!full_ok) {
      checked(tmax, tmin);
    } else {
      checked(tmax, tfh + 1);
      double p[kWave];
      for (int r = 0; r < kWave; ++r) p[r] = rs.u[r][tfh + r + 1];
      auto slot = [&](auto rc, int t) {
        constexpr int r = rc();
        const int x = t + r;
        double* __restrict uc = rs.u[r] + x;
        const double north = r == 0 ? uc[P] : p[r - 1];
        // same summation order as the checked path: W + E + S + N + f
        const double b2 = uc[-1] + p[r] + uc[-P] + north + rs.f[r][x];
        const double g2 = kHasG ? rs.g[r][x] : 0.0;
        const double nu = update_value<kHasG>(b2, g2, inv_alpha, tau);
        const double old_v = *uc;
        acc[r] += update_delta<kHasG>(old_v, nu, b2, g2, alpha, tau);
        if constexpr (kTrack) {
          if (nu != old_v) changed = true;
        }
        *uc = nu;
        p[r] = nu;
        track_pos(r, x, nu);
      };
      for (int t = tfh; t >= tfl; --t) {
        slot(std::integral_constant<int, 3>{}, t);
        slot(std::integral_constant<int, 2>{}, t);
        slot(std::integral_constant<int, 1>{}, t);
        slot(std::integral_constant<int, 0>{}, t);
      }
      checked(tfl - 1, tmin);
    }
    for (int r = 0; r < rows; ++r) {
      const int j = j1 - r;
      ext_lo[j] = elo[r] <= ehi[r] ? elo[r] : 1;
      ext_hi[j] = elo[r] <= ehi[r] ? ehi[r] : 0;
      st.positive += cnt[r];
    }
  }
  for (int r = 0; r < kWave; ++r) {
    st.delta += acc[r];
    *umax_out = std::max(*umax_out, umax[r]);
  }
  if constexpr (kTrack) st.changed = st.changed || changed;
}

template <bool kTrack, bool kHasG>
void pass_color(GsWork& w, int color, SweepStats& st, std::vector<int>& ext_lo,
                std::vector<int>& ext_hi, double* umax_out) {
  const int P = w.P;
  double acc = 0.0;
  double umax = 0.0;
  for (int j = 0; j < w.m; ++j) {
    if (w.win_lo[j] > w.win_hi[j]) {
      if (color == 1) {
        ext_lo[j] = 1;
        ext_hi[j] = 0;
      }
      continue;
    }
    if (color == 1) {
      ext_lo[j] = w.m;
      ext_hi[j] = -1;
    }
    int start = w.win_lo[j];
    if (((start + j) % 2) != color) ++start;
    for (int i = start; i <= w.win_hi[j]; i += 2) {
      const std::size_t idx = w.pidx(i, j);
      const double b2 =
          w.u[idx - 1] + w.u[idx + 1] + w.u[idx - P] + w.u[idx + P] + w.fh2[idx];
      const double g2 = kHasG ? w.gh2[idx] : 0.0;
      const double nu = update_value<kHasG>(b2, g2, w.inv_alpha, w.tau);
      const double old_v = w.u[idx];
      acc += update_delta<kHasG>(old_v, nu, b2, g2, w.alpha, w.tau);
      if constexpr (kTrack) {
        if (nu != old_v) st.changed = true;
      }
      w.u[idx] = nu;
    }
    if (color == 1) {
      std::size_t idx = w.pidx(w.win_lo[j], j);
      for (int i = w.win_lo[j]; i <= w.win_hi[j]; ++i, ++idx) {
        const double uv = w.u[idx];
        if (uv > 0.0) {
          ext_lo[j] = std::min(ext_lo[j], i);
          ext_hi[j] = std::max(ext_hi[j], i);
          umax = std::max(umax, uv);
          if (uv > w.tau) ++st.positive;
        }
      }
      if (ext_lo[j] > ext_hi[j]) {
        ext_lo[j] = 1;
        ext_hi[j] = 0;
      }
    }
  }
  st.delta += acc;
  *umax_out = std::max(*umax_out, umax);
}

template <bool kTrack>
SweepStats do_sweep(GsWork& w, MinimizeOptions::Order order, bool has_g,
                    std::vector<int>& ext_lo, std::vector<int>& ext_hi,
                    double* umax_out) {
  SweepStats st;
  *umax_out = 0.0;
  if (order == MinimizeOptions::Order::Sequential) {
    if (has_g) {
      pass_forward<kTrack, true>(w, st);
      pass_reverse<kTrack, true>(w, st, ext_lo, ext_hi, umax_out);
    } else {
      pass_forward<kTrack, false>(w, st);
      pass_reverse<kTrack, false>(w, st, ext_lo, ext_hi, umax_out);
    }
  } else {
    if (has_g) {
      pass_color<kTrack, true>(w, 0, st, ext_lo, ext_hi, umax_out);
      pass_color<kTrack, true>(w, 1, st, ext_lo, ext_hi, umax_out);
    } else {
      pass_color<kTrack, false>(w, 0, st, ext_lo, ext_hi, umax_out);
      pass_color<kTrack, false>(w, 1, st, ext_lo, ext_hi, umax_out);
    }
  }
  return st;
}

// Rebuild windows from the tracked positivity extents (plus the static f > 0
// cores), dilated in both axes by the cascade reach L: a positive value can
// propagate at most L cells in one sweep before the strictly negative forcing
// kills it (values shrink by at least 1/alpha per cell).
void refresh_windows(GsWork& w, const std::vector<int>& ext_lo_in,
                     const std::vector<int>& ext_hi_in, double umax) {
  if (!w.windows_enabled) return;
  const int m = w.m;
  static thread_local std::vector<int> ext_lo, ext_hi;
  ext_lo = ext_lo_in;
  ext_hi = ext_hi_in;
  for (int j = 0; j < m; ++j) {
    if (w.fpos_lo[j] > w.fpos_hi[j]) continue;
    if (ext_lo[j] > ext_hi[j]) {
      ext_lo[j] = w.fpos_lo[j];
      ext_hi[j] = w.fpos_hi[j];
    } else {
      ext_lo[j] = std::min(ext_lo[j], w.fpos_lo[j]);
      ext_hi[j] = std::max(ext_hi[j], w.fpos_hi[j]);
    }
  }
  int L = 3;
  const double floor_value = w.h * w.h * w.negf_min;
  if (umax > floor_value) {
    L += static_cast<int>(std::ceil(std::log(umax / floor_value) / std::log(w.alpha)));
  }
  for (int j = 0; j < m; ++j) {
    int lo = 1, hi = 0;
    for (int dj = -L; dj <= L; ++dj) {
      const int jj = j + dj;
      if (jj < 0 || jj >= m || ext_lo[jj] > ext_hi[jj]) continue;
      if (lo > hi) {
        lo = ext_lo[jj];
        hi = ext_hi[jj];
      } else {
        lo = std::min(lo, ext_lo[jj]);
        hi = std::max(hi, ext_hi[jj]);
      }
    }
    if (lo > hi) {
      w.win_lo[j] = 1;
      w.win_hi[j] = 0;
    } else {
      w.win_lo[j] = std::max(w.mask_lo[j], lo - L);
      w.win_hi[j] = std::min(w.mask_hi[j], hi + L);
    }
  }
}

// Neumaier-compensated energy and positive-node count, restricted to the
// current windows (all excluded nodes contribute exactly zero).
std::pair<double, long> energy_and_count(const GsWork& w) {
  double sum = 0.0, comp = 0.0;
  long positive = 0;
  const int P = w.P;
  const double lh2 = w.lambda * w.h * w.h;
  for (int j = 0; j < w.m; ++j) {
    // cover this row's window, the row above (for its gy terms), and one
    // node to the left of each (for gx terms)
    int lo = 1, hi = 0;
    auto widen = [&](int l, int h2_) {
      if (l > h2_) return;
      if (lo > hi) {
        lo = l;
        hi = h2_;
      } else {
        lo = std::min(lo, l);
        hi = std::max(hi, h2_);
      }
    };
    widen(w.win_lo[j], w.win_hi[j]);
    if (j + 1 < w.m) widen(w.win_lo[j + 1], w.win_hi[j + 1]);
    if (lo > hi) continue;
    lo = std::max(0, lo - 1);
    std::size_t idx = w.pidx(lo, j);
    for (int i = lo; i <= hi; ++i, ++idx) {
      const double uc = w.u[idx];
      const double gx = w.u[idx + 1] - uc;
      const double gy = w.u[idx + P] - uc;
      double term = gx * gx + gy * gy;
      if (uc != 0.0) {
        term -= lh2 * uc * uc + 2.0 * w.fh2[idx] * uc;
        if (uc > w.tau) {
          term += w.gh2[idx];
          ++positive;
        }
      }
      const double t = sum + term;
      if (std::fabs(sum) >= std::fabs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
    }
  }
  return {sum + comp, positive};
}

}  // namespace

double EnergySpec::tau_pos() const {
  return 1e-12 * f_sup() * f.grid().R * f.grid().R;
}

double EnergySpec::f_sup() const { return sup_abs_unmasked(f); }

double EnergySpec::fplus_sup() const { return sup_pos_unmasked(f); }

double grid_fundamental_tone(const Grid& grid) {
  static std::map<std::pair<int, double>, double> cache;
  static std::mutex mu;
  const std::pair<int, double> key{grid.m, grid.R};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double tone = discrete_fundamental_tone(grid);
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = tone;
  return tone;
}

EnergySpec make_energy_spec(ScalarField f, ScalarField g, double lambda) {
  if (!(f.grid() == g.grid())) {
    throw ValidationError("energy spec: f and g must share one grid");
  }
  f.validate("energy spec f");
  g.validate("energy spec g");
  const Grid& gr = f.grid();
  for (int j = 0; j < gr.m; ++j)
    for (int i = 0; i < gr.m; ++i)
      if (!g.masked(i, j) && g.at(i, j) < 0.0) {
        throw ValidationError("energy spec: g must be nonnegative nodewise");
      }
  if (!(lambda >= 0.0)) {
    throw ValidationError("energy spec: lambda must be nonnegative");
  }
  const double tone = grid_fundamental_tone(gr);
  if (!(lambda < 0.9 * tone)) {
    throw ValidationError("energy spec: lambda must stay below 0.9 * discrete tone = " +
                          std::to_string(0.9 * tone));
  }
  EnergySpec spec;
  spec.f = std::move(f);
  spec.g = std::move(g);
  spec.lambda = lambda;
  return spec;
}

double energy(const EnergySpec& spec, const ScalarField& u) {
  if (!(u.grid() == spec.f.grid())) {
    throw ValidationError("energy: field grid does not match the spec grid");
  }
  if (!u.admissible()) {
    throw ValidationError("energy: field must be admissible (u >= 0, zero on mask)");
  }
  GsWork w = make_work(spec, u);
  return energy_and_count(w).first;
}

ScalarField barrier_field(const Grid& grid, double lambda) {
  // CG for (-Laplacian_h - lambda) v = 1 on the unmasked ball nodes.
  ScalarField v = ScalarField::ball(grid);
  const auto& mask = v.mask();
  const int m = grid.m;
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
        out[idx] = s * inv_h2 - lambda * x[idx];
      }
    }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };

  std::vector<double> x(n, 0.0), r(n, 0.0), p(n), ap(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = mask[k] ? 0.0 : 1.0;
  p = r;
  double rs = dot(r, r);
  const double target = rs * 1e-24;
  for (int it = 0; it < 200000 && rs > target; ++it) {
    apply(p, ap);
    const double alpha = rs / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rs_new = dot(r, r);
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  v.values() = std::move(x);
  v.enforce_mask();
  return v;
}

namespace {

MinimizeResult run_gauss_seidel(const EnergySpec& spec, const ScalarField& init,
                                const MinimizeOptions& options) {
  GsWork w = make_work(spec, init);
  const Grid& grid = spec.f.grid();
  bool has_g = false;
  for (double gv : w.gh2) has_g = has_g || gv != 0.0;

  MinimizeResult res;
  res.tone = grid_fundamental_tone(grid);
  res.tau_pos = w.tau;

  auto [e0, p0] = energy_and_count(w);
  if (options.keep_log) res.log.push_back({0, e0, p0});
  if (options.on_sweep) options.on_sweep(0, e0, p0);

  std::vector<int> ext_lo(grid.m, 1), ext_hi(grid.m, 0);
  double umax = 0.0;

  // Per-sweep energies come from the exact per-update deltas (telescoping);
  // the absolute level is re-anchored with a full pass periodically.
  double e_running = e0;
  long sweep = 0;
  bool converged = false;
  const double rel_tol = options.stop_rel_tol;
  const int reanchor_every = 64;

  auto run_one = [&](bool track) -> SweepStats {
    SweepStats st = track ? do_sweep<true>(w, options.order, has_g, ext_lo, ext_hi, &umax)
                          : do_sweep<false>(w, options.order, has_g, ext_lo, ext_hi, &umax);
    refresh_windows(w, ext_lo, ext_hi, umax);
    e_running += st.delta;
    if (st.delta > 1e-12 * (1.0 + std::fabs(e_running))) {
      throw NumericalError("minimize: energy increased across a sweep");
    }
    return st;
  };

  // Relax until the per-sweep energy decrease criterion holds, the sweep
  // budget runs out, or (optionally) the energy drops below `accept_below`.
  auto relax = [&](long budget, double accept_below, bool* hit_accept) -> bool {
    while (sweep < budget) {
      ++sweep;
      SweepStats st = run_one(false);
      if (sweep % reanchor_every == 0) {
        e_running = energy_and_count(w).first;
      }
      if (options.keep_log) res.log.push_back({sweep, e_running, st.positive});
      if (options.on_sweep) options.on_sweep(sweep, e_running, st.positive);
      if (hit_accept && e_running < accept_below) {
        *hit_accept = true;
        return true;
      }
      if (-st.delta <= rel_tol * std::fabs(e_running)) return true;
    }
    return false;
  };

  converged = relax(options.max_sweeps, 0.0, nullptr);
  const long initial_sweeps = sweep;

  // Outer interface descent (boundary-density problems only).
  if (converged && has_g && options.interface_peel) {
    const long trial_budget = std::max<long>(2000, initial_sweeps / 4);
    for (int peel = 0; peel < 64 && converged; ++peel) {
      e_running = energy_and_count(w).first;
      const double e_best = e_running;
      const std::vector<double> u_saved = w.u;
      // remove the outermost positive layer
      long removed = 0;
      const int P = w.P;
      for (int j = 0; j < grid.m; ++j) {
        if (w.win_lo[j] > w.win_hi[j]) continue;
        for (int i = w.win_lo[j]; i <= w.win_hi[j]; ++i) {
          const std::size_t idx = w.pidx(i, j);
          if (w.u[idx] <= w.tau) continue;
          if (w.u[idx - 1] <= w.tau || w.u[idx + 1] <= w.tau ||
              w.u[idx - P] <= w.tau || w.u[idx + P] <= w.tau) {
            ++removed;
          }
        }
      }
      if (removed == 0) break;
      for (int j = 0; j < grid.m; ++j) {
        if (w.win_lo[j] > w.win_hi[j]) continue;
        for (int i = w.win_lo[j]; i <= w.win_hi[j]; ++i) {
          const std::size_t idx = w.pidx(i, j);
          if (u_saved[idx] <= w.tau) continue;
          if (u_saved[idx - 1] <= w.tau || u_saved[idx + 1] <= w.tau ||
              u_saved[idx - P] <= w.tau || u_saved[idx + P] <= w.tau) {
            w.u[idx] = 0.0;
          }
        }
      }
      e_running = energy_and_count(w).first;
      bool accepted = false;
      converged = relax(std::min(options.max_sweeps, sweep + trial_budget),
                        e_best, &accepted);
      if (!accepted) {
        e_running = energy_and_count(w).first;
        if (e_running >= e_best) {
          w.u = u_saved;
          e_running = e_best;
          // restore the windows around the restored state
          std::fill(ext_lo.begin(), ext_lo.end(), 1);
          std::fill(ext_hi.begin(), ext_hi.end(), 0);
          for (int j = 0; j < grid.m; ++j) {
            if (w.mask_lo[j] > w.mask_hi[j]) continue;
            for (int i = w.mask_lo[j]; i <= w.mask_hi[j]; ++i) {
              const std::size_t idx = w.pidx(i, j);
              if (w.u[idx] > 0.0) {
                if (ext_lo[j] > ext_hi[j]) ext_lo[j] = i;
                ext_hi[j] = i;
                umax = std::max(umax, w.u[idx]);
              }
            }
          }
          refresh_windows(w, ext_lo, ext_hi, umax);
          break;
        }
      }
    }
    // polish the accepted state to the stopping criterion
    if (converged) {
      converged = relax(options.max_sweeps, 0.0, nullptr);
    }
  }

  // One extra verification sweep: at the stopping tolerance the pointwise
  // update map should leave the iterate (essentially) unchanged; record
  // whether it is a strict fixed point.
  if (converged && sweep < options.max_sweeps) {
    ++sweep;
    SweepStats vst = run_one(true);
    e_running = energy_and_count(w).first;
    if (options.keep_log) res.log.push_back({sweep, e_running, vst.positive});
    if (options.on_sweep) options.on_sweep(sweep, e_running, vst.positive);
    res.fixed_point = !vst.changed;
  }

  // Assemble the result (also used by the no-converge error payload).
  res.u = spec.f;
  std::fill(res.u.values().begin(), res.u.values().end(), 0.0);
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (!res.u.masked(i, j)) res.u.at(i, j) = w.u[w.pidx(i, j)];
  res.energy = energy_and_count(w).first;
  res.sweeps = sweep;
  res.converged = converged;
  res.positivity_mask.assign(grid.size(), 0);
  long positives = 0;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (res.u.at(i, j) > w.tau) {
        res.positivity_mask[grid.index(i, j)] = 1;
        ++positives;
      }
  if (positives > 0) {
    res.boundary = extract_boundary(grid, res.positivity_mask);
  }

  if (!converged) {
    throw NoConvergeError(
        "no-converge: sweep cap reached before the per-sweep energy decrease "
        "fell below 1e-12 * |energy|",
        std::move(res));
  }
  return res;
}

}  // namespace

MinimizeResult minimize(const EnergySpec& spec, const MinimizeOptions& options) {
  const Grid& grid = spec.f.grid();
  ScalarField v = barrier_field(grid, spec.lambda);
  const double scale = spec.fplus_sup();
  ScalarField init = v;
  for (double& val : init.values()) val = std::max(0.0, scale * val);
  init.enforce_mask();
  return run_gauss_seidel(spec, init, options);
}

MinimizeResult minimize_from(const EnergySpec& spec, const ScalarField& init,
                             const MinimizeOptions& options) {
  if (!(init.grid() == spec.f.grid())) {
    throw ValidationError("minimize_from: init grid does not match the spec grid");
  }
  if (!init.admissible()) {
    throw ValidationError("minimize_from: init must be admissible");
  }
  return run_gauss_seidel(spec, init, options);
}

double el_residual(const EnergySpec& spec, const ScalarField& u) {
  const Grid& grid = spec.f.grid();
  const double tau = spec.tau_pos();
  const ScalarField dist = distance_to_zero_set(u, tau);
  const ScalarField lap = laplacian(u);
  const double cut = 3.0 * grid.h();
  double worst = 0.0;
  for (int j = 0; j < grid.m; ++j) {
    for (int i = 0; i < grid.m; ++i) {
      if (u.masked(i, j) || dist.at(i, j) <= cut) continue;
      const double r =
          std::fabs(lap.at(i, j) + spec.lambda * u.at(i, j) + spec.f.at(i, j));
      worst = std::max(worst, r);
    }
  }
  const double scale = std::max(spec.f_sup(), 1e-300);
  return worst / scale;
}

double el_residual(const EnergySpec& spec, const MinimizeResult& result) {
  return el_residual(spec, result.u);
}

double bernoulli_residual(const EnergySpec& spec, const MinimizeResult& result) {
  if (result.boundary.segments.empty()) {
    throw ValidationError("bernoulli_residual: the positivity set has empty boundary");
  }
  std::vector<double> g_mid;
  g_mid.reserve(result.boundary.segments.size());
  for (const auto& seg : result.boundary.segments) {
    g_mid.push_back(spec.g.sample(seg.mid[0], seg.mid[1]));
  }
  return jump_relation_check(result.u, result.boundary, g_mid);
}

ComparePair compare_energies(const EnergySpec& spec1, const EnergySpec& spec2,
                             const ScalarField& u1, const ScalarField& u2) {
  const Grid& grid = spec1.f.grid();
  if (!(grid == spec2.f.grid()) || !(grid == u1.grid()) || !(grid == u2.grid())) {
    throw ValidationError("compare_energies: all inputs must share one grid");
  }
  if (!(spec1.lambda <= spec2.lambda)) {
    throw ValidationError("compare_energies: requires lambda1 <= lambda2");
  }
  for (int j = 0; j < grid.m; ++j) {
    for (int i = 0; i < grid.m; ++i) {
      if (spec1.f.masked(i, j)) continue;
      if (spec1.f.at(i, j) > spec2.f.at(i, j)) {
        throw ValidationError("compare_energies: requires f1 <= f2 nodewise");
      }
      if (spec1.g.at(i, j) < spec2.g.at(i, j)) {
        throw ValidationError("compare_energies: requires g1 >= g2 nodewise");
      }
    }
  }
  if (!u1.admissible() || !u2.admissible()) {
    throw ValidationError("compare_energies: u1 and u2 must be admissible");
  }
  ScalarField vmin = u1, vmax = u1;
  for (std::size_t k = 0; k < vmin.values().size(); ++k) {
    vmin.values()[k] = std::min(u1.values()[k], u2.values()[k]);
    vmax.values()[k] = std::max(u1.values()[k], u2.values()[k]);
  }
  ComparePair out;
  out.j1_min = energy(spec1, vmin);
  out.j2_max = energy(spec2, vmax);
  out.j1_u1 = energy(spec1, u1);
  out.j2_u2 = energy(spec2, u2);
  return out;
}

std::vector<LambdaSweepPoint> lambda_sweep(const EnergySpec& base,
                                           const std::vector<double>& lambdas,
                                           const MinimizeOptions& options,
                                           std::vector<MinimizeResult>* results) {
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > lambdas[k - 1])) {
      throw ValidationError("lambda_sweep: lambdas must be strictly increasing");
    }
  }
  const Grid& grid = base.f.grid();
  std::vector<LambdaSweepPoint> points;
  ScalarField prev;
  bool have_prev = false;
  for (double lam : lambdas) {
    EnergySpec spec = make_energy_spec(base.f, base.g, lam);
    ScalarField v = barrier_field(grid, lam);
    const double scale = spec.fplus_sup();
    ScalarField init = v;
    for (double& val : init.values()) val = std::max(0.0, scale * val);
    if (have_prev) {
      for (std::size_t k = 0; k < init.values().size(); ++k) {
        init.values()[k] = std::max(init.values()[k], prev.values()[k]);
      }
    }
    init.enforce_mask();
    MinimizeResult res = run_gauss_seidel(spec, init, options);
    double l2 = 0.0;
    for (double u : res.u.values()) l2 += u * u;
    l2 = std::sqrt(l2 * grid.h() * grid.h());
    points.push_back({lam, l2, res.energy, res.sweeps});
    prev = res.u;
    have_prev = true;
    if (results) results->push_back(std::move(res));
  }
  return points;
}

std::vector<double> positivity_density(const MinimizeResult& result) {
  const Grid& grid = result.u.grid();
  const double h = grid.h();
  const double rad = 8.0 * h;
  std::vector<double> fractions;
  fractions.reserve(result.boundary.segments.size());
  for (const auto& seg : result.boundary.segments) {
    const int ic = static_cast<int>(std::round((seg.mid[0] + grid.box_radius()) / h));
    const int jc = static_cast<int>(std::round((seg.mid[1] + grid.box_radius()) / h));
    long total = 0, positive = 0;
    for (int dj = -8; dj <= 8; ++dj) {
      for (int di = -8; di <= 8; ++di) {
        const int i = ic + di, j = jc + dj;
        if (i < 0 || i >= grid.m || j < 0 || j >= grid.m) continue;
        const double dx = grid.coord(i) - seg.mid[0];
        const double dy = grid.coord(j) - seg.mid[1];
        if (dx * dx + dy * dy > rad * rad) continue;
        ++total;
        if (result.positivity_mask[grid.index(i, j)]) ++positive;
      }
    }
    fractions.push_back(total > 0 ? static_cast<double>(positive) / total : 0.0);
  }
  return fractions;
}

}  // namespace quadforge
