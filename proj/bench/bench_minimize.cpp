#include <chrono>
#include <cstdio>
#include <cmath>
#include "quadforge/minimize.hpp"
#include "quadforge/radial.hpp"

using namespace quadforge;

int main(int argc, char** argv) {
  const int m = argc > 1 ? std::atoi(argv[1]) : 257;
  const double gval = argc > 2 ? std::atof(argv[2]) : 0.0;
  const Grid grid(m, 1.0);
  ScalarField f = ScalarField::ball(grid);
  ScalarField g = ScalarField::ball(grid);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (f.masked(i, j)) continue;
      const double r = std::hypot(grid.coord(i), grid.coord(j));
      f.at(i, j) = (r < 0.25 ? 10.0 : 0.0) - 1.0;
      g.at(i, j) = (gval > 0.0 && r > 0.25) ? gval : 0.0;
    }
  auto t0 = std::chrono::steady_clock::now();
  EnergySpec spec = make_energy_spec(f, g, 2.0);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("tone: %.6f (%.2fs)\n", grid_fundamental_tone(grid),
              std::chrono::duration<double>(t1 - t0).count());
  MinimizeOptions opt;
  opt.keep_log = false;
  opt.max_sweeps = 1000000;
  try {
    auto res = minimize(spec, opt);
    auto t2 = std::chrono::steady_clock::now();
    std::printf("m=%d sweeps=%ld energy=%.8f time=%.2fs\n", m, res.sweeps,
                res.energy, std::chrono::duration<double>(t2 - t1).count());
    // positivity radius
    double med = 0.0;
    std::vector<double> rr;
    for (auto& s : res.boundary.segments) rr.push_back(std::hypot(s.mid[0], s.mid[1]));
    std::sort(rr.begin(), rr.end());
    if (!rr.empty()) med = rr[rr.size()/2];
    const RadialParams p = make_radial_params(2, 2.0, 10.0, 1.0, 0.25, 1.0,
        gval > 0 ? std::function<double(double)>([gval](double r){return r>0.25?gval:0.0;}) : nullptr);
    const RadialSolution sol = radial_solve(p);
    std::printf("median radius=%.6f oracle rho=%.6f h=%.6f diff/h=%.2f\n", med,
                sol.rho, grid.h(), std::fabs(med - sol.rho)/grid.h());
  } catch (const NoConvergeError& e) {
    std::printf("NO-CONVERGE: %s\n", e.what());
  }
  return 0;
}
