#include "quadforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace quadforge {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field_csv(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_field_csv: cannot open " + path);
  out << "x,y,value\n";
  const Grid& g = field.grid();
  for (int j = 0; j < g.m; ++j) {
    for (int i = 0; i < g.m; ++i) {
      out << fmt17(g.coord(i)) << ',' << fmt17(g.coord(j)) << ','
          << fmt17(field.at(i, j)) << '\n';
    }
  }
}

ScalarField read_field_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError("read_field_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  ScalarField f = ScalarField::box(grid);
  for (int j = 0; j < grid.m; ++j) {
    for (int i = 0; i < grid.m; ++i) {
      if (!std::getline(in, line)) {
        throw ValidationError("read_field_csv: truncated file " + path);
      }
      std::istringstream ss(line);
      std::string sx, sy, sv;
      std::getline(ss, sx, ',');
      std::getline(ss, sy, ',');
      std::getline(ss, sv, ',');
      f.at(i, j) = std::stod(sv);
    }
  }
  return f;
}

void write_boundary_csv(const std::string& path, const BoundaryCurve& curve) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_boundary_csv: cannot open " + path);
  out << "mx,my,len,nx,ny\n";
  for (const auto& seg : curve.segments) {
    out << fmt17(seg.mid[0]) << ',' << fmt17(seg.mid[1]) << ',' << fmt17(seg.len)
        << ',' << fmt17(seg.normal[0]) << ',' << fmt17(seg.normal[1]) << '\n';
  }
}

void write_energy_log_csv(const std::string& path,
                          const std::vector<EnergyLogRow>& log) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_energy_log_csv: cannot open " + path);
  out << "sweep,energy,positive_nodes\n";
  for (const auto& row : log) {
    out << row.sweep << ',' << fmt17(row.energy) << ',' << row.positive_nodes << '\n';
  }
}

}  // namespace quadforge
