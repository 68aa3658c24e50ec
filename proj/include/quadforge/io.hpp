#pragma once

#include <string>
#include <vector>

#include "quadforge/field.hpp"
#include "quadforge/minimize.hpp"

namespace quadforge {

// Field CSV: header "x,y,value", row-major (y outer, x inner), 17 significant
// digits.
void write_field_csv(const std::string& path, const ScalarField& field);
ScalarField read_field_csv(const std::string& path, const Grid& grid);

// Boundary CSV: header "mx,my,len,nx,ny".
void write_boundary_csv(const std::string& path, const BoundaryCurve& curve);

// Energy log CSV: header "sweep,energy,positive_nodes".
void write_energy_log_csv(const std::string& path,
                          const std::vector<EnergyLogRow>& log);

}  // namespace quadforge
