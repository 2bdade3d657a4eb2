#pragma once

#include <string>

#include "velavg/grid.hpp"

namespace velavg {

// Binary snapshot layout (all little-endian):
//   8 bytes  magic "VELAVG01"
//   int32    d, int32 N, float64 L
//   int32    M (0 for a scalar field), float64 lambda_lo, float64 lambda_hi
//   float64  values, row-major over (space index, lambda index)

void write_binary(const std::string& path, const RealField& u);
void write_binary(const std::string& path, const KineticField& h);

struct Snapshot {
  SpaceGrid grid;
  int lambda_nodes;
  double lambda_lo;
  double lambda_hi;
  Eigen::ArrayXd data;
};
Snapshot read_binary(const std::string& path);

/// CSV with columns x,value along `axis`, the other axis held at `fixed_index`.
void write_slice_csv(const std::string& path, const RealField& u, int axis = 0, int fixed_index = 0);

}  // namespace velavg
