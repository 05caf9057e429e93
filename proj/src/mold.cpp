// Copyright 2026 the drape-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drape/mold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace drape {

MoldSurface MoldSurface::plane(double base_height, double shear_rad) {
  MoldSurface m;
  m.kind_ = MoldKind::AnalyticShearedPlane;
  m.z0_ = base_height;
  m.shear_ = shear_rad;
  return m;
}

MoldSurface MoldSurface::heightfield(std::vector<double> xs,
                                     std::vector<double> ys,
                                     std::vector<double> zs) {
  if (xs.size() < 2 || ys.size() < 2 || zs.size() != xs.size() * ys.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "heightfield: need nx >= 2, ny >= 2, nx*ny samples");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1]))
      throw Error(ErrorCode::InvalidArgument,
                  "heightfield: x axis not strictly increasing");
  }
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (!(ys[i] > ys[i - 1]))
      throw Error(ErrorCode::InvalidArgument,
                  "heightfield: y axis not strictly increasing");
  }
  MoldSurface m;
  m.kind_ = MoldKind::Heightfield;
  m.xs_ = std::move(xs);
  m.ys_ = std::move(ys);
  m.zs_ = std::move(zs);
  return m;
}

MoldSurface MoldSurface::heightfield_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open heightfield: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::ConfigError, "heightfield csv is empty: " + path);
  // Tolerate whitespace/CR around the header.
  std::string header = line;
  header.erase(std::remove_if(header.begin(), header.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               header.end());
  if (header != "x,y,z")
    throw Error(ErrorCode::ConfigError,
                "heightfield csv must start with header 'x,y,z': " + path);

  std::vector<double> x, y, z;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    double v[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, field, ','))
        throw Error(ErrorCode::ConfigError,
                    path + ":" + std::to_string(lineno) + ": expected x,y,z");
      v[k] = std::stod(field);
    }
    x.push_back(v[0]);
    y.push_back(v[1]);
    z.push_back(v[2]);
  }

  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const std::size_t nx = xs.size(), ny = ys.size();
  if (nx * ny != z.size())
    throw Error(ErrorCode::ConfigError,
                "heightfield csv is not a full rectilinear grid: " + path);
  // Expect y-major, x-fastest ordering; validate coordinates as we go.
  std::vector<double> zs(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = iy * nx + ix;
      if (x[k] != xs[ix] || y[k] != ys[iy])
        throw Error(ErrorCode::ConfigError,
                    "heightfield csv rows must be y-major, x-fastest: " + path);
      zs[k] = z[k];
    }
  }
  return heightfield(std::move(xs), std::move(ys), std::move(zs));
}

std::size_t MoldSurface::cell_index(const std::vector<double>& axis, double v,
                                    const char* name) const {
  if (v < axis.front() || v > axis.back()) {
    throw Error(ErrorCode::OutOfDomain,
                std::string("mold query outside ") + name + " range");
  }
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  if (hi == 0) hi = 1;
  if (hi == axis.size()) hi = axis.size() - 1;
  return hi - 1;
}

double MoldSurface::height(double x, double y) const {
  if (kind_ == MoldKind::AnalyticShearedPlane) return z0_;
  const std::size_t ix = cell_index(xs_, x, "x");
  const std::size_t iy = cell_index(ys_, y, "y");
  const std::size_t nx = xs_.size();
  const double tx = (x - xs_[ix]) / (xs_[ix + 1] - xs_[ix]);
  const double ty = (y - ys_[iy]) / (ys_[iy + 1] - ys_[iy]);
  const double z00 = zs_[iy * nx + ix];
  const double z10 = zs_[iy * nx + ix + 1];
  const double z01 = zs_[(iy + 1) * nx + ix];
  const double z11 = zs_[(iy + 1) * nx + ix + 1];
  return (1.0 - ty) * ((1.0 - tx) * z00 + tx * z10) +
         ty * ((1.0 - tx) * z01 + tx * z11);
}

double MoldSurface::vertical_clearance(const Vec3& p) const {
  return p.z - height(p.x, p.y);
}

double MoldSurface::slope_along(double x, double y, double ux,
                                double uy) const {
  if (kind_ == MoldKind::AnalyticShearedPlane) return 0.0;
  const std::size_t ix = cell_index(xs_, x, "x");
  const std::size_t iy = cell_index(ys_, y, "y");
  const std::size_t nx = xs_.size();
  const double hx = xs_[ix + 1] - xs_[ix];
  const double hy = ys_[iy + 1] - ys_[iy];
  const double tx = (x - xs_[ix]) / hx;
  const double ty = (y - ys_[iy]) / hy;
  const double z00 = zs_[iy * nx + ix];
  const double z10 = zs_[iy * nx + ix + 1];
  const double z01 = zs_[(iy + 1) * nx + ix];
  const double z11 = zs_[(iy + 1) * nx + ix + 1];
  const double dzdx =
      ((1.0 - ty) * (z10 - z00) + ty * (z11 - z01)) / hx;
  const double dzdy =
      ((1.0 - tx) * (z01 - z00) + tx * (z11 - z10)) / hy;
  return dzdx * ux + dzdy * uy;
}

std::vector<Vec3> target_points(const MoldSurface& mold, int rows, int cols,
                                double cell_length) {
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::InvalidArgument, "target_points: grid dims >= 1x1");
  if (!(cell_length > 0.0))
    throw Error(ErrorCode::InvalidArgument, "target_points: cell_length > 0");
  const double g = mold.shear_angle();
  // Lattice directions: columns along x, rows tilted by the shear angle.
  const double e1x = cell_length, e1y = 0.0;
  const double e2x = cell_length * std::sin(g), e2y = cell_length * std::cos(g);
  const double cx = 0.5 * (cols - 1), cy = 0.5 * (rows - 1);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = (c - cx) * e1x + (r - cy) * e2x;
      const double y = (c - cx) * e1y + (r - cy) * e2y;
      pts.push_back({x, y, mold.height(x, y)});  // throws OutOfDomain
    }
  }
  return pts;
}

}  // namespace drape
