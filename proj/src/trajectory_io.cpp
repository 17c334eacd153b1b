#include "erg/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <stdexcept>

namespace erg {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  if (traj.rows() == 0) return out;
  const auto n = traj.x.front().size();
  const auto m = traj.g.front().size();
  const auto nc = traj.margins.front().size();
  out.reserve(traj.rows() * 32 * static_cast<std::size_t>(n + 2 * m + nc + 7));

  out += "t";
  for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  for (Eigen::Index i = 0; i < m; ++i) out += ",g" + std::to_string(i);
  for (Eigen::Index i = 0; i < m; ++i) out += ",r" + std::to_string(i);
  out += ",V,gamma_min";
  for (Eigen::Index i = 0; i < nc; ++i) out += ",c" + std::to_string(i);
  out += ",nu,phi,sigma,limiter,gamma\n";

  const auto push = [&out](double v) {
    out += ',';
    out += format_double(v);
  };
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    out += format_double(traj.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) push(traj.x[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) push(traj.g[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) push(traj.r[k][i]);
    push(traj.v[k]);
    push(traj.gamma_min[k]);
    for (Eigen::Index i = 0; i < nc; ++i) push(traj.margins[k][i]);
    const GammaBreakdown& b = traj.breakdown[k];
    push(b.nu);
    push(b.phi);
    push(b.sigma);
    push(b.limiter);
    push(b.gamma);
    out += '\n';
  }
  return out;
}

std::string metrics_text(const Metrics& metrics) {
  std::string out;
  out += "settling_time=" + format_double(metrics.settling_time) + "\n";
  out += "min_margin=" + format_double(metrics.min_margin) + "\n";
  out += "max_v_excess=" + format_double(metrics.max_v_excess) + "\n";
  out += "max_gdot=" + format_double(metrics.max_gdot) + "\n";
  out += "per_step_cost=" + format_double(metrics.per_step_cost) + "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  std::random_device rd;
  const fs::path tmp = dir / (path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace erg
