#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace irl {

// One row of a standard Denavit-Hartenberg table:
// T = Rz(theta) * Tz(d) * Tx(a) * Rx(alpha), theta = q + theta_offset.
// Non-actuated links are held at q = 0.
struct DHLink {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
  double joint_min = 0.0;
  double joint_max = 0.0;
  bool actuated = true;
};

// Joint angles of the actuated links, in chain order (radians).
using JointConfig = std::vector<double>;

// End-effector position in task space; only the first dim() entries are used.
struct CartesianPoint {
  std::array<double, 3> coords{0.0, 0.0, 0.0};
  int dim = 3;

  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }
  std::span<const double> view() const { return {coords.data(), static_cast<std::size_t>(dim)}; }
  bool operator==(const CartesianPoint&) const = default;
};

double distance(const CartesianPoint& p, const CartesianPoint& q);

struct JointRange {
  double min;
  double max;
  double width() const { return max - min; }
};

class KinematicChain {
 public:
  // Validates the table. For task_space_dim == 2 the reachable set must lie
  // in an axis-aligned plane (checked by sampling); the constant base-frame
  // axis is dropped from returned points.
  KinematicChain(std::string name, std::vector<DHLink> links, int task_space_dim);

  const std::string& name() const { return name_; }
  const std::vector<DHLink>& links() const { return links_; }
  int task_space_dim() const { return task_space_dim_; }
  std::size_t dof() const { return actuated_.size(); }
  // Index into links() of the i-th actuated joint.
  std::size_t actuated_link(std::size_t joint) const { return actuated_[joint]; }
  std::span<const std::size_t> actuated_links() const { return actuated_; }
  JointRange joint_range(std::size_t joint) const;
  // Widest single actuated joint range.
  double max_joint_range() const;
  // Upper bound on the distance of any end-effector point from the base.
  double reach() const;
  // Task-space coordinate indices (into x, y, z) that are reported.
  std::span<const int> kept_axes() const { return {kept_axes_.data(), static_cast<std::size_t>(task_space_dim_)}; }

  bool within_limits(std::span<const double> q) const;
  JointConfig clamp(std::span<const double> q) const;

  nlohmann::json to_json() const;
  static KinematicChain from_json(const nlohmann::json& doc);
  static KinematicChain load(const std::filesystem::path& path);

 private:
  std::string name_;
  std::vector<DHLink> links_;
  int task_space_dim_;
  std::vector<std::size_t> actuated_;
  std::array<int, 3> kept_axes_{0, 1, 2};
};

// Base-frame end-effector position (all three coordinates), no projection.
std::array<double, 3> forward_kinematics_3d(const KinematicChain& chain,
                                            std::span<const double> q);

// Throws DomainError naming the joint index when q violates a limit.
CartesianPoint forward_kinematics(const KinematicChain& chain, std::span<const double> q);

// Grid-occupancy Monte Carlo estimate of the reachable area (2-D) or
// volume (3-D): occupied cells times cell_edge^dim.
double estimate_workspace_volume(const KinematicChain& chain, double cell_edge,
                                 std::size_t n_samples, std::uint64_t seed);

// Built-in reference chains.
KinematicChain planar_chain(std::string name, std::span<const double> lengths,
                            std::span<const JointRange> limits);
// KUKA LBR iiwa 14 R820; actuated_joints are 1-based joint numbers.
KinematicChain kuka_iiwa14_chain(std::span<const int> actuated_joints, int task_space_dim);

}  // namespace irl
