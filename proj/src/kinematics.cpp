#include "irl/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "irl/errors.hpp"
#include "irl/rng.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

constexpr double kPlanarTolerance = 1e-9;
constexpr int kPlanarProbeSamples = 256;

struct Frame {
  // Row-major rotation and translation of the current frame in the base.
  std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> p{0, 0, 0};
};

// Applies Rz(theta) Tz(d) Tx(a) Rx(alpha) on the right of f.
void append_link(Frame& f, double theta, const DHLink& link) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(link.alpha), sa = std::sin(link.alpha);
  // Translation in the parent frame: (a cos, a sin, d).
  const double lx = link.a * ct, ly = link.a * st, lz = link.d;
  const auto& r = f.r;
  f.p[0] += r[0] * lx + r[1] * ly + r[2] * lz;
  f.p[1] += r[3] * lx + r[4] * ly + r[5] * lz;
  f.p[2] += r[6] * lx + r[7] * ly + r[8] * lz;
  // Rz(theta) Rx(alpha) columns.
  const double c0[3] = {ct, st, 0.0};
  const double c1[3] = {-st * ca, ct * ca, sa};
  const double c2[3] = {st * sa, -ct * sa, ca};
  std::array<double, 9> out{};
  for (int row = 0; row < 3; ++row) {
    const double a0 = r[row * 3], a1 = r[row * 3 + 1], a2 = r[row * 3 + 2];
    out[row * 3 + 0] = a0 * c0[0] + a1 * c0[1] + a2 * c0[2];
    out[row * 3 + 1] = a0 * c1[0] + a1 * c1[1] + a2 * c1[2];
    out[row * 3 + 2] = a0 * c2[0] + a1 * c2[1] + a2 * c2[2];
  }
  f.r = out;
}

bool finite_link(const DHLink& l) {
  return std::isfinite(l.a) && std::isfinite(l.alpha) && std::isfinite(l.d) &&
         std::isfinite(l.theta_offset) && std::isfinite(l.joint_min) &&
         std::isfinite(l.joint_max);
}

std::array<double, 3> fold(const std::vector<DHLink>& links,
                           std::span<const std::size_t> actuated,
                           std::span<const double> q) {
  Frame f;
  std::size_t next = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    double theta = links[i].theta_offset;
    if (next < actuated.size() && actuated[next] == i) theta += q[next++];
    append_link(f, theta, links[i]);
  }
  return f.p;
}

}  // namespace

double distance(const CartesianPoint& p, const CartesianPoint& q) {
  double acc = 0.0;
  for (int i = 0; i < p.dim; ++i) {
    const double d = p.coords[i] - q.coords[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

KinematicChain::KinematicChain(std::string name, std::vector<DHLink> links,
                               int task_space_dim)
    : name_(std::move(name)), links_(std::move(links)), task_space_dim_(task_space_dim) {
  if (task_space_dim_ != 2 && task_space_dim_ != 3) {
    throw ConfigError("chain '" + name_ + "': task_space_dim must be 2 or 3");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (!finite_link(l)) {
      throw ConfigError("chain '" + name_ + "': link " + std::to_string(i) + " has non-finite fields");
    }
    if (!(l.joint_min < l.joint_max)) {
      throw ConfigError("chain '" + name_ + "': link " + std::to_string(i) +
                        " requires joint_min < joint_max");
    }
    if (l.actuated) actuated_.push_back(i);
  }
  if (actuated_.empty()) {
    throw ConfigError("chain '" + name_ + "': at least one actuated link required");
  }
  if (task_space_dim_ == 2) {
    Rng rng(0x5eed);
    std::array<double, 3> lo{HUGE_VAL, HUGE_VAL, HUGE_VAL};
    std::array<double, 3> hi{-HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
    JointConfig q(dof());
    for (int s = 0; s < kPlanarProbeSamples; ++s) {
      for (std::size_t j = 0; j < dof(); ++j) {
        const auto range = joint_range(j);
        q[j] = rng.uniform(range.min, range.max);
      }
      const auto p = fold(links_, actuated_, q);
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }
    const double scale = 1.0 + reach();
    int dropped = -1;
    for (int k = 2; k >= 0; --k) {
      if (hi[k] - lo[k] <= kPlanarTolerance * scale) {
        dropped = k;
        break;
      }
    }
    if (dropped < 0) {
      throw ConfigError("chain '" + name_ +
                        "': task_space_dim = 2 but end-effector points do not lie in an "
                        "axis-aligned plane");
    }
    int out = 0;
    for (int k = 0; k < 3; ++k) {
      if (k != dropped) kept_axes_[out++] = k;
    }
  }
}

JointRange KinematicChain::joint_range(std::size_t joint) const {
  const auto& l = links_.at(actuated_.at(joint));
  return {l.joint_min, l.joint_max};
}

double KinematicChain::max_joint_range() const {
  double widest = 0.0;
  for (std::size_t j = 0; j < dof(); ++j) widest = std::max(widest, joint_range(j).width());
  return widest;
}

double KinematicChain::reach() const {
  double total = 0.0;
  for (const auto& l : links_) total += std::hypot(l.a, l.d);
  return total;
}

bool KinematicChain::within_limits(std::span<const double> q) const {
  if (q.size() != dof()) return false;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto r = joint_range(j);
    if (!(q[j] >= r.min && q[j] <= r.max)) return false;
  }
  return true;
}

JointConfig KinematicChain::clamp(std::span<const double> q) const {
  JointConfig out(q.begin(), q.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto r = joint_range(j);
    out[j] = std::clamp(out[j], r.min, r.max);
  }
  return out;
}

nlohmann::json KinematicChain::to_json() const {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : links_) {
    links.push_back({{"a", l.a},
                     {"alpha", l.alpha},
                     {"d", l.d},
                     {"theta_offset", l.theta_offset},
                     {"joint_min", l.joint_min},
                     {"joint_max", l.joint_max},
                     {"actuated", l.actuated}});
  }
  return {{"name", name_}, {"task_space_dim", task_space_dim_}, {"links", links}};
}

KinematicChain KinematicChain::from_json(const nlohmann::json& doc) {
  try {
    std::vector<DHLink> links;
    for (const auto& l : doc.at("links")) {
      DHLink link;
      link.a = l.at("a").get<double>();
      link.alpha = l.at("alpha").get<double>();
      link.d = l.at("d").get<double>();
      link.theta_offset = l.value("theta_offset", 0.0);
      link.joint_min = l.at("joint_min").get<double>();
      link.joint_max = l.at("joint_max").get<double>();
      link.actuated = l.value("actuated", true);
      links.push_back(link);
    }
    return KinematicChain(doc.at("name").get<std::string>(), std::move(links),
                          doc.at("task_space_dim").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("chain definition: ") + e.what());
  }
}

KinematicChain KinematicChain::load(const std::filesystem::path& path) {
  return from_json(text_io::read_json(path));
}

std::array<double, 3> forward_kinematics_3d(const KinematicChain& chain,
                                            std::span<const double> q) {
  if (q.size() != chain.dof()) {
    throw DomainError("joint vector has " + std::to_string(q.size()) + " entries, chain '" +
                      chain.name() + "' has " + std::to_string(chain.dof()) + " DoF");
  }
  for (std::size_t j = 0; j < chain.dof(); ++j) {
    const auto r = chain.joint_range(j);
    if (!(q[j] >= r.min && q[j] <= r.max)) {
      throw DomainError("joint " + std::to_string(j) + " = " + std::to_string(q[j]) +
                        " outside [" + std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
    }
  }
  return fold(chain.links(), chain.actuated_links(), q);
}

CartesianPoint forward_kinematics(const KinematicChain& chain, std::span<const double> q) {
  const auto p = forward_kinematics_3d(chain, q);
  CartesianPoint out;
  out.dim = chain.task_space_dim();
  const auto axes = chain.kept_axes();
  for (int i = 0; i < out.dim; ++i) out.coords[i] = p[axes[i]];
  return out;
}

double estimate_workspace_volume(const KinematicChain& chain, double cell_edge,
                                 std::size_t n_samples, std::uint64_t seed) {
  if (!(cell_edge > 0.0)) throw DomainError("cell edge must be positive");
  Rng rng(seed);
  std::unordered_set<std::uint64_t> occupied;
  JointConfig q(chain.dof());
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto r = chain.joint_range(j);
      q[j] = rng.uniform(r.min, r.max);
    }
    const auto p = forward_kinematics(chain, q);
    std::uint64_t key = 0;
    for (int k = 0; k < p.dim; ++k) {
      const auto cell = static_cast<std::int64_t>(std::floor(p[k] / cell_edge)) + kOffset;
      key = (key << 21) | (static_cast<std::uint64_t>(cell) & 0x1fffff);
    }
    occupied.insert(key);
  }
  return static_cast<double>(occupied.size()) * std::pow(cell_edge, chain.task_space_dim());
}

KinematicChain planar_chain(std::string name, std::span<const double> lengths,
                            std::span<const JointRange> limits) {
  if (lengths.size() != limits.size()) throw ConfigError("planar chain: lengths/limits mismatch");
  std::vector<DHLink> links;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    links.push_back({lengths[i], 0.0, 0.0, 0.0, limits[i].min, limits[i].max, true});
  }
  return KinematicChain(std::move(name), std::move(links), 2);
}

KinematicChain kuka_iiwa14_chain(std::span<const int> actuated_joints, int task_space_dim) {
  using std::numbers::pi;
  constexpr double deg = pi / 180.0;
  // d (m), alpha (rad), symmetric limit (deg) for joints 1..7.
  const double d[7] = {0.36, 0.0, 0.42, 0.0, 0.40, 0.0, 0.126};
  const double alpha[7] = {-pi / 2, pi / 2, pi / 2, -pi / 2, -pi / 2, pi / 2, 0.0};
  const double limit[7] = {170, 120, 170, 120, 170, 120, 175};
  std::vector<DHLink> links;
  for (int j = 0; j < 7; ++j) {
    const bool on = std::find(actuated_joints.begin(), actuated_joints.end(), j + 1) !=
                    actuated_joints.end();
    links.push_back({0.0, alpha[j], d[j], 0.0, -limit[j] * deg, limit[j] * deg, on});
  }
  std::string name = "kuka_iiwa14_" + std::to_string(actuated_joints.size()) + "dof";
  return KinematicChain(std::move(name), std::move(links), task_space_dim);
}

}  // namespace irl
