#include "minddreamer/envs.hpp"

#include <cmath>

#include "minddreamer/errors.hpp"

namespace md {

void IslandSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ValidationError("IslandSpec: epsilon must lie in (0,1]");
  if (size_a < 1 || size_b < 1) throw ValidationError("IslandSpec: region sizes must be >= 1");
}

std::vector<char> IslandEnv::goal_region() const {
  std::vector<char> goal(static_cast<std::size_t>(mdp.n_states), 0);
  for (int s : region_b) goal[static_cast<std::size_t>(s)] = 1;
  return goal;
}

IslandEnv build_island_mdp(const IslandSpec& spec) {
  spec.validate();
  const int na = spec.size_a;
  const int nb = spec.size_b;
  const int n = na + nb;
  constexpr int kWander = 0;
  constexpr int kBridge = 1;

  IslandEnv env;
  env.spec = spec;
  env.bridge_state = na - 1;
  env.bridge_action = kBridge;
  env.entry_state = na;
  for (int s = 0; s < na; ++s) env.region_a.push_back(s);
  for (int s = na; s < n; ++s) env.region_b.push_back(s);

  TabularMdp mdp = TabularMdp::zeros(n, 2, 0.95);
  const double a_mass = 1.0 / na;
  const double b_mass = 1.0 / nb;
  for (int s = 0; s < n; ++s) {
    const bool in_a = s < na;
    // Wander: uniform within the current cluster.
    for (int a = 0; a < 2; ++a) {
      if (in_a) {
        for (int s2 = 0; s2 < na; ++s2) mdp.p(s, a, s2) = a_mass;
      } else {
        for (int s2 = na; s2 < n; ++s2) mdp.p(s, a, s2) = b_mass;
      }
    }
    mdp.r(s, kWander) = in_a ? 0.0 : 1.0;
    mdp.r(s, kBridge) = in_a ? 0.0 : 1.0;
  }
  // The bridge attempt: cross with probability epsilon, otherwise wander in A.
  {
    const int s = env.bridge_state;
    for (int s2 = 0; s2 < n; ++s2) mdp.p(s, kBridge, s2) = 0.0;
    mdp.p(s, kBridge, env.entry_state) = spec.epsilon;
    for (int s2 = 0; s2 < na; ++s2) mdp.p(s, kBridge, s2) += (1.0 - spec.epsilon) * a_mass;
  }
  // Return gate so a uniform policy keeps only epsilon-order mass in B.
  {
    const int s = env.entry_state;
    for (int s2 = 0; s2 < n; ++s2) mdp.p(s, kBridge, s2) = 0.0;
    mdp.p(s, kBridge, env.bridge_state) = 1.0;
  }
  mdp.labels.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    mdp.labels.push_back(s < na ? "A" + std::to_string(s) : "B" + std::to_string(s - na));
  mdp.validate();
  env.mdp = std::move(mdp);
  return env;
}

std::vector<int> BottleneckGrid::left_room() const {
  std::vector<int> out;
  for (int s = 0; s < mdp.n_states; ++s)
    if (col_of(s) < width) out.push_back(s);
  return out;
}

std::vector<int> BottleneckGrid::right_room() const {
  std::vector<int> out;
  for (int s = 0; s < mdp.n_states; ++s)
    if (col_of(s) > width) out.push_back(s);
  return out;
}

std::vector<char> BottleneckGrid::goal_region() const {
  std::vector<char> goal(static_cast<std::size_t>(mdp.n_states), 0);
  goal[static_cast<std::size_t>(goal_state)] = 1;
  return goal;
}

BottleneckGrid build_bottleneck_grid(int width, int height, int corridor_width,
                                     double step_reward, double goal_reward) {
  if (width < 1 || height < 1) throw ValidationError("bottleneck grid: rooms must be non-empty");
  if (corridor_width < 1 || corridor_width > height)
    throw ValidationError("bottleneck grid: corridor width must lie in [1, height]");

  BottleneckGrid grid;
  grid.width = width;
  grid.height = height;
  grid.corridor_width = corridor_width;
  grid.total_cols = 2 * width + 1;
  grid.step_reward = step_reward;
  grid.goal_reward = goal_reward;

  const int wall_col = width;
  const int corridor_start = (height - corridor_width) / 2;
  grid.cell_to_state.assign(static_cast<std::size_t>(height) * grid.total_cols, -1);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < grid.total_cols; ++col) {
      const bool wall = col == wall_col &&
                        (row < corridor_start || row >= corridor_start + corridor_width);
      if (wall) continue;
      grid.cell_to_state[row * grid.total_cols + col] =
          static_cast<int>(grid.state_to_cell.size());
      grid.state_to_cell.push_back(row * grid.total_cols + col);
    }
  }
  const int n = static_cast<int>(grid.state_to_cell.size());
  grid.goal_state = grid.state_at(height / 2, grid.total_cols - 1);

  TabularMdp mdp = TabularMdp::zeros(n, 4, 0.95);
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, -1, 1};
  for (int s = 0; s < n; ++s) {
    const int row = grid.state_to_cell[s] / grid.total_cols;
    const int col = grid.state_to_cell[s] % grid.total_cols;
    for (int a = 0; a < 4; ++a) {
      const int r2 = row + kDr[a];
      const int c2 = col + kDc[a];
      int dest = s;
      if (r2 >= 0 && r2 < height && c2 >= 0 && c2 < grid.total_cols) {
        const int t = grid.cell_to_state[r2 * grid.total_cols + c2];
        if (t >= 0) dest = t;
      }
      mdp.p(s, a, dest) = 1.0;
      mdp.r(s, a) = (s == grid.goal_state) ? goal_reward : step_reward;
    }
  }
  mdp.validate();
  grid.mdp = std::move(mdp);
  return grid;
}

void ThreeRingSpec::validate() const {
  if (grid_resolution < 16) throw ValidationError("ThreeRingSpec: resolution must be >= 16");
  if (!(ring_radii[0] < ring_radii[1] && ring_radii[1] < ring_radii[2]))
    throw ValidationError("ThreeRingSpec: radii must be strictly increasing");
  if (!(ring_rewards[0] < ring_rewards[1] && ring_rewards[1] < ring_rewards[2]))
    throw ValidationError("ThreeRingSpec: rewards must be strictly increasing");
  if (drift_strength < 0.0) throw ValidationError("ThreeRingSpec: drift must be >= 0");
}

double ThreeRingEnv::radius_of(int s) const {
  const double x = x_of(s);
  const double y = y_of(s);
  return std::sqrt(x * x + y * y);
}

std::vector<int> ThreeRingEnv::ring_band(int ring) const {
  std::vector<int> out;
  for (int s = 0; s < mdp.n_states; ++s)
    if (ring_of_state[static_cast<std::size_t>(s)] == ring) out.push_back(s);
  return out;
}

std::vector<char> ThreeRingEnv::goal_region(int ring) const {
  std::vector<char> goal(static_cast<std::size_t>(mdp.n_states), 0);
  for (int s = 0; s < mdp.n_states; ++s)
    if (ring_of_state[static_cast<std::size_t>(s)] == ring) goal[static_cast<std::size_t>(s)] = 1;
  return goal;
}

namespace {

int nearest_ring(const ThreeRingSpec& spec, double radius) {
  int best = 0;
  double best_gap = std::abs(radius - spec.ring_radii[0]);
  for (int i = 1; i < 3; ++i) {
    const double gap = std::abs(radius - spec.ring_radii[i]);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

}  // namespace

ThreeRingEnv build_three_ring(const ThreeRingSpec& spec) {
  spec.validate();
  const int res = spec.grid_resolution;
  const int n = res * res;

  ThreeRingEnv env;
  env.spec = spec;
  env.resolution = res;

  const double cell = 2.0 / res;
  env.ring_of_state.assign(static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s) {
    const double rad = env.radius_of(s);
    const int ring = nearest_ring(spec, rad);
    if (std::abs(rad - spec.ring_radii[ring]) <= cell)
      env.ring_of_state[static_cast<std::size_t>(s)] = ring;
  }

  // 8 neighbors plus stay.
  constexpr int kDx[9] = {-1, 0, 1, -1, 0, 1, -1, 0, 1};
  constexpr int kDy[9] = {-1, -1, -1, 0, 0, 0, 1, 1, 1};
  const double p_drift = spec.drift_strength / (1.0 + spec.drift_strength);

  auto clamp_idx = [&](int v) { return v < 0 ? 0 : (v >= res ? res - 1 : v); };
  auto drift_target = [&](int s) {
    const double rad = env.radius_of(s);
    if (rad < 0.5 * cell) return s;  // at the center there is no radial direction
    const int ring = nearest_ring(spec, rad);
    const double gap = spec.ring_radii[ring] - rad;
    if (std::abs(gap) <= 0.5 * cell) return s;  // already on the attractor
    const double sign = gap > 0.0 ? 1.0 : -1.0;
    const double ux = env.x_of(s) / rad;
    const double uy = env.y_of(s) / rad;
    const int i = clamp_idx(s % res + static_cast<int>(std::lround(sign * ux)));
    const int j = clamp_idx(s / res + static_cast<int>(std::lround(sign * uy)));
    return j * res + i;
  };

  TabularMdp mdp = TabularMdp::zeros(n, 9, 0.95);
  for (int s = 0; s < n; ++s) {
    const int i = s % res;
    const int j = s / res;
    const int ring = env.ring_of_state[static_cast<std::size_t>(s)];
    const double rew = ring >= 0 ? spec.ring_rewards[ring] : 0.0;
    for (int a = 0; a < 9; ++a) {
      const int moved = clamp_idx(j + kDy[a]) * res + clamp_idx(i + kDx[a]);
      const int pulled = drift_target(moved);
      mdp.p(s, a, moved) += 1.0 - p_drift;
      mdp.p(s, a, pulled) += p_drift;
      mdp.r(s, a) = rew;
    }
  }
  mdp.validate();
  env.mdp = std::move(mdp);

  // Start on the inner band at angle zero.
  const int mid = res / 2;
  int start = mid * res + mid;
  double best_gap = 1e9;
  for (int s = 0; s < n; ++s) {
    if (env.ring_of_state[static_cast<std::size_t>(s)] != 0) continue;
    const double dy = std::abs(env.y_of(s));
    const double dx = std::abs(env.x_of(s) - spec.ring_radii[0]);
    if (dy + dx < best_gap) {
      best_gap = dy + dx;
      start = s;
    }
  }
  env.start_state = start;
  return env;
}

}  // namespace md
