#include "sfnet/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sfnet {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kWallHeight = 1.5;      // meters
constexpr double kCeilingHeight = 2.5;   // meters
constexpr double kDepthMinMm = 300.0;
constexpr double kDepthMaxMm = 10000.0;
constexpr double kGapRange = 1.5;        // meters; rays beyond this count as free
constexpr double kSteerGain = 0.6;
constexpr double kOmegaMax = 0.3;

struct Palette {
    std::array<double, 3> rgb;
};

const Palette kWallColor = {{0.78, 0.76, 0.72}};
const Palette kFloorColor = {{0.42, 0.42, 0.42}};
const Palette kCeilingColor = {{0.88, 0.88, 0.88}};
const Palette kObstaclePalette[] = {
    {{0.85, 0.20, 0.20}}, {{0.20, 0.80, 0.25}}, {{0.20, 0.35, 0.90}},
    {{0.90, 0.80, 0.15}}, {{0.70, 0.25, 0.80}}, {{0.95, 0.55, 0.15}},
};
constexpr int kPaletteSize = 6;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

// Ray (ox,oy)+t(dx,dy) against segment p1-p2; returns t or infinity.
double ray_segment(double ox, double oy, double dx, double dy, const WallSegment& s) {
    const double ex = s.x2 - s.x1, ey = s.y2 - s.y1;
    const double denom = dx * ey - dy * ex;
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    const double qx = s.x1 - ox, qy = s.y1 - oy;
    const double t = (qx * ey - qy * ex) / denom;
    const double u = (qx * dy - qy * dx) / denom;
    if (t <= 1e-9 || u < 0.0 || u > 1.0) return std::numeric_limits<double>::infinity();
    return t;
}

// Ray against circle; nearest positive t or infinity.
double ray_circle(double ox, double oy, double dx, double dy, const Obstacle& c) {
    const double fx = ox - c.cx, fy = oy - c.cy;
    const double b = fx * dx + fy * dy;
    const double cc = fx * fx + fy * fy - c.radius * c.radius;
    const double disc = b * b - cc;  // unit direction, so a == 1
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    const double t1 = -b - sq;
    if (t1 > 1e-9) return t1;
    const double t2 = -b + sq;
    if (t2 > 1e-9) return t2;
    return std::numeric_limits<double>::infinity();
}

uint8_t quantize8(double v) {
    const double s = 255.0 * v;
    const long q = std::lround(s);
    return static_cast<uint8_t>(std::clamp<long>(q, 0, 255));
}

uint16_t quantize_depth(double meters) {
    const double mm = std::clamp(1000.0 * meters, kDepthMinMm, kDepthMaxMm);
    return static_cast<uint16_t>(std::lround(mm));
}

}  // namespace

double CameraModel::focal_px() {
    static const double f =
        (kColumns / 2.0) / std::tan(kFovDegrees * kPi / 180.0 / 2.0);
    return f;
}

double CameraModel::bearing(int column) {
    return std::atan((kColumns / 2.0 - (column + 0.5)) / focal_px());
}

WorldSpec WorldSpec::advanced(double dt) const {
    WorldSpec w = *this;
    for (Obstacle& o : w.obstacles) {
        if (o.vx == 0.0 && o.vy == 0.0) continue;
        double nx = o.cx + o.vx * dt;
        double ny = o.cy + o.vy * dt;
        const double x_lo = o.radius + 0.6, x_hi = corridor_length - o.radius - 0.3;
        const double y_lim = corridor_width / 2.0 - o.radius - 0.05;
        if (nx < x_lo || nx > x_hi) {
            o.vx = -o.vx;
            nx = std::clamp(nx, x_lo, x_hi);
        }
        if (ny < -y_lim || ny > y_lim) {
            o.vy = -o.vy;
            ny = std::clamp(ny, -y_lim, y_lim);
        }
        o.cx = nx;
        o.cy = ny;
    }
    return w;
}

WorldSpec WorldSpec::mirrored() const {
    WorldSpec w = *this;
    for (WallSegment& s : w.walls) {
        s.y1 = -s.y1;
        s.y2 = -s.y2;
    }
    for (Obstacle& o : w.obstacles) {
        o.cy = -o.cy;
        o.vy = -o.vy;
    }
    return w;
}

WorldSpec generate_world(Rng& rng, int difficulty) {
    WorldSpec w;
    w.corridor_width = rng.next_uniform(2.0, 3.0);
    w.corridor_length = 12.0;
    const double hw = w.corridor_width / 2.0;
    w.walls = {
        {0.0, hw, w.corridor_length, hw},      // left wall
        {0.0, -hw, w.corridor_length, -hw},    // right wall
        {w.corridor_length, -hw, w.corridor_length, hw},  // far cap
        {0.0, -hw, 0.0, hw},                   // near cap
    };
    w.light_level = rng.next_uniform(0.3, 1.0);
    if (difficulty <= 0) return w;

    const int count = 3 + static_cast<int>(rng.next_below(6));  // 3..8
    for (int i = 0; i < count; ++i) {
        Obstacle o;
        o.radius = rng.next_uniform(0.15, 0.35);
        o.height = rng.next_uniform(0.45, 1.1);
        o.color_index = static_cast<int>(rng.next_below(kPaletteSize));
        const double y_lim = hw - o.radius - 0.12;
        o.cx = rng.next_uniform(2.0, w.corridor_length - 1.0);
        o.cy = rng.next_uniform(-y_lim, y_lim);
        if (difficulty >= 2 && rng.next_uniform() < 0.35) {
            const double speed = rng.next_uniform(0.02, 0.02 + 0.03 * difficulty);
            const double dir = rng.next_uniform(-kPi, kPi);
            o.vx = speed * std::cos(dir);
            o.vy = speed * std::sin(dir);
        }
        w.obstacles.push_back(o);
    }
    return w;
}

std::vector<RayHit> raycast_scan(const WorldSpec& world, const RobotState& state) {
    std::vector<RayHit> scan(CameraModel::kColumns);
    for (int j = 0; j < CameraModel::kColumns; ++j) {
        const double angle = state.heading + CameraModel::bearing(j);
        const double dx = std::cos(angle), dy = std::sin(angle);
        double best = std::numeric_limits<double>::infinity();
        double height = kWallHeight;
        int color = -1;
        for (const WallSegment& s : world.walls) {
            const double t = ray_segment(state.x, state.y, dx, dy, s);
            if (t < best) {
                best = t;
                height = kWallHeight;
                color = -1;
            }
        }
        for (const Obstacle& o : world.obstacles) {
            const double t = ray_circle(state.x, state.y, dx, dy, o);
            if (t < best) {
                best = t;
                height = o.height;
                color = o.color_index;
            }
        }
        if (!std::isfinite(best)) best = kDepthMaxMm / 1000.0;  // open world fallback
        scan[j] = RayHit{best, height, color};
    }
    return scan;
}

RenderedFrame render(const WorldSpec& world, const RobotState& state) {
    if (std::fabs(state.y) > world.corridor_width / 2.0 || state.x < 0.0 ||
        state.x > world.corridor_length)
        throw std::runtime_error("render: robot state outside the corridor");

    const std::vector<RayHit> scan = raycast_scan(world, state);
    RenderedFrame frame;
    frame.rgb.width = CameraModel::kColumns;
    frame.rgb.height = CameraModel::kRows;
    frame.rgb.pixels.resize(size_t(3) * CameraModel::kColumns * CameraModel::kRows);
    frame.depth.width = CameraModel::kColumns;
    frame.depth.height = CameraModel::kRows;
    frame.depth.pixels.resize(size_t(CameraModel::kColumns) * CameraModel::kRows);

    const double f = CameraModel::focal_px();
    const double cy = CameraModel::kRows / 2.0;

    for (int r = 0; r < CameraModel::kRows; ++r) {
        // tan of the vertical angle; positive below the horizon.
        const double tan_phi = ((r + 0.5) - cy) / f;
        for (int j = 0; j < CameraModel::kColumns; ++j) {
            const RayHit& hit = scan[j];
            double dist;
            const Palette* base;
            if (tan_phi > 0.0) {
                // Floor plane at distance h/tan(phi), unless the obstacle
                // surface is hit first.
                const double floor_dist = CameraModel::kHeight / tan_phi;
                if (floor_dist >= hit.distance) {
                    dist = hit.distance;
                    base = hit.color_index < 0 ? &kWallColor : &kObstaclePalette[hit.color_index];
                } else {
                    dist = floor_dist;
                    base = &kFloorColor;
                }
            } else {
                // Above the horizon: obstacle surface while below its top,
                // ceiling beyond it.
                const double rise = hit.distance * (-tan_phi);
                if (CameraModel::kHeight + rise <= hit.height) {
                    dist = hit.distance;
                    base = hit.color_index < 0 ? &kWallColor : &kObstaclePalette[hit.color_index];
                } else {
                    dist = (kCeilingHeight - CameraModel::kHeight) / (-tan_phi);
                    base = &kCeilingColor;
                }
            }
            frame.depth.at(r, j) = quantize_depth(dist);
            const double shade = world.light_level / (1.0 + 0.1 * dist);
            for (int ch = 0; ch < 3; ++ch)
                frame.rgb.at(r, j, ch) = quantize8(base->rgb[size_t(ch)] * shade);
        }
    }
    return frame;
}

double expert_policy_from_scan(const std::vector<RayHit>& scan) {
    const int n = static_cast<int>(scan.size());
    // Enumerate maximal runs of columns whose rays clear the gap range.
    int best_start = -1, best_len = 0;
    double best_min = 0.0;
    int i = 0;
    while (i < n) {
        if (scan[size_t(i)].distance > kGapRange) {
            int j = i;
            double run_min = std::numeric_limits<double>::infinity();
            while (j < n && scan[size_t(j)].distance > kGapRange) {
                run_min = std::min(run_min, scan[size_t(j)].distance);
                ++j;
            }
            const int len = j - i;
            const double c_here = 0.5 * (CameraModel::bearing(i) + CameraModel::bearing(j - 1));
            bool take = false;
            if (len > best_len) {
                take = true;
            } else if (len == best_len && best_start >= 0) {
                // Widest gap ties: prefer the deeper one, then the straighter.
                const double c_best = 0.5 * (CameraModel::bearing(best_start) +
                                             CameraModel::bearing(best_start + best_len - 1));
                if (run_min > best_min ||
                    (run_min == best_min && std::fabs(c_here) < std::fabs(c_best)))
                    take = true;
            }
            if (take) {
                best_start = i;
                best_len = len;
                best_min = run_min;
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (best_len == 0) return kOmegaMax;  // fully blocked: turn left

    const double center = 0.5 * (CameraModel::bearing(best_start) +
                                 CameraModel::bearing(best_start + best_len - 1));
    const double raw = std::clamp(kSteerGain * center, -kOmegaMax, kOmegaMax);
    // Snap to the 0.1 rad/s command grid, ties toward zero.
    const double scaled = raw * 10.0;
    double snapped = std::floor(std::fabs(scaled) + 0.5);
    if (snapped - std::fabs(scaled) == 0.5) snapped -= 1.0;  // tie: toward zero
    if (snapped == 0.0) return 0.0;                          // avoid -0.0 labels
    return std::copysign(snapped / 10.0, raw);
}

double expert_policy(const WorldSpec& world, const RobotState& state) {
    return expert_policy_from_scan(raycast_scan(world, state));
}

RobotState step_state(const RobotState& state, double omega, double dt) {
    RobotState next = state;
    next.heading = wrap_angle(state.heading + omega * dt);
    next.x += RobotState::kLinearVelocity * std::cos(next.heading) * dt;
    next.y += RobotState::kLinearVelocity * std::sin(next.heading) * dt;
    return next;
}

double clearance(const WorldSpec& world, double x, double y) {
    double d = std::numeric_limits<double>::infinity();
    const double hw = world.corridor_width / 2.0;
    d = std::min(d, hw - std::fabs(y));
    d = std::min(d, x);
    d = std::min(d, world.corridor_length - x);
    for (const Obstacle& o : world.obstacles) {
        const double dc = std::hypot(x - o.cx, y - o.cy) - o.radius;
        d = std::min(d, dc);
    }
    return d;
}

}  // namespace sfnet
