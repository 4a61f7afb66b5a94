#pragma once

#include <array>
#include <vector>

#include "sfnet/image_io.hpp"
#include "sfnet/tensor.hpp"

namespace sfnet {

// Synthetic corridor world: a rectangular corridor along +x with circular
// (cylindrical) obstacles, rendered by a single horizontal raycast fanned
// out over the camera's field of view.

struct WallSegment {
    double x1, y1, x2, y2;
};

struct Obstacle {
    double cx, cy;       // center, meters
    double radius;       // meters
    double height;       // meters above the floor
    int color_index;     // into the render palette
    double vx = 0.0;     // velocity for dynamic obstacles, m/s
    double vy = 0.0;
};

struct WorldSpec {
    double corridor_width = 2.4;   // meters
    double corridor_length = 12.0;
    std::vector<WallSegment> walls;
    std::vector<Obstacle> obstacles;
    double light_level = 1.0;  // scene-wide brightness multiplier in [0.3, 1.0]

    /// World with dynamic obstacles advanced by dt seconds; obstacles
    /// reflect off the corridor bounds so the containment invariant holds.
    WorldSpec advanced(double dt) const;

    /// Mirror across the corridor axis (y -> -y).
    WorldSpec mirrored() const;
};

struct RobotState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;                  // radians, wrapped to (-pi, pi]
    static constexpr double kLinearVelocity = 0.1;  // m/s, fixed

    RobotState mirrored() const { return {x, -y, -heading}; }
};

/// Camera model shared by the renderer and the scan used by the expert:
/// 240 columns over a 65 degree horizontal field of view, square pixels,
/// camera 0.2 m above the floor, horizon at the image center.
struct CameraModel {
    static constexpr int kColumns = 240;
    static constexpr int kRows = 240;
    static constexpr double kFovDegrees = 65.0;
    static constexpr double kHeight = 0.2;  // meters

    static double focal_px();
    /// Bearing of column j relative to the heading; positive is left.
    static double bearing(int column);
};

/// One raycast hit: distance along the ray plus the surface that was hit.
struct RayHit {
    double distance;   // meters; corridor walls or an obstacle
    double height;     // surface height, meters
    int color_index;   // -1 for walls
};

/// Per-column nearest-hit scan across the field of view.
std::vector<RayHit> raycast_scan(const WorldSpec& world, const RobotState& state);

/// Deterministic world generation. Difficulty 0 gives an empty straight
/// corridor; difficulty >= 1 places 3-8 obstacles with randomized sizes,
/// colors, lighting and (at higher difficulty) motion.
WorldSpec generate_world(Rng& rng, int difficulty);

struct RenderedFrame {
    ImageRgb8 rgb;       // 3x240x240, 8-bit
    ImageGray16 depth;   // 240x240, millimeters in [300, 10000]
};

/// Renders the paired RGB/depth frame for a robot pose. Deterministic:
/// identical (world, state) give bitwise identical images.
RenderedFrame render(const WorldSpec& world, const RobotState& state);

/// Scripted demonstrator: finds the widest angular gap whose rays all
/// exceed 1.5 m, steers toward its center with gain 0.6, clamps to
/// [-0.3, 0.3] rad/s and snaps to the 0.1 grid (ties round toward zero).
/// A fully blocked scan commands +0.3 (turn left).
double expert_policy(const WorldSpec& world, const RobotState& state);
double expert_policy_from_scan(const std::vector<RayHit>& scan);

/// Unicycle step: heading += omega*dt, then advance at the fixed linear
/// velocity. Heading stays wrapped to (-pi, pi].
RobotState step_state(const RobotState& state, double omega, double dt);

/// Distance from a point to the nearest wall or obstacle surface.
double clearance(const WorldSpec& world, double x, double y);

}  // namespace sfnet
