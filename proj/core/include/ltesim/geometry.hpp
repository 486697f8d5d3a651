#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltesim/rng.hpp"

namespace ltesim::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point&, const Point&) = default;

    double norm() const { return std::hypot(x, y); }
};

inline double distance(Point a, Point b) { return (a - b).norm(); }

/// Unit vector at `deg` degrees counter-clockwise from the x axis.
Point direction(double deg);

/// Simple (non self-intersecting) polygon; vertices in order.
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Point> vertices);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    bool contains(Point p) const;
    double area() const;
    Point centroid() const;
    Point min_corner() const;
    Point max_corner() const;

private:
    std::vector<Point> vertices_;
};

enum class TxKind { MacroCollocated, Rru, Femto };

struct TransmissionPoint {
    int id = 0;
    Point position;
    int n_antennas = 1;
    TxKind kind = TxKind::MacroCollocated;
    double tx_power_w = 1.0;
    /// Boresight azimuth for sectorized points; ignored for omni points.
    double boresight_deg = 0.0;
    bool directional = false;
};

struct Cell {
    int id = 0;
    int parent_site = 0;
    double sector_orientation_deg = 0.0;
    std::vector<TransmissionPoint> tx_points;
    Polygon footprint;

    int total_antennas() const;
    double total_power_w() const;
};

struct FemtoAP {
    int id = 0;
    TransmissionPoint tx;
};

struct NetworkLayout {
    std::vector<Point> sites;
    std::vector<Cell> cells;
    int rrus_per_cell = 0;
    std::vector<FemtoAP> femtos;
    /// Measurement area: footprint of cell 0 (center site, first sector).
    Polygon region;
    double inter_site_distance = 0.0;

    /// isd / sqrt(3), the circumradius of a site hexagon.
    double cell_radius() const { return inter_site_distance / std::sqrt(3.0); }
};

struct HexGridOptions {
    double rru_fraction = 2.0 / 3.0;
    int rrus_per_cell = 0;
    double rru_offset_deg = 36.0;
    /// Transmit antennas per cell, summed over its collocated array and RRUs.
    int antennas_per_cell = 1;
    int antennas_per_rru = 2;
    double cell_power_w = 39.810717055349734; // 46 dBm
};

/// Hexagonal macro grid with `rings` rings around a center site, three
/// 120-degree sectors per site. Cell power is shared by all antennas of a
/// cell in proportion to their count.
NetworkLayout build_hex_grid(int rings, double isd, const HexGridOptions& options = {});

/// 1 + 3R(R+1).
constexpr std::size_t hex_site_count(int rings) noexcept
{
    return 1 + 3 * static_cast<std::size_t>(rings) * static_cast<std::size_t>(rings + 1);
}

enum class Tier { Macro, Femto };

struct Attachment {
    Tier tier = Tier::Macro;
    int id = 0;

    friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct User {
    int id = 0;
    Point position;
    double velocity_kmh = 0.0;
    int n_rx_antennas = 1;
    std::optional<Attachment> attachment;
};

struct UserDrop {
    std::vector<User> users;
    std::vector<Point> cluster_centers;
};

struct UserOptions {
    double velocity_kmh = 3.0;
    int n_rx_antennas = 1;
};

/// Uniform i.i.d. point in `region` (rejection sampling on the bounding box).
Point uniform_point(const Polygon& region, RngStream& rng);

UserDrop drop_users_in(const Polygon& region, std::size_t k, RngStream& rng, const UserOptions& options = {});

/// k users uniform over the layout's measurement region, unattached.
UserDrop drop_users_uniform(const NetworkLayout& layout, std::size_t k, RngStream& rng,
                            const UserOptions& options = {});

/// Homogeneous Poisson point process of `density` points per square metre.
std::vector<Point> drop_poisson(const Polygon& region, double density, RngStream& rng);

/// Matern-style clustered drop: `n_clusters` parents uniform on the region
/// (fixed count), `users_per_cluster` children uniform in a disc around each.
/// Children falling outside the region are redrawn.
UserDrop drop_user_clusters(const Polygon& region, std::size_t n_clusters, std::size_t users_per_cluster,
                            double cluster_radius, RngStream& rng, const UserOptions& options = {});

struct FemtoOptions {
    double tx_power_w = 0.1; // 20 dBm
    int n_antennas = 1;
};

/// Returns a copy of `layout` with femto APs at centers[0 .. n_femto).
NetworkLayout place_femtos_at_centers(const NetworkLayout& layout, std::span<const Point> centers,
                                      std::size_t n_femto, const FemtoOptions& options = {});

/// Average received power (W, no fast fading) per user and server.
/// Columns: macro cells in id order, then femto APs in id order.
using ServerPowerMatrix = Eigen::MatrixXd;

inline std::size_t server_count(const NetworkLayout& layout)
{
    return layout.cells.size() + layout.femtos.size();
}

Attachment server_attachment(const NetworkLayout& layout, std::size_t server);

/// Attach every user to the eligible server with the largest average received
/// power; ties go to the lowest server index. An empty mask means all
/// servers are eligible.
UserDrop attach_users(const NetworkLayout& layout, UserDrop drop, const ServerPowerMatrix& rx_power,
                      std::span<const bool> eligible = {});

} // namespace ltesim::geometry
