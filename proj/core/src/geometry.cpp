#include "ltesim/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "ltesim/error.hpp"

namespace ltesim::geometry {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Axial hex coordinates, center first, then ring by ring.
std::vector<std::pair<int, int>> hex_axial_coordinates(int rings)
{
    static constexpr int kDirs[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
    std::vector<std::pair<int, int>> out{{0, 0}};
    for (int ring = 1; ring <= rings; ++ring) {
        int q = kDirs[4][0] * ring;
        int r = kDirs[4][1] * ring;
        for (const auto& d : kDirs) {
            for (int step = 0; step < ring; ++step) {
                out.emplace_back(q, r);
                q += d[0];
                r += d[1];
            }
        }
    }
    return out;
}

Polygon sector_footprint(Point site, double radius, double orientation_deg)
{
    return Polygon({site, site + radius * direction(orientation_deg - 60.0),
                    site + radius * direction(orientation_deg),
                    site + radius * direction(orientation_deg + 60.0)});
}

} // namespace

Point direction(double deg)
{
    return {std::cos(deg * kDegToRad), std::sin(deg * kDegToRad)};
}

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices))
{
    if (vertices_.size() < 3) throw InvalidParameter("polygon needs at least 3 vertices");
}

bool Polygon::contains(Point p) const
{
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = vertices_[i];
        const Point& b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double Polygon::area() const
{
    double twice = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = vertices_[i];
        const Point& b = vertices_[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

Point Polygon::centroid() const
{
    double twice = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = vertices_[i];
        const Point& b = vertices_[(i + 1) % n];
        const double cross = a.x * b.y - b.x * a.y;
        twice += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    return {cx / (3.0 * twice), cy / (3.0 * twice)};
}

Point Polygon::min_corner() const
{
    Point lo = vertices_.front();
    for (const Point& v : vertices_) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
    }
    return lo;
}

Point Polygon::max_corner() const
{
    Point hi = vertices_.front();
    for (const Point& v : vertices_) {
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
    return hi;
}

int Cell::total_antennas() const
{
    int n = 0;
    for (const auto& tp : tx_points) n += tp.n_antennas;
    return n;
}

double Cell::total_power_w() const
{
    double p = 0.0;
    for (const auto& tp : tx_points) p += tp.tx_power_w;
    return p;
}

NetworkLayout build_hex_grid(int rings, double isd, const HexGridOptions& options)
{
    if (rings < 0) throw InvalidParameter("rings must be >= 0, got " + std::to_string(rings));
    if (!(isd > 0.0)) throw InvalidParameter("inter-site distance must be positive");
    if (!(options.rru_fraction > 0.0 && options.rru_fraction < 1.0))
        throw InvalidParameter("rru_fraction must lie in (0, 1)");
    if (options.rrus_per_cell < 0) throw InvalidParameter("rrus_per_cell must be >= 0");
    if (!(options.cell_power_w > 0.0)) throw InvalidParameter("cell power must be positive");
    if (options.antennas_per_rru < 1) throw InvalidParameter("antennas_per_rru must be >= 1");
    // RRUs sit at bisector +- offset; only two azimuths are defined.
    if (options.rrus_per_cell > 2) throw InvalidParameter("at most 2 RRUs per cell are supported");

    const int collocated = options.antennas_per_cell - options.rrus_per_cell * options.antennas_per_rru;
    if (collocated < 1)
        throw InvalidParameter("antennas_per_cell leaves no antenna at the collocated array");

    NetworkLayout layout;
    layout.inter_site_distance = isd;
    layout.rrus_per_cell = options.rrus_per_cell;
    const double radius = layout.cell_radius();
    const Point a1 = isd * direction(30.0);
    const Point a2 = isd * direction(90.0);
    const double power_per_antenna = options.cell_power_w / options.antennas_per_cell;

    int tp_id = 0;
    for (const auto& [q, r] : hex_axial_coordinates(rings)) {
        const Point site = static_cast<double>(q) * a1 + static_cast<double>(r) * a2;
        const int site_id = static_cast<int>(layout.sites.size());
        layout.sites.push_back(site);
        for (int sector = 0; sector < 3; ++sector) {
            Cell cell;
            cell.id = static_cast<int>(layout.cells.size());
            cell.parent_site = site_id;
            cell.sector_orientation_deg = 120.0 * sector;
            cell.footprint = sector_footprint(site, radius, cell.sector_orientation_deg);

            TransmissionPoint bs;
            bs.id = tp_id++;
            bs.position = site;
            bs.n_antennas = collocated;
            bs.kind = TxKind::MacroCollocated;
            bs.tx_power_w = power_per_antenna * collocated;
            bs.boresight_deg = cell.sector_orientation_deg;
            bs.directional = true;
            cell.tx_points.push_back(bs);

            for (int k = 0; k < options.rrus_per_cell; ++k) {
                const double offset = (k == 0 ? -1.0 : 1.0) * options.rru_offset_deg;
                TransmissionPoint rru;
                rru.id = tp_id++;
                rru.position = site + (options.rru_fraction * radius) *
                                          direction(cell.sector_orientation_deg + offset);
                rru.n_antennas = options.antennas_per_rru;
                rru.kind = TxKind::Rru;
                rru.tx_power_w = power_per_antenna * options.antennas_per_rru;
                rru.boresight_deg = cell.sector_orientation_deg;
                rru.directional = false;
                cell.tx_points.push_back(rru);
            }
            layout.cells.push_back(std::move(cell));
        }
    }
    layout.region = layout.cells.front().footprint;
    return layout;
}

Point uniform_point(const Polygon& region, RngStream& rng)
{
    const Point lo = region.min_corner();
    const Point hi = region.max_corner();
    for (;;) {
        const Point p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (region.contains(p)) return p;
    }
}

UserDrop drop_users_in(const Polygon& region, std::size_t k, RngStream& rng, const UserOptions& options)
{
    if (k == 0) throw InvalidParameter("user count must be >= 1");
    if (options.velocity_kmh < 0.0) throw InvalidParameter("velocity must be >= 0");
    if (options.n_rx_antennas < 1) throw InvalidParameter("n_rx_antennas must be >= 1");
    UserDrop drop;
    drop.users.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        User u;
        u.id = static_cast<int>(i);
        u.position = uniform_point(region, rng);
        u.velocity_kmh = options.velocity_kmh;
        u.n_rx_antennas = options.n_rx_antennas;
        drop.users.push_back(u);
    }
    return drop;
}

UserDrop drop_users_uniform(const NetworkLayout& layout, std::size_t k, RngStream& rng, const UserOptions& options)
{
    return drop_users_in(layout.region, k, rng, options);
}

std::vector<Point> drop_poisson(const Polygon& region, double density, RngStream& rng)
{
    if (!(density >= 0.0)) throw InvalidParameter("Poisson density must be >= 0");
    const std::uint64_t count = rng.poisson(density * region.area());
    std::vector<Point> points;
    points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) points.push_back(uniform_point(region, rng));
    return points;
}

UserDrop drop_user_clusters(const Polygon& region, std::size_t n_clusters, std::size_t users_per_cluster,
                            double cluster_radius, RngStream& rng, const UserOptions& options)
{
    if (n_clusters == 0 || users_per_cluster == 0) throw InvalidParameter("cluster counts must be >= 1");
    if (!(cluster_radius > 0.0)) throw InvalidParameter("cluster radius must be positive");

    UserDrop drop;
    drop.cluster_centers.reserve(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c) drop.cluster_centers.push_back(uniform_point(region, rng));

    drop.users.reserve(n_clusters * users_per_cluster);
    for (const Point& center : drop.cluster_centers) {
        for (std::size_t i = 0; i < users_per_cluster; ++i) {
            Point p;
            do {
                // Uniform in the disc: sqrt of a uniform radius fraction.
                const double r = cluster_radius * std::sqrt(rng.uniform());
                const double phi = rng.uniform(0.0, 360.0);
                p = center + r * direction(phi);
            } while (!region.contains(p));
            User u;
            u.id = static_cast<int>(drop.users.size());
            u.position = p;
            u.velocity_kmh = options.velocity_kmh;
            u.n_rx_antennas = options.n_rx_antennas;
            drop.users.push_back(u);
        }
    }
    return drop;
}

NetworkLayout place_femtos_at_centers(const NetworkLayout& layout, std::span<const Point> centers,
                                      std::size_t n_femto, const FemtoOptions& options)
{
    if (n_femto > centers.size())
        throw InvalidParameter("n_femto (" + std::to_string(n_femto) + ") exceeds cluster count (" +
                               std::to_string(centers.size()) + ")");
    if (!(options.tx_power_w > 0.0)) throw InvalidParameter("femto power must be positive");

    NetworkLayout out = layout;
    int next_tp = 0;
    for (const auto& cell : out.cells)
        for (const auto& tp : cell.tx_points) next_tp = std::max(next_tp, tp.id + 1);
    for (const auto& f : out.femtos) next_tp = std::max(next_tp, f.tx.id + 1);

    for (std::size_t i = 0; i < n_femto; ++i) {
        FemtoAP ap;
        ap.id = static_cast<int>(out.femtos.size());
        ap.tx.id = next_tp++;
        ap.tx.position = centers[i];
        ap.tx.n_antennas = options.n_antennas;
        ap.tx.kind = TxKind::Femto;
        ap.tx.tx_power_w = options.tx_power_w;
        out.femtos.push_back(ap);
    }
    return out;
}

Attachment server_attachment(const NetworkLayout& layout, std::size_t server)
{
    if (server < layout.cells.size()) return {Tier::Macro, static_cast<int>(server)};
    return {Tier::Femto, static_cast<int>(server - layout.cells.size())};
}

UserDrop attach_users(const NetworkLayout& layout, UserDrop drop, const ServerPowerMatrix& rx_power,
                      std::span<const bool> eligible)
{
    const std::size_t n_servers = server_count(layout);
    if (static_cast<std::size_t>(rx_power.rows()) != drop.users.size() ||
        static_cast<std::size_t>(rx_power.cols()) != n_servers)
        throw InvalidParameter("received-power matrix does not match users x servers");
    if (!eligible.empty() && eligible.size() != n_servers)
        throw InvalidParameter("eligibility mask does not match server count");

    for (std::size_t u = 0; u < drop.users.size(); ++u) {
        std::optional<std::size_t> best;
        for (std::size_t s = 0; s < n_servers; ++s) {
            if (!eligible.empty() && !eligible[s]) continue;
            if (!best || rx_power(u, s) > rx_power(u, *best)) best = s;
        }
        if (!best) throw InvalidParameter("no eligible server");
        drop.users[u].attachment = server_attachment(layout, *best);
    }
    return drop;
}

} // namespace ltesim::geometry
