#pragma once

// Retroreflector isolation: intensity band-pass, DBSCAN, per-cluster summary
// and plausibility checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "leafscope/scene.hpp"

namespace leafscope {

struct GatedPoint {
    std::size_t index;  // into the source frame
    Vec3 position;
};

/// Returns the returns with band.lo <= intensity <= band.hi in frame order.
inline std::vector<GatedPoint> intensity_gate(const LidarFrame& frame, const IntensityBand& band) {
    std::vector<GatedPoint> out;
    for (std::size_t i = 0; i < frame.points.size(); ++i)
        if (band.contains(frame.points[i].intensity)) out.push_back({i, frame.points[i].position});
    return out;
}

enum class NeighborSearch { BruteForce, Grid };

struct DbscanParams {
    double eps = 0.10;
    std::size_t min_pts = 5;
    NeighborSearch search = NeighborSearch::BruteForce;
};

/// Clusters and noise as index lists into the clustered point list. Clusters
/// are ordered by their lowest-index core point; members ascend.
struct Partition {
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> noise;
};

namespace detail {

class NeighborIndex {
public:
    NeighborIndex(std::span<const Vec3> pts, double eps, NeighborSearch mode)
        : pts_(pts), eps2_(eps * eps), eps_(eps), mode_(mode) {
        if (mode_ == NeighborSearch::Grid)
            for (std::size_t i = 0; i < pts_.size(); ++i) cells_[cell_of(pts_[i])].push_back(i);
    }

    /// Indices within eps of point i, including i itself.
    void query(std::size_t i, std::vector<std::size_t>& out) const {
        out.clear();
        const Vec3& p = pts_[i];
        if (mode_ == NeighborSearch::BruteForce) {
            for (std::size_t j = 0; j < pts_.size(); ++j)
                if ((pts_[j] - p).squared_norm() <= eps2_) out.push_back(j);
            return;
        }
        const auto c = cell_of(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find(Cell{c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == cells_.end()) continue;
                    for (std::size_t j : it->second)
                        if ((pts_[j] - p).squared_norm() <= eps2_) out.push_back(j);
                }
    }

private:
    using Cell = std::array<std::int64_t, 3>;

    Cell cell_of(const Vec3& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / eps_)),
                static_cast<std::int64_t>(std::floor(p.y / eps_)),
                static_cast<std::int64_t>(std::floor(p.z / eps_))};
    }

    std::span<const Vec3> pts_;
    double eps2_;
    double eps_;
    NeighborSearch mode_;
    std::map<Cell, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Density-based clustering with the Euclidean metric. A point is core when at
/// least min_pts points (itself included) lie within eps. Points are scanned in
/// ascending index order and each new cluster is fully expanded before the
/// next starts, so a border point reachable from two clusters joins the one
/// whose lowest-index core point comes first.
inline Partition dbscan(std::span<const Vec3> points, const DbscanParams& params) {
    constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
    const std::size_t n = points.size();
    std::vector<std::size_t> label(n, kUnassigned);
    std::vector<bool> visited(n, false);
    detail::NeighborIndex index(points, params.eps, params.search);

    Partition out;
    std::vector<std::size_t> nbrs;
    std::vector<std::size_t> nbrs2;
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        index.query(i, nbrs);
        if (nbrs.size() < params.min_pts) continue;

        const std::size_t cid = out.clusters.size();
        out.clusters.emplace_back();
        label[i] = cid;
        std::deque<std::size_t> frontier(nbrs.begin(), nbrs.end());
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop_front();
            if (label[j] == kUnassigned) label[j] = cid;
            if (visited[j]) continue;
            visited[j] = true;
            index.query(j, nbrs2);
            if (nbrs2.size() >= params.min_pts)
                for (std::size_t k : nbrs2)
                    if (!visited[k] || label[k] == kUnassigned) frontier.push_back(k);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kUnassigned)
            out.noise.push_back(i);
        else
            out.clusters[label[i]].push_back(i);
    }
    return out;
}

struct ClusterReport {
    std::size_t id = 0;
    std::vector<std::size_t> member_indices;  // into the frame
    Vec3 centroid{};
    double mean_range = 0.0;
    std::size_t point_count = 0;
    double extent = 0.0;  // largest pairwise member distance
    bool valid = false;
    bool extent_ok = false;
    bool range_ok = false;
};

/// Centroid, mean Euclidean distance from the LiDAR origin and extent of the
/// frame points listed in `members`.
inline ClusterReport summarize_cluster(const LidarFrame& frame, std::span<const std::size_t> members,
                                       std::size_t id = 0) {
    if (members.empty()) throw EmptyCluster();
    ClusterReport r;
    r.id = id;
    r.member_indices.assign(members.begin(), members.end());
    r.point_count = members.size();
    double range_sum = 0.0;
    for (std::size_t m : members) {
        const Vec3& p = frame.points.at(m).position;
        r.centroid += p;
        range_sum += p.norm();
    }
    r.centroid = r.centroid / static_cast<double>(members.size());
    r.mean_range = range_sum / static_cast<double>(members.size());
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            r.extent = std::max(r.extent, distance(frame.points[members[a]].position,
                                                   frame.points[members[b]].position));
    return r;
}

struct RangeGate {
    double min = 0.8;
    double max = 2.0;

    constexpr bool contains(double r) const { return min <= r && r <= max; }
};

inline ClusterReport validate_cluster(ClusterReport report, double max_extent, const RangeGate& gate) {
    report.extent_ok = report.extent <= max_extent;
    report.range_ok = gate.contains(report.mean_range);
    report.valid = report.extent_ok && report.range_ok;
    return report;
}

struct IsolationParams {
    IntensityBand band{230, 255};
    DbscanParams dbscan{};
    double max_extent = 0.25;
    // Wider than the 0.8-2.0 m retro gate: off-centre tape returns sit slightly
    // farther than the tape centroid, so a tape at exactly 2.0 m has a mean
    // member range just above 2.0.
    RangeGate range_gate{0.7, 2.1};
};

/// Gate, cluster, summarize and validate one frame. Reports come back in
/// cluster order with ids 0..k-1.
inline std::vector<ClusterReport> detect(const LidarFrame& frame, const IsolationParams& params) {
    const auto gated = intensity_gate(frame, params.band);
    std::vector<Vec3> pts;
    pts.reserve(gated.size());
    for (const auto& g : gated) pts.push_back(g.position);
    const Partition part = dbscan(pts, params.dbscan);

    std::vector<ClusterReport> reports;
    for (std::size_t c = 0; c < part.clusters.size(); ++c) {
        std::vector<std::size_t> members;
        members.reserve(part.clusters[c].size());
        for (std::size_t k : part.clusters[c]) members.push_back(gated[k].index);
        reports.push_back(validate_cluster(summarize_cluster(frame, members, c), params.max_extent,
                                           params.range_gate));
    }
    return reports;
}

}  // namespace leafscope
