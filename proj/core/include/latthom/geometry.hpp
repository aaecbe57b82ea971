#pragma once

#include <Eigen/Core>

#include "latthom/common.hpp"

namespace latthom {

// Half-open axis-aligned box [lo, hi). All regions in the engine are boxes;
// membership is componentwise lo <= x < hi.
class Region {
public:
    Region() = default;
    Region(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size()) throw config_error("BadRegion", "corner dimensions differ");
        for (int i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] < hi_[i])) throw config_error("BadRegion", "region must have positive volume");
    }

    static Region cube(int d, double lo, double hi) {
        return Region(Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi));
    }

    int dim() const { return static_cast<int>(lo_.size()); }
    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
        return v;
    }

    double min_side() const {
        double s = hi_[0] - lo_[0];
        for (int i = 1; i < lo_.size(); ++i) s = std::min(s, hi_[i] - lo_[i]);
        return s;
    }

    bool contains(const Eigen::VectorXd& x) const {
        for (int i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] <= x[i] && x[i] < hi_[i])) return false;
        return true;
    }

    // Signed distance to the boundary of the closure: positive inside,
    // negative outside. For a box this is min over faces.
    double boundary_distance(const Eigen::VectorXd& x) const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < lo_.size(); ++i) m = std::min({m, x[i] - lo_[i], hi_[i] - x[i]});
        return m;
    }

    // (A)_{-delta}: inner box offset by delta on every face.
    Region shrink(double delta) const {
        if (!(2.0 * delta < min_side())) throw config_error("EmptyShrink", "shrink offset exceeds half the minimal side");
        return Region(lo_.array() + delta, hi_.array() - delta);
    }

    // (A)_{delta}: outer box offset by delta on every face.
    Region grow(double delta) const { return Region(lo_.array() - delta, hi_.array() + delta); }

    // True when every corner coordinate is a multiple of 1/eps_den.
    bool aligned(int eps_den) const {
        for (int i = 0; i < lo_.size(); ++i) {
            if (!is_integer(lo_[i] * eps_den) || !is_integer(hi_[i] * eps_den)) return false;
        }
        return true;
    }

    // Cell index window [cell_lo, cell_hi) at scale 1/eps_den; requires alignment.
    void cell_window(int eps_den, Eigen::VectorXi& cell_lo, Eigen::VectorXi& cell_hi) const {
        if (!aligned(eps_den)) throw config_error("MisalignedRegion", "region corners must lie on the eps grid");
        const int d = dim();
        cell_lo.resize(d);
        cell_hi.resize(d);
        for (int i = 0; i < d; ++i) {
            cell_lo[i] = static_cast<int>(std::llround(lo_[i] * eps_den));
            cell_hi[i] = static_cast<int>(std::llround(hi_[i] * eps_den));
        }
    }

    // Conservative integer cover for regions with off-grid corners; callers
    // filter cells through contains().
    void cell_window_padded(int eps_den, Eigen::VectorXi& cell_lo, Eigen::VectorXi& cell_hi) const {
        const int d = dim();
        cell_lo.resize(d);
        cell_hi.resize(d);
        for (int i = 0; i < d; ++i) {
            cell_lo[i] = static_cast<int>(std::floor(lo_[i] * eps_den)) - 1;
            cell_hi[i] = static_cast<int>(std::ceil(hi_[i] * eps_den)) + 1;
        }
    }

private:
    static bool is_integer(double v) { return std::abs(v - std::llround(v)) < 1e-9; }

    Eigen::VectorXd lo_, hi_;
};

}  // namespace latthom
