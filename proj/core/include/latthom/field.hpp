#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

#include "latthom/lattice.hpp"

namespace latthom {

// Node values u : eps L cap (window) -> R^n stored densely per cell and
// offset index, plus a per-node free/fixed mask. Fixed nodes never change
// under solver updates. A positive `period` makes cell reads wrap modulo
// period Z^d (used for periodic correctors); node positions are never
// wrapped, only storage lookups are.
class Field {
public:
    Field() = default;
    Field(const Lattice& lattice, int eps_den, const CellWindow& window, int period = 0)
        : d_(lattice.d()),
          n_(lattice.n()),
          eps_den_(eps_den),
          num_offsets_(lattice.num_offsets()),
          window_(window),
          period_(period),
          values_(static_cast<std::size_t>(window.count()) * num_offsets_ * n_, 0.0),
          free_(static_cast<std::size_t>(window.count()) * num_offsets_, 0) {}

    // Field covering `region` grown by a halo that accommodates every edge
    // instance anchored inside the region plus the Dirichlet layer eps R.
    static Field over_region(const Lattice& lattice, int eps_den, const Region& region) {
        Eigen::VectorXi clo, chi;
        region.cell_window(eps_den, clo, chi);
        const int halo = static_cast<int>(std::ceil(lattice.range())) + lattice.max_shift() + 1;
        return Field(lattice, eps_den, CellWindow{clo.array() - halo, chi.array() + halo});
    }

    // k Z^d-periodic corrector storage: one fundamental domain [0,k)^d.
    static Field periodic(const Lattice& lattice, int k) {
        return Field(lattice, 1, CellWindow{Eigen::VectorXi::Zero(lattice.d()), Eigen::VectorXi::Constant(lattice.d(), k)},
                     k);
    }

    int d() const { return d_; }
    int n() const { return n_; }
    int eps_den() const { return eps_den_; }
    double eps() const { return 1.0 / static_cast<double>(eps_den_); }
    int num_offsets() const { return num_offsets_; }
    int period() const { return period_; }
    const CellWindow& window() const { return window_; }
    std::int64_t num_nodes() const { return window_.count() * num_offsets_; }

    std::int64_t node_index(const Eigen::VectorXi& cell, int offset) const {
        if (period_ > 0) {
            Eigen::VectorXi w(cell.size());
            for (int i = 0; i < cell.size(); ++i) w[i] = ((cell[i] % period_) + period_) % period_;
            return window_.index(w) * num_offsets_ + offset;
        }
        if (!window_.contains(cell)) throw numerical_error("OutOfHalo", "node lookup outside the field halo");
        return window_.index(cell) * num_offsets_ + offset;
    }

    bool in_window(const Eigen::VectorXi& cell) const { return period_ > 0 || window_.contains(cell); }

    const double* value(std::int64_t node) const { return values_.data() + node * n_; }
    double* value(std::int64_t node) { return values_.data() + node * n_; }
    Eigen::Map<const Eigen::VectorXd> value_vec(const Eigen::VectorXi& cell, int offset) const {
        return Eigen::Map<const Eigen::VectorXd>(value(node_index(cell, offset)), n_);
    }
    void set_value(const Eigen::VectorXi& cell, int offset, const Eigen::VectorXd& v) {
        double* dst = value(node_index(cell, offset));
        for (int c = 0; c < n_; ++c) dst[c] = v[c];
    }

    bool is_free(std::int64_t node) const { return free_[static_cast<std::size_t>(node)] != 0; }
    void set_free(std::int64_t node, bool f) { free_[static_cast<std::size_t>(node)] = f ? 1 : 0; }

    const std::vector<double>& raw_values() const { return values_; }
    std::vector<double>& raw_values() { return values_; }
    const std::vector<std::uint8_t>& free_mask() const { return free_; }

    // Visits every stored node as (cell, offset, node index) in storage order.
    template <typename F>
    void for_each_stored_node(F&& fn) const {
        const std::int64_t cells = window_.count();
        for (std::int64_t ci = 0; ci < cells; ++ci) {
            const Eigen::VectorXi cell = window_.decode(ci);
            for (int off = 0; off < num_offsets_; ++off) fn(cell, off, ci * num_offsets_ + off);
        }
    }

    // Nodal quadrature of |u|^q over a region: sum of (eps^d / #offsets) |u|^q
    // over nodes inside. This is the engine's stand-in for the interpolation
    // integral; the equivalence constant is absorbed into calibrated bounds.
    double nodal_lq_norm_pow(const Lattice& lattice, const Region& region, double q) const;

    // Flat binary layout: magic, d, n, eps denominator, window corners,
    // offset count, period, then row-major float64 node values.
    void write_binary(std::ostream& out) const;
    static Field read_binary(const Lattice& lattice, std::istream& in);
    void write_csv(const Lattice& lattice, std::ostream& out) const;

private:
    int d_ = 0, n_ = 0, eps_den_ = 1, num_offsets_ = 1;
    CellWindow window_;
    int period_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> free_;
};

// Fills the field with g sampled exactly at node positions.
void sample_onto_field(const Lattice& lattice, Field& field,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g);

// Marks as free exactly the nodes in (region)_{-eps R}; everything else is
// fixed (the Dirichlet boundary layer of width eps R).
void mark_dirichlet_free_nodes(const Lattice& lattice, Field& field, const Region& region);

}  // namespace latthom
