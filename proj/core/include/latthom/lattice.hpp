#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "latthom/geometry.hpp"

namespace latthom {

// One generating edge b = [x_b, y_b] with x_b in the unit cell Y = [0,1)^d.
struct EdgeOffset {
    Eigen::VectorXd x;  // tail, must coincide with one of the node offsets
    Eigen::VectorXd y;  // head, any lattice point != x

    // Filled during validation.
    double length = 0.0;
    Eigen::VectorXd dir;      // (y - x) / |y - x|
    int x_offset = -1;        // index of x in the offset list
    int y_offset = -1;        // index i with y = q_i + shift
    Eigen::VectorXi y_shift;  // integer cell shift of the head
};

// Raw description of a Z^d-periodic multi-lattice with oriented generating
// edges and the connected coercive sub-family nn0.
struct LatticeSpec {
    int d = 2;  // spatial dimension, >= 2
    int n = 1;  // codomain dimension, >= 1
    std::vector<Eigen::VectorXd> offsets;  // q_1 = 0, pairwise distinct, in [0,1)^d
    std::vector<EdgeOffset> edges0;
    std::vector<bool> nn0_mask;  // marks edges0 entries belonging to the nn family
};

struct InteractionRange {
    double R = 0.0;
};

// Integer cell box [lo, hi) with row-major linear indexing (first coordinate
// most significant). Enumeration order of every loop in the engine.
struct CellWindow {
    Eigen::VectorXi lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    std::int64_t count() const {
        std::int64_t c = 1;
        for (int i = 0; i < lo.size(); ++i) c *= std::max<std::int64_t>(0, hi[i] - lo[i]);
        return c;
    }
    bool contains(const Eigen::VectorXi& z) const {
        for (int i = 0; i < lo.size(); ++i)
            if (z[i] < lo[i] || z[i] >= hi[i]) return false;
        return true;
    }
    std::int64_t index(const Eigen::VectorXi& z) const {
        std::int64_t idx = 0;
        for (int i = 0; i < lo.size(); ++i) idx = idx * (hi[i] - lo[i]) + (z[i] - lo[i]);
        return idx;
    }
    Eigen::VectorXi decode(std::int64_t idx) const {
        Eigen::VectorXi z(lo.size());
        for (int i = static_cast<int>(lo.size()) - 1; i >= 0; --i) {
            const std::int64_t w = hi[i] - lo[i];
            z[i] = static_cast<int>(lo[i] + idx % w);
            idx /= w;
        }
        return z;
    }
    template <typename F>
    void for_each(F&& fn) const {
        const std::int64_t total = count();
        for (std::int64_t i = 0; i < total; ++i) fn(decode(i));
    }
};

enum class SumConvention {
    ZAnchored,      // anchors z in eps Z^d within the region, every b in E0
    EdgeContained,  // both endpoints of z + eps*b inside the region
};

struct EdgeInstance {
    Eigen::VectorXi cell;  // anchor z / eps
    int b = 0;             // index into edges0
};

// Validated, immutable lattice. Safe for concurrent reads.
class Lattice {
public:
    // Checks offsets and edge decompositions (BadOffset) and connectivity of
    // (L, nn) by BFS on the window [-2,3)^d (DisconnectedNN), then computes
    // the interaction range R.
    static Lattice validate(LatticeSpec spec);

    const LatticeSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }
    int n() const { return spec_.n; }
    int num_offsets() const { return static_cast<int>(spec_.offsets.size()); }
    int num_edges() const { return static_cast<int>(spec_.edges0.size()); }
    const EdgeOffset& edge(int b) const { return spec_.edges0[b]; }
    bool is_nn(int b) const { return spec_.nn0_mask[b]; }
    const Eigen::VectorXd& offset(int i) const { return spec_.offsets[i]; }
    double range() const { return range_.R; }
    const InteractionRange& interaction_range() const { return range_; }

    // Max cell-shift magnitude any edge head can reach; halo sizing.
    int max_shift() const { return max_shift_; }

    bool is_hypercubic_nn() const;  // exactly (Z^d, unit edges e_1..e_d)
    bool has_unit_edges() const;    // single offset and [0, e_i] present for all i

    // Deterministic edge enumeration: lexicographic in the anchor cell, then
    // edge index. The same order is used by every assembly loop.
    template <typename F>
    void for_each_edge(int eps_den, const Region& region, SumConvention conv, F&& fn) const {
        Eigen::VectorXi clo, chi;
        region.cell_window(eps_den, clo, chi);
        if (conv == SumConvention::ZAnchored) {
            CellWindow w{clo, chi};
            const int nb = num_edges();
            w.for_each([&](const Eigen::VectorXi& z) {
                for (int b = 0; b < nb; ++b) fn(z, b);
            });
            return;
        }
        // Edge-contained: scan a grown window and keep edges with both node
        // positions (z + x_b), (z + y_b) inside the scaled region [lo, hi).
        const int pad = max_shift_ + 1;
        CellWindow w{clo.array() - pad, chi.array() + pad};
        const int nb = num_edges();
        const Eigen::VectorXd slo = clo.cast<double>();
        const Eigen::VectorXd shi = chi.cast<double>();
        w.for_each([&](const Eigen::VectorXi& z) {
            for (int b = 0; b < nb; ++b) {
                const EdgeOffset& e = spec_.edges0[b];
                bool inside = true;
                for (int i = 0; i < spec_.d && inside; ++i) {
                    const double tail = z[i] + e.x[i];
                    const double head = z[i] + e.y[i];
                    inside = tail > slo[i] - 1e-9 && tail < shi[i] - 1e-9 && head > slo[i] - 1e-9 &&
                             head < shi[i] - 1e-9;
                }
                if (inside) fn(z, b);
            }
        });
    }

    std::vector<EdgeInstance> edges_in_region(int eps_den, const Region& region, SumConvention conv) const {
        std::vector<EdgeInstance> out;
        for_each_edge(eps_den, region, conv, [&](const Eigen::VectorXi& z, int b) { out.push_back({z, b}); });
        return out;
    }

    // Nodes of eps L inside the region, as (cell, offset) pairs in the same
    // lexicographic order.
    template <typename F>
    void for_each_node(int eps_den, const Region& region, F&& fn) const {
        Eigen::VectorXi clo, chi;
        region.cell_window(eps_den, clo, chi);
        CellWindow w{clo.array() - 1, chi.array() + 1};
        const int k = num_offsets();
        const Eigen::VectorXd slo = clo.cast<double>();
        const Eigen::VectorXd shi = chi.cast<double>();
        w.for_each([&](const Eigen::VectorXi& z) {
            for (int i = 0; i < k; ++i) {
                bool inside = true;
                for (int c = 0; c < spec_.d && inside; ++c) {
                    const double pos = z[c] + spec_.offsets[i][c];
                    inside = pos > slo[c] - 1e-9 && pos < shi[c] - 1e-9;
                }
                if (inside) fn(z, i);
            }
        });
    }

    // Node position in physical coordinates: eps * (cell + q_i).
    Eigen::VectorXd node_position(int eps_den, const Eigen::VectorXi& cell, int offset) const {
        return (cell.cast<double>() + spec_.offsets[offset]) / static_cast<double>(eps_den);
    }

private:
    Lattice() = default;

    LatticeSpec spec_;
    InteractionRange range_;
    int max_shift_ = 0;
};

// Computes the minimal admissible interaction range from the finite candidate
// set {4|x| : x a node in [-2,3)^d} u {|y_b|} u {4 sqrt(d)}: the subgraph of
// nn edges with both endpoint norms <= R/4 must connect L cap [0,1]^d, and
// R >= max |y_b|.
InteractionRange compute_range(const LatticeSpec& spec);

// Named presets: "zd-nn", "zd-range2", "kagome", "zd-diag".
LatticeSpec lattice_preset(const std::string& name, int d = 2, int n = -1);

// JSON (de)serialization of LatticeSpec documents:
// {"d":2,"n":1,"offsets":[[0,0]],"edges0":[{"x":[0,0],"y":[1,0],"nn":true},...]}
std::string lattice_to_json(const LatticeSpec& spec);
LatticeSpec lattice_from_json(const std::string& text);

}  // namespace latthom
