#include "latthom/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

namespace latthom {

namespace {

bool close(double a, double b) { return std::abs(a - b) < 1e-9; }

bool same_point(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i)
        if (!close(a[i], b[i])) return false;
    return true;
}

// Decompose a lattice point y = q_i + shift; returns false if y is not on L.
bool decompose(const std::vector<Eigen::VectorXd>& offsets, const Eigen::VectorXd& y, int& offset_index,
               Eigen::VectorXi& shift) {
    for (int i = 0; i < static_cast<int>(offsets.size()); ++i) {
        Eigen::VectorXd delta = y - offsets[i];
        bool integral = true;
        for (int c = 0; c < delta.size() && integral; ++c) integral = close(delta[c], std::round(delta[c]));
        if (integral) {
            offset_index = i;
            shift = delta.unaryExpr([](double v) { return std::round(v); }).cast<int>();
            return true;
        }
    }
    return false;
}

// Undirected BFS over (cell, offset) nodes within a cell window, using all
// integer shifts of the given edge subset whose endpoints fall inside.
std::vector<char> bfs_component(const LatticeSpec& spec, const std::vector<int>& edge_subset,
                                const CellWindow& window, int max_shift,
                                const std::function<bool(const Eigen::VectorXi&, int)>& node_in_graph,
                                const Eigen::VectorXi& start_cell, int start_offset) {
    const int k = static_cast<int>(spec.offsets.size());
    const std::int64_t nnodes = window.count() * k;
    std::vector<char> visited(nnodes, 0);
    auto node_id = [&](const Eigen::VectorXi& z, int off) { return window.index(z) * k + off; };

    std::vector<std::vector<std::int64_t>> adj(nnodes);
    CellWindow anchors{window.lo.array() - max_shift, window.hi.array() + max_shift};
    anchors.for_each([&](const Eigen::VectorXi& z) {
        for (int b : edge_subset) {
            const EdgeOffset& e = spec.edges0[b];
            Eigen::VectorXi tail_cell = z;
            Eigen::VectorXi head_cell = z + e.y_shift;
            if (!window.contains(tail_cell) || !window.contains(head_cell)) continue;
            if (!node_in_graph(tail_cell, e.x_offset) || !node_in_graph(head_cell, e.y_offset)) continue;
            const std::int64_t a = node_id(tail_cell, e.x_offset);
            const std::int64_t c = node_id(head_cell, e.y_offset);
            adj[a].push_back(c);
            adj[c].push_back(a);
        }
    });

    if (!window.contains(start_cell) || !node_in_graph(start_cell, start_offset)) return visited;
    std::deque<std::int64_t> queue{node_id(start_cell, start_offset)};
    visited[queue.front()] = 1;
    while (!queue.empty()) {
        const std::int64_t cur = queue.front();
        queue.pop_front();
        for (std::int64_t nb : adj[cur]) {
            if (!visited[nb]) {
                visited[nb] = 1;
                queue.push_back(nb);
            }
        }
    }
    return visited;
}

}  // namespace

Lattice Lattice::validate(LatticeSpec spec) {
    if (spec.d < 2) throw config_error("BadOffset", "dimension must be at least 2");
    if (spec.n < 1) throw config_error("BadOffset", "codomain dimension must be at least 1");
    if (spec.offsets.empty()) throw config_error("BadOffset", "offset list is empty");
    if (spec.edges0.empty()) throw config_error("BadOffset", "generating edge set is empty");
    if (spec.nn0_mask.size() != spec.edges0.size())
        throw config_error("BadOffset", "nn0 mask length does not match edges0");

    for (const auto& q : spec.offsets) {
        if (q.size() != spec.d) throw config_error("BadOffset", "offset dimension mismatch");
        for (int c = 0; c < spec.d; ++c)
            if (q[c] < -1e-9 || q[c] >= 1.0 - 1e-9) throw config_error("BadOffset", "offsets must lie in [0,1)^d");
    }
    if (spec.offsets[0].norm() > 1e-9) throw config_error("BadOffset", "q_1 must be the origin");
    for (std::size_t i = 0; i < spec.offsets.size(); ++i)
        for (std::size_t j = i + 1; j < spec.offsets.size(); ++j)
            if (same_point(spec.offsets[i], spec.offsets[j])) throw config_error("BadOffset", "duplicate node offsets");

    int max_shift = 0;
    for (auto& e : spec.edges0) {
        if (e.x.size() != spec.d || e.y.size() != spec.d) throw config_error("BadOffset", "edge dimension mismatch");
        if (same_point(e.x, e.y)) throw config_error("BadOffset", "edge with coinciding endpoints");
        Eigen::VectorXi shift;
        int oi = -1;
        if (!decompose(spec.offsets, e.x, oi, shift) || shift.cwiseAbs().maxCoeff() != 0)
            throw config_error("BadOffset", "edge tail x_b is not one of the node offsets");
        e.x_offset = oi;
        if (!decompose(spec.offsets, e.y, e.y_offset, e.y_shift))
            throw config_error("BadOffset", "edge head y_b is not a lattice point");
        e.length = (e.y - e.x).norm();
        e.dir = (e.y - e.x) / e.length;
        max_shift = std::max(max_shift, e.y_shift.cwiseAbs().maxCoeff());
    }

    // Normalize the generating edges to a canonical order (reverse-lex on the
    // head, then the tail), so relabelled inputs validate to the same object
    // and every downstream value is independent of the input ordering.
    {
        std::vector<std::size_t> order(spec.edges0.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto key_less = [&](std::size_t a, std::size_t b) {
            const EdgeOffset& ea = spec.edges0[a];
            const EdgeOffset& eb = spec.edges0[b];
            for (int c = spec.d - 1; c >= 0; --c) {
                if (!close(ea.y[c], eb.y[c])) return ea.y[c] < eb.y[c];
            }
            for (int c = spec.d - 1; c >= 0; --c) {
                if (!close(ea.x[c], eb.x[c])) return ea.x[c] < eb.x[c];
            }
            return false;
        };
        std::stable_sort(order.begin(), order.end(), key_less);
        std::vector<EdgeOffset> edges;
        std::vector<bool> mask;
        edges.reserve(order.size());
        for (std::size_t i : order) {
            edges.push_back(spec.edges0[i]);
            mask.push_back(spec.nn0_mask[i]);
        }
        spec.edges0 = std::move(edges);
        spec.nn0_mask = std::move(mask);
    }

    std::vector<int> nn_edges;
    for (std::size_t b = 0; b < spec.edges0.size(); ++b)
        if (spec.nn0_mask[b]) nn_edges.push_back(static_cast<int>(b));
    if (nn_edges.empty()) throw config_error("DisconnectedNN", "nn0 mask selects no edges");

    // Connectivity of (L, nn) checked on the window [-2,3)^d: the origin must
    // reach every offset node of the central cell and its own unit translates;
    // periodicity then connects the infinite graph.
    CellWindow window{Eigen::VectorXi::Constant(spec.d, -2), Eigen::VectorXi::Constant(spec.d, 3)};
    auto all_nodes = [](const Eigen::VectorXi&, int) { return true; };
    Eigen::VectorXi origin = Eigen::VectorXi::Zero(spec.d);
    std::vector<char> reached = bfs_component(spec, nn_edges, window, max_shift, all_nodes, origin, 0);
    const int k = static_cast<int>(spec.offsets.size());
    auto is_reached = [&](const Eigen::VectorXi& z, int off) { return reached[window.index(z) * k + off] != 0; };
    for (int i = 0; i < k; ++i)
        if (!is_reached(origin, i)) throw config_error("DisconnectedNN", "nn family does not connect the unit cell");
    for (int j = 0; j < spec.d; ++j) {
        Eigen::VectorXi zp = origin, zm = origin;
        zp[j] = 1;
        zm[j] = -1;
        if (!is_reached(zp, 0) || !is_reached(zm, 0))
            throw config_error("DisconnectedNN", "nn family does not connect neighbouring cells");
    }

    Lattice lat;
    lat.spec_ = std::move(spec);
    lat.max_shift_ = max_shift;
    lat.range_ = compute_range(lat.spec_);
    return lat;
}

InteractionRange compute_range(const LatticeSpec& spec) {
    const int d = spec.d;
    const int k = static_cast<int>(spec.offsets.size());

    double max_head = 0.0;
    int max_shift = 0;
    for (const auto& e : spec.edges0) {
        max_head = std::max(max_head, e.y.norm());
        max_shift = std::max(max_shift, e.y_shift.cwiseAbs().maxCoeff());
    }

    std::vector<double> candidates{4.0 * std::sqrt(static_cast<double>(d))};
    CellWindow nodes{Eigen::VectorXi::Constant(d, -2), Eigen::VectorXi::Constant(d, 3)};
    nodes.for_each([&](const Eigen::VectorXi& z) {
        for (int i = 0; i < k; ++i) candidates.push_back(4.0 * (z.cast<double>() + spec.offsets[i]).norm());
    });
    for (const auto& e : spec.edges0) candidates.push_back(e.y.norm());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end(), [](double a, double b) { return close(a, b); }),
                     candidates.end());

    std::vector<int> nn_edges;
    for (std::size_t b = 0; b < spec.edges0.size(); ++b)
        if (spec.nn0_mask[b]) nn_edges.push_back(static_cast<int>(b));

    // Target vertex set: L cap [0,1]^d (closed cube).
    std::vector<std::pair<Eigen::VectorXi, int>> targets;
    CellWindow corner{Eigen::VectorXi::Zero(d), Eigen::VectorXi::Constant(d, 2)};
    corner.for_each([&](const Eigen::VectorXi& z) {
        for (int i = 0; i < k; ++i) {
            bool inside = true;
            for (int c = 0; c < d && inside; ++c) {
                const double pos = z[c] + spec.offsets[i][c];
                inside = pos > -1e-9 && pos < 1.0 + 1e-9;
            }
            if (inside) targets.emplace_back(z, i);
        }
    });

    for (double R : candidates) {
        if (R + 1e-9 < max_head) continue;                                     // property (b)
        if (R + 1e-9 < 4.0 * std::sqrt(static_cast<double>(d))) continue;      // forced by (a)
        const double radius = R / 4.0 + 1e-9;
        const int reach = static_cast<int>(std::ceil(radius)) + 1;
        CellWindow ball_window{Eigen::VectorXi::Constant(d, -reach), Eigen::VectorXi::Constant(d, reach + 1)};
        auto in_ball = [&](const Eigen::VectorXi& z, int off) {
            return (z.cast<double>() + spec.offsets[off]).norm() <= radius;
        };
        std::vector<char> reached =
            bfs_component(spec, nn_edges, ball_window, max_shift, in_ball, Eigen::VectorXi::Zero(d), 0);
        bool all_connected = true;
        for (const auto& [z, off] : targets) {
            if (!reached[ball_window.index(z) * k + off]) {
                all_connected = false;
                break;
            }
        }
        if (all_connected) return InteractionRange{R};
    }
    throw numerical_error("RangeSearchExhausted", "no candidate interaction range satisfies both properties");
}

LatticeSpec lattice_preset(const std::string& name, int d, int n) {
    auto unit = [&](int i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        v[i] = 1.0;
        return v;
    };
    LatticeSpec spec;
    spec.d = d;
    if (name == "zd-nn" || name == "zd-range2") {
        spec.n = (n > 0) ? n : 1;
        spec.offsets = {Eigen::VectorXd::Zero(d)};
        for (int i = 0; i < d; ++i) {
            spec.edges0.push_back({Eigen::VectorXd::Zero(d), unit(i)});
            spec.nn0_mask.push_back(true);
        }
        if (name == "zd-range2") {
            for (int i = 0; i < d; ++i) {
                spec.edges0.push_back({Eigen::VectorXd::Zero(d), 2.0 * unit(i)});
                spec.nn0_mask.push_back(false);
            }
        }
        return spec;
    }
    if (name == "kagome") {
        if (d != 2) throw config_error("ConfigInvalid", "kagome preset is two-dimensional");
        spec.n = (n > 0) ? n : 1;
        Eigen::Vector2d q1(0.0, 0.0), q2(0.5, 0.0), q3(0.0, 0.5);
        spec.offsets = {q1, q2, q3};
        auto add = [&](const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
            spec.edges0.push_back({x, y});
            spec.nn0_mask.push_back(true);
        };
        add(q1, q2);
        add(q2, Eigen::Vector2d(1.0, 0.0));
        add(q1, q3);
        add(q3, Eigen::Vector2d(0.0, 1.0));
        add(q2, q3);
        add(q3, Eigen::Vector2d(-0.5, 1.0));
        return spec;
    }
    if (name == "zd-diag") {
        if (d != 2) throw config_error("ConfigInvalid", "zd-diag preset is two-dimensional");
        spec.n = (n > 0) ? n : 2;
        spec.offsets = {Eigen::VectorXd::Zero(2)};
        std::vector<Eigen::Vector2d> heads = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
        for (std::size_t i = 0; i < heads.size(); ++i) {
            spec.edges0.push_back({Eigen::VectorXd::Zero(2), heads[i]});
            spec.nn0_mask.push_back(i < 4);
        }
        return spec;
    }
    throw config_error("ConfigInvalid", "unknown lattice preset '" + name + "'");
}

bool Lattice::is_hypercubic_nn() const {
    if (num_offsets() != 1 || num_edges() != d()) return false;
    std::vector<bool> seen(d(), false);
    for (int b = 0; b < num_edges(); ++b) {
        const EdgeOffset& e = spec_.edges0[b];
        if (!spec_.nn0_mask[b] || e.x.norm() > 1e-9) return false;
        int axis = -1;
        for (int c = 0; c < d(); ++c) {
            if (close(e.y[c], 1.0)) {
                if (axis >= 0) return false;
                axis = c;
            } else if (!close(e.y[c], 0.0)) {
                return false;
            }
        }
        if (axis < 0 || seen[axis]) return false;
        seen[axis] = true;
    }
    return true;
}

bool Lattice::has_unit_edges() const {
    if (num_offsets() != 1) return false;
    std::vector<bool> seen(d(), false);
    for (int b = 0; b < num_edges(); ++b) {
        const EdgeOffset& e = spec_.edges0[b];
        if (e.x.norm() > 1e-9) continue;
        int axis = -1;
        bool unit = true;
        for (int c = 0; c < d(); ++c) {
            if (close(e.y[c], 1.0)) {
                if (axis >= 0) unit = false;
                axis = c;
            } else if (!close(e.y[c], 0.0)) {
                unit = false;
            }
        }
        if (unit && axis >= 0) seen[axis] = true;
    }
    return std::all_of(seen.begin(), seen.end(), [](bool v) { return v; });
}

std::string lattice_to_json(const LatticeSpec& spec) {
    nlohmann::json j;
    j["d"] = spec.d;
    j["n"] = spec.n;
    j["offsets"] = nlohmann::json::array();
    for (const auto& q : spec.offsets) {
        std::vector<double> v(q.data(), q.data() + q.size());
        j["offsets"].push_back(v);
    }
    j["edges0"] = nlohmann::json::array();
    for (std::size_t b = 0; b < spec.edges0.size(); ++b) {
        const auto& e = spec.edges0[b];
        nlohmann::json je;
        je["x"] = std::vector<double>(e.x.data(), e.x.data() + e.x.size());
        je["y"] = std::vector<double>(e.y.data(), e.y.data() + e.y.size());
        je["nn"] = static_cast<bool>(spec.nn0_mask[b]);
        j["edges0"].push_back(je);
    }
    return j.dump();
}

LatticeSpec lattice_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    LatticeSpec spec;
    spec.d = j.at("d").get<int>();
    spec.n = j.at("n").get<int>();
    for (const auto& q : j.at("offsets")) {
        Eigen::VectorXd v(spec.d);
        for (int c = 0; c < spec.d; ++c) v[c] = q.at(c).get<double>();
        spec.offsets.push_back(v);
    }
    for (const auto& je : j.at("edges0")) {
        EdgeOffset e;
        e.x.resize(spec.d);
        e.y.resize(spec.d);
        for (int c = 0; c < spec.d; ++c) {
            e.x[c] = je.at("x").at(c).get<double>();
            e.y[c] = je.at("y").at(c).get<double>();
        }
        spec.edges0.push_back(e);
        spec.nn0_mask.push_back(je.value("nn", true));
    }
    return spec;
}

}  // namespace latthom
