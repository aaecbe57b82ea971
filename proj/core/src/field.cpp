#include "latthom/field.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "latthom/common.hpp"

namespace latthom {

double Field::nodal_lq_norm_pow(const Lattice& lattice, const Region& region, double q) const {
    KahanSum sum;
    lattice.for_each_node(eps_den_, region, [&](const Eigen::VectorXi& cell, int off) {
        const double* v = value(node_index(cell, off));
        double norm2 = 0.0;
        for (int c = 0; c < n_; ++c) norm2 += v[c] * v[c];
        sum.add(std::pow(norm2, 0.5 * q));
    });
    const double node_weight = std::pow(eps(), d_) / static_cast<double>(num_offsets_);
    return node_weight * sum.value();
}

namespace {
constexpr std::uint64_t kFieldMagic = 0x4c544846494c4431ULL;  // "LTHFILD1"

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void Field::write_binary(std::ostream& out) const {
    put(out, kFieldMagic);
    put<std::int32_t>(out, d_);
    put<std::int32_t>(out, n_);
    put<std::int32_t>(out, eps_den_);
    put<std::int32_t>(out, num_offsets_);
    put<std::int32_t>(out, period_);
    for (int i = 0; i < d_; ++i) put<std::int64_t>(out, window_.lo[i]);
    for (int i = 0; i < d_; ++i) put<std::int64_t>(out, window_.hi[i]);
    out.write(reinterpret_cast<const char*>(values_.data()),
              static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

Field Field::read_binary(const Lattice& lattice, std::istream& in) {
    if (get<std::uint64_t>(in) != kFieldMagic) throw config_error("BadFieldFile", "not a field binary");
    const int d = get<std::int32_t>(in);
    const int n = get<std::int32_t>(in);
    const int eps_den = get<std::int32_t>(in);
    const int noff = get<std::int32_t>(in);
    const int period = get<std::int32_t>(in);
    if (d != lattice.d() || n != lattice.n() || noff != lattice.num_offsets())
        throw config_error("BadFieldFile", "field header does not match the lattice");
    CellWindow w;
    w.lo.resize(d);
    w.hi.resize(d);
    for (int i = 0; i < d; ++i) w.lo[i] = static_cast<int>(get<std::int64_t>(in));
    for (int i = 0; i < d; ++i) w.hi[i] = static_cast<int>(get<std::int64_t>(in));
    Field f(lattice, eps_den, w, period);
    in.read(reinterpret_cast<char*>(f.values_.data()), static_cast<std::streamsize>(f.values_.size() * sizeof(double)));
    if (!in) throw config_error("BadFieldFile", "truncated field payload");
    return f;
}

void Field::write_csv(const Lattice& lattice, std::ostream& out) const {
    out << "# latthom-csv v1 schema=field\n";
    for (int i = 0; i < d_; ++i) out << "cell" << i << ",";
    out << "offset";
    for (int c = 0; c < n_; ++c) out << ",u" << c;
    out << ",free\n";
    for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
        for (int i = 0; i < d_; ++i) out << cell[i] << ",";
        out << off;
        const double* v = value(node);
        for (int c = 0; c < n_; ++c) out << "," << v[c];
        out << "," << (is_free(node) ? 1 : 0) << "\n";
    });
    (void)lattice;
}

void sample_onto_field(const Lattice& lattice, Field& field,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g) {
    field.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
        const Eigen::VectorXd pos = lattice.node_position(field.eps_den(), cell, off);
        const Eigen::VectorXd v = g(pos);
        double* dst = field.value(node);
        for (int c = 0; c < field.n(); ++c) dst[c] = v[c];
    });
}

void mark_dirichlet_free_nodes(const Lattice& lattice, Field& field, const Region& region) {
    const double layer = lattice.range() / static_cast<double>(field.eps_den());
    field.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
        const Eigen::VectorXd pos = lattice.node_position(field.eps_den(), cell, off);
        field.set_free(node, region.boundary_distance(pos) > layer);
    });
}

}  // namespace latthom
