#include "dtunnel/grid_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "dtunnel/errors.hpp"

namespace dtunnel {

namespace {

void put_u64(std::ostream& os, std::uint64_t v)
{
    char bytes[8];
    for (int k = 0; k < 8; ++k)
        bytes[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
    os.write(bytes, 8);
}

void put_f64(std::ostream& os, double v)
{
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64(std::istream& is)
{
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8))
        throw InvalidParameters("grid binary: truncated input");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
        v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return v;
}

double get_f64(std::istream& is)
{
    return std::bit_cast<double>(get_u64(is));
}

} // namespace

void write_grid_csv(std::ostream& os, const PhaseSpaceGrid& grid)
{
    os << "q,p,value\n";
    for (Eigen::Index i = 0; i < grid.n_q(); ++i)
        for (Eigen::Index j = 0; j < grid.n_p(); ++j)
            os << fmt::format("{:.17g},{:.17g},{:.17g}\n", grid.q(i), grid.p(j), grid.values(i, j));
}

void write_grid_binary(std::ostream& os, const PhaseSpaceGrid& grid)
{
    os.write(kGridMagic.data(), kGridMagic.size());
    put_u64(os, static_cast<std::uint64_t>(grid.n_q()));
    put_u64(os, static_cast<std::uint64_t>(grid.n_p()));
    put_f64(os, grid.q_min);
    put_f64(os, grid.q_max);
    put_f64(os, grid.p_min);
    put_f64(os, grid.p_max);
    put_f64(os, grid.time);
    for (Eigen::Index i = 0; i < grid.n_q(); ++i)
        for (Eigen::Index j = 0; j < grid.n_p(); ++j)
            put_f64(os, grid.values(i, j));
}

PhaseSpaceGrid read_grid_binary(std::istream& is)
{
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kGridMagic)
        throw InvalidParameters("grid binary: bad magic");
    const auto n_q = static_cast<Eigen::Index>(get_u64(is));
    const auto n_p = static_cast<Eigen::Index>(get_u64(is));
    const double q_min = get_f64(is), q_max = get_f64(is);
    const double p_min = get_f64(is), p_max = get_f64(is);
    const double time = get_f64(is);
    PhaseSpaceGrid g = PhaseSpaceGrid::zeros(q_min, q_max, p_min, p_max, n_q, n_p);
    g.time = time;
    for (Eigen::Index i = 0; i < n_q; ++i)
        for (Eigen::Index j = 0; j < n_p; ++j)
            g.values(i, j) = get_f64(is);
    return g;
}

} // namespace dtunnel
