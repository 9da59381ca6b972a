#ifndef DTUNNEL_GRID_IO_HPP
#define DTUNNEL_GRID_IO_HPP

#include <array>
#include <cstdint>
#include <iosfwd>

#include "dtunnel/fokker_planck.hpp"

namespace dtunnel {

/// "DTWGRID1"
inline constexpr std::array<char, 8> kGridMagic{'D', 'T', 'W', 'G', 'R', 'I', 'D', '1'};
inline constexpr std::size_t kGridHeaderBytes = 64;

/// q,p,value triples with a header row, one cell per line in row-major order
/// (q index outer), 17 significant digits, LF line endings.
void write_grid_csv(std::ostream& os, const PhaseSpaceGrid& grid);

/// Little-endian layout (see docs/grid_format.md):
///   0  char[8]  magic "DTWGRID1"
///   8  uint64   n_q
///  16  uint64   n_p
///  24  float64  q_min, q_max, p_min, p_max
///  56  float64  time
///  64  float64  values[n_q][n_p], row-major (q index outer)
void write_grid_binary(std::ostream& os, const PhaseSpaceGrid& grid);

/// Reads the binary layout back; throws InvalidParameters on a bad header or
/// truncated data.
PhaseSpaceGrid read_grid_binary(std::istream& is);

} // namespace dtunnel

#endif // DTUNNEL_GRID_IO_HPP
