#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "affine/path.hpp"
#include "affine/riccati.hpp"
#include "affine/timechange.hpp"
#include "affine/types.hpp"
#include "affine/verify.hpp"

namespace affine {

// Every artifact starts with '#' comment lines echoing the configuration
// that produced it (command, parameter file, seed, tolerances); values use
// the round-trip decimal format throughout.
void write_run_header(std::ostream& os,
                      const std::vector<std::pair<std::string, std::string>>& kv);

// One row per record time: t, then the state coordinates.
void write_path_table(std::ostream& os, const ProcessPath& p);

// Raw driver dump: the grid section, then the jump events.
void write_driver_table(std::ostream& os, const CadlagPath& p);

// One row per query time: t, phi, then psi coordinate pairs (re, im each).
void write_riccati_table(std::ostream& os, const RiccatiSolution& s);

// One row per comparison point; the verdict lines come from to_string().
void write_compare_table(std::ostream& os, const CompareReport& r);
void write_moment_table(std::ostream& os, const MomentReport& r);

// Transform arguments, one per line: 2 d numbers (re im per coordinate),
// '#' comments and blank lines ignored.
std::vector<CVec> read_u0_list(const std::string& path, int d);

// Comma or whitespace separated reals.
Vec parse_real_list(const std::string& text, const std::string& what);

}  // namespace affine
