#pragma once

#include "dampkde/simulator.hpp"

#include <iosfwd>
#include <string>

namespace dampkde {

//! CSV layout:
//!   # dt=<dt>, seed=<seed>, model=<name>, t0=<t0>
//!   t,x,y,db
//! one row per sample; the last row has an empty db field.
void
write_path_csv(std::ostream& out, const Path& path);

Path
read_path_csv(std::istream& in);

//! Binary columnar layout (little-endian):
//!   char[8] "DKPATH01", u64 n, f64 t0, f64 dt, u64 seed,
//!   u32 name_len, name bytes, f64 x[n], f64 y[n], f64 db[n-1].
void
write_path_binary(std::ostream& out, const Path& path);

Path
read_path_binary(std::istream& in);

//! Dispatches on extension: ".csv" or anything else for binary.
void
save_path(const std::string& filename, const Path& path);

Path
load_path(const std::string& filename);

} // namespace dampkde
