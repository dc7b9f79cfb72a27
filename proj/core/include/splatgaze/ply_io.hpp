#pragma once

#include <filesystem>

#include "splatgaze/scene.hpp"

namespace splatgaze {

// Binary little-endian PLY, element `vertex` with float properties
//   x y z, opacity (logit), scale_0..2 (log), rot_0..3 (w,x,y,z),
//   ch_0..ch_{N-1}
// in exactly that order. Stored scales/opacities are log/logit; the returned
// set is linear (exp / logistic applied). Throws InputError naming the
// offending element on malformed headers, schema mismatches, short files, or
// non-finite values.
GaussianSet load_gaussians(const std::filesystem::path& path);

void save_gaussians(const GaussianSet& set, const std::filesystem::path& path);

} // namespace splatgaze
