#pragma once

#include <cstddef>
#include <string_view>

namespace pwl {

/// How the generated vector eta becomes per-sample linear weights.
///   Straightforward: xi = eta, logit = xi . x
///   ReallocI:   rho = u (*) x
///   ReallocII:  rho = u + x
///   ReallocIII: rho = u (*) (x + v)
///   ReallocIV:  rho = (u (*) x) + v
/// with logit = w . rho for the reallocation variants; (u, v) split eta for
/// III and IV.
enum class HeadVariant { Straightforward, ReallocI, ReallocII, ReallocIII, ReallocIV };

bool is_reallocation(HeadVariant variant);

/// Width of eta for `input_dim` original features: D, or 2D for III/IV.
std::size_t eta_width(HeadVariant variant, std::size_t input_dim);

std::string_view variant_name(HeadVariant variant);

}  // namespace pwl
