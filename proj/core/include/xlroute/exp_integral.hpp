#pragma once

namespace xlr {

// Exponential integral
//
//          inf
//           /      -t
//          |      e
// E (x) =  |  dt ----- ,   x > 0.
//  1       |       t
//          /
//           x
//
// Power series below x = 1, modified-Lentz continued fraction above.
// Relative accuracy is ~1e-14 over the whole domain.
double expIntegralE1(double x);

// exp(x) * E1(x). The continued fraction yields this product directly, so it
// stays finite for arguments where exp(x) alone would overflow; the rate
// closed forms use this scaled form exclusively.
double expScaledE1(double x);

}  // namespace xlr
