// Copyright 2026 The disc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISC_POLYA_GAMMA_HPP
#define DISC_POLYA_GAMMA_HPP

#include "disc/rng.hpp"

namespace disc {

/// E[PG(b, c)] = (b / 2c) tanh(c / 2), with the c -> 0 limit b/4.
double pg_mean(double b, double c);

/// Var[PG(b, c)] = b (sinh c - c) sech^2(c/2) / (4 c^3), limit b/24.
double pg_variance(double b, double c);

/// Exact draw from PG(1, c) via the alternating-series rejection sampler on
/// the tilted Jacobi density (exponential tail / inverse-Gaussian body).
double sample_pg1(double c, Rng& rng);

/// Exact draw from PG(b, c) for integer b >= 0 as a sum of b unit draws;
/// O(b) cost, which is what makes the moment-matched shortcut below
/// worthwhile for large counts. PG(0, c) is a point mass at zero.
double sample_pg(int b, double c, Rng& rng);

/// Approximate PG(b, c) draw: lambda ~ PG(m, c) rescaled to the PG(b, c)
/// mean and variance (exact variance ratio b/m by additivity). The Gaussian
/// error can produce negative values for small b; draws are floored at a
/// tiny positive value since the Gibbs update divides by sigma^-2 + omega.
double sample_pg_approx(int b, double c, Rng& rng, int m = 1);

}  // namespace disc

#endif  // DISC_POLYA_GAMMA_HPP
