#pragma once

// Exact increment laws of the driving process B + aY.
//
// Variance convention: B has generator Delta (not Delta/2), so each
// coordinate of a Brownian increment over dt has variance 2*dt. The stable
// part Y is isotropic with E exp(i xi.Y_t) = exp(-t |xi|^alpha), built by
// subordination: Y_dt = sqrt(2 S) N with S a positive (alpha/2)-stable
// variable, E exp(-lambda S) = exp(-dt lambda^(alpha/2)).

#include <span>
#include <vector>

#include "nlfk/rng.hpp"

namespace nlfk {

/// Writes d independent N(0, 2 dt) draws into out.
void gaussian_increment(RngStream& rng, double dt, std::span<double> out);
std::vector<double> gaussian_increment(RngStream& rng, double dt, int d);

/// One-sided (alpha/2)-stable variable with Laplace transform
/// exp(-dt lambda^(alpha/2)), sampled with Kanter's form of the
/// Chambers-Mallows-Stuck construction.
double subordinator_increment(RngStream& rng, double dt, double alpha);

/// Adds a * Y_dt to out (one subordinator draw, d normals). No draws are
/// consumed when a == 0.
void add_stable_increment(RngStream& rng, double dt, double alpha, double a, std::span<double> out);
std::vector<double> stable_increment(RngStream& rng, double dt, double alpha, double a, int d);

/// Direct symmetric alpha-stable draw in one dimension (CMS), characteristic
/// function exp(-|xi|^alpha). Independent of the subordinated route.
double symmetric_stable_cms(RngStream& rng, double alpha);

}  // namespace nlfk
