#pragma once

#include <cstdint>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

// ---- Sierpinski binning ----
//
// Recursive partition of the simplex: whenever some coordinate exceeds 0.5
// (strictly), descend into that corner and reparameterize; otherwise stop in
// the catch-all bin at the current level. A bin is identified by its path of
// choices (1..L for corners, 0 for the catch-all terminator); full-depth
// paths carry no terminator.

struct SierpinskiScheme {
  int L = 0;
  int q = 1;  // recursion depth
};

using SierpinskiPath = std::vector<int>;

// Descends up to q levels and returns the path identifying the bin.
SierpinskiPath sierpinski_assign(const Vector& s, int L, int q);

// (L^{q+1} - 1) / (L - 1)
long sierpinski_bin_count(int L, int q);

// All reachable paths in deterministic order; index of a path in this list is
// its bin id.
std::vector<SierpinskiPath> sierpinski_enumerate(int L, int q);

int sierpinski_bin_index(const Vector& s, int L, int q);

// ---- Grid-style binning ----

struct GridScheme {
  int L = 0;
  int K = 1;  // 1/tau
};

// Lexicographic-min tuple k with s in b_k; throws NoBinFound only on an
// implementation bug (the bins exhaust the simplex).
std::vector<int> grid_assign(const Vector& s, int K);

// Brute-force |I| and tuple list for small (L, K).
std::vector<std::vector<int>> grid_enumerate(int L, int K);

int grid_bin_index(const Vector& s, int L, int K);

// ---- Projection histogram binning ----

struct ProjectionHBScheme {
  int B = 0;
  Matrix q_vectors;                // B x L unit directions (row b)
  std::vector<double> thresholds;  // size B; last entry is the 1.01 sentinel
  int interior_quota = 0;          // floor((n+1)/B)
};

enum class DirectionPolicy { canonical_cycle, seeded_random };

Matrix default_directions(int L, int B, DirectionPolicy policy, std::uint64_t seed = 0);

// Sequentially learns B-1 projection thresholds, each capturing the
// floor((n+1)/B) lowest remaining projections; the final bin is the residual.
ProjectionHBScheme fit_projection_hb(const Matrix& simplex_points, int B,
                                     const Matrix& q_vectors);

// First threshold crossed: min{b : s . q_b < T_b}.
int projection_bin_index(const ProjectionHBScheme& scheme, const Vector& s);

// True when the point lies exactly on a learnt threshold (excluded from
// pi_hat estimation).
bool projection_on_boundary(const ProjectionHBScheme& scheme, const Vector& s);

// ---- Canonical model ----

enum class CanonicalSchemeKind { sierpinski, grid, projection_hb };

struct CanonicalScheme {
  CanonicalSchemeKind kind = CanonicalSchemeKind::sierpinski;
  SierpinskiScheme sierpinski;
  GridScheme grid;
  ProjectionHBScheme projection;
};

struct CanonicalModel {
  int L = 0;
  CanonicalScheme scheme;
  Matrix pi_hat;  // B x L, rows on the simplex (uniform for empty bins)
};

int canonical_bin_count(const CanonicalScheme& scheme, int L);
int canonical_bin_index(const CanonicalScheme& scheme, const Vector& s);

CanonicalModel fit_canonical(const CanonicalScheme& scheme, const Dataset& data);

Vector predict_canonical(const CanonicalModel& model, const Vector& s);
Matrix predict_canonical_rows(const CanonicalModel& model, const Matrix& scores);

void check_simplex(const Vector& s);

}  // namespace mcal
