#pragma once

// Stochastic Cramer-Rao bound for the full real parameter vector
//
//   theta = (beta_1..beta_V,
//            O_11..O_VV, Re O_12, Im O_12, ..., Re O_{V-1,V}, Im O_{V-1,V},
//            delta_1..delta_W)
//
// through the Slepian-Bangs formula FIM_ij = L trace[G^{-1} dG_i G^{-1} dG_j].
// The direction bound is the beta block of the inverse of the full FIM, so
// the nuisance parameters are accounted for.

#include <string>
#include <vector>

#include "doa/likelihood.hpp"

namespace doa {

struct FisherInformation {
  RMat matrix;
  std::vector<std::string> names;
};

/// Number of real coordinates, V + V^2 + W.
Index parameter_count(Index sources, Index sensors);

/// Human-readable name of coordinate i ("beta[1]", "Re O[1,2]", "delta[3]").
std::string parameter_name(Index sources, Index sensors, Index i);

/// Exact derivative of G with respect to coordinate i. Throws
/// std::out_of_range for a bad index.
Mat dG_dtheta(const ModelParams& params, Index i);

FisherInformation fisher_information(const ModelParams& params, Index snapshots);

/// Variance lower bounds for the directions, radians^2. Throws
/// SingularMatrixError when the FIM is not invertible.
RVec crlb_beta(const ModelParams& params, Index snapshots);

/// sqrt(crlb_beta) in degrees.
RVec crlb_beta_deg(const ModelParams& params, Index snapshots);

}  // namespace doa
