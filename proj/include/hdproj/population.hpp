// ============================================================================
// Population-level description of a two-group distribution: means, the
// covariance, and (where known analytically) its leading spectrum.  Used by
// the simulation generators and by oracle mode, where tests swap estimated
// nuisances for these exact values.
// ============================================================================

#pragma once

#include <optional>
#include <string>

#include "hdproj/types.hpp"

namespace hdproj {

struct PopulationSpec {
    std::string label;
    Vector mu_x;
    Vector mu_z;
    Matrix sigma;
    Vector eigvals;  // full spectrum in non-increasing order; empty if not analytic
    std::optional<Vector> v1;
    std::optional<Vector> v2;

    Index p() const { return mu_x.size(); }
    void validate() const;
};

// The k-th eigenpair (1-based).  Stored analytic vectors are preferred for
// k = 1, 2; anything else is computed from sigma, oriented so the
// largest-magnitude entry is positive.
std::pair<double, Vector> population_component(const PopulationSpec& pop, int k);

}  // namespace hdproj
