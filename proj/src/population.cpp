#include "hdproj/population.hpp"

#include <cmath>
#include <string>

#include "hdproj/estimators.hpp"

namespace hdproj {

void PopulationSpec::validate() const {
    const Index dim = mu_x.size();
    if (dim < 1) {
        throw ValidationError("population: empty mean vector");
    }
    if (mu_z.size() != dim || sigma.rows() != dim || sigma.cols() != dim) {
        throw ValidationError("population '" + label + "': dimension mismatch");
    }
    if (eigvals.size() != 0 && eigvals.size() != dim) {
        throw ValidationError("population '" + label + "': eigvals must cover the full spectrum");
    }
    for (Index i = 0; i + 1 < eigvals.size(); ++i) {
        if (eigvals(i) < eigvals(i + 1)) {
            throw ValidationError("population '" + label + "': eigvals must be non-increasing");
        }
    }
    if ((v1 && v1->size() != dim) || (v2 && v2->size() != dim)) {
        throw ValidationError("population '" + label + "': component vector has wrong length");
    }
}

std::pair<double, Vector> population_component(const PopulationSpec& pop, int k) {
    pop.validate();
    if (k < 1 || static_cast<Index>(k) > pop.p()) {
        throw ValidationError("population_component: index " + std::to_string(k) +
                              " out of range for p = " + std::to_string(pop.p()));
    }
    const bool have_value = pop.eigvals.size() >= static_cast<Index>(k);
    if (k == 1 && pop.v1 && have_value) {
        return {pop.eigvals(0), *pop.v1};
    }
    if (k == 2 && pop.v2 && have_value) {
        return {pop.eigvals(1), *pop.v2};
    }
    const EigenPair eig = top_eigen(pop.sigma, static_cast<Index>(k));
    Vector v = eig.vectors.col(k - 1);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    const double value = have_value ? pop.eigvals(k - 1) : eig.values(k - 1);
    return {value, std::move(v)};
}

}  // namespace hdproj
