#pragma once

#include <stdexcept>
#include <string>

namespace platelab {

// Bad user-facing input (config files, malformed fields).  Maps to CLI exit 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A mathematical invariant the library relies on was violated at runtime
// (e.g. an optimal-rotation set of dimension 2).  Maps to CLI exit 2.
struct InconsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

// Vector field handed to potential integration is not (discretely) a gradient.
struct NonIntegrableFieldError : std::runtime_error {
    NonIntegrableFieldError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

// Load degenerated to zero after mean removal.
struct DegenerateLoadError : InputError {
    using InputError::InputError;
};

// Rotation logarithm requested at (or too close to) the cut locus.
struct BranchAmbiguityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Point is too far from the optimal set for the projection to be well defined.
struct ProjectionUndefinedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input field is not developable / not an isometry at the required tolerance.
struct NotDevelopableError : std::runtime_error {
    NotDevelopableError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

struct NotAnIsometryError : std::runtime_error {
    NotAnIsometryError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

// Scaling regression attempted on energies indistinguishable from zero.
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace platelab
