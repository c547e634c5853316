#pragma once

#include <stdexcept>
#include <string>

namespace compmdp {

/// Structurally invalid model (bad distribution, unknown state, ...).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Sequential composition with mismatched middle arities.
struct CompositionError : std::runtime_error {
    explicit CompositionError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user input (file, query, CLI).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal soundness invariant was violated; indicates a bug, never
/// recoverable.
struct SoundnessFault : std::logic_error {
    explicit SoundnessFault(const std::string& what) : std::logic_error(what) {}
};

}  // namespace compmdp
