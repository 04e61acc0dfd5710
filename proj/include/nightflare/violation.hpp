// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nightflare/error.hpp"

namespace nightflare {

struct Violation {
    enum class Kind {
        schema,    ///< missing field, wrong type, unknown enum value
        semantic,  ///< well-formed but breaks an invariant (negative radius, ...)
    };

    Kind kind = Kind::semantic;
    std::string path;  ///< dotted field path, e.g. "glare.radius" or "irises[2].k"
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

using Violations = std::vector<Violation>;

inline std::string describe(const Violations& vs)
{
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty())
            out += "; ";
        out += v.path + ": " + v.message;
    }
    return out;
}

/// Thrown by renderers handed a spec that fails its checks.
class SpecError : public InputError {
public:
    explicit SpecError(Violations vs) : InputError(describe(vs)), violations_(std::move(vs)) {}
    const Violations& violations() const noexcept { return violations_; }

private:
    Violations violations_;
};

inline void require_valid(Violations vs)
{
    if (!vs.empty())
        throw SpecError(std::move(vs));
}

}  // namespace nightflare
