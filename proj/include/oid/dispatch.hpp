#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oid/scenario.hpp"

namespace oid {

/// How the power-factor cut is lowered into the conic program. The two
/// encodings are mathematically equivalent; both are kept so equivalence
/// can be checked at the solution level.
enum class PfCutEncoding { LinearPair, PsdBlock };

/// Cost weights, regularization weights and operating limits for one
/// dispatch problem.
struct DispatchSpec {
    double c_loss = 1.0;       // weight on network losses
    double c_curtail = 0.0;    // weight on the curtailment cost
    double c_deviation = 0.0;  // weight on the voltage flatness term

    std::vector<double> a;  // quadratic curtailment coefficients per house
    std::vector<double> b;  // linear curtailment coefficients per house

    double lambda = 0.0;                        // group weight
    std::optional<std::vector<double>> lambda_h;  // per-house override
    double lambda_p = 0.0;                      // entrywise weight on curtailment
    double lambda_q = 0.0;                      // entrywise weight on reactive power

    bool pin_curtail_zero = false;   // force p_c = 0 (reactive-only control)
    bool pin_reactive_zero = false;  // force q_s = 0 (curtailment-only control)
    bool enforce_pf = true;
    PfCutEncoding pf_encoding = PfCutEncoding::LinearPair;

    VoltageBounds bounds;

    double group_weight(int house) const {
        return lambda_h ? lambda_h->at(house) : lambda;
    }

    /// Resize a/b to the house count (zero-filled) and check signs.
    void prepare(int num_houses);
};

/// Load a dispatch spec from JSON (schema in docs/formats.md).
DispatchSpec load_dispatch_spec(const std::string& path);

}  // namespace oid
