#include "oid/dispatch.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace oid {

void DispatchSpec::prepare(int num_houses) {
    auto fit = [num_houses](std::vector<double>& v) {
        if (v.empty()) v.assign(num_houses, 0.0);
        if (static_cast<int>(v.size()) == 1) v.assign(num_houses, v[0]);
        if (static_cast<int>(v.size()) != num_houses)
            throw std::invalid_argument("coefficient vector length mismatch");
    };
    fit(a);
    fit(b);
    if (lambda_h && static_cast<int>(lambda_h->size()) != num_houses)
        throw std::invalid_argument("lambda_h length mismatch");
    if (c_loss <= 0) throw std::invalid_argument("loss weight must be positive");
    if (c_curtail < 0 || c_deviation < 0 || lambda < 0 || lambda_p < 0 || lambda_q < 0)
        throw std::invalid_argument("weights must be nonnegative");
    for (double x : a)
        if (x < 0) throw std::invalid_argument("quadratic curtailment coefficients must be nonnegative");
    for (double x : b)
        if (x < 0) throw std::invalid_argument("linear curtailment coefficients must be nonnegative");
    if (lambda_h)
        for (double x : *lambda_h)
            if (x < 0) throw std::invalid_argument("per-house group weights must be nonnegative");
    if (pin_curtail_zero && lambda_p > 0)
        throw std::invalid_argument("curtailment pinned to zero but lambda_p > 0");
    if (pin_reactive_zero && lambda_q > 0)
        throw std::invalid_argument("reactive power pinned to zero but lambda_q > 0");
    if (bounds.v_min <= 0 || bounds.v_max <= bounds.v_min)
        throw std::invalid_argument("invalid voltage bounds");
}

DispatchSpec load_dispatch_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dispatch spec: " + path);
    nlohmann::json j;
    in >> j;

    DispatchSpec spec;
    spec.c_loss = j.value("c_loss", 1.0);
    spec.c_curtail = j.value("c_curtail", 0.0);
    spec.c_deviation = j.value("c_deviation", 0.0);
    if (j.contains("a")) {
        if (j["a"].is_array())
            spec.a = j["a"].get<std::vector<double>>();
        else
            spec.a = {j["a"].get<double>()};
    }
    if (j.contains("b")) {
        if (j["b"].is_array())
            spec.b = j["b"].get<std::vector<double>>();
        else
            spec.b = {j["b"].get<double>()};
    }
    spec.lambda = j.value("lambda", 0.0);
    if (j.contains("lambda_h"))
        spec.lambda_h = j["lambda_h"].get<std::vector<double>>();
    spec.lambda_p = j.value("lambda_p", 0.0);
    spec.lambda_q = j.value("lambda_q", 0.0);
    spec.pin_curtail_zero = j.value("pin_curtail_zero", false);
    spec.pin_reactive_zero = j.value("pin_reactive_zero", false);
    spec.enforce_pf = j.value("enforce_pf", true);
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        spec.bounds.v_min = b.value("v_min", spec.bounds.v_min);
        spec.bounds.v_max = b.value("v_max", spec.bounds.v_max);
        spec.bounds.v_slack = b.value("v_slack", spec.bounds.v_slack);
    }
    return spec;
}

}  // namespace oid
