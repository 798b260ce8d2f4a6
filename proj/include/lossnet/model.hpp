#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lossnet {

/// Raised for malformed configuration: bad parameter ranges, malformed or
/// unknown JSON keys, inconsistent dimensions. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a model-level requirement fails (infeasible program, violated
/// admissibility assumption). CLI maps this to exit code 3.
struct AssumptionError : std::runtime_error {
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when the simulation engine detects an internal capacity violation.
/// This indicates a bug, never an input problem. CLI maps this to exit code 4.
struct FeasibilityFault : std::logic_error {
    explicit FeasibilityFault(const std::string& what) : std::logic_error(what) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ServiceKind { Exponential, HyperExponential, Deterministic, HeavyTailExample };

/// Service-time distribution of one request class. Only the exponential case
/// is memoryless; the others exist for the infinite-capacity mean checks and
/// the tail-based bound curves.
struct ServiceModel {
    ServiceKind kind = ServiceKind::Exponential;
    double rate = 1.0;                 // Exponential
    std::vector<double> probs, rates;  // HyperExponential branches
    double d = 1.0;                    // Deterministic duration

    double mean() const {
        switch (kind) {
            case ServiceKind::Exponential: return 1.0 / rate;
            case ServiceKind::Deterministic: return d;
            case ServiceKind::HeavyTailExample: return 1.0;
            case ServiceKind::HyperExponential: {
                double m = 0.0;
                for (size_t j = 0; j < probs.size(); ++j) m += probs[j] / rates[j];
                return m;
            }
        }
        return 0.0;
    }

    /// Tail of the equilibrium (stationary-excess) distribution,
    /// integral_t^inf P(S > u) du / E[S]. For the exponential this is
    /// exp(-rate*t); the expected number in an uncontrolled infinite-server
    /// system is rho*(1 - equilibrium_tail(t)) for every service law.
    double equilibrium_tail(double t) const {
        if (t <= 0.0) return 1.0;
        switch (kind) {
            case ServiceKind::Exponential: return std::exp(-rate * t);
            case ServiceKind::Deterministic: return t >= d ? 0.0 : 1.0 - t / d;
            case ServiceKind::HeavyTailExample: return 1.0 / (1.0 + t);
            case ServiceKind::HyperExponential: {
                double num = 0.0, den = 0.0;
                for (size_t j = 0; j < probs.size(); ++j) {
                    num += probs[j] / rates[j] * std::exp(-rates[j] * t);
                    den += probs[j] / rates[j];
                }
                return num / den;
            }
        }
        return 0.0;
    }

    /// 1/mean; equals the exponential rate when kind is Exponential.
    double effective_rate() const { return 1.0 / mean(); }
};

/// One request class: Poisson arrivals at `lambda`, i.i.d. service times,
/// per-request-per-time reward, and one or more candidate resource
/// allocations (rows of `allocations`, one entry per resource).
struct RequestClass {
    double lambda = 0.0;
    ServiceModel service;
    double reward = 0.0;
    std::vector<std::vector<double>> allocations;  // l x s, componentwise >= 0
};

/// A loss network: shared resource capacities plus the request classes.
/// Capacity entries may be +inf (uncontrolled infinite-capacity system).
struct Scenario {
    std::vector<double> capacity;  // length s
    std::vector<RequestClass> classes;

    size_t num_resources() const { return capacity.size(); }
    size_t num_classes() const { return classes.size(); }

    /// True when there is one resource and every class has exactly one
    /// candidate allocation; the scalar-knapsack fast paths require this.
    bool single_resource() const {
        if (capacity.size() != 1) return false;
        for (const auto& c : classes)
            if (c.allocations.size() != 1) return false;
        return true;
    }

    /// Scalar per-request size of class i; single-resource form only.
    double unit_size(size_t i) const { return classes[i].allocations[0][0]; }
};

inline void validate_scenario(const Scenario& sc) {
    if (sc.capacity.empty()) throw ConfigError("scenario: capacity vector is empty");
    for (double b : sc.capacity)
        if (!(b >= 0.0)) throw ConfigError("scenario: capacity entries must be >= 0");
    if (sc.classes.empty()) throw ConfigError("scenario: no request classes");
    const size_t s = sc.capacity.size();
    for (size_t i = 0; i < sc.classes.size(); ++i) {
        const auto& c = sc.classes[i];
        const std::string tag = "class " + std::to_string(i) + ": ";
        if (!(c.lambda > 0.0)) throw ConfigError(tag + "lambda must be > 0");
        if (!(c.reward >= 0.0)) throw ConfigError(tag + "reward must be >= 0");
        const double m = c.service.mean();
        if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError(tag + "service mean must be finite and > 0");
        if (c.service.kind == ServiceKind::HyperExponential) {
            if (c.service.probs.size() != c.service.rates.size() || c.service.probs.empty())
                throw ConfigError(tag + "hyperexp probs/rates must be nonempty and equal length");
            double psum = 0.0;
            for (double p : c.service.probs) {
                if (!(p >= 0.0)) throw ConfigError(tag + "hyperexp probs must be >= 0");
                psum += p;
            }
            if (std::abs(psum - 1.0) > 1e-9) throw ConfigError(tag + "hyperexp probs must sum to 1");
            for (double r : c.service.rates)
                if (!(r > 0.0)) throw ConfigError(tag + "hyperexp rates must be > 0");
        }
        if (c.allocations.empty()) throw ConfigError(tag + "needs at least one allocation");
        for (const auto& a : c.allocations) {
            if (a.size() != s) throw ConfigError(tag + "allocation dimension != resource count");
            bool any = false;
            for (double v : a) {
                if (!(v >= 0.0)) throw ConfigError(tag + "allocation entries must be >= 0");
                if (v > 0.0) any = true;
            }
            if (!any) throw ConfigError(tag + "allocation must have a positive component");
        }
    }
}

/// rho_i = lambda_i * E[S_i], the offered load of each class.
inline std::vector<double> offered_loads(const Scenario& sc) {
    std::vector<double> rho(sc.classes.size());
    for (size_t i = 0; i < sc.classes.size(); ++i)
        rho[i] = sc.classes[i].lambda * sc.classes[i].service.mean();
    return rho;
}

inline double min_service_rate(const Scenario& sc) {
    double mn = kInf;
    for (const auto& c : sc.classes) mn = std::min(mn, c.service.effective_rate());
    return mn;
}

/// Heavy-traffic scaling: arrival rates times n, allocation sizes divided by
/// n; capacities and service laws unchanged. Per-request rewards divided by n
/// when `rescale_reward` so the aggregate reward rate stays comparable.
inline Scenario scale_scenario(const Scenario& sc, double n, bool rescale_reward) {
    if (!(n > 0.0)) throw ConfigError("scale must be > 0");
    Scenario out = sc;
    for (auto& c : out.classes) {
        c.lambda *= n;
        if (rescale_reward) c.reward /= n;
        for (auto& a : c.allocations)
            for (double& v : a) v /= n;
    }
    return out;
}

/// Admission ratios that hold the steady-state per-class loads at the split
/// f of the single resource: alpha_i = b*f_i / (b_i*rho_i). Errors when a
/// target exceeds the offered load of its class.
inline std::vector<double> load_balancing_alphas(const Scenario& sc, const std::vector<double>& fractions) {
    if (!sc.single_resource()) throw ConfigError("load balancing targets need a single-resource scenario");
    if (fractions.size() != sc.classes.size())
        throw ConfigError("load balancing: one fraction per class required");
    const double b = sc.capacity[0];
    if (!std::isfinite(b) || b <= 0.0) throw ConfigError("load balancing: capacity must be finite and > 0");
    double fsum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ConfigError("load balancing: fractions must be >= 0");
        fsum += f;
    }
    if (fsum > 1.0 + 1e-9) throw ConfigError("load balancing: fractions sum exceeds 1");
    const auto rho = offered_loads(sc);
    std::vector<double> alpha(fractions.size());
    for (size_t i = 0; i < fractions.size(); ++i) {
        alpha[i] = b * fractions[i] / (sc.unit_size(i) * rho[i]);
        if (alpha[i] > 1.0 + 1e-12)
            throw ConfigError("load balancing: class " + std::to_string(i) +
                              " target load exceeds its offered load");
        alpha[i] = std::min(alpha[i], 1.0);
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// JSON serialization. Unknown keys are rejected so that typos in scenario
// files fail loudly instead of silently running a different model.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
    }
}

inline double number_or_inf(const nlohmann::json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    throw ConfigError(where + ": expected a number or \"inf\"");
}

}  // namespace detail

inline ServiceModel service_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("service: object with \"type\" required");
    const std::string type = j.at("type").get<std::string>();
    ServiceModel sm;
    if (type == "exp") {
        detail::require_keys(j, {"type", "rate"}, "service(exp)");
        sm.kind = ServiceKind::Exponential;
        sm.rate = j.at("rate").get<double>();
        if (!(sm.rate > 0.0)) throw ConfigError("service(exp): rate must be > 0");
    } else if (type == "hyperexp") {
        detail::require_keys(j, {"type", "probs", "rates"}, "service(hyperexp)");
        sm.kind = ServiceKind::HyperExponential;
        sm.probs = j.at("probs").get<std::vector<double>>();
        sm.rates = j.at("rates").get<std::vector<double>>();
    } else if (type == "det") {
        detail::require_keys(j, {"type", "d"}, "service(det)");
        sm.kind = ServiceKind::Deterministic;
        sm.d = j.at("d").get<double>();
        if (!(sm.d > 0.0)) throw ConfigError("service(det): d must be > 0");
    } else if (type == "heavytail") {
        detail::require_keys(j, {"type"}, "service(heavytail)");
        sm.kind = ServiceKind::HeavyTailExample;
    } else {
        throw ConfigError("service: unknown type \"" + type + "\"");
    }
    return sm;
}

inline nlohmann::json service_to_json(const ServiceModel& sm) {
    nlohmann::json j;
    switch (sm.kind) {
        case ServiceKind::Exponential: j = {{"type", "exp"}, {"rate", sm.rate}}; break;
        case ServiceKind::HyperExponential: j = {{"type", "hyperexp"}, {"probs", sm.probs}, {"rates", sm.rates}}; break;
        case ServiceKind::Deterministic: j = {{"type", "det"}, {"d", sm.d}}; break;
        case ServiceKind::HeavyTailExample: j = {{"type", "heavytail"}}; break;
    }
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("scenario: JSON object required");
    detail::require_keys(j, {"capacity", "classes"}, "scenario");
    if (!j.contains("capacity") || !j.contains("classes"))
        throw ConfigError("scenario: \"capacity\" and \"classes\" required");
    Scenario sc;
    for (const auto& v : j.at("capacity"))
        sc.capacity.push_back(detail::number_or_inf(v, "capacity"));
    for (const auto& cj : j.at("classes")) {
        detail::require_keys(cj, {"lambda", "service", "reward", "allocations"}, "class");
        RequestClass c;
        c.lambda = cj.at("lambda").get<double>();
        c.service = service_from_json(cj.at("service"));
        c.reward = cj.value("reward", 0.0);
        if (!cj.contains("allocations")) throw ConfigError("class: \"allocations\" required");
        for (const auto& aj : cj.at("allocations"))
            c.allocations.push_back(aj.get<std::vector<double>>());
        sc.classes.push_back(std::move(c));
    }
    validate_scenario(sc);
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["capacity"] = nlohmann::json::array();
    for (double b : sc.capacity) {
        if (std::isinf(b)) j["capacity"].push_back("inf");
        else j["capacity"].push_back(b);
    }
    j["classes"] = nlohmann::json::array();
    for (const auto& c : sc.classes) {
        nlohmann::json cj;
        cj["lambda"] = c.lambda;
        cj["service"] = service_to_json(c.service);
        cj["reward"] = c.reward;
        cj["allocations"] = c.allocations;
        j["classes"].push_back(cj);
    }
    return j;
}

}  // namespace lossnet
