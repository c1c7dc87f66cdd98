#pragma once

// Event-triggering predicates. Every rule compares an error measure against a
// state-dependent threshold and fires when the error reaches it.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <variant>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"

namespace evtrig {

/// Current state in the coordinates the rules need. `w` is empty when no
/// manifold is available.
struct TriggerView {
    Vector y;
    Vector v;
    Vector w;
};

/// Held sample minus current state.
struct TriggerError {
    Vector e_y;
    Vector e_v;

    [[nodiscard]] double full_norm() const { return std::sqrt(e_y.squaredNorm() + e_v.squaredNorm()); }
};

/// ||e|| >= sigma ||(y; w)||
struct RelativeFull {
    double sigma = 0.0;
};

/// ||e_v|| >= sigma (||w|| + ||y||^(p + p_e)); p_e = 1 is the supported rule,
/// other values are an experimental knob.
struct ManifoldWeighted {
    double sigma = 0.0;
    double p = 3.0;
    double p_e = 1.0;
};

/// ||e_v|| >= sigma (||v|| + ||y||^(p + 1))
struct RawCoordinates {
    double sigma = 0.0;
    double p = 3.0;
};

/// ||e|| >= sigma (||y|| + ||v||), or sigma (||y|| + ||w||) when use_w is set.
struct RelativeYV {
    double sigma = 0.0;
    bool use_w = false;
};

/// beta_G(||e||) >= sigma alpha_D(||(y; w)||)
struct ClassKPair {
    std::function<double(double)> alpha_D;
    std::function<double(double)> beta_G;
    double sigma = 0.0;
};

struct TriggerRule;

/// Inner rule active only outside S2 = {||(y; w)|| < r1}.
struct DeadZone {
    std::shared_ptr<const TriggerRule> inner;
    double r1 = 0.0;
};

struct TriggerRule {
    std::variant<RelativeFull, ManifoldWeighted, RawCoordinates, RelativeYV, DeadZone, ClassKPair> kind;
};

inline TriggerRule make_dead_zone(TriggerRule inner, double r1) {
    if (std::holds_alternative<DeadZone>(inner.kind)) throw ConfigError("dead zones cannot be nested");
    if (!(r1 > 0.0)) throw ConfigError("dead-zone radius must be positive");
    return {DeadZone{std::make_shared<const TriggerRule>(std::move(inner)), r1}};
}

namespace detail {

inline double yw_norm(const TriggerView& s) { return std::sqrt(s.y.squaredNorm() + s.w.squaredNorm()); }

inline void need_w(const TriggerView& s, const char* rule) {
    if (s.w.size() == 0) throw ConfigError(std::string(rule) + " needs a manifold (w coordinates)");
}

}  // namespace detail

inline std::string rule_name(const TriggerRule& rule) {
    return std::visit(
        [](const auto& r) -> std::string {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, RelativeFull>) return "relative-full";
            else if constexpr (std::is_same_v<R, ManifoldWeighted>) return "manifold-weighted";
            else if constexpr (std::is_same_v<R, RawCoordinates>) return "raw-coordinates";
            else if constexpr (std::is_same_v<R, RelativeYV>) return "relative-yv";
            else if constexpr (std::is_same_v<R, DeadZone>) return "dead-zone(" + rule_name(*r.inner) + ")";
            else return "class-k-pair";
        },
        rule.kind);
}

inline double rule_sigma(const TriggerRule& rule) {
    return std::visit(
        [](const auto& r) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, DeadZone>) return rule_sigma(*r.inner);
            else return r.sigma;
        },
        rule.kind);
}

/// True when the rule suppresses events at this state.
inline bool in_dead_zone(const TriggerRule& rule, const TriggerView& s) {
    const auto* dz = std::get_if<DeadZone>(&rule.kind);
    if (!dz) return false;
    detail::need_w(s, "dead-zone rule");
    return detail::yw_norm(s) < dz->r1;
}

/// Right-hand side of the rule's inequality; +inf inside a dead zone.
inline double threshold(const TriggerRule& rule, const TriggerView& s) {
    return std::visit(
        [&s](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, RelativeFull>) {
                detail::need_w(s, "relative-full rule");
                return r.sigma * detail::yw_norm(s);
            } else if constexpr (std::is_same_v<R, ManifoldWeighted>) {
                detail::need_w(s, "manifold-weighted rule");
                return r.sigma * (s.w.norm() + std::pow(s.y.norm(), r.p + r.p_e));
            } else if constexpr (std::is_same_v<R, RawCoordinates>) {
                return r.sigma * (s.v.norm() + std::pow(s.y.norm(), r.p + 1.0));
            } else if constexpr (std::is_same_v<R, RelativeYV>) {
                if (r.use_w) detail::need_w(s, "relative-yv rule");
                return r.sigma * (s.y.norm() + (r.use_w ? s.w.norm() : s.v.norm()));
            } else if constexpr (std::is_same_v<R, DeadZone>) {
                detail::need_w(s, "dead-zone rule");
                if (detail::yw_norm(s) < r.r1) return std::numeric_limits<double>::infinity();
                return threshold(*r.inner, s);
            } else {
                detail::need_w(s, "class-k-pair rule");
                return r.sigma * r.alpha_D(detail::yw_norm(s));
            }
        },
        rule.kind);
}

/// Left-hand side: the error measure the rule compares.
inline double error_measure(const TriggerRule& rule, const TriggerError& e) {
    return std::visit(
        [&e](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, ManifoldWeighted> || std::is_same_v<R, RawCoordinates>) {
                return e.e_v.norm();
            } else if constexpr (std::is_same_v<R, DeadZone>) {
                return error_measure(*r.inner, e);
            } else if constexpr (std::is_same_v<R, ClassKPair>) {
                return r.beta_G(e.full_norm());
            } else {
                return e.full_norm();
            }
        },
        rule.kind);
}

/// Fires at equality. A zero error never fires: re-sampling would not change
/// the control.
inline bool should_fire(const TriggerRule& rule, const TriggerError& e, const TriggerView& s) {
    const double lhs = error_measure(rule, e);
    if (!(lhs > 0.0)) return false;
    const double rhs = threshold(rule, s);
    return std::isfinite(rhs) && lhs >= rhs;
}

}  // namespace evtrig
