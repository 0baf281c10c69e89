#ifndef PIXANT_TRUST_REGION_HPP
#define PIXANT_TRUST_REGION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pixant/errors.hpp"
#include "pixant/features.hpp"
#include "pixant/objectives.hpp"
#include "pixant/parallel.hpp"
#include "pixant/response.hpp"

namespace pixant {

using Vector = Eigen::VectorXd;

struct BoxBounds {
    Vector lower;
    Vector upper;

    int dim() const { return static_cast<int>(lower.size()); }

    void validate() const {
        if (lower.size() != upper.size())
            throw ConfigError("bounds: lower and upper dimensions differ");
        for (int k = 0; k < dim(); ++k)
            if (!(lower(k) < upper(k)))
                throw ConfigError("bounds: lower must be strictly below upper");
    }

    bool contains(const Vector& x) const {
        if (x.size() != lower.size()) return false;
        for (int k = 0; k < dim(); ++k)
            if (x(k) < lower(k) || x(k) > upper(k)) return false;
        return true;
    }

    Vector ranges() const { return upper - lower; }
};

struct TrustRegionConfig {
    double delta0 = 1.0;        ///< initial radius, normalized units
    double expand = 2.0;        ///< radius multiplier when rho > rho_hi
    double shrink = 1.0 / 3.0;  ///< radius multiplier when rho < rho_lo
    double rho_hi = 0.75;
    double rho_lo = 0.25;
    double epsilon = 1e-2;      ///< termination threshold on radius and step norm
    double fd_step = 0.02;      ///< finite-difference step, fraction of bound range
    int max_iterations = 50;

    void validate() const {
        if (!(rho_lo > 0.0 && rho_lo < rho_hi && rho_hi < 1.0))
            throw ConfigError("trust region requires 0 < rho_lo < rho_hi < 1");
        if (!(epsilon > 0.0)) throw ConfigError("trust region requires epsilon > 0");
        if (!(fd_step > 0.0 && fd_step < 1.0))
            throw ConfigError("trust region requires 0 < fd_step < 1");
        if (!(delta0 > 0.0) || !(expand > 1.0) || !(shrink > 0.0 && shrink < 1.0))
            throw ConfigError("trust region radius rules are inconsistent");
        if (max_iterations < 1) throw ConfigError("trust region requires max_iterations >= 1");
    }
};

using VectorEvaluator = std::function<Vector(const Vector&)>;
using ResponseObjective = std::function<double(const Vector&)>;

/// First-order Taylor model of the response around an anchor design.
/// Prediction at the anchor reproduces the anchor response exactly.
struct LinearSurrogate {
    Vector anchor_x;
    Vector anchor_response;
    Eigen::MatrixXd jacobian;  // response dimension x D

    Vector predict(const Vector& x) const {
        return anchor_response + jacobian * (x - anchor_x);
    }
};

namespace detail {

[[noreturn]] inline void rethrow_tagged(int component) {
    const std::string tag =
        " (while perturbing design component " + std::to_string(component) + ")";
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(e.what() + tag);
    } catch (const NumericError& e) {
        throw NumericError(e.what() + tag);
    }
}

/// Large-step forward differences with a known anchor response: D evaluator
/// calls. The step flips to backward where the forward point would leave the
/// box, so every probed point stays feasible.
inline LinearSurrogate jacobian_fd_known_anchor(const VectorEvaluator& evaluator,
                                                const Vector& x, Vector anchor_response,
                                                const BoxBounds& bounds, double fd_step,
                                                int threads = 0) {
    const int d = bounds.dim();
    LinearSurrogate s;
    s.anchor_x = x;
    s.anchor_response = std::move(anchor_response);
    s.jacobian.resize(s.anchor_response.size(), d);

    std::vector<Vector> columns(static_cast<std::size_t>(d));
    parallel_chunks(static_cast<std::size_t>(d), threads, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t k = b; k < e; ++k) {
            double h = fd_step * (bounds.upper(static_cast<int>(k)) - bounds.lower(static_cast<int>(k)));
            if (x(static_cast<int>(k)) + h > bounds.upper(static_cast<int>(k))) h = -h;
            Vector xp = x;
            xp(static_cast<int>(k)) += h;
            try {
                columns[k] = (evaluator(xp) - s.anchor_response) / h;
            } catch (const Error&) {
                rethrow_tagged(static_cast<int>(k));
            }
        }
    });
    for (int k = 0; k < d; ++k) s.jacobian.col(k) = columns[static_cast<std::size_t>(k)];
    return s;
}

/// Objective of a surrogate prediction; +inf when the objective rejects the
/// predicted response (discontinuous objectives may do so off-grid).
inline double predicted_objective(const LinearSurrogate& s, const ResponseObjective& objective,
                                  const Vector& x) {
    try {
        const double u = objective(s.predict(x));
        return std::isnan(u) ? std::numeric_limits<double>::infinity() : u;
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

/// Golden-section refinement with a coarse pre-scan; tolerates plateaus by
/// keeping the best sample ever seen.
template <typename LineFn>
std::pair<double, double> line_search(LineFn&& g, double lo, double hi, double tol) {
    double best_t = lo, best_v = g(lo);
    const int n_coarse = 17;
    for (int i = 1; i < n_coarse; ++i) {
        const double t = lo + (hi - lo) * i / (n_coarse - 1);
        const double v = g(t);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    const double cell = (hi - lo) / (n_coarse - 1);
    double a = std::max(lo, best_t - cell);
    double b = std::min(hi, best_t + cell);
    constexpr double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 120 && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = g(d);
        }
        const double mid_t = 0.5 * (a + b);
        const double mid_v = g(mid_t);
        if (mid_v < best_v) {
            best_v = mid_v;
            best_t = mid_t;
        }
    }
    return {best_t, best_v};
}

inline double normalized_step_inf(const Vector& a, const Vector& b, const Vector& ranges) {
    double n = 0.0;
    for (int k = 0; k < a.size(); ++k) n = std::max(n, std::abs(a(k) - b(k)) / ranges(k));
    return n;
}

} // namespace detail

/// Builds the linear surrogate at x: the anchor evaluation plus D
/// finite-difference probes, D + 1 evaluator calls in total.
inline LinearSurrogate jacobian_fd(const VectorEvaluator& evaluator, const Vector& x,
                                   const BoxBounds& bounds, double fd_step, int threads = 0) {
    bounds.validate();
    if (!bounds.contains(x)) throw ConfigError("jacobian anchor lies outside the bounds");
    return detail::jacobian_fd_known_anchor(evaluator, x, evaluator(x), bounds, fd_step, threads);
}

/// Minimizes objective(predict(x)) over the trust box
///   { max(l, x_i - delta*r) <= x <= min(u, x_i + delta*r) },  r = u - l,
/// using only surrogate predictions: box vertices, a fixed batch of uniform
/// interior samples, and coordinate-descent polish. The anchor is always a
/// candidate, so the returned point never predicts worse than the anchor.
inline Vector solve_subproblem(const LinearSurrogate& s, const ResponseObjective& objective,
                               const BoxBounds& bounds, double delta) {
    bounds.validate();
    const int d = bounds.dim();
    const Vector r = bounds.ranges();
    Vector lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
        lo(k) = std::max(bounds.lower(k), s.anchor_x(k) - delta * r(k));
        hi(k) = std::min(bounds.upper(k), s.anchor_x(k) + delta * r(k));
    }

    Vector best_x = s.anchor_x;
    double best_u = detail::predicted_objective(s, objective, best_x);
    auto consider = [&](const Vector& x) {
        const double u = detail::predicted_objective(s, objective, x);
        if (u < best_u) {
            best_u = u;
            best_x = x;
        }
    };

    if (d <= 12) {
        for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
            Vector v(d);
            for (int k = 0; k < d; ++k) v(k) = ((mask >> k) & 1u) ? hi(k) : lo(k);
            consider(v);
        }
    }

    std::mt19937 gen(0x5eed5a11u);
    constexpr double inv32 = 1.0 / 4294967296.0;
    for (int i = 0; i < 256; ++i) {
        Vector v(d);
        for (int k = 0; k < d; ++k) v(k) = lo(k) + (hi(k) - lo(k)) * (gen() * inv32);
        consider(v);
    }

    // Coordinate descent on the surrogate from the incumbent.
    Vector x = best_x;
    for (int sweep = 0; sweep < 6; ++sweep) {
        const double before = best_u;
        for (int k = 0; k < d; ++k) {
            if (hi(k) <= lo(k)) continue;
            auto g = [&](double t) {
                Vector xt = x;
                xt(k) = t;
                return detail::predicted_objective(s, objective, xt);
            };
            const auto [t, v] = detail::line_search(g, lo(k), hi(k), 1e-11 * r(k));
            if (v < best_u) {
                x(k) = t;
                best_u = v;
                best_x = x;
            } else {
                x(k) = best_x(k);
            }
        }
        if (!(best_u < before - 1e-15 * (1.0 + std::abs(before)))) break;
    }
    return best_x;
}

/// Gain ratio controlling the trust region: actual objective change over
/// surrogate-predicted change.
inline double gain_ratio(double u_actual_new, double u_actual_old, double u_model_new,
                         double u_model_old) {
    const double denom = u_model_new - u_model_old;
    if (std::abs(denom) < 1e-15)
        throw ZeroModelChange("surrogate predicts no objective change");
    return (u_actual_new - u_actual_old) / denom;
}

enum class TerminationReason { radius_converged, step_converged, max_iterations };

inline const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::radius_converged: return "radius_converged";
        case TerminationReason::step_converged: return "step_converged";
        default: return "max_iterations";
    }
}

struct IterationRecord {
    Vector x;                 ///< candidate evaluated this iteration
    double u = 0.0;           ///< true objective at the candidate
    double u_model = 0.0;     ///< surrogate objective at the candidate
    double rho = 0.0;         ///< gain ratio (0 when the model change vanished)
    double delta = 0.0;       ///< radius after this iteration's update
    bool accepted = false;
    std::uint64_t cumulative_evals = 0;
};

struct OptimizationTrace {
    std::vector<IterationRecord> iterations;
    std::uint64_t total_evaluator_calls = 0;
    std::uint64_t jacobian_builds = 0;
    int accepted_count = 0;
    int rejected_count = 0;
    double initial_u = 0.0;
    double final_u = 0.0;
    Vector x_star;
    TerminationReason termination = TerminationReason::max_iterations;

    bool hit_max_iterations() const {
        return termination == TerminationReason::max_iterations;
    }
};

struct TrResult {
    Vector x_star;
    OptimizationTrace trace;
};

/// Trust-region loop: linear surrogate from large-step finite differences,
/// box-constrained subproblem, accept iff rho > 0, radius x2 above rho_hi and
/// x shrink below rho_lo. Rejected steps reuse the current surrogate; the
/// surrogate is rebuilt lazily once a new subproblem actually needs it, which
/// keeps the cost at D + 1 evaluations per successful iteration plus one per
/// unsuccessful step. A candidate whose evaluation or objective fails is
/// treated as a rejected step with a radius shrink.
inline TrResult tr_optimize(const VectorEvaluator& evaluator, const ResponseObjective& objective,
                            const Vector& x0, const BoxBounds& bounds,
                            const TrustRegionConfig& config, int threads = 0,
                            const Vector* x0_response = nullptr) {
    config.validate();
    bounds.validate();
    if (!bounds.contains(x0)) throw ConfigError("trust region start point lies outside the bounds");
    const Vector ranges = bounds.ranges();
    const int d = bounds.dim();

    OptimizationTrace trace;
    Vector anchor_x = x0;
    // A caller that already evaluated x0 hands the response in; the call
    // still counts once toward the trace.
    Vector anchor_resp = x0_response ? *x0_response : evaluator(anchor_x);
    ++trace.total_evaluator_calls;
    double u_old = objective(anchor_resp);
    trace.initial_u = u_old;

    double delta = config.delta0;
    LinearSurrogate surrogate;
    bool stale = true;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        if (delta < config.epsilon) {
            trace.termination = TerminationReason::radius_converged;
            break;
        }
        if (stale) {
            surrogate = detail::jacobian_fd_known_anchor(evaluator, anchor_x, anchor_resp,
                                                         bounds, config.fd_step, threads);
            trace.total_evaluator_calls += static_cast<std::uint64_t>(d);
            ++trace.jacobian_builds;
            stale = false;
        }

        const Vector candidate = solve_subproblem(surrogate, objective, bounds, delta);
        const double u_model_new = detail::predicted_objective(surrogate, objective, candidate);

        bool failed = false;
        bool evaluated = false;
        double u_new = std::numeric_limits<double>::infinity();
        Vector resp_new;
        try {
            resp_new = evaluator(candidate);
            evaluated = true;
            ++trace.total_evaluator_calls;
            u_new = objective(resp_new);
            if (std::isnan(u_new)) throw NumericError("objective returned NaN at the candidate");
        } catch (const NumericError&) {
            failed = true;
            if (!evaluated) ++trace.total_evaluator_calls;  // the attempt still ran the model
        }

        IterationRecord rec;
        rec.x = candidate;
        rec.u = u_new;
        rec.u_model = u_model_new;

        double rho = 0.0;
        bool accepted = false;
        if (!failed) {
            try {
                rho = gain_ratio(u_new, u_old, u_model_new, u_old);
                accepted = rho > 0.0;
            } catch (const ZeroModelChange&) {
                rho = 0.0;  // replaying the radius rules on rho = 0 yields the same shrink
            }
        }

        double step_norm = 0.0;
        if (accepted) {
            step_norm = detail::normalized_step_inf(candidate, anchor_x, ranges);
            anchor_x = candidate;
            anchor_resp = std::move(resp_new);
            u_old = u_new;
            stale = true;
            ++trace.accepted_count;
        } else {
            ++trace.rejected_count;
        }
        if (rho > config.rho_hi)
            delta *= config.expand;
        else if (rho < config.rho_lo)
            delta *= config.shrink;

        rec.rho = rho;
        rec.delta = delta;
        rec.accepted = accepted;
        rec.cumulative_evals = trace.total_evaluator_calls;
        trace.iterations.push_back(std::move(rec));

        if (accepted && step_norm < config.epsilon) {
            trace.termination = TerminationReason::step_converged;
            break;
        }
    }

    trace.final_u = u_old;
    trace.x_star = anchor_x;
    return {anchor_x, trace};
}

using CurveEvaluator = std::function<ReflectionCurve(const Vector&)>;
using FeatureExtractor = std::function<FeatureVector(const ReflectionCurve&)>;
using FeatureObjectiveFn = std::function<double(const FeatureVector&)>;

namespace detail {

inline Vector stack_features(const FeatureVector& fv) {
    const auto q = static_cast<int>(fv.omega_ghz.size());
    Vector v(2 * q);
    for (int i = 0; i < q; ++i) {
        v(i) = fv.omega_ghz[static_cast<std::size_t>(i)];
        v(q + i) = fv.level_db[static_cast<std::size_t>(i)];
    }
    return v;
}

inline FeatureVector unstack_features(const Vector& v) {
    FeatureVector fv;
    const auto q = static_cast<std::size_t>(v.size() / 2);
    fv.omega_ghz.resize(q);
    fv.level_db.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        fv.omega_ghz[i] = v(static_cast<int>(i));
        fv.level_db[i] = v(static_cast<int>(q + i));
    }
    return fv;
}

} // namespace detail

/// Feature-space variant: the surrogate is linear in the stacked feature
/// vector [omega; L], and both the subproblem objective and the gain ratio
/// evaluate the feature objective. A candidate whose feature extraction fails
/// becomes a rejected step with a radius shrink.
inline TrResult tr_optimize_features(const CurveEvaluator& evaluator_raw,
                                     const FeatureExtractor& feature_extractor,
                                     const FeatureObjectiveFn& objective_feature,
                                     const Vector& x0, const BoxBounds& bounds,
                                     const TrustRegionConfig& config, int threads = 0,
                                     const ReflectionCurve* x0_curve = nullptr) {
    VectorEvaluator ev = [&](const Vector& x) -> Vector {
        const ReflectionCurve curve = evaluator_raw(x);
        try {
            return detail::stack_features(feature_extractor(curve));
        } catch (const NumericError& e) {
            throw FeatureLoss(e.what());
        }
    };
    ResponseObjective obj = [&](const Vector& stacked) {
        return objective_feature(detail::unstack_features(stacked));
    };
    if (x0_curve) {
        const Vector stacked = detail::stack_features(feature_extractor(*x0_curve));
        return tr_optimize(ev, obj, x0, bounds, config, threads, &stacked);
    }
    return tr_optimize(ev, obj, x0, bounds, config, threads);
}

} // namespace pixant

#endif // PIXANT_TRUST_REGION_HPP
