#pragma once

#include <cmath>

#include "chemotaxsim/errors.hpp"

namespace chemotaxsim {

// pow with fast paths for the exponents the model actually uses; avoids
// paying libm cost in the hot per-cell loops for m = 2, 3.
inline double fast_pow(double s, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return s;
    if (e == 2.0) return s * s;
    if (e == 0.5) return std::sqrt(s);
    if (e == -1.0) return 1.0 / s;
    return std::pow(s, e);
}

// Diffusion law D(s) = delta*(s+shift)^(m-1) + d0 with delta > 0, m >= 1,
// d0 >= 0, shift >= 0. This closed family covers the bare power law, the
// power law with a positive offset, and every shift-regularization of either,
// and always satisfies D(s) >= delta*s^(m-1).
class DiffusionSpec {
public:
    static DiffusionSpec power(double delta, double m) {
        return DiffusionSpec(delta, m, 0.0, 0.0);
    }
    static DiffusionSpec power_offset(double delta, double m, double d0) {
        if (!(d0 > 0.0)) throw parameter_error("power_offset requires d0 > 0");
        return DiffusionSpec(delta, m, d0, 0.0);
    }

    // D_eps(s) = D(s + eps); shifting twice composes additively.
    DiffusionSpec shifted(double eps) const {
        if (!(eps > 0.0)) throw parameter_error("shift_regularize requires eps > 0");
        return DiffusionSpec(delta_, m_, d0_, shift_ + eps);
    }

    double delta() const { return delta_; }
    double m() const { return m_; }
    double offset() const { return d0_; }
    double shift() const { return shift_; }

    // Degenerate means D(0) = 0, i.e. bare power law with m > 1.
    bool degenerate() const { return d0_ == 0.0 && shift_ == 0.0 && m_ > 1.0; }

    double operator()(double s) const {
        if (s < 0.0) throw parameter_error("eval_D requires s >= 0");
        return delta_ * fast_pow(s + shift_, m_ - 1.0) + d0_;
    }

    // Dbar(s) = int_0^s D; exact closed form, Dbar(0) = 0.
    double antiderivative(double s) const {
        if (s < 0.0) throw parameter_error("eval_Dbar requires s >= 0");
        const double a = delta_ / m_;
        return a * (fast_pow(s + shift_, m_) - fast_pow(shift_, m_)) + d0_ * s;
    }

    // Fast path used inside the stepper loops (no argument check).
    double unchecked(double s) const {
        return delta_ * fast_pow(s + shift_, m_ - 1.0) + d0_;
    }

private:
    DiffusionSpec(double delta, double m, double d0, double shift)
        : delta_(delta), m_(m), d0_(d0), shift_(shift) {
        if (!(delta > 0.0)) throw parameter_error("diffusion delta must be > 0");
        if (!(m >= 1.0)) throw parameter_error("diffusion exponent m must be >= 1");
    }

    double delta_, m_, d0_, shift_;
};

} // namespace chemotaxsim
