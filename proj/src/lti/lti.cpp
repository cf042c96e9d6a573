#include "nlbode/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace nlbode::lti {

namespace {

Poly trim(Poly p) {
    const auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
    if (first == p.end()) {
        return {0.0};
    }
    p.erase(p.begin(), first);
    return p;
}

double poly_abs_sum(const Poly& p, double r) {
    double acc = 0.0;
    for (double c : p) {
        acc = acc * r + std::abs(c);
    }
    return acc;
}

}  // namespace

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return trim(std::move(out));
}

Poly poly_add(const Poly& a, const Poly& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Poly out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[n - a.size() + i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        out[n - b.size() + i] += b[i];
    }
    return trim(std::move(out));
}

Complex poly_eval(const Poly& p, Complex s) {
    Complex acc = 0.0;
    for (double c : p) {
        acc = acc * s + c;
    }
    return acc;
}

std::vector<Complex> poly_roots(const Poly& p_in) {
    const Poly p = trim(p_in);
    const auto n = static_cast<Eigen::Index>(p.size()) - 1;
    if (n <= 0) {
        return {};
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        companion(0, i) = -p[static_cast<std::size_t>(i) + 1] / p[0];
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Complex> roots;
    roots.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        roots.push_back(solver.eigenvalues()(i));
    }
    return roots;
}

TransferFunction::TransferFunction(Poly num, Poly den) : num_(trim(std::move(num))), den_(trim(std::move(den))) {
    if (den_.size() == 1 && den_[0] == 0.0) {
        throw LtiError("transfer function denominator is identically zero");
    }
    for (double c : num_) {
        if (!std::isfinite(c)) {
            throw LtiError("non-finite numerator coefficient");
        }
    }
    for (double c : den_) {
        if (!std::isfinite(c)) {
            throw LtiError("non-finite denominator coefficient");
        }
    }
}

Complex TransferFunction::eval(Complex s) const {
    const Complex d = poly_eval(den_, s);
    if (std::abs(d) <= 1e-14 * poly_abs_sum(den_, std::abs(s))) {
        throw LtiError("evaluation at pole");
    }
    return poly_eval(num_, s) / d;
}

double TransferFunction::high_frequency_gain() const {
    if (num_.size() > den_.size()) {
        return std::numeric_limits<double>::infinity();
    }
    if (num_.size() < den_.size()) {
        return 0.0;
    }
    return num_[0] / den_[0];
}

double TransferFunction::dc_gain() const {
    if (den_.back() == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return num_.back() / den_.back();
}

TransferFunction operator*(const TransferFunction& a, const TransferFunction& b) {
    return {poly_mul(a.num_, b.num_), poly_mul(a.den_, b.den_)};
}

TransferFunction operator+(const TransferFunction& a, const TransferFunction& b) {
    if (a.den_ == b.den_) {
        return {poly_add(a.num_, b.num_), a.den_};
    }
    return {poly_add(poly_mul(a.num_, b.den_), poly_mul(b.num_, a.den_)), poly_mul(a.den_, b.den_)};
}

TransferFunction operator-(const TransferFunction& a) {
    Poly n = a.num_;
    for (double& c : n) {
        c = -c;
    }
    return {std::move(n), a.den_};
}

PoleClass classify_poles(const TransferFunction& g, double tol) {
    PoleClass pc;
    for (Complex p : g.poles()) {
        if (std::abs(p.real()) < tol && std::abs(p.imag()) < tol) {
            ++pc.integrator_count;
        } else if (p.real() < -tol) {
            ++pc.stable_pole_count;
        } else {
            ++pc.unstable_pole_count;
        }
    }
    return pc;
}

Complex StateSpace::eval(Complex s) const {
    const auto n = a.rows();
    if (n == 0) {
        return d;
    }
    const Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - a.cast<Complex>();
    const Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<Complex>());
    return (c.cast<Complex>() * x)(0) + d;
}

StateSpace realize(const TransferFunction& g) {
    if (!g.is_proper()) {
        throw LtiError("cannot realize an improper transfer function");
    }
    const Poly& den = g.den();
    const auto n = static_cast<Eigen::Index>(den.size()) - 1;
    const double lead = den[0];
    Poly num(den.size(), 0.0);
    std::copy(g.num().begin(), g.num().end(), num.end() - static_cast<std::ptrdiff_t>(g.num().size()));

    StateSpace ss;
    ss.d = num[0] / lead;
    ss.a = Eigen::MatrixXd::Zero(n, n);
    ss.b = Eigen::VectorXd::Zero(n);
    ss.c = Eigen::RowVectorXd::Zero(n);
    if (n == 0) {
        return ss;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i) + 1;
        ss.a(0, i) = -den[k] / lead;
        ss.c(i) = num[k] / lead - ss.d * den[k] / lead;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        ss.a(i, i - 1) = 1.0;
    }
    ss.b(0) = 1.0;
    return ss;
}

TransferFunction sensitivity(const TransferFunction& g, const TransferFunction& k) {
    const Poly open_den = poly_mul(g.den(), k.den());
    const Poly closed = poly_add(open_den, poly_mul(g.num(), k.num()));
    return {open_den, closed};
}

SensitivityBlocks lfr_blocks_sensitivity(const TransferFunction& g, const TransferFunction& k) {
    const Poly closed = poly_add(poly_mul(g.den(), k.den()), poly_mul(g.num(), k.num()));
    const PoleClass pc = classify_poles(TransferFunction(Poly{1.0}, closed));
    if (pc.unstable_pole_count > 0 || pc.integrator_count > 0) {
        throw LtiError("LTI closed loop unstable; SRG analysis for unstable P_zw out of scope");
    }
    const TransferFunction sg(poly_mul(g.num(), k.den()), closed);
    return {
        .zw = -sg,
        .ew = sg,
        .zr = TransferFunction(poly_mul(g.num(), k.num()), closed),
        .er = TransferFunction(poly_mul(g.den(), k.den()), closed),
    };
}

LoopBlocks lfr_blocks_looptransfer(const TransferFunction& g, const TransferFunction& k) {
    const TransferFunction loop = g * k;
    return {.zw = -g, .yw = -g, .ze = loop, .ye = loop};
}

}  // namespace nlbode::lti
