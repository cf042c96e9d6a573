#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nlbode::lti {

using Complex = std::complex<double>;
/// Polynomial coefficients in descending powers of s.
using Poly = std::vector<double>;

class LtiError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Complex poly_eval(const Poly& p, Complex s);
/// Roots via eigenvalues of the companion matrix.
std::vector<Complex> poly_roots(const Poly& p);

/// Real-rational SISO transfer function num(s)/den(s).
class TransferFunction {
  public:
    TransferFunction() : TransferFunction(Poly{1.0}, Poly{1.0}) {}
    TransferFunction(Poly num, Poly den);
    static TransferFunction gain(double k) { return {Poly{k}, Poly{1.0}}; }

    [[nodiscard]] const Poly& num() const { return num_; }
    [[nodiscard]] const Poly& den() const { return den_; }
    [[nodiscard]] int order() const { return static_cast<int>(den_.size()) - 1; }
    [[nodiscard]] int relative_degree() const { return static_cast<int>(den_.size() - num_.size()); }
    [[nodiscard]] bool is_proper() const { return num_.size() <= den_.size(); }
    [[nodiscard]] bool is_strictly_proper() const { return num_.size() < den_.size(); }
    [[nodiscard]] bool is_zero() const { return num_.size() == 1 && num_[0] == 0.0; }

    /// Throws LtiError when s is (numerically) a pole.
    [[nodiscard]] Complex eval(Complex s) const;
    [[nodiscard]] Complex operator()(Complex s) const { return eval(s); }
    /// G(j w).
    [[nodiscard]] Complex freq(double w) const { return eval({0.0, w}); }

    /// lim_{s -> inf} G(s); +inf for improper G.
    [[nodiscard]] double high_frequency_gain() const;
    /// G(0); +inf when G has a pole at the origin.
    [[nodiscard]] double dc_gain() const;

    [[nodiscard]] std::vector<Complex> poles() const { return poly_roots(den_); }
    [[nodiscard]] std::vector<Complex> zeros() const { return poly_roots(num_); }

    friend TransferFunction operator*(const TransferFunction& a, const TransferFunction& b);
    friend TransferFunction operator+(const TransferFunction& a, const TransferFunction& b);
    friend TransferFunction operator-(const TransferFunction& a);
    friend TransferFunction operator-(const TransferFunction& a, const TransferFunction& b) { return a + (-b); }

  private:
    Poly num_;
    Poly den_;
};

struct PoleClass {
    int stable_pole_count = 0;
    int integrator_count = 0;
    int unstable_pole_count = 0;
};

PoleClass classify_poles(const TransferFunction& g, double tol = 1e-9);

struct StateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    double d = 0.0;

    [[nodiscard]] int order() const { return static_cast<int>(a.rows()); }
    /// C (sI - A)^{-1} B + D.
    [[nodiscard]] Complex eval(Complex s) const;
};

/// Controllable canonical realization. Throws for improper G.
StateSpace realize(const TransferFunction& g);

/// (P_zw, P_ew, P_zr, P_er) of the sensitivity LFR with w entering at the plant input.
struct SensitivityBlocks {
    TransferFunction zw, ew, zr, er;
};
/// (P_zw, P_yw, P_ze, P_ye) of the loop-transfer LFR.
struct LoopBlocks {
    TransferFunction zw, yw, ze, ye;
};

/// 1 / (1 + G K) formed from the explicit closed-loop polynomial.
TransferFunction sensitivity(const TransferFunction& g, const TransferFunction& k);
/// Throws LtiError if the LTI closed loop is not strictly stable.
SensitivityBlocks lfr_blocks_sensitivity(const TransferFunction& g, const TransferFunction& k);
LoopBlocks lfr_blocks_looptransfer(const TransferFunction& g, const TransferFunction& k);

}  // namespace nlbode::lti
