#pragma once

#include "relux/io.hpp"
#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace relux {

/// Catalog entry for gaussian, logistic, tanh and softplus.
struct ActivationSpec {
    Activation act = Activation::logistic;
    double alpha = 0;            // rho''(alpha) != 0
    double second_at_alpha = 0;
    double deriv_point = 0;      // rho'(deriv_point) != 0
    double deriv_value = 0;
    Pwl1D asymptotic;            // l(x)
    /// Bound on |rho(x) - l(x)| valid for |x| >= t >= 1e-5.
    std::function<double(double)> tail_bound;
    /// Bound on sup_x |rho^{(n)}(x)| / n!.
    std::function<double(int)> envelope;

    std::string name() const { return activation_name(act); }
    double operator()(double x) const { return activate(act, x); }
    std::vector<double> taylor_coeffs(double center, int count) const;
};

ActivationSpec activation_spec(Activation a);
ActivationSpec activation_spec(const std::string& name);
std::vector<Activation> activation_catalog();

struct ApproxReport {
    std::string target;
    double lo = -1, hi = 1;
    std::size_t grid_size = 0;
    double max_abs_error = 0;
    double bound = 0;
    std::size_t depth = 0;
    std::size_t width = 0;

    bool within_bound() const { return max_abs_error <= bound; }
    Json to_json() const;
};

/// Uniform grid of `grid` points on [lo, hi] plus `random` uniform points.
std::vector<double> probe_points(double lo, double hi, std::size_t grid = 10000, std::size_t random = 1000,
                                 std::uint64_t seed = 1);

/// x -> (rho(p + h x) - rho(p)) / (h rho'(p)), one enhanced neuron.
struct IdentityBlock {
    Activation act = Activation::logistic;
    double point = 0, h = 0, rho_point = 0, slope = 0;
    double operator()(double x) const;
};

/// Throws ContractError when eps is out of reach in binary64.
std::pair<IdentityBlock, ApproxReport> identity_block(const ActivationSpec& act, double lo, double hi, double eps);

/// sigma_h(x) = (rho(a + h x) - 2 rho(a) + rho(a - h x)) / (h^2 rho''(a)), two enhanced neurons.
struct SquareBlock {
    Activation act = Activation::logistic;
    double alpha = 0, h = 0, rho_alpha = 0, second = 0;
    /// Relative rounding amplification eps_mach |rho(a)| / (h^2 |rho''(a)|).
    double condition = 0;
    double operator()(double x) const;
};

/// The report bound is the Taylor term h^2 sup|rho''''| / (12 |rho''|) plus rounding.
std::pair<SquareBlock, ApproxReport> square_block(const ActivationSpec& act, double h);

/// Prod_{i=0}^{m} (1 + z^{2^i}), z = 1 - x, on square activation.
struct InverseChain {
    Network<Rational> net;
    Rational bound;  // (1 - eps)^{2^{m+1}} / eps
};
InverseChain inverse_chain(const Rational& eps_domain, int m);

/// x P(x) / (P(x) + P(-x)), P(x) = prod_{k<n} (x + xi^k), xi = exp(-1/sqrt(n)).
double newman_rational_reference(int n, double x);
BigFloat newman_rational_mp(int n, const BigFloat& x);
/// Smallest m satisfying the inverse-chain length inequality for degree n.
int newman_chain_length(int n);

/// BigFloat network together with the working precision it was built for.
struct MpNetwork {
    Network<BigFloat> net;
    unsigned digits10 = 50;

    std::vector<double> eval(const std::vector<double>& x) const;
    double eval1(double x) const { return eval({x})[0]; }
};

/// Width-8 network with activation `act` approximating max(0, x) on [-1, 1].
std::pair<MpNetwork, ApproxReport> relu_from_activation_net(const ActivationSpec& act, int n);

/// ReLU net of width 3 and depth n+3: the sawtooth interpolant of x^2, clipped to 1.
std::pair<Network<Rational>, ApproxReport> sawtooth_square_net(int n);

/// ReLU net of width 8 for sum_j coeffs[j] x^j on [-1, 1].
std::pair<Network<Rational>, ApproxReport> relu_polynomial_net(const std::vector<Rational>& coeffs, double eps);

/// ReLU net of width 11 approximating the activation on the whole line.
struct ActivationApproxPlan {
    double half_width = 0;  // I = [-T, T]
    std::size_t windows = 0;
    int degree = 0;
    int square_steps = 0;   // sawtooth n inside the polynomial blocks
    int product_steps = 0;  // sawtooth n of the partition-of-unity product
};
std::pair<Network<double>, ApproxReport> relu_activation_approx_net(const ActivationSpec& act, double eps,
                                                                    ActivationApproxPlan* plan = nullptr);

/// Per-layer accounting of a network transform.
struct TransformLayerInfo {
    double block_eps = 0;        // target block error (unscaled)
    double block_error = 0;      // sup error of one block on [-1, 1] (see the transform)
    double input_scale = 1;      // inputs are multiplied by this before the block
    double amplification = 1;    // Lipschitz factor from this layer to the output
    int n = 0;                   // Newman degree (relu -> activation only)
};

struct TransformDetails {
    std::vector<TransformLayerInfo> layers;
    /// sum_k amplification_k * block_error_k / input_scale_k.
    double composed_bound = 0;
};

/// Replaces every ReLU by a width-8 activation block; inputs in [-1, 1]^{n0}.
std::pair<MpNetwork, ApproxReport> transform_relu_to_activation(const Network<Rational>& net, const ActivationSpec& act,
                                                                double eps, TransformDetails* details = nullptr);

/// Replaces every catalog activation by a width-11 ReLU block.
std::pair<Network<double>, ApproxReport> transform_activation_to_relu(const Network<double>& net, double eps,
                                                                      TransformDetails* details = nullptr);

struct CertificateReport {
    Activation act = Activation::logistic;
    int n_max = 0;
    std::size_t grid_size = 0;
    double max_normalized = 0;      // max |rho^{(n)}| / n! over n >= 1 and the grid
    double max_envelope_ratio = 0;  // max of that value over the closed-form envelope
    double rho_at_zero = 0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    Json to_json() const;
};

/// Checks |rho^{(n)}(x)| / n! <= 1 and <= envelope(n) for 1 <= n <= n_max at the grid points.
CertificateReport certificate_check(const ActivationSpec& act, int n_max, const std::vector<double>& grid);

}  // namespace relux
