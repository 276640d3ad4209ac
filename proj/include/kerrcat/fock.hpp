#pragma once

// Truncated Fock-space operators and the driven Kerr-oscillator Hamiltonian.
//
// Energies are in units of the Kerr nonlinearity K and times in units of 1/K
// unless a KerrCatParams with kerr != 1 is supplied.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include "kerrcat/error.hpp"

namespace kerrcat {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

class FockSpace {
 public:
  explicit FockSpace(int dim) : dim_(dim) {
    if (dim < 2) fail(ErrorKind::InvalidSpace, "Fock dimension must be >= 2, got " + std::to_string(dim));
  }

  int dim() const noexcept { return dim_; }
  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_;
};

inline constexpr int kDefaultFockDim = 40;

struct KerrCatParams {
  double kerr = 1.0;
  double eps2_0 = 0.0;
  double delta = 0.0;

  static KerrCatParams from_alpha2(double alpha2, double kerr = 1.0, double delta = 0.0) {
    KerrCatParams p{kerr, alpha2 * kerr, delta};
    p.validate();
    return p;
  }

  double alpha2() const noexcept { return eps2_0 / kerr; }

  void validate() const {
    if (!(kerr > 0.0) || !std::isfinite(kerr)) fail(ErrorKind::InvalidInput, "Kerr nonlinearity must be positive");
    if (!(eps2_0 >= 0.0) || !std::isfinite(eps2_0)) fail(ErrorKind::InvalidInput, "two-photon drive must be >= 0");
    if (!std::isfinite(delta)) fail(ErrorKind::InvalidInput, "detuning must be finite");
  }
};

/// A dense operator on a truncated Fock space.
struct Operator {
  Matrix matrix;
  FockSpace space;

  Operator(Matrix m, FockSpace s) : matrix(std::move(m)), space(s) {
    if (matrix.rows() != space.dim() || matrix.cols() != space.dim())
      fail(ErrorKind::InvalidSpace, "operator shape does not match Fock dimension");
  }

  Operator adjoint() const { return {matrix.adjoint(), space}; }

  /// ||H - H^dagger||_F / ||H||_F (0 for the zero operator).
  double hermiticity_defect() const {
    const double norm = matrix.norm();
    if (norm == 0.0) return 0.0;
    return (matrix - matrix.adjoint()).norm() / norm;
  }
};

/// Annihilation operator, a|n> = sqrt(n)|n-1>.
inline Operator build_ladder(const FockSpace& space) {
  const int d = space.dim();
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {std::move(a), space};
}

inline Operator number_operator(const FockSpace& space) {
  const int d = space.dim();
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return {std::move(n), space};
}

inline Operator parity_operator(const FockSpace& space) {
  const int d = space.dim();
  Matrix p = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return {std::move(p), space};
}

enum class Channel { Detuning = 0, Eps2 = 1, EpsX = 2, EpsY = 3 };
inline constexpr int kNumChannels = 4;

inline std::string channel_name(Channel c) {
  switch (c) {
    case Channel::Detuning: return "delta";
    case Channel::Eps2: return "eps2_mod";
    case Channel::EpsX: return "eps_x";
    case Channel::EpsY: return "eps_y";
  }
  return "?";
}

/// Instantaneous scalar values of the control channels; missing channels are zero.
struct ChannelValues {
  double detuning = 0.0;  // adds to the static detuning (delta(t) or an error shift)
  double eps2 = 0.0;      // modulation of the two-photon drive
  double eps_x = 0.0;
  double eps_y = 0.0;

  double operator[](Channel c) const {
    switch (c) {
      case Channel::Detuning: return detuning;
      case Channel::Eps2: return eps2;
      case Channel::EpsX: return eps_x;
      case Channel::EpsY: return eps_y;
    }
    return 0.0;
  }

  bool finite() const {
    return std::isfinite(detuning) && std::isfinite(eps2) && std::isfinite(eps_x) && std::isfinite(eps_y);
  }
};

/// H = drift + sum_c value_c * coupling_c.
///
/// drift      = delta a^dag a - (K/2) a^dag^2 a^2 + (eps2_0/2)(a^2 + a^dag^2)
/// Detuning  -> a^dag a
/// Eps2      -> (a^2 + a^dag^2)/2
/// EpsX      -> (a + a^dag)/2
/// EpsY      -> -i(a - a^dag)/2
class HamiltonianAssembly {
 public:
  HamiltonianAssembly(const KerrCatParams& params, const FockSpace& space) : params_(params), space_(space) {
    params.validate();
    const Matrix a = build_ladder(space).matrix;
    const Matrix ad = a.adjoint();
    const Matrix n = number_operator(space).matrix;
    const Matrix a2 = a * a;
    const Matrix ad2 = ad * ad;
    drift_ = params.delta * n - 0.5 * params.kerr * (ad2 * a2) + 0.5 * params.eps2_0 * (a2 + ad2);
    channels_[0] = n;
    channels_[1] = 0.5 * (a2 + ad2);
    channels_[2] = 0.5 * (a + ad);
    channels_[3] = -0.5 * kI * (a - ad);
  }

  const KerrCatParams& params() const noexcept { return params_; }
  const FockSpace& space() const noexcept { return space_; }
  const Matrix& drift() const noexcept { return drift_; }
  const Matrix& channel(Channel c) const noexcept { return channels_[static_cast<int>(c)]; }

  Matrix assemble(const ChannelValues& v) const {
    if (!v.finite()) fail(ErrorKind::InvalidInput, "non-finite channel value");
    Matrix h = drift_;
    for (int c = 0; c < kNumChannels; ++c) {
      const double x = v[static_cast<Channel>(c)];
      if (x != 0.0) h += x * channels_[c];
    }
    return h;
  }

 private:
  KerrCatParams params_;
  FockSpace space_;
  Matrix drift_;
  Matrix channels_[kNumChannels];
};

inline Operator build_hamiltonian(const KerrCatParams& params, const FockSpace& space,
                                  const ChannelValues& values = {}) {
  return {HamiltonianAssembly(params, space).assemble(values), space};
}

/// ||[a, b]||_F / ||a||_F.
inline double relative_commutator_norm(const Matrix& a, const Matrix& b) {
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a * b - b * a).norm() / scale;
}

}  // namespace kerrcat
