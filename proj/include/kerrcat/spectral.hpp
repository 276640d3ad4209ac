#pragma once

// Parity-labelled spectra of the driven Kerr oscillator, the computational gap
// E01 = E1 - E0 and its detuning derivative, and the robust line where that
// derivative vanishes.
//
// The Kerr term -(K/2) a^dag^2 a^2 puts the cat manifold at the TOP of the
// spectrum, so the k-th state of a parity sector is counted downwards from
// the highest energy: |0> is the highest even state, |1> the highest odd one,
// |2> the next even state and so on.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>
#include <ostream>
#include <utility>
#include <vector>

#include "kerrcat/fock.hpp"
#include "kerrcat/interp.hpp"

namespace kerrcat {

struct LabeledSpectrum {
  RealVector energies;  // ascending
  Matrix states;        // columns match energies
  std::vector<int> parities;
  int comp0 = -1;  // highest even-parity state
  int comp1 = -1;  // highest odd-parity state

  int size() const { return static_cast<int>(energies.size()); }

  /// Index of the k-th state (from the top) of the given parity sector, i.e.
  /// the level labelled 2k (parity +1) or 2k+1 (parity -1).
  int level(int parity, int k) const {
    int seen = 0;
    for (int i = size() - 1; i >= 0; --i) {
      if (parities[i] == parity) {
        if (seen == k) return i;
        ++seen;
      }
    }
    return -1;
  }

  /// Index of the paper-style label |label>, label = 2k (even) or 2k+1 (odd).
  int labeled(int label) const { return level(label % 2 == 0 ? 1 : -1, label / 2); }

  double energy(int label) const { return energies(labeled(label)); }
  Vector state(int label) const { return states.col(labeled(label)); }
};

/// Fix the global phase so that the largest-magnitude Fock coefficient is real positive.
inline void fix_gauge(Eigen::Ref<Vector> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx c = v(imax);
  if (std::abs(c) > 0.0) v *= std::conj(c) / std::abs(c);
}

namespace detail {

struct BlockEigen {
  RealVector values;
  Matrix vectors;
};

inline BlockEigen hermitian_eigen(const Matrix& h) {
  BlockEigen out;
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h.real());
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

inline void require_hermitian(const Matrix& h, double tol = 1e-12) {
  const double norm = h.norm();
  if (norm > 0.0 && (h - h.adjoint()).norm() > tol * norm)
    fail(ErrorKind::NotHermitian, "operator is not Hermitian");
  if (!h.allFinite()) fail(ErrorKind::InvalidInput, "operator has non-finite entries");
}

}  // namespace detail

/// Dense Hermitian eigendecomposition with parity labels.
///
/// The parity operator must be diagonal with entries +-1 (Fock parity or a
/// tensor product of them). H is diagonalized separately in each parity
/// block, which keeps labels exact inside degenerate cat pairs.
inline LabeledSpectrum diagonalize_labeled(const Matrix& h, const Matrix& parity) {
  detail::require_hermitian(h);
  const int d = static_cast<int>(h.rows());
  if (parity.rows() != d || parity.cols() != d) fail(ErrorKind::InvalidInput, "parity shape mismatch");
  if (!parity.isDiagonal(1e-14)) fail(ErrorKind::InvalidInput, "parity operator must be diagonal in the Fock basis");
  std::vector<int> even, odd;
  for (int i = 0; i < d; ++i) {
    const double p = parity(i, i).real();
    if (std::abs(p - 1.0) < 1e-12) {
      even.push_back(i);
    } else if (std::abs(p + 1.0) < 1e-12) {
      odd.push_back(i);
    } else {
      fail(ErrorKind::InvalidInput, "parity entries must be +-1");
    }
  }
  const double hnorm = std::max(h.norm(), 1e-300);
  if ((h * parity - parity * h).norm() > 1e-8 * hnorm)
    fail(ErrorKind::ParityMismatch, "Hamiltonian does not commute with parity");

  struct Entry {
    double e;
    int parity;
    Vector v;
  };
  std::vector<Entry> entries;
  entries.reserve(d);
  auto block = [&](const std::vector<int>& idx, int sign) {
    if (idx.empty()) return;
    const int m = static_cast<int>(idx.size());
    Matrix sub(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sub(i, j) = h(idx[i], idx[j]);
    const auto eig = detail::hermitian_eigen(sub);
    for (int k = 0; k < m; ++k) {
      Vector v = Vector::Zero(d);
      for (int i = 0; i < m; ++i) v(idx[i]) = eig.vectors(i, k);
      fix_gauge(v);
      entries.push_back({eig.values(k), sign, std::move(v)});
    }
  };
  block(even, 1);
  block(odd, -1);
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.e < b.e; });

  LabeledSpectrum out;
  out.energies.resize(d);
  out.states.resize(d, d);
  out.parities.resize(d);
  for (int i = 0; i < d; ++i) {
    out.energies(i) = entries[i].e;
    out.states.col(i) = entries[i].v;
    out.parities[i] = entries[i].parity;
  }
  out.comp0 = out.level(1, 0);
  out.comp1 = out.level(-1, 0);
  return out;
}

inline LabeledSpectrum diagonalize_labeled(const Operator& h, const Operator& parity) {
  return diagonalize_labeled(h.matrix, parity.matrix);
}

/// Top states of each parity sector of the real, parity-conserving
/// Hamiltonian at (delta, eps2); cheap path for gap scans.
struct SectorTops {
  double e_even0, e_even1;  // highest and next even energies
  double e_odd0, e_odd1;
  double n_even0, n_odd0;  // <a^dag a> in the two top states
  RealVector v_even0, v_odd0;  // Fock coefficients on the even / odd sublattice
};

inline SectorTops sector_tops(double delta, double eps2, double kerr, int dim) {
  SectorTops out{};
  for (int sector = 0; sector < 2; ++sector) {
    const int m = (dim - sector + 1) / 2;
    RealMatrix h = RealMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const double n = 2.0 * i + sector;
      h(i, i) = delta * n - 0.5 * kerr * n * (n - 1.0);
      if (i + 1 < m) {
        const double off = 0.5 * eps2 * std::sqrt((n + 1.0) * (n + 2.0));
        h(i, i + 1) = off;
        h(i + 1, i) = off;
      }
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    const RealVector& w = es.eigenvalues();
    RealVector v = es.eigenvectors().col(m - 1);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    double nexp = 0.0;
    for (int i = 0; i < m; ++i) nexp += v(i) * v(i) * (2.0 * i + sector);
    const double top = w(m - 1);
    const double second = m > 1 ? w(m - 2) : -std::numeric_limits<double>::infinity();
    if (sector == 0) {
      out.e_even0 = top;
      out.e_even1 = second;
      out.n_even0 = nexp;
      out.v_even0 = std::move(v);
    } else {
      out.e_odd0 = top;
      out.e_odd1 = second;
      out.n_odd0 = nexp;
      out.v_odd0 = std::move(v);
    }
  }
  return out;
}

struct GapPoint {
  double gap;    // E1 - E0
  double deriv;  // d(E1 - E0)/d delta by Hellmann-Feynman
  double separation;  // min distance of E0, E1 to their parity-sector neighbours
};

/// Gap and derivative at total detuning delta (eps2 is the total two-photon drive).
inline GapPoint gap_point_raw(double delta, double eps2, double kerr, int dim) {
  const auto s = sector_tops(delta, eps2, kerr, dim);
  return {s.e_odd0 - s.e_even0, s.n_odd0 - s.n_even0, std::min(s.e_even0 - s.e_even1, s.e_odd0 - s.e_odd1)};
}

inline double energy_gap(const KerrCatParams& params, double shift, const FockSpace& space) {
  params.validate();
  if (!std::isfinite(shift)) fail(ErrorKind::InvalidInput, "non-finite detuning shift");
  return gap_point_raw(params.delta + shift, params.eps2_0, params.kerr, space.dim()).gap;
}

inline double gap_derivative(const KerrCatParams& params, double shift, const FockSpace& space) {
  params.validate();
  if (!std::isfinite(shift)) fail(ErrorKind::InvalidInput, "non-finite detuning shift");
  const auto g = gap_point_raw(params.delta + shift, params.eps2_0, params.kerr, space.dim());
  if (!(g.separation > 1e-8 * params.kerr))
    fail(ErrorKind::IllConditioned, "computational level is degenerate with an excited level of the same parity");
  return g.deriv;
}

struct RobustRoot {
  double delta;
  double deriv;  // residual derivative at the root
  double gap;
  bool maximum;  // derivative changes sign from + to -
};

/// All zeros of d(E01)/d(delta) in (0, K) located from a coarse scan and
/// refined by bisection.
inline std::vector<RobustRoot> robust_line_roots(double alpha2, const FockSpace& space, double kerr = 1.0,
                                                 int coarse = 64) {
  if (!(alpha2 >= 0.0) || !std::isfinite(alpha2)) fail(ErrorKind::InvalidInput, "cat size must be >= 0");
  const double eps2 = alpha2 * kerr;
  const int dim = space.dim();
  auto deriv = [&](double d) { return gap_point_raw(d, eps2, kerr, dim).deriv; };
  std::vector<double> xs(coarse + 1), fs(coarse + 1);
  for (int i = 0; i <= coarse; ++i) {
    xs[i] = kerr * i / coarse;
    fs[i] = deriv(xs[i]);
  }
  std::vector<RobustRoot> roots;
  for (int i = 0; i < coarse; ++i) {
    if (fs[i] == 0.0 && i > 0) {
      roots.push_back({xs[i], 0.0, gap_point_raw(xs[i], eps2, kerr, dim).gap, fs[i - 1] > 0.0});
      continue;
    }
    if ((fs[i] > 0.0) == (fs[i + 1] > 0.0) || fs[i + 1] == 0.0) continue;
    double a = xs[i], b = xs[i + 1], fa = fs[i];
    double mid = 0.5 * (a + b), fm = deriv(mid);
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (a + b);
      fm = deriv(mid);
      if (fm == 0.0) break;
      if ((fm > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
      if (b - a < 1e-10 * kerr && std::abs(fm) < 1e-9 * kerr) break;
      if (b - a < 1e-15 * kerr) break;
    }
    roots.push_back({mid, fm, gap_point_raw(mid, eps2, kerr, dim).gap, fs[i] > 0.0});
  }
  return roots;
}

/// The detuning delta_rob in (0, K) where the computational gap is maximal and
/// first-order insensitive to detuning.
inline double robust_line(double alpha2, const FockSpace& space, double kerr = 1.0) {
  const auto roots = robust_line_roots(alpha2, space, kerr);
  for (const auto& r : roots) {
    if (r.maximum && std::abs(r.deriv) < 1e-9 * kerr && r.gap > 0.0) return r.delta;
  }
  fail(ErrorKind::NoRobustPoint, "no zero of the gap derivative in (0, K) at alpha^2 = " + std::to_string(alpha2));
}

/// delta_rob(alpha^2) tabulated over [lo, hi] and interpolated by cubic
/// Hermite segments. Node slopes come from the implicit-function theorem on
/// D(delta, alpha^2) = dE01/ddelta = 0 with central differences of D.
class RobustLineTable {
 public:
  RobustLineTable(double alpha2_lo, double alpha2_hi, const FockSpace& space, double kerr = 1.0, int nodes = 200)
      : lo_(alpha2_lo), hi_(alpha2_hi), kerr_(kerr), space_(space) {
    if (!(alpha2_hi > alpha2_lo) || nodes < 2) fail(ErrorKind::InvalidInput, "robust-line table needs lo < hi");
    std::vector<double> xs(nodes), ys(nodes), ms(nodes);
    const int dim = space.dim();
    auto d = [&](double delta, double a2) { return gap_point_raw(delta, a2 * kerr, kerr, dim).deriv; };
    for (int i = 0; i < nodes; ++i) {
      xs[i] = lo_ + (hi_ - lo_) * i / (nodes - 1);
      try {
        ys[i] = robust_line(xs[i], space, kerr);
      } catch (const Error& e) {
        fail(ErrorKind::SchemeInfeasible, std::string("robust line undefined on the ramp: ") + e.what());
      }
      const double h = 1e-4;
      const double dd = (d(ys[i] + h * kerr, xs[i]) - d(ys[i] - h * kerr, xs[i])) / (2.0 * h * kerr);
      const double da = (d(ys[i], xs[i] + h) - d(ys[i], xs[i] - h)) / (2.0 * h);
      ms[i] = -da / dd;
    }
    interp_ = CubicHermite(std::move(xs), std::move(ys), std::move(ms));
  }

  double operator()(double alpha2) const { return interp_(alpha2); }
  double derivative(double alpha2) const { return interp_.derivative(alpha2); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const FockSpace& space() const { return space_; }
  double kerr() const { return kerr_; }

 private:
  double lo_, hi_, kerr_;
  FockSpace space_;
  CubicHermite interp_;
};

/// Process-wide cache of robust-line tables keyed by (range, dim, K); tables
/// are immutable once built.
inline std::shared_ptr<const RobustLineTable> cached_robust_line(double alpha2_lo, double alpha2_hi,
                                                                 const FockSpace& space, double kerr = 1.0) {
  static std::mutex mutex;
  static std::map<std::tuple<double, double, int, double>, std::shared_ptr<const RobustLineTable>> cache;
  const auto key = std::make_tuple(alpha2_lo, alpha2_hi, space.dim(), kerr);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const RobustLineTable>(alpha2_lo, alpha2_hi, space, kerr);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

struct GapLandscape {
  std::vector<double> delta_grid;
  std::vector<double> alpha2_grid;
  std::vector<std::vector<double>> gap;        // [alpha2][delta]
  std::vector<std::vector<double>> gap_deriv;  // [alpha2][delta]

  void write_csv(std::ostream& os) const {
    os << "delta,alpha2,gap,gap_deriv\n";
    os.precision(17);
    for (std::size_t j = 0; j < alpha2_grid.size(); ++j)
      for (std::size_t i = 0; i < delta_grid.size(); ++i)
        os << delta_grid[i] << ',' << alpha2_grid[j] << ',' << gap[j][i] << ',' << gap_deriv[j][i] << '\n';
  }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

inline GapLandscape gap_landscape(const std::vector<double>& deltas, const std::vector<double>& alpha2s,
                                  const FockSpace& space, double kerr = 1.0) {
  GapLandscape out{deltas, alpha2s, {}, {}};
  out.gap.assign(alpha2s.size(), std::vector<double>(deltas.size()));
  out.gap_deriv = out.gap;
  for (std::size_t j = 0; j < alpha2s.size(); ++j) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const auto g = gap_point_raw(deltas[i], alpha2s[j] * kerr, kerr, space.dim());
      out.gap[j][i] = g.gap;
      out.gap_deriv[j][i] = g.deriv;
    }
  }
  return out;
}

}  // namespace kerrcat
