#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <string>

#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"

namespace droplet {

/// Coefficients psi(x) of a many-body vector, stored as one dense complex
/// vector per particle-number sector that carries weight.
class AmplitudeMap {
 public:
  explicit AmplitudeMap(Lattice lattice) : lattice_(lattice) {}

  const Lattice& lattice() const { return lattice_; }

  struct Sector {
    SectorBasisPtr basis;
    Eigen::VectorXcd values;
  };

  const std::map<int, Sector>& sectors() const { return sectors_; }

  /// Highest particle number with a stored sector, -1 when empty.
  int n_max() const { return sectors_.empty() ? -1 : sectors_.rbegin()->first; }

  Sector& sector(int n) {
    auto it = sectors_.find(n);
    if (it == sectors_.end()) {
      auto basis = enumerate_sector(lattice_, n);
      const auto dim = static_cast<Eigen::Index>(basis->size());
      it = sectors_.emplace(n, Sector{basis, Eigen::VectorXcd::Zero(dim)}).first;
    }
    return it->second;
  }

  /// Adds coef * v to the sector of `basis`; v is indexed by basis ordinals.
  template <typename Derived>
  void add(const SectorBasisPtr& basis, const Eigen::MatrixBase<Derived>& v, std::complex<double> coef = 1.0) {
    if (!(basis->lattice() == lattice_)) throw DomainError("AmplitudeMap::add: lattice mismatch");
    auto it = sectors_.find(basis->particles());
    if (it == sectors_.end()) {
      it = sectors_
               .emplace(basis->particles(),
                        Sector{basis, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()))})
               .first;
    }
    it->second.values += coef * v.template cast<std::complex<double>>();
  }

  void set(const Configuration& x, std::complex<double> value) {
    auto& s = sector(x.count());
    s.values(static_cast<Eigen::Index>(s.basis->index_of(x))) = value;
  }

  std::complex<double> at(const Configuration& x) const {
    auto it = sectors_.find(x.count());
    if (it == sectors_.end() || !x.fits(lattice_)) return 0.0;
    return it->second.values(static_cast<Eigen::Index>(it->second.basis->index_of(x)));
  }

  double norm_squared() const {
    double s = 0;
    for (const auto& [n, sec] : sectors_) s += sec.values.squaredNorm();
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  void scale(std::complex<double> f) {
    for (auto& [n, sec] : sectors_) sec.values *= f;
  }

  AmplitudeMap& normalize() {
    const double nrm = norm();
    if (nrm == 0.0) throw DomainError("AmplitudeMap::normalize: zero vector");
    scale(1.0 / nrm);
    return *this;
  }

  /// Weight ||psi^(n)||^2 per sector.
  std::map<int, double> sector_weights() const {
    std::map<int, double> w;
    for (const auto& [n, sec] : sectors_) w[n] = sec.values.squaredNorm();
    return w;
  }

  static AmplitudeMap basis_state(const Lattice& lattice, const Configuration& x) {
    AmplitudeMap psi(lattice);
    psi.set(x, 1.0);
    return psi;
  }

 private:
  Lattice lattice_;
  std::map<int, Sector> sectors_;
};

inline void require_normalized(const AmplitudeMap& psi, double tol, const char* where) {
  if (std::abs(psi.norm() - 1.0) > tol) {
    throw DomainError(std::string(where) + ": state is not normalized (norm = " + std::to_string(psi.norm()) + ")");
  }
}

}  // namespace droplet
