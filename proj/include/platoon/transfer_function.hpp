#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace platoon {

/// Rational transfer function num(s) / den(s), coefficients in descending
/// powers of s. Construction trims leading zeros and rejects improper or
/// degenerate inputs.
class RationalTF {
 public:
  RationalTF(std::vector<double> num, std::vector<double> den);

  const std::vector<double>& num() const noexcept { return num_; }
  const std::vector<double>& den() const noexcept { return den_; }
  int order() const noexcept { return static_cast<int>(den_.size()) - 1; }

  std::complex<double> operator()(std::complex<double> s) const;
  double dc_gain() const;
  /// |tf(j w)| as w -> infinity.
  double high_frequency_gain() const;

  Eigen::VectorXcd poles() const;
  /// Largest pole real part is below -1e-9.
  bool is_hurwitz() const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

/// Evaluates a real polynomial (descending coefficients) at a complex point.
std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> s);

/// Roots of a real polynomial via companion-matrix eigenvalues.
Eigen::VectorXcd polyroots(const std::vector<double>& coeffs);

/// Max real part of the eigenvalues of a square matrix.
double spectral_abscissa(const Eigen::MatrixXd& a);

}  // namespace platoon
