#include "platoon/transfer_function.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "platoon/error.hpp"

namespace platoon {
namespace {

std::vector<double> trim_leading_zeros(std::vector<double> c) {
  std::size_t first = 0;
  while (first + 1 < c.size() && c[first] == 0.0) ++first;
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(first));
  return c;
}

}  // namespace

std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

Eigen::VectorXcd polyroots(const std::vector<double>& coeffs) {
  const auto c = trim_leading_zeros(coeffs);
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) return Eigen::VectorXcd(0);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues();
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  return solver.eigenvalues().real().maxCoeff();
}

RationalTF::RationalTF(std::vector<double> num, std::vector<double> den)
    : num_(trim_leading_zeros(std::move(num))), den_(trim_leading_zeros(std::move(den))) {
  if (num_.empty()) num_ = {0.0};
  if (den_.empty() || den_.front() == 0.0) {
    throw Error(ErrorCode::kInvalidInput, "transfer function denominator is zero");
  }
  for (double c : num_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::kInvalidInput, "non-finite numerator");
  }
  for (double c : den_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::kInvalidInput, "non-finite denominator");
  }
  if (num_.size() > den_.size()) {
    throw Error(ErrorCode::kInvalidInput, "transfer function is improper");
  }
}

std::complex<double> RationalTF::operator()(std::complex<double> s) const {
  return polyval(num_, s) / polyval(den_, s);
}

double RationalTF::dc_gain() const { return num_.back() / den_.back(); }

double RationalTF::high_frequency_gain() const {
  if (num_.size() < den_.size()) return 0.0;
  return std::abs(num_.front() / den_.front());
}

Eigen::VectorXcd RationalTF::poles() const { return polyroots(den_); }

bool RationalTF::is_hurwitz() const {
  const auto p = poles();
  return p.size() == 0 || p.real().maxCoeff() < -1e-9;
}

}  // namespace platoon
