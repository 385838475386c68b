#include "dilab/srkh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dilab {

DiagonalKernel::DiagonalKernel(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) throw Error(ErrorCode::InvalidArgument, "kernel needs at least c_0");
  if (std::abs(c_[0] - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "kernel must be normalized (c_0 = 1)");
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (!(c_[k] > 0.0) || !std::isfinite(c_[k])) {
      std::ostringstream os;
      os << "kernel coefficient c_" << k << " = " << c_[k] << " is not positive";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (k + 1 < c_.size()) shift_witness_ = std::max(shift_witness_, c_[k] / c_[k + 1]);
  }
  if (shift_witness_ > 1.0) {
    std::ostringstream os;
    os << "kernel coefficients decrease (sup c_k / c_{k+1} = " << shift_witness_ << "): M_z is not contractive";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

DiagonalKernel DiagonalKernel::hardy(int degree) {
  return DiagonalKernel(std::vector<double>(degree + 1, 1.0));
}

DiagonalKernel DiagonalKernel::bergman(int m, int degree) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "Bergman weight must be >= 1");
  std::vector<double> c(degree + 1);
  for (int k = 0; k <= degree; ++k) c[k] = binomial(m + k - 1, k);
  return DiagonalKernel(std::move(c));
}

double DiagonalKernel::truncated_shift_norm(int degree) const {
  double out = 0.0;
  for (int k = 0; k < std::min(degree, max_degree()); ++k) out = std::max(out, std::sqrt(c_[k] / c_[k + 1]));
  return out;
}

namespace {

void require_degree(const DiagonalKernel& kernel, int degree) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "degree must be >= 0");
  if (degree > kernel.max_degree()) {
    std::ostringstream os;
    os << "kernel has coefficients up to degree " << kernel.max_degree() << ", degree " << degree << " requested";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

// I - sum_{k<K} c_k T^k C T*^k for K = 0..N, sampled at the requested orders.
std::vector<DecaySample> remainder_norms(const ComplexMatrix& t, const DiagonalKernel& kernel,
                                         const ComplexMatrix& c, std::vector<int> orders) {
  const Index d = t.rows();
  std::sort(orders.begin(), orders.end());
  std::vector<DecaySample> out;
  ComplexMatrix rem = ComplexMatrix::Identity(d, d);
  ComplexMatrix tk = ComplexMatrix::Identity(d, d);
  int k = 0;
  for (int order : orders) {
    for (; k < order; ++k) {
      rem -= kernel[k] * (tk * c * tk.adjoint());
      tk = tk * t;
    }
    out.push_back({order, op_norm(hermitian_part(rem))});
  }
  return out;
}

}  // namespace

ReciprocalSeries reciprocal_series(const DiagonalKernel& kernel, int degree) {
  require_degree(kernel, degree);
  ReciprocalSeries out;
  out.coeffs.assign(degree + 1, 0.0);
  out.coeffs[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += kernel[j] * out.coeffs[k - j];
    out.coeffs[k] = -s;
  }
  for (int k = 0; k <= degree; ++k) {
    double conv = 0.0;
    for (int j = 0; j <= k; ++j) conv += out.coeffs[j] * kernel[k - j];
    out.convolution_residual = std::max(out.convolution_residual, std::abs(conv - (k == 0 ? 1.0 : 0.0)));
  }
  return out;
}

KContractCertificate k_contractivity(const ComplexMatrix& t, const DiagonalKernel& kernel, int degree,
                                     const Tolerances& tol) {
  if (t.rows() != t.cols()) throw Error(ErrorCode::ShapeMismatch, "k_contractivity needs a square matrix");
  require_finite(t, "k_contractivity input");
  require_degree(kernel, degree);
  KContractCertificate out;
  out.spectral_radius = spectral_radius(t);
  if (out.spectral_radius >= 1.0 - kC0Margin) {
    std::ostringstream os;
    os << "spectral radius " << out.spectral_radius << " is not below 1";
    throw Error(ErrorCode::SpectralRadiusTooLarge, os.str());
  }
  const ReciprocalSeries b = reciprocal_series(kernel, degree);
  const Index d = t.rows();
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  ComplexMatrix half;
  ComplexMatrix tk = ComplexMatrix::Identity(d, d);
  for (int k = 0; k <= degree; ++k) {
    if (b.coeffs[k] != 0.0) s += b.coeffs[k] * (tk * tk.adjoint());
    if (k == degree / 2) half = s;
    tk = tk * t;
  }
  out.convergence_residual = op_norm(s - half);
  out.c = hermitian_part(s);
  const PsdCheck check = psd_check(out.c, tol);
  out.min_eig = check.min_eig;
  out.psd = check.is_psd;
  out.f_decay = remainder_norms(t, kernel, out.c, {degree / 4, degree / 2, degree});
  out.verdict = out.psd && out.convergence_residual <= tol.residual && out.f_decay.back().norm <= tol.residual;
  return out;
}

ComplexMatrix KernelDilation::ambient_matrix() const {
  const ComplexMatrix& f = coeff_frame.basis();
  const Index r = f.cols();
  ComplexMatrix out((degree + 1) * f.rows(), matrix.cols());
  for (int k = 0; k <= degree; ++k) out.middleRows(k * f.rows(), f.rows()) = f * matrix.middleRows(k * r, r);
  return out;
}

KernelDilation srkh_dilation(const ComplexMatrix& t, const DiagonalKernel& kernel, int degree,
                             const Tolerances& tol) {
  const KContractCertificate cert = k_contractivity(t, kernel, degree, tol);
  if (!cert.verdict) {
    std::ostringstream os;
    os << "min eigenvalue " << cert.min_eig << ", convergence residual " << cert.convergence_residual
       << ", remainder " << cert.f_decay.back().norm;
    throw Error(ErrorCode::NotKContractive, os.str());
  }
  const ComplexMatrix root = psd_sqrt(cert.c, tol);
  KernelDilation out{kernel, degree, defect_frame_of(root, tol), {}, 0.0, 0.0, 0.0, false};
  const ComplexMatrix& f = out.coeff_frame.basis();
  const Index r = f.cols();
  const Index d = t.rows();
  out.matrix.resize((degree + 1) * r, d);
  ComplexMatrix block = f.adjoint() * root;
  for (int k = 0; k <= degree; ++k) {
    out.matrix.middleRows(k * r, r) = std::sqrt(kernel[k]) * block;
    block = block * t.adjoint();
  }
  out.isometry_residual = op_norm(out.matrix.adjoint() * out.matrix - ComplexMatrix::Identity(d, d));
  // M_z* psi_{k+1} = sqrt(c_k / c_{k+1}) psi_k on the box.
  ComplexMatrix back = ComplexMatrix::Zero(out.matrix.rows(), d);
  for (int k = 0; k < degree; ++k) {
    back.middleRows(k * r, r) = std::sqrt(kernel[k] / kernel[k + 1]) * out.matrix.middleRows((k + 1) * r, r);
  }
  out.intertwining_residual = op_norm(out.matrix * t.adjoint() - back);
  out.threshold = tol.residual + 2.0 * std::sqrt(out.isometry_residual);
  out.pass = out.isometry_residual <= tol.residual && out.intertwining_residual <= out.threshold;
  return out;
}

ProductKernelCertificate product_kernel_certify(const OperatorTuple& t,
                                                const std::vector<DiagonalKernel>& kernels, int degree,
                                                const Tolerances& tol) {
  if (kernels.size() != t.n()) throw Error(ErrorCode::ArityMismatch, "one kernel per axis expected");
  if (!t.is_doubly_commuting(tol)) {
    std::ostringstream os;
    os << "commutation residual " << t.commutation_residual() << ", double commutation residual "
       << t.double_commutation_residual();
    throw Error(ErrorCode::NotDoublyCommuting, os.str());
  }
  ProductKernelCertificate out;
  const Index d = t.dim();
  ComplexMatrix prod = ComplexMatrix::Identity(d, d);
  bool all = true;
  for (std::size_t i = 0; i < t.n(); ++i) {
    out.axes.push_back(k_contractivity(t[i], kernels[i], degree, tol));
    if (!out.axes.back().verdict && out.failing_axis < 0) out.failing_axis = static_cast<int>(i);
    all = all && out.axes.back().verdict;
    prod = prod * out.axes.back().c;
  }
  for (std::size_t i = 0; i < t.n(); ++i) {
    for (std::size_t j = i + 1; j < t.n(); ++j) {
      const auto& ci = out.axes[i].c;
      const auto& cj = out.axes[j].c;
      out.commutator = std::max(out.commutator, op_norm(ci * cj - cj * ci));
    }
  }
  out.c_t = hermitian_part(prod);
  const PsdCheck check = psd_check(out.c_t, tol);
  out.min_eig = check.min_eig;
  out.verdict = all && check.is_psd;
  return out;
}

}  // namespace dilab
