#include "brownmeasure/spectral_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "brownmeasure/error.hpp"

namespace brown {

namespace {

constexpr double kWeightTolerance = 1e-12;

void check_nodes(std::span<const SpectralNode> nodes) {
  for (const auto& n : nodes) {
    if (!std::isfinite(n.location.real()) || !std::isfinite(n.location.imag())) {
      throw InvalidArgument("spectral node location must be finite");
    }
    if (!(n.weight >= 0.0) || !std::isfinite(n.weight)) {
      throw InvalidArgument("spectral node weight must be finite and non-negative");
    }
  }
}

std::vector<SpectralNode> real_nodes(const std::vector<std::pair<double, double>>& rows) {
  std::vector<SpectralNode> out;
  out.reserve(rows.size());
  for (const auto& [x, w] : rows) out.push_back({complex(x, 0.0), w});
  return out;
}

}  // namespace

void require_finite(complex lambda, const char* what) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw InvalidArgument(std::string(what) + " must be finite");
  }
}

// ---------------------------------------------------------------------------
// LocalSpectrum

LocalSpectrum LocalSpectrum::from_nodes(complex lambda, std::span<const SpectralNode> nodes) {
  LocalSpectrum ls;
  ls.dist2_.reserve(nodes.size());
  ls.weight_.reserve(nodes.size());
  ls.coupling_.reserve(nodes.size());
  for (const auto& n : nodes) {
    if (n.weight == 0.0) continue;
    const complex diff = lambda - n.location;
    ls.dist2_.push_back(std::norm(diff));
    ls.weight_.push_back(n.weight);
    ls.coupling_.push_back(diff);
    if (std::abs(diff) <= kCoincidenceTolerance) ls.on_atom_ = true;
  }
  return ls;
}

LocalSpectrum LocalSpectrum::from_matrix(complex lambda, const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  Eigen::MatrixXcd x = -a;
  x.diagonal().array() += lambda;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericalFailure("singular value decomposition failed");
  }
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXcd m = svd.matrixV().adjoint() * svd.matrixU();

  LocalSpectrum ls;
  const double inv_n = 1.0 / static_cast<double>(n);
  ls.dist2_.resize(n);
  ls.weight_.assign(n, inv_n);
  ls.coupling_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ls.dist2_[i] = sv(i) * sv(i);
    ls.coupling_[i] = sv(i) * m(i, i);
    if (sv(i) <= kCoincidenceTolerance) ls.on_atom_ = true;
  }
  ls.mixing_ = m.cwiseAbs2() * inv_n;
  return ls;
}

double LocalSpectrum::h_inv(double s) const {
  const double s2 = s * s;
  double acc = 0.0;
  for (std::size_t i = 0; i < dist2_.size(); ++i) acc += weight_[i] / (dist2_[i] + s2);
  return acc;
}

double LocalSpectrum::h_inv_sq(double s) const {
  const double s2 = s * s;
  double acc = 0.0;
  for (std::size_t i = 0; i < dist2_.size(); ++i) {
    const double d = 1.0 / (dist2_[i] + s2);
    acc += weight_[i] * d * d;
  }
  return acc;
}

TraceBundle LocalSpectrum::traces(double s) const {
  const double s2 = s * s;
  const std::size_t n = dist2_.size();
  TraceBundle b;
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double di = 1.0 / (dist2_[i] + s2);
    d(static_cast<Eigen::Index>(i)) = di;
    b.h_inv += weight_[i] * di;
    b.h_inv_sq += weight_[i] * di * di;
    b.cross += weight_[i] * di * di * coupling_[i];
    b.p0 += weight_[i] * di * std::conj(coupling_[i]);
  }
  if (mixing_.size() == 0) {
    b.hk_inv = b.h_inv_sq;
  } else {
    b.hk_inv = d.dot(mixing_ * d);
  }
  return b;
}

complex LocalSpectrum::p0(double s) const {
  const double s2 = s * s;
  complex acc;
  for (std::size_t i = 0; i < dist2_.size(); ++i) acc += weight_[i] / (dist2_[i] + s2) * std::conj(coupling_[i]);
  return acc;
}

double LocalSpectrum::log_det_h(double s) const {
  const double s2 = s * s;
  double acc = 0.0;
  for (std::size_t i = 0; i < dist2_.size(); ++i) {
    const double v = dist2_[i] + s2;
    if (v == 0.0) return -std::numeric_limits<double>::infinity();
    acc += weight_[i] * std::log(v);
  }
  return acc;
}

double LocalSpectrum::h_inv_at_zero() const {
  if (on_atom_) return std::numeric_limits<double>::infinity();
  return h_inv(0.0);
}

// ---------------------------------------------------------------------------
// SpectralModel

void SpectralModel::validate_measure() const {
  check_nodes(atoms_);
  check_nodes(abscont_);
  if (nodes_.empty()) throw InvalidArgument("spectral model needs at least one node");
  double total = 0.0;
  for (const auto& n : nodes_) total += n.weight;
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw InvalidArgument("spectral weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

SpectralModel SpectralModel::self_adjoint(std::vector<std::pair<double, double>> atoms,
                                          std::vector<std::pair<double, double>> abscont) {
  SpectralModel m = normal_plane(real_nodes(atoms), real_nodes(abscont));
  m.variant_ = Variant::SelfAdjoint;
  return m;
}

SpectralModel SpectralModel::normal_plane(std::vector<SpectralNode> atoms, std::vector<SpectralNode> abscont) {
  SpectralModel m;
  m.variant_ = Variant::NormalPlane;
  m.atoms_ = std::move(atoms);
  m.abscont_ = std::move(abscont);
  m.nodes_ = m.atoms_;
  m.nodes_.insert(m.nodes_.end(), m.abscont_.begin(), m.abscont_.end());
  m.validate_measure();
  return m;
}

SpectralModel SpectralModel::dense_matrix(Eigen::MatrixXcd entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw InvalidArgument("dense matrix model must be square and non-empty");
  }
  if (!entries.allFinite()) throw InvalidArgument("dense matrix entries must be finite");
  SpectralModel m;
  m.variant_ = Variant::DenseMatrix;
  m.matrix_ = std::move(entries);
  return m;
}

SpectralModel SpectralModel::zero() { return normal_plane({{complex(0.0, 0.0), 1.0}}); }

SpectralModel SpectralModel::conjugate() const {
  SpectralModel m = *this;
  if (is_matrix()) {
    m.matrix_ = matrix_.conjugate();
    return m;
  }
  for (auto* list : {&m.atoms_, &m.abscont_, &m.nodes_}) {
    for (auto& n : *list) n.location = std::conj(n.location);
  }
  return m;
}

LocalSpectrum SpectralModel::at(complex lambda) const {
  require_finite(lambda, "lambda");
  if (is_matrix()) return LocalSpectrum::from_matrix(lambda, matrix_);
  return LocalSpectrum::from_nodes(lambda, nodes_);
}

TraceBundle trace_bundle(const SpectralModel& model, complex lambda, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("trace_bundle requires finite s > 0");
  const TraceBundle b = model.at(lambda).traces(s);
  if (!std::isfinite(b.h_inv) || !std::isfinite(b.hk_inv)) {
    throw NumericalFailure("non-finite trace functional");
  }
  return b;
}

double h_inv_at_zero(const SpectralModel& model, complex lambda) { return model.at(lambda).h_inv_at_zero(); }

}  // namespace brown
