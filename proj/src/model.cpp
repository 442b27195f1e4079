#include "aireml/model.hpp"

#include <cmath>
#include <sstream>

namespace aireml {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kPsdTolerance = 1e-10;

std::string dims(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

void check_rank(const MatrixXd& X) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  const MatrixXd& r = qr.matrixR();
  const Index k = std::min(X.rows(), X.cols());
  double largest = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < k; ++i) {
    largest = std::max(largest, std::abs(r(i, i)));
    smallest = std::min(smallest, std::abs(r(i, i)));
  }
  if (k < X.cols() || largest == 0.0 || smallest < kRankTolerance * largest) {
    throw Error(ErrorCode::RankDeficientX,
                "fixed-effects design is not of full column rank " + std::to_string(X.cols()));
  }
}

}  // namespace

ResidualStructure ResidualStructure::identity() { return {}; }

ResidualStructure ResidualStructure::partitioned(std::vector<int> partition, int count,
                                                 std::vector<std::string> labels) {
  ResidualStructure r;
  r.kind = Kind::partitioned;
  r.partition = std::move(partition);
  r.count = count;
  r.labels = std::move(labels);
  return r;
}

VectorXd Theta::packed() const {
  VectorXd v(kappa.size() + 1);
  v(0) = sigma2;
  v.tail(kappa.size()) = kappa;
  return v;
}

Theta Theta::unpack(const VectorXd& packed) {
  return Theta{packed(0), packed.tail(packed.size() - 1)};
}

Model validate(Dataset dataset, VarianceSpec spec) {
  const Index n = dataset.y.size();
  const Index p = dataset.X.cols();
  if (n < 1 || p < 1) {
    throw Error(ErrorCode::DimensionMismatch, "need at least one observation and one fixed effect");
  }
  if (dataset.X.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "X is " + dims(dataset.X.rows(), p) + " but y has " + std::to_string(n) + " rows");
  }
  if (n <= p) {
    throw Error(ErrorCode::DimensionMismatch,
                "need n > p, got n=" + std::to_string(n) + " p=" + std::to_string(p));
  }
  if (dataset.Z.size() == 0) dataset.Z.resize(n, 0);
  if (dataset.Z.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "Z is " + dims(dataset.Z.rows(), dataset.Z.cols()) + " but y has " +
                    std::to_string(n) + " rows");
  }
  if (!dataset.y.allFinite() || !dataset.X.allFinite() || !dataset.Z.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "non-finite entries in y, X or Z");
  }

  auto data = std::make_shared<Model::Data>();
  Index width_sum = 0;
  for (const auto& g : spec.groups) {
    if (g.width <= 0) {
      throw Error(ErrorCode::DimensionMismatch, "group '" + g.name + "' has non-positive width");
    }
    data->group_offsets.push_back(width_sum);
    width_sum += g.width;
  }
  if (width_sum != dataset.Z.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Z has " + std::to_string(dataset.Z.cols()) +
                    " columns but group widths sum to " + std::to_string(width_sum));
  }

  for (const auto& g : spec.groups) {
    if (!g.kernel) {
      data->kernel_inverses.emplace_back(MatrixXd::Identity(g.width, g.width));
      data->kernel_sqrts.push_back(MatrixXd::Identity(g.width, g.width));
      continue;
    }
    const MatrixXd& K = *g.kernel;
    if (K.rows() != g.width || K.cols() != g.width) {
      throw Error(ErrorCode::DimensionMismatch,
                  "kernel for group '" + g.name + "' is " + dims(K.rows(), K.cols()) +
                      ", expected " + dims(g.width, g.width));
    }
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if (!K.allFinite() || (K - K.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance * scale) {
      throw Error(ErrorCode::NonPSDKernel, "kernel for group '" + g.name + "' is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K);
    const VectorXd& lambda = eig.eigenvalues();
    const double largest = lambda.maxCoeff();
    const double smallest = lambda.minCoeff();
    if (smallest < -kPsdTolerance * std::max(largest, 0.0)) {
      throw Error(ErrorCode::NonPSDKernel,
                  "kernel for group '" + g.name + "' has negative eigenvalue " +
                      std::to_string(smallest));
    }
    const MatrixXd& V = eig.eigenvectors();
    data->kernel_sqrts.push_back(V * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal());
    if (largest > 0.0 && smallest > kPsdTolerance * largest) {
      MatrixXd inv = V * lambda.cwiseInverse().asDiagonal() * V.transpose();
      data->kernel_inverses.emplace_back(0.5 * (inv + inv.transpose()));
    } else {
      data->kernel_inverses.emplace_back(std::nullopt);
    }
  }

  auto& residual = spec.residual;
  if (residual.kind == ResidualStructure::Kind::partitioned) {
    if (static_cast<Index>(residual.partition.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "residual partition has " + std::to_string(residual.partition.size()) +
                      " labels for " + std::to_string(n) + " observations");
    }
    if (residual.count < 1) {
      throw Error(ErrorCode::DimensionMismatch, "residual partition count must be positive");
    }
    std::vector<std::vector<Index>> rows(static_cast<size_t>(residual.count));
    for (Index i = 0; i < n; ++i) {
      const int r = residual.partition[static_cast<size_t>(i)];
      if (r < 0 || r >= residual.count) {
        throw Error(ErrorCode::DimensionMismatch,
                    "residual partition label " + std::to_string(r) + " out of range");
      }
      rows[static_cast<size_t>(r)].push_back(i);
    }
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].empty()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "residual partition " + std::to_string(r) + " has no observations");
      }
    }
    // partition 0 is pinned, so only 1..count-1 carry parameters
    data->partition_rows.assign(rows.begin() + 1, rows.end());
  }

  check_rank(dataset.X);

  data->W.resize(n, p + dataset.Z.cols());
  data->W << dataset.X, dataset.Z;
  data->dataset = std::move(dataset);
  data->spec = std::move(spec);
  return Model(std::move(data));
}

Model Model::with_response(VectorXd y) const {
  if (y.size() != n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response has " + std::to_string(y.size()) + " entries, model has " + std::to_string(n()));
  }
  auto data = std::make_shared<Data>(*data_);
  data->dataset.y = std::move(y);
  return Model(std::move(data));
}

Index Model::m() const {
  return num_groups() + data_->spec.residual.num_parameters();
}

bool Model::group_has_kernel(Index g) const {
  return data_->spec.groups[static_cast<size_t>(g)].kernel.has_value();
}

MatrixXd Model::group_kernel(Index g) const {
  const auto& group = data_->spec.groups[static_cast<size_t>(g)];
  return group.kernel ? *group.kernel : MatrixXd::Identity(group.width, group.width);
}

const std::optional<MatrixXd>& Model::kernel_inverse(Index g) const {
  return data_->kernel_inverses[static_cast<size_t>(g)];
}

const MatrixXd& Model::kernel_sqrt(Index g) const {
  return data_->kernel_sqrts[static_cast<size_t>(g)];
}

void Model::check_index(Index i) const {
  if (i < 0 || i >= m()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "parameter index " + std::to_string(i) + " outside [0, " + std::to_string(m()) + ")");
  }
}

ParameterKind Model::parameter_kind(Index i) const {
  check_index(i);
  return i < num_groups() ? ParameterKind::group : ParameterKind::residual_partition;
}

std::string Model::parameter_name(Index i) const {
  check_index(i);
  const std::string prefix = scale() == Scale::log ? "log_" : "";
  if (i < num_groups()) {
    return prefix + "gamma:" + data_->spec.groups[static_cast<size_t>(i)].name;
  }
  const auto& residual = data_->spec.residual;
  const auto r = static_cast<size_t>(i - num_groups() + 1);
  const std::string label = r < residual.labels.size() ? residual.labels[r] : std::to_string(r);
  return prefix + "phi:" + label;
}

const std::vector<Index>& Model::partition_rows(Index i) const {
  if (parameter_kind(i) != ParameterKind::residual_partition) {
    throw Error(ErrorCode::IndexOutOfRange, "parameter " + std::to_string(i) + " is not residual");
  }
  return data_->partition_rows[static_cast<size_t>(i - num_groups())];
}

bool Model::admissible(const Theta& theta) const {
  if (theta.kappa.size() != m()) return false;
  if (!std::isfinite(theta.sigma2) || theta.sigma2 <= 0.0) return false;
  if (!theta.kappa.allFinite()) return false;
  if (scale() == Scale::natural) return (theta.kappa.array() > 0.0).all();
  // exp must stay representable and positive
  return (theta.kappa.array() < 700.0).all() && (theta.kappa.array() > -700.0).all();
}

void Model::require_admissible(const Theta& theta) const {
  if (theta.kappa.size() != m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "theta has " + std::to_string(theta.kappa.size()) + " structural parameters, model has " +
                    std::to_string(m()));
  }
  if (!admissible(theta)) {
    std::ostringstream os;
    os << "sigma2=" << theta.sigma2 << " kappa=[" << theta.kappa.transpose() << "]";
    throw Error(ErrorCode::InadmissibleTheta, os.str());
  }
}

VectorXd Model::natural_kappa(const Theta& theta) const {
  return scale() == Scale::log ? VectorXd(theta.kappa.array().exp()) : theta.kappa;
}

double Model::chain_factor(const Theta& theta, Index i) const {
  check_index(i);
  return scale() == Scale::log ? std::exp(theta.kappa(i)) : 1.0;
}

VectorXd Model::residual_diagonal(const Theta& theta) const {
  VectorXd r = VectorXd::Ones(n());
  const VectorXd kappa = natural_kappa(theta);
  for (Index i = num_groups(); i < m(); ++i) {
    for (Index row : partition_rows(i)) r(row) = kappa(i);
  }
  return r;
}

VectorXd Model::apply_dH(const Theta& theta, Index i, const VectorXd& v) const {
  const double factor = chain_factor(theta, i);
  if (parameter_kind(i) == ParameterKind::group) {
    const auto Zg = Z().middleCols(group_offset(i), group_width(i));
    VectorXd t = Zg.transpose() * v;
    if (group_has_kernel(i)) t = *data_->spec.groups[static_cast<size_t>(i)].kernel * t;
    return factor * (Zg * t);
  }
  VectorXd out = VectorXd::Zero(n());
  for (Index row : partition_rows(i)) out(row) = factor * v(row);
  return out;
}

VectorXd Model::apply_d2H(const Theta& theta, Index i, Index j, const VectorXd& v) const {
  check_index(i);
  check_index(j);
  if (scale() == Scale::natural || i != j) return VectorXd::Zero(n());
  return apply_dH(theta, i, v);
}

MatrixXd build_H(const Model& model, const Theta& theta) {
  model.require_admissible(theta);
  MatrixXd H = model.residual_diagonal(theta).asDiagonal();
  const VectorXd kappa = model.natural_kappa(theta);
  for (Index g = 0; g < model.num_groups(); ++g) {
    const auto Zg = model.Z().middleCols(model.group_offset(g), model.group_width(g));
    if (model.group_has_kernel(g)) {
      H.noalias() += kappa(g) * (Zg * model.group_kernel(g) * Zg.transpose());
    } else {
      H.noalias() += kappa(g) * (Zg * Zg.transpose());
    }
  }
  return H;
}

MatrixXd dH(const Model& model, const Theta& theta, Index i) {
  const double factor = model.chain_factor(theta, i);
  if (model.parameter_kind(i) == ParameterKind::group) {
    const auto Zg = model.Z().middleCols(model.group_offset(i), model.group_width(i));
    return factor * (Zg * model.group_kernel(i) * Zg.transpose());
  }
  MatrixXd out = MatrixXd::Zero(model.n(), model.n());
  for (Index row : model.partition_rows(i)) out(row, row) = factor;
  return out;
}

MatrixXd d2H(const Model& model, const Theta& theta, Index i, Index j) {
  if (j < 0 || j >= model.m()) {
    throw Error(ErrorCode::IndexOutOfRange, "parameter index " + std::to_string(j));
  }
  if (model.scale() == Scale::natural || i != j) {
    model.parameter_kind(i);  // range check
    return MatrixXd::Zero(model.n(), model.n());
  }
  return dH(model, theta, i);
}

}  // namespace aireml
