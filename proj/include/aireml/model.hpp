#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aireml/error.hpp"

namespace aireml {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// How the structural variance parameters kappa are expressed. On the log
/// scale each structural parameter is exp(lambda); sigma2 is always natural.
enum class Scale { natural, log };

struct Dataset {
  VectorXd y;
  MatrixXd X;
  MatrixXd Z;  // n x b, b may be zero
};

/// One block of G: gamma_g * K_g, with K_g the identity when `kernel` is empty.
struct RandomGroup {
  std::string name;
  Index width = 0;
  std::optional<MatrixXd> kernel;
};

struct ResidualStructure {
  enum class Kind { identity, partitioned };

  Kind kind = Kind::identity;
  /// Partition index per observation. Partition 0 is pinned to coefficient 1,
  /// partitions 1..count-1 each own one parameter phi_r.
  std::vector<int> partition;
  int count = 1;
  std::vector<std::string> labels;

  static ResidualStructure identity();
  static ResidualStructure partitioned(std::vector<int> partition, int count,
                                       std::vector<std::string> labels = {});

  int num_parameters() const { return kind == Kind::identity ? 0 : count - 1; }
};

struct VarianceSpec {
  std::vector<RandomGroup> groups;
  ResidualStructure residual;
  Scale scale = Scale::natural;
};

/// theta = (sigma2, kappa); kappa is ordered groups first, then residual
/// partitions 1..count-1, and is expressed on the VarianceSpec scale.
struct Theta {
  double sigma2 = 1.0;
  VectorXd kappa;

  /// Packs (sigma2, kappa...) into one vector of length m + 1.
  VectorXd packed() const;
  static Theta unpack(const VectorXd& packed);
};

enum class ParameterKind { group, residual_partition };

/// Validated, immutable model. Copies share the same underlying data.
class Model {
 public:
  Index n() const { return data_->dataset.y.size(); }
  Index p() const { return data_->dataset.X.cols(); }
  Index b() const { return data_->dataset.Z.cols(); }
  /// Number of structural parameters (length of kappa).
  Index m() const;
  Index num_groups() const { return static_cast<Index>(data_->spec.groups.size()); }

  const VectorXd& y() const { return data_->dataset.y; }
  const MatrixXd& X() const { return data_->dataset.X; }
  const MatrixXd& Z() const { return data_->dataset.Z; }
  /// [X, Z]
  const MatrixXd& W() const { return data_->W; }
  const Dataset& dataset() const { return data_->dataset; }
  const VarianceSpec& spec() const { return data_->spec; }
  Scale scale() const { return data_->spec.scale; }

  /// Same model with the response replaced (used for simulated replicates).
  Model with_response(VectorXd y) const;

  /// Column offset of group g inside Z.
  Index group_offset(Index g) const { return data_->group_offsets[static_cast<size_t>(g)]; }
  Index group_width(Index g) const { return data_->spec.groups[static_cast<size_t>(g)].width; }
  bool group_has_kernel(Index g) const;
  /// K_g (identity materialized when the group has no explicit kernel).
  MatrixXd group_kernel(Index g) const;
  /// K_g^{-1}, or empty when the explicit kernel is singular.
  const std::optional<MatrixXd>& kernel_inverse(Index g) const;
  /// F with F F^T = K_g, negative eigenvalues clipped to zero.
  const MatrixXd& kernel_sqrt(Index g) const;

  ParameterKind parameter_kind(Index i) const;
  std::string parameter_name(Index i) const;
  /// Observations belonging to the residual partition driven by parameter i.
  const std::vector<Index>& partition_rows(Index i) const;

  bool admissible(const Theta& theta) const;
  void require_admissible(const Theta& theta) const;

  /// kappa mapped to the natural scale (gamma, phi).
  VectorXd natural_kappa(const Theta& theta) const;
  /// d kappa_natural / d kappa_i: 1 on the natural scale, exp(lambda_i) on log.
  double chain_factor(const Theta& theta, Index i) const;
  /// Diagonal of R(phi).
  VectorXd residual_diagonal(const Theta& theta) const;

  /// dH/dkappa_i * v without materializing n x n matrices.
  VectorXd apply_dH(const Theta& theta, Index i, const VectorXd& v) const;
  /// d2H/dkappa_i dkappa_j * v.
  VectorXd apply_d2H(const Theta& theta, Index i, Index j, const VectorXd& v) const;

 private:
  struct Data {
    Dataset dataset;
    VarianceSpec spec;
    MatrixXd W;
    std::vector<Index> group_offsets;
    std::vector<std::optional<MatrixXd>> kernel_inverses;
    std::vector<MatrixXd> kernel_sqrts;
    std::vector<std::vector<Index>> partition_rows;
  };

  explicit Model(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  void check_index(Index i) const;

  std::shared_ptr<const Data> data_;

  friend Model validate(Dataset dataset, VarianceSpec spec);
};

/// Checks dimensions, rank of X and kernel PSD-ness, and returns the model.
Model validate(Dataset dataset, VarianceSpec spec);

/// H = R(phi) + Z G(gamma) Z^T.
MatrixXd build_H(const Model& model, const Theta& theta);
MatrixXd dH(const Model& model, const Theta& theta, Index i);
MatrixXd d2H(const Model& model, const Theta& theta, Index i, Index j);

}  // namespace aireml
