#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace rpl::agent {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Running per-coordinate mean and variance. Raw inputs are clipped to
// [-clip_raw, clip_raw] before they enter the statistics; normalized outputs
// are clipped to [-clip_norm, clip_norm].
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(int dim, double clip_raw = 200.0, double clip_norm = 5.0, double eps = 0.01);

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const Vec& mean() const { return mean_; }
  const Vec& var() const { return var_; }
  Vec stddev() const;

  // Columns are samples. Merged with the running statistics exactly
  // (parallel-variance combination), so update order within one call does
  // not matter.
  void update(const Mat& samples);
  Vec normalize(const Vec& x) const;
  Mat normalize_batch(const Mat& x) const;

  bool operator==(const Normalizer& o) const;

  // `RPLNORM v1 <dim> <count>` then one `mean variance` pair per line.
  void save(std::ostream& os) const;
  static Normalizer load(std::istream& is, double clip_raw = 200.0, double clip_norm = 5.0, double eps = 0.01);

 private:
  double clip_raw_ = 200.0;
  double clip_norm_ = 5.0;
  double eps_ = 0.01;
  double count_ = 0.0;
  Vec mean_;
  Vec var_;
};

}  // namespace rpl::agent
