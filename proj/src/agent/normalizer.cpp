#include "rpl/agent/normalizer.hpp"

#include <istream>
#include <ostream>

#include "rpl/common/error.hpp"

namespace rpl::agent {

Normalizer::Normalizer(int dim, double clip_raw, double clip_norm, double eps)
    : clip_raw_(clip_raw), clip_norm_(clip_norm), eps_(eps), mean_(Vec::Zero(dim)), var_(Vec::Ones(dim)) {
  require(dim >= 1, "Normalizer: dimension must be >= 1");
  require(clip_raw > 0 && clip_norm > 0 && eps > 0, "Normalizer: clip ranges and eps must be positive");
}

Vec Normalizer::stddev() const { return var_.cwiseMax(eps_ * eps_).cwiseSqrt(); }

void Normalizer::update(const Mat& samples) {
  require(samples.rows() == dim(), "Normalizer::update: sample dimension mismatch");
  if (samples.cols() == 0) return;
  const Mat x = samples.cwiseMax(-clip_raw_).cwiseMin(clip_raw_);
  const double n = static_cast<double>(x.cols());
  const Vec m = x.rowwise().mean();
  const Vec v = (x.colwise() - m).array().square().rowwise().sum().matrix() / n;
  if (count_ == 0.0) {
    count_ = n;
    mean_ = m;
    var_ = v;
    return;
  }
  const double total = count_ + n;
  const Vec delta = m - mean_;
  const Vec m2 = var_ * count_ + v * n + delta.cwiseProduct(delta) * (count_ * n / total);
  mean_ += delta * (n / total);
  var_ = m2 / total;
  count_ = total;
}

Vec Normalizer::normalize(const Vec& x) const {
  require(x.size() == dim(), "Normalizer::normalize: dimension mismatch");
  const Vec clipped = x.cwiseMax(-clip_raw_).cwiseMin(clip_raw_);
  return ((clipped - mean_).array() / stddev().array()).matrix().cwiseMax(-clip_norm_).cwiseMin(clip_norm_);
}

Mat Normalizer::normalize_batch(const Mat& x) const {
  require(x.rows() == dim(), "Normalizer::normalize: dimension mismatch");
  const Vec inv = stddev().cwiseInverse();
  Mat out = x.cwiseMax(-clip_raw_).cwiseMin(clip_raw_);
  out.colwise() -= mean_;
  out = inv.asDiagonal() * out;
  return out.cwiseMax(-clip_norm_).cwiseMin(clip_norm_);
}

bool Normalizer::operator==(const Normalizer& o) const {
  return count_ == o.count_ && mean_ == o.mean_ && var_ == o.var_ && clip_raw_ == o.clip_raw_ &&
         clip_norm_ == o.clip_norm_ && eps_ == o.eps_;
}

void Normalizer::save(std::ostream& os) const {
  const auto precision = os.precision(17);
  os << "RPLNORM v1 " << dim() << ' ' << count_ << '\n';
  for (int i = 0; i < dim(); ++i) os << mean_(i) << ' ' << var_(i) << '\n';
  os.precision(precision);
}

Normalizer Normalizer::load(std::istream& is, double clip_raw, double clip_norm, double eps) {
  std::string magic, version;
  int dim = 0;
  double count = 0;
  if (!(is >> magic >> version >> dim >> count) || magic != "RPLNORM" || version != "v1" || dim < 1)
    throw ConfigError("Normalizer::load: missing RPLNORM v1 header");
  Normalizer n(dim, clip_raw, clip_norm, eps);
  n.count_ = count;
  for (int i = 0; i < dim; ++i)
    if (!(is >> n.mean_(i) >> n.var_(i))) throw ConfigError("Normalizer::load: truncated file");
  return n;
}

}  // namespace rpl::agent
