#pragma once

// Planted-partition instances: balanced two-community block models and
// spiked Gaussian (Z2 synchronization) matrices.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"
#include "ksrobust/operators.hpp"
#include "ksrobust/rng.hpp"

namespace ksrobust {

/// +/-1 vector that need not be balanced (estimates, rounding output).
using SignVector = std::vector<std::int8_t>;

struct SbmParams {
  std::size_t n = 0;
  double d = 0;    // average degree
  double eps = 0;  // bias; same-label pairs connect w.p. (1 + eps) d / n

  /// Distance to the Kesten-Stigum threshold.
  double delta() const { return eps * eps * d - 1.0; }

  double p_same() const { return (1.0 + eps) * d / static_cast<double>(n); }
  double p_diff() const { return (1.0 - eps) * d / static_cast<double>(n); }

  void validate() const {
    require(n >= 2, "SBM needs n >= 2");
    require(d > 0, "SBM needs d > 0");
    require(eps >= 0 && eps < 1, "SBM needs eps in [0, 1)");
    require(p_same() <= 1.0, "edge probability (1 + eps) d / n exceeds 1");
  }

  /// eps that puts (d, eps) at distance `delta` from the threshold.
  static double eps_for_delta(double d, double delta) { return std::sqrt((1.0 + delta) / d); }
};

/// Balanced +/-1 labels: sum is 0 for even n and -1 for odd n.
class LabelVector {
 public:
  LabelVector() = default;

  explicit LabelVector(SignVector entries) : entries_(std::move(entries)) {
    long sum = 0;
    for (auto x : entries_) {
      require(x == 1 || x == -1, "labels must be +1 or -1");
      sum += x;
    }
    require(std::labs(sum) <= 1 && (sum == 0 || entries_.size() % 2 == 1),
            "labels are not balanced");
  }

  std::size_t size() const { return entries_.size(); }
  std::int8_t operator[](std::size_t i) const { return entries_[i]; }
  const SignVector& entries() const { return entries_; }

  long sum() const { return std::accumulate(entries_.begin(), entries_.end(), 0L); }

  Vector as_vector() const {
    Vector x(static_cast<Index>(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) x(static_cast<Index>(i)) = entries_[i];
    return x;
  }

  LabelVector subset(std::span<const Vertex> keep) const {
    SignVector out;
    out.reserve(keep.size());
    for (Vertex v : keep) out.push_back(entries_[v]);
    LabelVector result;
    result.entries_ = std::move(out);  // a subset need not stay balanced
    return result;
  }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  SignVector entries_;
};

/// Uniformly random balanced labels; floor(n/2) entries are +1.
inline LabelVector balanced_labels(std::size_t n, Rng& rng) {
  require(n >= 2, "balanced_labels needs n >= 2");
  SignVector x(n, -1);
  std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  rng.shuffle(x);
  return LabelVector(std::move(x));
}

namespace detail {

// Geometric-skip Bernoulli sampling over the candidate list `targets`
// (all > source), appending selected pairs.
inline void skip_sample(Vertex source, std::span<const Vertex> targets, double p, Rng& rng,
                        std::vector<Edge>& out) {
  if (p <= 0 || targets.empty()) return;
  std::uint64_t pos = rng.geometric(p);
  while (pos < targets.size()) {
    out.push_back({source, targets[pos]});
    pos += 1 + rng.geometric(p);
  }
}

}  // namespace detail

/// Per-pair Bernoulli sampling up to this size, geometric skipping above.
inline constexpr std::size_t kDensePairSamplingLimit = 5000;

inline Graph sample_sbm(const SbmParams& params, const LabelVector& labels, Rng& rng) {
  params.validate();
  require(labels.size() == params.n, "labels length differs from n");
  const std::size_t n = params.n;
  const double p_same = params.p_same();
  const double p_diff = params.p_diff();
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(params.d * n / 2 * 1.1) + 16);

  if (n <= kDensePairSamplingLimit) {
    for (Vertex i = 0; i < n; ++i) {
      for (Vertex j = i + 1; j < n; ++j) {
        const double p = labels[i] == labels[j] ? p_same : p_diff;
        if (rng.uniform() < p) edges.push_back({i, j});
      }
    }
  } else {
    std::vector<Vertex> plus, minus;
    for (Vertex i = 0; i < n; ++i) (labels[i] > 0 ? plus : minus).push_back(i);
    for (Vertex i = 0; i < n; ++i) {
      const auto& same = labels[i] > 0 ? plus : minus;
      const auto& other = labels[i] > 0 ? minus : plus;
      const auto same_from = std::upper_bound(same.begin(), same.end(), i) - same.begin();
      const auto other_from = std::upper_bound(other.begin(), other.end(), i) - other.begin();
      detail::skip_sample(i, std::span<const Vertex>(same).subspan(static_cast<std::size_t>(same_from)),
                          p_same, rng, edges);
      detail::skip_sample(i, std::span<const Vertex>(other).subspan(static_cast<std::size_t>(other_from)),
                          p_diff, rng, edges);
    }
  }
  return Graph(n, std::move(edges));
}

/// sigma x x^T + W with W symmetric Gaussian: off-diagonal variance n,
/// diagonal variance 2n.
struct Z2Instance {
  std::size_t n = 0;
  double sigma = 0;
  DenseMatrix matrix;
  LabelVector labels;
};

inline Z2Instance sample_z2(std::size_t n, double sigma, const LabelVector& labels, Rng& rng) {
  require(n >= 2, "sample_z2 needs n >= 2");
  require(sigma >= 0, "sample_z2 needs sigma >= 0");
  require(labels.size() == n, "labels length differs from n");
  const double scale = std::sqrt(static_cast<double>(n));
  DenseMatrix a(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    a(i, i) = sigma + std::sqrt(2.0) * scale * rng.normal();
    for (Index j = i + 1; j < static_cast<Index>(n); ++j) {
      const double value = sigma * labels[i] * labels[j] + scale * rng.normal();
      a(i, j) = value;
      a(j, i) = value;
    }
  }
  return Z2Instance{n, sigma, std::move(a), labels};
}

}  // namespace ksrobust
