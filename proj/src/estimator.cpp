#include "sspd/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace sspd {

SlidingEstimator::SlidingEstimator(std::size_t eta)
    : recorders_(eta, kNeverSeen) {
  if (eta < 2) throw std::invalid_argument("SlidingEstimator: eta must be >= 2");
}

void SlidingEstimator::touch(std::size_t bucket) {
  if (bucket >= recorders_.size())
    throw std::out_of_range("SlidingEstimator::touch: bucket out of range");
  rec::touch(recorders_, bucket);
}

std::size_t SlidingEstimator::active_count(uint32_t k) const {
  if (k < 1 || k > 65534)
    throw std::out_of_range("active_count: k must be in [1, 65534]");
  return rec::active_count(recorders_, k);
}

double estimate_cardinality(std::size_t eta, std::size_t r_k) {
  const std::size_t z0 = eta - r_k;
  const double deta = static_cast<double>(eta);
  if (z0 == 0) return deta * std::log(deta);
  return -deta * std::log(static_cast<double>(z0) / deta);
}

std::size_t hot_cutoff(std::size_t eta, double theta) {
  const double deta = static_cast<double>(eta);
  return static_cast<std::size_t>(
      std::ceil(deta * (1.0 - std::exp(-theta / deta))));
}

namespace {

template <typename Combine>
SlidingEstimator combine(const std::vector<SlidingEstimator>& inputs,
                         Combine op) {
  if (inputs.empty())
    throw std::invalid_argument("combine: empty estimator set");
  SlidingEstimator out = inputs.front();
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    if (inputs[i].eta() != out.eta())
      throw std::invalid_argument("combine: mismatched eta");
    op(out.recorders(), inputs[i].recorders());
  }
  return out;
}

}  // namespace

SlidingEstimator merge_min(const std::vector<SlidingEstimator>& inputs) {
  return combine(inputs, [](std::span<Recorder> a, std::span<const Recorder> b) {
    rec::combine_min(a, b);
  });
}

SlidingEstimator intersect_max(const std::vector<SlidingEstimator>& inputs) {
  return combine(inputs, [](std::span<Recorder> a, std::span<const Recorder> b) {
    rec::combine_max(a, b);
  });
}

}  // namespace sspd
