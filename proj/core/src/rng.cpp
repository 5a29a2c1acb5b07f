#include "binar/rng.hpp"

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace binar {

std::int64_t sample_poisson(double mean, RngStream& rng) {
    if (mean <= 0.0) return 0;
    boost::random::poisson_distribution<std::int64_t, double> dist(mean);
    return dist(rng);
}

namespace {

constexpr std::int64_t kDirectBernoulliLimit = 16;

std::int64_t sample_binomial(std::int64_t n, double p, RngStream& rng) {
    if (n <= kDirectBernoulliLimit) {
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n; ++i) hits += rng.uniform() < p ? 1 : 0;
        return hits;
    }
    boost::random::binomial_distribution<std::int64_t, double> dist(n, p);
    return dist(rng);
}

}  // namespace

std::int64_t thin(const OffspringFamily& family, std::int64_t x, RngStream& rng) {
    if (x <= 0) return 0;
    switch (family.kind()) {
        case FamilyKind::Bernoulli: return sample_binomial(x, family.mean(), rng);
        case FamilyKind::Poisson: return sample_poisson(static_cast<double>(x) * family.mean(), rng);
    }
    return 0;
}

ImmigrationPair sample_immigration_pair(const ImmigrationSpec& spec, RngStream& rng) {
    const std::int64_t shared = sample_poisson(spec.lambda0, rng);
    const std::int64_t w1 = sample_poisson(spec.lambda1, rng);
    const std::int64_t w2 = sample_poisson(spec.lambda2, rng);
    return {shared + w1, shared + w2};
}

std::int64_t sample_immigration(const ImmigrationSpec& spec, bool odd, RngStream& rng) {
    const std::int64_t shared = sample_poisson(spec.lambda0, rng);
    return shared + sample_poisson(odd ? spec.lambda2 : spec.lambda1, rng);
}

}  // namespace binar
