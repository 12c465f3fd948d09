#include "cams/random.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace cams {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return boost::random::uniform_01<double>{}(engine_);
}

double Rng::normal() {
    return boost::random::normal_distribution<double>{}(engine_);
}

double Rng::beta(double a, double b) {
    return boost::random::beta_distribution<double>{a, b}(engine_);
}

long Rng::binomial(long n, double p) {
    return boost::random::binomial_distribution<long, double>{n, p}(engine_);
}

} // namespace cams
