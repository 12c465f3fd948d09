#pragma once

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>

namespace cams {

/// splitmix64 finalizer; derives independent stream seeds from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded generator whose output is identical on every platform (Boost
/// distributions are specified exactly, unlike <random>'s).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();  // [0, 1)
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double beta(double a, double b);
    long binomial(long n, double p);

    boost::random::mt19937_64& engine() { return engine_; }

private:
    boost::random::mt19937_64 engine_;
};

} // namespace cams
